import csv
import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fansub.convexify import (ConvexInterpolant, ConvexifyError, build, check_interpolation_data,
                              eval_energy, eval_energy_array, export_pressure_table, knots_from_config,
                              pressure, pressure_grid, pressure_law)

SINGLE = [(2, 5, 3)]
PARABOLA = [(r, r * r, 2 * r) for r in (1, 2, 3)]


@pytest.fixture(scope="module")
def witness_interp():
    from fansub.witness import builtin_witness

    return build(knots_from_config(builtin_witness()))


def test_check_interpolation_data(witness):
    assert check_interpolation_data(knots_from_config(witness)) >= Fraction(1, 3)
    assert check_interpolation_data([(1, 1, 2), (2, 4, 4)]) == 1
    assert check_interpolation_data([(1, 1, 1), (2, 2, 1)]) == 0
    assert check_interpolation_data(SINGLE) is None
    with pytest.raises(ConvexifyError, match="inconsistent"):
        check_interpolation_data([(1, 1, 2), (1, 2, 2)])
    # repeated identical knots are merged
    assert check_interpolation_data([(1, 1, 2), (1, 1, 2), (2, 4, 4)]) == 1


def test_build_rejects_bad_data():
    with pytest.raises(ConvexifyError, match="tangent-line"):
        build([(1, 1, 1), (2, 2, 1)])
    with pytest.raises(ConvexifyError, match="not positive"):
        build([(1, 1, -1)])
    with pytest.raises(ConvexifyError):
        build([(0, 1, 1)])
    with pytest.raises(ConvexifyError):
        build([])
    with pytest.raises(ConvexifyError):
        build(SINGLE, domain=(3, 1))


def test_single_knot():
    it = build(SINGLE)
    assert eval_energy(it, 2) == (5, 3, 2)
    for x in (Fraction(3, 2), Fraction(5, 2), Fraction(11, 4)):
        e, d, dd = eval_energy(it, x)
        assert e == 5 + 3 * (x - 2) + (x - 2) ** 2
        assert d == 3 + 2 * (x - 2)


def test_parabola_knots_exact():
    it = build(PARABOLA)
    for r, e, d in PARABOLA:
        val, der, dd = eval_energy(it, r)
        assert (val, der) == (e, d)
        assert dd > 0
    assert it.smoothing_radius > 0
    assert all(s > 0 for s in it.slopes)


def test_witness_knots_exact_and_float(witness_interp, witness):
    th = witness.thermo
    rho2 = witness.states[1].rho
    e, d, dd = eval_energy(witness_interp, rho2)
    assert (e, d) == (th.eps[1], th.deps[1])
    assert dd > 0
    for r, e, d in witness_interp.knots:
        fe, fd, fdd = eval_energy(witness_interp, float(r), exact=False)
        assert abs(fe - float(e)) <= 1e-12 * max(1, abs(float(e)))
        assert abs(fd - float(d)) <= 1e-12 * max(1, abs(float(d)))
        assert fdd > 0


def test_knots_avoid_smoothing_windows(witness_interp):
    r = witness_interp.smoothing_radius
    for c, _ in witness_interp.corner_jumps():
        for k in witness_interp.knots:
            assert abs(c - k[0]) >= 4 * r > r


def test_midpoint_below_chord(witness_interp):
    ks = witness_interp.knots
    for (x0, e0, _), (x1, e1, _) in zip(ks, ks[1:]):
        m = (x0 + x1) / 2
        assert eval_energy(witness_interp, m)[0] < (e0 + e1) / 2


def test_pressure_examples(witness_interp, witness):
    assert pressure_law(2, 1, 0) == (4, 4)
    rho3 = witness.states[2].rho
    p, dp = pressure(witness_interp, rho3)
    assert p == rho3 * rho3 * witness.thermo.deps[2]
    assert dp > 0
    with pytest.raises(ConvexifyError):
        pressure(witness_interp, witness_interp.domain[1] + 1)


def test_pressure_grid_positive(witness_interp):
    x, e, d, p, dp = pressure_grid(witness_interp, 10_000)
    assert p.min() > 0 and dp.min() > 0
    assert np.all(np.diff(d) > 0)
    assert np.all(np.diff(p) > 0)


def test_export_tables(witness_interp, tmp_path):
    text = export_pressure_table(build(SINGLE), 3)
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["rho", "eps", "deps", "p", "dp"]
    assert len(rows) == 4
    ps = [float(r[3]) for r in rows[1:]]
    assert ps == sorted(ps) and len(set(ps)) == 3
    path = tmp_path / "p.csv"
    export_pressure_table(witness_interp, 100, path)
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 100
    assert all(float(r["dp"]) > 0 for r in rows)
    assert export_pressure_table(witness_interp, 0).strip() == "rho,eps,deps,p,dp"


def test_convexity_random_triples(witness_interp):
    rng = np.random.default_rng(5)
    lo, hi = float(witness_interp.domain[0]), float(witness_interp.domain[1])
    pts = np.sort(rng.uniform(lo, hi, size=(10_000, 3)), axis=1)
    a, b, c = pts.T
    keep = (c - a) > 1e-9
    a, b, c = a[keep], b[keep], c[keep]
    ea, _, _ = eval_energy_array(witness_interp, a)
    eb, _, _ = eval_energy_array(witness_interp, b)
    ec, _, _ = eval_energy_array(witness_interp, c)
    chord = ((c - b) * ea + (b - a) * ec) / (c - a)
    tol = 1e-9 * np.maximum(1, np.abs(chord))
    assert np.all(eb <= chord + tol)


def test_derivatives_consistent(witness_interp):
    lo, hi = float(witness_interp.domain[0]), float(witness_interp.domain[1])
    x = np.linspace(lo + 0.01, hi - 0.01, 2000)
    h = 1e-6
    e1, d1, _ = eval_energy_array(witness_interp, x + h)
    e0, d0, _ = eval_energy_array(witness_interp, x - h)
    _, d, dd = eval_energy_array(witness_interp, x)
    np.testing.assert_allclose((e1 - e0) / (2 * h), d, atol=1e-4)
    np.testing.assert_allclose((d1 - d0) / (2 * h), dd, atol=1e-2 * max(1, dd.max()))


def test_json_round_trip(witness_interp):
    doc = witness_interp.to_dict()
    assert ConvexInterpolant.from_dict(doc) == witness_interp
    assert len(doc["slopes"]) == len(doc["nodes"]) + 1
    assert all(Fraction(s) > 0 for s in doc["slopes"])


def test_domain_default(witness_interp):
    lo, hi = witness_interp.domain
    rhos = [k[0] for k in witness_interp.knots]
    first = witness_interp.knots[0]
    assert lo == max(min(rhos) - 1, min(rhos) / 2, first[0] - first[2] / (2 * witness_interp.kappa)) > 0
    assert hi == max(rhos) + 1


convex_fns = st.sampled_from([
    (lambda r: r * r, lambda r: 2 * r),
    (lambda r: r * r * r, lambda r: 3 * r * r),
    (lambda r: r * r / 7 + 3 * r - 100, lambda r: 2 * r / 7 + 3),
])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.fractions(min_value=Fraction(1, 10), max_value=20, max_denominator=50),
                min_size=1, max_size=6, unique=True), convex_fns)
def test_random_convex_data_interpolated_exactly(rhos, fn):
    f, df = fn
    knots = [(r, f(r), df(r)) for r in rhos]
    it = build(knots)
    for r, e, d in knots:
        assert eval_energy(it, r)[:2] == (e, d)
    x = np.linspace(float(it.domain[0]), float(it.domain[1]), 500)
    _, d, dd = eval_energy_array(it, x)
    assert np.all(np.diff(d) > 0)
    assert dd.min() > 0
