import csv
import io
import json
from fractions import Fraction

import numpy as np
import pytest

from fansub import kernels, solver, system
from fansub.fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState, ghost_state
from fansub.solver import ProbeError, SolveOptions, feasibility_score, solve, sweep, two_wave_probe
from fansub.witness import builtin_witness, witness_datum

DATUM = witness_datum().map(float)


def ghost_fan(n=1, rho=2.0, v=(3.0, -1.0)):
    d = RiemannDatum(rho, rho, v, v)
    st = ghost_state(v, rho)
    th = ThermoTable(1.0, 1.0, 2.0, 2.0, (1.0,) * n, (2.0,) * n)
    return FanConfiguration(d, tuple(float(k) for k in range(n + 1)), (st,) * n, th)


def assert_sound(out, opts):
    """A converged outcome re-checks in exact arithmetic."""
    rep = system.evaluate(out.config.to_rational(), 0, include_plus=opts.include_plus)
    assert float(rep.max_abs_residual) <= opts.equality_tolerance
    assert float(rep.min_margin) >= opts.target_margin - 1e-9


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(n_waves=0)
    with pytest.raises(ValueError):
        SolveOptions(target_margin=-1)
    with pytest.raises(ValueError):
        SolveOptions(equality_tolerance=0)
    with pytest.raises(ValueError):
        SolveOptions(strategy="newton")


def test_default_box_shape():
    lo, hi = solver.default_box(3)
    assert lo.shape == hi.shape == (kernels.n_vars(3),)
    assert np.all(lo < hi)


def test_feasibility_score_examples(witness):
    assert feasibility_score(witness, 1 / 3) < 1e-11
    assert feasibility_score(ghost_fan(), Fraction(1, 3)) == pytest.approx(1 / 3, abs=0)
    assert feasibility_score(ghost_fan(), 0) == 0
    zeros = tuple(WaveState(1.0, 0.0, 0.0, 0.0, 0.0, 0.0) for _ in range(3))
    th = ThermoTable(0.0, 0.0, 1.0, 1.0, (0.0,) * 3, (1.0,) * 3)
    zero_cfg = FanConfiguration(DATUM, (-3.0, -1.0, 1.0, 3.0), zeros, th)
    assert feasibility_score(zero_cfg, 1 / 3) > 0


def test_warm_start_at_witness_is_immediate(witness):
    opts = SolveOptions(initial=witness.to_float(), max_restarts=0)
    before = feasibility_score(witness.to_float(), opts.target_margin)
    out = solve(DATUM, opts)
    assert out.converged
    assert out.iterations <= 1
    assert out.restarts_used == 1
    assert out.feasibility_score <= before
    assert_sound(out, opts)


def test_cold_solve_converges_with_fixed_seed():
    opts = SolveOptions(rng_seed=1)
    out = solve(DATUM, opts)
    assert out.converged
    assert out.max_abs_residual < 1e-9
    assert out.min_margin >= 1 / 3
    assert_sound(out, opts)


def test_reduced_search_from_witness_shape():
    opts = SolveOptions(warm_start=builtin_witness(), max_restarts=0, rng_seed=3)
    out = solve(DATUM, opts)
    assert out.converged
    assert_sound(out, opts)


def test_ghost_start_is_not_a_strict_subsolution():
    g = ghost_fan()
    assert all(v == 0 for v in system.equality_residuals(g.to_rational()))
    assert system.evaluate(g.to_rational()).min_margin == 0
    opts = SolveOptions(n_waves=1, initial=g, max_restarts=0, strategy="penalty")
    out = solve(g.datum, opts)
    assert not out.converged


def test_initial_with_wrong_size_rejected(witness):
    with pytest.raises(ValueError):
        solve(DATUM, SolveOptions(n_waves=2, initial=witness.to_float()))


def _small_sweep(seed=5, count=3, halfwidth=0.5):
    return sweep(DATUM, halfwidth, count, SolveOptions(rng_seed=seed, warm_start=builtin_witness()))


def test_sweep_is_deterministic():
    a = _small_sweep()
    b = _small_sweep()
    strip = lambda rep: [{k: v for k, v in s.items() if k != "seconds"} for s in rep.to_dict()["samples"]]
    assert strip(a) == strip(b)
    assert a.success_count == 3


def test_sweep_sample_rerun_matches():
    rep = _small_sweep(seed=9, count=2)
    s = rep.samples[1]
    out = solve(s.datum(), SolveOptions(rng_seed=9 + 1, warm_start=builtin_witness()))
    assert out.converged == s.converged
    assert out.feasibility_score == s.feasibility_score


def test_sweep_halfwidth_zero_and_count_zero():
    rep = _small_sweep(halfwidth=0.0, count=3)
    datums = {(s.rho_minus, s.rho_plus, s.v_minus1, s.v_minus2, s.v_plus1, s.v_plus2) for s in rep.samples}
    assert len(datums) == 1
    assert rep.success_count == 3
    empty = _small_sweep(count=0)
    assert empty.samples == [] and empty.success_count == 0
    with pytest.raises(ValueError):
        sweep(DATUM, -1, 1, SolveOptions())
    with pytest.raises(ValueError):
        sweep(DATUM, 1, -1, SolveOptions())


def test_sweep_samples_stay_in_box():
    rng = np.random.default_rng(0)
    base = witness_datum()
    for _ in range(200):
        d = solver.sample_datum(base, 0.5, rng)
        assert abs(d.rho_minus - float(base.rho_minus)) <= 0.5
        assert abs(d.v_plus[0] - float(base.v_plus[0])) <= 0.5


def test_sweep_report_formats():
    rep = _small_sweep(count=2)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert len(rows) == 2
    assert {"index", "converged", "feasibility_score", "rho_minus"} <= set(rows[0])
    doc = json.loads(rep.to_json())
    assert doc["success_count"] == rep.success_count
    assert doc["count"] == 2


def test_probe_preconditions():
    d = RiemannDatum(1.0, 2.0, (0.0, 0.0), (1.0, 0.0))
    with pytest.raises(ProbeError):
        two_wave_probe(d)


def test_probe_on_ghost_is_degenerate():
    g = ghost_fan()
    # equalities hold, margins are exactly zero: not a strict subsolution
    assert feasibility_score(g, 0) == 0
    assert float(system.evaluate(g.to_rational()).min_margin) == 0


def test_probe_small_run():
    res = two_wave_probe(DATUM, SolveOptions(max_restarts=5, rng_seed=2))
    assert res.best_score > 1e-2
    assert len(res.scores) == res.restarts
