from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fansub.fan_model import (FanConfiguration, RiemannDatum, ThermoTable, WaveState, constant_fan,
                              ghost_state, region_of, reynolds_stress)
from fansub.system import kinetic_margin, stress_det_margin
from fansub.witness import WITNESS_APPROX, WITNESS_VALUES

small = st.fractions(min_value=-50, max_value=50, max_denominator=100)


def test_region_of_examples(witness):
    assert region_of(-100, 1, [-1, 0, 1]) == "-"
    assert region_of(Fraction(1, 2) * 2, 2, [-1, 0, 1]) == 2
    # nu_- ~ -33.0 < -20 < nu_1 ~ -19.0: the first intermediate region
    assert region_of(-20, 1, witness.speeds) == 1
    assert region_of(100, 1, [-1, 0, 1]) == "+"


def test_region_of_boundaries_go_to_lower_interface():
    speeds = [-1, 0, 1]
    assert region_of(-1, 1, speeds) == "-"
    assert region_of(0, 1, speeds) == 1
    assert region_of(1, 1, speeds) == 2


@pytest.mark.parametrize("t", [0, -1])
def test_region_of_rejects_nonpositive_time(t):
    with pytest.raises(ValueError):
        region_of(0, t, [0, 1])


@given(st.lists(small, min_size=2, max_size=6, unique=True), st.lists(small, min_size=2, max_size=30))
def test_region_of_is_monotone(speeds, xs):
    speeds = sorted(speeds)
    order = {"-": 0, "+": len(speeds)}
    idx = [order.get(r, r) if isinstance(r, str) else r for r in (region_of(x, 1, speeds) for x in sorted(xs))]
    assert idx == sorted(idx)


def test_reynolds_stress_examples(witness):
    z = reynolds_stress(WaveState(1, 0, 0, 0, 0, 0))
    assert (z.r11, z.r12, z.r22) == (0, 0, 0)
    g = reynolds_stress(WaveState(1, 1, 0, Fraction(1, 2), 0, 1))
    assert (g.r11, g.r12, g.r22) == (0, 0, 0)
    s1 = witness.states[0]
    R = reynolds_stress(s1)
    assert R.trace == s1.C - (s1.alpha ** 2 + s1.beta ** 2)
    assert R.trace > Fraction(1, 3)
    assert R.is_positive_definite()


def test_ghost_state_examples():
    assert ghost_state((0, 0), 1).astuple() == (1, 0, 0, 0, 0, 0)
    s = ghost_state((1, 2), 3)
    assert (s.rho, s.alpha, s.beta, s.gamma, s.delta, s.C) == (3, 1, 2, Fraction(-3, 2), 2, 5)
    with pytest.raises(ValueError):
        ghost_state((0, 0), 0)


@given(small, small, st.fractions(min_value=Fraction(1, 100), max_value=20, max_denominator=100))
def test_ghost_state_has_zero_stress(v1, v2, rho):
    s = ghost_state((v1, v2), rho)
    R = reynolds_stress(s)
    assert (R.r11, R.r12, R.r22) == (0, 0, 0)
    assert kinetic_margin(s) == 0
    assert stress_det_margin(s) == 0


@given(small, small, small, small, st.fractions(min_value=0, max_value=200, max_denominator=100))
def test_stress_inequalities_iff_positive_definite(a, b, g, d, c):
    s = WaveState(1, a, b, g, d, c)
    pd = reynolds_stress(s).is_positive_definite()
    assert (kinetic_margin(s) > 0 and stress_det_margin(s) > 0) == pd


def test_witness_against_printed_decimals(witness):
    # three significant figures of every printed constant
    for name, approx in WITNESS_APPROX.items():
        exact = float(WITNESS_VALUES[name])
        assert abs(exact - approx) <= 0.005 * abs(approx) + 1e-9, name


def test_witness_sample_fields(witness):
    assert witness.datum.rho_minus == Fraction(2708112612978501, 281474976710656)
    assert witness.speeds[2] == Fraction(-4856156003780791, 562949953421312)
    assert round(float(witness.states[0].alpha), 1) == -58.1
    assert witness.n == 3
    assert witness.datum.is_contact()


def test_configuration_validation():
    d = RiemannDatum(1, 1, (0, 0), (0, 0))
    th = ThermoTable(0, 0, 1, 1, (0,), (1,))
    st1 = WaveState(1, 0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        FanConfiguration(d, (0,), (st1,), th)
    with pytest.raises(ValueError):
        FanConfiguration(d, (0, 1), (), ThermoTable(0, 0, 1, 1, (), ()))
    with pytest.raises(ValueError):
        RiemannDatum(0, 1, (0, 0), (0, 0))
    with pytest.raises(ValueError):
        WaveState(-1, 0, 0, 0, 0, 0)


def test_with_helpers(witness):
    c = witness.with_speed(0, 0).with_state(2, delta=5).with_deps(3, 7)
    assert c.speeds[0] == 0
    assert c.states[1].delta == 5
    assert c.thermo.deps[2] == 7
    assert witness.speeds[0] != 0
    assert c.densities()[0] == witness.datum.rho_minus
    assert len(c.densities()) == 5


def test_constant_fan_is_a_solution():
    from fansub import system

    d = RiemannDatum(2, 2, (1, -1), (1, -1))
    cfg = constant_fan(d, (-1, 1))
    assert all(v == 0 for v in system.equality_residuals(cfg))
