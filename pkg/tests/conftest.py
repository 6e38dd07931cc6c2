import random
import time
from fractions import Fraction

import pytest

from fansub.fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState
from fansub.witness import builtin_witness


def rand_q(rng: random.Random, lo=-20, hi=20, den=64) -> Fraction:
    return Fraction(rng.randint(lo * den, hi * den), rng.randint(1, den))


def rand_pos(rng: random.Random, hi=15, den=64) -> Fraction:
    return Fraction(rng.randint(1, hi * den), rng.randint(1, den))


def random_config(rng: random.Random, n: int, tied=None) -> FanConfiguration:
    """Random rational configuration: positive densities, increasing speeds, nothing else enforced."""
    if tied is None:
        tied = rng.random() < 0.3
    rm = rand_pos(rng)
    rp = rm if tied else rand_pos(rng)
    datum = RiemannDatum(rm, rp, (rand_q(rng), rand_q(rng)), (rand_q(rng), rand_q(rng)))
    speeds = sorted({rand_q(rng, -40, 40) for _ in range(3 * n + 6)})
    while len(speeds) < n + 1:  # pragma: no cover - practically unreachable
        speeds.append(speeds[-1] + 1)
    speeds = sorted(rng.sample(speeds, n + 1))
    states = tuple(
        WaveState(rand_pos(rng), rand_q(rng), rand_q(rng), rand_q(rng, -100, 100),
                  rand_q(rng, -100, 100), rand_q(rng, 0, 400))
        for _ in range(n)
    )
    em = rand_q(rng)
    thermo = ThermoTable(
        em, em if tied else rand_q(rng),
        rand_pos(rng, 8), rand_pos(rng, 8),
        tuple(rand_q(rng) for _ in range(n)),
        tuple(rand_pos(rng, 8) for _ in range(n)),
    )
    if tied:
        thermo = ThermoTable(em, em, thermo.deps_minus, thermo.deps_minus, thermo.eps, thermo.deps)
    return FanConfiguration(datum, tuple(speeds), states, thermo)


@pytest.fixture(scope="session")
def witness():
    return builtin_witness()


@pytest.fixture
def stopwatch():
    t0 = time.perf_counter()
    return lambda: time.perf_counter() - t0


# ---------------------------------------------------------------- acceptance summary

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k, title): acceptance criterion k")


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("criterion")
    if m is None or call.when not in ("setup", "call"):
        return
    k, title = m.args
    ok = call.excinfo is None
    prev = _ACCEPTANCE.get(k, (title, True))
    _ACCEPTANCE[k] = (title, prev[1] and ok)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {title}")
