"""Riemann data, fan partitions and piecewise-constant fan subsolution candidates.

All containers are frozen dataclasses over a generic scalar (``Fraction`` for
certificates, ``float`` for the numerical search).  The number of intermediate
wave regions ``N`` is a runtime value.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Sequence, Tuple, Union

from .exactnum import to_rational

Region = Union[str, int]  # "-", 1..N, "+"


def _positive(x) -> bool:
    # enclosure / dual scalars are not checked here
    if isinstance(x, (int, float, Fraction)):
        return x > 0
    return True


@dataclass(frozen=True)
class RiemannDatum:
    rho_minus: object
    rho_plus: object
    v_minus: Tuple[object, object]
    v_plus: Tuple[object, object]

    def __post_init__(self):
        object.__setattr__(self, "v_minus", tuple(self.v_minus))
        object.__setattr__(self, "v_plus", tuple(self.v_plus))
        if len(self.v_minus) != 2 or len(self.v_plus) != 2:
            raise ValueError("velocities must be pairs")
        if not (_positive(self.rho_minus) and _positive(self.rho_plus)):
            raise ValueError("Riemann densities must be positive")

    def map(self, fn: Callable) -> "RiemannDatum":
        return RiemannDatum(
            fn(self.rho_minus),
            fn(self.rho_plus),
            (fn(self.v_minus[0]), fn(self.v_minus[1])),
            (fn(self.v_plus[0]), fn(self.v_plus[1])),
        )

    def is_contact(self) -> bool:
        """Equal densities and equal normal velocities (compressible vortex sheet)."""
        return self.rho_plus == self.rho_minus and self.v_plus[1] == self.v_minus[1]


@dataclass(frozen=True)
class WaveState:
    """Constant state in one intermediate region.

    Velocity is (alpha, beta); the traceless symmetric matrix is
    [[gamma, delta], [delta, -gamma]]; ``C`` bounds the kinetic part.
    """

    rho: object
    alpha: object
    beta: object
    gamma: object
    delta: object
    C: object

    def __post_init__(self):
        if not _positive(self.rho):
            raise ValueError(f"region density must be positive, got {self.rho}")

    def map(self, fn: Callable) -> "WaveState":
        return WaveState(*(fn(v) for v in self.astuple()))

    def astuple(self):
        return (self.rho, self.alpha, self.beta, self.gamma, self.delta, self.C)


@dataclass(frozen=True)
class ThermoTable:
    """Free internal-energy constants eps and eps' at the - / + / region densities."""

    eps_minus: object
    eps_plus: object
    deps_minus: object
    deps_plus: object
    eps: Tuple[object, ...]
    deps: Tuple[object, ...]

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(self.eps))
        object.__setattr__(self, "deps", tuple(self.deps))
        if len(self.eps) != len(self.deps):
            raise ValueError("eps and deps must have the same length")

    def map(self, fn: Callable) -> "ThermoTable":
        return ThermoTable(
            fn(self.eps_minus),
            fn(self.eps_plus),
            fn(self.deps_minus),
            fn(self.deps_plus),
            tuple(fn(v) for v in self.eps),
            tuple(fn(v) for v in self.deps),
        )


@dataclass(frozen=True)
class StressMatrix:
    r11: object
    r12: object
    r22: object

    @property
    def trace(self):
        return self.r11 + self.r22

    @property
    def det(self):
        return self.r11 * self.r22 - self.r12 * self.r12

    def is_positive_definite(self) -> bool:
        return self.trace > 0 and self.det > 0


@dataclass(frozen=True)
class FanConfiguration:
    datum: RiemannDatum
    speeds: Tuple[object, ...]
    states: Tuple[WaveState, ...]
    thermo: ThermoTable

    def __post_init__(self):
        object.__setattr__(self, "speeds", tuple(self.speeds))
        object.__setattr__(self, "states", tuple(self.states))
        n = len(self.states)
        if n < 1:
            raise ValueError("a fan needs at least one intermediate region")
        if len(self.speeds) != n + 1:
            raise ValueError(f"expected {n + 1} speeds for N={n}, got {len(self.speeds)}")
        if len(self.thermo.eps) != n:
            raise ValueError(f"thermo table has {len(self.thermo.eps)} entries, N={n}")

    @property
    def n(self) -> int:
        return len(self.states)

    def map(self, fn: Callable) -> "FanConfiguration":
        return FanConfiguration(
            self.datum.map(fn),
            tuple(fn(s) for s in self.speeds),
            tuple(st.map(fn) for st in self.states),
            self.thermo.map(fn),
        )

    def to_rational(self) -> "FanConfiguration":
        return self.map(to_rational)

    def to_float(self) -> "FanConfiguration":
        return self.map(float)

    def with_state(self, i: int, **changes) -> "FanConfiguration":
        """Copy with region ``i`` (1-based) updated."""
        states = list(self.states)
        states[i - 1] = replace(states[i - 1], **changes)
        return replace(self, states=tuple(states))

    def with_speed(self, k: int, value) -> "FanConfiguration":
        """Copy with interface speed ``k`` (0 = left, N = right) replaced."""
        speeds = list(self.speeds)
        speeds[k] = value
        return replace(self, speeds=tuple(speeds))

    def with_deps(self, i: int, value) -> "FanConfiguration":
        deps = list(self.thermo.deps)
        deps[i - 1] = value
        return replace(self, thermo=replace(self.thermo, deps=tuple(deps)))

    def densities(self) -> list:
        """[rho_-, rho_1, ..., rho_N, rho_+]."""
        return [self.datum.rho_minus] + [s.rho for s in self.states] + [self.datum.rho_plus]


def region_of(x2, t, speeds: Sequence) -> Region:
    """Which fan region contains the point (x2, t).

    Points exactly on a line x2 = nu_k t are given to the region just below it.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    speeds = list(speeds)
    if x2 <= speeds[0] * t:
        return "-"
    for i in range(1, len(speeds)):
        if x2 <= speeds[i] * t:
            return i
    return "+"


def reynolds_stress(state: WaveState) -> StressMatrix:
    a, b, g, d, c = state.alpha, state.beta, state.gamma, state.delta, state.C
    return StressMatrix(g - a * a + c / 2, d - a * b, -g - b * b + c / 2)


def ghost_state(v: Sequence, rho) -> WaveState:
    """State carrying u = v (x) v - |v|^2/2 Id and C = |v|^2, i.e. zero Reynolds stress."""
    if not rho > 0:
        raise ValueError("density must be positive")
    v1, v2 = v
    return WaveState(rho, v1, v2, (v1 * v1 - v2 * v2) / 2, v1 * v2, v1 * v1 + v2 * v2)


def constant_fan(datum: RiemannDatum, speeds: Sequence, eps=0, deps=1) -> FanConfiguration:
    """One-region fan filled with the left state's ghost; an exact solution when datum is constant."""
    st = ghost_state(datum.v_minus, datum.rho_minus)
    thermo = ThermoTable(eps, eps, deps, deps, (eps,), (deps,))
    return FanConfiguration(datum, tuple(speeds), (st,), thermo)


__all__ = [
    "RiemannDatum",
    "WaveState",
    "ThermoTable",
    "StressMatrix",
    "FanConfiguration",
    "region_of",
    "reynolds_stress",
    "ghost_state",
    "constant_fan",
    "Fraction",
]
