"""Exact correction of a numerical fan configuration.

The float configuration is read exactly as rationals.  Then the jump
relations are solved one at a time, left to right, each for one quantity that
enters it linearly:

    left interface       mass -> nu_-,   momentum1 -> delta_1,   momentum2 -> eps'_1
    interface i (< N-1)  mass -> nu_i,   momentum1 -> delta_i+1, momentum2 -> eps'_i+1

Everything else keeps its exact rational value.  The last interior interface
and the right interface are left alone; their small residuals are what the
existence certificate has to absorb.

The outer states enter as their ghost states (R = 0), which puts every
interface in the same two-sided form.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Mapping, Optional

from .fan_model import FanConfiguration, RiemannDatum, ghost_state

SIDE_KEYS = ("rho", "alpha", "beta", "gamma", "delta", "C", "deps")
DEFAULT_UNKNOWN = {"mass": "nu", "momentum1": "delta_b", "momentum2": "deps_b"}


class CorrectionError(ValueError):
    pass


def _component(eq_id: str) -> str:
    comp = eq_id.rsplit("/", 1)[-1]
    if comp not in DEFAULT_UNKNOWN:
        raise CorrectionError(f"unknown equation id {eq_id!r}")
    return comp


def interface_residual(component: str, k: Mapping) -> object:
    """nu [U] - [F] across one interface, side a on the left of side b."""
    nu = k["nu"]
    ra, rb = k["rho_a"], k["rho_b"]
    if component == "mass":
        return nu * (ra - rb) - (ra * k["beta_a"] - rb * k["beta_b"])
    if component == "momentum1":
        return nu * (ra * k["alpha_a"] - rb * k["alpha_b"]) - (ra * k["delta_a"] - rb * k["delta_b"])
    if component == "momentum2":
        pa = ra * ra * k["deps_a"]
        pb = rb * rb * k["deps_b"]
        flux_a = -ra * k["gamma_a"] + pa + ra * k["C_a"] / 2
        flux_b = -rb * k["gamma_b"] + pb + rb * k["C_b"] / 2
        return nu * (ra * k["beta_a"] - rb * k["beta_b"]) - (flux_a - flux_b)
    raise CorrectionError(f"unknown component {component!r}")


def closed_form_solve(eq_id: str, knowns: Mapping, unknown: Optional[str] = None):
    """Solve one jump relation exactly for the quantity it is linear in.

    ``eq_id`` is e.g. ``"left/mass"`` or ``"interface2/momentum2"``; only the
    component after the slash matters.  ``knowns`` maps ``nu`` and
    ``<field>_a`` / ``<field>_b`` (fields rho, alpha, beta, gamma, delta, C,
    deps) to scalars; the entry for ``unknown`` is ignored.  Default unknowns:
    mass -> nu, momentum1 -> delta_b, momentum2 -> deps_b.
    """
    comp = _component(eq_id)
    unknown = unknown or DEFAULT_UNKNOWN[comp]
    k = dict(knowns)
    k[unknown] = Fraction(0)
    r0 = interface_residual(comp, k)
    k[unknown] = Fraction(1)
    coef = interface_residual(comp, k) - r0
    if coef == 0:
        raise CorrectionError(f"{eq_id}: {unknown} has zero coefficient")
    return -r0 / coef


def _side(prefix: str, state, deps) -> Dict[str, object]:
    vals = dict(zip(SIDE_KEYS, tuple(state.astuple()) + (deps,)))
    return {f"{key}_{prefix}": v for key, v in vals.items()}


def _outer_side(prefix: str, datum: RiemannDatum, deps, left: bool):
    v, rho = (datum.v_minus, datum.rho_minus) if left else (datum.v_plus, datum.rho_plus)
    return _side(prefix, ghost_state(v, rho), deps)


def interface_knowns(cfg: FanConfiguration, k: int) -> Dict[str, object]:
    """Known-value map for interface ``k`` (0 = left, N = right)."""
    n, th = cfg.n, cfg.thermo
    out = {"nu": cfg.speeds[k]}
    if k == 0:
        out.update(_outer_side("a", cfg.datum, th.deps_minus, True))
    else:
        out.update(_side("a", cfg.states[k - 1], th.deps[k - 1]))
    if k == n:
        out.update(_outer_side("b", cfg.datum, th.deps_plus, False))
    else:
        out.update(_side("b", cfg.states[k], th.deps[k]))
    return out


def correct(tilde: FanConfiguration) -> FanConfiguration:
    """Exact rational configuration solving the left and first N-2 interior interfaces."""
    cfg = tilde.to_rational()
    n = cfg.n
    for k in range(n - 1):
        a, b = cfg.densities()[k], cfg.densities()[k + 1]
        if a == b:
            where = "left interface" if k == 0 else f"interface {k}"
            left = "rho_-" if k == 0 else f"rho_{k}"
            raise CorrectionError(f"{where} density collision ({left} = rho_{k + 1})")
        eq = "left" if k == 0 else f"interface{k}"
        nu = closed_form_solve(f"{eq}/mass", interface_knowns(cfg, k))
        cfg = cfg.with_speed(k, nu)
        delta = closed_form_solve(f"{eq}/momentum1", interface_knowns(cfg, k))
        cfg = cfg.with_state(k + 1, delta=delta)
        deps = closed_form_solve(f"{eq}/momentum2", interface_knowns(cfg, k))
        cfg = cfg.with_deps(k + 1, deps)
    return cfg
