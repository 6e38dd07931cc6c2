"""Jump conditions, subsolution and admissibility inequalities for fan subsolutions.

Every function here only uses ``+ - * /`` on the configuration's scalars, so a
``Fraction`` configuration is evaluated exactly, a ``float`` one in binary64,
and interval / dual-number scalars give enclosures and derivatives.

Pressure never enters as a function: at every density it is the product
rho**2 * eps' with eps' taken from the configuration's thermo table.

Conventions
-----------
* equality residual = left-hand side - right-hand side of the jump relation
  nu [U] = [F(U)] as written with nu on the left;
* margin = (greater side) - (lesser side) of a strict inequality, so a
  configuration is feasible when every margin is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .fan_model import FanConfiguration, ThermoTable

COMPONENTS = ("mass", "momentum1", "momentum2")

# magnitude limits from the published witness table
DEFAULT_BOUNDS: Dict[str, Fraction] = {
    "v": Fraction(59),
    "alpha": Fraction(59),
    "beta": Fraction(19),
    "gamma": Fraction(1531),
    "delta": Fraction(1046),
    "nu": Fraction(34),
    "C": Fraction(3714),
    "rho": Fraction(13),
    "eps": Fraction(2308),
    "deps": Fraction(7),
}


def interface_names(n: int) -> List[str]:
    return ["left"] + [f"interface{i}" for i in range(1, n)] + ["right"]


def equality_labels(n: int) -> List[str]:
    return [f"{name}/{c}" for name in interface_names(n) for c in COMPONENTS]


def _left_block(cfg: FanConfiguration):
    d, s, th = cfg.datum, cfg.states[0], cfg.thermo
    nu = cfg.speeds[0]
    rm, (v1, v2) = d.rho_minus, d.v_minus
    p_m = rm * rm * th.deps_minus
    p_1 = s.rho * s.rho * th.deps[0]
    mass = nu * (rm - s.rho) - (rm * v2 - s.rho * s.beta)
    mom1 = nu * (rm * v1 - s.rho * s.alpha) - (rm * v1 * v2 - s.rho * s.delta)
    mom2 = nu * (rm * v2 - s.rho * s.beta) - (
        rm * v2 * v2 + s.rho * s.gamma + p_m - p_1 - s.rho * s.C / 2
    )
    return [mass, mom1, mom2]


def _interior_block(cfg: FanConfiguration, i: int):
    """Jump across the line nu_i between regions i and i+1 (1 <= i <= N-1)."""
    a, b = cfg.states[i - 1], cfg.states[i]
    nu = cfg.speeds[i]
    pa = a.rho * a.rho * cfg.thermo.deps[i - 1]
    pb = b.rho * b.rho * cfg.thermo.deps[i]
    mass = nu * (a.rho - b.rho) - (a.rho * a.beta - b.rho * b.beta)
    mom1 = nu * (a.rho * a.alpha - b.rho * b.alpha) - (a.rho * a.delta - b.rho * b.delta)
    mom2 = nu * (a.rho * a.beta - b.rho * b.beta) - (
        -a.rho * a.gamma + b.rho * b.gamma + pa - pb + a.rho * a.C / 2 - b.rho * b.C / 2
    )
    return [mass, mom1, mom2]


def _right_block(cfg: FanConfiguration):
    d, s, th = cfg.datum, cfg.states[-1], cfg.thermo
    nu = cfg.speeds[-1]
    rp, (w1, w2) = d.rho_plus, d.v_plus
    p_n = s.rho * s.rho * th.deps[-1]
    p_p = rp * rp * th.deps_plus
    mass = nu * (s.rho - rp) - (s.rho * s.beta - rp * w2)
    mom1 = nu * (s.rho * s.alpha - rp * w1) - (s.rho * s.delta - rp * w1 * w2)
    mom2 = nu * (s.rho * s.beta - rp * w2) - (
        -s.rho * s.gamma - rp * w2 * w2 + p_n - p_p + s.rho * s.C / 2
    )
    return [mass, mom1, mom2]


def equality_residuals(cfg: FanConfiguration) -> list:
    """All 3(N+1) jump residuals, ordered left, interface 1..N-1, right."""
    out = _left_block(cfg)
    for i in range(1, cfg.n):
        out += _interior_block(cfg, i)
    out += _right_block(cfg)
    return out


def labelled_residuals(cfg: FanConfiguration) -> Dict[str, object]:
    return dict(zip(equality_labels(cfg.n), equality_residuals(cfg)))


def _entropy_left(cfg):
    d, s, th = cfg.datum, cfg.states[0], cfg.thermo
    nu = cfg.speeds[0]
    rm, (v1, v2) = d.rho_minus, d.v_minus
    q_m = v1 * v1 + v2 * v2
    e_m, e_1 = th.eps_minus, th.eps[0]
    p_m = rm * rm * th.deps_minus
    p_1 = s.rho * s.rho * th.deps[0]
    lhs = nu * (rm * e_m - s.rho * e_1) + nu * (rm * q_m / 2 - s.rho * s.C / 2)
    rhs = ((rm * e_m + p_m) * v2 - (s.rho * e_1 + p_1) * s.beta) + (
        rm * v2 * q_m / 2 - s.rho * s.beta * s.C / 2
    )
    return rhs - lhs


def _entropy_interior(cfg, i):
    a, b = cfg.states[i - 1], cfg.states[i]
    nu = cfg.speeds[i]
    ea, eb = cfg.thermo.eps[i - 1], cfg.thermo.eps[i]
    pa = a.rho * a.rho * cfg.thermo.deps[i - 1]
    pb = b.rho * b.rho * cfg.thermo.deps[i]
    lhs = nu * (a.rho * ea - b.rho * eb) + nu * (a.rho * a.C / 2 - b.rho * b.C / 2)
    rhs = ((a.rho * ea + pa) * a.beta - (b.rho * eb + pb) * b.beta) + (
        a.rho * a.beta * a.C / 2 - b.rho * b.beta * b.C / 2
    )
    return rhs - lhs


def _entropy_right(cfg):
    d, s, th = cfg.datum, cfg.states[-1], cfg.thermo
    nu = cfg.speeds[-1]
    rp, (w1, w2) = d.rho_plus, d.v_plus
    q_p = w1 * w1 + w2 * w2
    e_n, e_p = th.eps[-1], th.eps_plus
    p_n = s.rho * s.rho * th.deps[-1]
    p_p = rp * rp * th.deps_plus
    lhs = nu * (s.rho * e_n - rp * e_p) + nu * (s.rho * s.C / 2 - rp * q_p / 2)
    rhs = ((s.rho * e_n + p_n) * s.beta - (rp * e_p + p_p) * w2) + (
        s.rho * s.beta * s.C / 2 - rp * w2 * q_p / 2
    )
    return rhs - lhs


def kinetic_margin(state):
    return state.C - state.alpha * state.alpha - state.beta * state.beta


def stress_det_margin(state):
    a, b, g, d, c = state.alpha, state.beta, state.gamma, state.delta, state.C
    return (c / 2 - a * a + g) * (c / 2 - b * b - g) - (d - a * b) * (d - a * b)


def merge_plus_knot(cfg: FanConfiguration) -> bool:
    """True when the + state coincides with the - state as a thermodynamic knot."""
    d, th = cfg.datum, cfg.thermo
    try:
        return bool(
            d.rho_plus == d.rho_minus
            and th.eps_plus == th.eps_minus
            and th.deps_plus == th.deps_minus
        )
    except TypeError:
        return False


def thermo_knots(cfg: FanConfiguration, include_plus: Optional[bool] = None):
    """Labelled (rho, eps, eps') knots: '-', 1..N and, unless merged, '+'."""
    th = cfg.thermo
    knots = [("-", cfg.datum.rho_minus, th.eps_minus, th.deps_minus)]
    knots += [(str(i + 1), s.rho, th.eps[i], th.deps[i]) for i, s in enumerate(cfg.states)]
    if include_plus is None:
        include_plus = not merge_plus_knot(cfg)
    if include_plus:
        knots.append(("+", cfg.datum.rho_plus, th.eps_plus, th.deps_plus))
    return knots


def convexity_margins(rhos: Sequence, eps: Sequence, deps: Sequence,
                      labels: Optional[Sequence[str]] = None) -> Dict[str, object]:
    """Tangent-line margins eps_j - eps_i - eps'_i (rho_j - rho_i) for ordered pairs i != j."""
    if labels is None:
        labels = [str(k) for k in range(len(rhos))]
    out = {}
    for i in range(len(rhos)):
        for j in range(len(rhos)):
            if i != j:
                out[f"convex[{labels[i]},{labels[j]}]"] = (
                    eps[j] - eps[i] - deps[i] * (rhos[j] - rhos[i])
                )
    return out


def thermo_convexity_margins(cfg: FanConfiguration, include_plus: bool = False):
    """Tangent-line margins over the knots -, 1..N; with ``include_plus`` also
    the + knot, unless it coincides with the - knot."""
    knots = thermo_knots(cfg, bool(include_plus) and not merge_plus_knot(cfg))
    labels = [k[0] for k in knots]
    return convexity_margins([k[1] for k in knots], [k[2] for k in knots],
                             [k[3] for k in knots], labels)


def inequality_margins(cfg: FanConfiguration, include_plus: bool = False,
                       contact: bool = False) -> Dict[str, object]:
    """Labelled margins of every strict inequality; positive means satisfied."""
    n = cfg.n
    m: Dict[str, object] = {}
    for i, s in enumerate(cfg.states, start=1):
        m[f"kinetic[{i}]"] = kinetic_margin(s)
        m[f"stress_det[{i}]"] = stress_det_margin(s)
    m["entropy[left]"] = _entropy_left(cfg)
    for i in range(1, n):
        m[f"entropy[{i}]"] = _entropy_interior(cfg, i)
    m["entropy[right]"] = _entropy_right(cfg)
    for k in range(1, n + 1):
        m[f"order[{k}]"] = cfg.speeds[k] - cfg.speeds[k - 1]
    th = cfg.thermo
    m["rho[-]"] = cfg.datum.rho_minus
    m["rho[+]"] = cfg.datum.rho_plus
    for i, s in enumerate(cfg.states, start=1):
        m[f"rho[{i}]"] = s.rho
    m["deps[-]"] = th.deps_minus
    m["deps[+]"] = th.deps_plus
    for i, v in enumerate(th.deps, start=1):
        m[f"deps[{i}]"] = v
    m.update(thermo_convexity_margins(cfg, include_plus))
    if contact:
        jump = cfg.datum.v_plus[0] - cfg.datum.v_minus[0]
        m["contact[v1 jump]"] = jump if jump > 0 else -jump
    return m


def contact_residuals(cfg: FanConfiguration) -> Dict[str, object]:
    """Equalities that make the Riemann datum a contact discontinuity with one thermo state."""
    d, th = cfg.datum, cfg.thermo
    return {
        "contact/rho": d.rho_plus - d.rho_minus,
        "contact/eps": th.eps_plus - th.eps_minus,
        "contact/deps": th.deps_plus - th.deps_minus,
        "contact/v2": d.v_plus[1] - d.v_minus[1],
    }


def margin_family(label: str) -> str:
    return label.split("[", 1)[0]


def residual_interface(label: str) -> str:
    return label.split("/", 1)[0]


@dataclass
class ResidualReport:
    equality_residuals: Dict[str, object]
    inequality_margins: Dict[str, object]
    margin_floor: object = 0
    max_abs_residual: object = None
    min_margin: object = None
    argmin_margin: str = ""
    exact_feasible: bool = False
    extra: dict = field(default_factory=dict)

    def max_residual_by_interface(self) -> Dict[str, object]:
        out: Dict[str, object] = {}
        for k, v in self.equality_residuals.items():
            name = residual_interface(k)
            out[name] = max(out.get(name, abs(v)), abs(v))
        return out

    def min_margin_by_family(self) -> Dict[str, object]:
        out: Dict[str, object] = {}
        for k, v in self.inequality_margins.items():
            fam = margin_family(k)
            out[fam] = min(out.get(fam, v), v)
        return out

    def zero_residuals(self) -> List[str]:
        return [k for k, v in self.equality_residuals.items() if v == 0]


def evaluate(cfg: FanConfiguration, margin_floor=0, include_plus: bool = False,
             contact: bool = False) -> ResidualReport:
    """Evaluate every equality and inequality and aggregate a verdict.

    ``exact_feasible`` holds iff all residuals are exactly zero and every margin
    exceeds ``margin_floor``.  Exactness is only meaningful for rational input.
    """
    if margin_floor < 0:
        raise ValueError("margin_floor must be nonnegative")
    eq = labelled_residuals(cfg)
    if contact:
        eq.update(contact_residuals(cfg))
    mg = inequality_margins(cfg, include_plus=include_plus, contact=contact)
    max_res = max(abs(v) for v in eq.values())
    arg = min(mg, key=lambda k: mg[k])
    rep = ResidualReport(
        equality_residuals=eq,
        inequality_margins=mg,
        margin_floor=margin_floor,
        max_abs_residual=max_res,
        min_margin=mg[arg],
        argmin_margin=arg,
    )
    rep.exact_feasible = all(v == 0 for v in eq.values()) and mg[arg] > margin_floor
    return rep


def _maxabs(values):
    return max(abs(v) for v in values)


def bounds_check(cfg: FanConfiguration, bounds: Optional[Dict[str, object]] = None):
    """Compare max magnitudes of each variable family with the given limits.

    Returns ``{name: (observed, limit, passed)}``; families absent from
    ``bounds`` are skipped.
    """
    bounds = DEFAULT_BOUNDS if bounds is None else bounds
    d, th = cfg.datum, cfg.thermo
    observed = {
        "v": _maxabs(list(d.v_minus) + list(d.v_plus)),
        "alpha": _maxabs([s.alpha for s in cfg.states]),
        "beta": _maxabs([s.beta for s in cfg.states]),
        "gamma": _maxabs([s.gamma for s in cfg.states]),
        "delta": _maxabs([s.delta for s in cfg.states]),
        "nu": _maxabs(cfg.speeds),
        "C": _maxabs([s.C for s in cfg.states]),
        "rho": _maxabs(cfg.densities()),
        "eps": _maxabs([th.eps_minus, th.eps_plus, *th.eps]),
        "deps": _maxabs([th.deps_minus, th.deps_plus, *th.deps]),
    }
    return {
        name: (observed[name], limit, observed[name] <= limit)
        for name, limit in bounds.items()
        if name in observed
    }


__all__ = [
    "COMPONENTS",
    "DEFAULT_BOUNDS",
    "ResidualReport",
    "equality_residuals",
    "labelled_residuals",
    "equality_labels",
    "inequality_margins",
    "convexity_margins",
    "thermo_convexity_margins",
    "thermo_knots",
    "contact_residuals",
    "evaluate",
    "bounds_check",
    "kinetic_margin",
    "stress_det_margin",
    "ThermoTable",
]
