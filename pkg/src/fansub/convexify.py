"""Smooth strictly convex internal energy through prescribed (rho, eps, eps') knots.

Construction, per gap [x0, x1] between consecutive knots (h = x1 - x0):

* eps' is piecewise linear and continuous.  Near each knot it has the common
  small slope kappa, so there is no corner at a knot.  In between, one
  interior breakpoint B is placed so that the integral of eps' over the gap
  equals eps(x1) - eps(x0).  With a = theta h, the pieces are

      x0 -> x0 + a      slope kappa
      x0 + a -> B -> x1 - a
      x1 - a -> x1      slope kappa

  theta starts at 1/4 and is halved until both middle slopes are >= kappa.
  That terminates because the tangent-line inequalities put the chord slope
  strictly between eps'(x0) and eps'(x1).
* Outside the knot range eps' continues with slope kappa.
* Corners are smoothed by convolving eps' with an even C-infinity bump of
  radius r = min spacing of knots and corners / 4.  The slope jumps inside a
  gap sum to zero, so eps values at knots are unchanged by the smoothing,
  and eps'' after smoothing is an average of slopes >= kappa.

Everything before smoothing is exact rational arithmetic.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from . import system
from .configio import write_csv
from .exactnum import format_rational, parse_rational, to_rational
from .fan_model import FanConfiguration

SIGMA_FACTOR = Fraction(1, 10 ** 6)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(128)


class ConvexifyError(ValueError):
    pass


# ------------------------------------------------------------ data checks


def _normalise(knots) -> List[Tuple[Fraction, Fraction, Fraction]]:
    out = {}
    for k in knots:
        rho, e, d = (to_rational(v) for v in k)
        if rho in out:
            if out[rho] != (e, d):
                raise ConvexifyError(f"duplicate density {rho} with inconsistent values")
            continue
        out[rho] = (e, d)
    return [(r, *out[r]) for r in sorted(out)]


def pair_margins(knots):
    ks = _normalise(knots)
    return {
        (i, j): ks[j][1] - ks[i][1] - ks[i][2] * (ks[j][0] - ks[i][0])
        for i in range(len(ks)) for j in range(len(ks)) if i != j
    }


def check_interpolation_data(knots) -> Optional[Fraction]:
    """Smallest tangent-line margin over ordered pairs (None for a single knot)."""
    m = pair_margins(knots)
    return min(m.values()) if m else None


def knots_from_config(cfg: FanConfiguration, include_plus=None):
    return [(k[1], k[2], k[3]) for k in system.thermo_knots(cfg, include_plus)]


# ------------------------------------------------------------ bump moments


def _bump(t):
    t = np.asarray(t, float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


_Z = float(np.sum(_GL_WEIGHTS * _bump(_GL_NODES)))
_MU2 = float(np.sum(_GL_WEIGHTS * _GL_NODES ** 2 * _bump(_GL_NODES))) / _Z


def _partial_moments(y):
    """(Phi, M1, M2)(y) = integrals of t^k phi(t) over [-1, y], phi of unit mass."""
    y = np.clip(np.asarray(y, float), -1.0, 1.0)
    half = (y + 1.0) / 2.0
    t = -1.0 + half[..., None] * (_GL_NODES + 1.0)
    w = _GL_WEIGHTS * _bump(t) * half[..., None] / _Z
    return w.sum(-1), (w * t).sum(-1), (w * t * t).sum(-1)


def _corner_corrections(y):
    """Smoothing corrections of a unit-slope-jump ramp, in units (r^2, r, 1).

    Returns (d_eps, d_deps, d_ddeps) for the offsets y = (x - c)/r.
    """
    y = np.asarray(y, float)
    phi, m1, m2 = _partial_moments(y)
    yp = np.maximum(y, 0.0)
    ramp1 = y * phi - m1                       # bump * (.)_+
    ramp2 = (y * y * phi - 2 * y * m1 + m2) / 2  # bump * (.)_+^2 / 2
    big = y >= 1.0
    ramp1 = np.where(big, y, np.where(y <= -1.0, 0.0, ramp1))
    ramp2 = np.where(big, (y * y + _MU2) / 2, np.where(y <= -1.0, 0.0, ramp2))
    return ramp2 - yp * yp / 2, ramp1 - yp, phi - (y > 0)


# ------------------------------------------------------------ interpolant


@dataclass(frozen=True)
class ConvexInterpolant:
    knots: Tuple[Tuple[Fraction, Fraction, Fraction], ...]
    nodes: Tuple[Fraction, ...]       # knots and corners, sorted
    node_deps: Tuple[Fraction, ...]   # eps' at nodes
    node_eps: Tuple[Fraction, ...]    # eps at nodes (exact antiderivative)
    kappa: Fraction
    smoothing_radius: Fraction
    domain: Tuple[Fraction, Fraction]

    @property
    def breakpoints(self) -> Tuple[Fraction, ...]:
        ks = {k[0] for k in self.knots}
        return tuple(x for x in self.nodes if x not in ks)

    @property
    def slopes(self) -> Tuple[Fraction, ...]:
        """eps'' on each piece: left extension, between nodes, right extension."""
        inner = tuple(
            (self.node_deps[j + 1] - self.node_deps[j]) / (self.nodes[j + 1] - self.nodes[j])
            for j in range(len(self.nodes) - 1)
        )
        return (self.kappa,) + inner + (self.kappa,)

    def corner_jumps(self):
        s = self.slopes
        return [(x, s[j + 1] - s[j]) for j, x in enumerate(self.nodes) if s[j + 1] != s[j]]

    def to_dict(self) -> dict:
        f = format_rational
        return {
            "knots": [[f(v) for v in k] for k in self.knots],
            "breakpoints": [f(x) for x in self.breakpoints],
            "slopes": [f(s) for s in self.slopes],
            "nodes": [f(x) for x in self.nodes],
            "node_deps": [f(x) for x in self.node_deps],
            "node_eps": [f(x) for x in self.node_eps],
            "kappa": f(self.kappa),
            "smoothing_radius": f(self.smoothing_radius),
            "domain": [f(self.domain[0]), f(self.domain[1])],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "ConvexInterpolant":
        q = parse_rational
        return cls(
            knots=tuple(tuple(q(v) for v in k) for k in doc["knots"]),
            nodes=tuple(q(x) for x in doc["nodes"]),
            node_deps=tuple(q(x) for x in doc["node_deps"]),
            node_eps=tuple(q(x) for x in doc["node_eps"]),
            kappa=q(doc["kappa"]),
            smoothing_radius=q(doc["smoothing_radius"]),
            domain=(q(doc["domain"][0]), q(doc["domain"][1])),
        )


def _gap_nodes(x0, e0, d0, x1, e1, d1, kappa):
    """Interior nodes (position, eps') of one gap, strictly increasing slopes >= kappa."""
    h = x1 - x0
    delta = e1 - e0
    theta = Fraction(1, 4)
    for _ in range(200):
        a = theta * h
        L = h - 2 * a
        yp, yq = d0 + kappa * a, d1 - kappa * a
        if yp < yq:
            m = (delta - a * (d0 + d1)) / L
            if yp < m < yq:
                u = L * (yq - m) / (yq - yp)
                s1 = (m - yp) / u
                s2 = (yq - m) / (L - u)
                if s1 >= kappa and s2 >= kappa:
                    return [(x0 + a, yp), (x0 + a + u, m), (x1 - a, yq)]
        theta /= 2
    raise ConvexifyError(f"could not place breakpoint in gap [{x0}, {x1}]")


def default_domain(knots) -> Tuple[Fraction, Fraction]:
    rhos = [k[0] for k in knots]
    lo = max(min(rhos) - 1, min(rhos) / 2)
    return lo, max(rhos) + 1


def build(knots, domain: Optional[Tuple] = None, sigma_factor=SIGMA_FACTOR) -> ConvexInterpolant:
    ks = _normalise(knots)
    if not ks:
        raise ConvexifyError("no knots")
    for r, _, d in ks:
        if r <= 0:
            raise ConvexifyError(f"density {r} is not positive")
        if d <= 0:
            raise ConvexifyError(f"eps' = {d} at density {r} is not positive")
    margins = pair_margins(ks)
    if margins:
        (i, j), worst = min(margins.items(), key=lambda kv: kv[1])
        if worst <= 0:
            raise ConvexifyError(
                f"tangent-line inequality fails for densities {ks[i][0]} -> {ks[j][0]} (margin {worst})"
            )
        sigma = to_rational(sigma_factor) * worst
    else:
        sigma = Fraction(1)
    kappa = 2 * sigma
    nodes = [ks[0][0]]
    deps = [ks[0][2]]
    for (x0, e0, d0), (x1, e1, d1) in zip(ks, ks[1:]):
        for x, y in _gap_nodes(x0, e0, d0, x1, e1, d1, kappa):
            nodes.append(x)
            deps.append(y)
        nodes.append(x1)
        deps.append(d1)
    eps = [ks[0][1]]
    for j in range(len(nodes) - 1):
        eps.append(eps[-1] + (nodes[j + 1] - nodes[j]) * (deps[j] + deps[j + 1]) / 2)
    gaps = [b - a for a, b in zip(nodes, nodes[1:])]
    radius = min(gaps) / 4 if gaps else Fraction(1, 4)
    if domain is None:
        lo, hi = default_domain(ks)
        # keep eps' >= half its first knot value on the left extension
        lo = max(lo, nodes[0] - deps[0] / (2 * kappa))
    else:
        lo, hi = to_rational(domain[0]), to_rational(domain[1])
    if not (0 < lo < hi):
        raise ConvexifyError("domain must satisfy 0 < lo < hi")
    # eps' > 0 on the domain; lowest point is the left end
    if deps[0] - kappa * (nodes[0] - lo) <= 0:
        raise ConvexifyError("eps' would turn negative on the left of the domain")
    return ConvexInterpolant(
        knots=tuple(ks), nodes=tuple(nodes), node_deps=tuple(deps), node_eps=tuple(eps),
        kappa=kappa, smoothing_radius=radius, domain=(lo, hi),
    )


def _check_domain(interp: ConvexInterpolant, rho):
    lo, hi = interp.domain
    if not (lo <= rho <= hi):
        raise ConvexifyError(f"density {rho} outside domain [{float(lo)}, {float(hi)}]")


def _exact(interp: ConvexInterpolant, x: Fraction):
    """Pre-smoothing (eps, eps', slope lower bound) at x, exact."""
    nodes = interp.nodes
    s = interp.slopes
    j = bisect.bisect_right(nodes, x) - 1
    if j < 0:
        x0, e0, d0, k = nodes[0], interp.node_eps[0], interp.node_deps[0], interp.kappa
    elif j >= len(nodes) - 1:
        x0, e0, d0, k = nodes[-1], interp.node_eps[-1], interp.node_deps[-1], interp.kappa
    else:
        x0, e0, d0, k = nodes[j], interp.node_eps[j], interp.node_deps[j], s[j + 1]
    t = x - x0
    dd = k
    # at a node the lower bound is the smaller one-sided slope
    if 0 <= j < len(nodes) and x == nodes[j]:
        dd = min(s[j], s[j + 1])
    return e0 + d0 * t + k * t * t / 2, d0 + k * t, dd


def eval_energy(interp: ConvexInterpolant, rho, exact: bool = True):
    """(eps, eps', eps'') at rho.

    ``exact=True``: the piecewise-quadratic interpolant before smoothing, in
    rational arithmetic; the third entry is the smaller adjacent piece slope.
    ``exact=False``: the smoothed C-infinity function in binary64.
    """
    if exact:
        x = to_rational(rho)
        _check_domain(interp, x)
        return _exact(interp, x)
    x = float(rho)
    _check_domain(interp, to_rational(x))
    e, d, dd = eval_energy_array(interp, np.array([x]))
    return float(e[0]), float(d[0]), float(dd[0])


def eval_energy_array(interp: ConvexInterpolant, rhos):
    """Vectorised smoothed (eps, eps', eps'') in binary64."""
    x = np.asarray(rhos, float)
    lo, hi = float(interp.domain[0]), float(interp.domain[1])
    if x.size and (x.min() < lo or x.max() > hi):
        raise ConvexifyError("grid leaves the domain")
    nodes = np.array([float(v) for v in interp.nodes])
    ne = np.array([float(v) for v in interp.node_eps])
    nd = np.array([float(v) for v in interp.node_deps])
    slopes = np.array([float(v) for v in interp.slopes])
    j = np.searchsorted(nodes, x, side="right") - 1
    jj = np.clip(j, 0, len(nodes) - 1)
    k = slopes[np.clip(j + 1, 0, len(slopes) - 1)]
    t = x - nodes[jj]
    e = ne[jj] + nd[jj] * t + k * t * t / 2
    d = nd[jj] + k * t
    dd = k.copy()
    r = float(interp.smoothing_radius)
    for c, jump in interp.corner_jumps():
        y = (x - float(c)) / r
        near = np.abs(y) < 1
        if not near.any():
            continue
        ce, cd, cdd = _corner_corrections(y[near])
        jf = float(jump)
        e[near] += jf * r * r * ce
        d[near] += jf * r * cd
        dd[near] += jf * cdd
    # past a corner the smoothed eps is shifted by jump r^2 mu2 / 2; inside a
    # gap these shifts cancel at the next knot, so only points strictly
    # between corners of the same gap carry them
    shift = np.zeros_like(x)
    for c, jump in interp.corner_jumps():
        shift += np.where((x - float(c)) / r >= 1, float(jump) * r * r * _MU2 / 2, 0.0)
    return e + shift, d, dd


def pressure_law(rho, deps, ddeps):
    """p = rho^2 eps', p' = 2 rho eps' + rho^2 eps''."""
    return rho * rho * deps, 2 * rho * deps + rho * rho * ddeps


def pressure(interp: ConvexInterpolant, rho, exact: bool = True):
    _, d, dd = eval_energy(interp, rho, exact=exact)
    rho = to_rational(rho) if exact else float(rho)
    return pressure_law(rho, d, dd)


def pressure_grid(interp: ConvexInterpolant, count: int, lo=None, hi=None):
    lo = float(interp.domain[0] if lo is None else lo)
    hi = float(interp.domain[1] if hi is None else hi)
    if count <= 0:
        return np.empty(0), np.empty(0), np.empty(0), np.empty(0), np.empty(0)
    x = np.linspace(lo, hi, count)
    x[0], x[-1] = max(x[0], lo), min(x[-1], hi)
    e, d, dd = eval_energy_array(interp, x)
    p, dp = pressure_law(x, d, dd)
    return x, e, d, p, dp


def export_pressure_table(interp: ConvexInterpolant, count: int, path=None, lo=None, hi=None) -> str:
    """CSV of (rho, eps, eps', p, p') on a uniform grid of ``count`` points."""
    x, e, d, p, dp = pressure_grid(interp, count, lo, hi)
    rows = ([repr(float(v)) for v in row] for row in zip(x, e, d, p, dp))
    return write_csv(rows, ["rho", "eps", "deps", "p", "dp"], path)
