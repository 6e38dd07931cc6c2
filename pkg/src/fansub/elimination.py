"""Reduced coordinates for the fan system.

Write each region through its Reynolds stress R = [[r11, r12], [r12, r22]]
and put P = p + rho r22 (normal stress) and T = rho r12 (shear).  Across an
interface with mass flux m = rho_a (beta_a - nu) the jump relations become

    m = rho_b (beta_b - nu),   P_b = P_a - m (beta_b - beta_a),
    T_b = T_a - m (alpha_b - alpha_a),

with P = p and T = 0 in the outer states.  So once densities and the
normal/tangential velocities are fixed, every speed, every T and every P - p_-
follows by a left-to-right sweep.  The right state closes the chain: the shear
condition is linear in alpha_N, and the normal-stress condition fixes eps'_+
(or, when rho_+ = rho_- ties eps'_+ to eps'_-, is a quadratic in beta_N).

The remaining unknowns (eps_-, eps'_-, eps_i, eps'_i, r11_i, eps_+) enter every
margin affinely except det R = r11 r22 - r12^2, whose superlevel set in the
positive quadrant is convex.  Maximising the smallest margin over them is an
LP with tangent cuts for the determinant (``best_inner``).  The outer search
runs over (rho_i, alpha_i<N, beta_i<N[, beta_N]).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linprog

from . import kernels


@dataclass
class Outer:
    rho: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    nu: np.ndarray
    m: np.ndarray
    Q: np.ndarray  # P - P_- along the chain -, 1..N, +
    T: np.ndarray


def n_outer(n: int, tied: bool) -> int:
    return n + (n - 1) + (n - 1 if tied else n)


def split_outer(theta, n: int, tied: bool):
    theta = np.asarray(theta, float)
    rho = theta[:n]
    alpha = np.r_[theta[n:2 * n - 1], 0.0]
    beta = theta[2 * n - 1:]
    if tied:
        beta = np.r_[beta, 0.0]
    return rho, alpha, beta


def build_outer(par, n: int, rho, alpha, beta, tied: bool, upper_root: bool = True) -> Optional[Outer]:
    """Chain quantities for given densities and velocities.

    alpha[-1] is replaced by the value closing the shear balance; with
    ``tied`` so is beta[-1] (root picked by ``upper_root``).  Returns None
    when the chain is singular.
    """
    rm, rp, vm1, vm2, vp1, vp2 = [float(v) for v in par]
    rho = np.asarray(rho, float)
    alpha = np.array(alpha, float)
    beta = np.array(beta, float)
    cr = np.r_[rm, rho, rp]
    if np.any(cr <= 0) or np.any(np.diff(cr) == 0):
        return None
    with np.errstate(all="ignore"):
        if tied:
            cb = np.r_[vm2, beta[:-1]]
            s = 0.0
            for k in range(n - 1):
                ra, rb = cr[k], cr[k + 1]
                s += ra * rb * (cb[k + 1] - cb[k]) ** 2 / (rb - ra)
            ra, rn = cr[n - 1], cr[n]
            wa = ra * rn / (rn - ra)
            wb = rn * rp / (rp - rn)
            ba = cb[n - 1]
            a2 = wa + wb
            a1 = -2 * (wa * ba + wb * vp2)
            a0 = wa * ba * ba + wb * vp2 * vp2 + s
            disc = a1 * a1 - 4 * a2 * a0
            if not np.isfinite(disc) or disc < 0 or a2 == 0:
                return None
            sq = np.sqrt(disc)
            beta[-1] = (-a1 + sq) / (2 * a2) if upper_root else (-a1 - sq) / (2 * a2)
        cb = np.r_[vm2, beta, vp2]
        nu = (cr[:-1] * cb[:-1] - cr[1:] * cb[1:]) / (cr[:-1] - cr[1:])
        m = cr[:-1] * (cb[:-1] - nu)
        ca = np.r_[vm1, alpha[:-1], 0.0, vp1]
        rest = float(np.sum(m[:n - 1] * np.diff(ca[:n])))
        den = m[n - 1] - m[n]
        if den == 0:
            return None
        alpha[-1] = (-rest + m[n - 1] * ca[n - 1] - m[n] * vp1) / den
        ca = np.r_[vm1, alpha, vp1]
        Q = np.r_[0.0, np.cumsum(-m * np.diff(cb))]
        T = np.r_[0.0, np.cumsum(-m * np.diff(ca))]
    out = Outer(rho, alpha, beta, nu, m, Q, T)
    if not all(np.all(np.isfinite(v)) for v in (nu, m, Q, T, alpha, beta)):
        return None
    return out


def n_inner(n: int, tied: bool) -> int:
    return 2 + 3 * n + (0 if tied else 1)


def assemble(par, n: int, o: Outer, u, tied: bool) -> np.ndarray:
    """Packed configuration vector; u = [eps_-, eps'_-, eps_i, eps'_i, r11_i, (eps_+)]."""
    rm, rp = float(par[0]), float(par[1])
    u = np.asarray(u)
    em, dm = u[0], u[1]
    E, DE, r11 = u[2:2 + n], u[2 + n:2 + 2 * n], u[2 + 2 * n:2 + 3 * n]
    pm = rm * rm * dm
    rho, al, be = o.rho, o.alpha, o.beta
    r22 = (pm + o.Q[1:n + 1] - rho ** 2 * DE) / rho
    r12 = o.T[1:n + 1] / rho
    x = np.zeros(kernels.n_vars(n), dtype=np.result_type(u, float))
    v2 = al ** 2 + be ** 2
    for i in range(n):
        x[6 * i:6 * i + 6] = [
            rho[i], al[i], be[i],
            (r11[i] - r22[i] + al[i] ** 2 - be[i] ** 2) / 2,
            r12[i] + al[i] * be[i],
            r11[i] + r22[i] + v2[i],
        ]
    x[6 * n:7 * n + 1] = o.nu
    tb = kernels.thermo_index(n)
    if tied:
        ep, dp = em, dm
    else:
        ep, dp = u[2 + 3 * n], (pm + o.Q[n + 1]) / (rp * rp)
    x[tb:tb + 4] = [em, dm, ep, dp]
    x[tb + 4:tb + 4 + n] = E
    x[tb + 4 + n:] = DE
    return x


# |eps - eps_-|, |eps'| and r11 caps.  r11 is kept near the size of the
# published witness: the float residual floor of a solution grows with rho*C.
INNER_MAGNITUDES = (1e4, 1e2, 4e3)


def _inner_bounds(n: int, tied: bool, mag):
    e, d, c = mag
    b = [(0.0, 0.0), (-d, d)] + [(-e, e)] * n + [(-d, d)] * n + [(None, c)] * n
    if not tied:
        b.append((-e, e))
    return b


def best_inner(par, n: int, o: Outer, tied: bool, det_target: float, cap: float = 2.0,
               mag=None, max_cuts: int = 30,
               incl_plus: bool = False) -> Tuple[Optional[np.ndarray], float]:
    """Maximise min margin over the inner unknowns.

    Returns (u, t) with every affine margin >= t and, when t > 0, every
    det R >= det_target.  (None, -inf) when the LP fails.  ``mag`` bounds
    |eps|, |eps'| and r11 from above; eps_- is pinned to 0 since adding a
    constant to every eps changes no margin.
    """
    incl_plus = incl_plus and not tied
    mag = INNER_MAGNITUDES if mag is None else mag
    nu_ = n_inner(n, tied)
    U = np.vstack([np.zeros(nu_), np.eye(nu_)])
    X = np.array([assemble(par, n, o, row, tied) for row in U])
    _, MG = kernels.eval_batch(X, par, n, incl_plus)
    mg0 = MG[0]
    G = (MG[1:] - mg0).T
    det_rows = [2 * i + 1 for i in range(n)]
    lin = np.setdiff1d(np.arange(mg0.size), det_rows)
    rho = o.rho
    rm = float(par[0])
    # r22_i = r22c_i + R22_i . u
    R22 = np.zeros((n, nu_))
    R22[:, 1] = rm * rm / rho
    R22[np.arange(n), 2 + n + np.arange(n)] = -rho
    r22c = o.Q[1:n + 1] / rho
    K = (o.T[1:n + 1] / rho) ** 2 + det_target
    c = np.zeros(nu_ + 1)
    c[-1] = -1.0
    rows = [np.hstack([-G[lin], np.ones((lin.size, 1))]), np.hstack([-R22, np.ones((n, 1))])]
    rhs = [mg0[lin], r22c]
    bounds = _inner_bounds(n, tied, mag) + [(None, cap)]
    for _ in range(max_cuts):
        res = linprog(c, A_ub=np.vstack(rows), b_ub=np.concatenate(rhs), bounds=bounds, method="highs")
        if res.status != 0:
            return None, -np.inf
        u, t = res.x[:-1], res.x[-1]
        if t <= 0:
            return u, t
        r22 = r22c + R22 @ u
        r11 = u[2 + 2 * n:2 + 3 * n]
        short = r11 * r22 < K * (1 - 1e-12)
        if not short.any():
            return u, t
        for i in np.nonzero(short)[0]:
            # tangent to r11 r22 = K at the radial projection of the iterate
            if r11[i] > 0 and r22[i] > 0:
                s = np.sqrt(K[i] / (r11[i] * r22[i]))
                a, b = r11[i] * s, r22[i] * s
            else:
                a = b = np.sqrt(K[i])
            row = np.zeros(nu_ + 1)
            row[:nu_] = -a * R22[i]
            row[2 + 2 * n + i] -= b
            rows.append(row[None, :])
            rhs.append(np.array([a * r22c[i] - 2 * K[i]]))
    return u, t


def outer_value(theta, par, n: int, tied: bool, det_target: float, cap: float,
                incl_plus: bool = False):
    """Objective for the outer search: -(best inner margin), with graded penalties.

    Returns (value, Outer or None, u or None).  In the tied case both roots
    of the closing quadratic are tried and the better one kept.
    """
    rho, alpha, beta = split_outer(theta, n, tied)
    best = (1e6, None, None)
    for root in ((True, False) if tied else (True,)):
        o = build_outer(par, n, rho, alpha, beta, tied, root)
        if o is None:
            continue
        dn = float(np.min(np.diff(o.nu)))
        if dn <= 0:
            cand = (1e3 * (1.0 - dn), o, None)
        else:
            u, t = best_inner(par, n, o, tied, det_target, cap, incl_plus=incl_plus)
            cand = (1e6, o, None) if u is None else (-min(t, cap), o, u)
        if cand[0] < best[0]:
            best = cand
    return best
