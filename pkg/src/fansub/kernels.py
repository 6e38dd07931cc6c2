"""Packed float kernels for the fan system (numerical search hot path).

A configuration with N regions is packed into a vector of length 9N + 5::

    [rho_i, alpha_i, beta_i, gamma_i, delta_i, C_i]  for i = 1..N   (6N)
    nu_0 .. nu_N                                                     (N + 1)
    eps_-, eps'_-, eps_+, eps'_+                                     (4)
    eps_1 .. eps_N, eps'_1 .. eps'_N                                 (2N)

and the Riemann datum into ``par = [rho_-, rho_+, v_-1, v_-2, v_+1, v_+2]``.

``_point`` is written with scalar indexing only.  Under numba it is compiled
per point and looped over a batch; in numpy mode it is called once on the
transposed batch so every ``x[k]`` is a row vector.  Outputs follow the order
of :func:`fansub.system.equality_residuals` and
:func:`fansub.system.inequality_margins`.
"""

from __future__ import annotations

import numpy as np

from ._jit import USING_NUMBA, njit
from .fan_model import FanConfiguration, RiemannDatum, ThermoTable, WaveState

CSTEP = 1e-30


def n_vars(n: int) -> int:
    return 9 * n + 5


def n_equalities(n: int) -> int:
    return 3 * (n + 1)


def n_knots(n: int, incl_plus: bool) -> int:
    return n + 1 + (1 if incl_plus else 0)


def n_margins(n: int, incl_plus: bool) -> int:
    k = n_knots(n, incl_plus)
    return 2 * n + (n + 1) + n + 2 * (n + 2) + k * (k - 1)


def speed_index(n: int, k: int) -> int:
    return 6 * n + k


def thermo_index(n: int) -> int:
    return 7 * n + 1


def margin_labels(n: int, incl_plus: bool) -> list:
    out = []
    for i in range(1, n + 1):
        out += [f"kinetic[{i}]", f"stress_det[{i}]"]
    out.append("entropy[left]")
    out += [f"entropy[{i}]" for i in range(1, n)]
    out.append("entropy[right]")
    out += [f"order[{k}]" for k in range(1, n + 1)]
    out += ["rho[-]", "rho[+]"] + [f"rho[{i}]" for i in range(1, n + 1)]
    out += ["deps[-]", "deps[+]"] + [f"deps[{i}]" for i in range(1, n + 1)]
    names = ["-"] + [str(i) for i in range(1, n + 1)] + (["+"] if incl_plus else [])
    for a in names:
        for b in names:
            if a != b:
                out.append(f"convex[{a},{b}]")
    return out


@njit(cache=True)
def _point(x, par, n, incl_plus, eq, mg):
    rm = par[0]
    rp = par[1]
    vm1 = par[2]
    vm2 = par[3]
    vp1 = par[4]
    vp2 = par[5]
    sb = 6 * n
    tb = 7 * n + 1
    e_m = x[tb]
    d_m = x[tb + 1]
    e_p = x[tb + 2]
    d_p = x[tb + 3]
    eb = tb + 4
    db = tb + 4 + n
    p_m = rm * rm * d_m
    p_p = rp * rp * d_p
    q_m = vm1 * vm1 + vm2 * vm2
    q_p = vp1 * vp1 + vp2 * vp2

    # left interface
    r1 = x[0]
    a1 = x[1]
    b1 = x[2]
    g1 = x[3]
    dl1 = x[4]
    c1 = x[5]
    nu = x[sb]
    e1 = x[eb]
    p1 = r1 * r1 * x[db]
    eq[0] = nu * (rm - r1) - (rm * vm2 - r1 * b1)
    eq[1] = nu * (rm * vm1 - r1 * a1) - (rm * vm1 * vm2 - r1 * dl1)
    eq[2] = nu * (rm * vm2 - r1 * b1) - (rm * vm2 * vm2 + r1 * g1 + p_m - p1 - r1 * c1 / 2)
    ent_left = ((rm * e_m + p_m) * vm2 - (r1 * e1 + p1) * b1) + (rm * vm2 * q_m / 2 - r1 * b1 * c1 / 2) - (
        nu * (rm * e_m - r1 * e1) + nu * (rm * q_m / 2 - r1 * c1 / 2)
    )

    # interior interfaces; entropy margins are stored directly
    m_ent = 2 * n
    mg[m_ent] = ent_left
    for i in range(n - 1):
        o = 6 * i
        ra = x[o]
        aa = x[o + 1]
        ba = x[o + 2]
        ga = x[o + 3]
        da = x[o + 4]
        ca = x[o + 5]
        rb = x[o + 6]
        ab = x[o + 7]
        bb = x[o + 8]
        gb = x[o + 9]
        db_ = x[o + 10]
        cb = x[o + 11]
        nui = x[sb + 1 + i]
        ea = x[eb + i]
        eeb = x[eb + i + 1]
        pa = ra * ra * x[db + i]
        pb = rb * rb * x[db + i + 1]
        k = 3 + 3 * i
        eq[k] = nui * (ra - rb) - (ra * ba - rb * bb)
        eq[k + 1] = nui * (ra * aa - rb * ab) - (ra * da - rb * db_)
        eq[k + 2] = nui * (ra * ba - rb * bb) - (-ra * ga + rb * gb + pa - pb + ra * ca / 2 - rb * cb / 2)
        mg[m_ent + 1 + i] = ((ra * ea + pa) * ba - (rb * eeb + pb) * bb) + (
            ra * ba * ca / 2 - rb * bb * cb / 2
        ) - (nui * (ra * ea - rb * eeb) + nui * (ra * ca / 2 - rb * cb / 2))

    # right interface
    o = 6 * (n - 1)
    rn = x[o]
    an = x[o + 1]
    bn = x[o + 2]
    gn = x[o + 3]
    dn = x[o + 4]
    cn = x[o + 5]
    nup = x[sb + n]
    en = x[eb + n - 1]
    pn = rn * rn * x[db + n - 1]
    k = 3 * n
    eq[k] = nup * (rn - rp) - (rn * bn - rp * vp2)
    eq[k + 1] = nup * (rn * an - rp * vp1) - (rn * dn - rp * vp1 * vp2)
    eq[k + 2] = nup * (rn * bn - rp * vp2) - (-rn * gn - rp * vp2 * vp2 + pn - p_p + rn * cn / 2)
    mg[m_ent + n] = ((rn * en + pn) * bn - (rp * e_p + p_p) * vp2) + (rn * bn * cn / 2 - rp * vp2 * q_p / 2) - (
        nup * (rn * en - rp * e_p) + nup * (rn * cn / 2 - rp * q_p / 2)
    )

    # per-region subsolution margins
    for i in range(n):
        o = 6 * i
        a = x[o + 1]
        b = x[o + 2]
        g = x[o + 3]
        d = x[o + 4]
        c = x[o + 5]
        mg[2 * i] = c - a * a - b * b
        mg[2 * i + 1] = (c / 2 - a * a + g) * (c / 2 - b * b - g) - (d - a * b) * (d - a * b)

    # ordering
    m = m_ent + n + 1
    for k in range(n):
        mg[m + k] = x[sb + k + 1] - x[sb + k]
    m += n
    # positivity: the datum densities enter as constants times zero so
    # the output keeps the batch shape and dtype of x
    zero = x[0] - x[0]
    mg[m] = rm + zero
    mg[m + 1] = rp + zero
    for i in range(n):
        mg[m + 2 + i] = x[6 * i]
    m += n + 2
    mg[m] = d_m
    mg[m + 1] = d_p
    for i in range(n):
        mg[m + 2 + i] = x[db + i]
    m += n + 2

    # convexity over knots ordered -, 1..N, (+)
    nk = n + 1 + incl_plus
    for ki in range(nk):
        if ki == 0:
            rho_i = rm + zero
            e_i = e_m
            d_i = d_m
        elif ki <= n:
            rho_i = x[6 * (ki - 1)]
            e_i = x[eb + ki - 1]
            d_i = x[db + ki - 1]
        else:
            rho_i = rp + zero
            e_i = e_p
            d_i = d_p
        for kj in range(nk):
            if kj == ki:
                continue
            if kj == 0:
                rho_j = rm + zero
                e_j = e_m
            elif kj <= n:
                rho_j = x[6 * (kj - 1)]
                e_j = x[eb + kj - 1]
            else:
                rho_j = rp + zero
                e_j = e_p
            mg[m] = e_j - e_i - d_i * (rho_j - rho_i)
            m += 1


@njit(cache=True)
def _batch_numba(X, par, n, incl_plus, EQ, MG):
    for b in range(X.shape[0]):
        _point(X[b], par, n, incl_plus, EQ[b], MG[b])


def eval_batch(X, par, n: int, incl_plus: bool):
    """Evaluate rows of ``X`` (shape (batch, 9N+5)); returns (EQ, MG)."""
    X = np.ascontiguousarray(X)
    if X.ndim == 1:
        X = X[None, :]
    par = np.asarray(par, dtype=np.float64)
    dtype = X.dtype
    EQ = np.empty((X.shape[0], n_equalities(n)), dtype=dtype)
    MG = np.empty((X.shape[0], n_margins(n, incl_plus)), dtype=dtype)
    if USING_NUMBA:
        _batch_numba(X, par, n, int(incl_plus), EQ, MG)
    else:
        _point(X.T, par, n, int(incl_plus), EQ.T, MG.T)
    return EQ, MG


def eval_point(x, par, n: int, incl_plus: bool):
    EQ, MG = eval_batch(np.asarray(x, dtype=np.float64), par, n, incl_plus)
    return EQ[0], MG[0]


def jacobian(x, par, n: int, incl_plus: bool):
    """Values and Jacobians of (equalities, margins) at ``x`` by complex step.

    All quantities are polynomials in ``x``, so the derivative carries no
    truncation error and no cancellation.
    """
    x = np.asarray(x, dtype=np.float64)
    nv = x.size
    X = np.empty((nv + 1, nv), dtype=np.complex128)
    X[:] = x
    X[1:] += 1j * CSTEP * np.eye(nv)
    EQ, MG = eval_batch(X, par, n, incl_plus)
    eq = EQ[0].real.copy()
    mg = MG[0].real.copy()
    JE = (EQ[1:].imag / CSTEP).T
    JM = (MG[1:].imag / CSTEP).T
    return eq, mg, JE, JM


def pack(cfg: FanConfiguration) -> np.ndarray:
    n = cfg.n
    x = np.empty(n_vars(n))
    for i, s in enumerate(cfg.states):
        x[6 * i:6 * i + 6] = [float(v) for v in s.astuple()]
    x[6 * n:7 * n + 1] = [float(v) for v in cfg.speeds]
    th = cfg.thermo
    tb = thermo_index(n)
    x[tb:tb + 4] = [float(th.eps_minus), float(th.deps_minus), float(th.eps_plus), float(th.deps_plus)]
    x[tb + 4:tb + 4 + n] = [float(v) for v in th.eps]
    x[tb + 4 + n:] = [float(v) for v in th.deps]
    return x


def pack_datum(d: RiemannDatum) -> np.ndarray:
    return np.array(
        [d.rho_minus, d.rho_plus, d.v_minus[0], d.v_minus[1], d.v_plus[0], d.v_plus[1]],
        dtype=np.float64,
    )


def unpack(x, datum: RiemannDatum, n: int) -> FanConfiguration:
    x = [float(v) for v in x]
    states = tuple(WaveState(*x[6 * i:6 * i + 6]) for i in range(n))
    speeds = tuple(x[6 * n:7 * n + 1])
    tb = thermo_index(n)
    thermo = ThermoTable(x[tb], x[tb + 2], x[tb + 1], x[tb + 3], tuple(x[tb + 4:tb + 4 + n]),
                         tuple(x[tb + 4 + n:tb + 4 + 2 * n]))
    return FanConfiguration(datum, speeds, states, thermo)
