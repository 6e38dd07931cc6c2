"""Second, independent transcription of the fan subsolution system.

Written straight from the jump relations and inequalities, one line per
relation, over plain tuples.  It shares no code with ``fansub.system`` and is
only used to cross-check it.
"""

from fractions import Fraction


def _p(rho, deps):
    return rho * rho * deps


def transcribe(raw, include_plus=False):
    """raw = (rm, rp, (vm1, vm2), (vp1, vp2), speeds, regions, em, ep, dm, dp, E, D).

    regions are (rho, alpha, beta, gamma, delta, C) tuples; speeds has N+1
    entries nu_-, nu_1..nu_{N-1}, nu_+.
    Returns (equalities, margins) as dicts keyed like the library's labels.
    """
    rm, rp, (vm1, vm2), (vp1, vp2), nus, R, em, ep, dm, dp, E, D = raw
    N = len(R)
    eq, mg = {}, {}
    half = Fraction(1, 2) if isinstance(rm, Fraction) else 0.5
    # left interface
    nu = nus[0]
    r1, a1, b1, g1, d1, C1 = R[0]
    eq["left/mass"] = nu * (rm - r1) - (rm * vm2 - r1 * b1)
    eq["left/momentum1"] = nu * (rm * vm1 - r1 * a1) - (rm * vm1 * vm2 - r1 * d1)
    eq["left/momentum2"] = nu * (rm * vm2 - r1 * b1) - (
        rm * vm2 ** 2 + r1 * g1 + _p(rm, dm) - _p(r1, D[0]) - r1 * C1 * half)
    # interior interfaces
    for i in range(1, N):
        nu = nus[i]
        ri, ai, bi, gi, di, Ci = R[i - 1]
        rj, aj, bj, gj, dj, Cj = R[i]
        eq[f"interface{i}/mass"] = nu * (ri - rj) - (ri * bi - rj * bj)
        eq[f"interface{i}/momentum1"] = nu * (ri * ai - rj * aj) - (ri * di - rj * dj)
        eq[f"interface{i}/momentum2"] = nu * (ri * bi - rj * bj) - (
            -ri * gi + rj * gj + _p(ri, D[i - 1]) - _p(rj, D[i]) + ri * Ci * half - rj * Cj * half)
    # right interface
    nu = nus[N]
    rN, aN, bN, gN, dN, CN = R[N - 1]
    eq["right/mass"] = nu * (rN - rp) - (rN * bN - rp * vp2)
    eq["right/momentum1"] = nu * (rN * aN - rp * vp1) - (rN * dN - rp * vp1 * vp2)
    eq["right/momentum2"] = nu * (rN * bN - rp * vp2) - (
        -rN * gN - rp * vp2 ** 2 + _p(rN, D[N - 1]) - _p(rp, dp) + rN * CN * half)
    # subsolution inequalities
    for i, (r, a, b, g, d, C) in enumerate(R, start=1):
        mg[f"kinetic[{i}]"] = C - (a ** 2 + b ** 2)
        mg[f"stress_det[{i}]"] = (C * half - a ** 2 + g) * (C * half - b ** 2 - g) - (d - a * b) ** 2
    # admissibility: margin = right side - left side
    qm = vm1 ** 2 + vm2 ** 2
    lhs = nus[0] * (rm * em - r1 * E[0]) + nus[0] * (rm * qm * half - r1 * C1 * half)
    rhs = ((rm * em + _p(rm, dm)) * vm2 - (r1 * E[0] + _p(r1, D[0])) * b1) + (
        rm * vm2 * qm * half - r1 * b1 * C1 * half)
    mg["entropy[left]"] = rhs - lhs
    for i in range(1, N):
        ri, ai, bi, gi, di, Ci = R[i - 1]
        rj, aj, bj, gj, dj, Cj = R[i]
        lhs = nus[i] * (ri * E[i - 1] - rj * E[i]) + nus[i] * (ri * Ci * half - rj * Cj * half)
        rhs = ((ri * E[i - 1] + _p(ri, D[i - 1])) * bi - (rj * E[i] + _p(rj, D[i])) * bj) + (
            ri * bi * Ci * half - rj * bj * Cj * half)
        mg[f"entropy[{i}]"] = rhs - lhs
    qp = vp1 ** 2 + vp2 ** 2
    lhs = nus[N] * (rN * E[N - 1] - rp * ep) + nus[N] * (rN * CN * half - rp * qp * half)
    rhs = ((rN * E[N - 1] + _p(rN, D[N - 1])) * bN - (rp * ep + _p(rp, dp)) * vp2) + (
        rN * bN * CN * half - rp * vp2 * qp * half)
    mg["entropy[right]"] = rhs - lhs
    # fan ordering
    for k in range(1, N + 1):
        mg[f"order[{k}]"] = nus[k] - nus[k - 1]
    # positivity
    mg["rho[-]"], mg["rho[+]"] = rm, rp
    for i, reg in enumerate(R, start=1):
        mg[f"rho[{i}]"] = reg[0]
    mg["deps[-]"], mg["deps[+]"] = dm, dp
    for i, v in enumerate(D, start=1):
        mg[f"deps[{i}]"] = v
    # convexity over {-, 1..N} (and + when asked and not coinciding with -)
    knots = [("-", rm, em, dm)] + [(str(i + 1), R[i][0], E[i], D[i]) for i in range(N)]
    if include_plus and not (rp == rm and ep == em and dp == dm):
        knots.append(("+", rp, ep, dp))
    for li, xi, hi, Di in knots:
        for lj, xj, hj, Dj in knots:
            if li != lj:
                mg[f"convex[{li},{lj}]"] = hj - hi - Di * (xj - xi)
    return eq, mg


def raw_from_config(cfg):
    d, th = cfg.datum, cfg.thermo
    return (
        d.rho_minus, d.rho_plus, tuple(d.v_minus), tuple(d.v_plus),
        tuple(cfg.speeds),
        tuple((s.rho, s.alpha, s.beta, s.gamma, s.delta, s.C) for s in cfg.states),
        th.eps_minus, th.eps_plus, th.deps_minus, th.deps_plus, tuple(th.eps), tuple(th.deps),
    )
