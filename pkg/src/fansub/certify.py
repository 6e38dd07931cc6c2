"""Existence certificate for an exact fan subsolution near a corrected one.

After correction only the last interior interface and the right interface
are off.  Freeze everything except the six unknowns

    x = (alpha_N, beta_N, delta_N, rho_N, nu_+, nu_{N-1})

and let Gamma(x) be the six jump relations there, written right-hand side
minus left-hand side.  A quantitative inverse function theorem with

    sigma_min(DGamma(x_hat)) >= r,   |second partials| <= A on the unit ball,
    D1 = 1/(4 n^2 A),   D2 = 1/(8 n^2 A),   n = 6,

gives a root within (2/r) |Gamma(x_hat)|_2 of x_hat whenever
|Gamma(x_hat)|_2 <= D2 r^2.  Every strict inequality touching the moved
coordinates is then checked to keep its sign over that ball, using interval
gradients (forward-mode duals over exact intervals).

All arithmetic is exact; the only irrational quantity, the Euclidean norm of
the residual, is replaced by a rational upper bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import system
from .exactnum import Dual, Interval, ball, format_rational, to_rational
from .fan_model import FanConfiguration

DIM = 6
COORDS = ("alpha", "beta", "delta", "rho", "nu", "nu_tilde")
R_GRID = tuple(Fraction(2, 2 ** k) for k in range(8))  # 2, 1, 1/2, ..., 1/64


class CertificationError(ValueError):
    pass


@dataclass(frozen=True)
class GammaPoint:
    alpha: object
    beta: object
    delta: object
    rho: object
    nu: object
    nu_tilde: object

    def astuple(self):
        return tuple(getattr(self, k) for k in COORDS)

    @classmethod
    def fromseq(cls, xs):
        xs = tuple(xs)
        if len(xs) != DIM:
            raise ValueError(f"expected {DIM} coordinates, got {len(xs)}")
        return cls(*xs)


@dataclass(frozen=True)
class GammaParams:
    rho_Nm1: object
    alpha_Nm1: object
    beta_Nm1: object
    gamma_Nm1: object
    delta_Nm1: object
    deps_Nm1: object
    C_Nm1: object
    gamma_N: object
    deps_N: object
    C_N: object
    rho_plus: object
    v_plus1: object
    v_plus2: object
    deps_plus: object


def gamma(x: GammaPoint, p: GammaParams) -> Tuple:
    a, b, d, r, nu, nt = x.astuple()
    ra, aa, ba = p.rho_Nm1, p.alpha_Nm1, p.beta_Nm1
    pa = ra * ra * p.deps_Nm1
    pn = r * r * p.deps_N
    rp, w1, w2 = p.rho_plus, p.v_plus1, p.v_plus2
    pp = rp * rp * p.deps_plus
    return (
        ra * ba - r * b - nt * (ra - r),
        ra * p.delta_Nm1 - r * d - nt * (ra * aa - r * a),
        -ra * p.gamma_Nm1 + r * p.gamma_N + pa - pn + ra * p.C_Nm1 / 2 - r * p.C_N / 2
        - nt * (ra * ba - r * b),
        r * b - rp * w2 - nu * (r - rp),
        r * d - rp * w1 * w2 - nu * (r * a - rp * w1),
        -r * p.gamma_N - rp * w2 * w2 + pn - pp + r * p.C_N / 2 - nu * (r * b - rp * w2),
    )


def gamma_jacobian(x: GammaPoint, p: GammaParams) -> List[List]:
    """Rows are components of Gamma, columns (alpha, beta, delta, rho, nu, nu_tilde)."""
    a, b, d, r, nu, nt = x.astuple()
    ra, aa, ba = p.rho_Nm1, p.alpha_Nm1, p.beta_Nm1
    rp, w1, w2 = p.rho_plus, p.v_plus1, p.v_plus2
    e = p.deps_N
    # d/drho of the normal-stress part, shared by rows 3 and 6 up to sign
    s = p.gamma_N - 2 * r * e - p.C_N / 2
    return [
        [0, -r, 0, nt - b, 0, r - ra],
        [nt * r, 0, -r, nt * a - d, 0, r * a - ra * aa],
        [0, nt * r, 0, s + nt * b, 0, r * b - ra * ba],
        [0, r, 0, b - nu, rp - r, 0],
        [-nu * r, 0, r, d - nu * a, rp * w1 - r * a, 0],
        [0, -nu * r, 0, -s - nu * b, rp * w2 - r * b, 0],
    ]


# ------------------------------------------------------------ configuration view


def _check_corrected(cfg: FanConfiguration):
    n = cfg.n
    if n < 2:
        raise CertificationError("certification needs at least two intermediate regions")
    res = system.labelled_residuals(cfg)
    keep = {"left"} | {f"interface{i}" for i in range(1, n - 1)}
    bad = [k for k, v in res.items() if system.residual_interface(k) in keep and v != 0]
    if bad:
        raise CertificationError(f"run correction first: nonzero residuals {', '.join(bad)}")


def gamma_point(cfg: FanConfiguration) -> GammaPoint:
    s = cfg.states[-1]
    return GammaPoint(s.alpha, s.beta, s.delta, s.rho, cfg.speeds[-1], cfg.speeds[-2])


def gamma_params(cfg: FanConfiguration) -> GammaParams:
    a, s, th, d = cfg.states[-2], cfg.states[-1], cfg.thermo, cfg.datum
    return GammaParams(
        rho_Nm1=a.rho, alpha_Nm1=a.alpha, beta_Nm1=a.beta, gamma_Nm1=a.gamma,
        delta_Nm1=a.delta, deps_Nm1=th.deps[-2], C_Nm1=a.C,
        gamma_N=s.gamma, deps_N=th.deps[-1], C_N=s.C,
        rho_plus=d.rho_plus, v_plus1=d.v_plus[0], v_plus2=d.v_plus[1], deps_plus=th.deps_plus,
    )


def with_gamma_point(cfg: FanConfiguration, x: GammaPoint) -> FanConfiguration:
    n = cfg.n
    out = cfg.with_state(n, alpha=x.alpha, beta=x.beta, delta=x.delta, rho=x.rho)
    return out.with_speed(n, x.nu).with_speed(n - 1, x.nu_tilde)


# ------------------------------------------------------------ singular values


def _gram_shift(M, c):
    n = len(M)
    S = [[sum(Fraction(M[k][i]) * M[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    c2 = Fraction(c) ** 2
    for i in range(n):
        S[i][i] -= c2
    return S


def psd_pivots(S) -> Optional[List[Fraction]]:
    """LDL^T pivots of a symmetric rational matrix with largest-diagonal pivoting.

    Returns the pivots when S is positive semidefinite, None otherwise.
    """
    A = [[Fraction(v) for v in row] for row in S]
    n = len(A)
    idx = list(range(n))
    piv = []
    while idx:
        k = max(idx, key=lambda i: A[i][i])
        dk = A[k][k]
        if dk < 0:
            return None
        if dk == 0:
            # PSD forces the remaining block to vanish
            if any(A[i][j] != 0 for i in idx for j in idx):
                return None
            piv.extend(Fraction(0) for _ in idx)
            return piv
        piv.append(dk)
        idx.remove(k)
        for i in idx:
            f = A[i][k] / dk
            if f == 0:
                continue
            for j in idx:
                A[i][j] -= f * A[k][j]
    return piv


def sigma_min_at_least(M, c) -> bool:
    """True only if M^T M - c^2 I is positive semidefinite, decided exactly."""
    c = to_rational(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    return psd_pivots(_gram_shift(M, c)) is not None


def certified_sigma_min(M, grid: Sequence = R_GRID) -> Fraction:
    """Largest c in ``grid`` with a PSD certificate; 0 when none passes."""
    for c in grid:
        if sigma_min_at_least(M, c):
            return Fraction(c)
    return Fraction(0)


# ------------------------------------------------------------ second derivatives


def second_partials(x: GammaPoint, p: GammaParams) -> Dict[Tuple[int, int, int], object]:
    """Nonzero second partials {(component, i, j): value} with i <= j (0-based)."""
    a, b, d, r, nu, nt = x.astuple()
    A, B, D, R, V, T = range(DIM)
    e = p.deps_N
    return {
        (0, B, R): -1, (0, R, T): 1,
        (1, A, R): nt, (1, A, T): r, (1, D, R): -1, (1, R, T): a,
        (2, B, R): nt, (2, B, T): r, (2, R, R): -2 * e, (2, R, T): b,
        (3, B, R): 1, (3, R, V): -1,
        (4, A, R): -nu, (4, A, V): -r, (4, D, R): 1, (4, R, V): -a,
        (5, B, R): -nu, (5, B, V): -r, (5, R, R): 2 * e, (5, R, V): -b,
    }


def hessian_bound(p: GammaParams, center: GammaPoint, radius) -> Fraction:
    """Upper bound for every |d^2 Gamma_k / dx_i dx_j| on the box of given radius."""
    radius = to_rational(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    box = GammaPoint.fromseq(ball(v, radius) for v in center.astuple())
    pi = GammaParams(*(Interval(to_rational(getattr(p, f.name))) for f in fields(GammaParams)))
    vals = second_partials(box, pi)
    return max(Interval._coerce(v).mag for v in vals.values())


def ift_constants(n: int, A) -> Tuple[Fraction, Fraction]:
    A = to_rational(A)
    if n < 1 or not A > 0:
        raise ValueError("need n >= 1 and A > 0")
    return Fraction(1) / (4 * n * n * A), Fraction(1) / (8 * n * n * A)


# ------------------------------------------------------------ norms


def sqrt_upper(q: Fraction, bits: int = 200) -> Fraction:
    """Rational upper bound for sqrt(q), q >= 0, with relative slack about 2^-bits."""
    q = to_rational(q)
    if q < 0:
        raise ValueError("negative argument")
    if q == 0:
        return Fraction(0)
    # sqrt(q) = sqrt(num * den) / den
    scale = 4 ** bits
    s = q.numerator * q.denominator * scale
    root = math.isqrt(s)
    if root * root < s:
        root += 1
    return Fraction(root, q.denominator * 2 ** bits)


def norm2_upper(values) -> Fraction:
    return sqrt_upper(sum(to_rational(v) ** 2 for v in values))


# ------------------------------------------------------------ margin survival


@dataclass
class SurvivalCheck:
    label: str
    margin: Fraction
    lipschitz: Fraction
    passed: bool


def margin_survival(cfg: FanConfiguration, radius, include_plus: bool = False,
                    contact: bool = False) -> Dict[str, SurvivalCheck]:
    """Check every strict inequality that depends on the six moved coordinates.

    L bounds max_j |d f / d x_j| over the box of half-width ``radius`` around
    the current point; the inequality survives any move of Euclidean length
    <= radius when sqrt(6) L radius < margin (checked squared, exactly).
    """
    radius = to_rational(radius)
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    base = system.inequality_margins(cfg, include_plus=include_plus, contact=contact)
    center = gamma_point(cfg).astuple()
    zero, one = Interval(0), Interval(1)
    duals = [Dual.seed(ball(v, radius), k, DIM, zero, one) for k, v in enumerate(center)]
    moved = with_gamma_point(cfg, GammaPoint.fromseq(duals))
    enc = system.inequality_margins(moved, include_plus=include_plus, contact=contact)
    out = {}
    for label, val in enc.items():
        if not isinstance(val, Dual):
            continue
        grads = [Interval._coerce(g) for g in val.grad]
        if all(g.mag == 0 for g in grads):
            continue
        L = max(g.mag for g in grads)
        m = base[label]
        passed = m > 0 and 6 * (L * radius) ** 2 < m * m
        out[label] = SurvivalCheck(label, m, L, passed)
    return out


# ------------------------------------------------------------ certificate


@dataclass
class IFTCertificate:
    n: int
    r: Fraction
    A: Fraction
    D1: Fraction
    D2: Fraction
    residual_norm: Fraction  # rational upper bound of |Gamma(x_hat)|_2
    root_distance: Fraction
    margin_survival: Dict[str, bool] = field(default_factory=dict)
    verdict: bool = False
    threshold: Fraction = Fraction(0)  # D2 r^2
    residuals: Tuple = ()
    survival_detail: Dict[str, SurvivalCheck] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        f = format_rational
        return {
            "n": self.n,
            "r": f(self.r),
            "A": f(self.A),
            "D1": f(self.D1),
            "D2": f(self.D2),
            "threshold": f(self.threshold),
            "residual_norm": f(self.residual_norm),
            "root_distance": f(self.root_distance),
            "residuals": [f(v) for v in self.residuals],
            "margin_survival": {
                k: {
                    "margin": f(c.margin),
                    "lipschitz": f(c.lipschitz),
                    "passed": c.passed,
                }
                for k, c in self.survival_detail.items()
            },
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def certify_existence(cfg: FanConfiguration, r_grid: Sequence = R_GRID, hessian_radius=1,
                      include_plus: bool = False) -> IFTCertificate:
    cfg = cfg.to_rational()
    _check_corrected(cfg)
    x = gamma_point(cfg)
    p = gamma_params(cfg)
    J = gamma_jacobian(x, p)
    r = certified_sigma_min(J, r_grid)
    A = hessian_bound(p, x, hessian_radius)
    D1, D2 = ift_constants(DIM, A)
    res = gamma(x, p)
    rn = norm2_upper(res)
    thr = D2 * r * r
    cert = IFTCertificate(n=DIM, r=r, A=A, D1=D1, D2=D2, residual_norm=rn,
                          root_distance=Fraction(0), threshold=thr, residuals=tuple(res))
    if r == 0:
        return cert
    ok = sum(v * v for v in res) <= thr * thr
    cert.root_distance = 2 * rn / r
    if not ok:
        return cert
    surv = margin_survival(cfg, cert.root_distance, include_plus=include_plus)
    cert.survival_detail = surv
    cert.margin_survival = {k: c.passed for k, c in surv.items()}
    cert.verdict = all(cert.margin_survival.values())
    return cert
