"""Numerical search for fan subsolutions.

Two strategies share one outcome type.

``reduced`` (default) searches over densities and velocities only.  For
those, every jump relation is solved exactly by the chain in
``elimination``, and the best reachable margin over the remaining unknowns is
an LP.  The outer search is differential evolution from a seeded random
population followed by Nelder-Mead, or Nelder-Mead alone from the densities
and velocities of a known fan (``warm_start``).

``penalty`` minimises squared jump residuals plus squared hinges
``max(0, target - margin)`` over all unknowns with a bounded trust-region
least-squares loop, from uniform random starts.

Both finish with Newton steps on the equalities that use exact rational
residuals of the float iterate, which is what lets residuals reach the 1e-12
level despite terms of size 1e4.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import differential_evolution, least_squares, minimize

from . import elimination, kernels, system
from .fan_model import FanConfiguration, RiemannDatum
from .system import DEFAULT_BOUNDS

log = logging.getLogger(__name__)

RHO_FLOOR = 1e-3
STRATEGIES = ("reduced", "penalty")


@dataclass
class SolveOptions:
    n_waves: int = 3
    target_margin: float = 1 / 3
    equality_tolerance: float = 1e-11
    max_restarts: int = 20
    rng_seed: int = 0
    # (lo, hi) per packed variable, see kernels.pack; None = bounds-table magnitudes
    init_box: Optional[Tuple[Sequence[float], Sequence[float]]] = None
    time_budget: float = 300.0
    # full starting configuration, tried first with the penalty method
    initial: Optional[FanConfiguration] = None
    # a fan (possibly for another datum) whose densities/velocities seed the reduced search
    warm_start: Optional[FanConfiguration] = None
    include_plus: bool = False
    strategy: str = "reduced"
    # extra margin asked of the search, so the polish keeps target
    margin_buffer: float = 0.05
    margin_cap: float = 2.0
    max_nfev: int = 400
    polish_iters: int = 12
    local_evals: int = 1500
    global_popsize: int = 10
    global_maxiter: int = 60

    def __post_init__(self):
        if self.n_waves < 1:
            raise ValueError("n_waves must be >= 1")
        if self.target_margin < 0:
            raise ValueError("target_margin must be nonnegative")
        if not self.equality_tolerance > 0:
            raise ValueError("equality_tolerance must be positive")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}")


@dataclass
class SolveOutcome:
    config: FanConfiguration
    feasibility_score: float
    restarts_used: int
    converged: bool
    max_abs_residual: float = float("nan")
    min_margin: float = float("nan")
    iterations: int = 0
    history: List[float] = field(default_factory=list)


# ---------------------------------------------------------------- problem setup


def _magnitudes(n: int) -> np.ndarray:
    b = {k: float(v) for k, v in DEFAULT_BOUNDS.items()}
    mag = np.empty(kernels.n_vars(n))
    for i in range(n):
        mag[6 * i:6 * i + 6] = [b["rho"], b["alpha"], b["beta"], b["gamma"], b["delta"], b["C"]]
    mag[6 * n:7 * n + 1] = b["nu"]
    tb = kernels.thermo_index(n)
    mag[tb:tb + 4] = [b["eps"], b["deps"], b["eps"], b["deps"]]
    mag[tb + 4:tb + 4 + n] = b["eps"]
    mag[tb + 4 + n:] = b["deps"]
    return mag


def default_box(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Sampling box over the packed variables: bounds-table magnitudes, positive
    where the variable must be."""
    mag = _magnitudes(n)
    lo, hi = -mag.copy(), mag.copy()
    tb = kernels.thermo_index(n)
    for i in range(n):
        lo[6 * i] = 0.5
        lo[6 * i + 5] = 0.0
    for k in [tb + 1, tb + 3] + list(range(tb + 4 + n, tb + 4 + 2 * n)):
        lo[k] = 0.5
    return lo, hi


class _Problem:
    """Free-variable view of the packed system for one Riemann datum."""

    def __init__(self, datum: RiemannDatum, n: int, include_plus: bool = False):
        self.datum = datum
        self.n = n
        self.par = kernels.pack_datum(datum)
        self.tied = datum.rho_plus == datum.rho_minus
        self.incl_plus = bool(include_plus) and not self.tied
        nv = kernels.n_vars(n)
        tb = kernels.thermo_index(n)
        if self.tied:
            # eps_+ and eps'_+ follow eps_- and eps'_-
            free = [k for k in range(nv) if k not in (tb + 2, tb + 3)]
            T = np.zeros((nv, len(free)))
            for j, k in enumerate(free):
                T[k, j] = 1.0
            T[tb + 2, free.index(tb)] = 1.0
            T[tb + 3, free.index(tb + 1)] = 1.0
        else:
            free = list(range(nv))
            T = np.eye(nv)
        self.free = free
        self.T = T
        self.nfree = len(free)
        self.scale = _magnitudes(n)[free]
        lo = np.full(nv, -np.inf)
        for i in range(n):
            lo[6 * i] = RHO_FLOOR
        self.lower = lo[free]
        self.upper = np.full(self.nfree, np.inf)

    def full(self, z):
        return self.T @ z

    def reduce(self, x):
        return np.asarray(x)[self.free]

    def evaluate(self, z):
        return kernels.eval_point(self.full(z), self.par, self.n, self.incl_plus)

    def jac(self, z):
        eq, mg, JE, JM = kernels.jacobian(self.full(z), self.par, self.n, self.incl_plus)
        return eq, mg, JE @ self.T, JM @ self.T

    def config(self, z) -> FanConfiguration:
        return kernels.unpack(self.full(z), self.datum, self.n)


def _exact_residuals(prob: _Problem, z) -> np.ndarray:
    """Jump residuals of the float iterate computed exactly, rounded once."""
    cfg = prob.config(z).to_rational()
    return np.array([float(r) for r in system.equality_residuals(cfg)])


def _exact_score(prob: _Problem, z, target):
    cfg = prob.config(z).to_rational()
    res = system.equality_residuals(cfg)
    mg = system.inequality_margins(cfg, include_plus=prob.incl_plus)
    max_res = float(max(abs(r) for r in res))
    min_mg = float(min(mg.values()))
    return max(max_res, max(0.0, target - min_mg)), max_res, min_mg


# ---------------------------------------------------------------- shared stages


def _polish(prob: _Problem, z, target, iters):
    """Minimum-norm Newton steps on the equalities with exact residuals.

    A step is kept only if it reduces the exact residual and leaves every
    margin at or above ``target``.
    """
    best = z.copy()
    r = _exact_residuals(prob, best)
    best_norm = np.max(np.abs(r))
    for _ in range(iters):
        if best_norm == 0.0:
            break
        _, _, JE, _ = prob.jac(best)
        step = np.linalg.lstsq(JE * prob.scale, -r, rcond=None)[0] * prob.scale
        cand = best + step
        if np.any(cand < prob.lower):
            break
        rc = _exact_residuals(prob, cand)
        _, mg = prob.evaluate(cand)
        if np.max(np.abs(rc)) < best_norm and np.min(mg) >= target:
            best, r, best_norm = cand, rc, np.max(np.abs(rc))
        else:
            break
    return best


def feasibility_score(cfg: FanConfiguration, target_margin, include_plus: bool = False) -> float:
    """max(max |residual|, max(0, target - min margin)), evaluated exactly for float input."""
    rep = system.evaluate(cfg.to_rational(), 0, include_plus=include_plus)
    target = target_margin if isinstance(target_margin, Fraction) else Fraction(target_margin)
    return float(max(rep.max_abs_residual, max(Fraction(0), target - rep.min_margin)))


def _is_converged(res, mg, opts: SolveOptions) -> bool:
    return res <= opts.equality_tolerance and mg >= opts.target_margin


# ---------------------------------------------------------------- penalty strategy


def _penalty_stage(prob: _Problem, z0, target, max_nfev):
    def fun(z):
        eq, mg = prob.evaluate(z)
        return np.concatenate([eq, np.maximum(0.0, target - mg)])

    def jac(z):
        eq, mg, JE, JM = prob.jac(z)
        active = (target - mg) > 0
        JH = -JM * active[:, None]
        return np.vstack([JE, JH])

    z0 = np.clip(z0, prob.lower + 1e-12, prob.upper)
    res = least_squares(
        fun, z0, jac=jac, bounds=(prob.lower, prob.upper), x_scale=prob.scale,
        method="trf", max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15,
    )
    return res.x, res.nfev


def _attempt(prob: _Problem, z0, opts: SolveOptions):
    """Penalty stage plus polish from z0; keeps z0 if nothing improves."""
    target_s = opts.target_margin + opts.margin_buffer
    score0, res0, mg0 = _exact_score(prob, z0, opts.target_margin)
    if _is_converged(res0, mg0, opts):
        return z0, score0, res0, mg0, 0
    z, nfev = _penalty_stage(prob, z0, target_s, opts.max_nfev)
    z = _polish(prob, z, opts.target_margin, opts.polish_iters)
    score, res, mg = _exact_score(prob, z, opts.target_margin)
    if score > score0:
        return z0, score0, res0, mg0, nfev
    return z, score, res, mg, nfev


# ---------------------------------------------------------------- reduced strategy


class _Stop(Exception):
    def __init__(self, theta=None):
        self.theta = theta


class _Reduced:
    """Outer objective over (rho_i, alpha_i<N, beta_i[<N when tied])."""

    def __init__(self, prob: _Problem, opts: SolveOptions, deadline: float):
        self.prob = prob
        self.opts = opts
        self.n = prob.n
        self.tied = prob.tied
        self.goal = opts.target_margin + opts.margin_buffer
        self.cap = max(opts.margin_cap, self.goal)
        self.deadline = deadline
        self.nfev = 0

    def value(self, theta):
        return elimination.outer_value(theta, self.prob.par, self.n, self.tied, self.goal,
                                       self.cap, self.prob.incl_plus)

    def objective(self, theta):
        """Objective that stops the search once the goal margin is reached."""
        if time.monotonic() > self.deadline:
            raise _Stop()
        self.nfev += 1
        v = self.value(theta)[0]
        if -v >= self.goal:
            raise _Stop(np.array(theta, float))
        return v

    def theta_of(self, cfg: FanConfiguration, adapt_speeds: bool = False) -> np.ndarray:
        n = self.n
        rho = np.array([float(s.rho) for s in cfg.states])
        alpha = np.array([float(s.alpha) for s in cfg.states])
        beta = np.array([float(s.beta) for s in cfg.states])
        if adapt_speeds:
            # keep the fan's speeds: rebuild beta through the mass relations
            d = self.prob.datum
            nu = [float(v) for v in cfg.speeds]
            cr = np.r_[float(d.rho_minus), rho, float(d.rho_plus)]
            b = [float(d.v_minus[1])]
            for k in range(n - 1):
                b.append(nu[k] + cr[k] * (b[-1] - nu[k]) / cr[k + 1])
            b.append(nu[n] + cr[n + 1] * (float(d.v_plus[1]) - nu[n]) / rho[-1])
            beta = np.array(b[1:])
        nb = n - 1 if self.tied else n
        return np.r_[rho, alpha[:n - 1], beta[:nb]]

    def bounds(self):
        n = self.n
        lo, hi = self.opts.init_box if self.opts.init_box is not None else default_box(n)
        lo = np.broadcast_to(np.asarray(lo, float), (kernels.n_vars(n),))
        hi = np.broadcast_to(np.asarray(hi, float), (kernels.n_vars(n),))
        nb = n - 1 if self.tied else n
        idx = [6 * i for i in range(n)] + [6 * i + 1 for i in range(n - 1)] + [6 * i + 2 for i in range(nb)]
        return list(zip(lo[idx], hi[idx]))

    def local(self, theta0):
        """Nelder-Mead from theta0; returns the best theta seen."""
        if time.monotonic() > self.deadline:
            return theta0
        step = np.maximum(0.05 * np.abs(theta0), 0.2)
        simplex = theta0 + np.vstack([np.zeros(theta0.size), np.diag(step)])
        try:
            res = minimize(self.objective, theta0, method="Nelder-Mead", options={
                "maxfev": self.opts.local_evals, "adaptive": True,
                "initial_simplex": simplex, "xatol": 1e-6, "fatol": 1e-6,
            })
        except _Stop as s:
            return theta0 if s.theta is None else s.theta
        return res.x

    def global_(self, seed: int):
        try:
            res = differential_evolution(
                self.objective, self.bounds(), popsize=self.opts.global_popsize,
                maxiter=self.opts.global_maxiter, seed=seed, polish=False, tol=0.0,
            )
        except _Stop as s:
            return s.theta
        return res.x

    def finish(self, theta):
        """Assemble the best configuration for theta and polish it; None if impossible."""
        if theta is None:
            return None
        _, o, u = self.value(theta)
        if u is None:
            return None
        x = elimination.assemble(self.prob.par, self.n, o, u, self.tied)
        z = self.prob.reduce(x)
        z = _polish(self.prob, z, self.opts.target_margin, self.opts.polish_iters)
        score, res, mg = _exact_score(self.prob, z, self.opts.target_margin)
        return z, score, res, mg


# ---------------------------------------------------------------- driver


def solve(datum: RiemannDatum, opts: SolveOptions) -> SolveOutcome:
    """Multi-start search; deterministic for a given ``opts.rng_seed``.

    Order of starts: ``opts.initial`` (penalty method), then
    ``opts.warm_start`` (reduced search), then up to ``max_restarts`` seeded
    random restarts.  Stops at the first converged outcome and otherwise
    returns the best one found.
    """
    n = opts.n_waves
    prob = _Problem(datum, n, opts.include_plus)
    rng = np.random.default_rng(opts.rng_seed)
    t0 = time.monotonic()
    deadline = t0 + opts.time_budget
    strategy = opts.strategy
    if strategy == "reduced" and n == 1 and prob.tied:
        # the closing relation degenerates for one region between equal densities
        strategy = "penalty"
    best = None
    history: List[float] = []
    iters = 0
    restarts = 0

    def record(result):
        nonlocal best
        if result is None:
            return False
        z, score, res, mg = result
        history.append(score)
        if best is None or score < best[1]:
            best = (z, score, res, mg)
        return _is_converged(res, mg, opts)

    done = False
    if opts.initial is not None:
        if opts.initial.n != n:
            raise ValueError("initial configuration has the wrong number of regions")
        z0 = prob.reduce(kernels.pack(opts.initial.to_float()))
        z, score, res, mg, nfev = _attempt(prob, z0, opts)
        iters += nfev
        restarts += 1
        done = record((z, score, res, mg))

    red = _Reduced(prob, opts, deadline) if strategy == "reduced" else None
    if not done and red is not None and opts.warm_start is not None:
        if opts.warm_start.n != n:
            raise ValueError("warm start has the wrong number of regions")
        for adapt in (False, True):
            theta = red.theta_of(opts.warm_start, adapt)
            restarts += 1
            done = record(red.finish(red.local(theta)))
            if done or time.monotonic() > deadline:
                break

    lo, hi = opts.init_box if opts.init_box is not None else default_box(n)
    lo = prob.reduce(np.broadcast_to(np.asarray(lo, float), (kernels.n_vars(n),)))
    hi = prob.reduce(np.broadcast_to(np.asarray(hi, float), (kernels.n_vars(n),)))
    for _ in range(opts.max_restarts):
        if done or (restarts > 0 and time.monotonic() > deadline):
            break
        restarts += 1
        if red is not None:
            theta = red.global_(int(rng.integers(2 ** 32)))
            if theta is not None and not -red.value(theta)[0] >= red.goal:
                theta = red.local(theta)
            done = record(red.finish(theta))
        else:
            z0 = lo + (hi - lo) * rng.random(prob.nfree)
            z, score, res, mg, nfev = _attempt(prob, z0, opts)
            iters += nfev
            done = record((z, score, res, mg))
    if red is not None:
        iters += red.nfev

    if best is None:
        # nothing could be assembled: report the first random point
        z = lo + (hi - lo) * np.random.default_rng(opts.rng_seed).random(prob.nfree)
        score, res, mg = _exact_score(prob, z, opts.target_margin)
        best = (z, score, res, mg)
    z, score, res, mg = best
    return SolveOutcome(
        config=prob.config(z),
        feasibility_score=score,
        restarts_used=restarts,
        converged=_is_converged(res, mg, opts),
        max_abs_residual=res,
        min_margin=mg,
        iterations=iters,
        history=history,
    )


# ---------------------------------------------------------------- sweep


@dataclass
class SweepSample:
    index: int
    rho_minus: float
    rho_plus: float
    v_minus1: float
    v_minus2: float
    v_plus1: float
    v_plus2: float
    converged: bool
    feasibility_score: float
    max_abs_residual: float
    min_margin: float
    restarts_used: int
    seconds: float

    def datum(self) -> RiemannDatum:
        return RiemannDatum(self.rho_minus, self.rho_plus, (self.v_minus1, self.v_minus2),
                            (self.v_plus1, self.v_plus2))


@dataclass
class SweepReport:
    halfwidth: float
    count: int
    seed: int
    samples: List[SweepSample]

    @property
    def success_count(self) -> int:
        return sum(s.converged for s in self.samples)

    def to_dict(self) -> dict:
        return {
            "halfwidth": self.halfwidth, "count": self.count, "seed": self.seed,
            "success_count": self.success_count,
            "samples": [asdict(s) for s in self.samples],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = list(SweepSample.__dataclass_fields__)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for s in self.samples:
            w.writerow([getattr(s, c) for c in cols])
        return buf.getvalue()


def sample_datum(base: RiemannDatum, halfwidth: float, rng: np.random.Generator) -> RiemannDatum:
    """Each of rho_-, rho_+, v_-1, v_-2, v_+1, v_+2 uniform within halfwidth of the base value."""
    c = [base.rho_minus, base.rho_plus, base.v_minus[0], base.v_minus[1], base.v_plus[0], base.v_plus[1]]
    v = [float(x) + rng.uniform(-halfwidth, halfwidth) for x in c]
    return RiemannDatum(v[0], v[1], (v[2], v[3]), (v[4], v[5]))


def sweep(base: RiemannDatum, halfwidth: float, count: int, opts: SolveOptions,
          progress=None) -> SweepReport:
    """Solve ``count`` random perturbations of ``base``.

    Sample k draws its datum from a generator seeded with (rng_seed, k) and is
    solved with rng_seed + k, so the report is reproducible and any single
    sample can be rerun on its own.
    """
    if halfwidth < 0:
        raise ValueError("halfwidth must be nonnegative")
    if count < 0:
        raise ValueError("count must be nonnegative")
    samples = []
    for k in range(count):
        d = sample_datum(base, halfwidth, np.random.default_rng([opts.rng_seed, k]))
        t = time.monotonic()
        out = solve(d, replace(opts, rng_seed=opts.rng_seed + k))
        s = SweepSample(
            k, float(d.rho_minus), float(d.rho_plus), float(d.v_minus[0]), float(d.v_minus[1]),
            float(d.v_plus[0]), float(d.v_plus[1]), out.converged, out.feasibility_score,
            out.max_abs_residual, out.min_margin, out.restarts_used, time.monotonic() - t,
        )
        samples.append(s)
        log.info("sample %d converged=%s score=%.3g (%.1fs)", k, s.converged, s.feasibility_score, s.seconds)
        if progress is not None:
            progress(s)
    return SweepReport(float(halfwidth), count, opts.rng_seed, samples)


# ---------------------------------------------------------------- two-wave probe


class ProbeError(ValueError):
    pass


@dataclass
class ProbeResult:
    best_score: float
    best_min_margin: float
    best_max_residual: float
    restarts: int
    scores: List[float]


def two_wave_probe(datum: RiemannDatum, opts: Optional[SolveOptions] = None) -> ProbeResult:
    """Search for a one-region fan for contact data and report the best score.

    For contact data a single region cannot carry positive Reynolds stress,
    so the best score should stay well away from 0 at a positive target.
    """
    if datum.rho_plus != datum.rho_minus or datum.v_plus[1] != datum.v_minus[1]:
        raise ProbeError("two-wave probe needs contact data: rho_+ = rho_- and v_+2 = v_-2")
    opts = replace(opts or SolveOptions(max_restarts=50), n_waves=1, strategy="penalty")
    out = solve(datum, opts)
    return ProbeResult(out.feasibility_score, out.min_margin, out.max_abs_residual,
                       out.restarts_used, list(out.history))
