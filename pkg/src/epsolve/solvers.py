"""Outer iterations for EP(F, C).

* :func:`solve_alg33` -- relaxed inertial subgradient extragradient method with
  a self-adaptive step size and inertia tied to the relaxation sequence.
* :func:`solve_rkspw_seg` -- inertial subgradient extragradient with adaptive
  step and the on-line inertial rule (reconstructed comparison method).
* :func:`solve_vm_eg` -- inertial extragradient with a fixed step and the
  on-line inertial rule (reconstructed comparison method).
"""

import csv
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .hilbert import HalfSpace, as_vector, norm
from .inertia import DEFAULT_EPSILON, OnlineRule, RelaxationSchedule, next_inertia
from .prox import DEFAULT_INNER_TOL, DEFAULT_MAX_INNER, NonConvergence, ProxRequest, solve_prox

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
EXACT = "ExactSolution"
INNER_FAILURE = "InnerFailure"

CSV_HEADER = ("n", "tol", "lambda", "theta", "phi", "gamma", "elapsed_ms")


@dataclass(frozen=True)
class SolverConfig:
    """``lambda1`` is the initial step (the fixed step for the extragradient
    baseline); ``mu`` the step-contraction factor of the adaptive rule."""

    lambda1: float = 0.1
    mu: float = 0.5
    schedule: object = field(default_factory=RelaxationSchedule)
    stop_tol: float = 1e-5
    max_iter: int = 10000
    record_gamma: bool = False
    inner_tol: float = DEFAULT_INNER_TOL
    max_inner: int = DEFAULT_MAX_INNER

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValueError("lambda1 must be positive")
        if not 0 < self.mu < 1:
            raise ValueError("mu must be in (0, 1)")
        if not self.stop_tol > 0:
            raise ValueError("stop_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class IterationRecord:
    n: int
    x_prev: np.ndarray
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    lam: float
    theta: float
    phi: float
    tol: float
    z: np.ndarray = None
    x_next: np.ndarray = None
    lam_next: float = None
    gamma: float = None
    elapsed: float = 0.0


@dataclass
class RunResult:
    algorithm: str
    records: list
    stop_reason: str
    final_point: np.ndarray
    total_time: float
    nonmonotone_events: int = 0
    clamp_events: int = 0
    inner_iterations: int = 0
    message: str = ""

    @property
    def iterations(self):
        return len(self.records)

    @property
    def converged(self):
        return self.stop_reason in (CONVERGED, EXACT)

    def tol_series(self):
        return np.array([r.tol for r in self.records])

    def lambda_series(self):
        return np.array([r.lam for r in self.records])

    def to_csv(self, fh=None, timing=True):
        """Write the per-iteration trace; returns the text when ``fh`` is None."""
        out = fh if fh is not None else io.StringIO()
        wr = csv.writer(out, lineterminator="\n")
        wr.writerow(CSV_HEADER)
        for r in self.records:
            wr.writerow([
                r.n, repr(r.tol), repr(r.lam), repr(r.theta), repr(r.phi),
                "" if r.gamma is None else repr(r.gamma),
                f"{r.elapsed * 1e3:.3f}" if timing else "0",
            ])
        return out.getvalue() if fh is None else None

    def summary(self, timing=True):
        return {
            "algorithm": self.algorithm,
            "stop_reason": self.stop_reason,
            "iterations": self.iterations,
            "total_time": self.total_time if timing else 0.0,
            "final_point": self.final_point.tolist(),
            "nonmonotone_events": self.nonmonotone_events,
            "clamp_events": self.clamp_events,
            "inner_iterations": self.inner_iterations,
            "message": self.message,
        }

    def summary_json(self, timing=True):
        return json.dumps(self.summary(timing), indent=2)


def gamma_value(x, x_prev, theta, phi, solution):
    """Lyapunov quantity ``||x - s||^2 - theta ||x_prev - s||^2 + delta ||x - x_prev||^2``."""
    delta = (1.0 + theta) * theta + (1.0 - phi) / phi * (1.0 - theta) * theta
    d, dp, dx = x - solution, x_prev - solution, x - x_prev
    return float(d @ d - theta * (dp @ dp) + delta * (dx @ dx))


def gamma_diagnostic(rec_prev, rec, solution):
    """Gamma at ``rec.n``; ``x_{n-1}`` is taken from ``rec_prev`` when given."""
    x_prev = rec_prev.x if rec_prev is not None else rec.x_prev
    return gamma_value(rec.x, x_prev, rec.theta, rec.phi, solution)


def adaptive_step(prob, w, y, z, lam, mu):
    """Step-size update: shrink ``lam`` when the bifunction curvature term is positive."""
    bracket = prob.value(w, z) - prob.value(w, y) - prob.value(y, z)
    if bracket > 0:
        wy, zy = w - y, z - y
        return min(mu * float(wy @ wy + zy @ zy) / (2.0 * bracket), lam)
    return lam


def _start(prob, x0, x1):
    x0, x1 = as_vector(x0), as_vector(x1)
    if x0.shape != (prob.dim,) or x1.shape != (prob.dim,):
        raise ValueError(f"starting points must have dimension {prob.dim}")
    return x0, x1


class _Run:
    """Shared bookkeeping for the three loops."""

    def __init__(self, name, prob, cfg):
        self.name, self.prob, self.cfg = name, prob, cfg
        self.records = []
        self.inner = 0
        self.t0 = time.perf_counter()
        self.solution = prob.known_solution if cfg.record_gamma else None
        if cfg.record_gamma and self.solution is None:
            raise ValueError("record_gamma needs a problem with a known solution")

    def prox(self, u, w, lam, S):
        res = solve_prox(ProxRequest(self.prob, u, w, lam, S), self.cfg.inner_tol, self.cfg.max_inner)
        self.inner += res.inner_iterations
        return res.minimizer

    def record(self, **kw):
        rec = IterationRecord(**kw)
        if self.solution is not None:
            rec.gamma = gamma_value(rec.x, rec.x_prev, rec.theta, rec.phi, self.solution)
        rec.elapsed = time.perf_counter() - self.t0
        self.records.append(rec)
        return rec

    def stop_reason(self, tol):
        if tol == 0.0:
            return EXACT
        if tol < self.cfg.stop_tol:
            return CONVERGED
        return None

    def result(self, reason, point, **kw):
        return RunResult(self.name, self.records, reason, point,
                         time.perf_counter() - self.t0, inner_iterations=self.inner, **kw)


def halfspace_for(w, y, omega, lam):
    """``T = {x : <w - lam omega - y, x - y> <= 0}``, which contains ``C``."""
    return HalfSpace(w - lam * omega - y, y)


def solve_alg33(prob, x0, x1, cfg, name=None):
    """Relaxed inertial subgradient extragradient method with adaptive step."""
    sched = cfg.schedule
    if not isinstance(sched, RelaxationSchedule):
        raise TypeError("solve_alg33 needs a RelaxationSchedule")
    x_prev, x = _start(prob, x0, x1)
    run = _Run(name or f"alg33[{sched.label}]", prob, cfg)
    C = prob.feasible_set
    lam = cfg.lambda1
    params = next_inertia(sched, 0)
    theta = params.theta
    nonmono = clamps = 0
    for n in range(1, cfg.max_iter + 1):
        phi = sched.phi(n)
        w = x + theta * (x - x_prev)
        try:
            y = run.prox(w, w, lam, C)
            tol = norm(y - w)
            reason = run.stop_reason(tol)
            if reason:
                run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=phi, tol=tol)
                return run.result(reason, y, nonmonotone_events=nonmono, clamp_events=clamps)
            T = halfspace_for(w, y, prob.subgradient(w, y), lam)
            z = run.prox(y, w, lam, T)
        except NonConvergence as exc:
            return run.result(INNER_FAILURE, x, nonmonotone_events=nonmono,
                              clamp_events=clamps, message=str(exc))
        x_next = (1.0 - phi) * w + phi * z
        lam_next = adaptive_step(prob, w, y, z, lam, cfg.mu)
        run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=phi, tol=tol,
                   z=z, x_next=x_next, lam_next=lam_next)
        params = next_inertia(sched, n, theta, horizon=cfg.max_iter)
        nonmono += params.nonmonotone
        clamps += params.clamped
        x_prev, x, lam, theta = x, x_next, lam_next, params.theta
    return run.result(MAX_ITER, x, nonmonotone_events=nonmono, clamp_events=clamps)


def solve_rkspw_seg(prob, x0, x1, cfg, name="rkspw"):
    """Inertial subgradient extragradient, adaptive step, on-line inertia, no relaxation."""
    rule = cfg.schedule
    if not isinstance(rule, OnlineRule):
        raise TypeError("solve_rkspw_seg needs an OnlineRule")
    x_prev, x = _start(prob, x0, x1)
    run = _Run(name, prob, cfg)
    C = prob.feasible_set
    lam = cfg.lambda1
    for n in range(1, cfg.max_iter + 1):
        theta = rule.theta(n, norm(x - x_prev))
        w = x + theta * (x - x_prev)
        try:
            y = run.prox(w, w, lam, C)
            tol = norm(y - w)
            reason = run.stop_reason(tol)
            if reason:
                run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=1.0, tol=tol)
                return run.result(reason, y)
            T = halfspace_for(w, y, prob.subgradient(w, y), lam)
            z = run.prox(y, w, lam, T)
        except NonConvergence as exc:
            return run.result(INNER_FAILURE, x, message=str(exc))
        lam_next = adaptive_step(prob, w, y, z, lam, cfg.mu)
        run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=1.0, tol=tol,
                   z=z, x_next=z, lam_next=lam_next)
        x_prev, x, lam = x, z, lam_next
    return run.result(MAX_ITER, x)


def solve_vm_eg(prob, x0, x1, cfg, name="vm"):
    """Inertial extragradient with fixed step ``cfg.lambda1``; both subproblems over ``C``."""
    rule = cfg.schedule
    if not isinstance(rule, OnlineRule):
        raise TypeError("solve_vm_eg needs an OnlineRule")
    x_prev, x = _start(prob, x0, x1)
    run = _Run(name, prob, cfg)
    C = prob.feasible_set
    lam = cfg.lambda1
    for n in range(1, cfg.max_iter + 1):
        theta = rule.theta(n, norm(x - x_prev))
        w = x + theta * (x - x_prev)
        try:
            y = run.prox(w, w, lam, C)
            tol = norm(y - w)
            reason = run.stop_reason(tol)
            if reason:
                run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=1.0, tol=tol)
                return run.result(reason, y)
            x_next = run.prox(y, w, lam, C)
        except NonConvergence as exc:
            return run.result(INNER_FAILURE, x, message=str(exc))
        run.record(n=n, x_prev=x_prev, x=x, w=w, y=y, lam=lam, theta=theta, phi=1.0, tol=tol,
                   z=x_next, x_next=x_next, lam_next=lam)
        x_prev, x = x, x_next
    return run.result(MAX_ITER, x)


SOLVERS = {"alg33": solve_alg33, "rkspw": solve_rkspw_seg, "vm": solve_vm_eg}


def benchmark_configs(prob, stop_tol=1e-5, max_iter=10000, epsilon=DEFAULT_EPSILON, record_gamma=False):
    """The five benchmark configurations as ``{name: (solver key, SolverConfig)}``.

    Comparison-method constants: ``sigma = 0.9 min(1, 1/(2 a1), 1/(2 a2))``,
    contraction ``0.9 sigma`` and on-line cap 0.9 for RKSPW; fixed step
    ``0.9 min(1/(2 a1), 1/(2 a2))`` and cap 0.9 for VM.
    """
    a1, a2 = prob.lipschitz_a1, prob.lipschitz_a2
    common = dict(stop_tol=stop_tol, max_iter=max_iter, record_gamma=record_gamma)
    out = {}
    for kind in ("sub_half", "half", "near_one"):
        sched = RelaxationSchedule(kind, epsilon=epsilon)
        out[f"alg33-{kind}"] = ("alg33", SolverConfig(0.1, 0.5, sched, **common))
    sigma = 0.9 * min(1.0, 1.0 / (2 * a1), 1.0 / (2 * a2))
    out["rkspw"] = ("rkspw", SolverConfig(0.1, 0.9 * sigma, OnlineRule(0.9), **common))
    step = 0.9 * min(1.0 / (2 * a1), 1.0 / (2 * a2))
    out["vm"] = ("vm", SolverConfig(step, 0.5, OnlineRule(0.9), **common))
    return out


def solve(key, prob, x0, x1, cfg, name=None):
    fn = SOLVERS[key]
    return fn(prob, x0, x1, cfg, name=name) if name else fn(prob, x0, x1, cfg)
