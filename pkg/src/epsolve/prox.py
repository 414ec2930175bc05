"""Proximal subproblems ``argmin { lam F(u, y) + 0.5 ||w - y||^2 : y in S }``."""

from dataclasses import dataclass

import numpy as np

from .hilbert import norm, project
from .problems import LINEAR_IN_Y, QUADRATIC_IN_Y

DEFAULT_INNER_TOL = 1e-10
DEFAULT_MAX_INNER = 10000


class NonConvergence(RuntimeError):
    """Inner projected-gradient loop did not reach its tolerance."""


@dataclass(frozen=True)
class ProxRequest:
    prob: object
    u: np.ndarray
    w: np.ndarray
    lam: float
    set: object

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        d = self.prob.dim
        if np.shape(self.u) != (d,) or np.shape(self.w) != (d,) or self.set.dim != d:
            raise ValueError("dimension mismatch in prox request")

    def objective(self, y):
        """``lam F(u, y) + 0.5 ||y - w||^2``."""
        r = y - self.w
        return self.lam * self.prob.value(self.u, y) + 0.5 * float(r @ r)

    def gradient(self, y):
        return self.lam * self.prob.subgradient(self.u, y) + (y - self.w)


@dataclass
class ProxResult:
    minimizer: np.ndarray
    inner_iterations: int = 0
    kkt_residual: float = 0.0
    objective_trace: list = None


def prox_linear(req):
    """Closed form when ``F(u, .)`` is affine: ``P_S(w - lam c(u))``."""
    if req.prob.prox_structure != LINEAR_IN_Y:
        raise TypeError("prox_linear needs a problem that is linear in y")
    c = req.prob.subgradient(req.u, req.w)
    return ProxResult(project(req.set, req.w - req.lam * c), 0, 0.0)


def prox_quadratic(req, tol=DEFAULT_INNER_TOL, max_inner=DEFAULT_MAX_INNER, trace=False):
    """Projected gradient with step ``1/L``, ``L = 2 lam ||Q|| + 1``.

    Starts from ``P_S(w)`` and stops on the natural residual
    ``||y - P_S(y - grad g(y))|| <= tol``.
    """
    prob = req.prob
    if prob.prox_structure != QUADRATIC_IN_Y:
        raise TypeError("prox_quadratic needs a problem that is quadratic in y")
    S, lam, w = req.set, req.lam, req.w
    L = 2.0 * lam * prob.curvature + 1.0
    # g(y) = lam(<Qy, y> + <c, y>) + 0.5||y - w||^2 up to a constant
    c = prob.linear_part(req.u)
    y = project(S, w)
    hist = [req.objective(y)] if trace else None
    for k in range(max_inner + 1):
        grad = lam * (c + 2.0 * prob.curvature_apply(y)) + (y - w)
        res = norm(y - project(S, y - grad))
        if res <= tol:
            return ProxResult(y, k, res, hist)
        if k == max_inner:
            break
        y = project(S, y - grad / L)
        if trace:
            hist.append(req.objective(y))
    raise NonConvergence(f"inner residual {res:.3e} > {tol:.1e} after {max_inner} iterations")


def solve_prox(req, tol=DEFAULT_INNER_TOL, max_inner=DEFAULT_MAX_INNER):
    """Dispatch on the problem's ``prox_structure``."""
    if req.prob.prox_structure == LINEAR_IN_Y:
        return prox_linear(req)
    return prox_quadratic(req, tol, max_inner)
