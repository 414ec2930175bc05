"""Run-level checks of the convergence invariants.

Each function returns a list of violating iteration indices, so an empty list
means the run passed.
"""

import numpy as np

from .hilbert import norm


def step_floor(prob, cfg):
    """Lower bound ``min(mu / (2 max(a1, a2)), lambda1)`` of the adaptive step."""
    return min(cfg.mu / (2.0 * max(prob.lipschitz_a1, prob.lipschitz_a2)), cfg.lambda1)


def step_size_violations(result, prob, cfg, slack=1e-12):
    """Indices where ``lambda`` increases or drops below :func:`step_floor`."""
    lam = result.lambda_series()
    floor = step_floor(prob, cfg) - slack
    bad = [r.n for r in result.records if r.lam < floor]
    bad += [result.records[i + 1].n for i in np.flatnonzero(np.diff(lam) > 0)]
    return sorted(bad)


def first_contractive_index(result, mu):
    """First ``n`` with ``mu lambda_n / lambda_{n+1} < 1``, or None."""
    for r in result.records:
        if r.lam_next is not None and mu * r.lam / r.lam_next < 1.0:
            return r.n
    return None


def contraction_violations(result, solution, mu, slack=1e-9):
    """Check ``||z - s||^2 <= ||w - s||^2 - (1 - mu lam / lam_next)(||w - y||^2 + ||z - y||^2)``."""
    n0 = first_contractive_index(result, mu)
    if n0 is None:
        return []
    bad = []
    for r in result.records:
        if r.n < n0 or r.z is None:
            continue
        c = 1.0 - mu * r.lam / r.lam_next
        lhs = norm(r.z - solution) ** 2
        rhs = norm(r.w - solution) ** 2 - c * (norm(r.w - r.y) ** 2 + norm(r.z - r.y) ** 2)
        if lhs > rhs + slack:
            bad.append(r.n)
    return bad


def gamma_descent_violations(result, mu, epsilon, slack=1e-9):
    """Check ``Gamma_{n+1} <= Gamma_n - eps ||x_{n+1} - x_n||^2`` from the first contractive index."""
    recs = result.records
    if any(r.gamma is None for r in recs):
        raise ValueError("run was recorded without gamma")
    n0 = first_contractive_index(result, mu)
    if n0 is None:
        return []
    bad = []
    for a, b in zip(recs, recs[1:]):
        if a.n < n0:
            continue
        step = norm(b.x - a.x) ** 2
        if b.gamma > a.gamma - epsilon * step + slack:
            bad.append(a.n)
    return bad


def positive_variation(result, solution):
    """``sum max(0, ||x_{n+1} - s|| - ||x_n - s||)`` over the recorded iterates."""
    d = [norm(r.x - solution) for r in result.records]
    if result.records and result.records[-1].x_next is not None:
        d.append(norm(result.records[-1].x_next - solution))
    return float(sum(max(0.0, b - a) for a, b in zip(d, d[1:])))
