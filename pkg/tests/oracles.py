"""Independent reference computations shared by the unit and acceptance tests."""

import mpmath
import numpy as np

mpmath.mp.dps = 50


def _inv(phi_n, phi_np1, eps):
    return 1 / mpmath.mpf(phi_n), 1 / mpmath.mpf(phi_np1), mpmath.mpf(eps)


def delta_oracle(phi_n, phi_np1, eps):
    a, b, e = _inv(phi_n, phi_np1, eps)
    return mpmath.sqrt((a + b - 1) ** 2 - 4 * (a - 1 - e) * (b - 2))


def beta_oracle(phi_n, phi_np1, eps):
    """Textbook form ``(a + b - 1 - delta) / (2(b - 2))`` in 50-digit arithmetic."""
    a, b, _ = _inv(phi_n, phi_np1, eps)
    return (a + b - 1 - delta_oracle(phi_n, phi_np1, eps)) / (2 * (b - 2))


def pq_oracle(phi_n, phi_np1, eps):
    a, b, e = _inv(phi_n, phi_np1, eps)
    return (a + b - 1) / (2 * (2 - b)), (a - 1 - e) / (2 - b)


def case3_oracle(phi_n, phi_np1, eps):
    p, q = pq_oracle(phi_n, phi_np1, eps)
    return mpmath.sqrt(p * p + q) - p


def grid_objective(inst, u, w, lam, Y):
    """``lam F(u, y) + 0.5 ||y - w||^2`` for each row of ``Y``."""
    lin = inst.P @ u + inst.q
    return lam * np.sum((Y @ inst.Q.T + lin) * (Y - u), axis=1) + 0.5 * np.sum((Y - w) ** 2, axis=1)


def _grid_min(inst, u, w, lam, lo, hi, step, bound):
    axes = [np.clip(np.arange(lo[i], hi[i] + step / 2, step), -bound, bound) for i in range(len(u))]
    Y = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    g = grid_objective(inst, u, w, lam, Y)
    k = int(np.argmin(g))
    return Y[k], g[k]


def grid_prox(inst, u, w, lam, bound=5.0):
    """Minimize over the box ``[-bound, bound]^N``: a 0.05 grid, then a 1e-3 grid near its winner."""
    N = len(u)
    y0, _ = _grid_min(inst, u, w, lam, -bound * np.ones(N), bound * np.ones(N), 0.05, bound)
    return _grid_min(inst, u, w, lam, y0 - 0.06, y0 + 0.06, 1e-3, bound)
