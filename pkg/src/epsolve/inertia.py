"""Inertial factors driven by the relaxation sequence ``phi_n``.

Three regimes are supported, selected by ``phi_n``: below one half, exactly
one half, and in ``(0.5, 1 - eps]``. Each yields an upper bound for
``theta_{n+1}`` that depends only on ``(phi_n, phi_{n+1}, eps)``. The on-line
rule used by the comparison methods is in :class:`OnlineRule`.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

CASE_I, CASE_II, CASE_III = "I", "II", "III"
DEFAULT_EPSILON = 1e-6

# float slack for phi_n <= 1 - eps when phi_n is given by a closed formula
_PHI_SLACK = 1e-15


class InertiaDomainError(ValueError):
    """Parameters outside the domain where an inertial bound is defined."""


def _check_case_one(phi_n, phi_np1, epsilon):
    if not (0.0 < phi_n < 0.5 and 0.0 < phi_np1 < 0.5):
        raise InertiaDomainError(f"phi_n={phi_n}, phi_n+1={phi_np1} not in (0, 0.5)")
    if not epsilon >= 0:
        raise InertiaDomainError("epsilon must be nonnegative")
    if not 1.0 / phi_n - 1.0 / phi_np1 + 3.0 > 0:
        raise InertiaDomainError("requires 1/phi_n - 1/phi_n+1 + 3 > 0")


def discriminant(phi_n, phi_np1, epsilon):
    """Radicand of ``delta_n``: ``(a + b - 1)^2 - 4(a - 1 - eps)(b - 2)``, ``a = 1/phi_n``, ``b = 1/phi_n+1``."""
    a, b = 1.0 / phi_n, 1.0 / phi_np1
    return (a + b - 1.0) ** 2 - 4.0 * (a - 1.0 - epsilon) * (b - 2.0)


def discriminant_expanded(phi_n, phi_np1, epsilon):
    """Same quantity written as ``(a - b)^2 + 6a + 2b + 4(b - 2)eps - 7``."""
    a, b = 1.0 / phi_n, 1.0 / phi_np1
    return (a - b) ** 2 + 6.0 * a + 2.0 * b + 4.0 * (b - 2.0) * epsilon - 7.0


def delta_n(phi_n, phi_np1, epsilon):
    _check_case_one(phi_n, phi_np1, epsilon)
    disc = discriminant(phi_n, phi_np1, epsilon)
    if not disc > 0:
        raise InertiaDomainError(f"nonpositive discriminant {disc}")
    return math.sqrt(disc)


def beta_n(phi_n, phi_np1, epsilon):
    """Bound on ``theta_{n+1}`` when ``phi_n`` is below one half.

    Evaluated as ``2(a - 1 - eps) / (a + b - 1 + delta)``, which equals
    ``(a + b - 1 - delta) / (2(b - 2))`` but does not cancel as ``b -> 2``.
    """
    d = delta_n(phi_n, phi_np1, epsilon)
    a, b = 1.0 / phi_n, 1.0 / phi_np1
    return 2.0 * (a - 1.0 - epsilon) / (a + b - 1.0 + d)


def case3_pq(phi_n, phi_np1, epsilon):
    """Return ``(p_n, q_n)`` for ``phi`` in ``(0.5, 1 - eps]``."""
    hi = 1.0 - epsilon + _PHI_SLACK
    if not (0.5 < phi_n <= hi and 0.5 < phi_np1 <= hi):
        raise InertiaDomainError(f"phi_n={phi_n}, phi_n+1={phi_np1} not in (0.5, 1-eps]")
    a, b = 1.0 / phi_n, 1.0 / phi_np1
    den = 2.0 - b
    if not den > 0:
        raise InertiaDomainError("requires 2 - 1/phi_n+1 > 0")
    return 0.5 * (a + b - 1.0) / den, (a - 1.0 - epsilon) / den


def case3_bound(phi_n, phi_np1, epsilon):
    """``sqrt(p^2 + q) - p``, computed as ``q / (sqrt(p^2 + q) + p)`` to avoid cancellation."""
    p, q = case3_pq(phi_n, phi_np1, epsilon)
    return root_bound(p, q)


def root_bound(p, q):
    """Nonnegative root of ``t^2 + 2pt - q`` for ``p > 0``, ``q >= 0``."""
    if q < 0:
        # only reachable through the float slack at phi_n = 1 - eps
        if q > -1e-12:
            return 0.0
        raise InertiaDomainError(f"q_n={q} < 0")
    r = math.sqrt(p * p + q)
    return q / (r + p) if r + p > 0 else 0.0


def case2_bound(epsilon):
    return (1.0 - epsilon) / 3.0


def quadratic_certificate(theta, phi_n, phi_np1, epsilon):
    """``-(2 - b) t^2 - (a + b - 1) t + a - 1 - eps``; nonnegative iff the bound is respected."""
    a, b = 1.0 / phi_n, 1.0 / phi_np1
    return -(2.0 - b) * theta**2 - (a + b - 1.0) * theta + a - 1.0 - epsilon


SUB_HALF, HALF, NEAR_ONE, CUSTOM = "sub_half", "half", "near_one", "custom"
MONOTONE_MODES = ("envelope", "record", "clamp")
DEFAULT_HORIZON = 10000


@dataclass(frozen=True)
class RelaxationSchedule:
    """A relaxation sequence ``phi_n`` (1-based) plus the inertial settings.

    ``kind`` is one of ``sub_half`` (``(n - 0.5) / 2n``), ``half`` (0.5),
    ``near_one`` (``(n - 0.1) / n``) or ``custom`` (explicit ``values``; the
    last value repeats). ``safety`` scales every bound.

    ``monotone`` decides how the nondecreasing requirement on ``theta`` meets
    bounds that shrink with ``n``:

    * ``"envelope"`` (default): ``theta_{n+1} = min_{k >= n} bound_k`` over the
      run horizon, the largest nondecreasing sequence under every bound;
    * ``"record"``: ``theta_{n+1} = bound_n`` exactly, decreases are only counted;
    * ``"clamp"``: a decrease is replaced by the previous factor (this can
      exceed the bound).
    """

    kind: str = HALF
    epsilon: float = DEFAULT_EPSILON
    values: tuple = ()
    safety: float = 1.0
    monotone: str = "envelope"

    def __post_init__(self):
        if self.kind not in (SUB_HALF, HALF, NEAR_ONE, CUSTOM):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == CUSTOM and not self.values:
            raise ValueError("custom schedule needs values")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must be in (0, 1]")
        if self.monotone not in MONOTONE_MODES:
            raise ValueError(f"monotone must be one of {MONOTONE_MODES}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    @classmethod
    def parse(cls, text, **kw):
        """Parse ``"sub_half"``, ``"phi=near_one"`` or ``"0.6,0.7,0.8"``."""
        s = text.strip()
        if s.startswith("phi="):
            s = s[4:]
        if s in (SUB_HALF, HALF, NEAR_ONE):
            return cls(s, **kw)
        return cls(CUSTOM, values=tuple(float(t) for t in s.split(",")), **kw)

    @property
    def label(self):
        return self.kind if self.kind != CUSTOM else ",".join(f"{v:g}" for v in self.values)

    def phi(self, n):
        if n < 1:
            raise ValueError("phi is indexed from n = 1")
        if self.kind == HALF:
            return 0.5
        if self.kind == SUB_HALF:
            return (n - 0.5) / (2.0 * n)
        if self.kind == NEAR_ONE:
            return (n - 0.1) / n
        return self.values[min(n, len(self.values)) - 1]


@lru_cache(maxsize=64)
def _envelope(sched, horizon):
    b = np.array([sched.safety * inertia_bound(sched.phi(k), sched.phi(k + 1), sched.epsilon)[1]
                  for k in range(1, horizon + 1)])
    return np.minimum.accumulate(b[::-1])[::-1]


def envelope_bounds(sched, horizon=DEFAULT_HORIZON):
    """Suffix minima ``e[n-1] = min_{n <= k <= horizon} safety * bound_k``."""
    return _envelope(sched, int(horizon))


@dataclass(frozen=True)
class InertiaParams:
    """``theta`` is the factor for iteration ``n + 1``; ``phi`` is ``phi_n``."""

    theta: float
    phi: float
    case_tag: str
    bound_used: float
    nonmonotone: bool = False
    clamped: bool = False


def case_of(phi_n):
    if phi_n == 0.5:
        return CASE_II
    return CASE_I if phi_n < 0.5 else CASE_III


def inertia_bound(phi_n, phi_np1, epsilon):
    """Return ``(case, bound)`` for ``theta_{n+1}``."""
    case = case_of(phi_n)
    if case == CASE_II:
        if phi_np1 != 0.5:
            raise InertiaDomainError("phi_n = 0.5 must be constant")
        return case, case2_bound(epsilon)
    if case == CASE_I:
        return case, beta_n(phi_n, phi_np1, epsilon)
    return case, case3_bound(phi_n, phi_np1, epsilon)


def next_inertia(sched, n, theta_prev=0.0, horizon=DEFAULT_HORIZON):
    """Emit ``theta_{n+1}`` from ``(phi_n, phi_{n+1})``; ``n = 0`` gives ``theta_1 = 0``.

    ``horizon`` is the last index the envelope mode looks ahead to.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return InertiaParams(0.0, sched.phi(1), case_of(sched.phi(1)), 0.0)
    phi_n, phi_np1 = sched.phi(n), sched.phi(n + 1)
    case, bound = inertia_bound(phi_n, phi_np1, sched.epsilon)
    theta = sched.safety * bound
    if sched.monotone == "envelope":
        theta = float(envelope_bounds(sched, max(horizon, n))[n - 1])
    nonmono = theta < theta_prev
    clamped = nonmono and sched.monotone == "clamp"
    if clamped:
        theta = theta_prev
    return InertiaParams(theta, phi_n, case, bound, nonmono, clamped)


@dataclass(frozen=True)
class OnlineRule:
    """``min(cap, eps_n / ||x_n - x_{n-1}||)`` with ``eps_n = scale / (n + 1)^2``."""

    theta_cap: float = 0.9
    eps_scale: float = 100.0

    def __post_init__(self):
        if not 0 <= self.theta_cap < 1:
            raise ValueError("theta_cap must be in [0, 1)")

    @property
    def label(self):
        return f"online(cap={self.theta_cap:g})"

    def eps(self, n):
        return self.eps_scale / (n + 1) ** 2

    def theta(self, n, displacement):
        if n < 1:
            raise ValueError("n must be >= 1")
        if displacement == 0:
            return self.theta_cap
        return min(self.theta_cap, self.eps(n) / displacement)


def online_theta(state, n, displacement):
    return state.theta(n, displacement)
