"""Equilibrium problems EP(F, C): bifunction abstraction, the two benchmark
problems (Nash-Cournot oligopoly on a box, and a pseudomonotone bifunction on
the unit ball of l2), random instance generation and assumption checks.
"""

from dataclasses import dataclass, field

import numpy as np

from .hilbert import Ball, Box, as_vector, geometric_sequence, norm

LINEAR_IN_Y = "linear"
QUADRATIC_IN_Y = "quadratic"

# (first term, ratio) of the geometric starting points (x1, x0) for each ball case.
BALL_CASES = {
    1: ((5 / 7, 1 / 5), (1 / 2, 1 / 3)),
    2: ((1 / 2, 1 / 3), (1 / 3, 1 / 3)),
    3: ((1 / 3, 1 / 3), (2 / 5, 1 / 2)),
}
DEFAULT_L2_DIM = 50
NASH_COURNOT_BOUND = 5.0


class EquilibriumProblem:
    """Base class for a bifunction ``F`` on a feasible set ``C``.

    Subclasses implement :meth:`value` and :meth:`subgradient` (an element of
    the subdifferential of ``F(x, .)`` at ``y``) and set the attributes below.
    """

    kind = "abstract"
    feasible_set = None
    lipschitz_a1 = None
    lipschitz_a2 = None
    prox_structure = LINEAR_IN_Y
    known_solution = None
    # spectral norm of the Hessian of F(x, .) / 2; zero for linear problems
    curvature = 0.0

    @property
    def dim(self):
        return self.feasible_set.dim

    def value(self, x, y):
        raise NotImplementedError

    def subgradient(self, x, y):
        raise NotImplementedError

    def _args(self, x, y):
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.shape != (self.dim,) or y.shape != (self.dim,):
            raise ValueError(f"expected vectors of dimension {self.dim}, got {x.shape} and {y.shape}")
        return x, y

    def initial_points(self):
        """Return the benchmark starting pair ``(x0, x1)``."""
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


def spectral_norm_sym(A, rtol=1e-10, max_iter=100000, seed=0):
    """Largest absolute eigenvalue of a symmetric matrix by power iteration."""
    A = np.asarray(A, dtype=float)
    if not np.any(A):
        return 0.0
    v = np.random.default_rng(seed).standard_normal(A.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(max_iter):
        u = A @ (A @ v)
        s = np.linalg.norm(u)
        if s == 0.0:
            return 0.0
        v = u / s
        # ||A^2 v|| -> lambda_max^2; squaring separates +/- eigenvalues of equal modulus
        new = np.sqrt(s)
        if abs(new - est) <= rtol * new:
            return float(new)
        est = new
    return float(est)


@dataclass(frozen=True, eq=False)
class NashCournotInstance:
    """Data of ``F(x, y) = <Px + Qy + q, y - x>`` on ``[-5, 5]^N``."""

    P: np.ndarray
    Q: np.ndarray
    q: np.ndarray
    seed: int = None
    x0: np.ndarray = None
    x1: np.ndarray = None
    known_solution: np.ndarray = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float)
        Q = np.asarray(self.Q, dtype=float)
        q = as_vector(self.q)
        n = q.shape[0]
        if P.shape != (n, n) or Q.shape != (n, n):
            raise ValueError("P and Q must be N x N with N = len(q)")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "q", q)
        for name in ("x0", "x1", "known_solution"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, as_vector(v))

    @property
    def N(self):
        return self.q.shape[0]

    def spectral_report(self):
        """Return ``(asymmetry, min eig of Q, max eig of Q - P)``."""
        Q, D = self.Q, self.Q - self.P
        asym = max(np.max(np.abs(Q - Q.T)), np.max(np.abs(D - D.T)))
        return (
            float(asym),
            float(np.linalg.eigvalsh((Q + Q.T) / 2)[0]),
            float(np.linalg.eigvalsh((D + D.T) / 2)[-1]),
        )

    def satisfies_invariants(self, tol=1e-8):
        asym, qmin, dmax = self.spectral_report()
        return asym <= tol and qmin >= -tol and dmax <= tol


def nash_cournot_eval(inst, x, y):
    """``<Px + Qy + q, y - x>``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != (inst.N,) or y.shape != (inst.N,):
        raise ValueError("dimension mismatch")
    return float((inst.P @ x + inst.Q @ y + inst.q) @ (y - x))


def nash_cournot_subgrad(inst, x, y):
    """Gradient in ``y``: ``Px + q + 2Qy - Qx`` (``Q`` symmetric)."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != (inst.N,) or y.shape != (inst.N,):
        raise ValueError("dimension mismatch")
    return inst.P @ x + inst.q + 2.0 * (inst.Q @ y) - inst.Q @ x


def nash_cournot_generate(N, seed):
    """Random instance with ``Q`` PSD and ``Q - P`` NSD, deterministic in ``seed``.

    ``Q = A^T A / N`` and ``P = Q + B^T B / N`` with ``A, B`` uniform on
    ``[-1, 1]``; ``q``, ``x0`` and ``x1`` are uniform on ``[-N, N]^N``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, (N, N))
    B = rng.uniform(-1.0, 1.0, (N, N))
    Q = A.T @ A / N
    P = Q + B.T @ B / N
    q = rng.uniform(-N, N, N)
    x0 = rng.uniform(-N, N, N)
    x1 = rng.uniform(-N, N, N)
    return NashCournotInstance(P, Q, q, seed=seed, x0=x0, x1=x1)


class NashCournotProblem(EquilibriumProblem):
    kind = "nash_cournot"
    prox_structure = QUADRATIC_IN_Y

    def __init__(self, inst):
        self.inst = inst
        self.feasible_set = Box.cube(inst.N, -NASH_COURNOT_BOUND, NASH_COURNOT_BOUND)
        a = 0.5 * float(np.linalg.norm(inst.P - inst.Q, 2))
        self.lipschitz_a1 = self.lipschitz_a2 = a
        self.curvature = spectral_norm_sym(inst.Q)
        self.known_solution = inst.known_solution

    @classmethod
    def generate(cls, N, seed):
        return cls(nash_cournot_generate(N, seed))

    def value(self, x, y):
        return nash_cournot_eval(self.inst, x, y)

    def subgradient(self, x, y):
        return nash_cournot_subgrad(self.inst, x, y)

    def linear_part(self, u):
        """``c`` such that ``F(u, y) = <Qy, y> + <c, y> + const``."""
        inst = self.inst
        return inst.P @ u + inst.q - inst.Q @ u

    def curvature_apply(self, y):
        return self.inst.Q @ y

    def initial_points(self):
        if self.inst.x0 is None or self.inst.x1 is None:
            raise ValueError("instance carries no starting points")
        return self.inst.x0, self.inst.x1

    def with_solution(self, sol):
        inst = self.inst
        return NashCournotProblem(
            NashCournotInstance(inst.P, inst.Q, inst.q, inst.seed, inst.x0, inst.x1, as_vector(sol))
        )

    def to_json(self):
        inst = self.inst
        out = {
            "kind": self.kind,
            "N": inst.N,
            "seed": inst.seed,
            "P": inst.P.tolist(),
            "Q": inst.Q.tolist(),
            "q": inst.q.tolist(),
        }
        for name in ("x0", "x1", "known_solution"):
            v = getattr(inst, name)
            if v is not None:
                out[name] = v.tolist()
        return out


def ball_ep_eval(x, y):
    """``(3 - ||x||) <x, y - x>``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError("dimension mismatch")
    return float((3.0 - norm(x)) * (x @ (y - x)))


def ball_ep_subgrad(x, y):
    """``(3 - ||x||) x``; independent of ``y``."""
    x = np.asarray(x, dtype=float)
    if y is not None and np.shape(y) != x.shape:
        raise ValueError("dimension mismatch")
    return (3.0 - norm(x)) * x


class BallProblem(EquilibriumProblem):
    """``F(x, y) = (3 - ||x||)<x, y - x>`` on the unit ball of truncated l2.

    Pseudomonotone but not monotone; the unique equilibrium is the origin.
    """

    kind = "ball_ep"
    prox_structure = LINEAR_IN_Y
    lipschitz_a1 = lipschitz_a2 = 2.5

    def __init__(self, dim=DEFAULT_L2_DIM, case=1):
        if case not in BALL_CASES:
            raise ValueError(f"case must be one of {sorted(BALL_CASES)}")
        self.case = case
        self.feasible_set = Ball.unit(dim)
        self.known_solution = np.zeros(dim)

    def value(self, x, y):
        return ball_ep_eval(*self._args(x, y))

    def subgradient(self, x, y):
        x, y = self._args(x, y)
        return ball_ep_subgrad(x, y)

    def initial_points(self):
        (a1, r1), (a0, r0) = BALL_CASES[self.case]
        return geometric_sequence(a0, r0, self.dim), geometric_sequence(a1, r1, self.dim)

    def to_json(self):
        return {"kind": self.kind, "dim": self.dim, "case": self.case}


def problem_from_json(obj):
    kind = obj.get("kind")
    if kind == "ball_ep":
        return BallProblem(int(obj.get("dim", DEFAULT_L2_DIM)), int(obj.get("case", 1)))
    if kind == "nash_cournot":
        if "P" not in obj:
            return NashCournotProblem.generate(int(obj["N"]), int(obj.get("seed", 0)))
        inst = NashCournotInstance(
            obj["P"], obj["Q"], obj["q"],
            seed=obj.get("seed"),
            x0=obj.get("x0"), x1=obj.get("x1"),
            known_solution=obj.get("known_solution"),
        )
        if "N" in obj and int(obj["N"]) != inst.N:
            raise ValueError(f"N={obj['N']} does not match matrix size {inst.N}")
        return NashCournotProblem(inst)
    raise ValueError(f"unknown problem kind {kind!r}")


@dataclass
class ValidationReport:
    samples: int
    max_abs_diagonal: float = 0.0
    pseudomonotone_violations: int = 0
    lipschitz_violations: int = 0
    # problem-specific structural checks, e.g. spectral invariants; name -> ok
    structural: dict = field(default_factory=dict)

    @property
    def passed(self):
        return (
            self.max_abs_diagonal <= 1e-10
            and self.pseudomonotone_violations == 0
            and self.lipschitz_violations == 0
            and all(self.structural.values())
        )

    def lines(self):
        out = [
            f"samples                    {self.samples}",
            f"max |F(x,x)|               {self.max_abs_diagonal:.3e}",
            f"pseudomonotone violations  {self.pseudomonotone_violations}",
            f"lipschitz-like violations  {self.lipschitz_violations}",
        ]
        out += [f"{k:<27}{'ok' if v else 'FAIL'}" for k, v in self.structural.items()]
        out.append("PASS" if self.passed else "FAIL")
        return out


def validate_assumptions(prob, samples=10000, seed=0, slack=1e-10):
    """Sample triples ``(x, y, w)`` from ``C`` and count assumption violations."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    C = prob.feasible_set
    X, Y, W = C.sample(rng, samples), C.sample(rng, samples), C.sample(rng, samples)
    a1, a2 = prob.lipschitz_a1, prob.lipschitz_a2
    rep = ValidationReport(samples)
    for x, y, w in zip(X, Y, W):
        rep.max_abs_diagonal = max(rep.max_abs_diagonal, abs(prob.value(x, x)))
        fxy, fyx = prob.value(x, y), prob.value(y, x)
        if (fxy >= 0 and fyx > slack) or (fyx >= 0 and fxy > slack):
            rep.pseudomonotone_violations += 1
        lhs = fxy + prob.value(y, w)
        rhs = prob.value(x, w) - a1 * float((x - y) @ (x - y)) - a2 * float((y - w) @ (y - w))
        if lhs < rhs - slack:
            rep.lipschitz_violations += 1
    if isinstance(prob, NashCournotProblem):
        asym, qmin, dmax = prob.inst.spectral_report()
        rep.structural["symmetric"] = asym <= 1e-8
        rep.structural["Q psd"] = qmin >= -1e-8
        rep.structural["Q-P nsd"] = dmax <= 1e-8
    rep.structural["lipschitz constants > 0"] = bool(a1 > 0 and a2 > 0)
    return rep
