"""Dense vector helpers and the three feasible-set geometries used by the solvers.

Points of the Hilbert space are plain 1-D float ``numpy`` arrays; elements of
``l2`` are truncated to a fixed number of coordinates.
"""

from dataclasses import dataclass

import numpy as np


class DimensionError(ValueError):
    """Raised when two vectors (or a vector and a set) disagree in dimension."""


def as_vector(x):
    """Return ``x`` as a 1-D float array, rejecting NaN/Inf entries."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("vector must have at least one coordinate")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite coordinates")
    return v


def _check_dims(x, y):
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def inner(x, y):
    """Euclidean inner product."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_dims(x, y)
    return float(x @ y)


def norm(x):
    """Euclidean norm, ``sqrt(inner(x, x))``."""
    x = np.asarray(x, dtype=float)
    return float(np.sqrt(x @ x))


def geometric_sequence(first, ratio, dim):
    """First ``dim`` terms of ``first * ratio**k``, used for l2 starting points."""
    return first * ratio ** np.arange(dim, dtype=float)


@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_vector(self.lo), as_vector(self.hi)
        _check_dims(lo, hi)
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, dim, lo, hi):
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)))

    @property
    def dim(self):
        return self.lo.shape[0]

    def contains(self, x, slack=1e-12):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - slack) and np.all(x <= self.hi + slack))

    def sample(self, rng, size=None):
        shape = (self.dim,) if size is None else (size, self.dim)
        return rng.uniform(self.lo, self.hi, shape)

    def to_json(self):
        return {"box": {"lo": self.lo.tolist(), "hi": self.hi.tolist()}}


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius >= 0:
            raise ValueError("ball radius must be nonnegative")
        object.__setattr__(self, "radius", float(self.radius))

    @classmethod
    def unit(cls, dim):
        return cls(np.zeros(dim), 1.0)

    @property
    def dim(self):
        return self.center.shape[0]

    def contains(self, x, slack=1e-12):
        return norm(np.asarray(x, dtype=float) - self.center) <= self.radius * (1 + slack) + slack

    def sample(self, rng, size=None):
        """Uniform samples from the ball (direction times ``U**(1/d)`` radius)."""
        n = 1 if size is None else size
        d = rng.standard_normal((n, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.uniform(0.0, 1.0, (n, 1)) ** (1.0 / self.dim)
        pts = self.center + r * d
        return pts[0] if size is None else pts

    def to_json(self):
        return {"ball": {"center": self.center.tolist(), "radius": self.radius}}


@dataclass(frozen=True)
class HalfSpace:
    """The set ``{x : <normal, x - anchor> <= 0}``; a zero normal is the whole space."""

    normal: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        a, p = as_vector(self.normal), as_vector(self.anchor)
        _check_dims(a, p)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "anchor", p)

    @property
    def dim(self):
        return self.normal.shape[0]

    def contains(self, x, slack=1e-12):
        x = np.asarray(x, dtype=float)
        return float(self.normal @ (x - self.anchor)) <= slack * max(1.0, norm(self.normal) * norm(x))

    def to_json(self):
        return {"halfspace": {"normal": self.normal.tolist(), "anchor": self.anchor.tolist()}}


def project(s, x):
    """Euclidean projection of ``x`` onto a :class:`Box`, :class:`Ball` or :class:`HalfSpace`."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.dim,):
        raise DimensionError(f"dimension mismatch: set has {s.dim}, point has {x.shape}")
    if isinstance(s, Box):
        return np.clip(x, s.lo, s.hi)
    if isinstance(s, Ball):
        d = x - s.center
        r = norm(d)
        if r <= s.radius:
            return x.copy()
        return s.center + d * (s.radius / r)
    if isinstance(s, HalfSpace):
        a = s.normal
        aa = float(a @ a)
        viol = float(a @ (x - s.anchor))
        if aa == 0.0 or viol <= 0.0:
            return x.copy()
        return x - (viol / aa) * a
    raise TypeError(f"cannot project onto {type(s).__name__}")


def set_from_json(obj):
    """Inverse of the ``to_json`` methods."""
    if "box" in obj:
        return Box(obj["box"]["lo"], obj["box"]["hi"])
    if "ball" in obj:
        return Ball(obj["ball"]["center"], obj["ball"]["radius"])
    if "halfspace" in obj:
        return HalfSpace(obj["halfspace"]["normal"], obj["halfspace"]["anchor"])
    raise ValueError(f"unknown set tag in {sorted(obj)}")
