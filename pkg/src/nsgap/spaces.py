"""Metric and normed space descriptors with snowflaking.

A MetricSpace is either a finite metric (dense distance matrix) or a normed
space on R^d given by an l_p exponent, a symmetric polytope unit ball, or a
positive-definite quadratic form.  All distances are reported through the
snowflake exponent theta in (0, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import (
    BadExponentRange,
    DimensionMismatch,
    LengthMismatch,
    UnsupportedSpace,
)

FINITE_N_CAP = 512
TRIANGLE_TOL = 1e-9


@dataclass(frozen=True)
class EllipsoidNorm:
    """Hilbertian norm sqrt(y^T Q y) for symmetric positive-definite Q."""

    Q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.Q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DimensionMismatch("Q must be square")
        if np.max(np.abs(q - q.T)) > 1e-12:
            raise DimensionMismatch("Q must be symmetric")
        if np.min(np.linalg.eigvalsh(q)) <= 0:
            raise DimensionMismatch("Q must be positive definite")
        object.__setattr__(self, "Q", q)
        q.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.Q.shape[0]

    def norm(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        return float(np.sqrt(y @ self.Q @ y))


@dataclass(frozen=True)
class MetricSpace:
    kind: str  # finite | lp_norm | polytope_norm | ellipsoid_norm
    theta: float = 1.0
    dist: Optional[np.ndarray] = None
    p: Optional[float] = None
    dim: Optional[int] = None
    vertices: Optional[np.ndarray] = None
    ellipsoid: Optional[EllipsoidNorm] = None
    _validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        if not (0.0 < self.theta <= 1.0):
            raise BadExponentRange(f"snowflake exponent must be in (0,1], got {self.theta}")
        if self.kind == "finite":
            d = np.asarray(self.dist, dtype=float)
            object.__setattr__(self, "dist", d)
            if self._validate:
                _validate_finite_metric(d)
            d.setflags(write=False)
        elif self.kind == "lp_norm":
            if self.p is None or self.p < 1.0:
                raise BadExponentRange("l_p norm requires p >= 1")
            if not self.dim or self.dim < 1:
                raise DimensionMismatch("l_p norm requires a positive dimension")
        elif self.kind == "polytope_norm":
            v = np.asarray(self.vertices, dtype=float)
            if v.ndim != 2:
                raise DimensionMismatch("polytope vertices must be an m-by-d array")
            # enforce origin symmetry by augmenting with negations
            v = _symmetrize_vertices(v)
            if np.linalg.matrix_rank(v) < v.shape[1]:
                raise DimensionMismatch("polytope vertices do not span R^d")
            object.__setattr__(self, "vertices", v)
            object.__setattr__(self, "dim", v.shape[1])
            v.setflags(write=False)
        elif self.kind == "ellipsoid_norm":
            if self.ellipsoid is None:
                raise DimensionMismatch("ellipsoid_norm requires an EllipsoidNorm")
            object.__setattr__(self, "dim", self.ellipsoid.dim)
        else:
            raise UnsupportedSpace(f"unknown space kind {self.kind!r}")

    # --- constructors -----------------------------------------------------

    @staticmethod
    def finite(dist, theta: float = 1.0, validate: bool = True) -> "MetricSpace":
        return MetricSpace(kind="finite", dist=np.asarray(dist, dtype=float),
                           theta=theta, _validate=validate)

    @staticmethod
    def lp(p: float, dim: int, theta: float = 1.0) -> "MetricSpace":
        return MetricSpace(kind="lp_norm", p=float(p), dim=int(dim), theta=theta)

    @staticmethod
    def polytope(vertices, theta: float = 1.0) -> "MetricSpace":
        return MetricSpace(kind="polytope_norm", vertices=np.asarray(vertices, dtype=float),
                           theta=theta)

    @staticmethod
    def ellipsoid_space(ellipsoid: EllipsoidNorm, theta: float = 1.0) -> "MetricSpace":
        return MetricSpace(kind="ellipsoid_norm", ellipsoid=ellipsoid, theta=theta)

    @property
    def is_normed(self) -> bool:
        return self.kind in ("lp_norm", "polytope_norm", "ellipsoid_norm")

    @property
    def n_points(self) -> int:
        if self.kind != "finite":
            raise UnsupportedSpace("n_points is defined for finite spaces only")
        return self.dist.shape[0]

    def gauge(self, y: np.ndarray) -> float:
        """Norm of a vector (no snowflaking)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "lp_norm":
            if y.shape[-1] != self.dim:
                raise DimensionMismatch("vector dimension mismatch")
            if np.isinf(self.p):
                return float(np.max(np.abs(y)))
            return float(np.sum(np.abs(y) ** self.p) ** (1.0 / self.p))
        if self.kind == "ellipsoid_norm":
            return self.ellipsoid.norm(y)
        if self.kind == "polytope_norm":
            return _polytope_gauge(self.vertices, y)
        raise UnsupportedSpace("gauge is defined for normed spaces only")

    def gauge_subgradient(self, y: np.ndarray) -> np.ndarray:
        """A subgradient of the norm at y (first-max tie-breaking for l_inf)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "lp_norm":
            if np.isinf(self.p):
                g = np.zeros_like(y)
                k = int(np.argmax(np.abs(y)))
                g[k] = np.sign(y[k]) if y[k] != 0 else 1.0
                return g
            if self.p == 1.0:
                return np.sign(y)
            norm = self.gauge(y)
            if norm == 0:
                return np.zeros_like(y)
            return np.sign(y) * np.abs(y) ** (self.p - 1.0) / norm ** (self.p - 1.0)
        if self.kind == "ellipsoid_norm":
            norm = self.gauge(y)
            if norm == 0:
                return np.zeros_like(y)
            return (self.ellipsoid.Q @ y) / norm
        if self.kind == "polytope_norm":
            # central differences; polytope dims are small by design
            g = np.zeros_like(y)
            h = 1e-6 * max(1.0, float(np.max(np.abs(y))))
            for i in range(y.size):
                e = np.zeros_like(y)
                e[i] = h
                g[i] = (self.gauge(y + e) - self.gauge(y - e)) / (2.0 * h)
            return g
        raise UnsupportedSpace("subgradient is defined for normed spaces only")


def _symmetrize_vertices(v: np.ndarray) -> np.ndarray:
    stacked = np.vstack([v, -v])
    # drop near-duplicates so the gauge LP stays small (order-preserving)
    uniq = []
    for row in stacked:
        if not any(np.allclose(row, u, atol=1e-12) for u in uniq):
            uniq.append(row)
    return np.array(uniq)


def _validate_finite_metric(d: np.ndarray) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionMismatch("distance matrix must be square")
    n = d.shape[0]
    if n > FINITE_N_CAP:
        raise DimensionMismatch(f"finite metrics capped at {FINITE_N_CAP} points")
    if np.max(np.abs(np.diag(d))) > 1e-12:
        raise DimensionMismatch("distance matrix must have a zero diagonal")
    if np.max(np.abs(d - d.T)) > 1e-12:
        raise DimensionMismatch("distance matrix must be symmetric")
    if np.min(d) < 0:
        raise DimensionMismatch("distances must be nonnegative")
    # O(n^3) triangle inequality via broadcasting
    through = np.min(d[:, :, None] + d[None, :, :], axis=1)
    if np.max(d - through) > TRIANGLE_TOL:
        raise DimensionMismatch("triangle inequality violated")


def _polytope_gauge(vertices: np.ndarray, y: np.ndarray) -> float:
    """Gauge of conv(vertices) at y: min sum(lam) s.t. V^T lam = y, lam >= 0."""
    y = np.asarray(y, dtype=float)
    if y.shape != (vertices.shape[1],):
        raise DimensionMismatch("vector dimension mismatch")
    if np.allclose(y, 0.0, atol=1e-300):
        return 0.0
    m = vertices.shape[0]
    res = linprog(
        c=np.ones(m),
        A_eq=vertices.T,
        b_eq=y,
        bounds=[(0, None)] * m,
        method="highs",
    )
    if not res.success:
        raise UnsupportedSpace("polytope gauge LP failed (point outside the span?)")
    return float(res.fun)


@dataclass(frozen=True)
class Configuration:
    """An n-tuple of points, one per chain state.

    For finite spaces `points` is an index vector; for normed spaces it is
    an n-by-d coordinate matrix.
    """

    space: MetricSpace
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points)
        if self.space.kind == "finite":
            pts = pts.astype(int)
            if pts.ndim != 1:
                raise LengthMismatch("finite configuration must be an index vector")
            if pts.min() < 0 or pts.max() >= self.space.n_points:
                raise LengthMismatch("configuration index out of range")
        else:
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            if self.space.dim is not None and pts.shape[1] != self.space.dim:
                raise DimensionMismatch("configuration dimension mismatch")
        object.__setattr__(self, "points", pts)
        pts.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def is_constant(self, tol: float = 0.0) -> bool:
        if self.space.kind == "finite":
            return bool(np.all(self.points == self.points[0]))
        return bool(np.max(np.abs(self.points - self.points[0])) <= tol)


def distance(space: MetricSpace, a, b) -> float:
    """Snowflaked distance between two points of the space."""
    return base_distance(space, a, b) ** space.theta


def base_distance(space: MetricSpace, a, b) -> float:
    if space.kind == "finite":
        return float(space.dist[int(a), int(b)])
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch("points have different dimensions")
    return space.gauge(a - b)


def config_distance_matrix(x: Configuration) -> np.ndarray:
    """Pairwise snowflaked distances of a configuration."""
    space = x.space
    if space.kind == "finite":
        base = space.dist[np.ix_(x.points, x.points)]
    else:
        pts = x.points
        n = pts.shape[0]
        if space.kind == "lp_norm" and not np.isinf(space.p):
            diff = np.abs(pts[:, None, :] - pts[None, :, :])
            base = np.sum(diff ** space.p, axis=2) ** (1.0 / space.p)
        elif space.kind == "lp_norm":
            base = np.max(np.abs(pts[:, None, :] - pts[None, :, :]), axis=2)
        elif space.kind == "ellipsoid_norm":
            diff = pts[:, None, :] - pts[None, :, :]
            base = np.sqrt(np.einsum("ijk,kl,ijl->ij", diff, space.ellipsoid.Q, diff))
        else:
            base = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    base[i, j] = base[j, i] = space.gauge(pts[i] - pts[j])
    return base ** space.theta


def cross_distance_matrix(x: Configuration, y: Configuration) -> np.ndarray:
    """Snowflaked distances d(x_i, y_j) between two configurations."""
    space = x.space
    if space.kind == "finite":
        base = space.dist[np.ix_(x.points, y.points)]
    else:
        n = x.n
        base = np.zeros((n, y.n))
        for i in range(n):
            for j in range(y.n):
                base[i, j] = space.gauge(x.points[i] - y.points[j])
    return base ** space.theta


def product_distance(pi, space: MetricSpace, p: float, x: Configuration, y: Configuration) -> float:
    """(sum_i pi_i d(x_i, y_i)^p)^{1/p}, the L_p(pi; M) metric."""
    pi = np.asarray(pi, dtype=float)
    if x.n != pi.size or y.n != pi.size:
        raise LengthMismatch("configurations must match the stationary vector length")
    if not np.isfinite(p) or p < 1.0:
        raise BadExponentRange("product metric requires finite p >= 1")
    if space.kind == "finite":
        per_state = space.dist[x.points, y.points] ** space.theta
    else:
        per_state = np.array(
            [distance(space, x.points[i], y.points[i]) for i in range(x.n)]
        )
    return float(np.sum(pi * per_state**p) ** (1.0 / p))


def modulus_check(space: MetricSpace, mode: str, exponent: float, constant: float,
                  trials: int = 1000, seed: int = 0) -> dict:
    """Sample random pairs and test the two-point smoothness/convexity
    inequality with the asserted constant.

    mode = "smooth":  (||x||^p + ||y||^p)/2 <= ||(x+y)/2||^p + S^p ||(x-y)/2||^p
    mode = "convex":  ||(x+y)/2||^q + (1/K^q) ||(x-y)/2||^q <= (||x||^q + ||y||^q)/2
    """
    if not space.is_normed:
        raise UnsupportedSpace("modulus checks require a normed space")
    if mode == "smooth":
        if not (1.0 <= exponent <= 2.0):
            raise BadExponentRange("smoothness exponent must be in [1, 2]")
    elif mode == "convex":
        if exponent < 2.0:
            raise BadExponentRange("convexity exponent must be in [2, inf)")
    else:
        raise BadExponentRange(f"unknown mode {mode!r}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    d = space.dim
    violations = 0
    worst = 0.0
    for _ in range(trials):
        x = rng.standard_normal(d)
        y = rng.standard_normal(d)
        nx, ny = space.gauge(x), space.gauge(y)
        mid = space.gauge((x + y) / 2.0)
        half = space.gauge((x - y) / 2.0)
        e = exponent
        if mode == "smooth":
            lhs = (nx**e + ny**e) / 2.0
            rhs = mid**e + constant**e * half**e
        else:
            lhs = mid**e + half**e / constant**e
            rhs = (nx**e + ny**e) / 2.0
        if rhs > 0:
            worst = max(worst, lhs / rhs)
        if lhs > rhs * (1.0 + 1e-9) + 1e-12:
            violations += 1
    return {"violations": violations, "worst_ratio": worst}


# --- I/O -------------------------------------------------------------------

def space_from_json(obj) -> MetricSpace:
    """{"kind":"finite","dist":[[...]]} | {"kind":"lp","p":2,"dim":4}
    | {"kind":"polytope","vertices":[[...]]}, each with optional "theta"."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    theta = float(obj.get("theta", 1.0))
    kind = obj["kind"]
    if kind == "finite":
        return MetricSpace.finite(obj["dist"], theta=theta)
    if kind == "lp":
        p = obj["p"]
        p = float("inf") if p in ("inf", "Infinity") else float(p)
        return MetricSpace.lp(p, int(obj["dim"]), theta=theta)
    if kind == "polytope":
        return MetricSpace.polytope(obj["vertices"], theta=theta)
    if kind == "ellipsoid":
        return MetricSpace.ellipsoid_space(EllipsoidNorm(np.array(obj["Q"], dtype=float)),
                                           theta=theta)
    raise UnsupportedSpace(f"unknown space kind {kind!r}")


def space_to_json(space: MetricSpace) -> dict:
    out = {"theta": space.theta}
    if space.kind == "finite":
        out.update(kind="finite", dist=space.dist.tolist())
    elif space.kind == "lp_norm":
        out.update(kind="lp", p="inf" if np.isinf(space.p) else space.p, dim=space.dim)
    elif space.kind == "polytope_norm":
        out.update(kind="polytope", vertices=space.vertices.tolist())
    else:
        out.update(kind="ellipsoid", Q=space.ellipsoid.Q.tolist())
    return out
