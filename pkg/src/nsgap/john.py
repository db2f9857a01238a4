"""Minimum-volume enclosing ellipsoids and Hilbertian norm sandwiches.

For an origin-symmetric convex body given by vertices, the MVEE yields a
Hilbertian norm H with ||y||_H <= ||y||_X <= D_X ||y||_H and D_X <= sqrt(d).
The ellipsoid is computed by Khachiyan's barycentric coordinate ascent in
its symmetric form (ellipsoids centered at the origin).
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import DegenerateSpan, DimensionMismatch, NoConvergence, UnsupportedSpace
from .spaces import EllipsoidNorm, MetricSpace

KHACHIYAN_CAP = 100_000
MVEE_TOL = 1e-7


def hypercube_vertices(d: int) -> np.ndarray:
    """All 2^d sign vectors, the vertices of the l_inf unit ball."""
    return np.array(list(itertools.product((-1.0, 1.0), repeat=d)))


def crosspolytope_vertices(d: int) -> np.ndarray:
    """The 2d signed basis vectors, the vertices of the l_1 unit ball."""
    eye = np.eye(d)
    return np.vstack([eye, -eye])


def mvee(points, tol: float = MVEE_TOL, max_iters: int = KHACHIYAN_CAP) -> EllipsoidNorm:
    """Minimum-volume origin-centered ellipsoid containing the given points
    and their negations.

    Barycentric ascent with away steps: with M(u) = sum_i u_i p_i p_i^T,
    either shift weight toward the point maximizing p^T M(u)^{-1} p or shift
    it away from the supported point minimizing it, whichever deviates more
    from d, until the maximum is within (1 + tol) of the dimension d.  The
    ellipsoid is {y : y^T Q y <= 1} with Q = M^{-1}/d, rescaled so the
    farthest point sits exactly on the boundary.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    pts = np.vstack([pts, -pts])
    m, d = pts.shape
    if m < d + 1:
        raise DegenerateSpan("need at least d + 1 points")
    if np.linalg.matrix_rank(pts) < d:
        raise DegenerateSpan("points do not span the ambient space")
    u = np.full(m, 1.0 / m)
    converged = False
    for _ in range(max_iters):
        M = pts.T @ (u[:, None] * pts)
        inv = np.linalg.inv(M)
        levels = np.einsum("ij,jk,ik->i", pts, inv, pts)
        j_plus = int(np.argmax(levels))
        top = levels[j_plus]
        if top <= d * (1.0 + tol):
            converged = True
            break
        low = np.where(u > 0, levels, np.inf)
        j_minus = int(np.argmin(low))
        bottom = low[j_minus]
        if top - d >= d - bottom:
            j = j_plus
            beta = (top - d) / (d * (top - 1.0))
        else:
            j = j_minus
            if bottom <= 1.0 or u[j] >= 1.0:
                beta = -u[j] / max(1.0 - u[j], 1e-300)
            else:
                beta = max((bottom - d) / (d * (bottom - 1.0)),
                           -u[j] / (1.0 - u[j]))
        u = (1.0 - beta) * u
        u[j] += beta
        u = np.maximum(u, 0.0)
    if not converged:
        raise NoConvergence(f"Khachiyan ascent exhausted {max_iters} iterations")
    Q = np.linalg.inv(pts.T @ (u[:, None] * pts)) / d
    Q = (Q + Q.T) / 2.0
    # push the boundary out to the farthest point so containment is exact
    worst = float(np.max(np.einsum("ij,jk,ik->i", pts, Q, pts)))
    if worst > 1.0:
        Q = Q / worst
    return EllipsoidNorm(Q)


def _facet_normals(space: MetricSpace) -> np.ndarray:
    """Outer normals z of the unit-ball facets, scaled so the facet is
    {x : <z, x> = 1}.  The norm is then max_z <z, y> over the normals."""
    if space.kind == "lp_norm" and np.isinf(space.p):
        return crosspolytope_vertices(space.dim)
    if space.kind == "lp_norm" and space.p == 1.0:
        return hypercube_vertices(space.dim)
    if space.kind == "polytope_norm":
        from scipy.spatial import ConvexHull

        hull = ConvexHull(space.vertices)
        eqs = hull.equations  # rows [a, b] with a.x + b <= 0 inside
        normals = []
        for row in eqs:
            a, b = row[:-1], row[-1]
            if b >= -1e-12:
                raise DegenerateSpan("unit ball does not contain the origin")
            normals.append(a / (-b))
        return np.array(normals)
    raise UnsupportedSpace("facet description unavailable for this space")


def hilbert_distance(space: MetricSpace, tol: float = MVEE_TOL,
                     sample_count: int = 1000, seed: int = 0) -> dict:
    """Hilbertian norm H and factor D_X with ||y||_H <= ||y||_X <= D_X ||y||_H.

    The H-ball is the MVEE of the unit ball of X, which guarantees the lower
    sandwich; D_X is the exact maximum of ||y||_X over the H-sphere, taken
    over facet normals when a facet description exists and over sampled
    directions otherwise (the sampling slack is reported).  For polytopal
    balls in dimension d, D_X <= sqrt(d).
    """
    if not space.is_normed:
        raise UnsupportedSpace("the Hilbertian sandwich requires a normed space")
    d = space.dim
    approximate = False
    if space.kind == "ellipsoid_norm":
        return {"D_X": 1.0, "H": space.ellipsoid, "approximate": False}
    if space.kind == "lp_norm" and space.p == 2.0:
        return {"D_X": 1.0, "H": EllipsoidNorm(np.eye(d)), "approximate": False}
    if space.kind == "lp_norm" and np.isinf(space.p):
        if d > 12:
            raise DimensionMismatch("cube vertex enumeration capped at d = 12")
        verts = hypercube_vertices(d)
    elif space.kind == "lp_norm" and space.p == 1.0:
        verts = crosspolytope_vertices(d)
    elif space.kind == "lp_norm":
        # no finite vertex description: sample the unit sphere of the norm
        approximate = True
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        dirs = rng.standard_normal((max(sample_count, 50 * d), d))
        norms = np.sum(np.abs(dirs) ** space.p, axis=1) ** (1.0 / space.p)
        verts = dirs / norms[:, None]
    else:
        verts = space.vertices
    ell = mvee(verts, tol=tol)
    inv = np.linalg.inv(ell.Q)
    if approximate:
        # directional estimate of the upper factor on fresh samples
        rng = np.random.default_rng(np.random.SeedSequence(seed + 1))
        dirs = rng.standard_normal((sample_count, d))
        hs = np.sqrt(np.einsum("ij,jk,ik->i", dirs, ell.Q, dirs))
        xs = np.array([space.gauge(u) for u in dirs])
        ratios = xs / hs
        dx = float(np.max(ratios))
        lower_violation = float(max(0.0, np.max(hs / xs) - 1.0))
        if lower_violation > 0:
            # enlarge the ellipsoid so the sampled lower sandwich holds
            ell = EllipsoidNorm(ell.Q / (1.0 + lower_violation) ** 2)
            dx *= 1.0 + lower_violation
        return {"D_X": dx, "H": ell, "approximate": True,
                "sampling_slack": lower_violation}
    normals = _facet_normals(space)
    dx = float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", normals, inv, normals))))
    return {"D_X": max(dx, 1.0), "H": ell, "approximate": False}
