"""Nonlinear Rayleigh quotients and spectral-gap estimators.

For a configuration x of points in a metric space M and a pi-stationary
matrix A, the quotient is

    R(x; A, d^p) = sum_ij pi_i a_ij d(x_i,x_j)^p / sum_ij pi_i pi_j d(x_i,x_j)^p

and the nonlinear spectral gap gamma(A, d^p) is the supremum of 1/R over
nonconstant configurations.  The module provides an exact value for Hilbert
targets, exhaustive enumeration for small finite metrics, a multi-start
projected (sub)gradient heuristic for normed targets, plus the calculus
identities, the pointwise comparison estimate, the absolute-gap variant and
the Markov type ratio used to cross-check all of them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    BadExponentRange,
    ConstantConfiguration,
    DegenerateGap,
    InstanceTooLarge,
    LengthMismatch,
    MismatchedStationary,
    NormSandwichViolated,
    NotReversibleChain,
    UnsupportedSpace,
)
from .markov import StochasticChain, lazy_power, spectral_data
from .spaces import Configuration, EllipsoidNorm, MetricSpace, config_distance_matrix

P_MIN, P_MAX = 1.0, 8.0
ENUM_CAP = 10_000_000
ZERO_QUOTIENT = 1e-14


@dataclass(frozen=True)
class GapEstimate:
    value: float  # in (0, inf]
    kind: str  # exact_hilbert | brute_force | heuristic_lower_bound | upper_bound_thm4
    p: float
    witness: Optional[object] = None  # Configuration, or a pair for the absolute gap

    def to_json(self) -> dict:
        out = {
            "value": "inf" if math.isinf(self.value) else self.value,
            "kind": self.kind,
            "p": self.p,
        }
        if isinstance(self.witness, Configuration):
            out["witness"] = self.witness.points.tolist()
        elif isinstance(self.witness, tuple):
            out["witness"] = [c.points.tolist() for c in self.witness]
        return out


def _check_p(p: float) -> None:
    if not (P_MIN <= p <= P_MAX):
        raise BadExponentRange(f"metric power must lie in [{P_MIN}, {P_MAX}], got {p}")


def _quotient(A: np.ndarray, pi: np.ndarray, powered: np.ndarray) -> float:
    """R given the matrix of p-powered (snowflaked) pairwise distances."""
    num = float(np.sum(pi[:, None] * A * powered))
    den = float(np.sum(pi[:, None] * pi[None, :] * powered))
    if den <= 0.0:
        raise ConstantConfiguration("all configuration points coincide")
    return num / den


def rayleigh_quotient(x: Configuration, chain: StochasticChain, p: float) -> float:
    """Edge-weighted over pair-averaged p-powered distances of x."""
    _check_p(p)
    if x.n != chain.n:
        raise LengthMismatch("configuration length must equal the state count")
    powered = config_distance_matrix(x) ** p
    return _quotient(chain.A, chain.pi, powered)


def gamma_hilbert_exact(chain: StochasticChain) -> GapEstimate:
    """gamma(A, squared Euclidean) = 1/(1 - lambda_2), with the rescaled
    second eigenvector of the symmetrization as witness."""
    data = spectral_data(chain)
    witness_points = (data.eigenvectors[:, 1] / np.sqrt(chain.pi)).reshape(-1, 1)
    witness = Configuration(MetricSpace.lp(2.0, 1), witness_points)
    return GapEstimate(
        value=data.gamma_classical, kind="exact_hilbert", p=2.0, witness=witness
    )


# --- exhaustive enumeration over finite metrics -----------------------------

def _enum_configs(m: int, n: int) -> np.ndarray:
    return np.array(list(itertools.product(range(m), repeat=n)), dtype=int)


def gamma_bruteforce(chain: StochasticChain, space: MetricSpace, p: float) -> GapEstimate:
    """Exact gap by enumerating every configuration of a small finite metric."""
    _check_p(p)
    if space.kind != "finite":
        raise UnsupportedSpace("enumeration requires a finite metric")
    if not chain.reversible:
        raise NotReversibleChain("gap enumeration requires a reversible chain")
    m, n = space.n_points, chain.n
    if m > 8 or n > 6 or m**n > ENUM_CAP:
        raise InstanceTooLarge(f"enumeration size {m}^{n} exceeds the cap")
    powered = (space.dist**space.theta) ** p
    configs = _enum_configs(m, n)
    w = chain.pi[:, None] * chain.A
    u = np.outer(chain.pi, chain.pi)
    num = np.zeros(configs.shape[0])
    den = np.zeros(configs.shape[0])
    for i in range(n):
        for j in range(n):
            vals = powered[configs[:, i], configs[:, j]]
            num += w[i, j] * vals
            den += u[i, j] * vals
    live = den > 0
    scale = max(float(np.max(powered)), 1e-300)
    zero_num = live & (num <= ZERO_QUOTIENT * scale)
    if np.any(zero_num):
        k = int(np.argmax(zero_num))
        witness = Configuration(space, configs[k])
        return GapEstimate(value=float("inf"), kind="brute_force", p=p, witness=witness)
    ratios = np.where(live, den / np.where(live, num, 1.0), -np.inf)
    k = int(np.argmax(ratios))
    witness = Configuration(space, configs[k])
    return GapEstimate(value=float(ratios[k]), kind="brute_force", p=p, witness=witness)


def gamma_plus_bruteforce(chain: StochasticChain, space: MetricSpace, q: float) -> GapEstimate:
    """Exact absolute gap: sup over pairs (x, y) of
    sum pi_i pi_j d(x_i,y_j)^q / sum pi_i a_ij d(x_i,y_j)^q."""
    _check_p(q)
    if space.kind != "finite":
        raise UnsupportedSpace("enumeration requires a finite metric")
    if not chain.reversible:
        raise NotReversibleChain("absolute gap enumeration requires a reversible chain")
    m, n = space.n_points, chain.n
    if m > 8 or n > 6 or m ** (2 * n) > ENUM_CAP:
        raise InstanceTooLarge(f"pair enumeration size {m}^{2 * n} exceeds the cap")
    powered = (space.dist**space.theta) ** q
    configs = _enum_configs(m, n)
    K = configs.shape[0]
    w = chain.pi[:, None] * chain.A
    u = np.outer(chain.pi, chain.pi)
    num = np.zeros((K, K))
    den = np.zeros((K, K))
    for i in range(n):
        for j in range(n):
            vals = powered[configs[:, i][:, None], configs[None, :, j]]
            num += w[i, j] * vals
            den += u[i, j] * vals
    live = den > 0
    scale = max(float(np.max(powered)), 1e-300)
    zero_num = live & (num <= ZERO_QUOTIENT * scale)
    if np.any(zero_num):
        a, b = np.unravel_index(int(np.argmax(zero_num)), num.shape)
        witness = (Configuration(space, configs[a]), Configuration(space, configs[b]))
        return GapEstimate(value=float("inf"), kind="brute_force", p=q, witness=witness)
    ratios = np.where(live, den / np.where(live, num, 1.0), -np.inf)
    a, b = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    witness = (Configuration(space, configs[a]), Configuration(space, configs[b]))
    return GapEstimate(value=float(ratios[a, b]), kind="brute_force", p=q, witness=witness)


def abs_gap_sandwich_check(chain: StochasticChain, space: MetricSpace, q: float) -> dict:
    """2 gamma(A, d^q) <= gamma_plus((A+Id)/2, d^q) <= 2^{2q+1} gamma(A, d^q),
    both sides by exhaustive enumeration."""
    g = gamma_bruteforce(chain, space, q).value
    gp = gamma_plus_bruteforce(lazy_power(chain, 1), space, q).value
    if math.isinf(g) and math.isinf(gp):
        return {"gamma": g, "gamma_plus_lazy": gp, "lower_ok": True, "upper_ok": True,
                "vacuous": True}
    lower_ok = 2.0 * g <= gp * (1.0 + 1e-9) + 1e-12
    upper_ok = gp <= 2.0 ** (2.0 * q + 1.0) * g * (1.0 + 1e-9) + 1e-12
    return {"gamma": g, "gamma_plus_lazy": gp, "lower_ok": bool(lower_ok),
            "upper_ok": bool(upper_ok), "vacuous": False}


# --- calculus of quotients ---------------------------------------------------

def rayleigh_calculus_check(x: Configuration, chainA: StochasticChain,
                            chainB: StochasticChain, lam: float, t: int,
                            p: float) -> dict:
    """Evaluate the four quotient identities for a fixed configuration:
    affinity in the matrix argument, dilution by the identity, the 1/p-power
    triangle inequality for products, and the power bound R(B^t) <= t^p R(B).
    Returns the signed slacks (nonnegative means the property holds)."""
    _check_p(p)
    if not (0.0 <= lam <= 1.0):
        raise BadExponentRange("mixing weight must lie in [0, 1]")
    if not isinstance(t, (int, np.integer)) or t < 1:
        raise BadExponentRange("power t must be a positive integer")
    if np.max(np.abs(chainA.pi - chainB.pi)) > 1e-12:
        raise MismatchedStationary("chains must share a stationary vector")
    pi = chainA.pi
    powered = config_distance_matrix(x) ** p
    A, B = chainA.A, chainB.A
    eye = np.eye(chainA.n)
    rA = _quotient(A, pi, powered)
    rB = _quotient(B, pi, powered)
    r_mix = _quotient(lam * A + (1.0 - lam) * B, pi, powered)
    r_dilute = _quotient(lam * A + (1.0 - lam) * eye, pi, powered)
    r_prod = _quotient(A @ B, pi, powered)
    r_power = _quotient(np.linalg.matrix_power(B, int(t)), pi, powered)
    return {
        "R_A": rA,
        "R_B": rB,
        "affinity_slack": abs(r_mix - (lam * rA + (1.0 - lam) * rB)),
        "dilution_slack": abs(r_dilute - lam * rA),
        "product_slack": rA ** (1.0 / p) + rB ** (1.0 / p) - r_prod ** (1.0 / p),
        "power_slack": float(t) ** p * rB - r_power,
    }


def markov_type_ratio(chain: StochasticChain, x: Configuration, t: int,
                      p: float = 2.0) -> dict:
    """ratio = R(x; A^t, sq. dist.) / (t R(x; A, sq. dist.)); for Hilbert
    configurations with p = 2 the ratio never exceeds 1 (Markov type 2 with
    constant 1)."""
    if not isinstance(t, (int, np.integer)) or t < 1:
        raise BadExponentRange("power t must be a positive integer")
    _check_p(p)
    space = x.space
    hilbert = (space.kind == "lp_norm" and space.p == 2.0 and space.theta == 1.0) or (
        space.kind == "ellipsoid_norm" and space.theta == 1.0
    )
    if not hilbert:
        raise UnsupportedSpace("Markov type ratio is asserted for Hilbert configurations")
    powered = config_distance_matrix(x) ** p
    r1 = _quotient(chain.A, chain.pi, powered)
    rt = _quotient(np.linalg.matrix_power(chain.A, int(t)), chain.pi, powered)
    if r1 <= ZERO_QUOTIENT:
        ratio = 1.0 if rt <= ZERO_QUOTIENT else float("inf")
    else:
        ratio = rt / (float(t) * r1)
    return {"ratio": ratio, "bound_holds": bool(p == 2.0 and ratio <= 1.0 + 1e-9)}


def pointwise_estimate_check(x: Configuration, chainB: StochasticChain,
                             spaceX: MetricSpace, H: EllipsoidNorm,
                             D: float, eta: float,
                             sandwich_trials: int = 1000,
                             sandwich_seed: int = 0) -> dict:
    """If R(x; B^2, squared H-norm) >= 1 - eta^2 then
    R(x; B, squared X-norm) >= (1 - eta D)^2 / 4, provided the norms satisfy
    ||y||_H <= ||y||_X <= D ||y||_H.  The sandwich is spot-checked by sampling
    before the implication is evaluated."""
    if D < 1.0:
        raise BadExponentRange("comparison factor D must be >= 1")
    if not (0.0 < eta < 1.0 / D):
        raise BadExponentRange("eta must lie in (0, 1/D)")
    if not spaceX.is_normed:
        raise UnsupportedSpace("the comparison requires a normed space")
    if not chainB.reversible:
        raise NotReversibleChain("the pointwise estimate requires a reversible chain")
    d = spaceX.dim
    rng = np.random.default_rng(np.random.SeedSequence(sandwich_seed))
    for _ in range(sandwich_trials):
        u = rng.standard_normal(d)
        nh, nx = H.norm(u), spaceX.gauge(u)
        if nh > nx * (1.0 + 1e-9) + 1e-12 or nx > D * nh * (1.0 + 1e-9) + 1e-12:
            raise NormSandwichViolated(
                f"sampled direction breaks the sandwich: H={nh:.6g}, X={nx:.6g}, D={D}"
            )
    pts = np.asarray(x.points, dtype=float)
    n = pts.shape[0]
    diff = pts[:, None, :] - pts[None, :, :]
    sq_h = np.einsum("ijk,kl,ijl->ij", diff, H.Q, diff)
    b2 = chainB.A @ chainB.A
    r_h = _quotient(b2, chainB.pi, sq_h)
    premise = r_h >= 1.0 - eta**2 - 1e-12
    sq_x = config_distance_matrix(Configuration(spaceX, pts)) ** 2
    r_x = _quotient(chainB.A, chainB.pi, sq_x)
    bound = (1.0 - eta * D) ** 2 / 4.0
    if not premise:
        status = "vacuous"
    elif r_x >= bound - 1e-12:
        status = "holds"
    else:
        status = "fails"
    return {"premise": bool(premise), "premise_value": r_h,
            "conclusion_value": r_x, "bound": bound, "vacuous_or_holds": status}


# --- heuristic maximizer over normed targets ---------------------------------

def _pair_geometry(space: MetricSpace, pts: np.ndarray):
    """Pairwise norms of differences and norm subgradients (wrt the first
    point of each pair).  Shapes (n, n) and (n, n, d)."""
    diff = pts[:, None, :] - pts[None, :, :]
    n, _, d = diff.shape
    if space.kind == "lp_norm" and space.p == 2.0:
        norms = np.sqrt(np.sum(diff**2, axis=2))
        safe = np.where(norms > 0, norms, 1.0)
        grads = diff / safe[:, :, None]
    elif space.kind == "lp_norm" and np.isinf(space.p):
        norms = np.max(np.abs(diff), axis=2)
        grads = np.zeros_like(diff)
        top = np.argmax(np.abs(diff), axis=2)
        ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        vals = diff[ii, jj, top]
        grads[ii, jj, top] = np.where(vals != 0, np.sign(vals), 1.0)
    elif space.kind == "lp_norm" and space.p == 1.0:
        norms = np.sum(np.abs(diff), axis=2)
        grads = np.sign(diff)
    elif space.kind == "lp_norm":
        q = space.p
        norms = np.sum(np.abs(diff) ** q, axis=2) ** (1.0 / q)
        safe = np.where(norms > 0, norms, 1.0)
        grads = np.sign(diff) * (np.abs(diff) / safe[:, :, None]) ** (q - 1.0)
    elif space.kind == "ellipsoid_norm":
        qmat = space.ellipsoid.Q
        norms = np.sqrt(np.einsum("ijk,kl,ijl->ij", diff, qmat, diff))
        safe = np.where(norms > 0, norms, 1.0)
        grads = np.einsum("ijk,kl->ijl", diff, qmat) / safe[:, :, None]
    else:
        norms = np.zeros((n, n))
        grads = np.zeros_like(diff)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                norms[i, j] = space.gauge(diff[i, j])
                grads[i, j] = space.gauge_subgradient(diff[i, j])
    np.fill_diagonal(norms, 0.0)
    return norms, grads


def gamma_heuristic(chain: StochasticChain, space: MetricSpace, p: float,
                    restarts: int = 32, iters: int = 500, seed: int = 0) -> GapEstimate:
    """Lower bound on the gap by multi-start projected subgradient descent on
    the Rayleigh quotient over configurations in a normed space.

    The first start is the rescaled second eigenvector of the symmetrization
    placed on the first coordinate axis; for a Euclidean target with p = 2
    this start is already optimal, so the exact reciprocal gap is recovered.
    Remaining starts are Gaussian.  Deterministic given the seed.
    """
    _check_p(p)
    if not space.is_normed:
        raise UnsupportedSpace("the heuristic requires a normed space")
    if restarts < 1 or iters < 1:
        raise BadExponentRange("restarts and iters must be positive")
    data = spectral_data(chain)
    n, d = chain.n, space.dim
    e = space.theta * p
    w = chain.pi[:, None] * chain.A
    u = np.outer(chain.pi, chain.pi)
    wsym = w + w.T
    usym = 2.0 * u
    rng = np.random.default_rng(np.random.SeedSequence(seed))

    def evaluate(pts):
        norms, grads = _pair_geometry(space, pts)
        powered = norms**e
        num = float(np.sum(w * powered))
        den = float(np.sum(u * powered))
        if den <= 1e-300:
            return None
        r = num / den
        safe = np.where(norms > 1e-12, norms, 1.0)
        factor = e * np.where(norms > 1e-12, safe ** (e - 1.0), 0.0)
        grad_num = np.einsum("ij,ijk->ik", wsym * factor, grads)
        grad_den = np.einsum("ij,ijk->ik", usym * factor, grads)
        return r, (grad_num - r * grad_den) / den, den

    best_r, best_pts = float("inf"), None
    eig_pts = np.zeros((n, d))
    eig_pts[:, 0] = data.eigenvectors[:, 1] / np.sqrt(chain.pi)
    starts = [eig_pts] + [rng.standard_normal((n, d)) for _ in range(restarts - 1)]
    for pts in starts:
        pts = pts.astype(float).copy()
        stale = 0
        for it in range(iters):
            out = evaluate(pts)
            if out is None:
                break
            r, grad, den = out
            if r < best_r - 1e-15:
                best_r, best_pts = r, pts.copy()
                stale = 0
            else:
                stale += 1
                if stale > 50:
                    break
            pts = pts - (0.1 / math.sqrt(it + 1.0)) * grad
            # renormalize so the quotient denominator stays at 1
            pts = pts / max(den, 1e-300) ** (1.0 / e)
    if best_pts is None:
        raise ConstantConfiguration("all starts degenerated to constant configurations")
    witness = Configuration(space, best_pts)
    value = float("inf") if best_r < ZERO_QUOTIENT else 1.0 / best_r
    return GapEstimate(value=value, kind="heuristic_lower_bound", p=p, witness=witness)


# --- analytic bound pipeline -------------------------------------------------

def tstar(lambda2: float, D_X: float) -> int:
    """ceil(log(2 D_X) / log(2/(1 + lambda2))); the power of the lazy walk
    needed to shrink the mean-zero norm below 1/(2 D_X)."""
    if D_X < 1.0:
        raise BadExponentRange("D_X must be >= 1")
    if lambda2 >= 1.0 - 1e-12:
        raise DegenerateGap("lambda_2 too close to 1")
    if lambda2 <= -1.0 + 1e-300:
        return 1  # denominator log diverges, the ratio vanishes
    ratio = math.log(2.0 * D_X) / math.log(2.0 / (1.0 + lambda2))
    return max(1, math.ceil(ratio - 1e-12))


def theorem4_upper_bound(chain: StochasticChain, D_X: float, C: float) -> float:
    """C log(D_X + 1) / (1 - lambda_2): the analytic upper bound on the gap
    over a normed space at Hilbertian distance D_X.  C is a calibration
    input fitted empirically, never a built-in constant."""
    if D_X < 1.0:
        raise BadExponentRange("D_X must be >= 1")
    if C <= 0:
        raise BadExponentRange("calibration constant must be positive")
    data = spectral_data(chain)
    if data.lambda2 >= 1.0 - 1e-12:
        raise DegenerateGap("lambda_2 too close to 1")
    return C * math.log(D_X + 1.0) / (1.0 - data.lambda2)
