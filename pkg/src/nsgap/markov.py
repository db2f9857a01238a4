"""Reversible stochastic matrices: construction, validation and spectra.

A chain bundles a row-stochastic matrix A, a strictly positive stationary
vector pi and a detailed-balance certificate.  All spectral quantities are
computed on the symmetrization D^{1/2} A D^{-1/2} (D = diag(pi)), which
shares the eigenvalues of A when the chain is reversible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidPower,
    NoPositiveStationary,
    NotReversibleChain,
    NotStochastic,
    UnsupportedSpace,
)
from .jacobi import jacobi_eigh

ROW_SUM_TOL = 1e-9
DETAILED_BALANCE_TOL = 1e-12
STATIONARY_FLOOR = 1e-12
SPECTRAL_N_CAP = 4096


@dataclass(frozen=True)
class StochasticChain:
    n: int
    A: np.ndarray
    pi: np.ndarray
    reversible: bool

    def __post_init__(self):
        self.A.setflags(write=False)
        self.pi.setflags(write=False)

    def lazy(self) -> "StochasticChain":
        return lazy_power(self, 1)


@dataclass(frozen=True)
class SpectralData:
    eigenvalues: np.ndarray
    lambda2: float
    gamma_classical: float
    meanzero_norm: float
    eigenvectors: np.ndarray = field(repr=False, default=None)


def _stationary_vector(A: np.ndarray) -> np.ndarray:
    """Solve pi A = pi, sum(pi) = 1 by a direct linear solve.

    Falls back to power iteration on the lazy chain when the linear system
    is rank-deficient beyond the expected single null direction.
    """
    n = A.shape[0]
    system = np.vstack([A.T - np.eye(n), np.ones((1, n))])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.min(pi) > 0 and abs(pi.sum() - 1.0) < 1e-9 and np.allclose(pi @ A, pi, atol=1e-9):
        return pi
    # power iteration fallback; laziness removes periodicity
    lazy = (A + np.eye(n)) / 2.0
    pi = np.full(n, 1.0 / n)
    for _ in range(200_000):
        nxt = pi @ lazy
        if np.linalg.norm(nxt - pi, 1) < 1e-15:
            pi = nxt
            break
        pi = nxt
    return pi / pi.sum()


def build_reversible_chain(A, pi=None) -> StochasticChain:
    """Validate a row-stochastic matrix and certify detailed balance.

    Non-reversibility is not an error: the flag is recorded and operations
    that need it reject later.  A reducible chain (no strictly positive
    stationary vector) raises NoPositiveStationary.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotStochastic("transition matrix must be square")
    n = A.shape[0]
    if np.min(A) < -ROW_SUM_TOL:
        raise NotStochastic("transition matrix has negative entries")
    row_err = np.max(np.abs(A.sum(axis=1) - 1.0))
    if row_err > ROW_SUM_TOL:
        raise NotStochastic(f"row sums deviate from 1 by {row_err:.3e}")
    if pi is None:
        pi = _stationary_vector(A)
    else:
        pi = np.array(pi, dtype=float)
        if pi.shape != (n,):
            raise NoPositiveStationary("pi has wrong length")
        if abs(pi.sum() - 1.0) > 1e-9:
            raise NoPositiveStationary("pi must sum to 1")
        if not np.allclose(pi @ A, pi, atol=1e-9):
            raise NoPositiveStationary("pi is not stationary for A")
    if np.min(pi) <= STATIONARY_FLOOR:
        raise NoPositiveStationary(
            "stationary vector has a (near-)zero entry (chain reducible?)"
        )
    flow = pi[:, None] * A
    reversible = bool(np.max(np.abs(flow - flow.T)) <= DETAILED_BALANCE_TOL)
    return StochasticChain(n=n, A=A, pi=pi, reversible=reversible)


def symmetrization(chain: StochasticChain) -> np.ndarray:
    """D^{1/2} A D^{-1/2}, symmetrized to kill floating-point asymmetry."""
    root = np.sqrt(chain.pi)
    s = (root[:, None] * chain.A) / root[None, :]
    return (s + s.T) / 2.0


def spectral_data(chain: StochasticChain) -> SpectralData:
    if not chain.reversible:
        raise NotReversibleChain("spectral data requires a reversible chain")
    if chain.n > SPECTRAL_N_CAP:
        raise UnsupportedSpace(f"spectral ops capped at n = {SPECTRAL_N_CAP}")
    if chain.n < 2:
        raise NotStochastic("spectral data needs at least two states")
    eigenvalues, vectors = jacobi_eigh(symmetrization(chain))
    lambda2 = float(eigenvalues[1])
    if lambda2 >= 1.0 - 1e-12:
        gamma = float("inf")
    else:
        gamma = 1.0 / (1.0 - lambda2)
    meanzero = float(max(abs(eigenvalues[1]), abs(eigenvalues[-1])))
    return SpectralData(
        eigenvalues=eigenvalues,
        lambda2=lambda2,
        gamma_classical=gamma,
        meanzero_norm=meanzero,
        eigenvectors=vectors,
    )


def lazy_power(chain: StochasticChain, t: int) -> StochasticChain:
    """((A + Id)/2)^t with the same stationary vector."""
    if not isinstance(t, (int, np.integer)) or t < 1:
        raise InvalidPower(f"power must be a positive integer, got {t!r}")
    lazy = (chain.A + np.eye(chain.n)) / 2.0
    powered = np.linalg.matrix_power(lazy, int(t))
    flow = chain.pi[:, None] * powered
    reversible = bool(np.max(np.abs(flow - flow.T)) <= 1e-11)
    return StochasticChain(n=chain.n, A=powered, pi=chain.pi, reversible=reversible)


def gamma_plus_hilbert(chain: StochasticChain) -> float:
    """Classical absolute gap 1/(1 - max_{i>=2} |lambda_i|)."""
    mu = spectral_data(chain).meanzero_norm
    if mu >= 1.0 - 1e-12:
        return float("inf")
    return 1.0 / (1.0 - mu)


def meanzero_opnorm_bound_check(chain: StochasticChain, q: float = 2.0, K: float = 1.0) -> dict:
    """Check the operator-norm bound on the mean-zero subspace for a
    Hilbert target: ||A||_{mean-zero} <= (1 - 1/((2^{q-1}-1) K^q gamma_plus))^{1/q}.

    Only the Hilbert instantiation (q = 2) is supported; general uniformly
    convex targets are out of scope.
    """
    if q != 2.0:
        raise UnsupportedSpace("only the Hilbert instantiation q = 2 is supported")
    if K <= 0:
        raise UnsupportedSpace("constant K must be positive")
    data = spectral_data(chain)
    lhs = data.meanzero_norm
    gamma_plus = gamma_plus_hilbert(chain)
    factor = (2.0 ** (q - 1.0) - 1.0) * K**q
    if np.isinf(gamma_plus):
        rhs = 1.0
    else:
        rhs = (1.0 - 1.0 / (factor * gamma_plus)) ** (1.0 / q)
    return {"lhs": lhs, "rhs": rhs, "holds": bool(lhs <= rhs + 1e-9)}


def random_reversible_chain(n: int, rng: np.random.Generator, laziness: float = 0.0) -> StochasticChain:
    """Sample a reversible chain from a symmetric positive weight matrix.

    With W symmetric and pi proportional to the row sums of W, the walk
    A = W / rowsum satisfies detailed balance exactly (up to rounding).
    `laziness` mixes in the identity to bound lambda_2 away from 1.
    """
    w = rng.uniform(0.05, 1.0, size=(n, n))
    w = (w + w.T) / 2.0
    rowsum = w.sum(axis=1)
    A = w / rowsum[:, None]
    if laziness > 0:
        A = (1.0 - laziness) * A + laziness * np.eye(n)
    pi = rowsum / rowsum.sum()
    return build_reversible_chain(A, pi)


# --- I/O -------------------------------------------------------------------

def chain_from_json(obj) -> StochasticChain:
    """Accepts {"n": int, "rows": [[...]], "pi": optional [...]}."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    rows = np.array(obj["rows"], dtype=float)
    n = int(obj.get("n", rows.shape[0]))
    if rows.shape != (n, n):
        raise NotStochastic("rows do not form an n-by-n matrix")
    return build_reversible_chain(rows, obj.get("pi"))


def chain_from_text(text: str) -> StochasticChain:
    """Whitespace-separated dense matrix, one row per line."""
    rows = [
        [float(tok) for tok in line.split()]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    return build_reversible_chain(np.array(rows, dtype=float))


def chain_to_json(chain: StochasticChain) -> dict:
    return {
        "n": chain.n,
        "rows": chain.A.tolist(),
        "pi": chain.pi.tolist(),
        "reversible": chain.reversible,
    }
