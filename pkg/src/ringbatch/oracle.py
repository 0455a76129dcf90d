"""Independent brute-force and analytic references, used only by tests.

Everything here is deliberately slow and simple: dense matrices, scalar
double loops, exhaustive enumeration.  No implementation is shared with the
hot-path modules (the pair-gradient formulas below are written out again
from scratch), so agreement between the two is a real check.  Guarded to
small sizes (N <= 32, P <= 8) to keep test suites fast.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .potentials import (
    Coulomb,
    MixedCLJ,
    NoInteraction,
    SingularCoreCLJ,
    SmoothCoreCLJ,
)
from .system import SystemSpec

__all__ = [
    "DenseRing",
    "dense_ring",
    "dense_moments",
    "enumerate_divisions",
    "naive_force",
]


@dataclass
class DenseRing:
    """Explicit dense realization of the ring operator and its algebra."""

    matrix: np.ndarray            # L
    regularized: np.ndarray       # L + alpha I
    alpha: float
    eigenvalues: np.ndarray       # of L, ascending (dense eigensolver)
    transform: np.ndarray         # orthogonal D in the paired cos/sin convention
    inverse: np.ndarray | None    # (L + alpha I)^-1, None when alpha = 0
    inv_sqrt: np.ndarray | None   # (L + alpha I)^-1/2, None when alpha = 0

    def solve(self, b: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.regularized, b)


def dense_ring(n_beads: int, mass: float, beta: float, alpha: float) -> DenseRing:
    """Build L explicitly (any N >= 3, odd allowed here) with alpha algebra."""
    n = n_beads
    beta_n = beta / n
    c = mass / beta_n**2
    mat = 2.0 * c * np.eye(n)
    for j in range(n):
        mat[j, (j + 1) % n] -= c
        mat[j, (j - 1) % n] -= c
    reg = mat + alpha * np.eye(n)
    evals, _ = np.linalg.eigh(mat)
    inverse = inv_sqrt = None
    if alpha > 0:
        w, u = np.linalg.eigh(reg)
        inverse = (u / w) @ u.T
        inv_sqrt = (u / np.sqrt(w)) @ u.T
    return DenseRing(
        matrix=mat,
        regularized=reg,
        alpha=alpha,
        eigenvalues=evals,
        transform=_paired_transform(n),
        inverse=inverse,
        inv_sqrt=inv_sqrt,
    )


def _paired_transform(n: int) -> np.ndarray:
    """Orthogonal eigenbasis of L for even N, columns in paired order.

    Column 0 is the constant mode, columns 2k-1 / 2k the cosine / sine modes
    of frequency k (k = 1 .. N/2 - 1), column N-1 the alternating mode; rows
    are bead indices j = 0 .. N-1.
    """
    if n % 2 != 0:
        raise ValueError("paired transform is defined for even N")
    j = np.arange(n)
    d = np.empty((n, n))
    d[:, 0] = 1.0 / np.sqrt(n)
    d[:, -1] = (-1.0) ** j / np.sqrt(n)
    for k in range(1, n // 2):
        d[:, 2 * k - 1] = np.sqrt(2.0 / n) * np.cos(2.0 * np.pi * k * j / n)
        d[:, 2 * k] = np.sqrt(2.0 / n) * np.sin(2.0 * np.pi * k * j / n)
    return d


@dataclass
class GaussianMoments:
    """Second moments of the position marginal for the non-interacting well."""

    covariance: np.ndarray        # (N, N) per 3-d coordinate column
    expected_virial_weight: float


def dense_moments(spec: SystemSpec) -> GaussianMoments:
    """Closed-form Gaussian moments when the pair interaction is absent.

    Refuses interacting configurations.  The position marginal per scalar
    coordinate column is N(0, (beta_n (L + alpha I))^-1); the kinetic-energy
    weight expectation follows by linearity and is cross-checked internally
    against the eigenmode sum.
    """
    if not isinstance(spec.potential, NoInteraction):
        raise ValueError("dense_moments applies only to non-interacting systems")
    ring = dense_ring(spec.n_beads, spec.mass, spec.beta, spec.alpha)
    cov = ring.inverse / spec.beta_n
    n, p = spec.n_beads, spec.n_particles

    # E[sum_k (q_k - qbar) . alpha q_k] per coordinate = alpha (tr C - 1'C1/N)
    trace_term = float(np.trace(cov) - np.sum(cov) / n)
    w_direct = 3.0 * p / (2.0 * spec.beta) + 3.0 * p * spec.alpha * trace_term / (2.0 * n)

    lam = ring.eigenvalues
    mode_term = float(np.sum(1.0 / (spec.beta_n * (lam[1:] + spec.alpha))))
    w_modes = 3.0 * p / (2.0 * spec.beta) + 3.0 * p * spec.alpha * mode_term / (2.0 * n)
    if abs(w_direct - w_modes) > 1e-12 * max(1.0, abs(w_direct)):
        raise AssertionError("internal moment cross-check failed")
    return GaussianMoments(covariance=cov, expected_virial_weight=w_direct)


def enumerate_divisions(n_particles: int, batch_size: int) -> list[tuple[tuple[int, ...], ...]]:
    """All partitions of {0..P-1} into blocks of size p, duplicate-free.

    Exhaustive; guarded to P <= 8.
    """
    if n_particles > 8:
        raise ValueError("enumeration guard: P must be <= 8")
    if n_particles % batch_size != 0:
        raise ValueError("batch size must divide P")

    def rec(remaining: frozenset) -> list[tuple[tuple[int, ...], ...]]:
        if not remaining:
            return [()]
        first = min(remaining)
        rest = sorted(remaining - {first})
        out = []
        for partners in combinations(rest, batch_size - 1):
            block = (first,) + partners
            for tail in rec(remaining - set(block)):
                out.append((block,) + tail)
        return out

    return rec(frozenset(range(n_particles)))


def _oracle_pair_gradient(pot, d: np.ndarray) -> np.ndarray:
    """Scalar pair gradient written independently of the potentials module."""
    r = float(np.sqrt(d @ d))
    if isinstance(pot, Coulomb):
        return -pot.kappa * d / r**3
    if isinstance(pot, SmoothCoreCLJ):
        if r < pot.sigma:
            return -d / (pot.sigma * r)
        return -pot.sigma * d / r**3
    if isinstance(pot, SingularCoreCLJ):
        if r >= pot.sigma:
            return np.zeros(3)
        s = pot.sigma
        dv = -2.0 * s**12 / r**13 + s**6 / r**7
        return dv * d / r
    if isinstance(pot, MixedCLJ):
        return _oracle_pair_gradient(SmoothCoreCLJ(pot.sigma), d) + _oracle_pair_gradient(
            SingularCoreCLJ(pot.sigma), d
        )
    raise TypeError(f"no oracle gradient for {type(pot).__name__}")


def naive_force(spec: SystemSpec, q: np.ndarray) -> np.ndarray:
    """Straight triple loop over beads and ordered pairs."""
    n, p, _ = q.shape
    out = np.zeros_like(q)
    for k in range(n):
        for i in range(p):
            for j in range(p):
                if i == j:
                    continue
                out[k, i] += _oracle_pair_gradient(spec.potential, q[k, i] - q[k, j])
    return out
