"""Random division of particles into batches and batch-approximated sums.

Each timestep draws a fresh uniform permutation (Fisher-Yates, O(P)) and
cuts it into consecutive blocks of size p.  Interactions are evaluated only
within blocks and rescaled by (P-1)/(p-1), which makes the batch force an
unbiased estimator of the full pairwise force.  The same construction gives
unbiased batch estimators of pairwise-sum observables and of the gradient
term in the kinetic-energy weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .potentials import R_MIN, PairPotential, SingularityError
from .system import PairEvalCounter, SystemSpec, virial_weight_from_gradient

__all__ = [
    "Division",
    "random_division",
    "random_batch",
    "batch_force",
    "rbm_pairwise_observable",
    "rbm_virial_gradient",
]


@dataclass(frozen=True)
class Division:
    """Partition of {0..P-1} into n = P/p blocks of equal size p."""

    batches: np.ndarray  # (n, p) int array

    def __post_init__(self):
        b = np.asarray(self.batches)
        if b.ndim != 2:
            raise ValueError("batches must be a 2-d index array")
        flat = np.sort(b.ravel())
        if not np.array_equal(flat, np.arange(b.size)):
            raise ValueError("batches must partition the particle index range")

    @property
    def n_batches(self) -> int:
        return self.batches.shape[0]

    @property
    def batch_size(self) -> int:
        return self.batches.shape[1]


def random_division(n_particles: int, batch_size: int, rng: np.random.Generator) -> Division:
    """Uniform random division: permutation cut into consecutive blocks.

    The degenerate full batch (p = P) is returned in identity order so the
    single-batch force reduces bit for bit to the exact force.
    """
    p = batch_size
    if p < 2 or n_particles % p != 0:
        raise ValueError(f"batch size {p} must be >= 2 and divide P={n_particles}")
    if p == n_particles:
        return Division(np.arange(n_particles)[None, :])
    perm = rng.permutation(n_particles)
    return Division(perm.reshape(n_particles // p, p))


def random_batch(n_particles: int, batch_size: int, rng: np.random.Generator) -> np.ndarray:
    """A single uniform batch of indices (no full division required)."""
    if batch_size == n_particles:
        return np.arange(n_particles)
    return rng.choice(n_particles, size=batch_size, replace=False)


def batch_force(
    spec: SystemSpec,
    q: np.ndarray,
    division: Division,
    potential: PairPotential | None = None,
    counter: PairEvalCounter | None = None,
) -> np.ndarray:
    """(P-1)/(p-1) * within-batch gradient sums, evaluated per bead.

    Costs N * P * (p-1) / 2 unique pair evaluations versus N * P * (P-1) / 2
    for the full force.
    """
    pot = potential if potential is not None else spec.potential
    n = q.shape[0]
    batches = division.batches
    nb, p = batches.shape
    qb = q[:, batches, :]  # (N, nb, p, 3)
    diff = qb[:, :, :, None, :] - qb[:, :, None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    r[:, :, np.arange(p), np.arange(p)] = np.inf
    if np.min(r) < R_MIN:
        k, b, i, j = np.unravel_index(int(np.argmin(r)), r.shape)
        raise SingularityError(
            f"coincident particles in bead {k}: pair "
            f"({batches[b, i]}, {batches[b, j]}) at r={r[k, b, i, j]:.3e}"
        )
    w = pot.dvalue_r(r) / r
    sub = np.einsum("kbij,kbijd->kbid", w, diff)
    scale = (q.shape[1] - 1) / (p - 1)
    out = np.empty_like(q)
    out[:, batches.reshape(-1), :] = (scale * sub).reshape(n, nb * p, 3)
    if counter is not None:
        counter.add(n * nb * p * (p - 1) // 2)
    return out


def rbm_pairwise_observable(a, q: np.ndarray, batch: np.ndarray) -> float:
    """Batch estimate of the bead-averaged pairwise-sum observable.

    Returns (P-1)/(N p (p-1)) * sum_k sum_{i<j in batch} a(q_k^i - q_k^j),
    an unbiased estimate of (1/N) sum_k (1/P) sum_{i<j} a(q_k^i - q_k^j)
    under a uniformly drawn batch.  ``a`` maps displacement arrays
    (..., 3) -> (...).
    """
    n, n_particles = q.shape[0], q.shape[1]
    batch = np.asarray(batch)
    p = batch.size
    qb = q[:, batch, :]
    iu, ju = np.triu_indices(p, k=1)
    vals = a(qb[:, iu, :] - qb[:, ju, :])
    return float((n_particles - 1) / (n * p * (p - 1)) * np.sum(vals))


def rbm_virial_gradient(spec: SystemSpec, q: np.ndarray, division: Division) -> float:
    """Kinetic-energy weight with the gradient term batch-approximated."""
    return virial_weight_from_gradient(spec, q, batch_force(spec, q, division))
