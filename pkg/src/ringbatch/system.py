"""Ring-polymer phase state, system configuration, and exact force/energy kernels.

Coordinate layout is bead-major: ``q[k, i]`` is the 3-vector of particle i
in bead k, so the preconditioner (which acts along the bead axis) sees
contiguous columns, and per-bead pairwise kernels slice ``q[k]``.

``full_interaction_force`` is the exact O(N P^2) pairwise kernel every
cheaper strategy is measured against.  Force fields store the raw gradient
sum over pair potentials; the external-well and preconditioner terms are
applied once per step by the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .potentials import (
    R_MIN,
    Coulomb,
    HarmonicWell,
    MixedCLJ,
    PairPotential,
    SingularityError,
    default_well_strength,
)
from .ring_operator import RingOperator

__all__ = [
    "PhaseState",
    "SystemSpec",
    "PairEvalCounter",
    "full_interaction_force",
    "u_alpha",
    "u2_cutoff",
    "virial_weight_from_gradient",
    "init_state",
    "save_state",
    "load_state",
]

#: minimum admissible pair distance right after initialization
INIT_MIN_SEPARATION = 1e-6
#: per-bead position jitter applied on top of the common particle centers
INIT_JITTER = 0.1


@dataclass
class PhaseState:
    """Positions and velocities of the ring polymer, each (N, P, 3)."""

    q: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.q.shape != self.v.shape or self.q.ndim != 3 or self.q.shape[2] != 3:
            raise ValueError(f"q and v must share shape (N, P, 3), got {self.q.shape} / {self.v.shape}")
        if not (np.isfinite(self.q).all() and np.isfinite(self.v).all()):
            raise ValueError("phase state contains non-finite entries")

    @property
    def n_beads(self) -> int:
        return self.q.shape[0]

    @property
    def n_particles(self) -> int:
        return self.q.shape[1]

    def copy(self) -> "PhaseState":
        return PhaseState(self.q.copy(), self.v.copy())


@dataclass(frozen=True)
class SystemSpec:
    """Full physical + numerical configuration of one sampling problem.

    ``alpha`` defaults to P^(-2/3) and, unless overridden, matches the
    harmonic well strength so the modified potential reduces to the pure
    interaction sum.  ``batch_size`` is only required (and validated for
    divisibility) when a random-batch method is used.
    """

    mass: float
    beta: float
    n_beads: int
    n_particles: int
    potential: PairPotential
    alpha: float | None = None
    external: HarmonicWell | None = None
    gamma: float = 2.0
    dt: float = 1.0 / 16.0
    batch_size: int | None = None
    seed: int = 0
    total_time: float = 0.0

    def __post_init__(self):
        if self.mass <= 0 or self.beta <= 0:
            raise ValueError("mass and beta must be positive")
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.alpha is None:
            object.__setattr__(self, "alpha", default_well_strength(self.n_particles))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.external is None:
            object.__setattr__(self, "external", HarmonicWell(self.alpha))
        if self.batch_size is not None:
            p = self.batch_size
            if p < 2 or p > self.n_particles:
                raise ValueError(f"batch_size must satisfy 2 <= p <= P, got {p}")
            if self.n_particles % p != 0:
                raise ValueError(
                    f"batch_size {p} does not divide n_particles {self.n_particles}"
                )

    @property
    def beta_n(self) -> float:
        return self.beta / self.n_beads

    @cached_property
    def ring(self) -> RingOperator:
        return RingOperator(self.n_beads, self.mass, self.beta, self.alpha)


@dataclass
class PairEvalCounter:
    """Counts unique pair-potential evaluations performed by force kernels."""

    pairs: int = 0

    def add(self, n: int) -> None:
        self.pairs += int(n)


def _pairwise_geometry(q: np.ndarray):
    """Displacements (N,P,P,3) and distances (N,P,P, diag set to +inf)."""
    diff = q[:, :, None, :] - q[:, None, :, :]
    r = np.linalg.norm(diff, axis=-1)
    p = q.shape[1]
    r[:, np.arange(p), np.arange(p)] = np.inf
    return diff, r


def _check_singular(r: np.ndarray) -> None:
    if np.min(r) < R_MIN:
        k, i, j = np.unravel_index(int(np.argmin(r)), r.shape)
        raise SingularityError(
            f"coincident particles in bead {k}: pair ({i}, {j}) at r={r[k, i, j]:.3e}"
        )


def full_interaction_force(
    spec: SystemSpec,
    q: np.ndarray,
    potential: PairPotential | None = None,
    counter: PairEvalCounter | None = None,
) -> np.ndarray:
    """Exact per-bead gradient sum sum_{j != i} grad V(q_k^i - q_k^j).

    Returns an (N, P, 3) field.  ``potential`` overrides the spec's pair
    potential (the splitting integrator passes the smooth part).
    """
    pot = potential if potential is not None else spec.potential
    n, p = q.shape[0], q.shape[1]
    if p == 1:
        return np.zeros_like(q)
    diff, r = _pairwise_geometry(q)
    _check_singular(r)
    w = pot.dvalue_r(r) / r
    if counter is not None:
        counter.add(n * p * (p - 1) // 2)
    return np.einsum("kij,kijd->kid", w, diff)


def u_alpha(spec: SystemSpec, q: np.ndarray, potential: PairPotential | None = None) -> float:
    """Total interaction energy: sum over beads of all unique pair values."""
    pot = potential if potential is not None else spec.potential
    p = q.shape[1]
    if p == 1:
        return 0.0
    _, r = _pairwise_geometry(q)
    _check_singular(r)
    iu, ju = np.triu_indices(p, k=1)
    return float(np.sum(pot.value_r(r[:, iu, ju])))


def u2_cutoff(spec: SystemSpec, q: np.ndarray) -> float:
    """Short-ranged singular energy via plain cutoff at the support radius.

    Pairs at or beyond sigma contribute exactly zero and are skipped.  A pair
    inside the singularity guard returns +inf, which the Metropolis step maps
    to certain rejection (no gradients are ever taken of this part).
    """
    pot = spec.potential
    if not isinstance(pot, MixedCLJ):
        raise TypeError("u2_cutoff requires the mixed Coulomb-Lennard-Jones potential")
    p = q.shape[1]
    if p == 1:
        return 0.0
    _, r = _pairwise_geometry(q)
    iu, ju = np.triu_indices(p, k=1)
    rp = r[:, iu, ju]
    close = rp < pot.sigma
    if not np.any(close):
        return 0.0
    rc = rp[close]
    if np.min(rc) < R_MIN:
        return np.inf
    return float(np.sum(pot.singular_part().value_r(rc)))


def virial_weight_from_gradient(
    spec: SystemSpec, q: np.ndarray, gradient: np.ndarray
) -> float:
    """Kinetic-energy weight 3P/(2 beta) + (1/2N) <q - qbar, alpha q + G>_F.

    ``gradient`` is an interaction-gradient field (exact or batch
    approximated); the harmonic-well term alpha*q is added here so force
    strategies stay interchangeable.
    """
    n, p = q.shape[0], q.shape[1]
    centered = q - q.mean(axis=0, keepdims=True)
    inner = float(np.sum(centered * (spec.alpha * q + gradient)))
    return 3.0 * p / (2.0 * spec.beta) + inner / (2.0 * n)


def init_state(spec: SystemSpec, rng: np.random.Generator) -> PhaseState:
    """Initial phase state at the harmonic well's natural scale.

    Particle centers are i.i.d. Gaussian with per-coordinate standard
    deviation P^(1/3), replicated across beads with a small per-bead jitter;
    the draw is rejected and repeated if any pair comes closer than 1e-6.
    Velocities come from the invariant velocity marginal.
    """
    n, p = spec.n_beads, spec.n_particles
    std = spec.n_particles ** (1.0 / 3.0)
    for _ in range(100):
        centers = std * rng.standard_normal((1, p, 3))
        q = centers + INIT_JITTER * rng.standard_normal((n, p, 3))
        if p == 1:
            break
        _, r = _pairwise_geometry(q)
        if np.min(r) >= INIT_MIN_SEPARATION:
            break
    else:
        raise RuntimeError("could not initialize positions without near collisions")
    v = spec.ring.sample_gaussian(3 * p, rng) / np.sqrt(spec.beta_n)
    return PhaseState(q, v.reshape(n, p, 3))


def save_state(state: PhaseState, path: str | Path) -> None:
    """Write a restartable text snapshot (bead-major rows: q then v)."""
    n, p = state.n_beads, state.n_particles
    rows = np.hstack([state.q.reshape(n * p, 3), state.v.reshape(n * p, 3)])
    header = f"phasestate-v1 n_beads={n} n_particles={p} columns=qx,qy,qz,vx,vy,vz"
    np.savetxt(path, rows, fmt="%.17g", header=header)


def load_state(path: str | Path) -> PhaseState:
    with open(path) as fh:
        header = fh.readline()
    if "phasestate-v1" not in header:
        raise ValueError(f"unrecognized state snapshot header: {header.strip()!r}")
    fields = dict(
        kv.split("=") for kv in header.replace("#", "").split() if "=" in kv
    )
    n, p = int(fields["n_beads"]), int(fields["n_particles"])
    rows = np.loadtxt(path).reshape(n * p, 6)
    return PhaseState(rows[:, :3].reshape(n, p, 3), rows[:, 3:].reshape(n, p, 3))
