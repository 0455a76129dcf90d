"""BAOAB integration of the preconditioned mass-modified Langevin dynamics.

One timestep applies, in order,

    B:  v <- v - (q + K^-1 G(q)) dt/2
    A:  q <- q + v dt/2
    O:  v <- exp(-gamma dt) v + sqrt((1 - exp(-2 gamma dt)) / beta_n) eta
    A:  q <- q + v dt/2
    B:  v <- v - (q + K^-1 G(q)) dt/2        (G recomputed at the new q)

where K = L + alpha I is the ring operator, G the interaction-gradient
field of the active force strategy, and eta has independent columns
~ N(0, K^-1).  The -q term in the kicks is the preconditioned
harmonic-well force under the matched regularization.

Force strategies: exact pairwise, random-batch (one fresh division per
timestep, shared by both kicks), and the smooth-part-only variants used by
the Metropolis-corrected steppers.  The Metropolis steppers propose with
smooth forces, accept with probability min{1, exp(-beta_n dU2)}, and flip
the velocity on rejection, which preserves detailed balance for the full
singular target.

Randomness is split into per-purpose streams (noise / division /
metropolis / weights / init) derived from (master seed, trajectory id)
with a counter-based generator, so e.g. a batch run at p = P consumes the
same noise stream as the exact run and reproduces it exactly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .potentials import MixedCLJ, PairPotential
from .rbm import Division, batch_force, random_division
from .system import (
    PairEvalCounter,
    PhaseState,
    SystemSpec,
    full_interaction_force,
    u2_cutoff,
)

__all__ = [
    "RngStreams",
    "StepOutcome",
    "baoab_step",
    "exact_step",
    "rbm_step",
    "split_mc_step",
    "rbm_split_step",
    "coupled_run",
]


class RngStreams:
    """Independent, reproducible generators for one trajectory worker.

    Streams are keyed as (master_seed, trajectory_id, stream index) on a
    counter-based bit generator; trajectories never share state.
    """

    _NAMES = ("init", "noise", "division", "metropolis", "weight")

    def __init__(self, master_seed: int, trajectory_id: int = 0):
        self.master_seed = int(master_seed)
        self.trajectory_id = int(trajectory_id)
        for idx, name in enumerate(self._NAMES):
            seq = np.random.SeedSequence(
                entropy=self.master_seed, spawn_key=(self.trajectory_id, idx)
            )
            setattr(self, name, np.random.Generator(np.random.Philox(seq)))


@dataclass
class StepOutcome:
    """Result of one timestep: new state plus bookkeeping.

    ``accepted`` is present (not None) iff a Metropolis step ran;
    ``u2_delta`` / ``u2_value`` carry the proposal energy difference and the
    singular energy of the returned state so drivers can cache it.
    ``trailing_force`` is the interaction-gradient field evaluated at the
    returned positions under the step's strategy (reusable for weights).
    """

    state: PhaseState
    accepted: bool | None = None
    u2_delta: float | None = None
    u2_value: float | None = None
    pair_evals: int = 0
    elapsed: float = 0.0
    division: Division | None = None
    trailing_force: np.ndarray | None = field(default=None, repr=False)


def _ou_coefficients(spec: SystemSpec) -> tuple[float, float]:
    damp = np.exp(-spec.gamma * spec.dt)
    return damp, np.sqrt((1.0 - damp * damp) / spec.beta_n)


def baoab_step(
    spec: SystemSpec,
    state: PhaseState,
    force: np.ndarray,
    rng: np.random.Generator,
    force_fn,
    noise: np.ndarray | None = None,
):
    """Advance one timestep; returns (PhaseState, trailing force field).

    ``force`` must be the strategy's gradient field at ``state.q``;
    ``force_fn(q)`` recomputes it for the trailing kick.  ``noise``
    overrides the O-step Gaussian (coupled trajectories share one draw).
    """
    ring = spec.ring
    dt = spec.dt
    damp, kick = _ou_coefficients(spec)

    v = state.v - (state.q + ring.solve(force)) * (dt / 2.0)
    q = state.q + v * (dt / 2.0)
    if noise is None:
        noise = ring.sqrt_inverse_apply(rng.standard_normal(q.shape))
    v = damp * v + kick * noise
    q = q + v * (dt / 2.0)
    trailing = force_fn(q)
    v = v - (q + ring.solve(trailing)) * (dt / 2.0)
    return PhaseState(q, v), trailing


def exact_step(spec: SystemSpec, state: PhaseState, streams: RngStreams) -> StepOutcome:
    """One timestep under the exact O(N P^2) pairwise force."""
    t0 = time.perf_counter()
    counter = PairEvalCounter()

    def force_fn(q):
        return full_interaction_force(spec, q, counter=counter)

    new_state, trailing = baoab_step(
        spec, state, force_fn(state.q), streams.noise, force_fn
    )
    return StepOutcome(
        state=new_state,
        pair_evals=counter.pairs,
        elapsed=time.perf_counter() - t0,
        trailing_force=trailing,
    )


def rbm_step(
    spec: SystemSpec,
    state: PhaseState,
    streams: RngStreams,
    fresh_division_per_kick: bool = False,
) -> StepOutcome:
    """One timestep under batch forces with a fresh division.

    Because the batches partition the particles and each particle's update
    touches only its own coordinates, evolving batch by batch equals one
    whole-system step with the batch force field; this keeps a single noise
    draw and preconditioner solve per sub-step.  Both kicks share the
    timestep's division unless ``fresh_division_per_kick`` is set.
    """
    if spec.batch_size is None:
        raise ValueError("rbm_step requires spec.batch_size")
    t0 = time.perf_counter()
    counter = PairEvalCounter()
    division = random_division(spec.n_particles, spec.batch_size, streams.division)

    def force_fn(q):
        div = (
            random_division(spec.n_particles, spec.batch_size, streams.division)
            if fresh_division_per_kick
            else division
        )
        return batch_force(spec, q, div, counter=counter)

    new_state, trailing = baoab_step(
        spec, state, batch_force(spec, state.q, division, counter=counter),
        streams.noise, force_fn,
    )
    return StepOutcome(
        state=new_state,
        pair_evals=counter.pairs,
        elapsed=time.perf_counter() - t0,
        division=division,
        trailing_force=trailing,
    )


def _metropolis_u2(
    spec: SystemSpec,
    state: PhaseState,
    proposal: PhaseState,
    u2_old: float,
    rng: np.random.Generator,
) -> tuple[PhaseState, bool, float, float]:
    u2_new = u2_cutoff(spec, proposal.q)
    delta = u2_new - u2_old
    if np.isnan(delta):  # inf - inf: both states singular, reject defensively
        accept_prob = 0.0
    elif delta <= 0.0:
        accept_prob = 1.0
    else:
        accept_prob = np.exp(-spec.beta_n * delta)
    if rng.random() < accept_prob:
        return proposal, True, delta, u2_new
    return PhaseState(state.q, -state.v), False, delta, u2_old


def split_mc_step(
    spec: SystemSpec,
    state: PhaseState,
    streams: RngStreams,
    u2_current: float | None = None,
) -> StepOutcome:
    """Smooth-force proposal plus Metropolis correction on the singular part.

    On rejection the state keeps its positions with flipped velocity.  A
    singular proposal (u2 = +inf) is always rejected; gradients of the
    singular part are never evaluated.
    """
    pot = spec.potential
    if not isinstance(pot, MixedCLJ):
        raise TypeError("splitting steps require the mixed Coulomb-Lennard-Jones potential")
    t0 = time.perf_counter()
    counter = PairEvalCounter()
    smooth = pot.smooth_part()

    def force_fn(q):
        return full_interaction_force(spec, q, potential=smooth, counter=counter)

    u2_old = u2_cutoff(spec, state.q) if u2_current is None else u2_current
    proposal, trailing = baoab_step(
        spec, state, force_fn(state.q), streams.noise, force_fn
    )
    new_state, accepted, delta, u2_val = _metropolis_u2(
        spec, state, proposal, u2_old, streams.metropolis
    )
    return StepOutcome(
        state=new_state,
        accepted=accepted,
        u2_delta=delta,
        u2_value=u2_val,
        pair_evals=counter.pairs,
        elapsed=time.perf_counter() - t0,
        trailing_force=trailing if accepted else None,
    )


def rbm_split_step(
    spec: SystemSpec,
    state: PhaseState,
    streams: RngStreams,
    u2_current: float | None = None,
    fresh_division_per_kick: bool = False,
) -> StepOutcome:
    """Batch smooth-force proposal plus the same singular-part Metropolis step."""
    pot = spec.potential
    if not isinstance(pot, MixedCLJ):
        raise TypeError("splitting steps require the mixed Coulomb-Lennard-Jones potential")
    if spec.batch_size is None:
        raise ValueError("rbm_split_step requires spec.batch_size")
    t0 = time.perf_counter()
    counter = PairEvalCounter()
    smooth = pot.smooth_part()
    division = random_division(spec.n_particles, spec.batch_size, streams.division)

    def force_fn(q):
        div = (
            random_division(spec.n_particles, spec.batch_size, streams.division)
            if fresh_division_per_kick
            else division
        )
        return batch_force(spec, q, div, potential=smooth, counter=counter)

    u2_old = u2_cutoff(spec, state.q) if u2_current is None else u2_current
    proposal, trailing = baoab_step(
        spec, state, force_fn(state.q), streams.noise, force_fn
    )
    new_state, accepted, delta, u2_val = _metropolis_u2(
        spec, state, proposal, u2_old, streams.metropolis
    )
    return StepOutcome(
        state=new_state,
        accepted=accepted,
        u2_delta=delta,
        u2_value=u2_val,
        pair_evals=counter.pairs,
        elapsed=time.perf_counter() - t0,
        division=division,
        trailing_force=trailing if accepted else None,
    )


@dataclass
class CoupledRunResult:
    """Pathwise deviation of a batch trajectory from its exact twin."""

    times: np.ndarray
    sq_deviation: np.ndarray  # |q_batch(t) - q_exact(t)|_F^2 at each time
    exact_state: PhaseState
    rbm_state: PhaseState


def coupled_run(
    spec: SystemSpec,
    n_steps: int,
    streams: RngStreams,
    record_stride: int = 1,
) -> CoupledRunResult:
    """Advance exact and batch trajectories driven by the same noise.

    Both start from the same initial state; every step draws one Gaussian
    and hands it to both integrators, so any divergence is due to the batch
    force approximation alone.
    """
    if spec.batch_size is None:
        raise ValueError("coupled_run requires spec.batch_size")
    from .system import init_state

    state_ex = init_state(spec, streams.init)
    state_rb = state_ex.copy()
    times = [0.0]
    devs = [0.0]
    for j in range(n_steps):
        noise = spec.ring.sqrt_inverse_apply(streams.noise.standard_normal(state_ex.q.shape))
        division = random_division(spec.n_particles, spec.batch_size, streams.division)

        state_ex, _ = baoab_step(
            spec,
            state_ex,
            full_interaction_force(spec, state_ex.q),
            streams.noise,
            lambda q: full_interaction_force(spec, q),
            noise=noise,
        )
        state_rb, _ = baoab_step(
            spec,
            state_rb,
            batch_force(spec, state_rb.q, division),
            streams.noise,
            lambda q: batch_force(spec, q, division),
            noise=noise,
        )
        if (j + 1) % record_stride == 0:
            times.append((j + 1) * spec.dt)
            devs.append(float(np.sum((state_rb.q - state_ex.q) ** 2)))
    return CoupledRunResult(
        times=np.asarray(times),
        sq_deviation=np.asarray(devs),
        exact_state=state_ex,
        rbm_state=state_rb,
    )
