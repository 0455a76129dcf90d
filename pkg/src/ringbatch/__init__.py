"""Quantum thermal averages of interacting particle systems.

Samples the ring-polymer Boltzmann distribution with preconditioned
mass-modified second-order Langevin dynamics, optionally accelerated by the
random batch method (O(NP) interaction forces per step) and extended with a
splitting Monte Carlo correction for singular pair potentials.
"""

from .potentials import (
    Coulomb,
    HarmonicWell,
    MixedCLJ,
    NoInteraction,
    SingularCoreCLJ,
    SingularityError,
    SmoothCoreCLJ,
    default_well_strength,
)
from .ring_operator import RingOperator, build_ring_operator
from .system import PhaseState, SystemSpec, full_interaction_force, init_state, u2_cutoff, u_alpha
from .rbm import Division, batch_force, random_division, rbm_pairwise_observable
from .dynamics import (
    RngStreams,
    StepOutcome,
    baoab_step,
    coupled_run,
    exact_step,
    rbm_split_step,
    rbm_step,
    split_mc_step,
)
from .estimators import (
    autocorrelation,
    relative_entropy_1d,
    weak_error_ensemble,
    weight_position,
    weight_virial,
)

__version__ = "0.1.0"
