import numpy as np
import pytest

from ringbatch.oracle import dense_ring, naive_force
from ringbatch.potentials import Coulomb, MixedCLJ, NoInteraction, SingularityError
from ringbatch.system import (
    PairEvalCounter,
    PhaseState,
    SystemSpec,
    full_interaction_force,
    init_state,
    load_state,
    save_state,
    u2_cutoff,
    u_alpha,
    virial_weight_from_gradient,
)


def coulomb_spec(n_beads=4, n_particles=4, **kwargs):
    return SystemSpec(
        mass=1.0, beta=4.0, n_beads=n_beads, n_particles=n_particles,
        potential=Coulomb(1.0), **kwargs,
    )


def random_state(spec, seed=0, spread=2.0):
    rng = np.random.default_rng(seed)
    return spread * rng.standard_normal((spec.n_beads, spec.n_particles, 3))


def test_symmetric_pair_force():
    spec = coulomb_spec(n_particles=2)
    q = np.zeros((4, 2, 3))
    q[:, 0, 0] = 0.5
    q[:, 1, 0] = -0.5
    f = full_interaction_force(spec, q)
    # stored field is the gradient sum; the physical force is its negation,
    # so -f points outward (repulsion) with unit magnitude at separation 1
    assert np.allclose(f[:, 0], [-1.0, 0.0, 0.0], atol=1e-14)
    assert np.allclose(f[:, 1], [1.0, 0.0, 0.0], atol=1e-14)
    assert np.allclose(f.sum(axis=1), 0.0, atol=1e-14)


def test_single_particle_zero_field():
    spec = coulomb_spec(n_particles=1)
    q = np.ones((4, 1, 3))
    assert np.all(full_interaction_force(spec, q) == 0.0)
    assert u_alpha(spec, q) == 0.0


def test_force_matches_naive_oracle():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=2, n_particles=3, potential=Coulomb(1.0))
    rng = np.random.default_rng(3)
    for _ in range(100):
        q = 2.0 * rng.standard_normal((2, 3, 3))
        f = full_interaction_force(spec, q)
        assert np.max(np.abs(f - naive_force(spec, q))) < 1e-12


def test_force_matches_naive_oracle_mixed():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=2, n_particles=3, potential=MixedCLJ(0.9))
    rng = np.random.default_rng(4)
    for _ in range(50):
        q = 1.2 * rng.standard_normal((2, 3, 3))
        f = full_interaction_force(spec, q)
        assert np.max(np.abs(f - naive_force(spec, q))) < 1e-10


def test_coincident_particles_error_names_pair():
    spec = coulomb_spec(n_particles=3)
    q = random_state(spec, seed=5)
    q[2, 1] = q[2, 2]
    with pytest.raises(SingularityError) as err:
        full_interaction_force(spec, q)
    assert "bead 2" in str(err.value)
    assert "(1, 2)" in str(err.value)


def test_u_alpha_simple_pair():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=1, n_particles=2, potential=Coulomb(1.0))
    q = np.zeros((1, 2, 3))
    q[0, 1, 2] = 2.0
    assert u_alpha(spec, q) == pytest.approx(0.5)


def test_u_alpha_matches_double_loop():
    spec = coulomb_spec(n_beads=3, n_particles=4)
    q = random_state(spec, seed=6)
    total = 0.0
    for k in range(3):
        for i in range(4):
            for j in range(i + 1, 4):
                total += spec.potential.pair_value(q[k, i] - q[k, j])
    assert u_alpha(spec, q) == pytest.approx(total, rel=1e-12)


def test_force_is_negative_gradient_of_u_alpha():
    spec = coulomb_spec(n_beads=2, n_particles=3)
    q = random_state(spec, seed=7)
    f = full_interaction_force(spec, q)
    rng = np.random.default_rng(8)
    h = 1e-6
    for _ in range(50):
        e = rng.standard_normal(q.shape)
        e /= np.linalg.norm(e)
        deriv = (u_alpha(spec, q + h * e) - u_alpha(spec, q - h * e)) / (2 * h)
        inner = float(np.sum(f * e))
        assert deriv == pytest.approx(inner, rel=1e-5, abs=1e-7)


def test_newton_third_law_per_bead():
    spec = coulomb_spec(n_beads=4, n_particles=5)
    q = random_state(spec, seed=9)
    f = full_interaction_force(spec, q)
    assert np.max(np.abs(f.sum(axis=1))) < 1e-10


def test_translation_invariance_per_bead():
    spec = coulomb_spec(n_beads=4, n_particles=4)
    q = random_state(spec, seed=10)
    f = full_interaction_force(spec, q)
    q2 = q.copy()
    q2[1] += np.array([0.7, -1.3, 2.2])
    f2 = full_interaction_force(spec, q2)
    assert np.max(np.abs(f - f2)) < 1e-12


def test_u2_cutoff_zero_when_separated():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=2, n_particles=3, potential=MixedCLJ(0.3))
    q = random_state(spec, seed=11, spread=3.0)
    from ringbatch.system import _pairwise_geometry

    _, r = _pairwise_geometry(q)
    assert np.min(r) >= 0.3  # sanity for this seed
    assert u2_cutoff(spec, q) == 0.0


def test_u2_cutoff_single_close_pair():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=1, n_particles=2, potential=MixedCLJ(0.3))
    q = np.zeros((1, 2, 3))
    q[0, 1, 0] = 0.15
    assert u2_cutoff(spec, q) == pytest.approx(673.0)


def test_u2_cutoff_matches_full_double_loop():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=3, n_particles=4, potential=MixedCLJ(0.9))
    singular = spec.potential.singular_part()
    rng = np.random.default_rng(12)
    for _ in range(25):
        q = 0.8 * rng.standard_normal((3, 4, 3))
        total = 0.0
        for k in range(3):
            for i in range(4):
                for j in range(i + 1, 4):
                    total += float(singular.value_r(np.linalg.norm(q[k, i] - q[k, j])))
        assert u2_cutoff(spec, q) == pytest.approx(total, rel=1e-12, abs=1e-12)


def test_u2_cutoff_singular_pair_is_inf():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=1, n_particles=2, potential=MixedCLJ(0.3))
    q = np.zeros((1, 2, 3))
    q[0, 1, 0] = 1e-13
    assert u2_cutoff(spec, q) == np.inf


def test_u2_cutoff_requires_mixed():
    spec = coulomb_spec()
    with pytest.raises(TypeError):
        u2_cutoff(spec, random_state(spec))


def test_virial_weight_identical_centered_beads():
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=4, n_particles=2, potential=NoInteraction())
    q = np.tile(np.array([[[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]]), (4, 1, 1))
    w = virial_weight_from_gradient(spec, q, np.zeros_like(q))
    assert w == pytest.approx(3 * 2 / (2 * 4.0))


def test_init_state_deterministic():
    spec = coulomb_spec()
    a = init_state(spec, np.random.default_rng(77))
    b = init_state(spec, np.random.default_rng(77))
    assert np.array_equal(a.q, b.q) and np.array_equal(a.v, b.v)


def test_init_state_minimum_separation():
    spec = coulomb_spec(n_particles=4)
    for seed in range(20):
        state = init_state(spec, np.random.default_rng(seed))
        from ringbatch.system import _pairwise_geometry

        _, r = _pairwise_geometry(state.q)
        assert np.min(r) >= 1e-6


def test_init_velocity_covariance_matches_oracle():
    n, p, draws = 4, 2, 20_000
    spec = SystemSpec(mass=1.0, beta=4.0, n_beads=n, n_particles=p, potential=NoInteraction())
    dense = dense_ring(n, 1.0, 4.0, spec.alpha)
    target = dense.inverse / spec.beta_n
    rng = np.random.default_rng(13)
    cols = np.concatenate(
        [init_state(spec, rng).v.reshape(n, 3 * p) for _ in range(draws)], axis=1
    )
    m = cols.shape[1]
    emp = (cols @ cols.T) / m
    se = np.sqrt((np.outer(np.diag(target), np.diag(target)) + target**2) / m)
    assert np.all(np.abs(emp - target) < 5 * se)


def test_phase_state_validation():
    with pytest.raises(ValueError):
        PhaseState(np.zeros((2, 2, 3)), np.zeros((2, 3, 3)))
    with pytest.raises(ValueError):
        PhaseState(np.full((2, 2, 3), np.nan), np.zeros((2, 2, 3)))


def test_spec_validation():
    with pytest.raises(ValueError):
        coulomb_spec(n_particles=4, batch_size=3)
    with pytest.raises(ValueError):
        coulomb_spec(n_particles=4, batch_size=1)
    with pytest.raises(ValueError):
        SystemSpec(mass=-1.0, beta=4.0, n_beads=4, n_particles=2, potential=Coulomb())
    spec = coulomb_spec(n_particles=8)
    assert spec.alpha == pytest.approx(8 ** (-2.0 / 3.0))
    assert spec.external.alpha0 == spec.alpha
    assert spec.beta_n == pytest.approx(1.0)


def test_pair_eval_counter():
    spec = coulomb_spec(n_beads=4, n_particles=4)
    counter = PairEvalCounter()
    full_interaction_force(spec, random_state(spec), counter=counter)
    assert counter.pairs == 4 * 4 * 3 // 2


def test_state_snapshot_roundtrip(tmp_path):
    spec = coulomb_spec()
    state = init_state(spec, np.random.default_rng(1))
    path = tmp_path / "state.txt"
    save_state(state, path)
    back = load_state(path)
    assert np.array_equal(back.q, state.q)
    assert np.array_equal(back.v, state.v)
    with pytest.raises(ValueError):
        other = tmp_path / "bad.txt"
        other.write_text("# nonsense\n")
        load_state(other)
