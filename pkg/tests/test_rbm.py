from itertools import combinations

import numpy as np
import pytest

from ringbatch.estimators import coulomb_pair_observable, weight_position, weight_virial
from ringbatch.oracle import enumerate_divisions
from ringbatch.potentials import Coulomb
from ringbatch.rbm import (
    Division,
    batch_force,
    random_batch,
    random_division,
    rbm_pairwise_observable,
    rbm_virial_gradient,
)
from ringbatch.system import PairEvalCounter, SystemSpec, full_interaction_force


def spec_for(n_particles, batch_size, n_beads=4, kappa=1.0):
    return SystemSpec(
        mass=1.0, beta=4.0, n_beads=n_beads, n_particles=n_particles,
        potential=Coulomb(kappa), batch_size=batch_size,
    )


def random_q(spec, seed=0):
    rng = np.random.default_rng(seed)
    return 2.0 * rng.standard_normal((spec.n_beads, spec.n_particles, 3))


def test_division_partition_validation():
    with pytest.raises(ValueError):
        Division(np.array([[0, 1], [1, 2]]))
    with pytest.raises(ValueError):
        Division(np.array([0, 1, 2, 3]))
    Division(np.array([[2, 0], [3, 1]]))  # valid


def test_random_division_basic():
    rng = np.random.default_rng(0)
    div = random_division(8, 2, rng)
    assert div.n_batches == 4 and div.batch_size == 2
    with pytest.raises(ValueError):
        random_division(8, 3, rng)
    with pytest.raises(ValueError):
        random_division(8, 1, rng)


def test_full_batch_is_identity_order():
    div = random_division(6, 6, np.random.default_rng(0))
    assert np.array_equal(div.batches, np.arange(6)[None, :])
    assert np.array_equal(random_batch(6, 6, np.random.default_rng(0)), np.arange(6))


def test_division_sequence_deterministic():
    a = [random_division(8, 2, np.random.default_rng(42)).batches for _ in range(1)]
    rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
    seq1 = [random_division(8, 2, rng1).batches for _ in range(10)]
    seq2 = [random_division(8, 2, rng2).batches for _ in range(10)]
    for b1, b2 in zip(seq1, seq2):
        assert np.array_equal(b1, b2)


def test_division_uniformity_p4():
    # the 3 unordered pairings of 4 particles appear with frequency 1/3
    rng = np.random.default_rng(1)
    counts = {}
    draws = 100_000
    for _ in range(draws):
        div = random_division(4, 2, rng)
        key = frozenset(frozenset(batch) for batch in div.batches.tolist())
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 3
    se = np.sqrt((1 / 3) * (2 / 3) / draws)
    for key, cnt in counts.items():
        assert abs(cnt / draws - 1 / 3) < 5 * se


def test_partition_validity_many_draws():
    rng = np.random.default_rng(2)
    for _ in range(10_000):
        div = random_division(12, 3, rng)
        flat = np.sort(div.batches.ravel())
        assert np.array_equal(flat, np.arange(12))


def test_batch_force_full_batch_equals_exact_bitwise():
    spec = spec_for(4, 4)
    q = random_q(spec)
    div = random_division(4, 4, np.random.default_rng(0))
    assert np.array_equal(batch_force(spec, q, div), full_interaction_force(spec, q))


@pytest.mark.parametrize("n_particles", [4, 6])
def test_batch_force_unbiased_by_enumeration(n_particles):
    spec = spec_for(n_particles, 2)
    q = random_q(spec, seed=3)
    exact = full_interaction_force(spec, q)
    divisions = enumerate_divisions(n_particles, 2)
    acc = np.zeros_like(exact)
    for blocks in divisions:
        acc += batch_force(spec, q, Division(np.array(blocks)))
    avg = acc / len(divisions)
    assert np.max(np.abs(avg - exact)) < 1e-12 * max(1.0, np.max(np.abs(exact)))


def test_batch_force_pair_eval_count():
    spec = spec_for(16, 2, n_beads=16)
    q = random_q(spec, seed=4, )
    counter = PairEvalCounter()
    batch_force(spec, q, random_division(16, 2, np.random.default_rng(0)), counter=counter)
    assert counter.pairs == 16 * 16 // 2 * (2 - 1)  # 128
    counter_full = PairEvalCounter()
    full_interaction_force(spec, q, counter=counter_full)
    assert counter_full.pairs == 16 * 16 * 15 // 2  # 1920


def test_batch_force_linearity_in_potential():
    q = random_q(spec_for(4, 2), seed=5)
    div = random_division(4, 2, np.random.default_rng(1))
    f1 = batch_force(spec_for(4, 2, kappa=1.0), q, div)
    f2 = batch_force(spec_for(4, 2, kappa=2.0), q, div)
    assert np.max(np.abs(f2 - 2.0 * f1)) < 1e-12


def test_pairwise_observable_full_batch_equals_exact():
    spec = spec_for(4, 4)
    q = random_q(spec, seed=6)
    a = coulomb_pair_observable(1.0)
    exact = weight_position(q, a)
    batch_val = rbm_pairwise_observable(a, q, np.arange(4))
    assert batch_val == pytest.approx(exact, rel=1e-14)


def test_pairwise_observable_unbiased_over_batches():
    spec = spec_for(4, 2)
    q = random_q(spec, seed=7)
    a = coulomb_pair_observable(1.0)
    exact = weight_position(q, a)
    subsets = list(combinations(range(4), 2))
    est = np.mean([rbm_pairwise_observable(a, q, np.array(s)) for s in subsets])
    assert est == pytest.approx(exact, rel=1e-12)


def test_pairwise_observable_constant_kernel():
    # a == 1 collapses to (P-1)/2 regardless of configuration
    spec = spec_for(6, 3)
    q = random_q(spec, seed=8)
    one = lambda diff: np.ones(diff.shape[:-1])
    batch = np.array([0, 2, 5])
    assert rbm_pairwise_observable(one, q, batch) == pytest.approx((6 - 1) / 2)


def test_virial_gradient_full_batch_equals_exact():
    spec = spec_for(4, 4)
    q = random_q(spec, seed=9)
    div = random_division(4, 4, np.random.default_rng(0))
    assert rbm_virial_gradient(spec, q, div) == pytest.approx(
        weight_virial(spec, q), rel=1e-14
    )


def test_virial_gradient_unbiased_by_enumeration():
    spec = spec_for(4, 2)
    q = random_q(spec, seed=10)
    exact = weight_virial(spec, q)
    divisions = enumerate_divisions(4, 2)
    vals = [rbm_virial_gradient(spec, q, Division(np.array(b))) for b in divisions]
    assert np.mean(vals) == pytest.approx(exact, rel=1e-12)


def test_virial_gradient_identical_beads():
    spec = spec_for(4, 2)
    bead = 2.0 * np.random.default_rng(11).standard_normal((1, 4, 3))
    q = np.tile(bead, (spec.n_beads, 1, 1))
    div = random_division(4, 2, np.random.default_rng(2))
    assert rbm_virial_gradient(spec, q, div) == pytest.approx(3 * 4 / (2 * 4.0))
