import numpy as np
import pytest

from ringbatch.oracle import dense_ring
from ringbatch.ring_operator import RingOperator, build_ring_operator


def test_eigenvalues_n4_match_dense():
    op = build_ring_operator(4, 1.0, 4.0, 0.0)
    dense = dense_ring(4, 1.0, 4.0, 0.0)
    assert np.allclose(sorted(op.eigenvalues), [0.0, 2.0, 2.0, 4.0], atol=1e-12)
    assert np.allclose(sorted(op.eigenvalues), dense.eigenvalues, atol=1e-12)


@pytest.mark.parametrize("n", [4, 8, 16])
def test_closed_form_spectrum_vs_dense(n):
    op = build_ring_operator(n, 1.3, 2.7, 0.0)
    dense = dense_ring(n, 1.3, 2.7, 0.0)
    lam_max = np.max(op.eigenvalues)
    assert np.max(np.abs(np.sort(op.eigenvalues) - dense.eigenvalues)) < 1e-10 * lam_max


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_constant_vector_is_null_direction(n):
    op = build_ring_operator(n, 1.0, 4.0, 0.0)
    x = np.ones((n, 2))
    assert np.max(np.abs(op.apply(x))) < 1e-12


def test_condition_number_nonzero_modes():
    op = build_ring_operator(32, 1.0, 4.0, 0.0)
    expected = 1.0 / np.sin(np.pi / 32) ** 2
    assert op.nonzero_mode_condition() == pytest.approx(expected, rel=1e-12)
    # the frequency-ratio convention is the square root of the eigenvalue ratio
    assert np.sqrt(op.nonzero_mode_condition()) == pytest.approx(
        1.0 / np.sin(np.pi / 32), rel=1e-12
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n_beads=3),
        dict(n_beads=2),
        dict(n_beads=5),
        dict(mass=0.0),
        dict(mass=-1.0),
        dict(beta=0.0),
        dict(alpha=-0.1),
    ],
)
def test_build_rejects_bad_parameters(kwargs):
    base = dict(n_beads=4, mass=1.0, beta=4.0, alpha=0.5)
    base.update(kwargs)
    with pytest.raises(ValueError):
        RingOperator(**base)


def test_apply_constant_column_alpha_only():
    op = build_ring_operator(8, 1.0, 4.0, 0.5)
    x = np.full((8, 3), 1.7)
    assert np.allclose(op.apply(x), 0.5 * x, atol=1e-13)


def test_apply_basis_vector_first_column():
    # m=1, beta=4 over N=4 beads gives beta_n=1 and first column (2,-1,0,-1)
    op = build_ring_operator(4, 1.0, 4.0, 0.0)
    e1 = np.zeros((4, 1))
    e1[0, 0] = 1.0
    assert np.allclose(op.apply(e1).ravel(), [2.0, -1.0, 0.0, -1.0], atol=1e-12)


def test_apply_then_solve_roundtrip():
    rng = np.random.default_rng(0)
    op = build_ring_operator(16, 1.0, 4.0, 0.3)
    x = rng.standard_normal((16, 5))
    back = op.solve(op.apply(x))
    assert np.max(np.abs(back - x)) < 1e-10 * np.max(np.abs(x))


def test_apply_is_linear():
    rng = np.random.default_rng(1)
    op = build_ring_operator(8, 2.0, 3.0, 0.2)
    x, y = rng.standard_normal((2, 8, 4))
    a, b = 0.37, -1.21
    lhs = op.apply(a * x + b * y)
    rhs = a * op.apply(x) + b * op.apply(y)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_apply_dimension_mismatch():
    op = build_ring_operator(4, 1.0, 4.0, 0.1)
    with pytest.raises(ValueError):
        op.apply(np.zeros((6, 2)))


def test_solve_requires_alpha():
    op = build_ring_operator(4, 1.0, 4.0, 0.0)
    with pytest.raises(ValueError):
        op.solve(np.zeros((4, 1)))
    with pytest.raises(ValueError):
        op.sqrt_inverse_apply(np.zeros((4, 1)))
    with pytest.raises(ValueError):
        op.sample_gaussian(1, np.random.default_rng(0))


def test_solve_constant_column():
    op = build_ring_operator(8, 1.0, 4.0, 0.25)
    b = np.full((8, 2), 3.0)
    assert np.allclose(op.solve(b), b / 0.25, atol=1e-12)


def test_solve_matches_dense_lu():
    rng = np.random.default_rng(2)
    op = build_ring_operator(4, 1.0, 4.0, 0.6)
    dense = dense_ring(4, 1.0, 4.0, 0.6)
    b = rng.standard_normal((4, 3))
    assert np.max(np.abs(op.solve(b) - dense.solve(b))) < 1e-12


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_spectral_tridiagonal_dense_agree_pairwise(n):
    rng = np.random.default_rng(n)
    op = build_ring_operator(n, 1.1, 3.9, 0.45)
    dense = dense_ring(n, 1.1, 3.9, 0.45)
    for _ in range(100):
        x = rng.standard_normal((n, 2))
        a_spec = op.apply(x)
        a_dense = dense.regularized @ x
        assert np.max(np.abs(a_spec - a_dense)) < 1e-9 * max(1.0, np.max(np.abs(a_dense)))
        s_spec = op.solve(x)
        s_tri = op.solve(x, method="tridiagonal")
        s_dense = dense.solve(x)
        scale = max(1.0, np.max(np.abs(s_dense)))
        assert np.max(np.abs(s_spec - s_tri)) < 1e-9 * scale
        assert np.max(np.abs(s_spec - s_dense)) < 1e-9 * scale
        assert np.max(np.abs(s_tri - s_dense)) < 1e-9 * scale


def test_sqrt_inverse_twice_equals_solve():
    rng = np.random.default_rng(3)
    op = build_ring_operator(8, 1.0, 4.0, 0.7)
    x = rng.standard_normal((8, 3))
    twice = op.sqrt_inverse_apply(op.sqrt_inverse_apply(x))
    assert np.max(np.abs(twice - op.solve(x))) < 1e-11


def test_sqrt_inverse_constant_column():
    op = build_ring_operator(4, 1.0, 4.0, 0.16)
    x = np.full((4, 1), 2.0)
    assert np.allclose(op.sqrt_inverse_apply(x), x / 0.4, atol=1e-12)


def test_sqrt_inverse_matches_dense_oracle():
    rng = np.random.default_rng(4)
    op = build_ring_operator(4, 1.0, 4.0, 0.35)
    dense = dense_ring(4, 1.0, 4.0, 0.35)
    x = rng.standard_normal((4, 6))
    assert np.max(np.abs(op.sqrt_inverse_apply(x) - dense.inv_sqrt @ x)) < 1e-9


def test_sample_gaussian_deterministic():
    op = build_ring_operator(8, 1.0, 4.0, 0.3)
    a = op.sample_gaussian(4, np.random.default_rng(123))
    b = op.sample_gaussian(4, np.random.default_rng(123))
    assert np.array_equal(a, b)


def test_sample_gaussian_equals_filtered_normals():
    op = build_ring_operator(8, 1.0, 4.0, 0.3)
    a = op.sample_gaussian(4, np.random.default_rng(5))
    xi = np.random.default_rng(5).standard_normal((8, 4))
    assert np.array_equal(a, op.sqrt_inverse_apply(xi))


def test_sample_gaussian_moments():
    n, draws = 4, 100_000
    op = build_ring_operator(n, 1.0, 4.0, 0.5)
    dense = dense_ring(n, 1.0, 4.0, 0.5)
    samples = op.sample_gaussian(3 * draws, np.random.default_rng(6))
    cols = samples.reshape(n, -1)
    m = cols.shape[1]

    mean = cols.mean(axis=1)
    se_mean = np.sqrt(np.diag(dense.inverse) / m)
    assert np.all(np.abs(mean) < 5 * se_mean)

    emp_cov = (cols @ cols.T) / m
    target = dense.inverse
    se_cov = np.sqrt(
        (np.outer(np.diag(target), np.diag(target)) + target**2) / m
    )
    assert np.all(np.abs(emp_cov - target) < 5 * se_cov)


def test_eigenbasis_transform_matches_dense_convention():
    for n in (4, 8):
        op = build_ring_operator(n, 1.0, 4.0, 0.2)
        dense = dense_ring(n, 1.0, 4.0, 0.2)
        eye = np.eye(n)
        assert np.max(np.abs(op.from_eigenbasis(eye) - dense.transform)) < 1e-12
        assert np.max(np.abs(op.to_eigenbasis(eye) - dense.transform.T)) < 1e-12
        # orthogonality and eigen-decomposition consistency
        d = dense.transform
        assert np.max(np.abs(d.T @ d - eye)) < 1e-12
        recon = d @ np.diag(op.eigenvalues) @ d.T
        assert np.max(np.abs(recon - dense.matrix)) < 1e-10
