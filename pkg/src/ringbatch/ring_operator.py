"""Cyclic second-difference ("ring") operator and its regularized algebra.

The operator acting along the bead axis of an N x d grid is

    K_alpha = (m / beta_n^2) * (2 I - S - S^T) + alpha I,

where S is the cyclic shift.  K_0 is the harmonic-spring stiffness of a
closed N-bead chain; its nullspace is the constant vector.  For even N the
spectrum is known in closed form: 0 and 4m/beta_n^2 are simple, and
(4m/beta_n^2) sin^2(pi k / N) for k = 1..N/2-1 each appear twice, with a
cosine/sine eigenvector pair.

All fast-path operations (apply, solve, inverse square root, Gaussian
sampling) act in this trigonometric eigenbasis through numpy's rfft/irfft,
costing O(N log N) per column.  A cyclic-tridiagonal direct solve (Thomas
sweep plus a rank-one corner correction) is kept as an independent O(N)
path and cross-checked in the tests.

Instances are immutable after construction and safe to share between
concurrent workers; random sampling takes the caller's RNG.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded

__all__ = ["RingOperator", "build_ring_operator"]


class RingOperator:
    """Spectral realization of K_alpha = L + alpha*I on N x ... grids.

    Attributes:
        n_beads: number of beads N (even, >= 4).
        mass: physical mass m > 0.
        beta_n: imaginary-time slice beta / N.
        alpha: regularization constant (>= 0; must be > 0 for solves).
        eigenvalues: the N eigenvalues of L in paired order
            [0, l_1, l_1, l_2, l_2, ..., l_{N/2-1}, l_{N/2-1}, 4m/beta_n^2].
    """

    def __init__(self, n_beads: int, mass: float, beta: float, alpha: float):
        if n_beads != int(n_beads) or n_beads < 4 or n_beads % 2 != 0:
            raise ValueError(f"n_beads must be an even integer >= 4, got {n_beads}")
        if mass <= 0 or beta <= 0:
            raise ValueError("mass and beta must be positive")
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.n_beads = int(n_beads)
        self.mass = float(mass)
        self.beta_n = float(beta) / self.n_beads
        self.alpha = float(alpha)

        n = self.n_beads
        scale = 4.0 * self.mass / self.beta_n**2
        # circulant eigenvalues on the rfft half-spectrum, f = 0 .. N/2
        freqs = np.arange(n // 2 + 1)
        self._lam_half = scale * np.sin(np.pi * freqs / n) ** 2
        self._lam_half[0] = 0.0

        pairs = scale * np.sin(np.pi * np.arange(1, n // 2) / n) ** 2
        eig = np.empty(n)
        eig[0] = 0.0
        eig[1:-1:2] = pairs
        eig[2:-1:2] = pairs
        eig[-1] = scale
        self.eigenvalues = eig
        self.eigenvalues.flags.writeable = False

    # -- spectral filters ------------------------------------------------

    def _filtered(self, x: np.ndarray, filt: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n_beads:
            raise ValueError(
                f"leading axis must have {self.n_beads} rows, got {x.shape[0]}"
            )
        spec = np.fft.rfft(x, axis=0)
        spec *= filt.reshape((-1,) + (1,) * (x.ndim - 1))
        return np.fft.irfft(spec, n=self.n_beads, axis=0)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return (L + alpha*I) x, columns independent."""
        return self._filtered(x, self._lam_half + self.alpha)

    def solve(self, b: np.ndarray, method: str = "spectral") -> np.ndarray:
        """Return (L + alpha*I)^{-1} b.

        ``method`` selects the spectral path (default; shares machinery with
        sampling) or the cyclic-tridiagonal direct path.  Both require
        alpha > 0 since L alone is singular.
        """
        self._require_regularized("solve")
        if method == "spectral":
            return self._filtered(b, 1.0 / (self._lam_half + self.alpha))
        if method == "tridiagonal":
            return self._solve_cyclic_tridiagonal(b)
        raise ValueError(f"unknown solve method {method!r}")

    def sqrt_inverse_apply(self, x: np.ndarray) -> np.ndarray:
        """Return (L + alpha*I)^{-1/2} x via spectral scaling."""
        self._require_regularized("sqrt_inverse_apply")
        return self._filtered(x, (self._lam_half + self.alpha) ** -0.5)

    def sample_gaussian(self, d: int, rng: np.random.Generator) -> np.ndarray:
        """Draw an N x d grid whose columns are ~ N(0, (L + alpha*I)^{-1}).

        Equivalent (bit for bit) to sqrt_inverse_apply on standard normals.
        """
        self._require_regularized("sample_gaussian")
        return self.sqrt_inverse_apply(rng.standard_normal((self.n_beads, d)))

    def _require_regularized(self, op: str) -> None:
        if self.alpha <= 0:
            raise ValueError(f"{op} requires alpha > 0 (L alone is singular)")

    # -- eigenbasis transforms -------------------------------------------

    def to_eigenbasis(self, x: np.ndarray) -> np.ndarray:
        """Coefficients of x in the orthonormal cos/sin eigenbasis.

        Coefficient order matches ``eigenvalues``: index 0 is the constant
        mode, indices 2k-1 / 2k are the cosine / sine modes of frequency k,
        index N-1 is the alternating mode.
        """
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n_beads:
            raise ValueError("leading axis mismatch")
        n = self.n_beads
        spec = np.fft.rfft(x, axis=0)
        c = np.empty_like(x)
        c[0] = spec[0].real / np.sqrt(n)
        c[-1] = spec[n // 2].real / np.sqrt(n)
        c[1:-1:2] = np.sqrt(2.0 / n) * spec[1 : n // 2].real
        c[2:-1:2] = -np.sqrt(2.0 / n) * spec[1 : n // 2].imag
        return c

    def from_eigenbasis(self, c: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`to_eigenbasis` (the orthogonal map D)."""
        c = np.asarray(c, dtype=float)
        if c.shape[0] != self.n_beads:
            raise ValueError("leading axis mismatch")
        n = self.n_beads
        spec = np.zeros((n // 2 + 1,) + c.shape[1:], dtype=complex)
        spec[0] = np.sqrt(n) * c[0]
        spec[n // 2] = np.sqrt(n) * c[-1]
        spec[1 : n // 2] = np.sqrt(n / 2.0) * (c[1:-1:2] - 1j * c[2:-1:2])
        return np.fft.irfft(spec, n=n, axis=0)

    # -- diagnostics ------------------------------------------------------

    def nonzero_mode_condition(self) -> float:
        """lambda_max / lambda_min over the nonzero modes of L.

        Equals 1/sin^2(pi/N).  The square root of this ratio,
        1/sin(pi/N), is the corresponding ratio of mode frequencies
        sqrt(lambda); condition-number statements phrased in terms of
        frequencies differ from this eigenvalue ratio by that square root.
        """
        return 1.0 / np.sin(np.pi / self.n_beads) ** 2

    # -- direct cyclic-tridiagonal solve ----------------------------------

    def _solve_cyclic_tridiagonal(self, b: np.ndarray) -> np.ndarray:
        """Thomas-style banded solve with a Sherman-Morrison corner fix."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n_beads:
            raise ValueError("leading axis mismatch")
        n = self.n_beads
        c = self.mass / self.beta_n**2
        diag = 2.0 * c + self.alpha
        # A = T + u v^T with u = (g, 0, .., 0, -c), v = (1, 0, .., 0, -c/g)
        g = -diag
        ab = np.zeros((3, n))
        ab[0, 1:] = -c
        ab[1, :] = diag
        ab[2, :-1] = -c
        ab[1, 0] = diag - g
        ab[1, -1] = diag - c * c / g

        orig_shape = b.shape
        flat = b.reshape(n, -1)
        u = np.zeros((n, 1))
        u[0, 0] = g
        u[-1, 0] = -c
        rhs = np.hstack([flat, u])
        sol = solve_banded((1, 1), ab, rhs)
        y, z = sol[:, :-1], sol[:, -1:]
        vy = y[0] + (-c / g) * y[-1]
        vz = z[0, 0] + (-c / g) * z[-1, 0]
        x = y - z * (vy / (1.0 + vz))
        return x.reshape(orig_shape)


def build_ring_operator(
    n_beads: int, mass: float, beta: float, alpha: float
) -> RingOperator:
    """Construct the ring operator for N beads at inverse temperature beta."""
    return RingOperator(n_beads, mass, beta, alpha)
