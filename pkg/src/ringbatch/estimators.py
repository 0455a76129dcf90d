"""Weight functions, running time averages, and statistical diagnostics.

Two weight families feed the thermal-average estimate: bead-averaged
pairwise-sum observables and the kinetic-energy (virial-form) weight.  Both
have exact and random-batch variants; the batch variants are unbiased and
are exercised against enumeration in the tests.

Diagnostics: normalized empirical autocorrelation with an integrated
autocorrelation time (truncated at the first negative coefficient), the
effective variance of a time average (sample variance * tau / T — the
integrated-AC-time inflation of the naive i.i.d. variance), ensemble weak
error between two force strategies, and a histogram relative-entropy
estimate between sample sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .potentials import R_MIN, SingularityError
from .rbm import random_batch, rbm_pairwise_observable, rbm_virial_gradient
from .system import (
    PhaseState,
    SystemSpec,
    full_interaction_force,
    init_state,
    virial_weight_from_gradient,
)

__all__ = [
    "coulomb_pair_observable",
    "gaussian_pair_observable",
    "weight_position",
    "weight_virial",
    "RunningStats",
    "AutocorrResult",
    "autocorrelation",
    "weak_error_ensemble",
    "relative_entropy_1d",
]


def coulomb_pair_observable(kappa: float = 1.0):
    """a(d) = kappa / |d|, the average-interaction observable kernel."""

    def a(diff):
        r = np.linalg.norm(diff, axis=-1)
        if np.min(r) < R_MIN:
            raise SingularityError("coincident pair in observable evaluation")
        return kappa / r

    return a


def gaussian_pair_observable(theta: float = 0.1):
    """a(d) = exp(-theta |d|^2), a bounded pair observable kernel."""

    def a(diff):
        return np.exp(-theta * np.sum(np.square(diff), axis=-1))

    return a


def weight_position(
    q: np.ndarray,
    a,
    mode: str = "exact",
    batch: np.ndarray | None = None,
) -> float:
    """Bead-averaged pairwise observable weight.

    Exact mode computes (1/N) sum_k (1/P) sum_{i<j} a(q_k^i - q_k^j); batch
    mode delegates to the unbiased single-batch estimator.  A full batch is
    routed through the exact path so the degenerate case is bit-identical.
    """
    n, p = q.shape[0], q.shape[1]
    if mode == "rbm":
        if batch is None:
            raise ValueError("rbm mode requires a batch of particle indices")
        if np.asarray(batch).size < p:
            return rbm_pairwise_observable(a, q, batch)
        mode = "exact"
    if mode != "exact":
        raise ValueError(f"unknown weight mode {mode!r}")
    if p == 1:
        return 0.0
    iu, ju = np.triu_indices(p, k=1)
    vals = a(q[:, iu, :] - q[:, ju, :])
    return float(np.sum(vals) / (n * p))


def weight_virial(
    spec: SystemSpec,
    q: np.ndarray,
    mode: str = "exact",
    division=None,
    gradient: np.ndarray | None = None,
) -> float:
    """Kinetic-energy weight, exact or with a batch-approximated gradient.

    Assumes the regularization constant matches the harmonic well strength
    (the rewritten virial form relies on it).  ``gradient`` short-circuits
    the force evaluation when the caller already holds the field at ``q``.
    """
    if abs(spec.alpha - spec.external.alpha0) > 1e-12 * max(1.0, spec.alpha):
        raise ValueError("virial weight requires alpha to match the harmonic well strength")
    if gradient is not None:
        return virial_weight_from_gradient(spec, q, gradient)
    if mode == "exact":
        return virial_weight_from_gradient(spec, q, full_interaction_force(spec, q))
    if mode == "rbm":
        if division is None:
            raise ValueError("rbm mode requires a division")
        return rbm_virial_gradient(spec, q, division)
    raise ValueError(f"unknown weight mode {mode!r}")


@dataclass
class RunningStats:
    """Streaming time average with burn-in exclusion and a retained series.

    ``update`` streams (t, w) pairs; samples with t < burn_in are counted
    but excluded from the mean and the retained series.  ``series_stride``
    keeps every s-th retained sample for autocorrelation work.
    """

    burn_in: float = 0.0
    series_stride: int = 1
    count: int = 0
    retained: int = 0
    _sum: float = 0.0
    series: list = field(default_factory=list)

    def update(self, t: float, w: float) -> None:
        self.count += 1
        if t < self.burn_in:
            return
        self.retained += 1
        self._sum += w
        if (self.retained - 1) % self.series_stride == 0:
            self.series.append(w)

    @property
    def mean(self) -> float:
        return self._sum / self.retained if self.retained else float("nan")

    def series_array(self) -> np.ndarray:
        return np.asarray(self.series)


@dataclass
class AutocorrResult:
    acf: np.ndarray
    ac_time: float          # integrated autocorrelation time (time units)
    eff_variance: float     # variance of the time average over the run


def autocorrelation(series, dt_sample: float, max_lag: int | None = None) -> AutocorrResult:
    """Normalized empirical autocorrelation and derived estimator quality.

    Integrated AC time tau = dt * (1 + 2 sum rho_l), with the sum truncated
    at the first negative coefficient.  The effective variance of the time
    average is var(series) * tau / T with T the series' time span.  A
    constant series has no meaningful ACF and is rejected.
    """
    x = np.asarray(series, dtype=float)
    j = x.size
    if max_lag is None:
        max_lag = min(j // 2, 2000)
    if j < 8 or max_lag < 1:
        raise ValueError("series too short for autocorrelation analysis")
    x = x - x.mean()
    c0 = float(np.dot(x, x)) / j
    if c0 == 0.0:
        raise ValueError("degenerate constant series: autocorrelation undefined")
    acf = np.empty(max_lag + 1)
    acf[0] = 1.0
    for lag in range(1, max_lag + 1):
        acf[lag] = float(np.dot(x[:-lag], x[lag:])) / j / c0
    neg = np.nonzero(acf[1:] < 0.0)[0]
    cutoff = int(neg[0]) + 1 if neg.size else max_lag + 1
    tau = dt_sample * (1.0 + 2.0 * float(np.sum(acf[1:cutoff])))
    total_time = j * dt_sample
    eff_var = c0 * tau / total_time
    return AutocorrResult(acf=acf, ac_time=tau, eff_variance=eff_var)


def _weak_worker(args) -> np.ndarray:
    """One trajectory of the weak-error ensemble (top level: picklable)."""
    from .dynamics import RngStreams, exact_step, rbm_step

    spec, method, tid, master_seed, t_grid = args
    t_grid = np.asarray(t_grid, dtype=float)
    steps_at = np.rint(t_grid / spec.dt).astype(int)
    n_steps = int(steps_at.max())
    mark = dict(zip(steps_at.tolist(), range(steps_at.size)))

    streams = RngStreams(master_seed, tid)
    state = init_state(spec, streams.init)
    vals = np.empty(t_grid.size)
    if 0 in mark:
        vals[mark[0]] = weight_virial(spec, state.q)
    for j in range(1, n_steps + 1):
        if method == "pmmLang":
            out = exact_step(spec, state, streams)
        elif method == "pmmLang+RBM":
            out = rbm_step(spec, state, streams)
        else:
            raise ValueError(f"unsupported method {method!r}")
        state = out.state
        if j in mark:
            vals[mark[j]] = weight_virial(spec, state.q)
    return vals


def weak_error_ensemble(
    spec: SystemSpec,
    n_traj: int,
    t_grid,
    master_seed: int,
    method_a: str = "pmmLang",
    method_b: str = "pmmLang+RBM",
    independent: bool = True,
    executor_map=None,
) -> dict:
    """Ensemble means of the kinetic-energy weight under two strategies.

    Runs ``n_traj`` independent trajectories per method and evaluates the
    exact weight at each grid time.  With ``independent=False`` both methods
    reuse the same per-trajectory streams (useful for degenerate checks
    where the two strategies coincide path by path).  ``executor_map``
    optionally replaces the builtin map for worker-pool fan-out; results are
    assembled in trajectory-id order either way.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    fan_out = executor_map if executor_map is not None else map
    offset = n_traj if independent else 0
    jobs_a = [(spec, method_a, tid, master_seed, t_grid) for tid in range(n_traj)]
    jobs_b = [(spec, method_b, offset + tid, master_seed, t_grid) for tid in range(n_traj)]
    w_a = np.stack(list(fan_out(_weak_worker, jobs_a)))
    w_b = np.stack(list(fan_out(_weak_worker, jobs_b)))
    mean_a, mean_b = w_a.mean(axis=0), w_b.mean(axis=0)
    stderr = np.sqrt(w_a.var(axis=0, ddof=1) / n_traj + w_b.var(axis=0, ddof=1) / n_traj)
    return {
        "t": t_grid,
        "mean_a": mean_a,
        "mean_b": mean_b,
        "diff": mean_b - mean_a,
        "stderr": stderr,
    }


def relative_entropy_1d(samples, reference_samples, n_bins: int = 100) -> float:
    """Histogram relative entropy D(samples || reference) on common bins.

    Bins span the reference range.  Empty reference bins receive an additive
    floor eps = 1 / (10 * reference count) so the ratio stays finite;
    occupied bins are untouched, so identical sample sets give exactly zero.
    Sample mass outside the reference range is dropped (documented caveat of
    the desk-scale estimator).
    """
    ref = np.asarray(reference_samples, dtype=float)
    if ref.size == 0:
        raise ValueError("reference sample set is empty")
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("sample set is empty")
    edges = np.histogram_bin_edges(ref, bins=n_bins)
    p_counts, _ = np.histogram(x, bins=edges)
    ref_counts, _ = np.histogram(ref, bins=edges)
    p_hat = p_counts / x.size
    pi_hat = ref_counts / ref.size
    eps = 1.0 / (10.0 * ref.size)
    pi_hat = np.where(pi_hat > 0.0, pi_hat, eps)
    mask = p_hat > 0.0
    return float(np.sum(p_hat[mask] * np.log(p_hat[mask] / pi_hat[mask])))
