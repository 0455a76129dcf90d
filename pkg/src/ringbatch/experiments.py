"""Experiment drivers: seeded runs, CSV/JSON emission, timing reports.

Every driver is a pure function of (config, master seed): trajectory
workers draw from counter-based streams keyed by (seed, trajectory id), and
ensemble reductions happen in trajectory-id order, so outputs are identical
across reruns and worker counts.  Wall-clock columns are the one exception
and are excluded from determinism comparisons.

CSV schemas are versioned with a leading ``# schema=<name>`` line; the
downstream plotting package refuses mismatched versions.
"""

from __future__ import annotations

import dataclasses
import json
import statistics
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .dynamics import (
    RngStreams,
    coupled_run,
    exact_step,
    rbm_step,
    rbm_split_step,
    split_mc_step,
)
from .estimators import (
    RunningStats,
    autocorrelation,
    coulomb_pair_observable,
    gaussian_pair_observable,
    relative_entropy_1d,
    weak_error_ensemble,
    weight_position,
    weight_virial,
)
from .oracle import dense_ring
from .rbm import random_batch, random_division
from .ring_operator import RingOperator
from .system import SystemSpec, init_state

__all__ = [
    "run_time_average",
    "run_error_table",
    "run_strong_error",
    "run_ensemble",
    "run_rejection_table",
    "run_spectrum_check",
    "simulate_trajectory",
    "TrajectoryResult",
]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _write_csv(path: Path, schema: str, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(f"# schema={schema}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


class TrajectoryResult:
    """Aggregates one trajectory: running stats, MC counters, timings."""

    def __init__(self, stats: RunningStats):
        self.stats = stats
        self.mc_steps = 0
        self.rejected = 0
        self.step_ms: list[float] = []
        self.pair_evals_per_step: list[int] = []
        self.rows: list[tuple] = []

    @property
    def rejection_rate(self) -> float | None:
        if self.mc_steps == 0:
            return None
        return self.rejected / self.mc_steps

    def summary(self, config: ExperimentConfig, dt_sample: float) -> dict:
        series = self.stats.series_array()
        ac_time = eff_var = std_err = float("nan")
        if series.size >= 8 and np.ptp(series) > 0:
            res = autocorrelation(series, dt_sample)
            ac_time, eff_var = res.ac_time, res.eff_variance
            std_err = float(np.sqrt(eff_var))
        return {
            "preset": config.name,
            "seed": config.seed,
            "method": config.method,
            "mean": self.stats.mean,
            "std_err": std_err,
            "ac_time": ac_time,
            "eff_variance": eff_var,
            "rejection_rate": self.rejection_rate,
            "pair_evals_per_step": (
                int(statistics.median(self.pair_evals_per_step))
                if self.pair_evals_per_step
                else 0
            ),
            "wall_ms_per_step": (
                statistics.median(self.step_ms) if self.step_ms else float("nan")
            ),
        }


def _make_stepper(config: ExperimentConfig, spec: SystemSpec, streams: RngStreams):
    method = config.method
    if method == "pmmLang":
        return lambda state, u2: exact_step(spec, state, streams)
    if method == "pmmLang+RBM":
        return lambda state, u2: rbm_step(spec, state, streams)
    if method == "pmmLang+split":
        return lambda state, u2: split_mc_step(spec, state, streams, u2_current=u2)
    if method == "pmmLang+RBM+split":
        return lambda state, u2: rbm_split_step(spec, state, streams, u2_current=u2)
    raise ConfigError(f"method: unsupported method {method!r}")


def _make_weight_fn(config: ExperimentConfig, spec: SystemSpec, streams: RngStreams):
    """Weight evaluator fn(q, outcome) honoring the batch-weight switch.

    With the batch weight enabled, the kinetic weight reuses the step's
    trailing batch-force field (same division, no extra force evaluation)
    and pairwise observables draw one fresh batch per recorded sample.
    """
    use_batch = config.uses_rbm() and config.rbm_weight
    if config.observable == "kinetic_virial":
        if use_batch:
            def w(q, outcome):
                if outcome is not None and outcome.trailing_force is not None:
                    return weight_virial(spec, q, gradient=outcome.trailing_force)
                division = random_division(spec.n_particles, spec.batch_size, streams.weight)
                return weight_virial(spec, q, mode="rbm", division=division)

            return w
        if config.method == "pmmLang":
            def w_exact(q, outcome):
                # the trailing force of an exact step is the exact field at q
                if outcome is not None and outcome.trailing_force is not None:
                    return weight_virial(spec, q, gradient=outcome.trailing_force)
                return weight_virial(spec, q)

            return w_exact
        return lambda q, outcome: weight_virial(spec, q)
    if config.observable == "coulomb_pair_avg":
        a = coulomb_pair_observable(config.kappa)
    elif config.observable == "gaussian_pair_avg":
        a = gaussian_pair_observable(config.theta)
    else:
        raise ConfigError(f"observable: unsupported observable {config.observable!r}")
    if use_batch:
        return lambda q, outcome: weight_position(
            q, a, mode="rbm",
            batch=random_batch(spec.n_particles, spec.batch_size, streams.weight),
        )
    return lambda q, outcome: weight_position(q, a)


def simulate_trajectory(
    config: ExperimentConfig,
    trajectory_id: int = 0,
    spec: SystemSpec | None = None,
    emit_row=None,
) -> TrajectoryResult:
    """Advance one seeded trajectory, streaming recorded rows via emit_row."""
    spec = spec if spec is not None else config.system_spec()
    streams = RngStreams(config.seed, trajectory_id)
    stepper = _make_stepper(config, spec, streams)
    weight_fn = _make_weight_fn(config, spec, streams)

    state = init_state(spec, streams.init)
    result = TrajectoryResult(RunningStats(burn_in=config.burn_in))
    n_steps = int(round(config.total_time / spec.dt))
    u2 = None
    for j in range(1, n_steps + 1):
        outcome = stepper(state, u2)
        state = outcome.state
        u2 = outcome.u2_value
        result.step_ms.append(outcome.elapsed * 1e3)
        result.pair_evals_per_step.append(outcome.pair_evals)
        if outcome.accepted is not None:
            result.mc_steps += 1
            if not outcome.accepted:
                result.rejected += 1
        if j % config.record_stride == 0:
            t = j * spec.dt
            w = weight_fn(state.q, outcome)
            result.stats.update(t, w)
            if emit_row is not None:
                flag = "" if outcome.accepted is None else int(outcome.accepted)
                running = result.stats.mean if result.stats.retained else float("nan")
                emit_row((t, running, w, flag, outcome.pair_evals, outcome.elapsed * 1e3))
    return result


def run_time_average(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """One trajectory; writes <name>.csv (timeavg-v1), <name>_acf.csv, <name>.json."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows: list[tuple] = []
    result = simulate_trajectory(config, emit_row=rows.append)
    _write_csv(
        out_dir / f"{config.name}.csv",
        "timeavg-v1",
        ["t", "running_average", "instantaneous_weight", "acceptance_flag", "pair_evals", "wall_ms"],
        rows,
    )
    dt_sample = config.dt * config.record_stride
    series = result.stats.series_array()
    if series.size >= 8 and np.ptp(series) > 0:
        acf = autocorrelation(series, dt_sample).acf
        _write_csv(
            out_dir / f"{config.name}_acf.csv",
            "acf-v1",
            ["lag_time", "acf"],
            [(lag * dt_sample, val) for lag, val in enumerate(acf)],
        )
    summary = result.summary(config, dt_sample)
    with open(out_dir / f"{config.name}.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def _base_method(config: ExperimentConfig) -> tuple[str, str]:
    if "split" in config.method:
        return "pmmLang+split", "pmmLang+RBM+split"
    return "pmmLang", "pmmLang+RBM"


def run_error_table(config: ExperimentConfig, out_dir: str | Path) -> list[dict]:
    """Relative errors against an exact-method reference at the finest step.

    The reference trajectory (exact forces and weights, dt = reference_dt)
    runs first; each (dt, method) cell then runs one trajectory and reports
    |mean - ref| / |ref|.  A soft monotonicity check warns when the larger
    batch does not improve on the smaller one within a row.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base, batched = _base_method(config)

    def run_cell(method: str, dt: float, p: int | None, tid: int) -> float:
        sub = dataclasses.replace(
            config,
            method=method,
            dt=dt,
            batch_size=p if p is not None else config.batch_size,
            name=f"{config.name}-{method}-dt{dt:g}" + (f"-p{p}" if p else ""),
        )
        sub.validate()
        return simulate_trajectory(sub, trajectory_id=tid).stats.mean

    reference = run_cell(base, config.reference_dt, None, 0)
    rows: list[dict] = []
    tid = 1
    for dt in config.dt_grid:
        cells = [(base, None)] + [(batched, p) for p in config.p_grid]
        by_p: dict[int | None, float] = {}
        for method, p in cells:
            mean = run_cell(method, dt, p, tid)
            tid += 1
            rel = abs(mean - reference) / abs(reference)
            by_p[p] = rel
            rows.append(
                {"dt": dt, "p": p, "method": method, "mean": mean,
                 "reference": reference, "rel_error": rel}
            )
        ps = sorted(p for p in by_p if p is not None)
        for small, large in zip(ps, ps[1:]):
            if by_p[large] > by_p[small]:
                print(
                    f"warning: dt={dt:g}: error at p={large} "
                    f"({by_p[large]:.3%}) exceeds p={small} ({by_p[small]:.3%}) "
                    "(single-path noise can cause this)"
                )
    _write_csv(
        out_dir / "error_table.csv",
        "errortable-v1",
        ["dt", "p", "method", "mean", "reference", "rel_error"],
        [(r["dt"], r["p"], r["method"], r["mean"], r["reference"], r["rel_error"]) for r in rows],
    )
    return rows


def strong_error_curve(
    config: ExperimentConfig, dt: float, n_replicas: int, record_time: float = 0.5
) -> tuple[np.ndarray, np.ndarray]:
    """e(t) = sqrt(mean over replicas |q_batch - q_exact|_F^2), shared noise."""
    spec = config.system_spec(dt=dt)
    stride = max(1, int(round(record_time / dt)))
    n_steps = int(round(config.total_time / dt))
    acc = None
    times = None
    for rep in range(n_replicas):
        res = coupled_run(spec, n_steps, RngStreams(config.seed, rep), record_stride=stride)
        acc = res.sq_deviation if acc is None else acc + res.sq_deviation
        times = res.times
    return times, np.sqrt(acc / n_replicas)


def run_strong_error(config: ExperimentConfig, out_dir: str | Path) -> dict:
    """Pathwise deviation curves for each timestep in the grid."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = {}
    times = None
    for dt in config.dt_grid:
        times, e = strong_error_curve(config, dt, config.n_replicas)
        curves[dt] = e
    header = ["t"] + [f"e_dt_{dt:g}" for dt in config.dt_grid]
    rows = [
        (t,) + tuple(curves[dt][i] for dt in config.dt_grid)
        for i, t in enumerate(times)
    ]
    _write_csv(out_dir / "strong_error.csv", "strong-v1", header, rows)
    return {"t": times, "curves": curves}


def _entropy_observables(state_q: np.ndarray) -> tuple[float, float]:
    # first coordinate of the first particle's first bead, and the bead-0
    # distance between the first two particles
    pos = float(state_q[0, 0, 0])
    pair = float(np.linalg.norm(state_q[0, 0] - state_q[0, 1]))
    return pos, pair


def _collect_observables(config: ExperimentConfig, method: str, total_time: float, tid: int):
    sub = dataclasses.replace(config, method=method, total_time=total_time)
    sub.validate()
    if sub.n_particles < 2:
        raise ConfigError("system.n_particles: entropy observables need >= 2 particles")
    spec = sub.system_spec()
    streams = RngStreams(sub.seed, tid)
    stepper = _make_stepper(sub, spec, streams)
    state = init_state(spec, streams.init)
    n_steps = int(round(total_time / spec.dt))
    pos = np.empty(n_steps)
    pair = np.empty(n_steps)
    u2 = None
    for j in range(n_steps):
        outcome = stepper(state, u2)
        state, u2 = outcome.state, outcome.u2_value
        pos[j], pair[j] = _entropy_observables(state.q)
    return pos, pair


def run_ensemble(config: ExperimentConfig, out_dir: str | Path, threads: int = 1) -> dict:
    """Weak-error and relative-entropy experiments for exact vs batched runs.

    Weak error: n_trajectories independent runs per method, ensemble means
    of the exact kinetic weight on the time grid, difference with standard
    errors.  Relative entropy: one long run per method, histogram divergence
    from a longer exact reference run, for a single-coordinate observable
    and the first pair distance.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    base, batched = _base_method(config)
    spec = config.system_spec()

    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            weak = weak_error_ensemble(
                spec, config.n_trajectories, config.t_grid, config.seed,
                method_a=base, method_b=batched, executor_map=pool.map,
            )
    else:
        weak = weak_error_ensemble(
            spec, config.n_trajectories, config.t_grid, config.seed,
            method_a=base, method_b=batched,
        )
    _write_csv(
        out_dir / "weak_error.csv",
        "weak-v1",
        ["t", "mean_exact", "mean_rbm", "diff", "stderr"],
        zip(weak["t"], weak["mean_a"], weak["mean_b"], weak["diff"], weak["stderr"]),
    )

    ref_pos, ref_pair = _collect_observables(
        config, base, config.entropy_reference_time, tid=900_000
    )
    checkpoints = np.unique(
        np.geomspace(
            max(10.0 * config.dt, 1.0), config.total_time, 40
        ).round(decimals=6)
    )
    entropy_rows = []
    entropy = {}
    for label, method, tid in ((base, base, 910_000), (batched, batched, 920_000)):
        pos, pair = _collect_observables(config, method, config.total_time, tid)
        d_pos, d_pair = [], []
        for t in checkpoints:
            j = max(2, int(round(t / config.dt)))
            d_pos.append(relative_entropy_1d(pos[:j], ref_pos, config.n_bins))
            d_pair.append(relative_entropy_1d(pair[:j], ref_pair, config.n_bins))
            entropy_rows.append((label, t, d_pos[-1], d_pair[-1]))
        entropy[label] = {"t": checkpoints, "d_position": np.array(d_pos), "d_pairdist": np.array(d_pair)}
    _write_csv(
        out_dir / "relative_entropy.csv",
        "entropy-v1",
        ["method", "t", "d_position", "d_pairdist"],
        entropy_rows,
    )
    return {"weak": weak, "entropy": entropy}


def run_rejection_table(config: ExperimentConfig, out_dir: str | Path) -> list[dict]:
    """Rejection rates of the Metropolis-corrected methods on a parameter grid.

    Varies the particle count (default) or the bead count via the config
    grids, across the timestep grid, for the exact-proposal method and the
    batched-proposal method at each batch size.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vary_name = "n_beads" if config.beads_grid else "n_particles"
    values = config.beads_grid if config.beads_grid else config.particles_grid
    rows: list[dict] = []
    tid = 0
    for value in values:
        for dt in config.dt_grid:
            cells = [("pmmLang+split", None)] + [
                ("pmmLang+RBM+split", p) for p in config.p_grid
            ]
            for method, p in cells:
                sub = dataclasses.replace(
                    config,
                    method=method,
                    dt=dt,
                    batch_size=p if p is not None else config.batch_size,
                    burn_in=0.0,
                    name=f"{config.name}-{vary_name}{value}-dt{dt:g}-{method}"
                    + (f"-p{p}" if p else ""),
                    **{vary_name: value},
                )
                sub.validate()
                result = simulate_trajectory(sub, trajectory_id=tid)
                tid += 1
                rows.append(
                    {
                        "vary": vary_name,
                        "value": value,
                        "dt": dt,
                        "method": method,
                        "p": p,
                        "rejection_rate": result.rejection_rate,
                        "steps": result.mc_steps,
                    }
                )
    _write_csv(
        out_dir / "rejection_table.csv",
        "rejection-v1",
        ["vary", "value", "dt", "method", "p", "rejection_rate", "steps"],
        [
            (r["vary"], r["value"], r["dt"], r["method"], r["p"], r["rejection_rate"], r["steps"])
            for r in rows
        ],
    )
    return rows


def run_spectrum_check(
    n_beads: int, mass: float, beta: float, alpha: float, out_dir: str | Path | None = None
) -> list[dict]:
    """Closed-form vs dense eigenvalues plus a solve cross-check."""
    op = RingOperator(n_beads, mass, beta, alpha)
    dense = dense_ring(n_beads, mass, beta, alpha)
    closed = np.sort(op.eigenvalues)
    rows = [
        {"k": k, "closed_form": closed[k], "dense": dense.eigenvalues[k],
         "abs_diff": abs(closed[k] - dense.eigenvalues[k])}
        for k in range(n_beads)
    ]
    rng = np.random.default_rng(0)
    b = rng.standard_normal((n_beads, 3))
    if alpha > 0:
        spectral = op.solve(b)
        direct = op.solve(b, method="tridiagonal")
        dense_sol = dense.solve(b)
        resid = max(
            float(np.max(np.abs(spectral - dense_sol))),
            float(np.max(np.abs(direct - dense_sol))),
        )
        print(f"solve cross-check max abs residual vs dense: {resid:.3e}")
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _write_csv(
            out_dir / "spectrum.csv",
            "spectrum-v1",
            ["k", "closed_form", "dense", "abs_diff"],
            [(r["k"], r["closed_form"], r["dense"], r["abs_diff"]) for r in rows],
        )
    return rows
