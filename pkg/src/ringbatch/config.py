"""Experiment configuration: flat dotted-key text files and validation.

Config files are plain text, one ``key = value`` per line, ``#`` comments.
Floats accept fraction syntax ("1/16"); grids accept comma lists of such
values; time grids accept "start:stop:step".  Every experiment from the
study ships as a named preset file under ``ringbatch/presets``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .potentials import Coulomb, MixedCLJ, NoInteraction, default_well_strength
from .system import SystemSpec

__all__ = ["ConfigError", "ExperimentConfig", "parse_config_text", "load_config", "preset_names"]

METHODS = ("pmmLang", "pmmLang+RBM", "pmmLang+split", "pmmLang+RBM+split")
OBSERVABLES = ("kinetic_virial", "coulomb_pair_avg", "gaussian_pair_avg")
POTENTIALS = ("coulomb", "mixed", "none")


class ConfigError(ValueError):
    """Configuration problem; message names the offending field."""


def _parse_number(field_name: str, raw: str) -> float:
    raw = raw.strip()
    try:
        if "/" in raw:
            num, den = raw.split("/")
            return float(num) / float(den)
        return float(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{field_name}: cannot parse number from {raw!r}") from exc


def _parse_bool(field_name: str, raw: str) -> bool:
    val = raw.strip().lower()
    if val in ("true", "yes", "1"):
        return True
    if val in ("false", "no", "0"):
        return False
    raise ConfigError(f"{field_name}: expected a boolean, got {raw!r}")


def _parse_grid(field_name: str, raw: str) -> list[float]:
    return [_parse_number(field_name, tok) for tok in raw.split(",") if tok.strip()]


def _parse_time_grid(field_name: str, raw: str) -> np.ndarray:
    parts = raw.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{field_name}: expected start:stop:step, got {raw!r}")
    start, stop, step = (_parse_number(field_name, tok) for tok in parts)
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


@dataclass
class ExperimentConfig:
    """Validated experiment description (system + method + run controls)."""

    name: str = "unnamed"
    method: str = "pmmLang"
    observable: str = "kinetic_virial"
    theta: float = 0.1
    rbm_weight: bool = True
    potential_kind: str = "coulomb"
    kappa: float = 1.0
    sigma: float = 0.3
    mass: float = 1.0
    beta: float = 4.0
    n_beads: int = 16
    n_particles: int = 8
    alpha: float | None = None
    gamma: float = 2.0
    dt: float = 1.0 / 16.0
    batch_size: int = 2
    seed: int = 0
    total_time: float = 100.0
    burn_in: float = 50.0
    record_stride: int = 1
    n_trajectories: int = 1000
    n_replicas: int = 1000
    t_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 20.0, 41))
    dt_grid: list[float] = field(default_factory=lambda: [2.0**-k for k in range(1, 7)])
    p_grid: list[int] = field(default_factory=lambda: [2, 4])
    particles_grid: list[int] = field(default_factory=lambda: [8, 16, 24, 32])
    beads_grid: list[int] = field(default_factory=list)
    reference_dt: float = 1.0 / 64.0
    entropy_reference_time: float = 5.0e4
    n_bins: int = 100

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method: {self.method!r} not one of {METHODS}")
        if self.observable not in OBSERVABLES:
            raise ConfigError(f"observable: {self.observable!r} not one of {OBSERVABLES}")
        if self.potential_kind not in POTENTIALS:
            raise ConfigError(f"potential.kind: {self.potential_kind!r} not one of {POTENTIALS}")
        if "split" in self.method and self.potential_kind != "mixed":
            raise ConfigError(
                "method: splitting methods require potential.kind = mixed"
            )
        if "split" in self.method and self.observable == "kinetic_virial":
            raise ConfigError(
                "observable: kinetic_virial is not supported with splitting methods "
                "(the weight would need gradients of the singular part)"
            )
        if self.total_time <= 0:
            raise ConfigError("run.total_time: must be positive")
        if self.record_stride < 1:
            raise ConfigError("run.record_stride: must be >= 1")
        if self.burn_in < 0:
            raise ConfigError("run.burn_in: must be >= 0")
        # SystemSpec re-validates the physical fields and raises with names;
        # touching the ring operator surfaces bead-count problems early.
        try:
            self.system_spec().ring
        except ValueError as exc:
            raise ConfigError(f"system.n_beads: {exc}") from exc

    def uses_rbm(self) -> bool:
        return "RBM" in self.method

    def build_potential(self):
        if self.potential_kind == "coulomb":
            return Coulomb(self.kappa)
        if self.potential_kind == "mixed":
            return MixedCLJ(self.sigma)
        return NoInteraction()

    def system_spec(self, dt: float | None = None, batch_size: int | None = None) -> SystemSpec:
        try:
            return SystemSpec(
                mass=self.mass,
                beta=self.beta,
                n_beads=self.n_beads,
                n_particles=self.n_particles,
                potential=self.build_potential(),
                alpha=self.alpha,
                gamma=self.gamma,
                dt=self.dt if dt is None else dt,
                batch_size=(
                    (self.batch_size if batch_size is None else batch_size)
                    if (self.uses_rbm() or batch_size is not None)
                    else None
                ),
                seed=self.seed,
                total_time=self.total_time,
            )
        except ValueError as exc:
            raise ConfigError(f"system: {exc}") from exc


_KEYMAP = {
    "method": ("method", str),
    "observable": ("observable", str),
    "observable.theta": ("theta", "number"),
    "rbm_weight": ("rbm_weight", "bool"),
    "potential.kind": ("potential_kind", str),
    "potential.kappa": ("kappa", "number"),
    "potential.sigma": ("sigma", "number"),
    "system.mass": ("mass", "number"),
    "system.beta": ("beta", "number"),
    "system.n_beads": ("n_beads", "int"),
    "system.n_particles": ("n_particles", "int"),
    "system.alpha": ("alpha", "alpha"),
    "system.gamma": ("gamma", "number"),
    "system.dt": ("dt", "number"),
    "system.batch_size": ("batch_size", "int"),
    "run.seed": ("seed", "int"),
    "run.total_time": ("total_time", "number"),
    "run.burn_in": ("burn_in", "number"),
    "run.record_stride": ("record_stride", "int"),
    "run.n_trajectories": ("n_trajectories", "int"),
    "run.n_replicas": ("n_replicas", "int"),
    "run.t_grid": ("t_grid", "tgrid"),
    "run.dt_grid": ("dt_grid", "grid"),
    "run.p_grid": ("p_grid", "intgrid"),
    "run.particles_grid": ("particles_grid", "intgrid"),
    "run.beads_grid": ("beads_grid", "intgrid"),
    "run.reference_dt": ("reference_dt", "number"),
    "run.entropy_reference_time": ("entropy_reference_time", "number"),
    "run.n_bins": ("n_bins", "int"),
}


def parse_config_text(text: str, name: str = "unnamed") -> ExperimentConfig:
    cfg = ExperimentConfig(name=name)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (tok.strip() for tok in stripped.split("=", 1))
        if key not in _KEYMAP:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        attr, kind = _KEYMAP[key]
        if kind is str:
            value = raw
        elif kind == "number":
            value = _parse_number(key, raw)
        elif kind == "int":
            value = int(_parse_number(key, raw))
        elif kind == "bool":
            value = _parse_bool(key, raw)
        elif kind == "alpha":
            value = None if raw.strip().lower() == "auto" else _parse_number(key, raw)
        elif kind == "grid":
            value = _parse_grid(key, raw)
        elif kind == "intgrid":
            value = [int(v) for v in _parse_grid(key, raw)]
        elif kind == "tgrid":
            value = _parse_time_grid(key, raw)
        else:  # pragma: no cover
            raise AssertionError(kind)
        setattr(cfg, attr, value)
    cfg.validate()
    return cfg


def _preset_dir():
    return resources.files("ringbatch") / "presets"


def preset_names() -> list[str]:
    return sorted(p.name[: -len(".cfg")] for p in _preset_dir().iterdir() if p.name.endswith(".cfg"))


def load_config(
    path: str | Path | None = None,
    preset: str | None = None,
    overrides: dict | None = None,
) -> ExperimentConfig:
    """Load a config from an explicit file or a named packaged preset."""
    if (path is None) == (preset is None):
        raise ConfigError("exactly one of a config path or a preset name is required")
    if preset is not None:
        res = _preset_dir() / f"{preset}.cfg"
        if not res.is_file():
            raise ConfigError(f"preset: unknown preset {preset!r}; available: {preset_names()}")
        text, name = res.read_text(), preset
    else:
        text, name = Path(path).read_text(), Path(path).stem
    cfg = parse_config_text(text, name=name)
    for key, value in (overrides or {}).items():
        setattr(cfg, key, value)
    cfg.validate()
    return cfg
