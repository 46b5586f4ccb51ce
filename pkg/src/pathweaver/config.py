"""Flat key/value experiment configuration.

Config files are plain JSON objects mapping field names to values. Every
field has a default matching the reference experimental setup, so an empty
config (or no config file at all) reproduces the baseline runs. Unknown
fields and wrongly typed values are rejected with the offending field named
in the error.

Some experiments overlay their own defaults before user values are applied
(the sweep trains for 200 epochs, the routing analysis is pinned to the
on-off task); an explicit value in the file still wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .numerics import derive_seed
from .regularizers import canonical_reg
from .rnn import TrainConfig
from .taskgen import TASK_ORDER, TaskKind, TaskSpec

EXPERIMENTS = ("single", "fig3", "fig4", "fig5")


@dataclass
class ExperimentConfig:
    """Merged, validated settings for one experiment invocation."""

    experiment: str = "single"
    task: str = "module_averaging"
    modules: int = 4
    features_per_module: int = 4
    seq_len: int = 5
    samples: int = 2000
    sigma_mu: float = 1.0
    sigma_eps: float = 1.0
    split: tuple = (0.64, 0.16, 0.2)
    epochs: int = 100
    lr: float = 0.01
    beta: float = 0.001
    reg: str = "l1_whh"
    alpha: float = 0.8
    batch: int | None = None
    seed: int = 0
    repeats: int = 10
    beta_min: float = 0.0001
    beta_max: float = 0.01
    beta_points: int = 10
    include_beta_zero: bool = True
    jobs: int = 1
    checkpoint: str | None = None

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(
                f"experiment: unknown value {self.experiment!r}, "
                f"expected one of {EXPERIMENTS}"
            )
        try:
            TaskKind(self.task)
        except ValueError:
            names = tuple(k.value for k in TASK_ORDER)
            raise ConfigError(
                f"task: unknown task name {self.task!r}, expected one of {names}"
            ) from None
        try:
            self.reg = canonical_reg(self.reg)
        except Exception:
            raise ConfigError(f"reg: unknown regulariser {self.reg!r}") from None
        for name in ("modules", "features_per_module", "seq_len", "samples"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name}: must be at least 1")
        if not (isinstance(self.split, (list, tuple)) and len(self.split) == 3):
            raise ConfigError("split: expected three fractions [train, val, test]")
        if self.lr <= 0:
            raise ConfigError(f"lr: must be positive, got {self.lr}")
        if self.beta < 0:
            raise ConfigError(f"beta: must be non-negative, got {self.beta}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha: must lie in (0, 1), got {self.alpha}")
        if self.epochs < 0:
            raise ConfigError(f"epochs: must be a count, got {self.epochs}")
        if self.repeats < 1:
            raise ConfigError(f"repeats: must be at least 1, got {self.repeats}")
        if self.jobs < 1:
            raise ConfigError(f"jobs: must be at least 1, got {self.jobs}")
        if self.batch is not None and self.batch < 1:
            raise ConfigError(f"batch: must be null or >= 1, got {self.batch}")
        if self.beta_points < 2:
            raise ConfigError(f"beta_points: need at least 2, got {self.beta_points}")
        if not self.beta_min < self.beta_max:
            raise ConfigError(
                f"beta grid must be strictly increasing, got "
                f"[{self.beta_min}, {self.beta_max}]"
            )
        if self.beta_min < 0:
            raise ConfigError(f"beta_min: must be non-negative, got {self.beta_min}")
        return self

    # -- derived objects ---------------------------------------------------

    def task_kind(self) -> TaskKind:
        return TaskKind(self.task)

    def task_spec(self, kind: TaskKind | None = None) -> TaskSpec:
        """Task description with a data seed fixed per task name.

        Every experiment derives the same dataset seed for a given task and
        base seed, so runs differing only in training settings see
        identical data.
        """
        kind = self.task_kind() if kind is None else kind
        return TaskSpec(
            kind=kind,
            modules=self.modules,
            features_per_module=self.features_per_module,
            seq_len=self.seq_len,
            samples=self.samples,
            sigma_mu=self.sigma_mu,
            sigma_eps=self.sigma_eps,
            seed=derive_seed(self.seed, "data", TASK_ORDER.index(kind)),
            split=tuple(self.split),
        )

    def train_config(self, seed: int, **overrides) -> TrainConfig:
        values = {
            "epochs": self.epochs,
            "lr": self.lr,
            "beta": self.beta,
            "reg": self.reg,
            "alpha": self.alpha,
            "seed": seed,
            "batch": self.batch,
        }
        values.update(overrides)
        return TrainConfig(**values)

    def beta_grid(self) -> np.ndarray:
        return np.linspace(self.beta_min, self.beta_max, self.beta_points)

    def run_seed(self, *keys) -> int:
        return derive_seed(self.seed, "train", *keys)


_EXPERIMENT_DEFAULTS = {
    "single": {},
    "fig3": {},
    "fig4": {"task": "on_off_averaging"},
    "fig5": {"epochs": 200},
}

_FIELD_TYPES = {
    "experiment": str,
    "task": str,
    "modules": int,
    "features_per_module": int,
    "seq_len": int,
    "samples": int,
    "sigma_mu": (int, float),
    "sigma_eps": (int, float),
    "split": (list, tuple),
    "epochs": int,
    "lr": (int, float),
    "beta": (int, float),
    "reg": (str, type(None)),
    "alpha": (int, float),
    "batch": (int, type(None)),
    "seed": int,
    "repeats": int,
    "beta_min": (int, float),
    "beta_max": (int, float),
    "beta_points": int,
    "include_beta_zero": bool,
    "jobs": int,
    "checkpoint": (str, type(None)),
}

_FLOAT_FIELDS = ("sigma_mu", "sigma_eps", "lr", "beta", "alpha", "beta_min", "beta_max")


def read_config_file(path) -> dict:
    """Parse a JSON config file into a plain dict of raw values."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return data


def build_config(
    experiment: str, file_values: dict | None = None, overrides: dict | None = None
) -> ExperimentConfig:
    """Layer defaults, experiment defaults, file values, then CLI overrides."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown value {experiment!r}")
    known = {f.name for f in fields(ExperimentConfig)}
    merged: dict = {"experiment": experiment}
    merged.update(_EXPERIMENT_DEFAULTS[experiment])
    for source in (file_values or {}), (overrides or {}):
        for key, value in source.items():
            if key == "experiment":
                continue
            if key not in known:
                raise ConfigError(f"unknown config field {key!r}")
            merged[key] = value
    for key, value in merged.items():
        expected = _FIELD_TYPES[key]
        if isinstance(value, bool) and expected is not bool and key != "experiment":
            raise ConfigError(f"{key}: expected {_type_name(expected)}, got a boolean")
        if not isinstance(value, expected):
            raise ConfigError(
                f"{key}: expected {_type_name(expected)}, got {value!r}"
            )
        if key in _FLOAT_FIELDS:
            merged[key] = float(value)
        if key == "split":
            merged[key] = tuple(float(v) for v in value)
    config = ExperimentConfig(**merged)
    return config.validate()


def load_config(experiment: str, path=None, overrides: dict | None = None) -> ExperimentConfig:
    file_values = read_config_file(path) if path is not None else {}
    return build_config(experiment, file_values, overrides)


def _type_name(expected) -> str:
    if isinstance(expected, tuple):
        return " or ".join(t.__name__ for t in expected)
    return expected.__name__
