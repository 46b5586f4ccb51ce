"""Hierarchically modular temporal-integration tasks.

Every task draws per-sample hidden parameters, expands them through a module
structure to per-feature means, and observes those means under i.i.d. noise
for ``seq_len`` timesteps. The target is a per-sample vector, constant across
the features of one module, obtained from the module parameters by the task's
mixing rule (identity, cumulative subtraction, cumulative addition, or
cumulative product). The on-off variant replaces the input with pure standard
normal noise on every second timestep counted back from the last one, so the
useful signal arrives only on alternating steps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .csvio import load_matrix_csv, save_matrix_csv
from .errors import ContractViolationError
from .numerics import make_rng, sample_normal


class TaskKind(str, Enum):
    MODULE_AVERAGING = "module_averaging"
    SUBTRACTION = "subtraction"
    ADDITION = "addition"
    MULTIPLICATION = "multiplication"
    ON_OFF_AVERAGING = "on_off_averaging"


#: Canonical ordering used when indexing tasks in seeds and reports.
TASK_ORDER = (
    TaskKind.MODULE_AVERAGING,
    TaskKind.SUBTRACTION,
    TaskKind.ADDITION,
    TaskKind.MULTIPLICATION,
    TaskKind.ON_OFF_AVERAGING,
)

#: Kinds whose target is a linear function of the module parameters.
LINEAR_KINDS = (
    TaskKind.MODULE_AVERAGING,
    TaskKind.SUBTRACTION,
    TaskKind.ADDITION,
)


@dataclass(frozen=True)
class TaskSpec:
    """Full parameterisation of one task instance."""

    kind: TaskKind
    modules: int = 4
    features_per_module: int = 4
    seq_len: int = 5
    samples: int = 2000
    sigma_mu: float = 1.0
    sigma_eps: float = 1.0
    seed: int = 0
    split: tuple = (0.64, 0.16, 0.2)

    @property
    def f_all(self) -> int:
        return self.modules * self.features_per_module

    def validate(self) -> "TaskSpec":
        if not isinstance(self.kind, TaskKind):
            raise ContractViolationError(f"unknown task kind: {self.kind!r}")
        if self.modules < 1 or self.features_per_module < 1 or self.seq_len < 1:
            raise ContractViolationError(
                "modules, features_per_module and seq_len must all be >= 1"
            )
        if self.samples < 3:
            raise ContractViolationError(f"need at least 3 samples, got {self.samples}")
        if self.sigma_mu < 0 or self.sigma_eps < 0:
            raise ContractViolationError("noise scales must be non-negative")
        if len(self.split) != 3 or any(f <= 0 for f in self.split):
            raise ContractViolationError(f"split must be three positive fractions, got {self.split}")
        if abs(sum(self.split) - 1.0) > 1e-9:
            raise ContractViolationError(f"split fractions must sum to 1, got {self.split}")
        return self


@dataclass
class Dataset:
    """Sampled inputs, targets, and (once assigned) split index lists."""

    x: np.ndarray                 # (samples, seq_len, f_all)
    targets: np.ndarray           # (samples, f_all)
    split_indices: tuple | None = None   # (train, val, test) integer arrays

    def subset(self, which: str) -> tuple[np.ndarray, np.ndarray]:
        """Return (x, targets) rows for 'train', 'val' or 'test'."""
        if self.split_indices is None:
            raise ContractViolationError("dataset has no split indices yet")
        idx = dict(zip(("train", "val", "test"), self.split_indices))[which]
        return self.x[idx], self.targets[idx]


def structure_matrices(modules: int):
    """Module-level structure and mixing matrices for ``modules`` modules.

    Returns ``(g_mod, g_add, a_sub, a_add)``: the identity, the
    lower-triangular all-ones matrix, the identity with -1 on the first
    subdiagonal, and the lower-triangular all-ones matrix again (the
    addition mixing). ``a_sub @ g_add`` is exactly the identity.
    """
    if modules < 1:
        raise ContractViolationError(f"modules must be >= 1, got {modules}")
    g_mod = np.eye(modules)
    g_add = np.tril(np.ones((modules, modules)))
    a_sub = np.eye(modules)
    a_sub[np.arange(1, modules), np.arange(modules - 1)] = -1.0
    a_add = np.tril(np.ones((modules, modules)))
    return g_mod, g_add, a_sub, a_add


def feature_expander(modules: int, features: int) -> np.ndarray:
    """(f_all x modules) matrix repeating each module column over its features."""
    if modules < 1 or features < 1:
        raise ContractViolationError("modules and features must both be >= 1")
    return np.kron(np.eye(modules), np.ones((features, 1)))


def noise_timesteps(seq_len: int) -> list[int]:
    """0-based storage indices that carry pure noise in the on-off task.

    Counting the final presented step as step ``seq_len``, noise lands on
    steps seq_len-1, seq_len-3, ...; in 0-based storage that is
    seq_len-2, seq_len-4, ...
    """
    return sorted(range(seq_len - 2, -1, -2))


def module_targets(kind: TaskKind, mu_m: np.ndarray) -> np.ndarray:
    """Apply the task's target rule to module parameters (rows = samples)."""
    modules = mu_m.shape[1]
    _, _, a_sub, a_add = structure_matrices(modules)
    if kind in (TaskKind.MODULE_AVERAGING, TaskKind.ON_OFF_AVERAGING):
        return mu_m.copy()
    if kind is TaskKind.SUBTRACTION:
        return mu_m @ a_sub.T
    if kind is TaskKind.ADDITION:
        return mu_m @ a_add.T
    if kind is TaskKind.MULTIPLICATION:
        return np.cumprod(mu_m, axis=1)
    raise ContractViolationError(f"unknown task kind: {kind!r}")


def generate(spec: TaskSpec) -> Dataset:
    """Sample a dataset for ``spec``; deterministic in ``spec.seed``."""
    spec.validate()
    m, f, seq_len, n = spec.modules, spec.features_per_module, spec.seq_len, spec.samples
    rng = make_rng(spec.seed, "taskgen")

    g_mod, g_add, _, _ = structure_matrices(m)
    g_hm = g_add if spec.kind is TaskKind.SUBTRACTION else g_mod
    g_mf = feature_expander(m, f)

    mu_h = sample_normal(rng, 0.0, spec.sigma_mu, (n, m))
    mu_m = mu_h @ g_hm.T
    mu_f = mu_m @ g_mf.T                                   # (n, f_all)

    x = mu_f[:, None, :] + sample_normal(rng, 0.0, spec.sigma_eps, (n, seq_len, spec.f_all))
    if spec.kind is TaskKind.ON_OFF_AVERAGING:
        steps = noise_timesteps(seq_len)
        if steps:
            x[:, steps, :] = sample_normal(rng, 0.0, 1.0, (n, len(steps), spec.f_all))

    targets = module_targets(spec.kind, mu_m) @ g_mf.T     # duplicate across features
    return Dataset(x=x, targets=targets)


def split(dataset: Dataset, spec: TaskSpec) -> Dataset:
    """Shuffle deterministically by seed and partition into train/val/test.

    Sizes are floor-rounded from the fractions with the remainder assigned
    to train; any empty part is a contract violation.
    """
    spec.validate()
    n = dataset.x.shape[0]
    _, f_val, f_test = spec.split
    n_val = int(np.floor(f_val * n))
    n_test = int(np.floor(f_test * n))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise ContractViolationError(
            f"split {spec.split} leaves an empty part at {n} samples"
        )
    perm = make_rng(spec.seed, "split").permutation(n)
    parts = (
        np.sort(perm[:n_train]),
        np.sort(perm[n_train:n_train + n_val]),
        np.sort(perm[n_train + n_val:]),
    )
    return Dataset(x=dataset.x, targets=dataset.targets, split_indices=parts)


def make_dataset(spec: TaskSpec) -> Dataset:
    """Generate and split in one call."""
    return split(generate(spec), spec)


def save_dataset(dataset: Dataset, spec: TaskSpec, out_dir) -> None:
    """Write a dataset as a CSV bundle (inputs, targets, splits, metadata).

    Inputs are stored sample-major then time-major, one row per (sample,
    timestep); values round-trip exactly through their shortest decimal
    representation.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n, seq_len, f_all = dataset.x.shape
    meta = {
        "kind": spec.kind.value,
        "modules": spec.modules,
        "features_per_module": spec.features_per_module,
        "seq_len": spec.seq_len,
        "samples": spec.samples,
        "sigma_mu": spec.sigma_mu,
        "sigma_eps": spec.sigma_eps,
        "seed": spec.seed,
        "split": list(spec.split),
    }
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    save_matrix_csv(out / "inputs.csv", dataset.x.reshape(n * seq_len, f_all),
                    {"samples": n, "seq_len": seq_len, "layout": "sample-major"})
    save_matrix_csv(out / "targets.csv", dataset.targets, {"samples": n})
    lines = []
    names = ("train", "val", "test")
    idx = dataset.split_indices or ()
    for name, part in zip(names, idx):
        lines.append(",".join([name] + [str(int(i)) for i in part]))
    (out / "splits.csv").write_text("\n".join(lines) + ("\n" if lines else ""))


def load_dataset(in_dir) -> tuple[Dataset, TaskSpec]:
    """Read back a bundle written by :func:`save_dataset`."""
    src = Path(in_dir)
    meta = json.loads((src / "meta.json").read_text())
    spec = TaskSpec(
        kind=TaskKind(meta["kind"]),
        modules=meta["modules"],
        features_per_module=meta["features_per_module"],
        seq_len=meta["seq_len"],
        samples=meta["samples"],
        sigma_mu=meta["sigma_mu"],
        sigma_eps=meta["sigma_eps"],
        seed=meta["seed"],
        split=tuple(meta["split"]),
    )
    x_flat, x_meta = load_matrix_csv(src / "inputs.csv")
    n, seq_len = x_meta["samples"], x_meta["seq_len"]
    targets, _ = load_matrix_csv(src / "targets.csv")
    splits_text = (src / "splits.csv").read_text().strip()
    split_indices = None
    if splits_text:
        parts = []
        for line in splits_text.splitlines():
            cells = line.split(",")
            parts.append(np.array([int(c) for c in cells[1:]], dtype=np.int64))
        split_indices = tuple(parts)
    ds = Dataset(x=x_flat.reshape(n, seq_len, -1), targets=targets,
                 split_indices=split_indices)
    return ds, spec
