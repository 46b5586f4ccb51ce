"""Analytic optimal input-output maps for the modular tasks.

For the linear tasks the observed features are, in expectation, a fixed
linear image of the module-level target parameters, repeated over timesteps.
Stacking time gives a regression design ``A`` with ``X = A mu + eps``, and
the minimum-error linear readout is the ridge solution
``(A^T A + (sigma_eps^2 / sigma_mu^2) I)^-1 A^T``. Because the design block
repeats identically across timesteps, the time-averaged map equals the
solution of the reduced system ``(L B^T B + r I) W = B^T``. For the
multiplication task the map is the expected sensitivity of outputs to module
inputs at the centre of the input distribution, where every product term
vanishes and only the first module's direct route survives.

Maps are stored with rows indexing input features and columns indexing
output features, the same orientation as the graph input-output maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csvio import save_matrix_csv
from .errors import ContractViolationError, UnsupportedTaskError
from .taskgen import (
    LINEAR_KINDS,
    TaskKind,
    TaskSpec,
    feature_expander,
    structure_matrices,
)


@dataclass
class OptimalMap:
    """Best linear input->output map for one task, duplicated over features."""

    values: np.ndarray          # (f_all, f_all); rows input, cols output
    kind: TaskKind
    meta: dict


def design_block(spec: TaskSpec) -> np.ndarray:
    """Single-timestep design (f_all x modules): feature means per unit target.

    Module averaging observes the targets directly; subtraction observes
    cumulative sums of them; addition observes their successive differences
    (the inverse of the cumulative-sum mixing applied to the targets).
    """
    if spec.kind not in LINEAR_KINDS:
        raise UnsupportedTaskError(
            f"no linear design exists for task kind {spec.kind.value!r}"
        )
    g_mod, g_add, a_sub, _ = structure_matrices(spec.modules)
    g_mf = feature_expander(spec.modules, spec.features_per_module)
    if spec.kind is TaskKind.MODULE_AVERAGING:
        mixing = g_mod
    elif spec.kind is TaskKind.SUBTRACTION:
        mixing = g_add
    else:                                    # ADDITION
        mixing = a_sub
    return g_mf @ mixing


def design_matrix(spec: TaskSpec) -> np.ndarray:
    """Full time-stacked design ((f_all * seq_len) x modules), time-major rows."""
    return np.tile(design_block(spec), (spec.seq_len, 1))


def _ridge_ratio(spec: TaskSpec) -> float:
    if spec.sigma_mu <= 0:
        raise ContractViolationError("sigma_mu must be positive for the ridge map")
    return (spec.sigma_eps / spec.sigma_mu) ** 2


def ridge_optimal_map(spec: TaskSpec) -> OptimalMap:
    """Ridge-regression optimal map for a linear task, averaged over time.

    Solves the reduced normal equations, duplicates the module-level rows
    across each module's features, and transposes into the input x output
    orientation.
    """
    spec.validate()
    block = design_block(spec)
    m = spec.modules
    ridge = _ridge_ratio(spec)
    gram = spec.seq_len * block.T @ block + ridge * np.eye(m)
    w_module = np.linalg.solve(gram, block.T)          # (modules x f_all)
    g_mf = feature_expander(spec.modules, spec.features_per_module)
    w_feature = g_mf @ w_module                        # rows outputs, cols inputs
    return OptimalMap(
        values=w_feature.T,
        kind=spec.kind,
        meta=_meta(spec),
    )


def multiplication_optimal_map(spec: TaskSpec) -> OptimalMap:
    """Expected input-output sensitivity map for the cumulative-product task.

    Output j is the product of the first j module parameters, so its
    sensitivity to module i (for i <= j) is the product of the other
    factors, which has zero mean except for the direct i = j = 1 route.
    """
    spec.validate()
    if spec.kind is not TaskKind.MULTIPLICATION:
        raise UnsupportedTaskError(
            f"multiplication map requested for {spec.kind.value!r}"
        )
    module_map = np.zeros((spec.modules, spec.modules))
    module_map[0, 0] = 1.0
    f = spec.features_per_module
    return OptimalMap(
        values=np.kron(module_map, np.ones((f, f))),
        kind=spec.kind,
        meta=_meta(spec),
    )


def optimal_map(spec: TaskSpec) -> OptimalMap:
    """Dispatch to the ridge map or the multiplication sensitivity map."""
    if spec.kind in LINEAR_KINDS:
        return ridge_optimal_map(spec)
    if spec.kind is TaskKind.MULTIPLICATION:
        return multiplication_optimal_map(spec)
    raise UnsupportedTaskError(
        f"no optimal map is defined for task kind {spec.kind.value!r}"
    )


def has_optimal_map(kind: TaskKind) -> bool:
    return kind in LINEAR_KINDS or kind is TaskKind.MULTIPLICATION


def ridge_predict(spec: TaskSpec, x: np.ndarray) -> np.ndarray:
    """Apply the full (unreduced) ridge solution to raw inputs.

    ``x`` has shape (n, seq_len, f_all); returns per-feature target
    predictions (n, f_all). This is the baseline readout that training is
    benchmarked against.
    """
    design = design_matrix(spec)
    ridge = _ridge_ratio(spec)
    gram = design.T @ design + ridge * np.eye(spec.modules)
    w_full = np.linalg.solve(gram, design.T)           # (modules x f_all*seq_len)
    n = x.shape[0]
    stacked = x.reshape(n, spec.seq_len * spec.f_all)  # time-major, matches design
    mu_hat = stacked @ w_full.T
    g_mf = feature_expander(spec.modules, spec.features_per_module)
    return mu_hat @ g_mf.T


def save_optimal_map(opt: OptimalMap, path) -> None:
    """CSV export with a metadata line (kind plus task parameters)."""
    meta = {"kind": f"optimal:{opt.kind.value}"}
    meta.update(opt.meta)
    save_matrix_csv(path, opt.values, meta)


def _meta(spec: TaskSpec) -> dict:
    return {
        "modules": spec.modules,
        "features_per_module": spec.features_per_module,
        "seq_len": spec.seq_len,
        "sigma_mu": spec.sigma_mu,
        "sigma_eps": spec.sigma_eps,
    }
