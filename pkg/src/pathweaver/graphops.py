"""Whole-network graph measures: hop powers, truncated resolvent, and friends.

The trained network is viewed as a directed graph on n = i + h + o nodes
whose adjacency matrix holds the connection weights, with entry W[u, v] the
weight of the edge u -> v. Only three blocks can be nonzero: input->hidden,
hidden->hidden, and hidden->output. Powers of W then aggregate signed
products over walks, and the input-to-output block of a truncated geometric
series in W summarises the network's multi-hop input-output influence.

Series are always evaluated by iterated multiplication with a running
accumulator, never through a dense inverse, so the analysis measures and the
training penalty share one numerical path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csvio import save_matrix_csv
from .errors import ContractViolationError, UndefinedScoreError
from .numerics import as_matrix, matpow, spectral_radius

#: Decay used everywhere a walk series is evaluated, per the analysis setup.
ANALYSIS_ALPHA = 0.8


@dataclass
class AdjacencyGraph:
    """Adjacency matrix of the unrolled network with its node-block layout."""

    w: np.ndarray
    n_in: int
    n_hidden: int
    n_out: int

    @property
    def n(self) -> int:
        return self.n_in + self.n_hidden + self.n_out

    @property
    def inputs(self) -> slice:
        return slice(0, self.n_in)

    @property
    def hidden(self) -> slice:
        return slice(self.n_in, self.n_in + self.n_hidden)

    @property
    def outputs(self) -> slice:
        return slice(self.n_in + self.n_hidden, self.n)

    def validate(self) -> None:
        w = as_matrix(self.w, "adjacency")
        if w.shape != (self.n, self.n):
            raise ContractViolationError(
                f"adjacency shape {w.shape} does not match node count {self.n}"
            )
        allowed = np.zeros((self.n, self.n), dtype=bool)
        allowed[self.inputs, self.hidden] = True
        allowed[self.hidden, self.hidden] = True
        allowed[self.hidden, self.outputs] = True
        if np.any(w[~allowed] != 0.0):
            raise ContractViolationError(
                "adjacency has weight outside the input->hidden, "
                "hidden->hidden, hidden->output blocks"
            )

    def io_block(self, full: np.ndarray) -> np.ndarray:
        return full[self.inputs, self.outputs]


@dataclass
class IoMap:
    """Input x output influence map together with how it was computed."""

    values: np.ndarray     # (n_in, n_out)
    kind: str
    meta: dict | None = None


def assemble(params) -> AdjacencyGraph:
    """Build the whole-network adjacency from RNN parameters, biases excluded.

    Stored weight matrices act on column vectors (rows index the receiving
    unit), so each block lands in the graph transposed: edge u -> v sits at
    row u, column v.
    """
    w_ih = as_matrix(params.w_ih, "w_ih")
    w_hh = as_matrix(params.w_hh, "w_hh")
    w_ho = as_matrix(params.w_ho, "w_ho")
    n_hidden, n_in = w_ih.shape
    n_out = w_ho.shape[0]
    if w_hh.shape != (n_hidden, n_hidden):
        raise ContractViolationError(
            f"w_hh shape {w_hh.shape} does not match hidden size {n_hidden}"
        )
    if w_ho.shape[1] != n_hidden:
        raise ContractViolationError(
            f"w_ho shape {w_ho.shape} does not match hidden size {n_hidden}"
        )
    g = AdjacencyGraph(
        w=np.zeros((n_in + n_hidden + n_out,) * 2),
        n_in=n_in,
        n_hidden=n_hidden,
        n_out=n_out,
    )
    g.w[g.inputs, g.hidden] = w_ih.T
    g.w[g.hidden, g.hidden] = w_hh.T
    g.w[g.hidden, g.outputs] = w_ho.T
    return g


def normalize(g: AdjacencyGraph) -> AdjacencyGraph:
    """Rescale the adjacency to unit spectral radius."""
    rho = spectral_radius(g.w)
    return AdjacencyGraph(
        w=g.w / rho, n_in=g.n_in, n_hidden=g.n_hidden, n_out=g.n_out
    )


def hop_io(g: AdjacencyGraph, k: int) -> IoMap:
    """Input-to-output block of the k-th adjacency power."""
    return IoMap(values=g.io_block(matpow(g.w, k)), kind=f"hop:{int(k)}")


def _check_series_args(alpha: float, k_min: int, k_max: int) -> None:
    if not 0 < alpha < 1:
        raise ContractViolationError(f"alpha must lie in (0, 1), got {alpha}")
    if int(k_min) != k_min or int(k_max) != k_max or k_min < 0:
        raise ContractViolationError(
            f"hop range must be non-negative integers, got {k_min}..{k_max}"
        )
    if k_min > k_max:
        raise ContractViolationError(f"empty hop range {k_min}..{k_max}")


def _scaled_base(g: AdjacencyGraph, alpha: float, normalized: bool) -> np.ndarray:
    base = normalize(g).w if normalized else g.w
    return alpha * base


def resolvent_io(
    g: AdjacencyGraph,
    alpha: float = ANALYSIS_ALPHA,
    k_min: int = 2,
    k_max: int = 6,
    normalized: bool = True,
) -> IoMap:
    """Truncated geometric walk series sum_{k=k_min}^{k_max} (alpha W)^k, io block.

    With ``normalized`` the series runs over the unit-spectral-radius graph
    (the analysis default); without it, over the raw weights as used by the
    training penalty.
    """
    _check_series_args(alpha, k_min, k_max)
    base = _scaled_base(g, alpha, normalized)
    power = matpow(base, int(k_min))
    acc = power.copy()
    for _ in range(int(k_min) + 1, int(k_max) + 1):
        power = power @ base
        acc += power
    return IoMap(
        values=g.io_block(acc),
        kind=f"resolvent:alpha={alpha},k={int(k_min)}..{int(k_max)},"
        f"normalized={normalized}",
    )


def communicability_io(g: AdjacencyGraph, terms: int = 30) -> IoMap:
    """Io block of the exponential-series walk measure sum_k W^k / k!."""
    if int(terms) != terms or terms < 1:
        raise ContractViolationError(f"terms must be a positive integer, got {terms}")
    w = as_matrix(g.w, "adjacency")
    term = np.eye(g.n)
    acc = term.copy()
    for k in range(1, int(terms) + 1):
        term = term @ w / k
        acc += term
    return IoMap(values=g.io_block(acc), kind=f"communicability:terms={int(terms)}")


def block_contrast(io_map, modules: int, features_per_module: int) -> float:
    """Within-module vs between-module magnitude contrast of a square map.

    Returns (mean |within| - mean |between|) / (mean |within| + mean |between|),
    which lies in [-1, 1]. An all-zero map has no defined contrast.
    """
    values = io_map.values if isinstance(io_map, IoMap) else io_map
    values = as_matrix(values, "io map")
    f_all = modules * features_per_module
    if values.shape != (f_all, f_all):
        raise ContractViolationError(
            f"map shape {values.shape} does not match {modules} modules "
            f"of {features_per_module} features"
        )
    within = np.kron(
        np.eye(modules, dtype=bool),
        np.ones((features_per_module, features_per_module), dtype=bool),
    )
    mags = np.abs(values)
    mean_within = float(mags[within].mean())
    mean_between = float(mags[~within].mean())
    denom = mean_within + mean_between
    if denom == 0.0:
        raise UndefinedScoreError("block contrast of an all-zero map is undefined")
    return (mean_within - mean_between) / denom


def hop_magnitude_profile(
    g: AdjacencyGraph,
    alpha: float = ANALYSIS_ALPHA,
    k_min: int = 1,
    k_max: int = 6,
    normalized: bool = False,
) -> list[tuple[int, float]]:
    """Summed |io-block| magnitude of (alpha W)^k for each hop length k.

    Defaults to the raw-weight graph, matching the regime the training
    penalty operates in.
    """
    _check_series_args(alpha, k_min, k_max)
    base = _scaled_base(g, alpha, normalized)
    power = matpow(base, int(k_min))
    profile = [(int(k_min), float(np.abs(g.io_block(power)).sum()))]
    for k in range(int(k_min) + 1, int(k_max) + 1):
        power = power @ base
        profile.append((k, float(np.abs(g.io_block(power)).sum())))
    return profile


def save_io_map(io_map: IoMap, path) -> None:
    """CSV export with the map kind (and any extras) on the metadata line."""
    meta = {"kind": io_map.kind}
    if io_map.meta:
        meta.update(io_map.meta)
    save_matrix_csv(path, io_map.values, meta)
