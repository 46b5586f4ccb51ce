"""Recurrent networks on modular temporal tasks, read through graph measures.

The package trains small tanh RNNs on synthetic modular integration tasks,
derives the analytic optimal input-output maps where they exist, and
measures the trained networks' multi-hop routing with walk-based graph
quantities (hop powers, truncated geometric series). Two sparsity penalties
with exact gradients are included, one on the recurrent weights and one on
the multi-hop input-output paths.
"""

from .config import ExperimentConfig, build_config, load_config
from .graphops import (
    AdjacencyGraph,
    IoMap,
    assemble,
    block_contrast,
    communicability_io,
    hop_io,
    hop_magnitude_profile,
    normalize,
    resolvent_io,
)
from .oracle import OptimalMap, optimal_map, ridge_optimal_map, ridge_predict
from .regularizers import RegTerm, compose_loss, l1_whh, resolvent_penalty
from .rnn import (
    RnnParams,
    RunResult,
    TrainConfig,
    adam_step,
    backward,
    forward,
    init,
    mse,
    train,
)
from .taskgen import Dataset, TaskKind, TaskSpec, generate, make_dataset, split

__version__ = "0.1.0"

__all__ = [
    "AdjacencyGraph",
    "Dataset",
    "ExperimentConfig",
    "IoMap",
    "OptimalMap",
    "RegTerm",
    "RnnParams",
    "RunResult",
    "TaskKind",
    "TaskSpec",
    "TrainConfig",
    "adam_step",
    "assemble",
    "backward",
    "block_contrast",
    "build_config",
    "communicability_io",
    "compose_loss",
    "forward",
    "generate",
    "hop_io",
    "hop_magnitude_profile",
    "init",
    "l1_whh",
    "load_config",
    "make_dataset",
    "mse",
    "normalize",
    "optimal_map",
    "resolvent_io",
    "resolvent_penalty",
    "ridge_optimal_map",
    "ridge_predict",
    "split",
    "train",
]
