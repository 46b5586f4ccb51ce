"""One-layer tanh recurrent network with exact BPTT, MSE loss, and Adam.

The network reads a sequence, updates a single recurrent layer,

    h_t = tanh(W_ih x_t + W_hh h_{t-1} + b_h),    h_0 = 0,

and produces its output from the final hidden state only,
``out = W_ho h_L + b_o``. Training minimises mean squared error at that
final step, optionally plus ``beta`` times one of the sparsity penalties
from :mod:`pathweaver.regularizers`. Gradients are computed by hand with
backpropagation through time; the optimiser is standard Adam with bias
correction.

All weight matrices are stored as (destination x source) and applied to
column vectors, so the forward pass uses ``x @ W.T`` on row-major batches.
The graph module transposes these blocks explicitly when it assembles the
whole-network adjacency.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ContractViolationError, TrainingDivergedError
from .numerics import make_rng
from .regularizers import RegTerm, canonical_reg, penalty_term, penalty_value
from .taskgen import Dataset, TaskSpec, make_dataset

PARAM_FIELDS = ("w_ih", "w_hh", "w_ho", "b_h", "b_o")

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class RnnParams:
    """The five trainable arrays of the one-layer network."""

    w_ih: np.ndarray      # (hidden, inputs)
    w_hh: np.ndarray      # (hidden, hidden)
    w_ho: np.ndarray      # (outputs, hidden)
    b_h: np.ndarray       # (hidden,)
    b_o: np.ndarray       # (outputs,)

    @property
    def n_in(self) -> int:
        return self.w_ih.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.w_hh.shape[0]

    @property
    def n_out(self) -> int:
        return self.w_ho.shape[0]

    def copy(self) -> "RnnParams":
        return RnnParams(*(getattr(self, name).copy() for name in PARAM_FIELDS))

    def validate(self) -> "RnnParams":
        h = self.n_hidden
        if self.w_ih.shape[0] != h or self.w_hh.shape != (h, h):
            raise ContractViolationError("hidden dimensions disagree across arrays")
        if self.w_ho.shape[1] != h:
            raise ContractViolationError("readout width does not match hidden size")
        if self.b_h.shape != (h,) or self.b_o.shape != (self.n_out,):
            raise ContractViolationError("bias shapes do not match weight shapes")
        for name in PARAM_FIELDS:
            if not np.all(np.isfinite(getattr(self, name))):
                raise ContractViolationError(f"non-finite entries in {name}")
        return self


@dataclass
class Gradients:
    """Per-parameter gradient arrays, aligned with :class:`RnnParams`."""

    w_ih: np.ndarray
    w_hh: np.ndarray
    w_ho: np.ndarray
    b_h: np.ndarray
    b_o: np.ndarray

    @classmethod
    def zeros_like(cls, params: RnnParams) -> "Gradients":
        return cls(*(np.zeros_like(getattr(params, name)) for name in PARAM_FIELDS))

    def add_penalty(self, reg: RegTerm | None, beta: float) -> "Gradients":
        """Fold ``beta`` times a penalty gradient into this one, in place."""
        if reg is not None and beta != 0.0:
            self.w_ih += beta * reg.d_w_ih
            self.w_hh += beta * reg.d_w_hh
            self.w_ho += beta * reg.d_w_ho
            self.b_h += beta * reg.d_b_h
            self.b_o += beta * reg.d_b_o
        return self


def init(seed, n_in: int, n_hidden: int, n_out: int) -> RnnParams:
    """Draw every weight and bias uniform on (-1/sqrt(h), +1/sqrt(h))."""
    if min(n_in, n_hidden, n_out) < 1:
        raise ContractViolationError("network dimensions must be at least 1")
    rng = make_rng(seed, "init")
    bound = 1.0 / np.sqrt(n_hidden)

    def draw(*shape):
        return rng.uniform(-bound, bound, size=shape)

    return RnnParams(
        w_ih=draw(n_hidden, n_in),
        w_hh=draw(n_hidden, n_hidden),
        w_ho=draw(n_out, n_hidden),
        b_h=draw(n_hidden),
        b_o=draw(n_out),
    )


def forward(params: RnnParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the recurrence over a batch; return (hidden trajectory, output).

    ``x`` has shape (batch, seq_len, inputs); the trajectory collects
    h_1..h_L as (batch, seq_len, hidden) and the output is read at the final
    step only.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3 or x.shape[2] != params.n_in:
        raise ContractViolationError(
            f"batch shape {x.shape} does not match input size {params.n_in}"
        )
    n, seq_len, _ = x.shape
    hidden = np.empty((n, seq_len, params.n_hidden))
    h = np.zeros((n, params.n_hidden))
    for t in range(seq_len):
        h = np.tanh(x[:, t, :] @ params.w_ih.T + h @ params.w_hh.T + params.b_h)
        hidden[:, t, :] = h
    output = h @ params.w_ho.T + params.b_o
    return hidden, output


def mse(output: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over every batch row and output dimension."""
    output = np.asarray(output, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if output.shape != target.shape:
        raise ContractViolationError(
            f"output shape {output.shape} != target shape {target.shape}"
        )
    # overflow to inf is legitimate here; the training loop treats any
    # non-finite loss as divergence rather than an arithmetic error
    with np.errstate(over="ignore"):
        return float(np.mean((output - target) ** 2))


def task_mse(params: RnnParams, x: np.ndarray, target: np.ndarray) -> float:
    return mse(forward(params, x)[1], target)


def backward(
    params: RnnParams,
    x: np.ndarray,
    target: np.ndarray,
    cache: tuple[np.ndarray, np.ndarray] | None = None,
    reg: RegTerm | None = None,
    beta: float = 0.0,
) -> Gradients:
    """Exact gradients of MSE (+ beta * penalty) via BPTT.

    ``cache`` may carry a forward pass already run on ``x`` to avoid
    recomputing it.
    """
    hidden, output = cache if cache is not None else forward(params, x)
    n, seq_len, _ = hidden.shape
    target = np.asarray(target, dtype=np.float64)
    if output.shape != target.shape:
        raise ContractViolationError(
            f"output shape {output.shape} != target shape {target.shape}"
        )
    grads = Gradients.zeros_like(params)

    g_out = 2.0 * (output - target) / output.size
    grads.w_ho += g_out.T @ hidden[:, -1, :]
    grads.b_o += g_out.sum(axis=0)

    g_h = g_out @ params.w_ho
    for t in range(seq_len - 1, -1, -1):
        g_pre = g_h * (1.0 - hidden[:, t, :] ** 2)
        grads.w_ih += g_pre.T @ x[:, t, :]
        if t > 0:
            grads.w_hh += g_pre.T @ hidden[:, t - 1, :]
        grads.b_h += g_pre.sum(axis=0)
        g_h = g_pre @ params.w_hh

    return grads.add_penalty(reg, beta)


@dataclass
class AdamState:
    """First/second moment accumulators and the shared step counter."""

    m: dict
    v: dict
    step: int = 0

    @classmethod
    def for_params(cls, params: RnnParams) -> "AdamState":
        return cls(
            m={k: np.zeros_like(getattr(params, k)) for k in PARAM_FIELDS},
            v={k: np.zeros_like(getattr(params, k)) for k in PARAM_FIELDS},
        )


def adam_step(
    params: RnnParams, grads: Gradients, state: AdamState, lr: float
) -> tuple[RnnParams, AdamState]:
    """One in-place Adam update with bias correction."""
    if lr <= 0:
        raise ContractViolationError(f"learning rate must be positive, got {lr}")
    state.step += 1
    correct1 = 1.0 - ADAM_BETA1 ** state.step
    correct2 = 1.0 - ADAM_BETA2 ** state.step
    for name in PARAM_FIELDS:
        g = getattr(grads, name)
        state.m[name] = ADAM_BETA1 * state.m[name] + (1.0 - ADAM_BETA1) * g
        state.v[name] = ADAM_BETA2 * state.v[name] + (1.0 - ADAM_BETA2) * g * g
        m_hat = state.m[name] / correct1
        v_hat = state.v[name] / correct2
        getattr(params, name)[...] -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return params, state


@dataclass
class TrainConfig:
    """Hyperparameters of one training run."""

    epochs: int = 100
    lr: float = 0.01
    beta: float = 0.0
    reg: str = "none"
    alpha: float = 0.8
    seed: int = 0
    batch: int | None = None      # None = full batch

    def validate(self) -> "TrainConfig":
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise ContractViolationError(f"epochs must be a count, got {self.epochs}")
        if self.lr <= 0:
            raise ContractViolationError(f"lr must be positive, got {self.lr}")
        if self.beta < 0:
            raise ContractViolationError(f"beta must be >= 0, got {self.beta}")
        self.reg = canonical_reg(self.reg)
        if self.reg == "resolvent_io" and not 0 < self.alpha < 1:
            raise ContractViolationError(
                f"alpha must lie in (0, 1) for the walk penalty, got {self.alpha}"
            )
        if self.batch is not None and (int(self.batch) != self.batch or self.batch < 1):
            raise ContractViolationError(f"batch must be None or >= 1, got {self.batch}")
        return self

    @property
    def effective_reg(self) -> str:
        """The penalty actually applied; beta = 0 degenerates to none exactly."""
        return "none" if self.beta == 0.0 else self.reg


@dataclass
class RunResult:
    """Loss curves, sparsity trajectory, and the trained parameters."""

    config: TrainConfig
    params: RnnParams
    train_mse: np.ndarray         # task MSE entering each epoch
    val_mse: np.ndarray           # task MSE after each epoch's update(s)
    sparsity: np.ndarray          # penalty value entering each epoch
    init_train_mse: float
    init_val_mse: float
    test_mse: float


def train(
    spec: TaskSpec, config: TrainConfig, dataset: Dataset | None = None
) -> RunResult:
    """Train on the dataset's train split, tracking validation each epoch.

    The dataset (and hence the split) is derived from ``spec`` alone, so
    runs that differ only in training hyperparameters see identical data.
    A non-finite loss aborts the run with :class:`TrainingDivergedError`.
    """
    spec.validate()
    config.validate()
    if dataset is None:
        dataset = make_dataset(spec)
    x_train, y_train = dataset.subset("train")
    x_val, y_val = dataset.subset("val")
    x_test, y_test = dataset.subset("test")

    f_all = spec.f_all
    params = init(config.seed, f_all, f_all, f_all)
    state = AdamState.for_params(params)
    batch_rng = make_rng(config.seed, "batches")
    reg_kind = config.effective_reg
    horizon = spec.seq_len

    epochs = int(config.epochs)
    train_curve = np.empty(epochs)
    val_curve = np.empty(epochs)
    sparsity_curve = np.empty(epochs)
    init_train = task_mse(params, x_train, y_train)
    init_val = task_mse(params, x_val, y_val)

    for epoch in range(epochs):
        sparsity_curve[epoch] = penalty_value(
            reg_kind, params, alpha=config.alpha, horizon=horizon
        )
        if config.batch is None:
            cache = forward(params, x_train)
            train_curve[epoch] = mse(cache[1], y_train)
            _step(params, state, x_train, y_train, cache, config, reg_kind, horizon)
        else:
            train_curve[epoch] = task_mse(params, x_train, y_train)
            order = batch_rng.permutation(x_train.shape[0])
            for start in range(0, order.size, int(config.batch)):
                rows = order[start : start + int(config.batch)]
                _step(
                    params, state, x_train[rows], y_train[rows],
                    None, config, reg_kind, horizon,
                )
        val_curve[epoch] = task_mse(params, x_val, y_val)
        if not (np.isfinite(train_curve[epoch]) and np.isfinite(val_curve[epoch])):
            bad = (
                train_curve[epoch]
                if not np.isfinite(train_curve[epoch])
                else val_curve[epoch]
            )
            raise TrainingDivergedError(
                f"non-finite loss {bad!r} at epoch {epoch}",
                epoch=epoch,
                loss=float(bad),
            )

    return RunResult(
        config=config,
        params=params,
        train_mse=train_curve,
        val_mse=val_curve,
        sparsity=sparsity_curve,
        init_train_mse=init_train,
        init_val_mse=init_val,
        test_mse=task_mse(params, x_test, y_test),
    )


def _step(params, state, x, y, cache, config, reg_kind, horizon) -> None:
    reg = penalty_term(reg_kind, params, alpha=config.alpha, horizon=horizon)
    grads = backward(params, x, y, cache=cache, reg=reg, beta=config.beta)
    adam_step(params, grads, state, config.lr)


def config_hash(config: TrainConfig) -> str:
    """Short stable digest of a training configuration."""
    payload = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def save_checkpoint(params: RnnParams, path, config: TrainConfig | None = None) -> None:
    """Dump the five parameter arrays to a text file with a JSON header."""
    header = {
        "n_in": params.n_in,
        "n_hidden": params.n_hidden,
        "n_out": params.n_out,
    }
    if config is not None:
        header["seed"] = config.seed
        header["config_hash"] = config_hash(config)
    lines = ["# " + json.dumps(header, sort_keys=True)]
    for name in PARAM_FIELDS:
        flat = np.asarray(getattr(params, name), dtype=np.float64).ravel()
        lines.append(name + "," + ",".join(repr(float(v)) for v in flat))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path) -> tuple[RnnParams, dict]:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    with open(path) as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or not lines[0].startswith("# "):
        raise ContractViolationError(f"{path} is not a checkpoint file")
    header = json.loads(lines[0][2:])
    arrays = {}
    for line in lines[1:]:
        name, _, rest = line.partition(",")
        arrays[name] = np.array([float(v) for v in rest.split(",")])
    n_in, n_h, n_o = header["n_in"], header["n_hidden"], header["n_out"]
    shapes = {
        "w_ih": (n_h, n_in),
        "w_hh": (n_h, n_h),
        "w_ho": (n_o, n_h),
        "b_h": (n_h,),
        "b_o": (n_o,),
    }
    try:
        params = RnnParams(
            **{name: arrays[name].reshape(shapes[name]) for name in PARAM_FIELDS}
        )
    except (KeyError, ValueError) as exc:
        raise ContractViolationError(f"malformed checkpoint {path}: {exc}") from None
    return params.validate(), header
