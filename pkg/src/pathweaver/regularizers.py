"""Sparsity penalties with exact gradients.

Two penalties are supported: plain L1 on the recurrent weight matrix, and a
walk-based penalty on the summed absolute input-output block of the
truncated geometric series S = sum_{k=1}^{L+1} (alpha W)^k over the raw
(un-normalised) whole-network adjacency. The series starts at k = 1 so that
one-hop contributions are penalised too, unlike the analysis measures which
start at k = 2.

Gradients are computed in closed form. For the walk penalty, with G the
n x n matrix carrying sign(S_io) in the io block and zeros elsewhere,

    dvalue/dW = sum_{k=1}^{L+1} alpha^k sum_{j=0}^{k-1} (W^T)^j G (W^T)^(k-1-j)

by the product rule on matrix powers; the three parameter blocks are then
read back out of this matrix, undoing the assembly transposes. Powers of W
are cached, so the cost is O(L^2) products of n x n matrices, negligible at
the sizes used here. Exactly-zero entries of S_io (and of W_hh for the L1
case) get subgradient 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError
from .graphops import assemble

#: Canonical penalty names accepted by the trainer and the config layer.
REG_KINDS = ("none", "l1_whh", "resolvent_io")

REG_ALIASES = {
    "none": "none",
    "l1": "l1_whh",
    "l1_whh": "l1_whh",
    "l1onwhh": "l1_whh",
    "resolvent": "resolvent_io",
    "resolvent_io": "resolvent_io",
    "resolventio": "resolvent_io",
    "rrnn": "resolvent_io",
}


def canonical_reg(kind) -> str:
    """Map a user-facing penalty name (or None) to its canonical form."""
    if kind is None:
        return "none"
    key = str(kind).strip().lower().replace("-", "_")
    try:
        return REG_ALIASES[key]
    except KeyError:
        raise ContractViolationError(
            f"unknown regulariser {kind!r}; expected one of {REG_KINDS}"
        ) from None


@dataclass
class RegTerm:
    """Penalty value and its gradient w.r.t. each trainable parameter."""

    value: float
    d_w_ih: np.ndarray
    d_w_hh: np.ndarray
    d_w_ho: np.ndarray
    d_b_h: np.ndarray
    d_b_o: np.ndarray


def _zero_term(params, value: float = 0.0) -> RegTerm:
    return RegTerm(
        value=float(value),
        d_w_ih=np.zeros_like(params.w_ih),
        d_w_hh=np.zeros_like(params.w_hh),
        d_w_ho=np.zeros_like(params.w_ho),
        d_b_h=np.zeros_like(params.b_h),
        d_b_o=np.zeros_like(params.b_o),
    )


def l1_whh(params) -> RegTerm:
    """L1 penalty on the recurrent weights only: value sum|W_hh|, grad sign."""
    term = _zero_term(params, value=float(np.abs(params.w_hh).sum()))
    term.d_w_hh = np.sign(params.w_hh)
    return term


def l1_whh_value(params) -> float:
    return float(np.abs(params.w_hh).sum())


def resolvent_penalty(params, alpha: float = 0.8, horizon: int = 5) -> RegTerm:
    """Walk-path penalty sum|S_io| with S = sum_{k=1}^{horizon+1} (alpha W)^k.

    Built on the raw adjacency; biases are not part of the graph, so their
    gradients are identically zero.
    """
    _check_penalty_args(alpha, horizon)
    g = assemble(params)
    k_max = int(horizon) + 1
    powers = [np.eye(g.n)]
    for _ in range(k_max):
        powers.append(powers[-1] @ g.w)

    s = np.zeros((g.n, g.n))
    for k in range(1, k_max + 1):
        s += alpha ** k * powers[k]
    s_io = g.io_block(s)
    value = float(np.abs(s_io).sum())

    guide = np.zeros((g.n, g.n))
    guide[g.inputs, g.outputs] = np.sign(s_io)
    powers_t = [p.T for p in powers]
    d_full = np.zeros((g.n, g.n))
    for k in range(1, k_max + 1):
        scale = alpha ** k
        for j in range(k):
            d_full += scale * (powers_t[j] @ guide @ powers_t[k - 1 - j])

    term = _zero_term(params, value=value)
    term.d_w_ih = d_full[g.inputs, g.hidden].T
    term.d_w_hh = d_full[g.hidden, g.hidden].T
    term.d_w_ho = d_full[g.hidden, g.outputs].T
    return term


def resolvent_penalty_value(params, alpha: float = 0.8, horizon: int = 5) -> float:
    """Value-only evaluation of :func:`resolvent_penalty` (no gradient work)."""
    _check_penalty_args(alpha, horizon)
    g = assemble(params)
    base = alpha * g.w
    power = base.copy()
    acc = power.copy()
    for _ in range(2, int(horizon) + 2):
        power = power @ base
        acc += power
    return float(np.abs(g.io_block(acc)).sum())


def _check_penalty_args(alpha: float, horizon: int) -> None:
    if not 0 < alpha < 1:
        raise ContractViolationError(f"alpha must lie in (0, 1), got {alpha}")
    if int(horizon) != horizon or horizon < 1:
        raise ContractViolationError(
            f"horizon must be a positive integer, got {horizon}"
        )


def penalty_term(kind, params, alpha: float = 0.8, horizon: int = 5) -> RegTerm | None:
    """Evaluate the named penalty, or return None for the unregularised case."""
    name = canonical_reg(kind)
    if name == "none":
        return None
    if name == "l1_whh":
        return l1_whh(params)
    return resolvent_penalty(params, alpha=alpha, horizon=horizon)


def penalty_value(kind, params, alpha: float = 0.8, horizon: int = 5) -> float:
    name = canonical_reg(kind)
    if name == "none":
        return 0.0
    if name == "l1_whh":
        return l1_whh_value(params)
    return resolvent_penalty_value(params, alpha=alpha, horizon=horizon)


def compose_loss(task_loss: float, reg: RegTerm | None, beta: float) -> float:
    """Total loss task + beta * penalty; gradients merge linearly elsewhere."""
    if beta < 0:
        raise ContractViolationError(f"beta must be non-negative, got {beta}")
    if reg is None or beta == 0.0:
        return float(task_loss)
    return float(task_loss + beta * reg.value)
