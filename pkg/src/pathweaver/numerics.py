"""Dense float64 matrix arithmetic, seeded sampling, and small statistics.

Matrices throughout the package are plain 2-D ``numpy.ndarray``s of float64
in row-major layout. Random streams are ``numpy.random.Generator`` instances
over PCG64; substreams are derived through ``SeedSequence``, so one 64-bit
seed plus a tuple of keys reproduces the same draw sequence bit for bit on
any platform with IEEE-754 doubles.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    ContractViolationError,
    ConvergenceError,
    UndefinedCorrelationError,
)

Rng = np.random.Generator

_SEED_MASK = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _key_to_int(key) -> int:
    """Map an int or string key to a 64-bit entropy word (FNV-1a for strings)."""
    if isinstance(key, (int, np.integer)):
        return int(key) & _SEED_MASK
    acc = _FNV_OFFSET
    for byte in str(key).encode("utf-8"):
        acc = ((acc ^ byte) * _FNV_PRIME) & _SEED_MASK
    return acc


def make_rng(seed, *keys) -> Rng:
    """Generator seeded by ``(seed, *keys)``; equal arguments give equal streams."""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def derive_seed(seed, *keys) -> int:
    """Fold ``(seed, *keys)`` into a fresh 64-bit integer seed."""
    entropy = [_key_to_int(seed)] + [_key_to_int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def as_matrix(a, name="matrix") -> np.ndarray:
    """Coerce ``a`` to a 2-D float64 array, rejecting any other rank."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D, got shape {arr.shape}")
    return arr


def _require_square(a, name="matrix") -> np.ndarray:
    arr = as_matrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise ContractViolationError(f"{name} must be square, got shape {arr.shape}")
    return arr


def matmul(a, b) -> np.ndarray:
    """Matrix product with an explicit inner-dimension check."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ContractViolationError(
            f"inner dimensions do not match: {a.shape} x {b.shape}"
        )
    return a @ b


def matpow(a, k: int) -> np.ndarray:
    """k-th matrix power by repeated multiplication; ``matpow(a, 0)`` is I."""
    a = _require_square(a)
    if int(k) != k or k < 0:
        raise ContractViolationError(f"exponent must be a non-negative integer, got {k}")
    out = np.eye(a.shape[0])
    for _ in range(int(k)):
        out = out @ a
    return out


def _growth_rate_estimate(a: np.ndarray, iters: int = 200) -> float:
    """Crude spectral-radius estimate exp(log||A^k||_F / k) with rescaling."""
    acc = np.eye(a.shape[0])
    log_norm = 0.0
    for _ in range(iters):
        acc = acc @ a
        scale = float(np.linalg.norm(acc))
        if scale == 0.0:
            return 0.0
        if not np.isfinite(scale):
            return float("nan")
        log_norm += np.log(scale)
        acc /= scale
    return float(np.exp(log_norm / iters))


def spectral_radius(a, tol: float = 1e-6) -> float:
    """Largest absolute eigenvalue of a square, nonzero matrix.

    Solved with the dense QR eigensolver, which resolves the radius to
    machine precision, well inside any reasonable ``tol``. If the
    eigensolver fails to converge a :class:`ConvergenceError` is raised
    carrying a growth-rate estimate of the radius in ``estimate``.
    """
    a = _require_square(a)
    if not np.all(np.isfinite(a)):
        raise ContractViolationError("matrix entries must be finite")
    if not np.any(a):
        raise ContractViolationError("spectral radius of the zero matrix is excluded")
    if tol <= 0:
        raise ContractViolationError(f"tol must be positive, got {tol}")
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(
            "eigenvalue iteration did not converge",
            estimate=_growth_rate_estimate(a),
        ) from exc
    return float(np.max(np.abs(eigs)))


def pearson(a, b) -> float:
    """Pearson correlation of the flattened entries of two same-shape arrays."""
    av = np.asarray(a, dtype=np.float64).ravel()
    bv = np.asarray(b, dtype=np.float64).ravel()
    if av.shape != bv.shape:
        raise ContractViolationError(
            f"inputs must have the same number of entries: {av.size} vs {bv.size}"
        )
    da = av - av.mean()
    db = bv - bv.mean()
    na = float(np.linalg.norm(da))
    nb = float(np.linalg.norm(db))
    if na == 0.0 or nb == 0.0:
        raise UndefinedCorrelationError("correlation is undefined for a constant input")
    r = float(da @ db) / (na * nb)
    return min(1.0, max(-1.0, r))


def sample_normal(rng: Rng, mean: float, std: float, shape) -> np.ndarray:
    """I.i.d. normal draws; deterministic given the generator state."""
    if std < 0:
        raise ContractViolationError(f"std must be non-negative, got {std}")
    return rng.normal(loc=mean, scale=std, size=shape)
