"""Checks for the shared linear algebra and RNG helpers.

Matrix routines are verified against naive reference implementations
(triple-loop products, repeated squaring-free powers) and the spectral
radius against both numpy's eigenvalues on random matrices and hand
solvable cases.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathweaver.errors import ContractViolationError, ConvergenceError
from pathweaver.numerics import (
    derive_seed,
    make_rng,
    matmul,
    matpow,
    pearson,
    sample_normal,
    spectral_radius,
)


def loop_matmul(a, b):
    """Reference product with explicit index loops, no vectorisation."""
    n, m = a.shape
    m2, p = b.shape
    assert m == m2
    out = np.zeros((n, p))
    for i in range(n):
        for j in range(p):
            acc = 0.0
            for k in range(m):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


def test_matmul_matches_loop_reference():
    rng = np.random.default_rng(7)
    for _ in range(25):
        n, m, p = rng.integers(1, 7, size=3)
        a = rng.normal(size=(n, m))
        b = rng.normal(size=(m, p))
        np.testing.assert_allclose(matmul(a, b), loop_matmul(a, b), atol=1e-12)


def test_matmul_rejects_mismatched_shapes():
    with pytest.raises(ContractViolationError):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matpow_zero_is_identity():
    a = np.arange(9.0).reshape(3, 3)
    np.testing.assert_array_equal(matpow(a, 0), np.eye(3))


def test_matpow_matches_repeated_product():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(4, 4)) * 0.5
    ref = np.eye(4)
    for k in range(1, 8):
        ref = ref @ a
        np.testing.assert_allclose(matpow(a, k), ref, atol=1e-12)


def test_matpow_rejects_negative_exponent():
    with pytest.raises(ContractViolationError):
        matpow(np.eye(2), -1)


def test_spectral_radius_diagonal():
    assert spectral_radius(np.diag([0.5, -2.0, 1.0])) == pytest.approx(2.0)


def test_spectral_radius_rotation_matrix():
    # pure rotation: complex eigenvalues on the unit circle
    theta = 0.73
    r = np.array(
        [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
    )
    assert spectral_radius(r) == pytest.approx(1.0, abs=1e-9)


def test_spectral_radius_matches_power_growth():
    """|A^k|^(1/k) tends to rho; the root damps oscillation from complex
    eigenvalue pairs that a single-step norm ratio would show."""
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rng.normal(size=(6, 6))
        a = a / np.linalg.norm(a)
        rho = spectral_radius(a)
        k = 200
        growth = np.linalg.norm(matpow(a, k)) ** (1.0 / k)
        assert growth == pytest.approx(rho, rel=0.03)


def test_spectral_radius_rejects_zero_matrix():
    with pytest.raises((ContractViolationError, ConvergenceError)):
        spectral_radius(np.zeros((3, 3)))


def test_spectral_radius_rejects_nonfinite():
    a = np.eye(2)
    a[0, 1] = np.inf
    with pytest.raises(ContractViolationError):
        spectral_radius(a)


def test_pearson_matches_corrcoef():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(8, 8))
    b = a * 0.3 + rng.normal(size=(8, 8))
    expected = np.corrcoef(a.ravel(), b.ravel())[0, 1]
    assert pearson(a, b) == pytest.approx(expected, abs=1e-12)


def test_pearson_perfect_and_anti():
    a = np.arange(12.0).reshape(3, 4)
    assert pearson(a, 2.0 * a + 1.0) == pytest.approx(1.0)
    assert pearson(a, -a) == pytest.approx(-1.0)


def test_pearson_undefined_for_constant_input():
    from pathweaver.errors import UndefinedCorrelationError

    with pytest.raises(UndefinedCorrelationError):
        pearson(np.ones((3, 3)), np.arange(9.0).reshape(3, 3))


def test_make_rng_reproducible():
    a = make_rng(42, "stream").normal(size=5)
    b = make_rng(42, "stream").normal(size=5)
    np.testing.assert_array_equal(a, b)


def test_make_rng_keys_give_independent_streams():
    a = make_rng(42, "one").normal(size=5)
    b = make_rng(42, "two").normal(size=5)
    assert not np.allclose(a, b)


def test_derive_seed_depends_on_every_key():
    base = derive_seed(0, "train", 1, 2)
    assert derive_seed(0, "train", 1, 3) != base
    assert derive_seed(0, "train", 2, 2) != base
    assert derive_seed(1, "train", 1, 2) != base
    assert derive_seed(0, "data", 1, 2) != base


@given(st.integers(0, 2**31 - 1), st.text(max_size=12), st.integers(0, 99))
@settings(max_examples=60, deadline=None)
def test_derive_seed_stable_and_in_range(seed, key, idx):
    first = derive_seed(seed, key, idx)
    assert first == derive_seed(seed, key, idx)
    assert 0 <= first < 2**64


def test_sample_normal_moments():
    rng = make_rng(0, "moments")
    x = sample_normal(rng, 1.5, 2.0, (200000,))
    assert x.mean() == pytest.approx(1.5, abs=0.02)
    assert x.std() == pytest.approx(2.0, abs=0.02)


def test_sample_normal_rejects_negative_std():
    with pytest.raises(ContractViolationError):
        sample_normal(make_rng(0), 0.0, -1.0, (3,))
