"""Closed-form optimal map checks.

The reduced ridge solution used by the package is verified against two
independent routes: the exact hand value for module averaging (every
within-module entry is 1/(L*F + 1) = 1/21 at the default sizes) and a
brute-force solve of the full, unreduced normal equations built column
by column from the duplicated design.
"""

import numpy as np
import pytest

from pathweaver.errors import UnsupportedTaskError
from pathweaver.oracle import (
    design_block,
    design_matrix,
    has_optimal_map,
    multiplication_optimal_map,
    optimal_map,
    ridge_optimal_map,
    ridge_predict,
    save_optimal_map,
)
from pathweaver.taskgen import LINEAR_KINDS, TaskKind, TaskSpec, feature_expander, make_dataset


def brute_force_map(spec):
    """Full normal-equations solve on the unreduced L*F_all design."""
    a = design_matrix(spec)
    ratio = (spec.sigma_eps / spec.sigma_mu) ** 2
    w_module = np.linalg.solve(a.T @ a + ratio * np.eye(spec.modules), a.T)
    # average over the temporal copies, then duplicate across features
    w_module = w_module.reshape(spec.modules, spec.seq_len, spec.f_all).mean(axis=1)
    g_mf = feature_expander(spec.modules, spec.features_per_module)
    return (g_mf @ w_module).T  # input features x output features


def test_module_averaging_map_is_exactly_one_over_21():
    spec = TaskSpec(kind=TaskKind.MODULE_AVERAGING)
    m = ridge_optimal_map(spec).values
    f = spec.features_per_module
    for i in range(spec.modules):
        block = m[i * f : (i + 1) * f, i * f : (i + 1) * f]
        np.testing.assert_allclose(block, 1.0 / 21.0, atol=1e-10)
    off = m.copy()
    for i in range(spec.modules):
        off[i * f : (i + 1) * f, i * f : (i + 1) * f] = 0.0
    assert np.abs(off).max() < 1e-10


@pytest.mark.parametrize("kind", sorted(LINEAR_KINDS, key=lambda k: k.value))
def test_reduced_solve_matches_brute_force(kind):
    spec = TaskSpec(kind=kind)
    got = ridge_optimal_map(spec).values
    want = brute_force_map(spec)
    np.testing.assert_allclose(got, want, atol=1e-8)


@pytest.mark.parametrize("kind", sorted(LINEAR_KINDS, key=lambda k: k.value))
def test_reduced_solve_matches_brute_force_odd_sizes(kind):
    spec = TaskSpec(kind=kind, modules=3, features_per_module=2, seq_len=4,
                    sigma_mu=1.5, sigma_eps=0.7)
    got = ridge_optimal_map(spec).values
    want = brute_force_map(spec)
    np.testing.assert_allclose(got, want, atol=1e-8)


def test_design_block_shapes():
    spec = TaskSpec(kind=TaskKind.SUBTRACTION, modules=3, features_per_module=2)
    b = design_block(spec)
    assert b.shape == (6, 3)
    a = design_matrix(spec)
    assert a.shape == (6 * spec.seq_len, 3)
    np.testing.assert_array_equal(a[:6], b)
    np.testing.assert_array_equal(a[6:12], b)


def test_multiplication_map_structure():
    spec = TaskSpec(kind=TaskKind.MULTIPLICATION)
    m = multiplication_optimal_map(spec).values
    f = spec.features_per_module
    np.testing.assert_array_equal(m[:f, :f], np.ones((f, f)))
    rest = m.copy()
    rest[:f, :f] = 0.0
    assert np.abs(rest).max() == 0.0


def test_optimal_map_dispatch_and_support():
    for kind in LINEAR_KINDS:
        assert has_optimal_map(kind)
        assert optimal_map(TaskSpec(kind=kind)).values.shape == (16, 16)
    assert has_optimal_map(TaskKind.MULTIPLICATION)
    assert not has_optimal_map(TaskKind.ON_OFF_AVERAGING)
    with pytest.raises(UnsupportedTaskError):
        optimal_map(TaskSpec(kind=TaskKind.ON_OFF_AVERAGING))


def test_ridge_predict_beats_mean_predictor():
    spec = TaskSpec(kind=TaskKind.MODULE_AVERAGING, samples=500, seed=11)
    ds = make_dataset(spec)
    x_test, y_test = ds.subset("test")
    pred = ridge_predict(spec, x_test)
    ridge_mse = float(np.mean((pred - y_test) ** 2))
    base_mse = float(np.mean(y_test**2))
    assert ridge_mse < 0.2 * base_mse


def test_ridge_predict_matches_augmented_lstsq():
    """Ridge via normal equations equals least squares on the noise-padded
    augmented system [A; sqrt(ratio) I]."""
    spec = TaskSpec(kind=TaskKind.ADDITION, samples=100, seed=2)
    ds = make_dataset(spec)
    x = ds.x[:10]
    a = design_matrix(spec)
    ratio = (spec.sigma_eps / spec.sigma_mu) ** 2
    aug = np.vstack([a, np.sqrt(ratio) * np.eye(spec.modules)])
    flat = x.reshape(x.shape[0], -1)
    rhs = np.vstack([flat.T, np.zeros((spec.modules, flat.shape[0]))])
    mu_hat = np.linalg.lstsq(aug, rhs, rcond=None)[0].T
    g_mf = feature_expander(spec.modules, spec.features_per_module)
    want = mu_hat @ g_mf.T
    got = ridge_predict(spec, x)
    np.testing.assert_allclose(got, want, atol=1e-8)


def test_save_optimal_map_roundtrip(tmp_path):
    from pathweaver.csvio import load_matrix_csv

    spec = TaskSpec(kind=TaskKind.SUBTRACTION)
    m = optimal_map(spec)
    path = tmp_path / "opt.csv"
    save_optimal_map(m, path)
    values, meta = load_matrix_csv(path)
    np.testing.assert_array_equal(values, m.values)
    assert meta["rows"] == 16 and meta["cols"] == 16
