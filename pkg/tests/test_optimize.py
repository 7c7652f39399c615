import numpy as np
import pytest
from numpy.testing import assert_allclose

from phasefield_engine.optimize import golden_section, golden_section_vec, projected_gradient, scan_then_golden


def test_golden_section_interior_minimum():
    result = golden_section(lambda x: (x - 0.3) ** 2 + 1.0, 0.0, 1.0)
    assert result["argmin"] == pytest.approx(0.3, abs=1e-6)
    assert result["minimum"] == pytest.approx(1.0, abs=1e-12)
    assert result["converged"]


def test_golden_section_boundary_minimum_is_exact():
    result = golden_section(lambda x: x, 2.0, 5.0)
    assert result["argmin"] == 2.0
    assert result["minimum"] == 2.0


def test_golden_section_ties_keep_smaller_abscissa():
    result = golden_section(lambda x: 0.0, -1.0, 1.0)
    assert result["argmin"] == -1.0


def test_golden_section_vec_matches_scalar():
    centers = np.array([0.1, 0.5, 0.9])
    xs, fs = golden_section_vec(lambda x: (x - centers) ** 2, np.zeros(3), np.ones(3), iterations=90)
    assert_allclose(xs, centers, atol=1e-8)
    assert_allclose(fs, 0.0, atol=1e-15)


def test_scan_then_golden_finds_global_minimum_of_multimodal():
    f = lambda x: np.cos(3 * x) + 0.1 * x  # noqa: E731
    grid = np.linspace(0.0, 6.0, 400)
    result = scan_then_golden(f, grid)
    brute = np.linspace(0.0, 6.0, 200001)
    assert result["minimum"] <= f(brute).min() + 1e-9
    assert 0 <= result["scan_index"] < grid.size


def test_projected_gradient_respects_box_and_fixed_entries():
    target = np.array([2.0, -1.0, 0.5, 0.7])
    fun = lambda x: float(np.sum((x - target) ** 2))  # noqa: E731
    grad = lambda x: 2.0 * (x - target)  # noqa: E731
    x0 = np.array([0.5, 0.5, 0.5, 0.2])
    fixed = np.array([False, False, False, True])
    result = projected_gradient(fun, grad, x0, 0.0, 1.0, fixed=fixed, max_iter=200)
    assert_allclose(result.x, [1.0, 0.0, 0.5, 0.2], atol=1e-9)
    assert result.converged
    assert result.line_search_failures == 0


def test_projected_gradient_history_is_monotone():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(6, 6))
    H = A @ A.T + np.eye(6)
    b = rng.normal(size=6)
    result = projected_gradient(lambda x: 0.5 * x @ H @ x - b @ x, lambda x: H @ x - b,
                                np.zeros(6), -0.2, 0.2, max_iter=300)
    assert np.all(np.diff(result.history) <= 0)
    assert np.all(result.x >= -0.2) and np.all(result.x <= 0.2)
