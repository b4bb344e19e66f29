"""Model-system catalog and chart-jet behavior."""
import numpy as np
import pytest
import sympy as sp

from latkit import ChartJet, Rect, UnsupportedModelError, ValidationError, model_system


def test_harmonic_pair_is_identity_plus_half_shift():
    chart = model_system("harmonic_pair")
    assert chart.order == 1
    pts = np.array([[0.2, 0.7], [0.0, 0.0]])
    assert np.allclose(chart.g0(pts), pts)
    hbar = 0.125
    expected = pts + hbar * 0.5
    assert np.allclose(chart.evaluate(hbar, pts), expected)


def test_zero_shear_is_identity():
    chart = model_system("shear", {"strength": 0.0})
    pts = np.random.default_rng(0).uniform(0, 1, (20, 2))
    assert np.array_equal(chart.evaluate(0.1, pts), pts)
    assert np.allclose(chart.g0_jacobian(pts), np.eye(2))


def test_polar_jacobian_matches_symbolic_derivative():
    a = 1.0
    chart = model_system("polar_action", {"curvature": a})
    x, y = sp.symbols("x y", real=True)
    gx, gy = x, y + sp.Rational(1, 2) * a * x ** 2
    jac_sym = sp.Matrix([[sp.diff(gx, x), sp.diff(gx, y)],
                         [sp.diff(gy, x), sp.diff(gy, y)]])
    for x0, y0 in [(0.5, 0.1), (0.5, 0.9), (0.25, 0.3)]:
        expected = np.array(jac_sym.subs({x: x0, y: y0}), dtype=float)
        got = chart.g0_jacobian(np.array([[x0, y0]]))[0]
        assert np.allclose(got, expected, atol=1e-14)
    at_half = chart.g0_jacobian(np.array([[0.5, 0.4]]))[0]
    assert np.allclose(at_half, [[1, 0], [0.5, 1]])
    assert chart.g0_jacobian_det(np.array([[0.5, 0.4]]))[0] == pytest.approx(1.0)


def test_unknown_model_rejected():
    with pytest.raises(UnsupportedModelError):
        model_system("focus_focus")
    with pytest.raises(UnsupportedModelError):
        model_system("shear", {"strength": float("inf")})
    with pytest.raises(UnsupportedModelError):
        model_system("harmonic_pair", {"bogus": 1})


def test_degenerate_leading_term_rejected_at_construction():
    # x-component constant: Jacobian determinant identically zero
    coeffs = np.zeros((1, 2, 2, 2))
    coeffs[0, 1, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        ChartJet(Rect(0, 0, 1, 1), coeffs)
    # sign change across the domain is rejected too
    c2 = np.zeros((1, 2, 3, 3))
    c2[0, 0, 2, 0] = 1.0   # gx = x**2, dgx/dx = 2x changes sign on [-1, 1]
    c2[0, 1, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        ChartJet(Rect(-1, -1, 1, 1), c2)
    # unchecked escape hatch still constructs
    ChartJet.unchecked(Rect(-1, -1, 1, 1), c2)


def test_degree_and_order_reported():
    chart = model_system("polar_action", {"curvature": 0.5})
    assert chart.order == 0
    assert chart.degree == 2
