"""Bivariate polynomial helpers.

Polynomials are stored as (d+1, d+1) coefficient arrays `c` with
p(x, y) = sum_ij c[i, j] * x**i * y**j; entries above the anti-diagonal
(total degree > d) are kept at zero.
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as npoly


def poly_eval(coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate at an (N, 2) point array, returning shape (N,)."""
    pts = np.asarray(pts, dtype=float)
    return npoly.polyval2d(pts[..., 0], pts[..., 1], coeffs)


def poly_dx(coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(coeffs)
    n = coeffs.shape[0]
    for i in range(1, n):
        out[i - 1, :] = i * coeffs[i, :]
    return out


def poly_dy(coeffs: np.ndarray) -> np.ndarray:
    out = np.zeros_like(coeffs)
    n = coeffs.shape[1]
    for j in range(1, n):
        out[:, j - 1] = j * coeffs[:, j]
    return out


def total_degree(coeffs: np.ndarray) -> int:
    nz = np.argwhere(coeffs != 0.0)
    if nz.size == 0:
        return 0
    return int(nz.sum(axis=1).max())


def shifted_power(scale: float, offset: float, power: int) -> np.ndarray:
    """1D coefficients of (scale*u + offset)**power in the variable u."""
    out = np.zeros(power + 1)
    binom = 1.0
    for i in range(power + 1):
        # binom = C(power, i), accumulated multiplicatively
        out[i] = binom * (scale ** i) * (offset ** (power - i))
        binom = binom * (power - i) / (i + 1)
    return out


def compose_affine(coeffs: np.ndarray, sx: float, ox: float, sy: float, oy: float) -> np.ndarray:
    """Coefficients of p(sx*x + ox, sy*y + oy) in the variables (x, y).

    Used to convert a fit expressed in centered, scaled coordinates back to
    raw monomials: with s = (x - mx)/hx one passes sx=1/hx, ox=-mx/hx.
    """
    n = coeffs.shape[0]
    out = np.zeros_like(coeffs)
    for i in range(n):
        for j in range(n):
            c = coeffs[i, j]
            if c == 0.0:
                continue
            cx = shifted_power(sx, ox, i)
            cy = shifted_power(sy, oy, j)
            out[: i + 1, : j + 1] += c * np.outer(cx, cy)
    return out


def monomial_design(pts: np.ndarray, degree: int) -> np.ndarray:
    """Design matrix of monomials x**a * y**b with a+b <= degree.

    Column order follows :func:`monomial_exponents`.
    """
    pts = np.asarray(pts, dtype=float)
    cols = []
    for a, b in monomial_exponents(degree):
        cols.append(pts[:, 0] ** a * pts[:, 1] ** b)
    return np.column_stack(cols)


def monomial_exponents(degree: int) -> list[tuple[int, int]]:
    """Exponent pairs (a, b), a+b <= degree, in graded lexicographic order."""
    return [(a, t - a) for t in range(degree + 1) for a in range(t, -1, -1)]


def coeffs_from_vector(vec: np.ndarray, degree: int) -> np.ndarray:
    """Inverse of flattening along :func:`monomial_exponents`."""
    out = np.zeros((degree + 1, degree + 1))
    for val, (a, b) in zip(vec, monomial_exponents(degree)):
        out[a, b] = val
    return out
