"""Seeded instance families shared by the test modules.

The acceptance family alternates affine and quadratic charts with Jacobian
condition number at most 4, sized so the working subregion holds at least
a 5x5 block of points at the coarsest hbar.
"""
from __future__ import annotations

import numpy as np

from latkit import ChartJet, NoiseModel, Rect, Region, generate

COND_CAP = 4.0
COARSEST_HBAR = 0.2
MIN_BLOCK = 25

_DOMAIN = Rect(0.0, 0.0, 1.2, 1.2)


def _rot(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def _affine_coeffs(mat: np.ndarray, shift: np.ndarray) -> np.ndarray:
    c = np.zeros((1, 2, 2, 2))
    for comp in range(2):
        c[0, comp, 0, 0] = shift[comp]
        c[0, comp, 1, 0] = mat[comp, 0]
        c[0, comp, 0, 1] = mat[comp, 1]
    return c


def _chart_condition(chart: ChartJet) -> float:
    jac = chart.g0_jacobian(chart.domain.grid(9))
    svals = np.linalg.svd(jac, compute_uv=False)
    return float((svals[:, 0] / svals[:, 1]).max())


def random_chart(seed: int) -> ChartJet:
    """Affine (even seeds) or degree-2 (odd seeds) chart, condition <= 4."""
    rng = np.random.default_rng([930001, seed])
    quadratic = seed % 2 == 1
    while True:
        mat = _rot(rng.uniform(0, 2 * np.pi)) @ np.diag(rng.uniform(0.6, 1.8, 2)) \
            @ _rot(rng.uniform(0, 2 * np.pi))
        shift = rng.uniform(-0.2, 0.2, 2)
        coeffs = _affine_coeffs(mat, shift)
        if quadratic:
            wide = np.zeros((1, 2, 3, 3))
            wide[:, :, :2, :2] = coeffs
            eps = rng.uniform(0.05, 0.25)
            for comp in range(2):
                wide[0, comp, 2, 0] = rng.uniform(-eps, eps)
                wide[0, comp, 1, 1] = rng.uniform(-eps, eps)
                wide[0, comp, 0, 2] = rng.uniform(-eps, eps)
            coeffs = wide
        try:
            chart = ChartJet(_DOMAIN, coeffs)
        except ValueError:
            continue
        if _chart_condition(chart) <= COND_CAP:
            return chart


def region_for(chart: ChartJet, margin_frac: float = 0.04) -> Region:
    """Bounding box of the chart image with a proportional inner margin."""
    img = chart.g0(chart.domain.grid(21))
    lo = img.min(axis=0)
    hi = img.max(axis=0)
    bounds = Rect(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
    return Region(bounds, margin_frac * min(bounds.width, bounds.height))


def acceptance_instance(seed: int, hbars=(0.2, 0.1, 0.05, 0.02),
                        noise: NoiseModel | None = None):
    """(chart, region, lattice, truth) with >= 5x5 points in the inner box."""
    attempt = seed
    while True:
        chart = random_chart(attempt)
        region = region_for(chart)
        lattice, truth = generate(chart, region, list(hbars),
                                  noise or NoiseModel(amplitude=0.0))
        coarse = lattice.samples[0]
        if int(region.inner.contains(coarse.points).sum()) >= MIN_BLOCK:
            return chart, region, lattice, truth
        attempt += 1000  # derive a fresh chart deterministically
