"""Forward synthesis of asymptotic lattices with known ground truth.

Each slice is the image of the integer lattice scaled by hbar, restricted
to the chart domain, pushed through the truncated chart expansion, and
perturbed by a hard-capped remainder term.  The cap C * hbar**N is a
finite stand-in for the ideal rapidly-vanishing remainder, with the order
N exposed as a parameter.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import ChartJet
from .errors import DegenerateSliceError, ValidationError
from .geometry import Region
from .model import AsymptoticLattice, LabelMap, LatticeSample

# relative guard against ties of k*hbar with the domain boundary
_RANGE_GUARD = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    """Perturbation bounded in norm by amplitude * hbar**order, always.

    The bound is enforced pointwise (uniform draw in the closed disk),
    not merely in distribution.
    """

    order: int = 3
    amplitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.order < 2:
            raise ValidationError(f"noise order must be >= 2, got {self.order}")
        if self.amplitude < 0:
            raise ValidationError("noise amplitude must be nonnegative")

    def radius(self, hbar: float) -> float:
        return self.amplitude * hbar ** self.order


@dataclass(frozen=True, eq=False)
class SliceTruth:
    """Ground truth for one slice: label of each emitted point, plus drops."""

    hbar: float
    labels: np.ndarray          # (N, 2) int, parallel to the slice's points
    dropped_labels: np.ndarray  # (M, 2) int
    dropped_points: np.ndarray  # (M, 2) float, perturbed positions


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Everything the generator knew: chart, noise, and per-slice labels."""

    chart: ChartJet
    noise: NoiseModel
    slices: tuple[SliceTruth, ...]

    def label_map(self, lattice: AsymptoticLattice, index: int) -> LabelMap:
        """True labelling of slice `index` as a LabelMap."""
        s = lattice.samples[index]
        t = self.slices[index]
        if s.hbar != t.hbar or len(s) != len(t.labels):
            raise ValidationError("ground truth does not match the lattice slice")
        return LabelMap(s.hbar, s.points, t.labels)


def _lattice_indices(domain, hbar: float) -> np.ndarray:
    """All integer pairs k with hbar*k inside the (closed) domain."""
    guard = _RANGE_GUARD
    k1 = np.arange(math.ceil(domain.xmin / hbar - guard),
                   math.floor(domain.xmax / hbar + guard) + 1, dtype=np.int64)
    k2 = np.arange(math.ceil(domain.ymin / hbar - guard),
                   math.floor(domain.ymax / hbar + guard) + 1, dtype=np.int64)
    g1, g2 = np.meshgrid(k1, k2, indexing="ij")
    return np.column_stack([g1.ravel(), g2.ravel()])


def _disk_noise(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """n samples uniform in the closed disk; the norm cap is enforced hard."""
    if radius == 0.0:
        return np.zeros((n, 2))
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * np.pi * rng.random(n)
    out = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    # float rounding can overshoot the cap by an ulp; pull those back
    norm2 = out[:, 0] ** 2 + out[:, 1] ** 2
    over = norm2 > radius * radius
    while np.any(over):
        out[over] *= 1.0 - 1e-15
        norm2 = out[:, 0] ** 2 + out[:, 1] ** 2
        over = norm2 > radius * radius
    return out


def generate(
    chart: ChartJet,
    region: Region,
    hbars: list[float],
    noise: NoiseModel | None = None,
) -> tuple[AsymptoticLattice, GroundTruth]:
    """Emit one slice per hbar together with its exact labelling.

    Points whose perturbed image leaves the region bounds are dropped (and
    recorded), never clamped.  A slice that retains no point raises
    :class:`DegenerateSliceError` naming the offending hbar.

    The random stream is derived per slice from (seed, slice index), so
    identical inputs give bit-identical outputs and slices are independent.
    """
    noise = noise or NoiseModel(amplitude=0.0)
    hbars = [float(h) for h in hbars]
    if any(b >= a for a, b in zip(hbars, hbars[1:])):
        raise ValidationError(f"hbar values must strictly decrease, got {hbars}")

    samples = []
    truths = []
    for j, hbar in enumerate(hbars):
        ks = _lattice_indices(chart.domain, hbar)
        pts = chart.evaluate(hbar, ks * hbar)
        rng = np.random.default_rng([noise.seed, j])
        pts = pts + _disk_noise(rng, len(pts), noise.radius(hbar))
        keep = region.bounds.contains(pts)
        if not keep.any():
            raise DegenerateSliceError(hbar)
        samples.append(LatticeSample(hbar, pts[keep]))
        truths.append(SliceTruth(
            hbar=hbar,
            labels=np.ascontiguousarray(ks[keep]),
            dropped_labels=np.ascontiguousarray(ks[~keep]),
            dropped_points=np.ascontiguousarray(pts[~keep]),
        ))

    lattice = AsymptoticLattice(region, tuple(samples))
    return lattice, GroundTruth(chart=chart, noise=noise, slices=tuple(truths))
