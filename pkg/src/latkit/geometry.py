"""Axis-aligned planar geometry shared across the toolkit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Rect:
    """Closed axis-aligned rectangle [xmin, xmax] x [ymin, ymax]."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ValidationError(
                f"rectangle must have positive width and height, got {self}"
            )

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized closed-rectangle membership for an (N, 2) array."""
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        return (
            (pts[:, 0] >= self.xmin)
            & (pts[:, 0] <= self.xmax)
            & (pts[:, 1] >= self.ymin)
            & (pts[:, 1] <= self.ymax)
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def shrink(self, margin: float) -> "Rect":
        """Rectangle shrunk by `margin` on every side."""
        return Rect(
            self.xmin + margin, self.ymin + margin,
            self.xmax - margin, self.ymax - margin,
        )

    def grid(self, n: int) -> np.ndarray:
        """(n*n, 2) array of evenly spaced sample points, corners included."""
        xs = np.linspace(self.xmin, self.xmax, n)
        ys = np.linspace(self.ymin, self.ymax, n)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class Region:
    """Spectral window: outer bounds plus the inner working subregion.

    `inner_margin` is the distance by which the bounds are shrunk to obtain
    the working subregion where the labelling walk confines its targets.
    """

    bounds: Rect
    inner_margin: float

    def __post_init__(self):
        if self.inner_margin < 0:
            raise ValidationError("inner_margin must be nonnegative")
        if self.inner_margin >= 0.5 * min(self.bounds.width, self.bounds.height):
            raise ValidationError(
                "inner_margin must be smaller than half the smaller side "
                f"(margin={self.inner_margin}, bounds={self.bounds})"
            )

    @property
    def inner(self) -> Rect:
        """The working subregion, compactly contained in the bounds."""
        return self.bounds.shrink(self.inner_margin)
