"""Deterministic SVG rendering of a slice and its labelling.

Output is plain text assembled with fixed number formatting, so identical
inputs produce byte-identical files; no raster or plotting library is
involved.
"""
from __future__ import annotations

from .geometry import Region
from .model import LabelMap, LatticeSample

_WIDTH = 640
_PAD = 24.0
_POINT_COLOR = "#1f6fb4"
_BASIS_U_COLOR = "#d62728"
_BASIS_V_COLOR = "#2ca02c"


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_slice(sample: LatticeSample, region: Region,
                 label_map: LabelMap | None = None) -> str:
    """SVG scatter of one slice; labels and basis vectors when provided."""
    b = region.bounds
    scale = (_WIDTH - 2 * _PAD) / b.width
    height = 2 * _PAD + b.height * scale

    def sx(x: float) -> float:
        return _PAD + (x - b.xmin) * scale

    def sy(y: float) -> float:
        return height - _PAD - (y - b.ymin) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_f(height)}" viewBox="0 0 {_WIDTH} {_f(height)}">',
        f'<rect x="{_f(sx(b.xmin))}" y="{_f(sy(b.ymax))}" '
        f'width="{_f(b.width * scale)}" height="{_f(b.height * scale)}" '
        'fill="none" stroke="#999999" stroke-width="1"/>',
    ]
    inner = region.inner
    parts.append(
        f'<rect x="{_f(sx(inner.xmin))}" y="{_f(sy(inner.ymax))}" '
        f'width="{_f(inner.width * scale)}" height="{_f(inner.height * scale)}" '
        'fill="none" stroke="#bbbbbb" stroke-width="1" stroke-dasharray="4 3"/>'
    )

    if label_map is not None:
        basis = label_map.basis_vectors()
        p00 = label_map.basepoint
        if basis is not None and p00 is not None:
            u, v = basis
            for vec, color in ((u, _BASIS_U_COLOR), (v, _BASIS_V_COLOR)):
                parts.append(
                    f'<line x1="{_f(sx(p00[0]))}" y1="{_f(sy(p00[1]))}" '
                    f'x2="{_f(sx(p00[0] + vec[0]))}" y2="{_f(sy(p00[1] + vec[1]))}" '
                    f'stroke="{color}" stroke-width="2"/>'
                )

    for x, y in sample.points:
        parts.append(
            f'<circle cx="{_f(sx(x))}" cy="{_f(sy(y))}" r="3" '
            f'fill="{_POINT_COLOR}"/>'
        )

    if label_map is not None:
        for p, k in zip(label_map.points, label_map.labels):
            parts.append(
                f'<text x="{_f(sx(p[0]) + 4.0)}" y="{_f(sy(p[1]) - 4.0)}" '
                f'font-size="8" fill="#333333">({int(k[0])},{int(k[1])})</text>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
