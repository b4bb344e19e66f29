"""Labelling engine: single-slice walk and hbar-sequence harmonization.

The single-slice procedure seeds an origin at the point nearest a chosen
anchor, claims its nearest neighbour as (1, 0), grows the row in both
directions by linear extrapolation, seeds (0, 1) with the nearest
non-collinear unclaimed point, and repeats row by row along the spine,
finally enforcing positive orientation by flipping the sign of the first
index if needed.  Claims are global: no point is ever labelled twice.

Across a decreasing hbar sequence the per-slice candidate maps carry an
arbitrary basis each; the sequence step corrects slice j+1 onto slice j by
the unimodular witness that best aligns their 1/hbar-rescaled frames, and
aligns origins opportunistically when consecutive slices share points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import backend as _backend
from ._walk import GridIndex, KDIndex, WalkResult, build_grid, run_walk
from .errors import InsufficientDataError, LatKitError, SequenceBreakError, ValidationError
from .geometry import Region
from .model import (
    AsymptoticLattice,
    LabelMap,
    LatticeSample,
    LinearLabelling,
    WalkStats,
    Witness,
    apply_witness,
)

_TIE_BREAKS = ("lex_smallest",)
_INDEXES = ("grid_bucket", "kd")

# correction search space: unimodular matrices with entries in [-2, 2],
# determinant +1, identity first so exact ties prefer no change
_CORRECTION_BOUND = 2
# a genuinely different basis moves some frame column by at least one
# lattice unit, so half a unit separates drift from relabelling
_COHERENCE_FACTOR = 0.5


@dataclass(frozen=True)
class LabellingConfig:
    """Parameters of the single-slice walk.

    anchor defaults to the center of the working subregion.  max_rows and
    max_cols cap |k2| and |k1| respectively (None = unlimited).
    rejection_factor is the claim radius in units of the local step length;
    angle_eps (radians) rejects (0, 1) candidates collinear with the first
    row.
    """

    anchor: tuple[float, float] | None = None
    tie_break: str = "lex_smallest"
    max_rows: int | None = None
    max_cols: int | None = None
    neighbor_index: str = "grid_bucket"
    rejection_factor: float = 0.5
    angle_eps: float = 1e-6

    def __post_init__(self):
        if self.tie_break not in _TIE_BREAKS:
            raise ValidationError(f"unknown tie_break {self.tie_break!r}")
        if self.neighbor_index not in _INDEXES:
            raise ValidationError(f"unknown neighbor_index {self.neighbor_index!r}")
        if not (self.rejection_factor > 0):
            raise ValidationError("rejection_factor must be positive")
        if self.angle_eps < 0:
            raise ValidationError("angle_eps must be nonnegative")
        for cap in (self.max_rows, self.max_cols):
            if cap is not None and cap < 1:
                raise ValidationError("max_rows/max_cols must be >= 1 when set")


@dataclass(frozen=True)
class SequenceConfig:
    """Parameters of the hbar-sequence step.

    density_ratio is the required lower bound on consecutive hbar ratios
    (violations warn, they do not stop the computation).  overlap_min is
    the number of shared points two consecutive slices must exhibit before
    their origins are aligned.
    """

    density_ratio: float = 0.5
    overlap_min: int = 1

    def __post_init__(self):
        if not (0 < self.density_ratio <= 1):
            raise ValidationError("density_ratio must lie in (0, 1]")
        if self.overlap_min < 1:
            raise ValidationError("overlap_min must be >= 1")


def _resolve_anchor(cfg: LabellingConfig, region: Region) -> tuple[float, float]:
    inner = region.inner
    if cfg.anchor is None:
        return inner.center
    ax, ay = float(cfg.anchor[0]), float(cfg.anchor[1])
    if not inner.contains_point(ax, ay):
        raise ValidationError(
            f"anchor {(ax, ay)} lies outside the working subregion {inner}"
        )
    return ax, ay


def label_single_with_stats(
    sample: LatticeSample,
    region: Region,
    cfg: LabellingConfig | None = None,
    backend: str | None = None,
) -> tuple[LabelMap, WalkStats]:
    """Label one slice and report walk diagnostics alongside the map."""
    cfg = cfg or LabellingConfig()
    pts = sample.points
    if len(pts) and not region.bounds.contains(pts).all():
        raise ValidationError("sample has points outside the region bounds")
    inner = region.inner
    n_inner = int(inner.contains(pts).sum()) if len(pts) else 0
    if n_inner < 4:
        raise InsufficientDataError(
            f"need at least 4 points inside the working subregion, found {n_inner} "
            f"(hbar={sample.hbar})"
        )
    cx, cy = _resolve_anchor(cfg, region)
    sin_eps = math.sin(cfg.angle_eps)
    mr = -1 if cfg.max_rows is None else int(cfg.max_rows)
    mc = -1 if cfg.max_cols is None else int(cfg.max_cols)

    if cfg.neighbor_index == "kd":
        index = KDIndex(pts, sin_eps)
        res = run_walk(pts, index, inner, cx, cy, cfg.rejection_factor, mr, mc)
    else:
        use = backend or _backend.default_backend()
        if use == "cython" and _backend.kernel_available():
            g = build_grid(pts)
            out = _backend.get_kernel().walk(
                pts, g.cell_start, g.cell_order, g.gx, g.gy,
                g.x0, g.y0, g.csx, g.csy,
                inner.xmin, inner.ymin, inner.xmax, inner.ymax,
                cx, cy, cfg.rejection_factor, sin_eps, mr, mc,
            )
            res = WalkResult(*out)
        else:
            index = GridIndex(pts, sin_eps)
            res = run_walk(pts, index, inner, cx, cy, cfg.rejection_factor, mr, mc)

    order = res.order
    label_map = LabelMap(sample.hbar, pts[order], res.labels[order])
    det = label_map.orientation_det()
    if det is not None and not (det > 0):
        raise LatKitError("internal error: orientation fix left a negative basis")
    stats = WalkStats(queries=int(res.queries), labelled=len(order), flipped=bool(res.flipped))
    return label_map, stats


def label_single(
    sample: LatticeSample,
    region: Region,
    cfg: LabellingConfig | None = None,
    backend: str | None = None,
) -> LabelMap:
    return label_single_with_stats(sample, region, cfg, backend)[0]


def _rescaled_frame(m: LabelMap) -> np.ndarray | None:
    """Columns (unit-step differences along k1 and k2) divided by hbar.

    Uses the first entry (in assignment order) whose k+e1 and k+e2
    neighbours are both present, so the frame is invariant under origin
    shifts.  None when no such entry exists.
    """
    lookup = {(int(k[0]), int(k[1])): p for p, k in zip(m.points, m.labels)}
    for k, base in ((tuple(int(v) for v in k), p)
                    for p, k in zip(m.points, m.labels)):
        right = lookup.get((k[0] + 1, k[1]))
        up = lookup.get((k[0], k[1] + 1))
        if right is not None and up is not None:
            return np.column_stack([right - base, up - base]) / m.hbar
    return None


def _correction_candidates() -> list[np.ndarray]:
    out = [np.eye(2, dtype=np.int64)]
    r = range(-_CORRECTION_BOUND, _CORRECTION_BOUND + 1)
    for a in r:
        for b in r:
            for c in r:
                for d in r:
                    if a * d - b * c == 1 and (a, b, c, d) != (1, 0, 0, 1):
                        out.append(np.array([[a, b], [c, d]], dtype=np.int64))
    return out


_CANDIDATES = _correction_candidates()


def _best_frame_match(frame: np.ndarray, target: np.ndarray) -> tuple[np.ndarray, float]:
    """Unimodular M minimizing ||frame @ M^-1 - target||_F."""
    best_m = None
    best_dev = math.inf
    for m in _CANDIDATES:
        a, b = int(m[0, 0]), int(m[0, 1])
        c, d = int(m[1, 0]), int(m[1, 1])
        inv = np.array([[d, -b], [-c, a]], dtype=float)  # det = +1
        dev = float(np.linalg.norm(frame @ inv - target))
        if dev < best_dev:
            best_dev = dev
            best_m = m
    return best_m, best_dev


# a rounding residual above a quarter lattice unit means the shared points
# do not pin an integer origin unambiguously
_ORIGIN_RESIDUAL = 0.25


def _origin_shift(
    prev_map: LabelMap,
    cand_map: LabelMap,
    m: np.ndarray,
    overlap_min: int,
) -> tuple[np.ndarray, str | None]:
    """Translation anchoring the origin on points shared by both slices.

    A point present in two slices must carry the same action, so its
    integer labels satisfy hbar_next * k_next = hbar_prev * k_prev.  When
    at least overlap_min positions coincide within hbar**3, the integer
    shift best matching the actions is applied, provided the rounding
    residual stays unambiguous.  Slices at different hbar generally share
    no points, in which case origins stay per-slice: that is exactly why
    the output is a linear labelling rather than a good labelling.
    """
    zero = np.zeros(2, dtype=np.int64)
    tol = cand_map.hbar ** 3
    d, idx = cKDTree(prev_map.points).query(cand_map.points, k=1)
    shared = d <= tol
    n_shared = int(shared.sum())
    if n_shared < overlap_min:
        return zero, None
    k_prev = prev_map.labels[idx[shared]].astype(float)
    k_cand = (cand_map.labels[shared] @ m.T).astype(float)
    target = (prev_map.hbar / cand_map.hbar) * k_prev
    t = np.round((target - k_cand).mean(axis=0)).astype(np.int64)
    resid = np.abs(target - (k_cand + t)).max()
    if resid <= _ORIGIN_RESIDUAL:
        return t, None
    return zero, (
        f"origin alignment skipped at hbar={cand_map.hbar}: {n_shared} shared "
        f"points leave an ambiguous shift (residual {resid:.3g} lattice units)"
    )


def harmonize_maps(
    candidates: list[LabelMap],
    scfg: SequenceConfig | None = None,
    extra_warnings: tuple[str, ...] = (),
) -> LinearLabelling:
    """Inductively correct per-slice candidate maps into a coherent family.

    Slice j+1 is relabelled by the unimodular witness best aligning its
    1/hbar-rescaled frame with slice j's; origins are anchored on shared
    points when possible.  Raises :class:`SequenceBreakError` naming the
    offending hbar pair when no small witness brings consecutive frames
    within the coherence tolerance (half the smallest singular value of
    the previous frame).
    """
    scfg = scfg or SequenceConfig()
    warnings = list(extra_warnings)
    hbars = [m.hbar for m in candidates]

    maps = [candidates[0]]
    corrections = [Witness.identity()]
    prev_frame = _rescaled_frame(candidates[0])
    for j in range(1, len(candidates)):
        frame = _rescaled_frame(candidates[j])
        if prev_frame is None or frame is None:
            raise SequenceBreakError(hbars[j - 1], hbars[j],
                                     "a slice lacks the (1,0)/(0,1) basis")
        m, dev = _best_frame_match(frame, prev_frame)
        tol = _COHERENCE_FACTOR * float(np.linalg.svd(prev_frame, compute_uv=False)[-1])
        if dev > tol:
            raise SequenceBreakError(
                hbars[j - 1], hbars[j],
                f"best frame deviation {dev:.6g} exceeds coherence tolerance {tol:.6g}",
            )
        t, note = _origin_shift(maps[-1], candidates[j], m, scfg.overlap_min)
        if note:
            warnings.append(note)
        witness = Witness.from_arrays(m, t)
        maps.append(apply_witness(candidates[j], witness))
        corrections.append(witness)
        inv = witness.inverse().m_array.astype(float)
        prev_frame = frame @ inv

    return LinearLabelling(tuple(maps), tuple(corrections), tuple(warnings))


def label_sequence(
    lattice: AsymptoticLattice,
    cfg: LabellingConfig | None = None,
    scfg: SequenceConfig | None = None,
    backend: str | None = None,
) -> LinearLabelling:
    """Label every slice and harmonize the maps into a linear labelling.

    Density-ratio violations and single-slice inputs warn and proceed;
    coherence failures raise :class:`SequenceBreakError`.
    """
    cfg = cfg or LabellingConfig()
    scfg = scfg or SequenceConfig()
    warnings: list[str] = []

    hbars = lattice.hbars
    if len(hbars) < 2:
        warnings.append("single-slice lattice: sequence correction is vacuous")
    for ha, hb in zip(hbars, hbars[1:]):
        if hb / ha < scfg.density_ratio:
            warnings.append(
                f"hbar step {ha} -> {hb} is sparser than density_ratio="
                f"{scfg.density_ratio}; origin choices may drift"
            )

    candidates = [
        label_single(s, lattice.region, cfg, backend) for s in lattice.samples
    ]
    return harmonize_maps(candidates, scfg, tuple(warnings))
