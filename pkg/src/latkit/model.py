"""Core data types for asymptotic lattices and their labellings.

All types are immutable after construction (arrays are frozen) and can be
shared freely across threads; every operation in this module is a pure
function of its inputs.

A *labelling* assigns an integer pair to each point of one slice.  Two
labellings of the same point set are considered equivalent when they differ
by an orientation-preserving unimodular change of basis plus an integer
origin shift; :func:`labelling_equivalent` decides this and produces the
witness.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .charts import ChartJet
from .errors import StructuralMismatchError, ValidationError
from .geometry import Rect, Region

__all__ = [
    "Rect", "Region", "ChartJet",
    "LatticeSample", "AsymptoticLattice", "LabelMap", "LinearLabelling",
    "Witness", "EquivalenceResult", "SliceDiagnostics",
    "labelling_equivalent", "validate_lattice", "apply_witness",
    "restrict_to_points",
]

MIN_PAIRWISE_GAP = 1e-12  # construction rejects anything closer


def _frozen_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValidationError(f"points must be an (N, 2) array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValidationError("points must be finite")
    pts.setflags(write=False)
    return pts


def _min_gap(pts: np.ndarray) -> float:
    if len(pts) < 2:
        return math.inf
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


@dataclass(frozen=True, eq=False)
class LatticeSample:
    """One slice: the finite point set observed at a single hbar."""

    hbar: float
    points: np.ndarray

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        pts = _frozen_points(self.points)
        if len(pts) and _min_gap(pts) <= MIN_PAIRWISE_GAP:
            raise ValidationError(
                f"duplicate or near-duplicate points (pairwise gap <= {MIN_PAIRWISE_GAP})"
            )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        if not isinstance(other, LatticeSample):
            return NotImplemented
        return self.hbar == other.hbar and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class AsymptoticLattice:
    """A strictly decreasing hbar-sequence of slices over a common region.

    hbar_index carries the admissible hbar-set metadata; by default it is
    just the slice values themselves.
    """

    region: Region
    samples: tuple[LatticeSample, ...]
    hbar_index: tuple[float, ...] = ()

    def __post_init__(self):
        samples = tuple(self.samples)
        if not samples:
            raise ValidationError("an asymptotic lattice needs at least one slice")
        hbars = [s.hbar for s in samples]
        if any(b >= a for a, b in zip(hbars, hbars[1:])):
            raise ValidationError(f"slice hbar values must strictly decrease, got {hbars}")
        for s in samples:
            if len(s) and not self.region.bounds.contains(s.points).all():
                raise ValidationError(
                    f"slice hbar={s.hbar} has points outside the region bounds"
                )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(
            self, "hbar_index",
            tuple(self.hbar_index) if self.hbar_index else tuple(hbars),
        )

    @property
    def hbars(self) -> tuple[float, ...]:
        return tuple(s.hbar for s in self.samples)

    def __eq__(self, other):
        if not isinstance(other, AsymptoticLattice):
            return NotImplemented
        return (
            self.region == other.region
            and self.hbar_index == other.hbar_index
            and len(self.samples) == len(other.samples)
            and all(a == b for a, b in zip(self.samples, other.samples))
        )

    __hash__ = None


@dataclass(frozen=True)
class WalkStats:
    """Diagnostics from one labelling walk."""

    queries: int
    labelled: int
    flipped: bool


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Integer labels for (a subset of) one slice's points.

    Entries are kept in assignment order.  The basepoint is the point
    labelled (0, 0) when that label is present.  Construction enforces
    label uniqueness but not orientation: orientation (positive basis
    determinant) is an obligation on maps produced by the labelling engine,
    checked there, while arbitrary maps (e.g. reflected ones) remain
    representable for comparison purposes.
    """

    hbar: float
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ValidationError(f"hbar must be positive, got {self.hbar}")
        pts = _frozen_points(self.points)
        labs = np.ascontiguousarray(np.asarray(self.labels, dtype=np.int64))
        if labs.shape != pts.shape:
            raise ValidationError(
                f"labels shape {labs.shape} does not match points shape {pts.shape}"
            )
        if len(np.unique(labs, axis=0)) != len(labs):
            raise ValidationError("labels must be pairwise distinct")
        labs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    def __len__(self) -> int:
        return len(self.points)

    def point_of(self, k1: int, k2: int) -> np.ndarray | None:
        hit = np.nonzero((self.labels[:, 0] == k1) & (self.labels[:, 1] == k2))[0]
        return self.points[hit[0]] if len(hit) else None

    @property
    def basepoint(self) -> np.ndarray | None:
        return self.point_of(0, 0)

    def basis_vectors(self) -> tuple[np.ndarray, np.ndarray] | None:
        """(p10 - p00, p01 - p00) when all three labels exist."""
        p00, p10, p01 = self.point_of(0, 0), self.point_of(1, 0), self.point_of(0, 1)
        if p00 is None or p10 is None or p01 is None:
            return None
        return (p10 - p00, p01 - p00)

    def orientation_det(self) -> float | None:
        """det of the basis vectors; None when (1,0) or (0,1) is missing."""
        basis = self.basis_vectors()
        if basis is None:
            return None
        u, v = basis
        return float(u[0] * v[1] - u[1] * v[0])

    def __eq__(self, other):
        if not isinstance(other, LabelMap):
            return NotImplemented
        return (
            self.hbar == other.hbar
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class LinearLabelling:
    """A coherent family of label maps, one per slice.

    Labels are meaningful modulo a common origin translation (and, across
    the family, the single basis chosen by the first slice).  `corrections`
    records the witness applied to each slice's raw candidate map during
    the inductive harmonization; `warnings` records non-fatal precondition
    findings.  Both are diagnostics and excluded from equality.
    """

    maps: tuple[LabelMap, ...]
    corrections: tuple["Witness", ...] = field(default=(), compare=False)
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValidationError("a linear labelling needs at least one map")
        hbars = [m.hbar for m in maps]
        if any(b >= a for a, b in zip(hbars, hbars[1:])):
            raise ValidationError("label maps must follow strictly decreasing hbar")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "corrections", tuple(self.corrections))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def hbars(self) -> tuple[float, ...]:
        return tuple(m.hbar for m in self.maps)

    def __eq__(self, other):
        if not isinstance(other, LinearLabelling):
            return NotImplemented
        return len(self.maps) == len(other.maps) and all(
            a == b for a, b in zip(self.maps, other.maps)
        )

    __hash__ = None


@dataclass(frozen=True)
class Witness:
    """Label-space equivalence k |-> M k + t with det M = +1."""

    m: tuple[tuple[int, int], tuple[int, int]]
    t: tuple[int, int]

    @classmethod
    def identity(cls) -> "Witness":
        return cls(((1, 0), (0, 1)), (0, 0))

    @classmethod
    def from_arrays(cls, m: np.ndarray, t: np.ndarray) -> "Witness":
        m = np.asarray(m, dtype=np.int64)
        t = np.asarray(t, dtype=np.int64)
        return cls(((int(m[0, 0]), int(m[0, 1])), (int(m[1, 0]), int(m[1, 1]))),
                   (int(t[0]), int(t[1])))

    @property
    def m_array(self) -> np.ndarray:
        return np.array(self.m, dtype=np.int64)

    @property
    def t_array(self) -> np.ndarray:
        return np.array(self.t, dtype=np.int64)

    def det(self) -> int:
        return self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]

    def apply(self, labels: np.ndarray) -> np.ndarray:
        return labels @ self.m_array.T + self.t_array

    def inverse(self) -> "Witness":
        d = self.det()
        if d not in (1, -1):
            raise ValidationError(f"witness matrix is not unimodular (det={d})")
        a, b = self.m[0]
        c, e = self.m[1]
        inv = np.array([[e, -b], [-c, a]], dtype=np.int64) * d
        return Witness.from_arrays(inv, -(inv @ self.t_array))

    def compose(self, other: "Witness") -> "Witness":
        """self after other: k |-> M_self (M_other k + t_other) + t_self."""
        m = self.m_array @ other.m_array
        t = self.m_array @ other.t_array + self.t_array
        return Witness.from_arrays(m, t)


@dataclass(frozen=True)
class EquivalenceResult:
    """Outcome of a labelling comparison.

    `reflected` marks a match that exists only through an
    orientation-reversing (det = -1) matrix; such pairs count as
    non-equivalent but the diagnostic is preserved.
    """

    equivalent: bool
    witness: Witness | None = None
    reflected: bool = False

    def __bool__(self) -> bool:
        return self.equivalent


def _match_points(a_pts: np.ndarray, b_pts: np.ndarray, tol: float) -> np.ndarray:
    """Index into b for every row of a, requiring a bijection within tol."""
    if len(a_pts) != len(b_pts):
        raise StructuralMismatchError(
            f"label maps cover {len(a_pts)} vs {len(b_pts)} points",
            only_in_a=max(0, len(a_pts) - len(b_pts)),
            only_in_b=max(0, len(b_pts) - len(a_pts)),
        )
    if len(a_pts) == 0:
        return np.zeros(0, dtype=np.int64)
    dist, idx = cKDTree(b_pts).query(a_pts, k=1)
    bad = dist > tol
    if bad.any() or len(np.unique(idx)) != len(idx):
        raise StructuralMismatchError(
            "point sets differ beyond tolerance "
            f"(unmatched: {int(bad.sum())}, tol={tol})",
            only_in_a=int(bad.sum()),
            only_in_b=int(bad.sum()),
        )
    return idx


def _verify_witness(ka: np.ndarray, kb: np.ndarray, m: np.ndarray) -> np.ndarray | None:
    """Translation making kb = m@ka + t hold for all rows, if one exists."""
    t = kb - ka @ m.T
    if np.all(t == t[0]):
        return t[0]
    return None


def _solve_full_rank(da: np.ndarray, db: np.ndarray) -> np.ndarray | None:
    """Unique integer M with M@da_i = db_i, from two independent rows.

    Returns None when the difference vectors are collinear (M not pinned
    down) or when the unique rational solution is not integral (in which
    case no integer M exists at all).
    """
    n = len(da)
    best = None
    for i in range(n):
        if da[i, 0] != 0 or da[i, 1] != 0:
            best = i
            break
    if best is None:
        return None
    for j in range(n):
        det = int(da[best, 0]) * int(da[j, 1]) - int(da[best, 1]) * int(da[j, 0])
        if det != 0:
            d1, d2 = da[best], da[j]
            e1, e2 = db[best], db[j]
            # M = [e1 e2] @ [d1 d2]^{-1}, exact integer arithmetic
            adj = np.array([[d2[1], -d2[0]], [-d1[1], d1[0]]], dtype=np.int64)
            num = np.column_stack([e1, e2]).astype(np.int64) @ adj
            if np.all(num % det == 0):
                return num // det
            return None
    return None  # all differences collinear


def _unimodular_candidates(bound: int) -> list[np.ndarray]:
    out = []
    rng = range(-bound, bound + 1)
    for a in rng:
        for b in rng:
            for c in rng:
                for d in rng:
                    if a * d - b * c in (1, -1):
                        out.append(np.array([[a, b], [c, d]], dtype=np.int64))
    return out


def labelling_equivalent(a: LabelMap, b: LabelMap, tol: float = 1e-9) -> EquivalenceResult:
    """Decide whether two label maps of one point set agree up to convention.

    Returns an :class:`EquivalenceResult`; `witness` satisfies
    b.labels = M @ a.labels + t entrywise (with det M = +1) when equivalent.

    For label sets whose difference vectors span the plane the matrix is
    determined uniquely and solved exactly.  Degenerate (collinear) label
    sets fall back to a bounded search over small unimodular matrices; the
    bound grows with the observed label spread, capped at 8, which is a
    completeness caveat only for adversarial collinear inputs.
    """
    if a.hbar != b.hbar:
        raise StructuralMismatchError(
            f"label maps have different hbar ({a.hbar} vs {b.hbar})"
        )
    idx = _match_points(a.points, b.points, tol)
    ka = a.labels.astype(np.int64)
    kb = b.labels[idx].astype(np.int64)
    if len(ka) == 0:
        return EquivalenceResult(True, Witness.identity())
    if len(ka) == 1:
        return EquivalenceResult(True, Witness.from_arrays(np.eye(2, dtype=np.int64),
                                                           kb[0] - ka[0]))
    da = ka - ka[0]
    db = kb - kb[0]

    m = _solve_full_rank(da, db)
    if m is not None:
        det = int(m[0, 0]) * int(m[1, 1]) - int(m[0, 1]) * int(m[1, 0])
        t = _verify_witness(ka, kb, m)
        if t is None:
            return EquivalenceResult(False)
        if det == 1:
            return EquivalenceResult(True, Witness.from_arrays(m, t))
        return EquivalenceResult(False, reflected=(det == -1))

    # collinear label differences: bounded unimodular search
    spread = int(max(np.abs(db).max(initial=0), np.abs(da).max(initial=0), 1))
    bound = min(max(2, spread), 8)
    reflected = False
    for m in _unimodular_candidates(bound):
        t = _verify_witness(ka, kb, m)
        if t is None:
            continue
        if int(m[0, 0]) * int(m[1, 1]) - int(m[0, 1]) * int(m[1, 0]) == 1:
            return EquivalenceResult(True, Witness.from_arrays(m, t))
        reflected = True
    return EquivalenceResult(False, reflected=reflected)


def restrict_to_points(reference: LabelMap, points: np.ndarray, tol: float = 1e-9) -> LabelMap:
    """Reference labelling restricted to the given point positions.

    Used to compare a walk's output (which covers only the points its rows
    reached) against a full ground-truth labelling.  Every requested point
    must exist in the reference within tol, else the sets are structurally
    mismatched.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(points) > len(reference):
        raise StructuralMismatchError(
            f"{len(points)} points requested but the reference labels only "
            f"{len(reference)}",
            only_in_a=len(points) - len(reference),
        )
    if len(points) == 0:
        return LabelMap(reference.hbar, points, np.zeros((0, 2), dtype=np.int64))
    dist, idx = cKDTree(reference.points).query(points, k=1)
    bad = dist > tol
    if bad.any() or len(np.unique(idx)) != len(idx):
        raise StructuralMismatchError(
            f"{int(bad.sum())} points are absent from the reference labelling "
            f"(tol={tol})",
            only_in_a=int(bad.sum()),
        )
    return LabelMap(reference.hbar, reference.points[idx], reference.labels[idx])


def apply_witness(obj, witness: Witness):
    """Relabel a LabelMap or LinearLabelling by k |-> M k + t."""
    if isinstance(obj, LabelMap):
        return LabelMap(obj.hbar, obj.points, witness.apply(obj.labels))
    if isinstance(obj, LinearLabelling):
        return LinearLabelling(
            tuple(apply_witness(m, witness) for m in obj.maps),
            corrections=tuple(witness.compose(c) for c in obj.corrections),
            warnings=obj.warnings,
        )
    raise TypeError(f"cannot apply a witness to {type(obj).__name__}")


@dataclass(frozen=True)
class SliceDiagnostics:
    hbar: float
    n_points: int
    n_inner: int
    min_gap: float
    gap_ratio: float
    well_spaced: bool


def validate_lattice(lattice: AsymptoticLattice, min_gap_ratio: float = 0.5) -> list[SliceDiagnostics]:
    """Per-slice spacing diagnostics.  Purely observational, never raises."""
    out = []
    inner = lattice.region.inner
    for s in lattice.samples:
        gap = _min_gap(s.points)
        n_inner = int(inner.contains(s.points).sum()) if len(s) else 0
        ratio = gap / s.hbar
        out.append(SliceDiagnostics(
            hbar=s.hbar,
            n_points=len(s),
            n_inner=n_inner,
            min_gap=gap,
            gap_ratio=ratio,
            well_spaced=bool(gap >= min_gap_ratio * s.hbar),
        ))
    return out
