"""Inverse problem: recover the chart jet from a labelled lattice.

Fitting is linear least squares over polynomial maps evaluated at the
action points hbar*k, using monomials centered at the domain midpoint and
scaled to [-1, 1]^2 to keep the normal system well conditioned.  The
Jacobian field of the recovered leading term is obtained by exact
differentiation of the fitted polynomial, never by differencing data.

Rotation-number convention
--------------------------
With W the inverse Jacobian of the fitted leading term at a point, the
toolkit reports  rho = W[1,0] / W[0,0]:  the slope, in lattice-index
coordinates, of the direction pulled back from the first spectral
coordinate axis.  Any alternative convention can be formed from the
exposed Jacobian field.  The confidence radius is the first-order
propagation of the fit residual through this formula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charts import ChartJet
from .errors import PoleError, UnderdeterminedFitError, ValidationError
from .geometry import Rect
from .model import AsymptoticLattice, LinearLabelling
from .poly import compose_affine, monomial_exponents

_OVERDETERMINATION = 3
_POLE_RATIO = 1e-12
_MIN_HALF_WIDTH = 1e-9


@dataclass(frozen=True)
class SliceResidual:
    hbar: float
    max: float
    rms: float


@dataclass(frozen=True)
class RotationEntry:
    point: tuple[float, float]
    value: float | None
    confidence: float | None
    pole: bool = False


@dataclass(frozen=True)
class FitBasis:
    """Centered/scaled monomial basis with the hbar powers of the jet."""

    mid: tuple[float, float]
    half: tuple[float, float]
    degree: int
    jet_order: int

    @property
    def n_terms(self) -> int:
        return (self.degree + 1) * (self.degree + 2) // 2

    @property
    def n_columns(self) -> int:
        return self.n_terms * (self.jet_order + 1)

    def term_names(self) -> list[str]:
        names = []
        for i in range(self.jet_order + 1):
            for a, b in monomial_exponents(self.degree):
                names.append(f"h^{i}*x^{a}*y^{b}")
        return names

    def design(self, action_pts: np.ndarray, hbars: np.ndarray) -> np.ndarray:
        s = (action_pts[:, 0] - self.mid[0]) / self.half[0]
        t = (action_pts[:, 1] - self.mid[1]) / self.half[1]
        cols = []
        for i in range(self.jet_order + 1):
            hpow = hbars ** i
            for a, b in monomial_exponents(self.degree):
                cols.append(hpow * s ** a * t ** b)
        return np.column_stack(cols)

    def gradient_functionals(self, point) -> tuple[np.ndarray, np.ndarray]:
        """d/dx and d/dy of the leading-term block at one point.

        Returns two length-n_columns vectors, zero outside block 0, such
        that J entries of the fitted leading term are dot products of these
        with the coefficient vectors.
        """
        x, y = float(point[0]), float(point[1])
        s = (x - self.mid[0]) / self.half[0]
        t = (y - self.mid[1]) / self.half[1]
        gx = np.zeros(self.n_columns)
        gy = np.zeros(self.n_columns)
        for col, (a, b) in enumerate(monomial_exponents(self.degree)):
            if a > 0:
                gx[col] = a * s ** (a - 1) * t ** b / self.half[0]
            if b > 0:
                gy[col] = b * s ** a * t ** (b - 1) / self.half[1]
        return gx, gy


@dataclass(frozen=True, eq=False)
class RecoveryReport:
    """Fitted chart, its Jacobian field, rotation estimates, diagnostics."""

    chart: ChartJet
    degree: int
    jet_order: int
    residuals: tuple[SliceResidual, ...]
    jacobian_points: tuple[np.ndarray, ...]   # per slice, action coordinates
    jacobians: tuple[np.ndarray, ...]         # per slice, (N, 2, 2)
    jacobian_sign_consistent: bool
    rotation: tuple[RotationEntry, ...]
    basis: FitBasis
    gram_inv: np.ndarray                      # (A^T A)^{-1}
    sigma2: tuple[float, float]               # per-component residual variance
    warnings: tuple[str, ...] = field(default=())

    def __eq__(self, other):
        if not isinstance(other, RecoveryReport):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.degree == other.degree
            and self.jet_order == other.jet_order
            and self.residuals == other.residuals
            and len(self.jacobian_points) == len(other.jacobian_points)
            and all(np.array_equal(a, b) for a, b in
                    zip(self.jacobian_points, other.jacobian_points))
            and all(np.array_equal(a, b) for a, b in
                    zip(self.jacobians, other.jacobians))
            and self.jacobian_sign_consistent == other.jacobian_sign_consistent
            and self.rotation == other.rotation
            and self.basis == other.basis
            and np.array_equal(self.gram_inv, other.gram_inv)
            and self.sigma2 == other.sigma2
            and self.warnings == other.warnings
        )

    __hash__ = None


def _chart_from_solution(basis: FitBasis, coeff_x: np.ndarray, coeff_y: np.ndarray,
                         domain: Rect) -> tuple[ChartJet, list[str]]:
    """Convert scaled-basis coefficients to a raw-monomial chart jet."""
    d = basis.degree
    n = basis.n_terms
    raw = np.zeros((basis.jet_order + 1, 2, d + 1, d + 1))
    sx, ox = 1.0 / basis.half[0], -basis.mid[0] / basis.half[0]
    sy, oy = 1.0 / basis.half[1], -basis.mid[1] / basis.half[1]
    for i in range(basis.jet_order + 1):
        for comp, coeff in enumerate((coeff_x, coeff_y)):
            block = np.zeros((d + 1, d + 1))
            for col, (a, b) in enumerate(monomial_exponents(d)):
                block[a, b] = coeff[i * n + col]
            raw[i, comp] = compose_affine(block, sx, ox, sy, oy)
    warnings = []
    try:
        chart = ChartJet(domain, raw)
    except ValidationError:
        warnings.append(
            "fitted leading term fails the diffeomorphism check on its domain"
        )
        chart = ChartJet.unchecked(domain, raw)
    return chart, warnings


def fit_chart(
    labelling: LinearLabelling,
    lattice: AsymptoticLattice,
    degree: int = 1,
    jet_order: int = 0,
    rotation_at: list[tuple[float, float]] | None = None,
) -> RecoveryReport:
    """Least-squares fit of the chart jet to a labelled lattice.

    degree is the total polynomial degree of every jet term; jet_order is 0
    (leading term only) or 1.  Requires an overdetermination factor of
    three: at least 3 * n_terms * (jet_order + 1) labelled points in total.
    """
    if degree < 1:
        raise ValidationError("fit degree must be >= 1")
    if jet_order not in (0, 1):
        raise ValidationError("jet_order must be 0 or 1")
    if labelling.hbars != lattice.hbars:
        raise ValidationError("labelling and lattice have different hbar sequences")

    warnings: list[str] = []
    n_distinct_h = len(set(lattice.hbars))
    if jet_order == 1 and n_distinct_h < 2:
        warnings.append(
            "single hbar value cannot separate the leading term from the "
            "first correction; jet order forced to 0"
        )
        jet_order = 0

    action, targets, hbars_flat, per_slice = [], [], [], []
    for m in labelling.maps:
        a = m.labels.astype(float) * m.hbar
        action.append(a)
        targets.append(m.points)
        hbars_flat.append(np.full(len(a), m.hbar))
        per_slice.append(len(a))
    action = np.vstack(action)
    targets = np.vstack(targets)
    hbars_flat = np.concatenate(hbars_flat)

    n_terms = (degree + 1) * (degree + 2) // 2
    n_cols = n_terms * (jet_order + 1)
    need = _OVERDETERMINATION * n_cols
    if len(action) < need:
        raise UnderdeterminedFitError(
            f"{len(action)} labelled points cannot support {n_cols} coefficients "
            f"(need >= {need})"
        )

    lo = action.min(axis=0)
    hi = action.max(axis=0)
    half = np.maximum((hi - lo) / 2.0, _MIN_HALF_WIDTH)
    mid = (hi + lo) / 2.0
    basis = FitBasis(mid=(float(mid[0]), float(mid[1])),
                     half=(float(half[0]), float(half[1])),
                     degree=degree, jet_order=jet_order)

    design = basis.design(action, hbars_flat)
    sol, _, rank, svals = np.linalg.lstsq(design, targets, rcond=None)
    if rank < n_cols:
        names = basis.term_names()
        _, _, vt = np.linalg.svd(design, full_matrices=True)
        deficient = []
        for row in vt[rank:]:
            top = np.argsort(-np.abs(row))[:3]
            deficient.append(" + ".join(f"{row[i]:+.2f}*{names[i]}" for i in top))
        raise UnderdeterminedFitError(
            f"normal system rank {rank} < {n_cols}; labels may be confined to "
            "a line or the hbar set too small to separate jet terms",
            deficient_directions=deficient,
        )

    dom_lo = np.minimum(lo, mid - _MIN_HALF_WIDTH * 10)
    dom_hi = np.maximum(hi, mid + _MIN_HALF_WIDTH * 10)
    domain = Rect(float(dom_lo[0]), float(dom_lo[1]), float(dom_hi[0]), float(dom_hi[1]))
    chart, chart_warnings = _chart_from_solution(basis, sol[:, 0], sol[:, 1], domain)
    warnings.extend(chart_warnings)

    # residuals per slice against the fitted jet
    residuals = []
    offset = 0
    for m, count in zip(labelling.maps, per_slice):
        pred = chart.evaluate(m.hbar, action[offset:offset + count])
        err = np.linalg.norm(targets[offset:offset + count] - pred, axis=1)
        residuals.append(SliceResidual(m.hbar, float(err.max()), float(np.sqrt(np.mean(err ** 2)))))
        offset += count

    # exact Jacobians of the fitted leading term at the action points
    jac_points, jacobians = [], []
    offset = 0
    for count in per_slice:
        a = action[offset:offset + count]
        jac_points.append(a)
        jacobians.append(chart.g0_jacobian(a))
        offset += count
    dets = np.concatenate([
        j[:, 0, 0] * j[:, 1, 1] - j[:, 0, 1] * j[:, 1, 0] for j in jacobians
    ]) if jacobians else np.zeros(0)
    sign_consistent = bool(len(dets) == 0 or (dets > 0).all() or (dets < 0).all())

    # residual variance per component, for confidence propagation
    resid = targets - design @ sol
    dof = max(len(action) - n_cols, 1)
    sigma2 = (float((resid[:, 0] ** 2).sum() / dof), float((resid[:, 1] ** 2).sum() / dof))
    gram_inv = np.linalg.pinv(design.T @ design)

    report = RecoveryReport(
        chart=chart,
        degree=degree,
        jet_order=jet_order,
        residuals=tuple(residuals),
        jacobian_points=tuple(jac_points),
        jacobians=tuple(jacobians),
        jacobian_sign_consistent=sign_consistent,
        rotation=(),
        basis=basis,
        gram_inv=gram_inv,
        sigma2=sigma2,
        warnings=tuple(warnings),
    )
    rotation_at = rotation_at if rotation_at is not None else [chart.domain.center]
    rotation = tuple(_rotation_entry(report, p) for p in rotation_at)
    object.__setattr__(report, "rotation", rotation)
    return report


def jacobian_field(report: RecoveryReport, at: list[tuple[float, float]]
                   ) -> tuple[np.ndarray, list[str]]:
    """Exact leading-term Jacobians at the requested action points.

    Returns the (N, 2, 2) array and a list of extrapolation warnings for
    points outside the fitted domain.
    """
    pts = np.asarray(at, dtype=float).reshape(-1, 2)
    jac = report.chart.g0_jacobian(pts)
    warnings = []
    inside = report.chart.domain.contains(pts)
    for i, ok in enumerate(inside):
        if not ok:
            warnings.append(
                f"point {tuple(pts[i])} lies outside the fitted domain; "
                "Jacobian is an extrapolation"
            )
    return jac, warnings


def _rotation_entry(report: RecoveryReport, at) -> RotationEntry:
    point = (float(at[0]), float(at[1]))
    try:
        value, conf = rotation_number(report, point)
    except PoleError:
        return RotationEntry(point=point, value=None, confidence=None, pole=True)
    return RotationEntry(point=point, value=value, confidence=conf)


def rotation_number(report: RecoveryReport, at) -> tuple[float, float]:
    """Rotation number and confidence radius at an action point.

    rho = W[1,0] / W[0,0] with W the inverse Jacobian of the fitted leading
    term.  Raises :class:`PoleError` where W[0,0] vanishes (the convention
    has a pole there; the number diverges rather than being reported).
    """
    pts = np.asarray(at, dtype=float).reshape(1, 2)
    jac = report.chart.g0_jacobian(pts)[0]
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if det == 0.0:
        raise PoleError(f"fitted Jacobian is singular at {tuple(pts[0])}")
    w = np.array([[jac[1, 1], -jac[0, 1]], [-jac[1, 0], jac[0, 0]]]) / det
    scale = float(np.abs(w).max())
    if abs(w[0, 0]) <= _POLE_RATIO * scale:
        raise PoleError(
            f"rotation number has a pole at {tuple(pts[0])} "
            "(first diagonal entry of the inverse Jacobian vanishes)"
        )
    rho = float(w[1, 0] / w[0, 0])

    # first-order propagation: rho depends on J[1,0] and J[1,1] only
    # (w[1,0]/w[0,0] = -J[1,0]/J[1,1]), both estimated from the y-component
    # coefficients of the fit
    gx, gy = report.basis.gradient_functionals(pts[0])
    j10, j11 = jac[1, 0], jac[1, 1]
    alpha = -1.0 / j11
    beta = j10 / (j11 * j11)
    g = alpha * gx + beta * gy
    var = report.sigma2[1] * float(g @ report.gram_inv @ g)
    return rho, math.sqrt(max(var, 0.0))
