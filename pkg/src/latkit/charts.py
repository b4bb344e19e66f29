"""Chart jets: truncated hbar-expansions of lattice maps.

A chart jet of order J on a rectangular domain U is the family of maps

    x  |->  T0(x) + hbar*T1(x) + ... + hbar**J * TJ(x),

where each Ti is a polynomial map R^2 -> R^2 of bounded total degree.  The
leading term T0 must be a diffeomorphism onto its image; construction
checks that its Jacobian determinant does not vanish (and does not change
sign) on a sample grid over U.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedModelError, ValidationError
from .geometry import Rect
from .poly import poly_dx, poly_dy, poly_eval, total_degree

_JACOBIAN_GRID = 9  # sample resolution for the nonvanishing check
_DET_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ChartJet:
    """Polynomial chart jet on a rectangular domain.

    coeffs has shape (order+1, 2, d+1, d+1): term index, component,
    x-power, y-power.
    """

    domain: Rect
    coeffs: np.ndarray
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(np.asarray(self.coeffs, dtype=float))
        if c.ndim != 4 or c.shape[1] != 2 or c.shape[2] != c.shape[3]:
            raise ValidationError(f"coefficient array has bad shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self._checked:
            self._check_jacobian()

    @classmethod
    def unchecked(cls, domain: Rect, coeffs: np.ndarray) -> "ChartJet":
        """Skip the Jacobian check (used when reporting a degenerate fit)."""
        return cls(domain, coeffs, _checked=False)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def degree(self) -> int:
        return int(max(total_degree(self.coeffs[i, c])
                       for i in range(self.order + 1) for c in range(2)))

    def _check_jacobian(self):
        dets = self.g0_jacobian_det(self.domain.grid(_JACOBIAN_GRID))
        if np.any(np.abs(dets) <= _DET_FLOOR) or (dets.min() < 0 < dets.max()):
            raise ValidationError(
                "leading-term Jacobian determinant vanishes or changes sign "
                "on the chart domain"
            )

    def evaluate(self, hbar: float, pts: np.ndarray) -> np.ndarray:
        """Apply the truncated expansion at the given hbar to (N, 2) points."""
        pts = np.asarray(pts, dtype=float)
        out = np.zeros_like(pts)
        scale = 1.0
        for i in range(self.order + 1):
            out[:, 0] += scale * poly_eval(self.coeffs[i, 0], pts)
            out[:, 1] += scale * poly_eval(self.coeffs[i, 1], pts)
            scale *= hbar
        return out

    def g0(self, pts: np.ndarray) -> np.ndarray:
        """Leading term only."""
        pts = np.asarray(pts, dtype=float)
        return np.column_stack([
            poly_eval(self.coeffs[0, 0], pts),
            poly_eval(self.coeffs[0, 1], pts),
        ])

    def g0_jacobian(self, pts: np.ndarray) -> np.ndarray:
        """Exact Jacobian of the leading term, shape (N, 2, 2)."""
        pts = np.asarray(pts, dtype=float)
        c0 = self.coeffs[0]
        out = np.empty(pts.shape[:-1] + (2, 2))
        out[..., 0, 0] = poly_eval(poly_dx(c0[0]), pts)
        out[..., 0, 1] = poly_eval(poly_dy(c0[0]), pts)
        out[..., 1, 0] = poly_eval(poly_dx(c0[1]), pts)
        out[..., 1, 1] = poly_eval(poly_dy(c0[1]), pts)
        return out

    def g0_jacobian_det(self, pts: np.ndarray) -> np.ndarray:
        jac = self.g0_jacobian(pts)
        return jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]

    def __eq__(self, other):
        if not isinstance(other, ChartJet):
            return NotImplemented
        return self.domain == other.domain and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None


def _jet_array(order: int, degree: int) -> np.ndarray:
    return np.zeros((order + 1, 2, degree + 1, degree + 1))


def model_system(name: str, params: dict | None = None) -> ChartJet:
    """Library of closed-form test charts.

    harmonic_pair:        T0 = id, T1 = (1/2, 1/2)
    shear(strength=s):    T0(x, y) = (x, y + s*x)
    polar_action(a):      T0(x, y) = (x, y + a*x**2/2)

    params may carry "domain" as (xmin, ymin, xmax, ymax); default unit square.
    """
    params = dict(params or {})
    dom = params.pop("domain", (0.0, 0.0, 1.0, 1.0))
    domain = dom if isinstance(dom, Rect) else Rect(*dom)

    if name == "harmonic_pair":
        if params:
            raise UnsupportedModelError(f"harmonic_pair takes no parameters, got {params}")
        c = _jet_array(order=1, degree=1)
        c[0, 0, 1, 0] = 1.0
        c[0, 1, 0, 1] = 1.0
        c[1, 0, 0, 0] = 0.5
        c[1, 1, 0, 0] = 0.5
        return ChartJet(domain, c)

    if name == "shear":
        s = float(params.pop("strength", 0.0))
        if params or not np.isfinite(s):
            raise UnsupportedModelError(f"bad shear parameters: strength={s}, extra={params}")
        c = _jet_array(order=0, degree=1)
        c[0, 0, 1, 0] = 1.0
        c[0, 1, 0, 1] = 1.0
        c[0, 1, 1, 0] = s
        return ChartJet(domain, c)

    if name == "polar_action":
        a = float(params.pop("curvature", 1.0))
        if params or not np.isfinite(a):
            raise UnsupportedModelError(f"bad polar_action parameters: curvature={a}, extra={params}")
        c = _jet_array(order=0, degree=2)
        c[0, 0, 1, 0] = 1.0
        c[0, 1, 0, 1] = 1.0
        c[0, 1, 2, 0] = 0.5 * a
        return ChartJet(domain, c)

    raise UnsupportedModelError(f"unknown model system {name!r}")
