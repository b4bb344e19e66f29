"""Pure-Python labelling walk and its spatial indexes.

This is the reference implementation of the row/column extrapolation walk;
`_kernel.pyx` is a line-by-line port of the same logic for speed.  The two
must stay behaviourally identical: queries resolve nearest unclaimed points
under exact squared-distance comparison with lexicographic (x, y)
tie-breaking, so results do not depend on scan order or backend.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

_GRID_CAP = 1024


@dataclass(frozen=True)
class GridSpec:
    """Uniform-bucket index layout in CSR form (shared with the kernel)."""

    x0: float
    y0: float
    csx: float
    csy: float
    gx: int
    gy: int
    cell_start: np.ndarray  # int64, gx*gy + 1
    cell_order: np.ndarray  # int64, N


def build_grid(pts: np.ndarray) -> GridSpec:
    n = len(pts)
    x0 = float(pts[:, 0].min())
    x1 = float(pts[:, 0].max())
    y0 = float(pts[:, 1].min())
    y1 = float(pts[:, 1].max())
    w, h = x1 - x0, y1 - y0
    area = w * h
    cs = math.sqrt(area / n) if area > 0 else max(w, h, 1.0)
    if cs <= 0:
        cs = 1.0
    gx = min(_GRID_CAP, max(1, math.ceil(w / cs))) if w > 0 else 1
    gy = min(_GRID_CAP, max(1, math.ceil(h / cs))) if h > 0 else 1
    csx = w / gx if w > 0 else 1.0
    csy = h / gy if h > 0 else 1.0

    ix = np.clip(np.floor((pts[:, 0] - x0) / csx).astype(np.int64), 0, gx - 1)
    iy = np.clip(np.floor((pts[:, 1] - y0) / csy).astype(np.int64), 0, gy - 1)
    cell = iy * gx + ix
    counts = np.bincount(cell, minlength=gx * gy)
    cell_start = np.zeros(gx * gy + 1, dtype=np.int64)
    np.cumsum(counts, out=cell_start[1:])
    cell_order = np.argsort(cell, kind="stable").astype(np.int64)
    return GridSpec(x0, y0, csx, csy, gx, gy, cell_start, cell_order)


class GridIndex:
    """Nearest-unclaimed queries over the bucket grid via ring expansion."""

    def __init__(self, pts: np.ndarray, sin_eps: float):
        self.pts = pts
        self.grid = build_grid(pts)
        self.claimed = np.zeros(len(pts), dtype=np.uint8)
        self.queries = 0
        self.s2 = sin_eps * sin_eps

    def nearest(self, tx: float, ty: float, fx: float = 0.0, fy: float = 0.0,
                skip_dir: bool = False) -> int:
        """Index of the nearest unclaimed point, or -1 if the pool is empty.

        With skip_dir, candidates whose direction from the target is within
        the collinearity threshold of the line through (fx, fy) are passed
        over (both orientations).
        """
        self.queries += 1
        g = self.grid
        pts = self.pts
        claimed = self.claimed
        s2 = self.s2
        u2 = fx * fx + fy * fy

        icx = min(g.gx - 1, max(0, math.floor((tx - g.x0) / g.csx)))
        icy = min(g.gy - 1, max(0, math.floor((ty - g.y0) / g.csy)))

        best = -1
        bd2 = math.inf
        bx = by = 0.0
        radius = 0
        while True:
            ilo, ihi = icx - radius, icx + radius
            jlo, jhi = icy - radius, icy + radius
            for i in range(max(ilo, 0), min(ihi, g.gx - 1) + 1):
                rows = (jlo,) if radius == 0 else (jlo, jhi)
                for j in rows:
                    if 0 <= j < g.gy:
                        best, bd2, bx, by = self._scan_cell(
                            j * g.gx + i, tx, ty, fx, fy, skip_dir, u2,
                            best, bd2, bx, by)
            if radius > 0:
                for j in range(max(jlo + 1, 0), min(jhi - 1, g.gy - 1) + 1):
                    for i in (ilo, ihi):
                        if 0 <= i < g.gx:
                            best, bd2, bx, by = self._scan_cell(
                                j * g.gx + i, tx, ty, fx, fy, skip_dir, u2,
                                best, bd2, bx, by)

            covered = ilo <= 0 and ihi >= g.gx - 1 and jlo <= 0 and jhi >= g.gy - 1
            if covered:
                return best
            if best >= 0:
                # distance lower bound for anything outside the scanned block
                lb = math.inf
                bl = g.x0 + (icx - radius) * g.csx
                br = g.x0 + (icx + radius + 1) * g.csx
                bb = g.y0 + (icy - radius) * g.csy
                bt = g.y0 + (icy + radius + 1) * g.csy
                if icx - radius > 0:
                    lb = min(lb, max(0.0, tx - bl))
                if icx + radius < g.gx - 1:
                    lb = min(lb, max(0.0, br - tx))
                if icy - radius > 0:
                    lb = min(lb, max(0.0, ty - bb))
                if icy + radius < g.gy - 1:
                    lb = min(lb, max(0.0, bt - ty))
                if bd2 < lb * lb:
                    return best
            radius += 1

    def _scan_cell(self, c, tx, ty, fx, fy, skip_dir, u2, best, bd2, bx, by):
        g = self.grid
        pts = self.pts
        claimed = self.claimed
        for slot in range(g.cell_start[c], g.cell_start[c + 1]):
            idx = g.cell_order[slot]
            if claimed[idx]:
                continue
            px = pts[idx, 0]
            py = pts[idx, 1]
            if skip_dir:
                wx = px - tx
                wy = py - ty
                cross = wx * fy - wy * fx
                if cross * cross < self.s2 * (wx * wx + wy * wy) * u2:
                    continue
            dx = px - tx
            dy = py - ty
            d2 = dx * dx + dy * dy
            if d2 < bd2 or (d2 == bd2 and (px < bx or (px == bx and py < by))):
                best, bd2, bx, by = idx, d2, px, py
        return best, bd2, bx, by


class KDIndex:
    """Same query contract backed by a k-d tree with expanding k."""

    def __init__(self, pts: np.ndarray, sin_eps: float):
        self.pts = pts
        self.tree = cKDTree(pts)
        self.claimed = np.zeros(len(pts), dtype=np.uint8)
        self.queries = 0
        self.s2 = sin_eps * sin_eps

    def nearest(self, tx: float, ty: float, fx: float = 0.0, fy: float = 0.0,
                skip_dir: bool = False) -> int:
        self.queries += 1
        pts = self.pts
        claimed = self.claimed
        n = len(pts)
        u2 = fx * fx + fy * fy
        k = 8
        while True:
            k_eff = min(k, n)
            _, idxs = self.tree.query([tx, ty], k=k_eff)
            idxs = np.atleast_1d(idxs)
            best = -1
            bd2 = math.inf
            bx = by = 0.0
            for idx in idxs:
                idx = int(idx)
                if claimed[idx]:
                    continue
                px = pts[idx, 0]
                py = pts[idx, 1]
                if skip_dir:
                    wx = px - tx
                    wy = py - ty
                    cross = wx * fy - wy * fx
                    if cross * cross < self.s2 * (wx * wx + wy * wy) * u2:
                        continue
                dx = px - tx
                dy = py - ty
                d2 = dx * dx + dy * dy
                if d2 < bd2 or (d2 == bd2 and (px < bx or (px == bx and py < by))):
                    best, bd2, bx, by = idx, d2, px, py
            if k_eff == n:
                return best
            if best >= 0:
                wi = int(idxs[-1])
                wdx = pts[wi, 0] - tx
                wdy = pts[wi, 1] - ty
                if bd2 < wdx * wdx + wdy * wdy:
                    return best
            k *= 2


@dataclass
class WalkResult:
    labels: np.ndarray   # (N, 2) int64, meaningful where claimed
    claimed: np.ndarray  # (N,) uint8
    order: np.ndarray    # claim sequence, point indices
    queries: int
    flipped: bool
    has_basis: bool      # both (1,0) and (0,1) were seeded


def run_walk(pts: np.ndarray, index, inner, cx: float, cy: float,
             reject_factor: float, max_rows: int, max_cols: int) -> WalkResult:
    """Row/column extrapolation walk over one slice.

    max_rows / max_cols of -1 mean uncapped.  The index carries the claimed
    mask and the query counter; every claim permanently removes the point
    from the candidate pool.
    """
    n = len(pts)
    labels = np.zeros((n, 2), dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    state = {"n_ord": 0}
    claimed = index.claimed
    rf2 = reject_factor * reject_factor
    xlo, xhi, ylo, yhi = inner.xmin, inner.xmax, inner.ymin, inner.ymax

    def claim(i, k1, k2):
        claimed[i] = 1
        labels[i, 0] = k1
        labels[i, 1] = k2
        order[state["n_ord"]] = i
        state["n_ord"] += 1

    def in_inner(x, y):
        return xlo <= x <= xhi and ylo <= y <= yhi

    def extend(r, ax, ay, bx, by, kstart, kdir):
        k = kstart
        while max_cols < 0 or abs(k) <= max_cols:
            sx = bx - ax
            sy = by - ay
            tx = bx + sx
            ty = by + sy
            if not in_inner(tx, ty):
                return
            i = index.nearest(tx, ty)
            if i < 0:
                return
            px = pts[i, 0]
            py = pts[i, 1]
            ddx = px - tx
            ddy = py - ty
            if ddx * ddx + ddy * ddy > rf2 * (sx * sx + sy * sy):
                return
            claim(i, k, r)
            ax, ay = bx, by
            bx, by = px, py
            k += kdir

    i00 = index.nearest(cx, cy)
    if i00 < 0:
        return WalkResult(labels, claimed, order[:0], index.queries, False, False)
    claim(i00, 0, 0)
    p00x, p00y = pts[i00, 0], pts[i00, 1]

    i10 = index.nearest(p00x, p00y)
    if i10 < 0:
        return WalkResult(labels, claimed, order[:1], index.queries, False, False)
    claim(i10, 1, 0)
    p10x, p10y = pts[i10, 0], pts[i10, 1]
    ux = p10x - p00x
    uy = p10y - p00y

    extend(0, p00x, p00y, p10x, p10y, 2, 1)
    extend(0, p10x, p10y, p00x, p00y, -1, -1)

    flipped = False
    has_basis = False
    if max_rows != 0:
        i01 = index.nearest(p00x, p00y, ux, uy, skip_dir=True)
        if i01 >= 0:
            has_basis = True
            claim(i01, 0, 1)
            p01x, p01y = pts[i01, 0], pts[i01, 1]
            vx = p01x - p00x
            vy = p01y - p00y

            def do_row(r, qx, qy, hx, hy):
                """Seed (1, r) next to the spine point and extend the row."""
                if 0 <= max_cols < 1:
                    return None
                tx = qx + hx
                ty = qy + hy
                if not in_inner(tx, ty):
                    return None
                i = index.nearest(tx, ty)
                if i < 0:
                    return None
                px = pts[i, 0]
                py = pts[i, 1]
                ddx = px - tx
                ddy = py - ty
                if ddx * ddx + ddy * ddy > rf2 * (hx * hx + hy * hy):
                    return None
                claim(i, 1, r)
                extend(r, qx, qy, px, py, 2, 1)
                extend(r, px, py, qx, qy, -1, -1)
                return (px - qx, py - qy)

            def build_side(sgn):
                # row step is inherited from the neighbouring row, starting
                # from row 0's step on each side
                hx, hy = ux, uy
                if sgn > 0:
                    nh = do_row(1, p01x, p01y, hx, hy)
                    if nh is not None:
                        hx, hy = nh
                    a2x, a2y = p00x, p00y
                    a1x, a1y = p01x, p01y
                    r = 2
                else:
                    a2x, a2y = p01x, p01y
                    a1x, a1y = p00x, p00y
                    r = -1
                while max_rows < 0 or abs(r) <= max_rows:
                    sx = a1x - a2x
                    sy = a1y - a2y
                    tx = a1x + sx
                    ty = a1y + sy
                    if not in_inner(tx, ty):
                        return
                    i = index.nearest(tx, ty)
                    if i < 0:
                        return
                    px = pts[i, 0]
                    py = pts[i, 1]
                    ddx = px - tx
                    ddy = py - ty
                    if ddx * ddx + ddy * ddy > rf2 * (sx * sx + sy * sy):
                        return
                    claim(i, 0, r)
                    nh = do_row(r, px, py, hx, hy)
                    if nh is not None:
                        hx, hy = nh
                    a2x, a2y = a1x, a1y
                    a1x, a1y = px, py
                    r += sgn

            build_side(1)
            build_side(-1)

            if ux * vy - uy * vx < 0:
                labels[:, 0] = -labels[:, 0]
                flipped = True

    return WalkResult(labels, claimed, order[:state["n_ord"]],
                      index.queries, flipped, has_basis)
