# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled labelling walk over the bucket-grid index.

Behavioural mirror of latkit._walk (pure Python); any change here must be
made there as well.  Compiled with -ffp-contract=off so double arithmetic
matches CPython bit for bit.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, floor


cdef class _Walker:
    cdef const double[:, ::1] pts
    cdef long long[::1] cell_start
    cdef long long[::1] cell_order
    cdef unsigned char[::1] claimed
    cdef long long[:, ::1] labels
    cdef long long[::1] order
    cdef Py_ssize_t n_ord
    cdef long long queries
    cdef Py_ssize_t gx, gy
    cdef double x0, y0, csx, csy
    cdef double xlo, xhi, ylo, yhi
    cdef double rf2, s2
    cdef long long max_rows, max_cols

    cdef void scan_cell(self, Py_ssize_t c, double tx, double ty,
                        double fx, double fy, bint skip_dir, double u2,
                        Py_ssize_t *best, double *bd2, double *bx, double *by):
        cdef Py_ssize_t slot, idx
        cdef double px, py, wx, wy, cross, dx, dy, d2
        for slot in range(self.cell_start[c], self.cell_start[c + 1]):
            idx = <Py_ssize_t> self.cell_order[slot]
            if self.claimed[idx]:
                continue
            px = self.pts[idx, 0]
            py = self.pts[idx, 1]
            if skip_dir:
                wx = px - tx
                wy = py - ty
                cross = wx * fy - wy * fx
                if cross * cross < self.s2 * (wx * wx + wy * wy) * u2:
                    continue
            dx = px - tx
            dy = py - ty
            d2 = dx * dx + dy * dy
            if d2 < bd2[0] or (d2 == bd2[0] and (px < bx[0] or (px == bx[0] and py < by[0]))):
                best[0] = idx
                bd2[0] = d2
                bx[0] = px
                by[0] = py

    cdef Py_ssize_t nearest(self, double tx, double ty, double fx, double fy,
                            bint skip_dir):
        cdef Py_ssize_t best = -1
        cdef double bd2 = INFINITY
        cdef double bx = 0.0, by = 0.0
        cdef double u2 = fx * fx + fy * fy
        cdef Py_ssize_t icx, icy, radius, i, j, ilo, ihi, jlo, jhi
        cdef double lb, bl, br, bb, bt
        cdef bint covered

        self.queries += 1
        icx = <Py_ssize_t> floor((tx - self.x0) / self.csx)
        if icx < 0:
            icx = 0
        if icx > self.gx - 1:
            icx = self.gx - 1
        icy = <Py_ssize_t> floor((ty - self.y0) / self.csy)
        if icy < 0:
            icy = 0
        if icy > self.gy - 1:
            icy = self.gy - 1

        radius = 0
        while True:
            ilo = icx - radius
            ihi = icx + radius
            jlo = icy - radius
            jhi = icy + radius
            i = ilo if ilo > 0 else 0
            while i <= (ihi if ihi < self.gx - 1 else self.gx - 1):
                if 0 <= jlo < self.gy:
                    self.scan_cell(jlo * self.gx + i, tx, ty, fx, fy, skip_dir,
                                   u2, &best, &bd2, &bx, &by)
                if radius > 0 and 0 <= jhi < self.gy:
                    self.scan_cell(jhi * self.gx + i, tx, ty, fx, fy, skip_dir,
                                   u2, &best, &bd2, &bx, &by)
                i += 1
            if radius > 0:
                j = jlo + 1 if jlo + 1 > 0 else 0
                while j <= (jhi - 1 if jhi - 1 < self.gy - 1 else self.gy - 1):
                    if 0 <= ilo < self.gx:
                        self.scan_cell(j * self.gx + ilo, tx, ty, fx, fy,
                                       skip_dir, u2, &best, &bd2, &bx, &by)
                    if 0 <= ihi < self.gx:
                        self.scan_cell(j * self.gx + ihi, tx, ty, fx, fy,
                                       skip_dir, u2, &best, &bd2, &bx, &by)
                    j += 1

            covered = (ilo <= 0 and ihi >= self.gx - 1
                       and jlo <= 0 and jhi >= self.gy - 1)
            if covered:
                return best
            if best >= 0:
                lb = INFINITY
                bl = self.x0 + (icx - radius) * self.csx
                br = self.x0 + (icx + radius + 1) * self.csx
                bb = self.y0 + (icy - radius) * self.csy
                bt = self.y0 + (icy + radius + 1) * self.csy
                if icx - radius > 0 and tx - bl < lb:
                    lb = tx - bl if tx - bl > 0.0 else 0.0
                if icx + radius < self.gx - 1 and br - tx < lb:
                    lb = br - tx if br - tx > 0.0 else 0.0
                if icy - radius > 0 and ty - bb < lb:
                    lb = ty - bb if ty - bb > 0.0 else 0.0
                if icy + radius < self.gy - 1 and bt - ty < lb:
                    lb = bt - ty if bt - ty > 0.0 else 0.0
                if bd2 < lb * lb:
                    return best
            radius += 1

    cdef bint in_inner(self, double x, double y):
        return self.xlo <= x <= self.xhi and self.ylo <= y <= self.yhi

    cdef void claim(self, Py_ssize_t i, long long k1, long long k2):
        self.claimed[i] = 1
        self.labels[i, 0] = k1
        self.labels[i, 1] = k2
        self.order[self.n_ord] = i
        self.n_ord += 1

    cdef void extend(self, long long r, double ax, double ay,
                     double bx, double by, long long kstart, long long kdir):
        cdef long long k = kstart
        cdef double sx, sy, tx, ty, px, py, ddx, ddy
        cdef Py_ssize_t i
        while self.max_cols < 0 or (k if k >= 0 else -k) <= self.max_cols:
            sx = bx - ax
            sy = by - ay
            tx = bx + sx
            ty = by + sy
            if not self.in_inner(tx, ty):
                return
            i = self.nearest(tx, ty, 0.0, 0.0, False)
            if i < 0:
                return
            px = self.pts[i, 0]
            py = self.pts[i, 1]
            ddx = px - tx
            ddy = py - ty
            if ddx * ddx + ddy * ddy > self.rf2 * (sx * sx + sy * sy):
                return
            self.claim(i, k, r)
            ax = bx
            ay = by
            bx = px
            by = py
            k += kdir

    cdef bint do_row(self, long long r, double qx, double qy,
                     double hx, double hy, double *nhx, double *nhy):
        """Seed (1, r) and extend; returns True with the new row step."""
        cdef double tx, ty, px, py, ddx, ddy
        cdef Py_ssize_t i
        if 0 <= self.max_cols < 1:
            return False
        tx = qx + hx
        ty = qy + hy
        if not self.in_inner(tx, ty):
            return False
        i = self.nearest(tx, ty, 0.0, 0.0, False)
        if i < 0:
            return False
        px = self.pts[i, 0]
        py = self.pts[i, 1]
        ddx = px - tx
        ddy = py - ty
        if ddx * ddx + ddy * ddy > self.rf2 * (hx * hx + hy * hy):
            return False
        self.claim(i, 1, r)
        self.extend(r, qx, qy, px, py, 2, 1)
        self.extend(r, px, py, qx, qy, -1, -1)
        nhx[0] = px - qx
        nhy[0] = py - qy
        return True

    cdef void build_side(self, long long sgn, double p00x, double p00y,
                         double p01x, double p01y, double ux, double uy):
        cdef double hx = ux, hy = uy
        cdef double nhx = 0.0, nhy = 0.0
        cdef double a2x, a2y, a1x, a1y, sx, sy, tx, ty, px, py, ddx, ddy
        cdef long long r
        cdef Py_ssize_t i
        if sgn > 0:
            if self.do_row(1, p01x, p01y, hx, hy, &nhx, &nhy):
                hx = nhx
                hy = nhy
            a2x = p00x
            a2y = p00y
            a1x = p01x
            a1y = p01y
            r = 2
        else:
            a2x = p01x
            a2y = p01y
            a1x = p00x
            a1y = p00y
            r = -1
        while self.max_rows < 0 or (r if r >= 0 else -r) <= self.max_rows:
            sx = a1x - a2x
            sy = a1y - a2y
            tx = a1x + sx
            ty = a1y + sy
            if not self.in_inner(tx, ty):
                return
            i = self.nearest(tx, ty, 0.0, 0.0, False)
            if i < 0:
                return
            px = self.pts[i, 0]
            py = self.pts[i, 1]
            ddx = px - tx
            ddy = py - ty
            if ddx * ddx + ddy * ddy > self.rf2 * (sx * sx + sy * sy):
                return
            self.claim(i, 0, r)
            if self.do_row(r, px, py, hx, hy, &nhx, &nhy):
                hx = nhx
                hy = nhy
            a2x = a1x
            a2y = a1y
            a1x = px
            a1y = py
            r += sgn


def walk(const double[:, ::1] pts, long long[::1] cell_start, long long[::1] cell_order,
         Py_ssize_t gx, Py_ssize_t gy, double x0, double y0, double csx, double csy,
         double xlo, double ylo, double xhi, double yhi,
         double cx, double cy, double reject_factor, double sin_eps,
         long long max_rows, long long max_cols):
    """Run the walk; returns (labels, claimed, order, queries, flipped, has_basis)."""
    cdef Py_ssize_t n = pts.shape[0]
    labels_np = np.zeros((n, 2), dtype=np.int64)
    claimed_np = np.zeros(n, dtype=np.uint8)
    order_np = np.empty(n, dtype=np.int64)

    cdef _Walker w = _Walker()
    w.pts = pts
    w.cell_start = cell_start
    w.cell_order = cell_order
    w.claimed = claimed_np
    w.labels = labels_np
    w.order = order_np
    w.n_ord = 0
    w.queries = 0
    w.gx = gx
    w.gy = gy
    w.x0 = x0
    w.y0 = y0
    w.csx = csx
    w.csy = csy
    w.xlo = xlo
    w.xhi = xhi
    w.ylo = ylo
    w.yhi = yhi
    w.rf2 = reject_factor * reject_factor
    w.s2 = sin_eps * sin_eps
    w.max_rows = max_rows
    w.max_cols = max_cols

    cdef Py_ssize_t i00, i10, i01
    cdef double p00x, p00y, p10x, p10y, p01x, p01y, ux, uy, vx, vy
    cdef bint flipped = False
    cdef bint has_basis = False

    i00 = w.nearest(cx, cy, 0.0, 0.0, False)
    if i00 < 0:
        return labels_np, claimed_np, order_np[:0], w.queries, False, False
    w.claim(i00, 0, 0)
    p00x = w.pts[i00, 0]
    p00y = w.pts[i00, 1]

    i10 = w.nearest(p00x, p00y, 0.0, 0.0, False)
    if i10 < 0:
        return labels_np, claimed_np, order_np[:1], w.queries, False, False
    w.claim(i10, 1, 0)
    p10x = w.pts[i10, 0]
    p10y = w.pts[i10, 1]
    ux = p10x - p00x
    uy = p10y - p00y

    w.extend(0, p00x, p00y, p10x, p10y, 2, 1)
    w.extend(0, p10x, p10y, p00x, p00y, -1, -1)

    if max_rows != 0:
        i01 = w.nearest(p00x, p00y, ux, uy, True)
        if i01 >= 0:
            has_basis = True
            w.claim(i01, 0, 1)
            p01x = w.pts[i01, 0]
            p01y = w.pts[i01, 1]
            vx = p01x - p00x
            vy = p01y - p00y

            w.build_side(1, p00x, p00y, p01x, p01y, ux, uy)
            w.build_side(-1, p00x, p00y, p01x, p01y, ux, uy)

            if ux * vy - uy * vx < 0:
                labels_np[:, 0] = -labels_np[:, 0]
                flipped = True

    return labels_np, claimed_np, order_np[:w.n_ord], w.queries, flipped, has_basis
