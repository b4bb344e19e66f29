"""Independent oracles used to freeze expected values.

These deliberately avoid the library's own code paths: the witness search
is a plain exhaustive loop, distances are brute-forced, and closed-form
spectra are enumerated directly.
"""
from __future__ import annotations

import itertools

import numpy as np


def brute_force_witness(a_points, a_labels, b_points, b_labels,
                        tol: float = 1e-9, bound: int = 2):
    """Exhaustive witness search: all M with entries in [-bound, bound] and
    det +1, translations from matched point pairs.

    Returns (M, t) as integer arrays, or None when no witness exists.
    """
    a_points = np.asarray(a_points, dtype=float)
    b_points = np.asarray(b_points, dtype=float)
    ka = np.asarray(a_labels, dtype=np.int64)
    kb_raw = np.asarray(b_labels, dtype=np.int64)
    if len(a_points) != len(b_points):
        return None

    # position matching, brute force
    order = []
    used = set()
    for p in a_points:
        d2 = np.sum((b_points - p) ** 2, axis=1)
        j = int(np.argmin(d2))
        if d2[j] > tol * tol or j in used:
            return None
        used.add(j)
        order.append(j)
    kb = kb_raw[np.asarray(order)]

    rng = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if a * d - b * c != 1:
            continue
        m = np.array([[a, b], [c, d]], dtype=np.int64)
        mapped = ka @ m.T
        t_all = kb - mapped
        if np.all(t_all == t_all[0]):
            return m, t_all[0].copy()
    return None


def min_gap_brute(points) -> float:
    """Minimum pairwise distance by checking every pair."""
    pts = np.asarray(points, dtype=float)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = (diff ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    return float(np.sqrt(d2.min()))


def harmonic_pair_points(hbar: float, domain, region_bounds) -> np.ndarray:
    """Direct enumeration of the two-oscillator spectrum hbar*(m+1/2) per axis."""
    pts = []
    m = 0
    while True:
        x = hbar * (m + 0.5)
        if hbar * m > domain[2]:
            break
        n = 0
        while True:
            y = hbar * (n + 0.5)
            if hbar * n > domain[3]:
                break
            if (hbar * m >= domain[0] and hbar * n >= domain[1]
                    and region_bounds[0] <= x <= region_bounds[2]
                    and region_bounds[1] <= y <= region_bounds[3]):
                pts.append((x, y))
            n += 1
        m += 1
    return np.array(sorted(pts))


def brute_nearest(points, claimed, tx, ty, fx=0.0, fy=0.0,
                  skip_dir=False, sin_eps=1e-6) -> int:
    """Reference nearest-unclaimed query with the library's tie rule."""
    pts = np.asarray(points, dtype=float)
    s2 = sin_eps * sin_eps
    u2 = fx * fx + fy * fy
    best = -1
    bd2 = np.inf
    bx = by = 0.0
    for i in range(len(pts)):
        if claimed[i]:
            continue
        px, py = pts[i, 0], pts[i, 1]
        if skip_dir:
            wx, wy = px - tx, py - ty
            cross = wx * fy - wy * fx
            if cross * cross < s2 * (wx * wx + wy * wy) * u2:
                continue
        dx, dy = px - tx, py - ty
        d2 = dx * dx + dy * dy
        if d2 < bd2 or (d2 == bd2 and (px < bx or (px == bx and py < by))):
            best, bd2, bx, by = i, d2, px, py
    return best
