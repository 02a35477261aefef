"""Compiled single pass over a jittered sampling set for the hat-spline space.

Very dense sampling sets (hundreds of millions of points per unit length
times the window length) are never stored.  The points are generated in
order, and every quantity the sampling experiments need is accumulated on
the fly:

* per-cell moments ``n, Σt, Σt²`` of the local coordinate ``t = x - ⌊x⌋``
  (these give ``Σ_j |f(x_j)|²`` exactly as a quadratic form),
* the first and last ``t`` per cell (these give ``max_j |f(x_j)|``),
* a per-cell histogram of ``t`` with counts and sums (two-sided bounds of
  ``Σ_j |f(x_j)|``),
* the matrix ``T[i, l] = Σ_j ⟨g_j, φ(· - i)⟩ φ(x_j - l)`` of the sampled
  Gram operator, with ``g_j`` the piecewise-linear partition of unity,
* ``Σ_j f(x_j) ⟨g_j, φ(· - i)⟩`` for a few target functions.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _hat(y):
    y = abs(y)
    return 1.0 - y if y < 1.0 else 0.0


@njit(cache=True)
def _trap_right(a, b, c, d, x):
    """Trapezoid with corners a <= b <= c <= d, limit from the right at x."""
    if x < a or x >= d:
        return 0.0
    if x < b:
        return (x - a) / (b - a)
    if x < c:
        return 1.0
    return (d - x) / (d - c)


@njit(cache=True)
def _trap_left(a, b, c, d, x):
    """Same trapezoid, limit from the left at x."""
    if x <= a or x > d:
        return 0.0
    if x <= b:
        return (x - a) / (b - a)
    if x <= c:
        return 1.0
    return (d - x) / (d - c)


@njit(cache=True)
def _bump_hat_integral(a, b, c, d, i):
    """∫ g(x) φ(x - i) dx for the trapezoid g with corners a <= b <= c <= d.

    Simpson's rule on every piece between consecutive breakpoints of the
    product, which is exact because the product is quadratic there.
    """
    pts = np.empty(7)
    pts[0] = a
    pts[1] = b
    pts[2] = c
    pts[3] = d
    m = 4
    for z in (i - 1.0, i * 1.0, i + 1.0):
        if a < z < d:
            pts[m] = z
            m += 1
    p = np.sort(pts[:m])
    total = 0.0
    for k in range(m - 1):
        lo = p[k]
        hi = p[k + 1]
        if hi <= lo:
            continue
        mid = 0.5 * (lo + hi)
        flo = _trap_right(a, b, c, d, lo)
        fhi = _trap_left(a, b, c, d, hi)
        fmid = _trap_right(a, b, c, d, mid)
        total += (hi - lo) / 6.0 * (flo * _hat(lo - i) + 4.0 * fmid * _hat(mid - i) + fhi * _hat(hi - i))
    return total


@njit(cache=True)
def _transition(x_left, x_right, delta):
    # ramp between two neighbours, centred at the midpoint, inside both δ-balls
    gap = x_right - x_left
    mid = 0.5 * (x_left + x_right)
    s = 0.5 * min(0.5 * gap, delta - 0.5 * gap)
    return mid - s, mid + s


class HatStreamState:
    """Accumulators of :func:`process_chunk`, carried across chunks."""

    def __init__(self, n_cells: int, n_bins: int, targets: np.ndarray):
        self.count = np.zeros(n_cells, dtype=np.int64)
        self.s1 = np.zeros(n_cells)
        self.s2 = np.zeros(n_cells)
        self.tmin = np.full(n_cells, np.inf)
        self.tmax = np.full(n_cells, -np.inf)
        self.bin_count = np.zeros((n_cells, n_bins), dtype=np.int64)
        self.bin_s1 = np.zeros((n_cells, n_bins))
        # rows i = -1 .. n_cells + 1, columns l = 0 .. n_cells
        self.T = np.zeros((n_cells + 3, n_cells + 1))
        self.targets = np.ascontiguousarray(targets, dtype=float)
        self.vt = np.zeros((targets.shape[0], n_cells + 3))
        # x_cur, a, b, max_gap, first point, last point
        self.scalars = np.array([np.nan, 0.0, 0.0, 0.0, np.nan, np.nan])
        self.next_index = 0

    def arrays(self):
        return (
            self.count, self.s1, self.s2, self.tmin, self.tmax, self.bin_count, self.bin_s1,
            self.T, self.targets, self.vt, self.scalars,
        )


@njit(cache=True)
def _slow_bump(a, b, c, d, cell, t, n_cells, T, targets, vt):
    # bump straddles an integer: integrate against every hat it meets
    w0 = 1.0 - t
    w1 = t
    K = targets.shape[0]
    lo_i = int(math.floor(a)) - 1
    hi_i = int(math.ceil(d)) + 1
    for i in range(max(lo_i, -1), min(hi_i, n_cells + 1) + 1):
        g = _bump_hat_integral(a, b, c, d, float(i))
        if g == 0.0:
            continue
        T[i + 1, cell] += g * w0
        T[i + 1, cell + 1] += g * w1
        for k in range(K):
            fx = targets[k, cell] * w0 + targets[k, cell + 1] * w1
            vt[k, i + 1] += fx * g


@njit(cache=True)
def process_chunk(
    u, j0, n_points, n_cells, h, delta,
    count, s1, s2, tmin, tmax, bin_count, bin_s1, T, targets, vt, scalars,
):
    """Consume jitters ``u`` of points ``j0 .. j0 + len(u) - 1`` at ``x_j = (j + 0.5 + u_j) h``.

    Point ``j`` is processed once ``x_{j+1}`` is known, so each call leaves
    one point pending in ``scalars``; the call that reaches ``n_points``
    flushes it against the window end.
    """
    L = float(n_cells)
    n_bins = bin_count.shape[1]
    K = targets.shape[0]
    x_cur = scalars[0]
    a = scalars[1]
    b = scalars[2]
    max_gap = scalars[3]
    m = u.shape[0]
    start = 0
    if j0 == 0:
        x_cur = (0.5 + u[0]) * h
        scalars[4] = x_cur
        a = 0.0
        b = 0.0
        start = 1
    final = j0 + m == n_points

    cur = -1
    ln = 0
    ls1 = 0.0
    ls2 = 0.0
    lmin = np.inf
    lmax = -np.inf
    t00 = 0.0
    t01 = 0.0
    t10 = 0.0
    t11 = 0.0
    lv0 = np.zeros(K)
    lv1 = np.zeros(K)
    c0 = np.zeros(K)
    c1 = np.zeros(K)

    for q in range(start, m + (1 if final else 0)):
        if q < m:
            x_next = (j0 + q + 0.5 + u[q]) * h
            gap = x_next - x_cur
            if gap > max_gap:
                max_gap = gap
            mid = 0.5 * (x_cur + x_next)
            s = 0.5 * min(0.5 * gap, delta - 0.5 * gap)
            c = mid - s
            d = mid + s
        else:
            x_next = L
            c = L
            d = L
        cell = int(x_cur)
        if cell >= n_cells:
            cell = n_cells - 1
        if cell != cur:
            if cur >= 0:
                count[cur] += ln
                s1[cur] += ls1
                s2[cur] += ls2
                tmin[cur] = min(tmin[cur], lmin)
                tmax[cur] = max(tmax[cur], lmax)
                T[cur + 1, cur] += t00
                T[cur + 1, cur + 1] += t01
                T[cur + 2, cur] += t10
                T[cur + 2, cur + 1] += t11
                for k in range(K):
                    vt[k, cur + 1] += lv0[k]
                    vt[k, cur + 2] += lv1[k]
            cur = cell
            ln = 0
            ls1 = 0.0
            ls2 = 0.0
            lmin = np.inf
            lmax = -np.inf
            t00 = 0.0
            t01 = 0.0
            t10 = 0.0
            t11 = 0.0
            for k in range(K):
                lv0[k] = 0.0
                lv1[k] = 0.0
                c0[k] = targets[k, cell]
                c1[k] = targets[k, cell + 1]
        t = x_cur - cell
        ln += 1
        ls1 += t
        ls2 += t * t
        if t < lmin:
            lmin = t
        if t > lmax:
            lmax = t
        bn = int(t * n_bins)
        if bn >= n_bins:
            bn = n_bins - 1
        bin_count[cell, bn] += 1
        bin_s1[cell, bn] += t

        w0 = 1.0 - t  # φ(x - cell)
        w1 = t  # φ(x - cell - 1)
        ya = a - cell
        yd = d - cell
        if ya > 0.0 and yd < 1.0:
            # bump inside the open cell: φ(·-cell) and φ(·-cell-1) are linear on it
            yb = b - cell
            yc = c - cell
            mass = 0.5 * ((d - a) + (c - b))
            m1 = 0.5 * (c - b) * (yc + yb) + (b - a) * (ya + 2.0 * yb) / 6.0 + (d - c) * (yd + 2.0 * yc) / 6.0
            g0 = mass - m1
            t00 += g0 * w0
            t01 += g0 * w1
            t10 += m1 * w0
            t11 += m1 * w1
            for k in range(K):
                fx = c0[k] * w0 + c1[k] * w1
                lv0[k] += fx * g0
                lv1[k] += fx * m1
        else:
            _slow_bump(a, b, c, d, cell, t, n_cells, T, targets, vt)
        a = c
        b = d
        scalars[5] = x_cur
        x_cur = x_next
    if cur >= 0:
        count[cur] += ln
        s1[cur] += ls1
        s2[cur] += ls2
        tmin[cur] = min(tmin[cur], lmin)
        tmax[cur] = max(tmax[cur], lmax)
        T[cur + 1, cur] += t00
        T[cur + 1, cur + 1] += t01
        T[cur + 2, cur] += t10
        T[cur + 2, cur + 1] += t11
        for k in range(K):
            vt[k, cur + 1] += lv0[k]
            vt[k, cur + 2] += lv1[k]
    scalars[0] = x_cur
    scalars[1] = a
    scalars[2] = b
    scalars[3] = max_gap


def stream_hat_jitter(rng, n_points, n_cells, h, jitter, delta, n_bins, targets, chunk=1 << 22):
    """Run :func:`process_chunk` over ``n_points`` jittered points drawn from ``rng``."""
    state = HatStreamState(n_cells, n_bins, np.atleast_2d(targets))
    buf = np.empty(chunk)
    j0 = 0
    while j0 < n_points:
        m = min(chunk, n_points - j0)
        u = buf[:m]
        rng.random(out=u)
        u *= 2.0 * jitter
        u -= jitter
        process_chunk(u, j0, n_points, n_cells, h, delta, *state.arrays())
        j0 += m
    return state
