"""Nonuniform sampling and iterative reconstruction in spline-type spaces.

Reconstruction runs in coefficient space.  For coefficients ``c`` on a
fixed index range the composite ``P I Z`` acts as

    c  ->  Q B* (T c),     T[i, l] = Σ_j ⟨g_j, φ(· - i)⟩ φ(x_j - l),

where ``g_j`` is the partition of unity subordinated to the sampling set,
``B*`` is correlation with the conjugated inverse autocorrelation ``b`` and
``Q`` restricts to the index range.  The iteration
``c_{n+1} = c_n + Q B*(v - T c_n)`` with ``v = Σ_j f(x_j) ⟨g_j, φ(· - i)⟩``
is the frame algorithm for ``P I Z``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from . import _hatstream
from .bounds import DecayCertificate, sampling_bounds, sampling_rho, solve_max_delta
from .errors import HypothesisFailed, NotContracting, NotDense
from .sequences import WeightedSequence
from .spline import (
    BSplineGenerator,
    Generator,
    SampledFunction,
    SplineModel,
    _lattice_edges,
    analyze,
    bspline,
    function_amalgam_norm,
    integrate_cells,
)

__all__ = [
    "SamplingSet",
    "PartitionOfUnity",
    "OscillationReport",
    "SampledGram",
    "ReconResult",
    "HatJitterStats",
    "relative_separation",
    "validate_set",
    "jittered_points",
    "load_points",
    "save_points",
    "oscillation_bound",
    "oscillation_bound_value",
    "operator_Z",
    "operator_I",
    "operator_P",
    "sampled_gram",
    "project",
    "reconstruct",
    "estimate_gamma",
    "hat_jitter_stats",
    "best_hat_certificate",
]


# --- sampling sets ----------------------------------------------------------------


def relative_separation(points) -> int:
    """Largest number of points in a unit interval ``[k, k+1)``."""
    x = np.asarray(points, dtype=float)
    if x.size == 0:
        return 0
    _, counts = np.unique(np.floor(x).astype(np.int64), return_counts=True)
    return int(counts.max())


@dataclass(frozen=True, eq=False)
class SamplingSet:
    points: np.ndarray
    delta: float
    window: tuple[float, float]
    N_X: int

    @property
    def n(self) -> int:
        return len(self.points)


def validate_set(points, delta: float, window: tuple[float, float] | None = None) -> SamplingSet:
    """Check δ-density of ``points`` on ``window`` and compute N(X).

    Raises
    ------
    NotDense
        if some gap is ``>= 2δ`` or an end point is ``>= δ`` from the window
        edge.  ``gap`` holds the first offending gap.
    """
    x = np.asarray(points, dtype=float).ravel()
    if not delta > 0:
        raise HypothesisFailed(f"density radius must be positive, got {delta}")
    if x.size == 0:
        raise NotDense("empty sampling set", gap=math.inf)
    if not np.all(np.isfinite(x)):
        raise ValueError("sampling points must be finite")
    gaps = np.diff(x)
    if np.any(gaps <= 0):
        raise ValueError("sampling points must be strictly increasing")
    if window is None:
        window = (math.floor(x[0]), math.ceil(x[-1]))
    lo, hi = float(window[0]), float(window[1])
    if x[0] < lo or x[-1] > hi:
        raise ValueError(f"sampling points leave the window [{lo}, {hi}]")
    if x[0] - lo >= delta:
        raise NotDense(f"window start {lo} is not within {delta} of a point", gap=x[0] - lo)
    bad = np.flatnonzero(gaps >= 2 * delta)
    if bad.size:
        j = int(bad[0])
        raise NotDense(f"gap {gaps[j]:.6g} between x[{j}]={x[j]:.6g} and x[{j + 1}] exceeds 2·delta", gap=float(gaps[j]))
    if hi - x[-1] >= delta:
        raise NotDense(f"window end {hi} is not within {delta} of a point", gap=hi - x[-1])
    x = x.copy()
    x.setflags(write=False)
    return SamplingSet(x, float(delta), (lo, hi), relative_separation(x))


def jittered_points(window: tuple[float, float], h: float, jitter: float, rng: np.random.Generator) -> np.ndarray:
    """``x_j = lo + (j + 1/2 + u_j) h`` with ``u_j ~ U(-jitter, jitter)``, ``h`` dividing the window."""
    lo, hi = window
    n = int(round((hi - lo) / h))
    if abs(n * h - (hi - lo)) > 1e-9 * (hi - lo):
        raise ValueError("spacing must divide the window length")
    u = rng.uniform(-jitter, jitter, n)
    return lo + (np.arange(n) + 0.5 + u) * h


def load_points(path) -> np.ndarray:
    """One point per line; blank lines and lines starting with '#' are skipped."""
    vals = []
    with open(path) as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip() or row[0].lstrip().startswith("#"):
                continue
            vals.append(float(row[0]))
    return np.array(vals)


def save_points(points, path) -> None:
    with open(path, "w") as fh:
        for x in np.asarray(points, dtype=float).tolist():
            fh.write(f"{x!r}\n")


class PartitionOfUnity:
    """Piecewise-linear partition of unity subordinated to a δ-dense set.

    ``g_j`` equals 1 on the Voronoi cell of ``x_j`` away from its ends and
    ramps linearly across each midpoint ``m`` between neighbours over
    ``[m - s, m + s]`` with ``s = min(gap/2, δ - gap/2)/2``, so the ramps
    never reach a sample point and ``supp g_j ⊂ (x_j - δ, x_j + δ)``.  At the
    window edges the outermost bumps are cut off.
    """

    def __init__(self, X: SamplingSet):
        self.X = X
        x = X.points
        lo, hi = X.window
        gaps = np.diff(x)
        mid = 0.5 * (x[:-1] + x[1:])
        s = 0.5 * np.minimum(0.5 * gaps, X.delta - 0.5 * gaps)
        # ramp k sits between x_k and x_{k+1}
        self.r_lo = np.concatenate([[lo], mid - s, [hi]])
        self.r_hi = np.concatenate([[lo], mid + s, [hi]])

    def corners(self, j: int) -> tuple[float, float, float, float]:
        """``(a, b, c, d)``: g_j rises on [a, b], equals 1 on [b, c], falls on [c, d]."""
        return self.r_lo[j], self.r_hi[j], self.r_lo[j + 1], self.r_hi[j + 1]

    def support(self, j: int) -> tuple[float, float]:
        return self.r_lo[j], self.r_hi[j + 1]

    def bump(self, j: int, x):
        a, b, c, d = self.corners(j)
        x = np.asarray(x, dtype=float)
        up = np.where(b > a, (x - a) / np.where(b > a, b - a, 1.0), 1.0)
        down = np.where(d > c, (d - x) / np.where(d > c, d - c, 1.0), 1.0)
        out = np.clip(np.minimum(up, down), 0.0, 1.0)
        return np.where((x >= a) & (x <= d), out, 0.0)

    def evaluate(self, c, x):
        """``Σ_j c_j g_j(x)`` for x in the window."""
        c = np.asarray(c)
        x = np.asarray(x, dtype=float)
        lo, hi = self.X.window
        if np.any((x < lo) | (x > hi)):
            raise ValueError("evaluation points outside the window")
        # ramp k lies between x_k and x_{k+1}; the points themselves split the ramps
        j = np.clip(np.searchsorted(self.X.points, x, side="right") - 1, -1, self.X.n - 1)
        k = j + 1  # ramp to the right of x_j, i.e. between x_j and x_{j+1}
        a, b = self.r_lo[k], self.r_hi[k]
        w = np.where(b > a, np.clip((x - a) / np.where(b > a, b - a, 1.0), 0.0, 1.0), (x >= a).astype(float))
        left = c[np.clip(j, 0, self.X.n - 1)]
        right = c[np.clip(j + 1, 0, self.X.n - 1)]
        return np.where(j < 0, right, np.where(j + 1 >= self.X.n, left, (1 - w) * left + w * right))

    def defect(self, x) -> float:
        """``max |Σ_j g_j(x) - 1|`` over the points x."""
        return float(np.abs(self.evaluate(np.ones(self.X.n), x) - 1.0).max())

    def nodes(self, j: int) -> tuple[np.ndarray, np.ndarray]:
        a, b, c, d = self.corners(j)
        return np.array([a, b, c, d]), np.array([0.0 if b > a else 1.0, 1.0, 1.0, 0.0 if d > c else 1.0])


# --- oscillation ---------------------------------------------------------------------


@dataclass(frozen=True)
class OscillationReport:
    bound: float
    direct: float
    deriv_norm: float
    delta: float
    q: float
    resolution: float

    @property
    def holds(self) -> bool:
        return self.direct <= self.bound * (1 + 1e-12)


def oscillation_bound_value(deriv_norm: float, delta: float, q: float) -> float:
    """``(2⌈δ⌉ + 1) ‖φ'‖_{W(L^q,ℓ¹)} δ^(1 - 1/q)``."""
    iq = 0.0 if math.isinf(q) else 1.0 / q
    return (2 * math.ceil(delta) + 1) * deriv_norm * delta ** (1.0 - iq)


def _direct_oscillation(gen: Generator, delta: float, per_unit: int) -> float:
    lo, hi = gen.support
    j0, j1 = math.floor(lo - delta) - 1, math.ceil(hi + delta) + 1
    n = (j1 - j0) * per_unit
    x = j0 + np.arange(n + 1) / per_unit
    v = gen(x)
    w = int(math.floor(delta * per_unit + 1e-9))
    if np.iscomplexobj(v) and np.any(np.imag(v)):
        osc = np.zeros(len(x))
        for s in range(-w, w + 1):
            shifted = np.roll(v, s)
            osc = np.maximum(osc, np.abs(v - shifted))
    else:
        v = np.real(v)
        size = 2 * w + 1
        vmax = maximum_filter1d(v, size, mode="constant", cval=0.0)
        vmin = minimum_filter1d(v, size, mode="constant", cval=0.0)
        osc = np.maximum(vmax - v, v - vmin)
    # cell [k, k+1] contains samples k·per_unit .. (k+1)·per_unit
    cells = osc[np.arange(j1 - j0)[:, None] * per_unit + np.arange(per_unit + 1)[None, :]]
    return float(cells.max(axis=1).sum())


def oscillation_bound(gen: Generator, delta: float, q: float = math.inf, per_unit: int = 1024) -> OscillationReport:
    """Bound of ``‖osc_δ(φ)‖_{W(L^∞,ℓ¹)}`` through ``‖φ'‖_{W(L^q,ℓ¹)}``, plus a direct grid estimate.

    The direct value takes ``osc_δ(φ)(x) = sup_{|x-y|<=δ} |φ(x) - φ(y)|``
    over grid samples with spacing ``1/per_unit``, then the sum over unit
    cells of the cell maxima.
    """
    if not gen.deriv_available:
        raise HypothesisFailed(f"{gen.kind} generator has no usable derivative")
    if not q > 1:
        raise HypothesisFailed(f"q must exceed 1, got {q}")
    if not delta > 0:
        raise HypothesisFailed("delta must be positive")
    dn = function_amalgam_norm(gen, p=q, q=1.0, derivative=True, per_cell=per_unit)
    bound = oscillation_bound_value(dn, delta, q)
    return OscillationReport(bound, _direct_oscillation(gen, delta, per_unit), dn, delta, q, 1.0 / per_unit)


# --- operators -------------------------------------------------------------------------


def operator_Z(model: SplineModel, X: SamplingSet, c: WeightedSequence) -> np.ndarray:
    """Exact samples ``f(x_j)`` of ``f = Σ_k c_k φ(· - k)``."""
    return np.asarray(model.function(c)(X.points))


def operator_I(X: SamplingSet, pou: PartitionOfUnity, c, x) -> np.ndarray:
    """Samples of the quasi-interpolant ``Σ_j c_j g_j`` at x."""
    c = np.asarray(c)
    if c.shape != (X.n,):
        raise ValueError("need one value per sampling point")
    return pou.evaluate(c, x)


def operator_P(model: SplineModel, f, k_range: tuple[int, int]) -> WeightedSequence:
    """Coefficients ``⟨f, ψ(· - k)⟩`` of the projection of f onto the spline space."""
    return analyze(model, f, k_range)


def default_k_range(gen: Generator, window: tuple[float, float]) -> tuple[int, int]:
    """Indices of translates ``φ(· - k)`` whose (effective) support lies in the window."""
    lo, hi = gen.support
    k_lo = math.ceil(window[0] - lo - 1e-12)
    k_hi = math.floor(window[1] - hi + 1e-12)
    if k_hi < k_lo:
        raise HypothesisFailed("window too short for the generator support")
    return k_lo, k_hi


@dataclass(frozen=True, eq=False)
class SampledGram:
    """``T[i - i_lo, l - k_lo] = Σ_j ⟨g_j, φ(· - i)⟩ φ(x_j - l)``; ``G`` maps samples to ``v``."""

    T: np.ndarray
    i_lo: int
    k_range: tuple[int, int]
    G: object = None

    def apply(self, c: np.ndarray) -> np.ndarray:
        return self.T @ c

    def moments(self, samples) -> np.ndarray:
        """``v_i = Σ_j f(x_j) ⟨g_j, φ(· - i)⟩``."""
        if self.G is None:
            raise ValueError("sample-to-moment map not stored")
        return self.G @ np.asarray(samples)


def _bump_integrals(model: SplineModel, pou: PartitionOfUnity, j: int, i_lo: int, i_hi: int):
    gen = model.gen
    a, b, c, d = pou.corners(j)
    if d <= a:
        return [], []
    xs, ys = pou.nodes(j)
    glo, ghi = gen.support
    rows, vals = [], []
    exact = gen.degree is not None
    order = (gen.degree + 3) // 2 + 1 if exact else 8
    for i in range(max(i_lo, math.floor(a - ghi)), min(i_hi, math.ceil(d - glo)) + 1):
        lo, hi = max(a, i + glo), min(d, i + ghi)
        if hi <= lo:
            continue
        edges = _lattice_edges(lo, hi, gen.phase + i, gen.spacing)
        edges = np.unique(np.concatenate([edges, [t for t in (b, c) if lo < t < hi]]))
        pts_x, pts_y = xs, ys

        def integrand(x, i=i):
            return np.interp(x, pts_x, pts_y) * np.conj(gen(x - i))

        v = integrate_cells(integrand, edges, order=order, exact=exact)
        s = complex(math.fsum(v.real), math.fsum(v.imag))
        if s != 0:
            rows.append(i)
            vals.append(s)
    return rows, vals


def sampled_gram(model: SplineModel, X: SamplingSet, pou: PartitionOfUnity, k_range=None) -> SampledGram:
    """Assemble ``T`` and the sample-to-moment map for a stored sampling set."""
    gen = model.gen
    if k_range is None:
        k_range = default_k_range(gen, X.window)
    k_lo, k_hi = k_range
    glo, ghi = gen.support
    i_lo = math.floor(X.window[0] - ghi)
    i_hi = math.ceil(X.window[1] - glo)
    n_rows = i_hi - i_lo + 1
    G = np.zeros((n_rows, X.n), dtype=complex)
    for j in range(X.n):
        rows, vals = _bump_integrals(model, pou, j, i_lo, i_hi)
        for i, v in zip(rows, vals):
            G[i - i_lo, j] = v
    ks = np.arange(k_lo, k_hi + 1)
    Z = gen(X.points[:, None] - ks[None, :])
    T = G @ Z
    if gen.is_real_even:
        G, T = G.real, T.real
    return SampledGram(T, i_lo, (k_lo, k_hi), G)


def project(model: SplineModel, v: np.ndarray, i_lo: int, k_range: tuple[int, int]) -> np.ndarray:
    """``c_k = Σ_m conj(b_m) v_{k-m}`` for k in ``k_range``."""
    b = model.b
    full = np.convolve(v, b.values.conj())
    # full[n] carries index i_lo + b.offset + n
    start = k_range[0] - (i_lo + b.offset[0])
    n = k_range[1] - k_range[0] + 1
    out = np.zeros(n, dtype=full.dtype)
    lo, hi = max(start, 0), min(start + n, len(full))
    if hi > lo:
        out[lo - start : hi - start] = full[lo:hi]
    return out


# --- reconstruction -----------------------------------------------------------------------


@dataclass
class ReconResult:
    coeffs: WeightedSequence
    iterations: int
    error_history: list
    ratios: list
    gamma_observed: float
    converged: bool
    norm: str = "l2"
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "error_history": self.error_history,
            "ratios": self.ratios,
            "gamma_observed": self.gamma_observed,
            "converged": self.converged,
            "norm": self.norm,
        }


def _pnorm(x: np.ndarray, p: float) -> float:
    a = np.abs(x)
    if math.isinf(p):
        return float(a.max()) if a.size else 0.0
    return math.fsum(a**p) ** (1.0 / p)


def reconstruct(
    model: SplineModel,
    X: SamplingSet | None,
    samples,
    p: float = 2.0,
    tol: float = 1e-13,
    max_iter: int = 200,
    gram: SampledGram | None = None,
    v_target: np.ndarray | None = None,
) -> ReconResult:
    """Frame iteration ``c_{n+1} = c_n + Q B*(v - T c_n)`` started from ``c_0 = 0``.

    ``error_history[n] = ‖c_{n+1} - c_n‖_{ℓ^p}``.  The iteration stops when
    this falls below ``tol·‖c_{n+1}‖_p`` (or below the rounding floor
    ``64 ε ‖c‖``); five consecutive ratios ``≥ 1`` raise NotContracting.
    ``gamma_observed`` is the largest ratio among steps above the rounding
    floor.
    """
    if gram is None:
        gram = sampled_gram(model, X, PartitionOfUnity(X))
    if v_target is None:
        v_target = gram.moments(samples)
    k_lo, k_hi = gram.k_range
    target = project(model, v_target, gram.i_lo, gram.k_range)
    c = np.zeros(k_hi - k_lo + 1, dtype=target.dtype)
    hist, ratios = [], []
    bad = 0
    converged = False
    eps = np.finfo(float).eps
    n = 0
    for n in range(1, max_iter + 1):
        step = target - project(model, gram.apply(c), gram.i_lo, gram.k_range)
        c = c + step
        e = _pnorm(step, p)
        hist.append(e)
        scale = _pnorm(c, p)
        floor = 64 * eps * max(scale, _pnorm(target, p))
        if len(hist) > 1 and hist[-2] > floor:
            ratios.append(e / hist[-2])
            bad = bad + 1 if ratios[-1] >= 1 else 0
            if bad >= 5:
                raise NotContracting(f"iteration diverges: ratios {ratios[-5:]}")
        if e <= max(tol * scale, floor):
            converged = True
            break
    gamma = max([r for r, e in zip(ratios, hist[1:]) if e > 64 * eps * _pnorm(c, p)], default=0.0)
    return ReconResult(WeightedSequence((k_lo,), c), n, hist, ratios, gamma, converged, f"l{p}")


def estimate_gamma(model: SplineModel, gram: SampledGram, iters: int = 60, rng: np.random.Generator | None = None) -> float:
    """Power-iteration estimate of ``‖Id - Q B* T‖`` on ℓ² coefficients (not certified)."""
    rng = np.random.default_rng(0) if rng is None else rng
    k_lo, k_hi = gram.k_range
    x = rng.standard_normal(k_hi - k_lo + 1)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(iters):
        y = x - project(model, gram.apply(x), gram.i_lo, gram.k_range)
        est = float(np.linalg.norm(y))
        if est == 0.0:
            return 0.0
        x = y / est
    return est


# --- the streamed hat-spline experiment ---------------------------------------------------------


def best_hat_certificate(A: float, deriv_norm: float, q: float, rho_target: float) -> DecayCertificate:
    """Decay certificate of the hat function that maximizes the admissible density radius.

    Any ``alpha > 3/2`` with its fitted ``C`` is a valid certificate; the
    sampling bounds depend on the choice, so the exponent is tuned with a
    bounded scalar search.
    """

    def neg_delta(alpha):
        return -solve_max_delta(bspline(2, alpha).cert, A, deriv_norm, q, rho_target)

    res = optimize.minimize_scalar(neg_delta, bounds=(1.75, 5.0), method="bounded", options={"xatol": 1e-3})
    return bspline(2, float(res.x)).cert


@dataclass(frozen=True, eq=False)
class HatJitterStats:
    """Accumulated statistics of one jittered sampling set for the hat spline.

    Coordinates are relative to the window start; cells are ``[l, l+1)``
    and coefficients live on ``l = 0 .. n_cells``.
    """

    n_cells: int
    n_points: int
    h: float
    delta: float
    jitter: float
    count: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    tmin: np.ndarray
    tmax: np.ndarray
    bin_count: np.ndarray
    bin_s1: np.ndarray
    T: np.ndarray
    v_target: np.ndarray
    max_gap: float
    first: float
    last: float

    @property
    def N_X(self) -> int:
        return int(self.count.max())

    def check_density(self) -> None:
        if self.max_gap >= 2 * self.delta:
            raise NotDense(f"gap {self.max_gap} exceeds 2·delta", gap=self.max_gap)
        if self.first >= self.delta or self.n_cells - self.last >= self.delta:
            raise NotDense("window edge not covered", gap=max(self.first, self.n_cells - self.last))

    def gram(self, window_lo: int = 0) -> SampledGram:
        k_range = (window_lo + 1, window_lo + self.n_cells - 1)
        T = self.T[:, 1:-1]
        return SampledGram(T, window_lo - 1, k_range)

    def zf_norm2(self, c: np.ndarray) -> float:
        """``(Σ_j |f(x_j)|²)^(1/2)`` for real hat coefficients ``c`` on 0..n_cells."""
        c0, c1 = c[:-1], c[1:]
        n, s1, s2 = self.count, self.s1, self.s2
        # Σ (c0 (1-t) + c1 t)² = c0² Σ(1-t)² + 2 c0 c1 Σ t(1-t) + c1² Σ t²
        q = c0**2 * (n - 2 * s1 + s2) + 2 * c0 * c1 * (s1 - s2) + c1**2 * s2
        return math.sqrt(max(math.fsum(q), 0.0))

    def zf_norm_inf(self, c: np.ndarray) -> float:
        """``max_j |f(x_j)|``: on each cell |f| is convex, so the extreme samples decide."""
        c0, c1 = c[:-1], c[1:]
        used = self.count > 0
        lo = np.abs(c0 + (c1 - c0) * self.tmin)
        hi = np.abs(c0 + (c1 - c0) * self.tmax)
        return float(np.maximum(lo, hi)[used].max())

    def zf_norm1_bounds(self, c: np.ndarray) -> tuple[float, float]:
        """Lower and upper values of ``Σ_j |f(x_j)|`` for real coefficients.

        Exact on cells where f keeps its sign; in the one histogram bin
        holding a sign change the contribution is bracketed between
        ``|Σ f|`` and ``count · max |f|`` over the bin.
        """
        c = np.asarray(c, dtype=float)
        nb = self.bin_count.shape[1]
        lo_total, hi_total = [], []
        for l in range(self.n_cells):
            u, v = c[l], c[l + 1]
            n, s = self.count[l], self.s1[l]
            slope = v - u
            if u * v >= 0:
                val = abs(n * u + slope * s)
                lo_total.append(val)
                hi_total.append(val)
                continue
            t0 = u / (u - v)
            beta = min(int(t0 * nb), nb - 1)
            bc, bs = self.bin_count[l], self.bin_s1[l]
            left_n, left_s = bc[:beta].sum(), bs[:beta].sum()
            right_n, right_s = bc[beta + 1 :].sum(), bs[beta + 1 :].sum()
            exact = abs(left_n * u + slope * left_s) + abs(right_n * u + slope * right_s)
            mid = abs(bc[beta] * u + slope * bs[beta])
            edge = max(abs(u + slope * beta / nb), abs(u + slope * (beta + 1) / nb))
            lo_total.append(exact + mid)
            hi_total.append(exact + bc[beta] * edge)
        return math.fsum(lo_total), math.fsum(hi_total)


def hat_jitter_stats(
    n_cells: int,
    delta: float,
    jitter: float,
    seed: int,
    targets: np.ndarray | None = None,
    n_bins: int = 256,
    safety: float = 0.999,
) -> HatJitterStats:
    """Stream a jittered δ-dense set on ``[0, n_cells]`` through the compiled accumulator.

    The spacing is ``h = n_cells / n`` with ``n`` the smallest count such that
    ``(1 + 2 jitter) h <= safety · 2δ``; then every gap is below ``2δ`` and
    both window ends lie within ``(1/2 + jitter) h < δ`` of a point.
    """
    if not 0 <= jitter < 0.5:
        raise ValueError("jitter must lie in [0, 1/2)")
    n = int(math.ceil(n_cells * (1 + 2 * jitter) / (safety * 2 * delta)))
    h = n_cells / n
    if targets is None:
        targets = np.zeros((0, n_cells + 1))
    rng = np.random.default_rng(seed)
    st = _hatstream.stream_hat_jitter(rng, n, n_cells, h, jitter, delta, n_bins, np.atleast_2d(targets))
    stats = HatJitterStats(
        n_cells, n, h, delta, jitter, st.count, st.s1, st.s2, st.tmin, st.tmax, st.bin_count, st.bin_s1,
        st.T, st.vt, float(st.scalars[3]), float(st.scalars[4]), float(st.scalars[5]),
    )
    stats.check_density()
    return stats
