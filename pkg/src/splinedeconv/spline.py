"""Principal spline-type spaces generated by integer translates of one function.

Generators are centered B-splines, two-sided exponentials, or user-supplied
piecewise-linear samples.  Each generator knows its breakpoint lattice so
inner products of translates can be integrated cell by cell with
Gauss-Legendre rules; for B-splines the rules are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize
from scipy.interpolate import BSpline as _ScipyBSpline

from .bounds import DecayCertificate, constant_K
from .errors import HypothesisFailed, NotRieszBasis, QuadratureError
from .sequences import WeightedSequence
from .symbol import build_symbol, certify_range, deconvolve_auto

__all__ = [
    "Generator",
    "BSplineGenerator",
    "ExponentialGenerator",
    "SampledGenerator",
    "bspline",
    "two_sided_exponential",
    "sampled_generator",
    "generator_from_spec",
    "SplineFunction",
    "SampledFunction",
    "SplineModel",
    "autocorrelation",
    "gramian_check",
    "build_model",
    "dual_window",
    "amalgam_norm",
    "function_amalgam_norm",
    "lp_norm",
    "piecewise_linear_lp",
    "abs_linear_integral",
    "synthesize",
    "analyze",
    "riesz_ratio_empirical",
    "integrate_cells",
]

# --- quadrature ---------------------------------------------------------------------


def _gl(order: int):
    return np.polynomial.legendre.leggauss(order)


def integrate_cells(func, edges, order: int = 8, exact: bool = False, tol: float = 1e-11, max_level: int = 14):
    """Integrate ``func`` over each interval ``[edges[i], edges[i+1]]``.

    With ``exact`` a single Gauss-Legendre rule per cell is used (the caller
    guarantees a polynomial integrand of degree < 2*order).  Otherwise each
    cell is bisected until two successive composite values differ by less
    than ``tol``.  Returns the per-cell integrals.
    """
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    xg, wg = _gl(order)

    def composite(a, b, level):
        m = 1 << level
        step = (b - a) / m
        starts = a[:, None] + step[:, None] * np.arange(m)[None, :]
        nodes = starts[:, :, None] + 0.5 * step[:, None, None] * (xg + 1.0)
        vals = func(nodes.ravel()).reshape(nodes.shape)
        return (vals * wg).sum(axis=(1, 2)) * 0.5 * step

    prev = composite(lo, hi, 0)
    if exact:
        return prev
    out = prev.copy()
    todo = np.arange(len(lo))
    for level in range(1, max_level + 1):
        cur = composite(lo[todo], hi[todo], level)
        done = np.abs(cur - prev[todo]) < tol
        out[todo] = cur
        prev = prev.copy()
        prev[todo] = cur
        todo = todo[~done]
        if todo.size == 0:
            return out
    raise QuadratureError(f"quadrature did not converge on {todo.size} cells")


def _lattice_edges(lo: float, hi: float, phase: float, spacing: float, step: float | None = None) -> np.ndarray:
    """Breakpoints ``phase + spacing·Z`` inside [lo, hi], plus the ends, optionally refined."""
    first = math.ceil((lo - phase) / spacing - 1e-12)
    last = math.floor((hi - phase) / spacing + 1e-12)
    inner = phase + spacing * np.arange(first, last + 1)
    inner = inner[(inner > lo + 1e-12) & (inner < hi - 1e-12)]
    edges = np.concatenate([[lo], inner, [hi]])
    if step is not None and step < spacing:
        sub = int(math.ceil(spacing / step))
        fine = [np.linspace(a, b, sub + 1)[:-1] for a, b in zip(edges[:-1], edges[1:])]
        edges = np.concatenate([*fine, [hi]])
    return edges


# --- generators --------------------------------------------------------------------------


class Generator:
    """A window φ with a decay certificate and its breakpoint lattice.

    Subclasses provide ``__call__``, ``derivative``, ``fourier`` and set
    ``support`` (effective support interval), ``phase``/``spacing`` of the
    breakpoint lattice and ``degree`` (polynomial degree per piece, or
    ``None`` when the pieces are not polynomials).
    """

    kind = "generic"
    compact = True
    degree: int | None = None
    phase = 0.0
    spacing = 1.0
    deriv_available = True
    support: tuple[float, float]
    cert: DecayCertificate

    def __call__(self, x):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError

    def fourier(self, w):
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    @property
    def is_real_even(self) -> bool:
        return False

    def _verify_cert(self):
        lo, hi = self.support
        x = np.linspace(lo, hi, 200001)
        env = self.cert.C * (1 + np.abs(x)) ** (-self.cert.alpha)
        if np.any(np.abs(self(x)) > env * (1 + 1e-9)):
            raise HypothesisFailed(f"decay certificate {self.cert} violated by {self.kind} generator")

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


def _fit_constant(func, pieces, alpha: float) -> float:
    """max |φ(x)| (1+|x|)^alpha over the given polynomial pieces."""
    best = 0.0
    for a, b in pieces:
        x = np.linspace(a, b, 4097)
        g = np.abs(func(x)) * (1 + np.abs(x)) ** alpha
        i = int(np.argmax(g))
        best = max(best, float(g[i]))
        lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
        if hi > lo:
            res = optimize.minimize_scalar(
                lambda t: -abs(complex(func(np.array([t]))[0])) * (1 + abs(t)) ** alpha,
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-13},
            )
            best = max(best, -float(res.fun))
    return best * (1 + 1e-12)


class BSplineGenerator(Generator):
    """Centered B-spline of order m (degree m-1) supported on [-m/2, m/2]."""

    kind = "bspline"

    def __init__(self, order: int, alpha: float = 2.0):
        if order < 1:
            raise ValueError("B-spline order must be >= 1")
        self.order = int(order)
        self.degree = self.order - 1
        half = self.order / 2
        self.support = (-half, half)
        self.phase = half % 1.0
        knots = np.arange(self.order + 1) - half
        self._spl = _ScipyBSpline.basis_element(knots, extrapolate=False)
        self._dspl = self._spl.derivative() if self.order >= 2 else None
        self.deriv_available = self.order >= 2
        pieces = list(zip(knots[:-1], knots[1:]))
        self.cert = DecayCertificate(_fit_constant(self, pieces, alpha), alpha)
        self._verify_cert()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        if self.order == 1:
            return ((x >= lo) & (x < hi)).astype(float)
        return np.nan_to_num(self._spl(x), nan=0.0)

    def derivative(self, x):
        if self._dspl is None:
            raise HypothesisFailed("the order-1 B-spline has no weak derivative in L^q")
        return np.nan_to_num(self._dspl(np.asarray(x, dtype=float)), nan=0.0)

    def fourier(self, w):
        return np.sinc(np.asarray(w, dtype=float)) ** self.order

    @property
    def is_real_even(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "bspline", "order": self.order, "alpha": self.cert.alpha}


class ExponentialGenerator(Generator):
    """φ(x) = exp(-rate·|x|)."""

    kind = "exp"
    compact = False

    def __init__(self, rate: float = 1.0, alpha: float = 2.0):
        if not rate > 0:
            raise ValueError("rate must be positive")
        self.rate = float(rate)
        radius = 42.0 / self.rate  # exp(-42) < 1e-18
        self.support = (-radius, radius)
        # sup of exp(-λx)(1+x)^α sits at x = α/λ - 1 when positive
        x_star = max(alpha / self.rate - 1.0, 0.0)
        C = math.exp(-self.rate * x_star) * (1 + x_star) ** alpha
        self.cert = DecayCertificate(C * (1 + 1e-12), alpha)
        self._verify_cert()

    def __call__(self, x):
        return np.exp(-self.rate * np.abs(np.asarray(x, dtype=float)))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -self.rate * np.sign(x) * np.exp(-self.rate * np.abs(x))

    def fourier(self, w):
        w = np.asarray(w, dtype=float)
        return 2 * self.rate / (self.rate**2 + (2 * np.pi * w) ** 2)

    def autocorrelation_decay(self, k):
        """Closed form of ⟨φ, φ(·+k)⟩, used to size the autocorrelation."""
        k = np.abs(k)
        return np.exp(-self.rate * k) * (k + 1.0 / self.rate)

    @property
    def is_real_even(self) -> bool:
        return True

    def to_dict(self) -> dict:
        return {"kind": "exp", "rate": self.rate, "alpha": self.cert.alpha}


class SampledGenerator(Generator):
    """Piecewise-linear generator through samples on a uniform grid.

    The grid spacing must divide 1 and the nodes must lie on multiples of
    the spacing, so integer translates share the same breakpoint lattice.
    Outside the sampled range the generator is zero.
    """

    kind = "sampled"
    degree = 1

    def __init__(self, x0: float, h: float, values, alpha: float = 2.0):
        per = round(1.0 / h)
        if abs(per * h - 1.0) > 1e-12 or abs(x0 / h - round(x0 / h)) > 1e-9:
            raise ValueError("sampled generator grid must have spacing 1/n and nodes on multiples of it")
        self.h = 1.0 / per
        self.x0 = round(x0 / h) * self.h
        self.values = np.asarray(values, dtype=complex)
        if self.values.ndim != 1 or len(self.values) < 2:
            raise ValueError("need at least two samples")
        self.nodes = self.x0 + self.h * np.arange(len(self.values))
        self.support = (float(self.nodes[0]), float(self.nodes[-1]))
        self.spacing = self.h
        self.phase = 0.0
        pieces = [(self.support[0], self.support[1])]
        self.cert = DecayCertificate(_fit_constant(self, pieces, alpha) + 1e-15, alpha)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        re = np.interp(x, self.nodes, self.values.real, left=0.0, right=0.0)
        im = np.interp(x, self.nodes, self.values.imag, left=0.0, right=0.0)
        return re + 1j * im if np.any(self.values.imag) else re

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        slopes = np.diff(self.values) / self.h
        idx = np.clip(np.floor((x - self.x0) / self.h).astype(int), 0, len(slopes) - 1)
        inside = (x >= self.support[0]) & (x < self.support[1])
        out = np.where(inside, slopes[idx], 0.0)
        return out if np.any(self.values.imag) else out.real

    def fourier(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        edges = self.nodes
        out = []
        for wi in w:
            vals = integrate_cells(lambda x: self(x) * np.exp(-2j * np.pi * wi * x), edges, order=12, exact=True)
            out.append(vals.sum())
        return np.array(out)

    def to_dict(self) -> dict:
        return {
            "kind": "sampled",
            "x0": self.x0,
            "h": self.h,
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
            "alpha": self.cert.alpha,
        }


def bspline(order: int, alpha: float = 2.0) -> BSplineGenerator:
    return BSplineGenerator(order, alpha)


def two_sided_exponential(rate: float = 1.0, alpha: float = 2.0) -> ExponentialGenerator:
    return ExponentialGenerator(rate, alpha)


def sampled_generator(x0: float, h: float, values, alpha: float = 2.0) -> SampledGenerator:
    return SampledGenerator(x0, h, values, alpha)


def generator_from_spec(spec: dict) -> Generator:
    """Build a generator from its JSON description."""
    kind = spec.get("kind")
    alpha = float(spec.get("alpha", 2.0))
    if kind == "bspline":
        return bspline(int(spec["order"]), alpha)
    if kind == "exp":
        return two_sided_exponential(float(spec.get("rate", 1.0)), alpha)
    if kind == "sampled":
        re = np.asarray(spec["re"], dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
        return sampled_generator(float(spec["x0"]), float(spec["h"]), re + 1j * im, alpha)
    raise ValueError(f"unknown generator kind {kind!r}")


# --- functions in the spline space ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SplineFunction:
    """f(x) = Σ_k c_k φ(x - k), evaluated exactly."""

    gen: Generator
    coeffs: WeightedSequence

    def __post_init__(self):
        if self.coeffs.dim != 1:
            raise ValueError("spline-type spaces here are one-dimensional")

    @property
    def support(self) -> tuple[float, float]:
        lo, hi = self.gen.support
        return self.coeffs.offset[0] + lo, self.coeffs.upper[0] + hi

    @property
    def phase(self):
        return self.gen.phase

    @property
    def spacing(self):
        return self.gen.spacing

    @property
    def degree(self):
        return self.gen.degree

    def _sum(self, x, kernel):
        x = np.asarray(x, dtype=float)
        lo, hi = self.gen.support
        c = self.coeffs.values
        k0 = self.coeffs.offset[0]
        out = np.zeros(x.shape, dtype=complex)
        # translates φ(x - k) that can be nonzero at x: x - hi <= k <= x - lo
        first = np.ceil(x - hi - 1e-12).astype(np.int64)
        for j in range(int(math.ceil(hi - lo)) + 2):
            k = first + j
            pos = k - k0
            ok = (pos >= 0) & (pos < len(c))
            if not ok.any():
                continue
            out[ok] += c[pos[ok]] * kernel(x[ok] - k[ok])
        return out

    def __call__(self, x):
        return self._sum(x, self.gen)

    def derivative(self, x):
        return self._sum(x, self.gen.derivative)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples ``values[i] = f(x0 + i·h)`` on a uniform grid."""

    x0: float
    h: float
    values: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(len(self.values))

    def write_csv(self, path) -> None:
        v = np.asarray(self.values, dtype=complex)
        with open(path, "w") as fh:
            fh.write("x,re,im\n")
            for xi, z in zip(self.x.tolist(), v.tolist()):
                fh.write(f"{xi!r},{z.real!r},{z.imag!r}\n")


def _split_at_sign_changes(fn, edges: np.ndarray, probes: int = 17) -> np.ndarray:
    """Add the zeros of a real function between probe points to the cell edges."""
    extra = []
    for a, b in zip(edges[:-1], edges[1:]):
        x = np.linspace(a, b, probes)
        v = np.real(fn(x))
        for k in np.flatnonzero(v[:-1] * v[1:] < 0):
            extra.append(optimize.brentq(lambda t: float(np.real(fn(np.array([t])))[0]), x[k], x[k + 1], xtol=1e-15))
    return np.unique(np.concatenate([edges, extra])) if extra else edges


def lp_norm(fn, p: float, tol: float = 1e-12) -> float:
    """L^p norm of a generator or spline function over its effective support.

    For piecewise-polynomial functions the result is exact up to rounding
    when p = 2, when p = 1 and the function is real (cells are split at its
    zeros), and when p = ∞ for piecewise-linear functions.  Otherwise cells
    are refined adaptively until the per-cell change is below ``tol`` times
    a scale estimate.
    """
    lo, hi = fn.support
    edges = _lattice_edges(lo, hi, fn.phase, fn.spacing)
    if math.isinf(p):
        xs = np.concatenate([np.linspace(a, b, 65) for a, b in zip(edges[:-1], edges[1:])])
        return float(np.abs(fn(xs)).max())
    deg = fn.degree
    probe = fn(np.linspace(lo, hi, 257))
    real = not (np.iscomplexobj(probe) and np.any(np.imag(probe)))
    if deg is not None and p == 2:
        vals = integrate_cells(lambda x: np.abs(fn(x)) ** 2, edges, order=deg + 1, exact=True)
    elif deg == 1 and p == 1:
        vals = [abs_linear_integral(fn(edges[:-1] + 0.0), fn(np.nextafter(edges[1:], -np.inf))) * np.diff(edges)]
        vals = vals[0]
    elif deg is not None and p == 1 and real:
        edges = _split_at_sign_changes(fn, edges)
        vals = integrate_cells(lambda x: np.abs(fn(x)), edges, order=deg // 2 + 1, exact=True)
    else:
        scale = float(np.abs(probe).max()) ** p * (hi - lo) / len(edges)
        vals = integrate_cells(lambda x: np.abs(fn(x)) ** p, edges, order=10, tol=tol * max(scale, 1e-300))
    return math.fsum(vals) ** (1.0 / p)


def abs_linear_integral(u, v) -> np.ndarray:
    """``∫_0^1 |u + (v - u) t| dt`` for complex u, v (elementwise), in closed form.

    With ``d = v - u`` and ``s = t + Re(conj(u) d)/|d|²`` the integrand is
    ``|d| sqrt(s² + k²)``; the antiderivative is evaluated in a form free of
    cancellation when ``|d|`` is small compared to ``|u|``.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d = v - u
    ad = np.abs(d)
    flat = ad <= 1e-300
    ad_safe = np.where(flat, 1.0, ad)
    cross = np.conj(u) * d
    s0 = cross.real / ad_safe**2
    k = np.abs(cross.imag) / ad_safe**2
    s1 = s0 + 1.0
    # reflect so that the interval never lies on the negative side
    neg = s1 <= 0
    s0, s1 = np.where(neg, -s1, s0), np.where(neg, -s0, s1)
    r0 = np.hypot(s0, k)
    r1 = np.hypot(s1, k)
    mixed = s0 < 0
    # s1 r1 - s0 r0 and asinh(s1/k) - asinh(s0/k), each without cancellation
    prod_same = (s1 + s0) * (s1**2 + s0**2 + k**2) / (s1 * r1 + np.abs(s0) * r0)
    prod = np.where(mixed, s1 * r1 - s0 * r0, prod_same)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        log_same = np.log1p((1.0 + (s1 + s0) / (r1 + r0)) / (s0 + r0))
        # for mixed signs: asinh(s1/k) + asinh(-s0/k) = log((s1 + r1)(r0 - s0)) - 2 log k
        log_mixed = np.log(s1 + r1) + np.log(r0 - s0) - 2 * np.log(np.where(k > 0, k, 1.0))
    logs = np.where(mixed, log_mixed, log_same)
    # k² log(1/k) -> 0; once k² underflows the log may overflow, so drop the term
    ksq = k**2
    with np.errstate(invalid="ignore"):
        ksq_log = np.where(ksq > 0, ksq * np.where(k > 0, logs, 0.0), 0.0)
    out = 0.5 * ad * (prod + ksq_log)
    return np.where(flat, np.abs(u), out)


def piecewise_linear_lp(values, h: float, p: float) -> float:
    """Exact L^p norm (p in {1, 2, ∞}) of the piecewise-linear interpolant of node values."""
    v = np.asarray(values)
    u, w = v[:-1], v[1:]
    if math.isinf(p):
        return float(np.abs(v).max())
    if p == 2:
        au, aw = np.abs(u), np.abs(w)
        cross = np.real(np.conj(u) * w)
        return math.sqrt(h * math.fsum((au * au + cross + aw * aw) / 3.0))
    if p == 1:
        return h * math.fsum(abs_linear_integral(u, w))
    raise ValueError("exact piecewise-linear norms are available for p in {1, 2, inf}")


def _ell_q(x: np.ndarray, q: float) -> float:
    if math.isinf(q):
        return float(np.max(x)) if len(x) else 0.0
    return math.fsum(x**q) ** (1.0 / q)


def function_amalgam_norm(fn, p: float = math.inf, q: float = 1.0, derivative: bool = False, per_cell: int = 1024) -> float:
    """``‖f‖_{W(L^p, ℓ^q)}`` of a generator or spline function.

    For ``p = ∞`` each unit cell ``[j, j+1]`` is sampled at ``per_cell + 1``
    equispaced points (all breakpoint lattice points with spacing dividing
    ``1/per_cell`` are hit exactly); for finite ``p`` the local norms are
    Gauss-Legendre integrals split at the breakpoints.
    """
    f = fn.derivative if derivative else fn
    lo, hi = fn.support
    j0, j1 = math.floor(lo), math.ceil(hi)
    local = []
    for j in range(j0, j1):
        if math.isinf(p):
            x = j + np.arange(per_cell + 1) / per_cell
            if derivative:
                # one-sided samples avoid ambiguous values at kinks
                eps = 1e-9
                x = np.concatenate([x[:-1] + eps, x[1:] - eps])
            local.append(float(np.abs(f(x)).max()))
        else:
            edges = _lattice_edges(float(j), float(j + 1), fn.phase, fn.spacing)
            deg = fn.degree
            exact = deg is not None and float(p).is_integer() and (p % 2 == 0 or deg == 0)
            vals = integrate_cells(lambda x: np.abs(f(x)) ** p, edges, order=12, exact=exact, tol=1e-13)
            local.append(math.fsum(vals) ** (1.0 / p))
    return _ell_q(np.array(local), q)


def amalgam_norm(f: SampledFunction, p: float, q: float) -> float:
    """``‖f‖_{W(L^p, ℓ^q)}`` of grid samples (f taken as zero outside the samples).

    The grid must put nodes on every integer.  Local ``L^p`` norms use the
    composite trapezoid rule on ``|f|^p``, local ``L^∞`` norms the maximum
    over the closed cell; the resolution is ``f.h``.
    """
    n = round(1.0 / f.h)
    g0 = round(f.x0 / f.h)
    if abs(n * f.h - 1) > 1e-9 or abs(g0 * f.h - f.x0) > 1e-9 * max(1.0, abs(f.x0)):
        raise ValueError("amalgam_norm needs a grid with spacing 1/n and a node on every integer")
    vals = np.abs(np.asarray(f.values))
    j0 = math.floor(g0 / n)
    j1 = math.ceil((g0 + len(vals) - 1) / n)
    full = np.zeros((j1 - j0) * n + 1)
    full[g0 - j0 * n : g0 - j0 * n + len(vals)] = vals
    cells = full[np.arange(j1 - j0)[:, None] * n + np.arange(n + 1)[None, :]]
    if math.isinf(p):
        local = cells.max(axis=1)
    else:
        c = cells**p
        local = ((c[:, 1:-1].sum(axis=1) + 0.5 * (c[:, 0] + c[:, -1])) / n) ** (1.0 / p)
    return _ell_q(local, q)


# --- the model ---------------------------------------------------------------------------------


def _inner_product_translate(gen: Generator, k: int, quad_step: float | None) -> complex:
    """⟨φ, φ(·+k)⟩ = ∫ φ(x) conj(φ(x+k)) dx."""
    lo, hi = gen.support
    a, b = max(lo, lo - k), min(hi, hi - k)
    if b <= a:
        return 0j
    edges = _lattice_edges(a, b, gen.phase, gen.spacing, quad_step)
    exact = gen.degree is not None
    order = gen.degree + 1 if exact else 8
    vals = integrate_cells(lambda x: gen(x) * np.conj(gen(x + k)), edges, order=order, exact=exact)
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


def _autocorrelation_radius(gen: Generator, tol: float) -> int:
    lo, hi = gen.support
    if gen.compact:
        return int(math.ceil(hi - lo))
    if hasattr(gen, "autocorrelation_decay"):
        k = 0
        scale = float(gen.autocorrelation_decay(0))
        while gen.autocorrelation_decay(k) > tol * scale:
            k += 1
        return k
    # |a_k| <= C² K_α (1+|k|)^(-α)
    c = gen.cert
    return int(math.ceil((c.C**2 * constant_K(c.alpha) / tol) ** (1 / c.alpha)))


def autocorrelation(gen: Generator, k_max: int | None = None, quad_step: float | None = None, tol: float = 1e-16) -> WeightedSequence:
    """The sequence ``a_k = ⟨φ, φ(·+k)⟩`` for ``|k| <= k_max``, made exactly Hermitian."""
    if k_max is None:
        k_max = _autocorrelation_radius(gen, tol)
    vals = np.array([_inner_product_translate(gen, k, quad_step) for k in range(-k_max, k_max + 1)])
    vals = 0.5 * (vals + vals[::-1].conj())
    return WeightedSequence((-k_max,), vals).trim() if np.any(vals) else WeightedSequence.delta(1, 0.0)


def gramian_check(a: WeightedSequence, n: int | None = None) -> tuple[float, float]:
    """Certified bounds of the gramian ``â = Σ_k |φ̂(· - k)|²``."""
    s = build_symbol(a, n)
    scale = float(s.abs.max())
    if float(np.abs(s.values.imag).max()) > 1e-10 * max(1.0, scale):
        raise HypothesisFailed("gramian is not real: autocorrelation is not Hermitian")
    A, B = certify_range(s)
    if A <= 0.0 or float(s.values.real.min()) + s.lipschitz_margin <= 0:
        raise NotRieszBasis(f"gramian minimum {s.values.real.min():.3e} not certified positive")
    return A, B


@dataclass(frozen=True, eq=False)
class SplineModel:
    gen: Generator
    a: WeightedSequence
    A_gram: float
    B_gram: float
    grid_size: int
    quad_step: float | None = None
    trunc_tol: float = 1e-13
    b: WeightedSequence | None = None
    biorth_defect: float | None = None

    @property
    def psi(self) -> SplineFunction:
        """Dual window ψ = Σ_k b_k φ(· + k) as a combination of translates φ(· - k)."""
        if self.b is None:
            raise ValueError("dual window not computed; call dual_window(model)")
        return SplineFunction(self.gen, self.b.reflect())

    def function(self, c: WeightedSequence) -> SplineFunction:
        return SplineFunction(self.gen, c)


def build_model(gen: Generator, n: int = 1024, trunc_tol: float = 1e-13, quad_step: float | None = None) -> SplineModel:
    """Autocorrelation, certified gramian bounds and dual window of ``gen``."""
    a = autocorrelation(gen, quad_step=quad_step)
    A, B = gramian_check(a, n)
    return dual_window(SplineModel(gen, a, A, B, n, quad_step, trunc_tol))


def _biorthogonality_defect(model: SplineModel, k_max: int = 20) -> float:
    gen = model.gen
    psi = model.psi
    lo, hi = gen.support
    edges = _lattice_edges(lo, hi, gen.phase, gen.spacing, model.quad_step)
    exact = gen.degree is not None
    order = gen.degree + 1 if exact else 8
    worst = 0.0
    for k in range(-k_max, k_max + 1):
        vals = integrate_cells(lambda x: gen(x) * np.conj(psi(x - k)), edges, order=order, exact=exact)
        ip = complex(math.fsum(vals.real), math.fsum(vals.imag))
        worst = max(worst, abs(ip - (1.0 if k == 0 else 0.0)))
    return worst


def dual_window(model: SplineModel) -> SplineModel:
    """Fill in the inverse autocorrelation ``b`` and the biorthogonality defect."""
    res = deconvolve_auto(model.a, model.grid_size, model.trunc_tol)
    b = res.b
    if model.gen.is_real_even:
        b = WeightedSequence(b.offset, b.values.real)
    out = replace(model, b=b)
    return replace(out, biorth_defect=_biorthogonality_defect(out))


def synthesize(model: SplineModel, c: WeightedSequence, x0: float, h: float, n: int) -> SampledFunction:
    """Samples of ``Σ_k c_k φ(· - k)`` at ``x0 + i·h``, ``i < n``."""
    f = model.function(c)
    x = x0 + h * np.arange(n)
    return SampledFunction(x0, h, f(x))


def _projection_integrals(model: SplineModel, f, i_lo: int, i_hi: int) -> np.ndarray:
    """v_i = ⟨f, φ(· - i)⟩ for i_lo <= i <= i_hi."""
    gen = model.gen
    lo, hi = gen.support
    if isinstance(f, SampledFunction):
        n = round(1.0 / f.h)
        if abs(n * f.h - 1) > 1e-12 or gen.spacing * n % 1 > 1e-9:
            raise ValueError("sampled input needs spacing 1/n compatible with the generator lattice")
        xs, vals = f.x, np.asarray(f.values)

        def fx(x):
            re = np.interp(x, xs, vals.real, left=0.0, right=0.0)
            im = np.interp(x, xs, vals.imag, left=0.0, right=0.0) if np.iscomplexobj(vals) else 0.0
            return re + 1j * im

        step = f.h
        exact = gen.degree is not None
        order = (gen.degree + 3) // 2 + 1 if exact else 8
    else:
        fx, step, exact, order = f, model.quad_step, False, 8
    edges0 = _lattice_edges(lo, hi, gen.phase, gen.spacing, step)
    out = np.zeros(i_hi - i_lo + 1, dtype=complex)
    phi_nodes = None
    xg, wg = _gl(order)
    if exact:
        a, b = edges0[:-1], edges0[1:]
        nodes = (a[:, None] + 0.5 * (b - a)[:, None] * (xg + 1)).ravel()
        weights = (0.5 * (b - a)[:, None] * wg).ravel()
        phi_nodes = np.conj(gen(nodes)) * weights
        shifts = np.arange(i_lo, i_hi + 1)
        samples = fx((nodes[None, :] + shifts[:, None]).ravel()).reshape(len(shifts), -1)
        return samples @ phi_nodes
    for idx, i in enumerate(range(i_lo, i_hi + 1)):
        vals = integrate_cells(lambda x: fx(x + i) * np.conj(gen(x)), edges0, order=order, tol=1e-12)
        out[idx] = complex(math.fsum(vals.real), math.fsum(vals.imag))
    return out


def analyze(model: SplineModel, f, k_range: tuple[int, int]) -> WeightedSequence:
    """Coefficients ``c_k = ⟨f, ψ(· - k)⟩`` for ``k_range[0] <= k <= k_range[1]``.

    ``f`` is either a callable (integrated with adaptive Gauss-Legendre) or
    a :class:`SampledFunction`, read as its piecewise-linear interpolant.
    """
    if model.b is None:
        raise ValueError("dual window not computed")
    b = model.b
    k_lo, k_hi = k_range
    # c_k = Σ_m conj(b_m) v_{k-m}
    i_lo = k_lo - b.upper[0]
    i_hi = k_hi - b.offset[0]
    v = _projection_integrals(model, f, i_lo, i_hi)
    full = np.convolve(v, b.values.conj())
    start = (k_lo) - (i_lo + b.offset[0])
    return WeightedSequence((k_lo,), full[start : start + k_hi - k_lo + 1])


def riesz_ratio_empirical(
    model: SplineModel, p: float, trials: int = 200, rng: np.random.Generator | None = None, width: int = 64
) -> tuple[float, float]:
    """Extreme ratios ``‖Σ c_k φ(· - k)‖_p / ‖c‖_p`` over random coefficients.

    Coefficients are i.i.d. standard complex Gaussian on ``width`` consecutive
    indices.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    ratios = []
    for _ in range(trials):
        c = WeightedSequence((0,), rng.standard_normal(width) + 1j * rng.standard_normal(width))
        ratios.append(lp_norm(model.function(c), p) / c.norm(p))
    return min(ratios), max(ratios)
