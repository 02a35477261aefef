"""Fourier symbols of finitely supported sequences and convolutive inversion.

The symbol of ``a`` is the trigonometric polynomial
``â(w) = sum_k a_k exp(2πi k·w)`` on the torus ``[0, 1)^d``.  It is sampled
on an ``N^d`` grid with the FFT, and the grid extrema are turned into bounds
valid for the continuous symbol through the Lipschitz estimate
``|∂_j â| <= 2π M^{e_j}_1(a)``.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import AliasingError, GridTooSmall, NotInvertible
from .sequences import Momentum, MultiIndex, WeightedSequence, apply_weight, convolve, momentum

__all__ = [
    "SymbolGrid",
    "DeconvResult",
    "default_grid_size",
    "build_symbol",
    "certify_range",
    "deconvolve",
    "momentum_op",
    "check_derivative_identity",
]

GRID_ENV = "SPLINEDECONV_GRID"


def default_grid_size(dim: int) -> int:
    env = os.environ.get(GRID_ENV)
    if env:
        return int(env)
    return 1024 if dim == 1 else 256


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


@dataclass(frozen=True, eq=False)
class SymbolGrid:
    dim: int
    grid_size: int
    values: np.ndarray
    lipschitz_margin: float

    @property
    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def nodes(self) -> list[np.ndarray]:
        return [np.arange(self.grid_size) / self.grid_size] * self.dim

    def to_rows(self) -> list[tuple]:
        ws = np.stack(np.meshgrid(*self.nodes(), indexing="ij"), axis=-1).reshape(-1, self.dim)
        v = self.values.ravel()
        return [(*w, z.real, z.imag, abs(z)) for w, z in zip(ws.tolist(), v.tolist())]

    def write_csv(self, path) -> None:
        cols = ["w"] if self.dim == 1 else [f"w{j + 1}" for j in range(self.dim)]
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow([*cols, "re", "im", "abs"])
            for row in self.to_rows():
                wr.writerow([repr(float(x)) for x in row])

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "grid_size": self.grid_size,
            "lipschitz_margin": self.lipschitz_margin,
            "re": self.values.real.ravel().tolist(),
            "im": self.values.imag.ravel().tolist(),
        }


def _lipschitz_margin(a: WeightedSequence, n: int) -> float:
    d = a.dim
    total = sum(momentum(a, MultiIndex.unit(d, j), "L1").value for j in range(d))
    return math.pi * math.sqrt(d) / n * total


def _embed(a: WeightedSequence, n: int) -> np.ndarray:
    """Periodic embedding: a_k lands at array position k mod n."""
    arr = np.zeros((n,) * a.dim, dtype=complex)
    arr[tuple(slice(0, s) for s in a.shape)] = a.values
    return np.roll(arr, a.offset, axis=tuple(range(a.dim)))


def build_symbol(a: WeightedSequence, n: int | None = None) -> SymbolGrid:
    """Sample ``â`` at the nodes ``j/n``, ``j in {0..n-1}^d``."""
    if n is None:
        n = default_grid_size(a.dim)
    if not _is_pow2(n) or n < 64:
        raise ValueError(f"grid size must be a power of two >= 64, got {n}")
    width = max(a.shape)
    if n < 2 * width:
        need = max(64, _next_pow2(2 * width))
        raise AliasingError(f"grid size {n} too small for support width {width}; need N >= {need}", need)
    vals = np.fft.ifftn(_embed(a, n), norm="forward")
    return SymbolGrid(a.dim, n, vals, _lipschitz_margin(a, n))


def certify_range(s: SymbolGrid) -> tuple[float, float]:
    """Lower and upper bounds of ``|â|`` on the whole torus (lower floored at 0)."""
    mod = s.abs
    lo = max(float(mod.min()) - s.lipschitz_margin, 0.0)
    hi = float(mod.max()) + s.lipschitz_margin
    return lo, hi


@dataclass(frozen=True, eq=False)
class DeconvResult:
    b: WeightedSequence
    A_certified: float
    B_certified: float
    residual_l2: float
    truncation_radius: tuple[int, ...]
    grid_size: int
    trunc_tol: float


def _periodic_window(arr: np.ndarray, lo: tuple[int, ...]) -> np.ndarray:
    """Reorder a periodic array so position p holds the entry of index lo + p."""
    return np.roll(arr, [-l for l in lo], axis=tuple(range(arr.ndim)))


def _inverse_on_grid(s: SymbolGrid, center: tuple[int, ...]) -> WeightedSequence:
    n = s.grid_size
    b = np.fft.fftn(1.0 / s.values, norm="forward")
    lo = tuple(c - n // 2 for c in center)
    return WeightedSequence(lo, _periodic_window(b, lo))


def _truncate(b: WeightedSequence, center: tuple[int, ...], tol: float) -> tuple[WeightedSequence, tuple[int, ...]]:
    """Smallest box centered at ``center`` whose complement carries at most ``tol·‖b‖₂`` of ℓ² mass."""
    mass = np.abs(b.values) ** 2
    total = mass.sum()
    budget = tol**2 * total / b.dim
    radii = []
    for axis in range(b.dim):
        marg = mass.sum(axis=tuple(j for j in range(b.dim) if j != axis))
        dist = np.abs(b.axis_indices(axis) - center[axis])
        # mass outside radius r, for r = 0 .. max(dist)
        per_r = np.bincount(dist, weights=marg)
        outside = np.append(np.cumsum(per_r[::-1])[::-1][1:], 0.0)
        r = int(np.argmax(outside <= budget))
        radii.append(r)
    lo = [c - r for c, r in zip(center, radii)]
    hi = [c + r for c, r in zip(center, radii)]
    return b.restrict(lo, hi), tuple(radii)


def _residual(a: WeightedSequence, b: WeightedSequence) -> float:
    ab = convolve(a, b)
    dlt = WeightedSequence.delta(a.dim)
    return (ab - dlt).norm(2)


def deconvolve(a: WeightedSequence, n: int | None = None, trunc_tol: float = 1e-12) -> DeconvResult:
    """Convolutive inverse of ``a`` obtained by inverting the sampled symbol.

    Raises
    ------
    NotInvertible
        if the certified lower bound of ``|â|`` is zero.
    GridTooSmall
        if doubling the grid changes ``‖b‖₂`` (or any entry) by more than
        ``trunc_tol`` relative to ``‖b‖₂``.
    """
    if n is None:
        n = max(default_grid_size(a.dim), _next_pow2(2 * max(a.shape)))
    if trunc_tol <= 0:
        raise ValueError("trunc_tol must be positive")
    s = build_symbol(a, n)
    A, B = certify_range(s)
    if A <= 0.0:
        raise NotInvertible(f"symbol may vanish: min |â| on grid {s.abs.min():.3e} <= margin {s.lipschitz_margin:.3e}")
    # b concentrates around minus the center of a
    center = tuple(-int(round(o + (w - 1) / 2)) for o, w in zip(a.offset, a.shape))
    b_n = _inverse_on_grid(s, center)
    b_2n = _inverse_on_grid(build_symbol(a, 2 * n), center)
    norm_n = b_n.norm(2)
    lo = b_n.offset
    hi = b_n.upper
    entry_change = np.abs(b_2n.restrict(lo, hi).values - b_n.values).max()
    norm_change = abs(b_2n.norm(2) - norm_n)
    if max(entry_change, norm_change) > trunc_tol * norm_n:
        raise GridTooSmall(
            f"inverse not resolved on a {n}-point grid (change {max(entry_change, norm_change) / norm_n:.2e} "
            f"relative under doubling); use N >= {2 * n}",
            2 * n,
        )
    b, radii = _truncate(b_n, center, trunc_tol)
    return DeconvResult(b, A, B, _residual(a, b), radii, n, trunc_tol)


def deconvolve_auto(a: WeightedSequence, n: int | None = None, trunc_tol: float = 1e-12, n_max: int = 1 << 16):
    """:func:`deconvolve`, doubling the grid while it reports :class:`GridTooSmall`."""
    if n is None:
        n = max(default_grid_size(a.dim), _next_pow2(2 * max(a.shape)))
    while True:
        try:
            return deconvolve(a, n, trunc_tol)
        except GridTooSmall as exc:
            if exc.required > n_max or a.dim * math.log2(exc.required) > 26:
                raise
            n = exc.required


def momentum_op(a: WeightedSequence, alpha, n: int | None = None) -> Momentum:
    """Two-sided estimate of ``‖F(X^alpha a)‖_∞``.

    ``value`` is the grid maximum plus the Lipschitz margin (an upper bound),
    ``lower`` the plain grid maximum.
    """
    alpha = alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(np.atleast_1d(alpha)))
    x = apply_weight(a, alpha)
    if n is None:
        n = max(default_grid_size(a.dim), _next_pow2(2 * max(a.shape)))
    s = build_symbol(x, n)
    lower = float(s.abs.max())
    return Momentum(alpha, "OP", lower + s.lipschitz_margin, lower)


def check_derivative_identity(s: SymbolGrid) -> float:
    """Grid defect of ``(1/f)' = -f'/f²`` measured with central differences."""
    A, _ = certify_range(s)
    if A <= 0.0:
        raise NotInvertible("derivative identity needs a symbol bounded away from zero")
    f = s.values
    g = 1.0 / f
    h = 1.0 / s.grid_size
    worst = 0.0
    for axis in range(s.dim):
        fd_g = (np.roll(g, -1, axis) - np.roll(g, 1, axis)) / (2 * h)
        fd_f = (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2 * h)
        worst = max(worst, float(np.abs(fd_g + fd_f / f**2).max()))
    return worst
