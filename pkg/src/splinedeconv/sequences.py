"""Multi-indices and finitely supported sequences on Z^d.

A :class:`WeightedSequence` stores a dense complex array over its bounding
box together with the lattice index of the first entry, so the entry at
array position ``p`` is the value at ``k = offset + p``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import signal

__all__ = [
    "MultiIndex",
    "WeightedSequence",
    "Momentum",
    "apply_weight",
    "momentum",
    "convolve",
    "load_sequence",
    "save_sequence",
]


@dataclass(frozen=True)
class MultiIndex:
    """Exponent vector in N_0^d."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"multi-index entries must be >= 0, got {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def zero(cls, dim: int) -> MultiIndex:
        return cls((0,) * dim)

    @classmethod
    def unit(cls, dim: int, axis: int) -> MultiIndex:
        e = [0] * dim
        e[axis] = 1
        return cls(tuple(e))

    @property
    def dim(self) -> int:
        return len(self.exponents)

    @property
    def size(self) -> int:
        return sum(self.exponents)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __getitem__(self, j):
        return self.exponents[j]

    def _check(self, other):
        if not isinstance(other, MultiIndex):
            return NotImplemented
        if other.dim != self.dim:
            raise ValueError("multi-indices of different dimension")
        return None

    # Product order; __lt__ is the strict version (β ≤ α and β ≠ α).
    def __le__(self, other):
        if (r := self._check(other)) is not None:
            return r
        return all(b <= a for b, a in zip(self.exponents, other.exponents))

    def __lt__(self, other):
        return self <= other and self != other

    def __ge__(self, other):
        return other <= self

    def __gt__(self, other):
        return other < self

    def __add__(self, other):
        self._check(other)
        return MultiIndex(tuple(a + b for a, b in zip(self, other)))

    def __sub__(self, other):
        self._check(other)
        return MultiIndex(tuple(a - b for a, b in zip(self, other)))

    def binom(self, beta: MultiIndex) -> int:
        """Product of the coordinate binomial coefficients."""
        self._check(beta)
        return math.prod(math.comb(a, b) for a, b in zip(self, beta))

    def below(self) -> list[MultiIndex]:
        """All β ≤ self, ordered by size and then lexicographically."""
        out = [MultiIndex(e) for e in itertools.product(*(range(a + 1) for a in self))]
        return sorted(out, key=lambda m: (m.size, m.exponents))

    def __str__(self):
        return "(" + ",".join(map(str, self.exponents)) + ")"


def _as_multi_index(alpha) -> MultiIndex:
    return alpha if isinstance(alpha, MultiIndex) else MultiIndex(tuple(np.atleast_1d(alpha)))


@dataclass(frozen=True, eq=False)
class WeightedSequence:
    """Finitely supported complex sequence on Z^d stored over a bounding box."""

    offset: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        offset = tuple(int(o) for o in np.atleast_1d(self.offset))
        if vals.ndim != len(offset):
            raise ValueError(f"offset has {len(offset)} entries but values are {vals.ndim}-dimensional")
        if vals.size == 0:
            raise ValueError("empty sequence")
        if not np.all(np.isfinite(vals)):
            raise ValueError("sequence values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def delta(cls, dim: int = 1, scale: complex = 1.0) -> WeightedSequence:
        return cls((0,) * dim, np.full((1,) * dim, scale, dtype=complex))

    @classmethod
    def from_1d(cls, values, offset: int = 0) -> WeightedSequence:
        return cls((offset,), np.asarray(values))

    @classmethod
    def centered(cls, values) -> WeightedSequence:
        """Place an array so that its middle entry sits at the origin (odd lengths)."""
        v = np.asarray(values)
        return cls(tuple(-(n // 2) for n in v.shape), v)

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def axis_indices(self, axis: int) -> np.ndarray:
        return self.offset[axis] + np.arange(self.shape[axis])

    @property
    def upper(self) -> tuple[int, ...]:
        """Largest lattice index of the box, per axis."""
        return tuple(o + n - 1 for o, n in zip(self.offset, self.shape))

    def __getitem__(self, k) -> complex:
        k = tuple(np.atleast_1d(k))
        p = tuple(ki - oi for ki, oi in zip(k, self.offset))
        if any(pi < 0 or pi >= n for pi, n in zip(p, self.shape)):
            return 0j
        return complex(self.values[p])

    def trim(self) -> WeightedSequence:
        """Drop leading and trailing all-zero hyperplanes along every axis."""
        nz = np.nonzero(self.values)
        if len(nz[0]) == 0:
            return WeightedSequence.delta(self.dim, 0.0)
        lo = [int(ix.min()) for ix in nz]
        hi = [int(ix.max()) for ix in nz]
        sl = tuple(slice(a, b + 1) for a, b in zip(lo, hi))
        return WeightedSequence(tuple(o + a for o, a in zip(self.offset, lo)), self.values[sl])

    def restrict(self, lo: Sequence[int], hi: Sequence[int]) -> WeightedSequence:
        """Entries on the box ``lo <= k <= hi`` (zero-filled where outside the support)."""
        shape = tuple(h - l + 1 for l, h in zip(lo, hi))
        out = np.zeros(shape, dtype=complex)
        src, dst = [], []
        for o, n, l, h in zip(self.offset, self.shape, lo, hi):
            a, b = max(o, l), min(o + n - 1, h)
            if a > b:
                return WeightedSequence(tuple(lo), out)
            src.append(slice(a - o, b - o + 1))
            dst.append(slice(a - l, b - l + 1))
        out[tuple(dst)] = self.values[tuple(src)]
        return WeightedSequence(tuple(lo), out)

    def reflect(self) -> WeightedSequence:
        """The sequence k -> x_{-k}."""
        return WeightedSequence(tuple(-u for u in self.upper), self.values[(slice(None, None, -1),) * self.dim])

    def conj(self) -> WeightedSequence:
        return WeightedSequence(self.offset, self.values.conj())

    def __add__(self, other: WeightedSequence) -> WeightedSequence:
        lo = [min(a, b) for a, b in zip(self.offset, other.offset)]
        hi = [max(a, b) for a, b in zip(self.upper, other.upper)]
        return WeightedSequence(tuple(lo), self.restrict(lo, hi).values + other.restrict(lo, hi).values)

    def __sub__(self, other: WeightedSequence) -> WeightedSequence:
        return self + other.scale(-1.0)

    def scale(self, s: complex) -> WeightedSequence:
        return WeightedSequence(self.offset, s * self.values)

    def norm(self, p: float = 2.0) -> float:
        v = np.abs(self.values).ravel()
        if p == np.inf:
            return float(v.max())
        if p == 1:
            return math.fsum(v)
        m = float(v.max()) if v.size else 0.0
        if m == 0.0 or not math.isfinite(m):
            return m
        # scale by the max so tiny or huge entries neither underflow nor overflow
        return m * math.fsum((v / m) ** p) ** (1.0 / p)

    def allclose(self, other: WeightedSequence, rtol=1e-12, atol=0.0) -> bool:
        lo = [min(a, b) for a, b in zip(self.offset, other.offset)]
        hi = [max(a, b) for a, b in zip(self.upper, other.upper)]
        return np.allclose(self.restrict(lo, hi).values, other.restrict(lo, hi).values, rtol=rtol, atol=atol)

    def is_hermitian(self, tol: float = 0.0) -> bool:
        """Whether x_{-k} = conj(x_k)."""
        return self.allclose(self.reflect().conj(), rtol=0.0, atol=tol)

    # --- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        flat = self.values.ravel(order="C")
        return {
            "dim": self.dim,
            "offset": list(self.offset),
            "shape": list(self.shape),
            "re": flat.real.tolist(),
            "im": flat.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> WeightedSequence:
        shape = tuple(int(n) for n in d["shape"])
        if int(d["dim"]) != len(shape) or len(d["offset"]) != len(shape):
            raise ValueError("sequence JSON: dim, offset and shape disagree")
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
        if re.size != math.prod(shape) or im.size != re.size:
            raise ValueError("sequence JSON: number of values does not match shape")
        return cls(tuple(d["offset"]), (re + 1j * im).reshape(shape, order="C"))

    def __repr__(self):
        return f"WeightedSequence(offset={self.offset}, shape={self.shape})"


def load_sequence(path) -> WeightedSequence:
    with open(path) as fh:
        return WeightedSequence.from_dict(json.load(fh))


def save_sequence(seq: WeightedSequence, path) -> None:
    with open(path, "w") as fh:
        json.dump(seq.to_dict(), fh, indent=1)


@dataclass(frozen=True)
class Momentum:
    """Value of a momentum; ``lower`` is only set for grid-based OP estimates."""

    index: MultiIndex
    norm_tag: str
    value: float
    lower: float | None = None


def _weights(seq: WeightedSequence, alpha: MultiIndex) -> np.ndarray:
    w = np.ones(seq.shape)
    for axis, e in enumerate(alpha):
        if e == 0:
            continue  # 0^0 = 1
        k = seq.axis_indices(axis).astype(float) ** e
        shape = [1] * seq.dim
        shape[axis] = -1
        w = w * k.reshape(shape)
    return w


def apply_weight(a: WeightedSequence, alpha) -> WeightedSequence:
    """The weighted sequence ``k -> k^alpha a_k`` on the same box."""
    alpha = _as_multi_index(alpha)
    if alpha.dim != a.dim:
        raise ValueError(f"multi-index of length {alpha.dim} for a {a.dim}-dimensional sequence")
    return WeightedSequence(a.offset, _weights(a, alpha) * a.values)


def momentum(a: WeightedSequence, alpha, norm_tag: str = "L2") -> Momentum:
    """ℓ¹ or ℓ² norm of the weighted sequence ``X^alpha(a)``."""
    alpha = _as_multi_index(alpha)
    x = apply_weight(a, alpha)
    tag = norm_tag.upper()
    if tag == "L1":
        val = x.norm(1)
    elif tag == "L2":
        val = x.norm(2)
    else:
        raise ValueError(f"norm tag must be L1 or L2, got {norm_tag!r} (use momentum_op for OP)")
    return Momentum(alpha, tag, float(val))


def convolve(a: WeightedSequence, b: WeightedSequence) -> WeightedSequence:
    """Exact direct convolution; the output box is the Minkowski sum of the inputs."""
    if a.dim != b.dim:
        raise ValueError("convolution of sequences of different dimension")
    if a.dim == 1:
        vals = np.convolve(a.values, b.values)
    else:
        vals = signal.convolve(a.values, b.values, mode="full", method="direct")
    return WeightedSequence(tuple(x + y for x, y in zip(a.offset, b.offset)), vals)


def iter_lattice(seq: WeightedSequence) -> Iterator[tuple[tuple[int, ...], complex]]:
    for p in np.ndindex(*seq.shape):
        yield tuple(o + q for o, q in zip(seq.offset, p)), complex(seq.values[p])
