"""A-priori decay bounds for convolutive inverses and their consequences.

Every function here is closed-form arithmetic on user-supplied inputs (a
lower bound ``A`` of the symbol or gramian, a decay certificate ``(C, α)``
of a generator).  The series constants ``W_α`` and ``S_α`` are returned as
upper values: a partial sum plus an integral bound of the tail.
"""
from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import integrate

from .errors import Divergent, HypothesisFailed, Infeasible
from .sequences import MultiIndex

__all__ = [
    "DecayCertificate",
    "BoundReport",
    "bound_recursive_op",
    "bound_one_dim",
    "constant_W",
    "constant_S",
    "constant_K",
    "constant_K_numeric",
    "bound_dual_window",
    "bound_riesz",
    "sampling_rho",
    "solve_max_delta",
    "sampling_bounds",
]

SQRT3 = math.sqrt(3.0)
_MAX_TERMS = 1 << 23
_CHUNK = 1 << 20


@dataclass(frozen=True)
class DecayCertificate:
    """``|φ(x)| <= C (1 + |x|)^(-alpha)`` for all real x."""

    C: float
    alpha: float

    def __post_init__(self):
        if not self.C > 0:
            raise HypothesisFailed(f"decay amplitude must be positive, got C={self.C}")
        if not self.alpha > 1.5:
            raise HypothesisFailed(f"decay exponent must exceed 3/2, got alpha={self.alpha}")


@dataclass
class BoundReport:
    name: str
    inputs: dict
    value: object
    valid: bool
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "inputs": _plain(self.inputs),
            "value": _plain(self.value),
            "valid": self.valid,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, default=_json_default)


def _plain(o):
    # multi-index keys become strings such as "(2,1)"
    if isinstance(o, dict):
        return {str(k) if isinstance(k, MultiIndex) else k: _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    return o


def _json_default(o):
    if isinstance(o, MultiIndex):
        return list(o.exponents)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"not serializable: {type(o)}")


def _check_A(A):
    if not A > 0:
        raise HypothesisFailed(f"lower bound A must be positive, got {A}")


# --- deconvolution bounds --------------------------------------------------------


def bound_recursive_op(momenta_a: Mapping[MultiIndex, float], A: float, alpha: MultiIndex) -> dict[MultiIndex, float]:
    """Upper bounds for ``M^γ_op(b)``, γ ≤ alpha, where ``b`` inverts ``a``.

    ``momenta_a[β]`` must be an upper bound of ``M^β_op(a)`` for every β ≤ alpha.
    """
    _check_A(A)
    order = alpha.below()
    missing = [g for g in order if g.size > 0 and g not in momenta_a]
    if missing:
        raise KeyError(f"missing momenta of a for {', '.join(map(str, missing))}")
    out: dict[MultiIndex, float] = {}
    for gamma in order:
        if gamma.size == 0:
            out[gamma] = 1.0 / A
            continue
        acc = math.fsum(
            gamma.binom(beta) * out[beta] * momenta_a[gamma - beta] for beta in gamma.below() if beta != gamma
        )
        out[gamma] = acc / A
    return out


def bound_one_dim(M12_a: float, A: float) -> tuple[float, float]:
    """Bounds on ``M¹₂(b)`` and ``‖b‖₁`` for a one-dimensional inverse."""
    _check_A(A)
    if M12_a < 0:
        raise HypothesisFailed("momentum must be non-negative")
    return M12_a / A**2, 1.0 / A + math.pi * M12_a / (A**2 * SQRT3)


# --- series constants --------------------------------------------------------------


def _sum_terms(term, J: int) -> float:
    """Sum term(j) for j = 1..J, smallest terms first."""
    parts = []
    for start in range(J, 0, -_CHUNK):
        j = np.arange(max(1, start - _CHUNK + 1), start + 1, dtype=float)[::-1]
        parts.append(float(np.sum(term(j))))
    return math.fsum(parts)


def _choose_terms(tail, head_estimate: float, terms: int | None, j_min: int = 1) -> int:
    if terms is not None:
        return max(int(terms), j_min)
    J = max(1024, j_min)
    while tail(J) > 1e-12 * head_estimate and J < _MAX_TERMS:
        J *= 2
    return min(J, _MAX_TERMS)


@functools.lru_cache(maxsize=None)
def constant_W(alpha: float, terms: int | None = None) -> float:
    """Upper value of ``2 Σ_{j>=1} j^(-alpha)``.

    The tail after J terms is bounded by ``∫_{J+1/2}^∞ x^(-alpha) dx``
    (midpoint bound for a convex decreasing integrand).
    """
    if not alpha > 1:
        raise Divergent(f"W_alpha diverges for alpha <= 1 (got {alpha})")

    def tail(J):
        return (J + 0.5) ** (1.0 - alpha) / (alpha - 1.0)

    J = _choose_terms(tail, 1.0, terms)
    return 2.0 * (_sum_terms(lambda j: j**-alpha, J) + tail(J))


def _s_tail(J: int, alpha: float) -> float:
    # ∫_{J+1/2}^∞ x² (1+x)^(-2α) dx in closed form, with U = J + 3/2
    U = J + 1.5
    return (
        U ** (3 - 2 * alpha) / (2 * alpha - 3)
        - 2 * U ** (2 - 2 * alpha) / (2 * alpha - 2)
        + U ** (1 - 2 * alpha) / (2 * alpha - 1)
    )


@functools.lru_cache(maxsize=None)
def constant_S(alpha: float, terms: int | None = None) -> float:
    """Upper value of ``(Σ_k k² (1+|k|)^(-2 alpha))^(1/2)``."""
    if not alpha > 1.5:
        raise Divergent(f"S_alpha diverges for alpha <= 3/2 (got {alpha})")
    # x² (1+x)^(-2α) is convex beyond this point, which validates the midpoint tail bound
    convex_from = (1.0 + math.sqrt(alpha / (2 * alpha - 1))) / (alpha - 1)
    j_min = int(math.ceil(convex_from)) + 1
    J = _choose_terms(lambda J: _s_tail(J, alpha), 2.0 ** (-2 * alpha), terms, j_min)
    head = _sum_terms(lambda k: k**2 * (1.0 + k) ** (-2 * alpha), J)
    return math.sqrt(2.0 * (head + _s_tail(J, alpha)))


def constant_K(alpha: float) -> float:
    """Closed upper bound ``(1 + 2^alpha) · 2/(alpha - 1)`` of the convolution constant K_alpha."""
    if not alpha > 1:
        raise Divergent(f"K_alpha diverges for alpha <= 1 (got {alpha})")
    return (1.0 + 2.0**alpha) * 2.0 / (alpha - 1.0)


def _k_profile(x: float, alpha: float) -> float:
    def f(s):
        return (1 + abs(s)) ** -alpha * (1 + abs(x - s)) ** -alpha

    pts = sorted({0.0, x})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total = integrate.quad(f, -np.inf, pts[0], epsabs=0, epsrel=1e-10, limit=200)[0]
        if len(pts) == 2:
            total += integrate.quad(f, pts[0], pts[1], epsabs=0, epsrel=1e-10, limit=400)[0]
        total += integrate.quad(f, pts[-1], np.inf, epsabs=0, epsrel=1e-10, limit=200)[0]
    return (1 + abs(x)) ** alpha * total


@functools.lru_cache(maxsize=None)
def constant_K_numeric(alpha: float) -> float:
    """Informational sharpening of K_alpha: sup over a log-spaced x grid, with 1e-3 safety.

    Not certified; never larger than :func:`constant_K`.
    """
    closed = constant_K(alpha)
    xs = np.concatenate([[0.0], np.logspace(-3, 6, 181)])
    sup = max(_k_profile(float(x), alpha) for x in xs)
    return min(closed, sup * (1 + 1e-3))


# --- spline-type space constants ------------------------------------------------------------


def _kappa(cert: DecayCertificate) -> float:
    a = cert.alpha
    return math.pi / SQRT3 * cert.C**2 * constant_K(a) * constant_S(a)


def _inverse_factor(cert: DecayCertificate, A: float) -> float:
    # 1/A + π C² K S / (A² √3), the ℓ¹ bound of the inverse autocorrelation
    return 1.0 / A + _kappa(cert) / A**2


def bound_dual_window(cert: DecayCertificate, A: float) -> tuple[float, float]:
    """Bounds for ``‖φ‖_{W(L^∞,ℓ¹)}`` and ``‖ψ‖_{W(L^∞,ℓ¹)}``."""
    _check_A(A)
    phi = cert.C * constant_W(cert.alpha)
    return phi, _inverse_factor(cert, A) * phi


def bound_riesz(cert: DecayCertificate, A: float) -> tuple[float, float]:
    """Lower and upper p-Riesz bounds valid for every 1 <= p <= ∞."""
    _check_A(A)
    W = constant_W(cert.alpha)
    r = A**2 / (cert.C * W * (A + _kappa(cert)))
    return r, cert.C * W


def _inv_q(q: float) -> float:
    if not q > 1:
        raise HypothesisFailed(f"q must exceed 1, got {q}")
    return 0.0 if math.isinf(q) else 1.0 / q


def sampling_rho(cert: DecayCertificate, A: float, deriv_norm: float, q: float, delta: float) -> float:
    """Contraction factor guaranteeing that δ-dense sets are sampling sets."""
    _check_A(A)
    iq = _inv_q(q)
    if not delta > 0:
        raise HypothesisFailed(f"delta must be positive, got {delta}")
    if deriv_norm < 0:
        raise HypothesisFailed("derivative norm must be non-negative")
    cw = cert.C * constant_W(cert.alpha)
    return cw**3 * _inverse_factor(cert, A) ** 2 * (2 * math.ceil(delta) + 1) * deriv_norm * delta ** (1.0 - iq)


def solve_max_delta(
    cert: DecayCertificate, A: float, deriv_norm: float, q: float, rho_target: float, rtol: float = 1e-6
) -> float:
    """Largest δ (to relative precision ``rtol``) with ``sampling_rho(δ) <= rho_target``.

    ρ is increasing on each interval (n-1, n] and jumps up at the integers,
    so the integer breakpoints are scanned first and bisection runs on the
    one continuous piece that contains the answer.
    """
    if not 0 < rho_target < 1:
        raise HypothesisFailed(f"rho target must lie in (0, 1), got {rho_target}")

    def rho(d):
        return sampling_rho(cert, A, deriv_norm, q, d)

    if deriv_norm == 0:
        return math.inf
    n = 1
    while rho(float(n)) <= rho_target:
        n += 1
        if n > 1e9:
            raise Infeasible("sampling density constraint never binds")
    # answer lies in [n-1, n): ρ(n-1) <= target (or n-1 = 0), ρ(n) > target
    lo = float(n - 1)
    hi = float(n)
    if lo > 0 and rho(math.nextafter(lo, math.inf)) > rho_target:
        return lo  # the jump at the breakpoint overshoots
    if lo == 0:
        # find a feasible positive lower end
        lo = hi
        while rho(lo) > rho_target:
            lo /= 2
            if lo < 1e-300:
                raise Infeasible("no positive delta meets the target")
        hi = min(2 * lo, float(n))
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if rho(mid) <= rho_target:
            lo = mid
        else:
            hi = mid
    return lo


def sampling_bounds(cert: DecayCertificate, A: float, N_X: int, delta: float, rho: float, p: float) -> tuple[float, float]:
    """Lower and upper sampling constants ``(c_p, C_p)``."""
    _check_A(A)
    if not rho < 1:
        raise HypothesisFailed(f"contraction factor must be < 1, got {rho}")
    if N_X < 1 or not delta > 0:
        raise HypothesisFailed("need N(X) >= 1 and delta > 0")
    if p < 1:
        raise HypothesisFailed(f"p must be >= 1, got {p}")
    ip = 0.0 if math.isinf(p) else 1.0 / p
    cw = cert.C * constant_W(cert.alpha)
    F = _inverse_factor(cert, A)
    C_p = N_X**ip * cw**2 * F
    c_p = (1 - rho) * (2 * delta) ** (-ip) / (cw**2 * F)
    return c_p, C_p


def report(name: str, value, **inputs) -> BoundReport:
    return BoundReport(name, {k: v for k, v in inputs.items()}, value, True)
