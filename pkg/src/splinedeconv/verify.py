"""The acceptance suite: ten numbered checks with fixed seeds.

Each check returns a :class:`CriterionResult`; :func:`format_result`
renders it as one line whose numbers are printed with ``repr`` so that two
runs can be compared digit for digit.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy import linalg

from .bounds import (
    bound_dual_window,
    bound_one_dim,
    bound_recursive_op,
    bound_riesz,
    constant_K,
    constant_S,
    constant_W,
    sampling_bounds,
    sampling_rho,
    solve_max_delta,
)
from .errors import HypothesisFailed
from .sampling import (
    best_hat_certificate,
    hat_jitter_stats,
    reconstruct,
    relative_separation,
)
from .sequences import MultiIndex, WeightedSequence, momentum
from .spline import (
    SampledFunction,
    analyze,
    bspline,
    build_model,
    function_amalgam_norm,
    piecewise_linear_lp,
    riesz_ratio_empirical,
)
from .symbol import build_symbol, certify_range, check_derivative_identity, deconvolve_auto, momentum_op

__all__ = ["VerifyConfig", "CriterionResult", "run_criterion", "run_suite", "format_result", "CRITERIA"]

P_VALUES = (1.0, 2.0, math.inf)


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 20240607
    n_1d: int = 500
    n_2d: int = 100
    n_oracle: int = 50
    n_deriv: int = 10
    n_riesz: int = 200
    n_amalgam: int = 200
    n_sampling_f: int = 200
    sampling_seeds: int = 5
    sampling_window: int = 256
    rho_target: float = 0.9
    jitter: float = 0.2
    slack: float = 1e-9
    oracle_tol: float = 1e-8
    biorth_tol: float = 1e-8
    recon_tol: float = 1e-8
    ratio_margin: float = 0.05

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "seed":
                continue
            if not (isinstance(v, (int, float)) and v > 0):
                raise HypothesisFailed(f"config value {f.name} must be positive, got {v!r}")
        if not self.rho_target < 1 or not self.jitter < 0.5:
            raise HypothesisFailed("rho_target must be < 1 and jitter < 1/2")

    @classmethod
    def from_json(cls, path) -> VerifyConfig:
        with open(path) as fh:
            data = json.load(fh)
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise HypothesisFailed(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    values: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_fmt(x) for x in v) + "]"
    return str(v)


def format_result(r: CriterionResult) -> str:
    body = " ".join(f"{k}={_fmt(v)}" for k, v in r.values.items())
    return f"criterion {r.number:2d} {'PASS' if r.passed else 'FAIL'}  {r.title}: {body}"


def _rng(cfg: VerifyConfig, number: int) -> np.random.Generator:
    return np.random.default_rng([cfg.seed, number])


def _cgauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _well_conditioned(rng, dim: int, max_len: int, ratio: float, min_len: int = 1, n: int | None = None):
    """Random complex Gaussian sequences, rejected until ``A_cert >= ratio · B_cert`` on an n-point grid."""
    tries = 0
    while True:
        tries += 1
        shape = tuple(int(rng.integers(min_len, max_len + 1)) for _ in range(dim))
        offset = tuple(int(rng.integers(-max_len, max_len + 1)) for _ in range(dim))
        a = WeightedSequence(offset, _cgauss(rng, shape))
        A, B = certify_range(build_symbol(a, n))
        if A >= ratio * B:
            return a, tries


# --- criteria ------------------------------------------------------------------------------


def criterion_1(cfg: VerifyConfig) -> CriterionResult:
    rng = _rng(cfg, 1)
    violations, tries, worst = 0, 0, -math.inf
    e1 = MultiIndex((1,))
    for _ in range(cfg.n_1d):
        a, t = _well_conditioned(rng, 1, 33, 0.05)
        tries += t
        res = deconvolve_auto(a)
        bm, bl1 = bound_one_dim(momentum(a, e1, "L2").value, res.A_certified)
        m_b = momentum(res.b, e1, "L2").value
        l1_b = res.b.norm(1)
        for actual, bound in ((m_b, bm), (l1_b, bl1)):
            if bound > 0:
                worst = max(worst, actual / bound)
            if actual > bound * (1 + cfg.slack) + cfg.slack * bl1:
                violations += 1
    return CriterionResult(
        1, "one-dimensional bound dominance", violations == 0,
        {"sequences": cfg.n_1d, "draws": tries, "violations": violations, "max_actual_over_bound": worst},
    )


def criterion_2(cfg: VerifyConfig) -> CriterionResult:
    rng = _rng(cfg, 2)
    alpha = MultiIndex((2, 1))
    gammas = alpha.below()
    violations, worst = 0, -math.inf
    for _ in range(cfg.n_2d):
        a, _ = _well_conditioned(rng, 2, 9, 0.05)
        res = deconvolve_auto(a)
        momenta = {g: momentum_op(a, g).value for g in gammas}
        bounds = bound_recursive_op(momenta, res.A_certified, alpha)
        for g in gammas:
            actual = momentum_op(res.b, g).value
            worst = max(worst, actual / bounds[g]) if bounds[g] > 0 else worst
            if actual > bounds[g] * (1 + cfg.slack) + cfg.slack:
                violations += 1
    return CriterionResult(
        2, "recursive OP-momentum bound dominance", violations == 0,
        {"sequences": cfg.n_2d, "multi_indices": len(gammas), "violations": violations, "max_actual_over_bound": worst},
    )


def winding_number(a: WeightedSequence, n: int = 4096) -> int:
    vals = build_symbol(a, n).values
    phase = np.unwrap(np.angle(np.append(vals, vals[0])))
    return int(round((phase[-1] - phase[0]) / (2 * math.pi)))


def toeplitz_inverse(a: WeightedSequence, radius: int = 200) -> WeightedSequence:
    """Direct-solve oracle: the finite section of ``a * x = δ``.

    Rows are output indices ``|k| <= radius``; columns are shifted by the
    winding number ``w`` of the symbol, so the section solves for
    ``x_m``, ``|m + w| <= radius``, which converges to the inverse.
    """
    w = winding_number(a)
    rows = np.arange(-radius, radius + 1)
    cols = rows - w
    diff = rows[:, None] - cols[None, :]
    lo = a.offset[0]
    vals = a.values
    idx = diff - lo
    inside = (idx >= 0) & (idx < len(vals))
    M = np.where(inside, vals[np.clip(idx, 0, len(vals) - 1)], 0.0)
    rhs = (rows == 0).astype(complex)
    x = linalg.solve(M, rhs)
    return WeightedSequence((int(cols[0]),), x)


def criterion_3(cfg: VerifyConfig) -> CriterionResult:
    rng = _rng(cfg, 3)
    worst = 0.0
    for _ in range(cfg.n_oracle):
        a, _ = _well_conditioned(rng, 1, 17, 0.1, min_len=2)
        b = deconvolve_auto(a).b
        oracle = toeplitz_inverse(a)
        c = -winding_number(a)
        lo, hi = [c - 20], [c + 20]
        err = float(np.abs(b.restrict(lo, hi).values - oracle.restrict(lo, hi).values).max())
        worst = max(worst, err)
    return CriterionResult(
        3, "symbol inverse equals Toeplitz direct solve", worst <= cfg.oracle_tol,
        {"sequences": cfg.n_oracle, "entries": 41, "max_error": worst},
    )


def criterion_4(cfg: VerifyConfig) -> CriterionResult:
    rng = _rng(cfg, 4)
    orders = []
    for _ in range(cfg.n_deriv):
        a, _ = _well_conditioned(rng, 1, 9, 0.1, min_len=2, n=256)
        d1 = check_derivative_identity(build_symbol(a, 256))
        d2 = check_derivative_identity(build_symbol(a, 512))
        orders.append(math.log2(d1 / d2))
    ok = all(1.8 <= o <= 2.2 for o in orders)
    return CriterionResult(
        4, "derivative identity converges at second order", ok,
        {"symbols": cfg.n_deriv, "min_order": min(orders), "max_order": max(orders)},
    )


def brute_force_S(alpha: float, terms: int = 10**6) -> float:
    k = np.arange(terms, 0, -1, dtype=float)
    return math.sqrt(2 * math.fsum(k**2 * (1 + k) ** (-2 * alpha)))


S_MATCH_ALPHAS = (2.5, 3.0, 4.0, 6.0, 10.0)
S_MONOTONE_ALPHAS = (1.6, 1.75, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0)


def criterion_5(cfg: VerifyConfig) -> CriterionResult:
    w2 = abs(constant_W(2.0) - math.pi**2 / 3)
    w4 = abs(constant_W(4.0) - math.pi**4 / 45)
    k2 = constant_K(2.0)
    s_vals = [constant_S(a) for a in S_MONOTONE_ALPHAS]
    decreasing = all(x > y for x, y in zip(s_vals, s_vals[1:]))
    s_err = max(abs(constant_S(a) - brute_force_S(a)) for a in S_MATCH_ALPHAS)
    ok = w2 <= 1e-9 and w4 <= 1e-9 and k2 == 10.0 and decreasing and s_err <= 1e-9
    return CriterionResult(
        5, "series constants", ok,
        {"W2_error": w2, "W4_error": w4, "K2": k2, "S_decreasing": decreasing, "S_bruteforce_error": s_err},
    )


def criterion_6(cfg: VerifyConfig) -> CriterionResult:
    hat = build_model(bspline(2))
    psi_w = function_amalgam_norm(hat.psi)
    _, bound_psi = bound_dual_window(hat.gen.cert, hat.A_gram)
    box = build_model(bspline(1))
    x = np.linspace(-1, 1, 4001)
    box_exact = bool(box.b.shape == (1,) and box.b.values[0] == 1.0 and np.array_equal(box.psi(x), box.gen(x)))
    ok = hat.biorth_defect <= cfg.biorth_tol and psi_w <= bound_psi and box_exact
    return CriterionResult(
        6, "dual window", ok,
        {"hat_defect": hat.biorth_defect, "psi_W_numeric": psi_w, "psi_W_bound": bound_psi, "box_psi_equals_phi": box_exact},
    )


def criterion_7(cfg: VerifyConfig) -> CriterionResult:
    model = build_model(bspline(2))
    r, R = bound_riesz(model.gen.cert, model.A_gram)
    vals, ok = {"r": r, "R": R}, True
    for p in P_VALUES:
        lo, hi = riesz_ratio_empirical(model, p, trials=cfg.n_riesz, rng=_rng(cfg, 70 + int(min(p, 9))))
        vals[f"p{p:g}"] = [lo, hi]
        ok &= r <= lo and hi <= R
        if p == 2:
            ok &= math.sqrt(1 / 3) - 1e-6 <= lo and hi <= 1 + 1e-6
    return CriterionResult(7, "Riesz sandwich", ok, vals)


def criterion_8(cfg: VerifyConfig) -> CriterionResult:
    model = build_model(bspline(2))
    A = model.A_gram
    deriv_norm = function_amalgam_norm(model.gen, p=math.inf, q=1.0, derivative=True)
    cert = best_hat_certificate(A, deriv_norm, math.inf, cfg.rho_target)
    delta = solve_max_delta(cert, A, deriv_norm, math.inf, cfg.rho_target)
    rho = sampling_rho(cert, A, deriv_norm, math.inf, delta)
    L = cfg.sampling_window
    rng = _rng(cfg, 8)
    violations, worst_ratio, worst_err, points, iters = 0, 0.0, 0.0, 0, 0
    extremes = {p: [math.inf, 0.0] for p in P_VALUES}
    for s in range(cfg.sampling_seeds):
        targets = np.zeros((2, L + 1))
        targets[0, L // 2] = 1.0  # f = φ(· - L/2)
        targets[1, 1:-1] = rng.standard_normal(L - 1)
        stats = hat_jitter_stats(L, delta, cfg.jitter, int(rng.integers(2**63)), targets)
        points += stats.n_points
        bounds = {p: sampling_bounds(cert, A, stats.N_X, delta, rho, p) for p in P_VALUES}
        for _ in range(cfg.n_sampling_f):
            c = np.zeros(L + 1)
            c[1:-1] = rng.standard_normal(L - 1)
            for p in P_VALUES:
                fn = piecewise_linear_lp(c, 1.0, p)
                c_p, C_p = bounds[p]
                if p == 1:
                    lo, hi = stats.zf_norm1_bounds(c)
                elif p == 2:
                    lo = hi = stats.zf_norm2(c)
                else:
                    lo = hi = stats.zf_norm_inf(c)
                extremes[p][0] = min(extremes[p][0], lo / fn / c_p)
                extremes[p][1] = max(extremes[p][1], hi / fn / C_p)
                if lo < c_p * fn or hi > C_p * fn:
                    violations += 1
        gram = stats.gram()
        for k in range(2):
            res = reconstruct(model, None, None, p=2.0, tol=1e-14, gram=gram, v_target=stats.v_target[k])
            iters = max(iters, res.iterations)
            worst_ratio = max(worst_ratio, res.gamma_observed)
            err = float(np.abs(res.coeffs.values - targets[k, 1:-1]).max())
            worst_err = max(worst_err, err)
    ok = violations == 0 and worst_ratio <= rho + cfg.ratio_margin and worst_err <= cfg.recon_tol
    return CriterionResult(
        8, "sampling inequality and reconstruction", ok,
        {
            "alpha": cert.alpha, "delta_star": delta, "rho": rho, "points_per_set": points // cfg.sampling_seeds,
            "violations": violations,
            "min_lower_ratio": [extremes[p][0] for p in P_VALUES],
            "max_upper_ratio": [extremes[p][1] for p in P_VALUES],
            "max_step_ratio": worst_ratio, "max_coeff_error": worst_err, "max_iterations": iters,
        },
    )


def _random_separated_set(rng, lo: float, hi: float) -> np.ndarray:
    """Uniform points plus a few tight clusters, so N(X) varies between trials."""
    n = int(rng.integers(10, 200))
    pts = [rng.uniform(lo, hi, n)]
    for _ in range(int(rng.integers(0, 4))):
        centre = rng.uniform(lo, hi)
        pts.append(centre + rng.uniform(0, 0.05, int(rng.integers(2, 6))))
    return np.sort(np.concatenate(pts))


def criterion_9(cfg: VerifyConfig) -> CriterionResult:
    model = build_model(bspline(2))
    rng = _rng(cfg, 9)
    phi_w = function_amalgam_norm(model.gen)
    psi_w = function_amalgam_norm(model.psi)
    b = model.b
    viol = {"a": 0, "b": 0, "c": 0}
    h, span = 1 / 8, 32
    k_range = (b.offset[0] - 1, span + b.upper[0] + 1)
    for _ in range(cfg.n_amalgam):
        # (a) analysis coefficients against the dual window
        vals = np.zeros(span * 8 + 1)
        vals[1:-1] = rng.standard_normal(len(vals) - 2)
        f = SampledFunction(0.0, h, vals)
        c = analyze(model, f, k_range)
        for p in P_VALUES:
            if c.norm(p) > piecewise_linear_lp(vals, h, p) * psi_w * (1 + cfg.slack):
                viol["a"] += 1
        # (b) synthesis
        coef = WeightedSequence((0,), _cgauss(rng, 64))
        g = model.function(coef)
        for p in P_VALUES:
            if function_amalgam_norm(g, p=math.inf, q=p) > coef.norm(p) * phi_w * (1 + cfg.slack):
                viol["b"] += 1
        # (c) samples of a spline function on a relatively separated set
        X = _random_separated_set(rng, -4.0, 68.0)
        nx = relative_separation(X)
        z = g(X)
        for p in P_VALUES:
            ip = 0.0 if math.isinf(p) else 1.0 / p
            zp = float(np.abs(z).max()) if math.isinf(p) else math.fsum(np.abs(z) ** p) ** ip
            if zp > nx**ip * function_amalgam_norm(g, p=math.inf, q=p) * (1 + cfg.slack):
                viol["c"] += 1
    return CriterionResult(
        9, "amalgam inequalities", sum(viol.values()) == 0,
        {"trials": cfg.n_amalgam, "violations_a": viol["a"], "violations_b": viol["b"], "violations_c": viol["c"]},
    )


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_criterion(number: int, cfg: VerifyConfig | None = None) -> CriterionResult:
    cfg = VerifyConfig() if cfg is None else cfg
    t0 = time.perf_counter()
    res = CRITERIA[number](cfg)
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(cfg: VerifyConfig | None = None, numbers=None, echo=None) -> list[CriterionResult]:
    """Run the numbered checks (all of 1..9 by default) in order."""
    cfg = VerifyConfig() if cfg is None else cfg
    out = []
    for n in numbers or sorted(CRITERIA):
        r = run_criterion(n, cfg)
        out.append(r)
        if echo is not None:
            echo(format_result(r))
    return out


def determinism_result(first: list[CriterionResult], second: list[CriterionResult]) -> CriterionResult:
    """Criterion 10: two runs print the same lines."""
    a = [format_result(r) for r in first]
    b = [format_result(r) for r in second]
    same = a == b
    return CriterionResult(
        10, "determinism", same,
        {"criteria_compared": len(a), "identical_lines": sum(x == y for x, y in zip(a, b))},
    )
