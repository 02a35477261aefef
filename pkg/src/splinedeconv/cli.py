"""Command line front end.

Exit codes: 0 success, 1 verification suite reported a failed criterion,
2 violated hypothesis or invalid input, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import bounds as bd
from .errors import HypothesisFailed, NotDense, SplineDeconvError
from .sampling import (
    PartitionOfUnity,
    best_hat_certificate,
    default_k_range,
    estimate_gamma,
    hat_jitter_stats,
    jittered_points,
    load_points,
    operator_Z,
    reconstruct,
    sampled_gram,
    validate_set,
)
from .sequences import MultiIndex, WeightedSequence, load_sequence, momentum, save_sequence
from .spline import (
    BSplineGenerator,
    build_model,
    function_amalgam_norm,
    generator_from_spec,
    lp_norm,
    piecewise_linear_lp,
    riesz_ratio_empirical,
)
from .symbol import default_grid_size, deconvolve_auto, momentum_op
from .verify import VerifyConfig, determinism_result, format_result, run_suite

EXIT_OK, EXIT_VERIFY, EXIT_HYPOTHESIS, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3, 4


def _plain(o):
    if isinstance(o, MultiIndex):
        return list(o.exponents)
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def _finite(v):
    """JSON has no infinities; write them as strings."""
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, dict):
        return {k: _finite(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_finite(x) for x in v]
    return v


def _write_json(path: Path, data) -> None:
    with open(path, "w") as fh:
        json.dump(_finite(json.loads(json.dumps(data, default=_plain))), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _parse_p(text: str) -> float:
    if text.lower() in {"inf", "infinity", "oo"}:
        return math.inf
    p = float(text)
    if p < 1:
        raise argparse.ArgumentTypeError("p must be >= 1")
    return p


def _parse_index(text: str) -> MultiIndex:
    return MultiIndex(tuple(int(t) for t in text.split(",")))


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {text}")
        return v

    return conv


def _load_generator(path):
    with open(path) as fh:
        return generator_from_spec(json.load(fh))


# --- subcommands -----------------------------------------------------------------------------


def cmd_deconvolve(args, out: Path) -> int:
    a = load_sequence(args.sequence)
    n = args.grid or max(default_grid_size(a.dim), 64)
    res = deconvolve_auto(a, n, args.trunc_tol)
    save_sequence(res.b, out / "b.json")
    reports = [
        bd.report("certified_range", [res.A_certified, res.B_certified], grid_size=res.grid_size),
        bd.report("residual_l2", res.residual_l2, trunc_tol=args.trunc_tol, truncation_radius=list(res.truncation_radius)),
    ]
    if a.dim == 1:
        e1 = MultiIndex((1,))
        m12 = momentum(a, e1, "L2").value
        bm, bl1 = bd.bound_one_dim(m12, res.A_certified)
        reports.append(bd.report("one_dim", {"M12_b": bm, "l1_b": bl1}, M12_a=m12, A=res.A_certified))
        reports.append(bd.report("one_dim_actual", {"M12_b": momentum(res.b, e1, "L2").value, "l1_b": res.b.norm(1)}))
    alpha = args.alpha or MultiIndex((1,) * a.dim)
    if alpha.dim != a.dim:
        raise HypothesisFailed(f"multi-index {alpha} does not match dimension {a.dim}")
    momenta = {g: momentum_op(a, g).value for g in alpha.below()}
    rec = bd.bound_recursive_op(momenta, res.A_certified, alpha)
    reports.append(
        bd.report(
            "recursive_op",
            {str(g): v for g, v in rec.items()},
            momenta_a={str(g): v for g, v in momenta.items()},
            A=res.A_certified,
        )
    )
    _write_json(out / "bounds.json", {"seed": args.seed, "reports": [r.to_dict() for r in reports]})
    cols = ["k"] if a.dim == 1 else [f"k{j + 1}" for j in range(a.dim)]
    rows = []
    for p in np.ndindex(*res.b.shape):
        k = [o + q for o, q in zip(res.b.offset, p)]
        rows.append([*k, float(abs(res.b.values[p]))])
    _write_csv(out / "b_abs.csv", [*cols, "abs"], rows)
    print(f"A_certified={res.A_certified!r} B_certified={res.B_certified!r} residual_l2={res.residual_l2!r}")
    print(f"b: offset={list(res.b.offset)} shape={list(res.b.shape)} grid={res.grid_size}")
    return EXIT_OK


def cmd_bounds(args, out: Path) -> int:
    if args.generator:
        gen = _load_generator(args.generator)
        cert = gen.cert
        A = args.A if args.A is not None else build_model(gen).A_gram
    else:
        cert = bd.DecayCertificate(args.C, args.alpha)
        A = args.A if args.A is not None else 1.0
    rows = [
        ("C", cert.C),
        ("alpha", cert.alpha),
        ("A", A),
        ("W_alpha", bd.constant_W(cert.alpha)),
        ("S_alpha", bd.constant_S(cert.alpha)),
        ("K_alpha (certified)", bd.constant_K(cert.alpha)),
        ("K_alpha (numeric, advisory)", bd.constant_K_numeric(cert.alpha)),
    ]
    phi_w, psi_w = bd.bound_dual_window(cert, A)
    r, R = bd.bound_riesz(cert, A)
    rows += [("phi W(Linf,l1) bound", phi_w), ("psi W(Linf,l1) bound", psi_w), ("riesz r", r), ("riesz R", R)]
    if args.deriv_norm is not None:
        q = args.q
        if args.delta is not None:
            rows.append(("rho(delta)", bd.sampling_rho(cert, A, args.deriv_norm, q, args.delta)))
        delta_star = bd.solve_max_delta(cert, A, args.deriv_norm, q, args.rho_target)
        rho = bd.sampling_rho(cert, A, args.deriv_norm, q, delta_star)
        rows += [("delta*", delta_star), ("rho(delta*)", rho)]
        c_p, C_p = bd.sampling_bounds(cert, A, args.nx, delta_star, rho, args.p)
        rows += [("c_p", c_p), ("C_p", C_p)]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v!r}")
    _write_json(out / "bounds.json", {"seed": args.seed, "values": dict(rows)})
    return EXIT_OK


def cmd_dual_window(args, out: Path) -> int:
    gen = _load_generator(args.generator)
    model = build_model(gen, args.grid or 1024, args.trunc_tol)
    save_sequence(model.b, out / "psi_coefficients.json")
    phi_num = function_amalgam_norm(gen)
    psi_num = function_amalgam_norm(model.psi)
    phi_bound, psi_bound = bd.bound_dual_window(gen.cert, model.A_gram)
    report = {
        "seed": args.seed,
        "generator": gen.to_dict(),
        "A_gram": model.A_gram,
        "B_gram": model.B_gram,
        "autocorrelation": model.a.to_dict(),
        "biorthogonality_defect": model.biorth_defect,
        "phi_W_numeric": phi_num,
        "phi_W_certified": phi_bound,
        "psi_W_numeric": psi_num,
        "psi_W_certified": psi_bound,
    }
    _write_json(out / "dual_window.json", report)
    lo, hi = model.psi.support
    x = np.linspace(lo, hi, int(round((hi - lo) * 64)) + 1)
    v = np.asarray(model.psi(x), dtype=complex)
    _write_csv(out / "psi.csv", ["x", "re", "im"], zip(x, v.real, v.imag))
    print(f"A_gram={model.A_gram!r} B_gram={model.B_gram!r} defect={model.biorth_defect!r}")
    print(f"psi W-norm numeric={psi_num!r} certified={psi_bound!r}")
    return EXIT_OK


def cmd_riesz_check(args, out: Path) -> int:
    gen = _load_generator(args.generator)
    model = build_model(gen)
    r, R = bd.bound_riesz(gen.cert, model.A_gram)
    rng = np.random.default_rng(args.seed)
    result = {"seed": args.seed, "r": r, "R": R, "trials": args.trials, "ratios": {}}
    inside = True
    for p in args.p:
        lo, hi = riesz_ratio_empirical(model, p, args.trials, rng)
        result["ratios"][str(p)] = [lo, hi]
        inside &= r <= lo and hi <= R
        print(f"p={p:g}: ratios in [{lo!r}, {hi!r}], certified [{r!r}, {R!r}]")
    result["inside_certified"] = inside
    _write_json(out / "riesz.json", result)
    return EXIT_OK if inside else EXIT_NUMERIC


def _sample_recon_streamed(args, model, rng):
    A = model.A_gram
    dn = function_amalgam_norm(model.gen, p=math.inf, q=1.0, derivative=True)
    cert = best_hat_certificate(A, dn, math.inf, args.rho_target)
    delta = bd.solve_max_delta(cert, A, dn, math.inf, args.rho_target)
    rho = bd.sampling_rho(cert, A, dn, math.inf, delta)
    L = args.window_length
    target = np.zeros((1, L + 1))
    target[0, 1:-1] = rng.standard_normal(L - 1)
    stats = hat_jitter_stats(L, delta, args.jitter, int(rng.integers(2**63)), target)
    c_p, C_p = bd.sampling_bounds(cert, A, stats.N_X, delta, rho, args.p)
    c = target[0]
    if args.p == 1:
        lo, hi = stats.zf_norm1_bounds(c)
    elif args.p == 2:
        lo = hi = stats.zf_norm2(c)
    elif math.isinf(args.p):
        lo = hi = stats.zf_norm_inf(c)
    else:
        raise HypothesisFailed("streamed sampling sets support p in {1, 2, inf}")
    fn = piecewise_linear_lp(c, 1.0, args.p)
    violations = int(lo < c_p * fn) + int(hi > C_p * fn)
    res = reconstruct(model, None, None, p=args.p, tol=args.tol, max_iter=args.max_iter, gram=stats.gram(), v_target=stats.v_target[0])
    err = float(np.abs(res.coeffs.values - c[1:-1]).max())
    info = {
        "mode": "streamed jitter", "points": stats.n_points, "N_X": stats.N_X, "delta": delta, "alpha": cert.alpha,
        "boundary_policy": "coefficients on interior translates 1..L-1 of the window [0, L]",
    }
    return res, rho, c_p, C_p, violations, err, info


def _sample_recon_stored(args, model, rng):
    gen = model.gen
    if args.points:
        pts = load_points(args.points)
        window = tuple(args.window) if args.window else None
    else:
        if args.delta is None:
            raise HypothesisFailed("--delta is required for stored jittered sets of this generator")
        L = args.window_length
        n = int(math.ceil(L * (1 + 2 * args.jitter) / (0.999 * 2 * args.delta)))
        window = (0.0, float(L))
        pts = jittered_points(window, L / n, args.jitter, rng)
    if args.delta is None:
        raise HypothesisFailed("--delta is required with a point file")
    X = validate_set(pts, args.delta, window)
    pou = PartitionOfUnity(X)
    k_range = default_k_range(gen, X.window)
    gram = sampled_gram(model, X, pou, k_range)
    if gen.deriv_available:
        dn = function_amalgam_norm(gen, p=math.inf, q=1.0, derivative=True)
        rho = bd.sampling_rho(gen.cert, model.A_gram, dn, math.inf, X.delta)
    else:
        rho = math.inf
    coef = rng.standard_normal(k_range[1] - k_range[0] + 1)
    c = WeightedSequence((k_range[0],), coef)
    samples = operator_Z(model, X, c)
    info = {"mode": "stored set", "points": X.n, "N_X": X.N_X, "delta": X.delta, "k_range": list(k_range),
            "boundary_policy": "coefficients of translates supported inside the window"}
    c_p = C_p = None
    violations = 0
    if rho < 1:
        c_p, C_p = bd.sampling_bounds(gen.cert, model.A_gram, X.N_X, X.delta, rho, args.p)
        fn = lp_norm(model.function(c), args.p)
        zn = float(np.abs(samples).max()) if math.isinf(args.p) else math.fsum(np.abs(samples) ** args.p) ** (1 / args.p)
        violations = int(zn < c_p * fn) + int(zn > C_p * fn)
    else:
        gamma = estimate_gamma(model, gram, rng=rng)
        info["gamma_empirical_not_certified"] = gamma
        if not gamma < 1:
            raise HypothesisFailed(f"certified rho={rho:.3g} >= 1 and empirical gamma={gamma:.3g} >= 1")
    res = reconstruct(model, X, samples, p=args.p, tol=args.tol, max_iter=args.max_iter, gram=gram)
    err = float(np.abs(res.coeffs.values - coef).max())
    f_rec = operator_Z(model, X, res.coeffs)
    info["max_sample_residual"] = float(np.abs(f_rec - samples).max())
    return res, rho, c_p, C_p, violations, err, info


def cmd_sample_recon(args, out: Path) -> int:
    gen = _load_generator(args.generator)
    model = build_model(gen)
    rng = np.random.default_rng(args.seed)
    streamed = args.points is None and args.delta is None and isinstance(gen, BSplineGenerator) and gen.order == 2
    if streamed:
        res, rho, c_p, C_p, violations, err, info = _sample_recon_streamed(args, model, rng)
    else:
        res, rho, c_p, C_p, violations, err, info = _sample_recon_stored(args, model, rng)
    report = {
        "seed": args.seed,
        "p": args.p,
        "iterations": res.iterations,
        "error_history": res.error_history,
        "rho_certified": rho,
        "gamma_observed": res.gamma_observed,
        "c_p": c_p,
        "C_p": C_p,
        "violations": violations,
        "converged": res.converged,
        "max_coefficient_error": err,
        **info,
    }
    _write_json(out / "recon.json", report)
    _write_csv(out / "error_history.csv", ["iteration", "step_norm"], enumerate(res.error_history, start=1))
    print(f"iterations={res.iterations} gamma_observed={res.gamma_observed!r} rho_certified={float(rho)!r}")
    print(f"max coefficient error={err!r} violations={violations}")
    return EXIT_OK


def cmd_verify(args, out: Path) -> int:
    cfg = VerifyConfig.from_json(args.config) if args.config else VerifyConfig()
    if args.seed is not None:
        cfg = VerifyConfig(**{**cfg.__dict__, "seed": args.seed})
    numbers = args.criteria or None
    first = run_suite(cfg, numbers, echo=print)
    results = list(first)
    if not args.no_repeat:
        second = run_suite(cfg, numbers)
        det = determinism_result(first, second)
        print(format_result(det))
        results.append(det)
    _write_json(out / "verify.json", {"seed": cfg.seed, "results": [r.to_dict() for r in results]})
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_VERIFY


# --- parser ------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    def add_globals(p, defaults):
        p.add_argument("--seed", type=int, default=None if defaults else argparse.SUPPRESS,
                       help="RNG seed (recorded in every output)")
        p.add_argument("--out-dir", default="." if defaults else argparse.SUPPRESS, help="directory for output files")
        p.add_argument("--json-errors", action="store_true", default=False if defaults else argparse.SUPPRESS,
                       help="report errors as JSON on stderr")

    parser = argparse.ArgumentParser(
        prog="splinedeconv",
        description="Convolutive inverses, dual windows and nonuniform sampling for spline-type spaces.",
        epilog="exit codes: 0 success, 1 failed criterion, 2 hypothesis or input error, 3 numerical failure, 4 I/O",
    )
    add_globals(parser, True)
    # global flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    add_globals(common, False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deconvolve", parents=[common], help="convolutive inverse of a sequence with a-priori bounds")
    p.add_argument("sequence", help="sequence JSON file")
    p.add_argument("--grid", type=int, default=None, help="symbol grid size per axis (power of two)")
    p.add_argument("--trunc-tol", type=_positive(float), default=1e-12)
    p.add_argument("--alpha", type=_parse_index, default=None, help="multi-index for the recursive bound, e.g. 2,1")
    p.set_defaults(func=cmd_deconvolve)

    p = sub.add_parser("bounds", parents=[common], help="table of constants and bounds")
    p.add_argument("--generator", help="generator spec JSON (supplies C, alpha and A)")
    p.add_argument("--C", type=_positive(float), default=1.0)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--A", type=_positive(float), default=None)
    p.add_argument("--deriv-norm", type=float, default=None, help="‖φ'‖ in W(L^q, l^1); enables sampling rows")
    p.add_argument("--q", type=_parse_p, default=math.inf)
    p.add_argument("--delta", type=_positive(float), default=None)
    p.add_argument("--rho-target", type=float, default=0.9)
    p.add_argument("--nx", type=int, default=1)
    p.add_argument("--p", type=_parse_p, default=2.0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("dual-window", parents=[common], help="dual window of a generator")
    p.add_argument("generator", help="generator spec JSON")
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--trunc-tol", type=_positive(float), default=1e-13)
    p.set_defaults(func=cmd_dual_window)

    p = sub.add_parser("riesz-check", parents=[common], help="empirical p-Riesz ratios against certified bounds")
    p.add_argument("generator")
    p.add_argument("--p", type=_parse_p, nargs="+", default=[1.0, 2.0, math.inf])
    p.add_argument("--trials", type=_positive(int), default=200)
    p.set_defaults(func=cmd_riesz_check)

    p = sub.add_parser("sample-recon", parents=[common], help="nonuniform sampling and iterative reconstruction")
    p.add_argument("generator")
    p.add_argument("--points", help="sampling set CSV, one point per line")
    p.add_argument("--window", type=float, nargs=2, default=None)
    p.add_argument("--delta", type=_positive(float), default=None, help="density radius; default is the certified δ*")
    p.add_argument("--jitter", type=float, default=0.2)
    p.add_argument("--window-length", type=_positive(int), default=256)
    p.add_argument("--rho-target", type=float, default=0.9)
    p.add_argument("--p", type=_parse_p, default=2.0)
    p.add_argument("--tol", type=_positive(float), default=1e-13)
    p.add_argument("--max-iter", type=_positive(int), default=200)
    p.set_defaults(func=cmd_sample_recon)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--config", help="JSON file overriding suite parameters")
    p.add_argument("--criteria", type=int, nargs="+", choices=range(1, 10), default=None)
    p.add_argument("--no-repeat", action="store_true", help="skip the second run that checks determinism")
    p.set_defaults(func=cmd_verify)
    return parser


def _report_error(args, exc: BaseException, code: int) -> int:
    if getattr(args, "json_errors", False):
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    else:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command != "verify" and args.seed is None:
        args.seed = 0
    try:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, out)
    except SplineDeconvError as exc:
        return _report_error(args, exc, exc.exit_code)
    except (OSError, json.JSONDecodeError) as exc:
        return _report_error(args, exc, EXIT_IO)
    except (ValueError, KeyError, TypeError) as exc:
        return _report_error(args, exc, EXIT_HYPOTHESIS)


if __name__ == "__main__":
    sys.exit(main())
