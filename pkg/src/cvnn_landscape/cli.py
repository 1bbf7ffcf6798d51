"""Command-line front end.

Every subcommand prints a JSON report (schema ``v1``) and exits with

    0 success, 1 verification failure, 2 I/O or parse error,
    3 not a global minimum, 4 hypothesis not met, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import crelu_net as cr
from . import gallery as gal
from . import io as cio
from . import landscape as ls
from . import linalg_core as la
from . import quadratic_net as qn
from .errors import FormatError, LandscapeError, LinearlyFittable, NotReal

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_IO = 2
EXIT_NOT_GLOBAL = 3
EXIT_HYPOTHESIS = 4
EXIT_USAGE = 64

SCHEMA = "v1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _positive(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "no_timing"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    cfg["tolerances"] = {"grad_fd": args.tol_grad_fd, "fixture": args.tol_fixture, "gap": args.tol_gap}
    return cfg


def _emit(report: dict, args: argparse.Namespace) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _report(args: argparse.Namespace, started: float, **body) -> dict:
    report = {"schema": SCHEMA, "tool": "cvnn-landscape", "version": __version__, "command": args.command}
    report["config"] = _config(args)
    if not args.no_timing:
        report["wall_clock_s"] = time.perf_counter() - started
    report.update(body)
    return report


# ---------------------------------------------------------------------- subcommands


def cmd_verify_fixtures(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    tol = args.tol_fixture
    fx = ls.trap_fixture()
    net, data = fx.net, fx.dataset
    checks = {}

    value = qn.loss(net, data)
    checks["loss"] = {"value": value, "expected": 1 / 9, "error": abs(value - 1 / 9)}
    checks["loss"]["passed"] = checks["loss"]["error"] <= tol

    HR = qn.hessian_real_embedding(net, data)
    err = float(np.max(np.abs(HR - ls.trap_real_hessian())))
    min_eig = float(la.eig_sym_real(HR)[0])
    checks["h_real"] = {
        "max_entry_error": err,
        "min_eig": min_eig,
        "passed": err <= tol and min_eig >= -1e-10,
    }

    B = qn.hessian_w(net, data).block_matrix()
    err = float(np.max(np.abs(B - ls.trap_block_hessian())))
    eigs = la.eig_hermitian(B)[0]
    neg, pos = int(np.sum(eigs < -1e-8)), int(np.sum(eigs > 1e-8))
    checks["h_complex"] = {
        "max_block_error": err,
        "eigenvalues": eigs,
        "negative_eigs": neg,
        "positive_eigs": pos,
        "passed": err <= tol and neg >= 1 and pos >= 1,
    }

    lemma = {}
    for N in range(1, 9):
        W, closed = ls.lemma24_point(N)
        direct = qn.loss(qn.QuadNet(W, fx.v_bar), data)
        rel = abs(direct - closed) / abs(closed)
        lemma[f"N{N}"] = {
            "loss": direct,
            "closed_form": closed,
            "rel_error": rel,
            "below_trap": direct < 1 / 9,
            "passed": rel <= max(tol, 1e-12) and direct < 1 / 9,
        }
    checks["lemma24"] = lemma
    checks["lemma24_passed"] = all(c["passed"] for c in lemma.values())

    # a perturbation that does lower the loss, reported alongside
    escape = {}
    for N in range(1, 7):
        W, closed = ls.null_direction_point(10.0 ** (-N))
        direct = qn.loss(qn.QuadNet(W, fx.v_bar), data)
        escape[f"N{N}"] = {"loss": direct, "closed_form": closed, "below_trap": direct < 1 / 9}
    checks["null_direction"] = escape

    passed = all(checks[k]["passed"] for k in ("loss", "h_real", "h_complex")) and checks["lemma24_passed"]
    _emit(_report(args, t0, checks=checks, passed=passed), args)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_certify(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    net = cio.load_weights(args.weights)
    data = cio.load_dataset(args.dataset)
    if not isinstance(net, qn.QuadNet):
        raise FormatError("certify expects quadratic-network weights (no b1/b2 fields)")
    rep = ls.certify(net, data)
    body = {
        "optimality": {
            "residual_norm": rep.residual_norm,
            "residual_matrix": rep.residual_matrix,
            "global_min_loss": rep.global_min_loss,
            "loss_at_point": rep.loss_at_point,
            "gap": rep.gap,
            "is_global": rep.is_global,
            "tolerance": rep.tolerance,
        }
    }
    if rep.is_global:
        _emit(_report(args, t0, **body), args)
        return EXIT_OK
    try:
        cert = ls.saddle_direction(net, data)
        body["saddle"] = {
            "a": cert.a,
            "b": cert.b,
            "quad_value": cert.quad_value,
            "algebraic_value": cert.algebraic_value,
        }
    except LandscapeError as exc:
        body["saddle_unavailable"] = {"reason": type(exc).__name__, "detail": str(exc)}
    _emit(_report(args, t0, **body), args)
    return EXIT_NOT_GLOBAL


def cmd_experiment(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    if args.k < args.d:
        raise UsageError(f"need k >= d, got k={args.k}, d={args.d}")
    if args.seed_trap and (args.d, args.k) != (2, 2):
        raise UsageError("--seed-trap needs d = k = 2")
    cfg = ls.ExperimentConfig(
        d=args.d,
        k=args.k,
        n=args.n,
        instances=args.instances,
        inits=args.inits,
        seed=args.seed,
        step=args.step,
        tol=args.grad_tol,
        gap=args.tol_gap,
        max_iters=args.max_iters,
        real_projected=args.real_projected,
        seed_trap=args.seed_trap,
    )
    summary = ls.no_spurious_experiment(cfg)
    passed = summary.max_gap is None or summary.max_gap < cfg.gap
    _emit(_report(args, t0, summary=summary.to_dict(), passed=passed), args)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_crelu(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    data = cio.load_dataset(args.dataset) if args.dataset else ls.trap_fixture().dataset
    act = cr.PiecewiseActivation(args.s_plus, args.s_minus)
    try:
        base = cr.linear_baseline(data)
        net = cr.construct_local_min(data, k=args.k, alpha=args.alpha, act=act)
    except (LinearlyFittable, NotReal) as exc:
        body = {"hypothesis_unmet": {"reason": type(exc).__name__, "detail": str(exc)}, "passed": False}
        _emit(_report(args, t0, **body), args)
        return EXIT_HYPOTHESIS
    if args.weights_out:
        cio.save_weights(net, args.weights_out)
    limit = cr.safe_radius(net, data)
    radius = args.radius if args.radius is not None else min(1e-4, limit)
    local = cr.verify_local_min(net, data, radius, args.samples, args.seed)
    spur = cr.verify_spurious(net, data, inits=args.inits, iters=args.iters, seed=args.seed)
    passed = local.is_local_min_sampled and spur.is_spurious
    body = {
        "baseline": {"w_bar": base.w_bar, "ell": base.ell},
        "constructed": {
            "loss": cr.crelu_loss(net, data),
            "margin": cr.pre_activation_margin(net, data),
            "safe_radius": limit,
            "weights": cio.crelu_to_dict(net),
        },
        "local_min": asdict(local),
        "spurious": asdict(spur),
        "passed": passed,
    }
    _emit(_report(args, t0, **body), args)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_gallery(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    ids = list(gal.FUNCTIONS) if args.function == "all" else [args.function]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files, checks = [], []
    for fid in ids:
        fn = gal.FUNCTIONS[fid]
        re_range = tuple(args.re_range) if args.re_range else gal.default_re_range(fn)
        im_range = tuple(args.im_range)
        for kind, grid in (
            ("complex", gal.sample_surface(fn, re_range, im_range, args.resolution)),
            ("real", gal.sample_real(fn, re_range, args.resolution)),
        ):
            path = out_dir / f"{fid}_{kind}.{args.format}"
            gal.emit_grid(grid, args.format, path)
            files.append(str(path))
        extra = [float(np.pi)] if fid == "cos_plus_2" else []
        for x in [x for x, _ in gal.real_minima(fn)] + extra:
            chk = gal.mmp_spot_check(fn, x, args.radius, args.samples)
            checks.append({
                "function": fid,
                "x": x,
                "center_value": chk.center_value,
                "min_on_disk": chk.min_on_disk,
                "escapes": chk.escapes,
            })
    passed = all(c["escapes"] for c in checks)
    _emit(_report(args, t0, files=files, spot_checks=checks, passed=passed), args)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_export_fixture(args: argparse.Namespace) -> int:
    t0 = time.perf_counter()
    fx = ls.trap_fixture()
    net = ls.net_from_matrix(ls.global_min_oracle(fx.dataset).M_star, k=2) if args.global_point else fx.net
    cio.save_dataset(fx.dataset, args.dataset)
    cio.save_weights(net, args.weights)
    _emit(_report(args, t0, files=[args.dataset, args.weights], passed=True), args)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed for randomized steps")
    common.add_argument("--out", help="also write the JSON report to this path")
    common.add_argument("--format", choices=["json", "csv"], default="json", help="grid file format")
    common.add_argument("--tol-grad-fd", type=_positive, default=1e-5)
    common.add_argument("--tol-fixture", type=_positive, default=1e-10)
    common.add_argument("--tol-gap", type=_positive, default=1e-4)
    common.add_argument("--no-timing", action="store_true", help="omit wall-clock time so reports are byte-stable")

    parser = _Parser(prog="cvnn-landscape", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-fixtures", parents=[common], help="check the three-point trap fixtures")
    p.set_defaults(func=cmd_verify_fixtures)

    p = sub.add_parser("certify", parents=[common], help="global-optimality certificate for a network")
    p.add_argument("weights")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("experiment", parents=[common], help="random-restart descent against the oracle")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--inits", type=int, default=10)
    p.add_argument("--step", type=_positive, default=0.05)
    p.add_argument("--max-iters", type=int, default=20000)
    p.add_argument("--grad-tol", type=_positive, default=1e-8)
    p.add_argument("--real-projected", action="store_true")
    p.add_argument("--seed-trap", action="store_true")
    p.set_defaults(func=cmd_experiment, seed=7)

    p = sub.add_parser("crelu", parents=[common], help="CReLU local-minimum construction and checks")
    p.add_argument("--dataset", help="dataset JSON; defaults to the three-point trap dataset")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha", type=_positive, default=1.0)
    p.add_argument("--s-plus", type=float, default=1.0)
    p.add_argument("--s-minus", type=float, default=0.0)
    p.add_argument("--radius", type=_positive, default=None)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--inits", type=int, default=10)
    p.add_argument("--iters", type=int, default=5000)
    p.add_argument("--weights-out", help="write the constructed network here")
    p.set_defaults(func=cmd_crelu)

    p = sub.add_parser("gallery", parents=[common], help="modulus surfaces and minimum-modulus checks")
    p.add_argument("function", choices=["all", *gal.FUNCTIONS])
    p.add_argument("--re-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--im-range", type=float, nargs=2, metavar=("LO", "HI"), default=list(gal.DEFAULT_RANGE))
    p.add_argument("--resolution", type=int, default=gal.DEFAULT_RESOLUTION)
    p.add_argument("--radius", type=_positive, default=0.1)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--out-dir", default="gallery_out")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("export-fixture", parents=[common], help="write the trap dataset and weights as JSON")
    p.add_argument("--dataset", required=True)
    p.add_argument("--weights", required=True)
    p.add_argument("--global-point", action="store_true", help="write a global minimizer instead of the trap")
    p.set_defaults(func=cmd_export_fixture)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except (OSError, FormatError) as exc:
        sys.stderr.write(f"cvnn-landscape: {exc}\n")
        return EXIT_IO
    except (ValueError, LandscapeError) as exc:
        sys.stderr.write(f"cvnn-landscape: {type(exc).__name__}: {exc}\n")
        return EXIT_USAGE if isinstance(exc, ValueError) and not isinstance(exc, LandscapeError) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
