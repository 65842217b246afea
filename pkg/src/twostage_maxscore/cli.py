"""Command-line entry point.

Exit codes: 0 success, 2 input or configuration error, 3 computation
failure, 4 I/O error while writing results.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np
from scipy.integrate import simpson

from . import config as cfgmod
from . import io as dio
from .errors import EstimationError
from .kernels import CONSTRAINT_TOL, KernelSpec, constraint_residuals, eval_kernel8
from .maxscore import single_stage_estimate, subsampling_ci, two_stage_estimate
from .montecarlo import run_study
from .simulation import draw_sample, true_G

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE, EXIT_IO = 0, 2, 3, 4

MOMENT_TOL = 1e-6
SQRT_2PI = math.sqrt(2.0 * math.pi)


class _OutputError(Exception):
    pass


def _write(fn, *args):
    try:
        fn(*args)
    except OSError as exc:
        raise _OutputError(str(exc)) from None


def _out_dir(path) -> Path:
    try:
        return dio.ensure_dir(path)
    except OSError as exc:
        raise _OutputError(f"cannot create output directory {path}: {exc}") from None


def cmd_simulate(args) -> int:
    cp = cfgmod.load(args.config, "simulate")
    study = cfgmod.study_from(cp)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        study = cfgmod.StudyConfig(**{**study.__dict__, **overrides})
    result = run_study(study)
    out = _out_dir(args.out)
    _write(dio.write_summary_csv, out / "summary.csv", result.rows)
    _write(dio.write_edf_csv, out / "edf.csv", result.curves)
    print(dio.format_summary_table(result.rows))
    return EXIT_OK


def cmd_estimate(args) -> int:
    cp = cfgmod.load(args.config, "estimate")
    ec = cfgmod.estimate_from(cp)
    if not Path(args.data).is_file():
        raise cfgmod.ConfigError(f"dataset file not found: {args.data}")
    data = dio.read_dataset_csv(args.data)
    k, p, q = data.dims
    grid = cfgmod.grid_from(cp, k + p - 1)

    if ec.first_stage is None:
        if p != 1 or q != 1:
            raise cfgmod.ConfigError("single-stage estimation needs p = q = 1 to evaluate the known G")
        g = true_G(data.x[:, 0], ec.dgp)
        tau = None if ec.trim_bound is None else (np.abs(data.x[:, 0]) <= ec.trim_bound)
        est = single_stage_estimate(data, g, tau, grid)
        n_degenerate = 0
    else:
        est, fit = two_stage_estimate(data, ec.first_stage, grid, return_fit=True)
        n_degenerate = fit.n_degenerate

    report = {
        "method": "single" if ec.first_stage is None else ec.first_stage.method.value,
        "N": data.n,
        "b11": est.estimate.b11,
        "btilde": list(est.estimate.btilde),
        "score": est.score_value,
        "argmax_set_size": len(est.argmax_set),
        "n_effective": est.n_effective,
        "n_trimmed": est.n_trimmed,
        "n_degenerate": n_degenerate,
    }
    print(f"N            {data.n}")
    print(f"b11          {est.estimate.b11:+d}")
    print(f"btilde       {', '.join(f'{v:.6g}' for v in est.estimate.btilde)}")
    print(f"score        {est.score_value:.6g}")
    print(f"argmax size  {len(est.argmax_set)}")
    print(f"trimmed      {est.n_trimmed}")

    if ec.subsampling:
        if ec.first_stage is None:
            raise cfgmod.ConfigError("subsampling requires a first stage (method ols or kernel)")
        sub = subsampling_ci(data, ec.first_stage, grid, ec.m, ec.B, ec.level, ec.seed)
        report["subsampling"] = {
            "m": sub.m, "B": sub.B, "level": sub.level, "n_failed": sub.n_failed,
            "lower": list(sub.lower), "upper": list(sub.upper),
        }
        for j, (lo, hi) in enumerate(zip(sub.lower, sub.upper), start=1):
            print(f"CI[{j}] {sub.level:.0%}  [{lo:.6g}, {hi:.6g}]  (m={sub.m}, B={sub.B})")

    out = _out_dir(args.out)
    _write(_dump_json, out / "estimate.json", report)
    return EXIT_OK


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def kernel_diagnostics(spec: KernelSpec | None = None, step: float = 1e-3) -> dict:
    """Coefficients, constraint residuals and Simpson moments on [-12, 12]."""
    spec = spec or KernelSpec.multigauss8(1.0)
    u = np.linspace(-12.0, 12.0, int(round(24.0 / step)) + 1)
    k = eval_kernel8(u, spec)
    moments = {0: float(simpson(k, x=u))}
    for l in (1, 2, 3):
        moments[2 * l] = float(simpson(u ** (2 * l) * k, x=u))
    res = constraint_residuals(spec.a, spec.b)
    ok = (
        max(res) < CONSTRAINT_TOL
        and abs(moments[0] - SQRT_2PI) < MOMENT_TOL
        and all(abs(moments[m]) < MOMENT_TOL for m in (2, 4, 6))
    )
    return {"a": spec.a, "b": spec.b, "residuals": res, "moments": moments, "ok": ok}


def cmd_kernelcheck(args) -> int:
    diag = kernel_diagnostics()
    print("a         " + ", ".join(f"{v:.6f}" for v in diag["a"]))
    print("b         " + ", ".join(f"{v:.6f}" for v in diag["b"]))
    for name, r in zip(("sum a - 1", "sum a b^2", "sum a b^4", "sum a b^6"), diag["residuals"]):
        print(f"{name:<10}{r:.3e}")
    for m, v in diag["moments"].items():
        print(f"int u^{m} K  {v:.3e}" if m else f"int K      {v:.12f}  (sqrt(2 pi) = {SQRT_2PI:.12f})")
    print("OK" if diag["ok"] else "FAIL: tolerance breached")
    return EXIT_OK if diag["ok"] else EXIT_COMPUTE


def cmd_export(args) -> int:
    cp = cfgmod.load(args.config, "export")
    dgp, n, seed = cfgmod.export_from(cp)
    if args.seed is not None:
        seed = args.seed
    data = draw_sample(dgp, n, seed)
    out = _out_dir(args.out)
    _write(dio.write_dataset_csv, out / "dataset.csv", data)
    print(f"wrote {n} observations to {out / 'dataset.csv'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twostage-maxscore",
        description="Two-stage maximum score estimation and Monte Carlo studies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a Monte Carlo study")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, help="worker processes, 0 = all cores")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate from a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("kernelcheck", help="verify the 8th-order kernel constants")
    p.set_defaults(func=cmd_kernelcheck)

    p = sub.add_parser("export-dgp", help="draw one dataset and write it as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "threads", None) is not None and args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except _OutputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (cfgmod.ConfigError, dio.DatasetFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
