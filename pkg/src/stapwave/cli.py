"""Command-line entry points.

Exit codes: 0 success (for ``evaluate``, an all-PASS audit), 2 for runs that
finish with warnings (residual stalls, precheck failures, audit failures),
1 for usage, validation, or I/O errors.
"""

from __future__ import annotations

import argparse
import datetime
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import audit, default_azimuth_grid, default_doppler_grid, response_map
from .design import DesignResult, cyclic_design, space_frequency_design
from .filters import mvdr_filter
from .io import (sha256_of_file, write_audit, write_esd_csv, write_filter_csv,
                 write_manifest, write_stca_csv, write_trace_csv,
                 write_waveform_csv)
from .model import interference_covariance, target_response
from .scenario import ConfigError, build_clutter_geometry, load_config
from .spectral import esd, esd_grid, feasibility_precheck
from .io import read_waveform_csv

DB_FLOOR = -300.0


def _workers() -> int:
    """Worker count from the environment; computation stays order-fixed."""
    raw = os.environ.get("STAPWAVE_WORKERS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"STAPWAVE_WORKERS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError("STAPWAVE_WORKERS must be at least 1")
    return value


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


def _derive_filter(cfg, waveform):
    stacked = waveform.sample_major
    patches = build_clutter_geometry(cfg)
    cov = interference_covariance(cfg, patches, stacked)
    return mvdr_filter(cov, target_response(cfg, stacked))


def cmd_design(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, seed=args.seed))
    if args.algorithm is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, algorithm=args.algorithm))
    mode = args.mode
    if mode == "sectors" and not cfg.sectors:
        print("error: --mode sectors needs sectors in the config", file=sys.stderr)
        return 1

    precheck = feasibility_precheck(cfg, mode)
    forced = False
    if not precheck.feasible:
        print(precheck.format_text(), file=sys.stderr)
        if not args.force:
            print("refusing to run an infeasible scenario (use --force to override)",
                  file=sys.stderr)
            return 2
        forced = True

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = _utc_now()
    workers = _workers()
    if mode == "sectors":
        result = space_frequency_design(cfg)
    else:
        result = cyclic_design(cfg)

    waveform_path = out / "waveform.csv"
    filter_path = out / "filter.csv"
    trace_path = out / "trace.csv"
    manifest_path = out / "manifest.json"
    write_waveform_csv(waveform_path, result.waveform)
    write_filter_csv(filter_path, result.filter, cfg.n_pulses, cfg.n_rx)
    write_trace_csv(trace_path, result.trace, every=args.trace_every)

    report = audit(cfg, result.waveform, mode)
    manifest = {
        "config_path": str(args.config),
        "config_sha256": sha256_of_file(args.config),
        "seed": cfg.solver.seed,
        "algorithm": result.algorithm,
        "mode": mode,
        "solver": {
            "penalty": cfg.solver.penalty,
            "admm_tol": cfg.solver.admm_tol,
            "admm_max_iter": cfg.solver.admm_max_iter,
            "inner_tol": cfg.solver.inner_tol,
            "outer_tol": cfg.solver.outer_tol,
        },
        "version": __version__,
        "workers": workers,
        "started_utc": started,
        "finished_utc": _utc_now(),
        "outputs": {
            "waveform": str(waveform_path),
            "filter": str(filter_path),
            "trace": str(trace_path),
        },
        "baseline_sinr_db": result.baseline_sinr_db,
        "final_sinr_db": result.final_sinr_db,
        "converged": result.converged,
        "flags": list(result.flags),
        "residual_form": result.trace.residual_form,
        "audit_all_pass": report.all_pass,
        "precheck_forced": forced,
    }
    write_manifest(manifest_path, manifest)

    print(f"baseline SINR {result.baseline_sinr_db:.4f} dB -> "
          f"final SINR {result.final_sinr_db:.4f} dB "
          f"({len(result.trace.outer_rows())} outer iterations)")
    warnings = bool(result.flags) or not result.converged or not report.all_pass or forced
    return 2 if warnings else 0


def cmd_evaluate(args) -> int:
    cfg = load_config(args.config)
    waveform = read_waveform_csv(args.waveform)
    mode = "sectors" if cfg.sectors else "bands"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    report = audit(cfg, waveform, mode)
    write_audit(out / "audit.json", out / "audit.txt", report)

    freqs = esd_grid(waveform.code_length, args.oversample)
    rows = np.array([esd(code, freqs) for code in waveform.codes])
    with np.errstate(divide="ignore"):
        rows_db = np.maximum(10.0 * np.log10(np.maximum(rows, 0.0)), DB_FLOOR)
    write_esd_csv(out / "esd.csv", freqs, rows_db)

    weights = _derive_filter(cfg, waveform)
    grid = response_map(cfg, waveform, weights)
    write_stca_csv(out / "stca.csv", grid)

    print(report.format_text())
    return 0 if report.all_pass else 2


def cmd_esd(args) -> int:
    waveform = read_waveform_csv(args.waveform)
    freqs = esd_grid(waveform.code_length, args.oversample)
    rows = np.array([esd(code, freqs) for code in waveform.codes])
    with np.errstate(divide="ignore"):
        rows_db = np.maximum(10.0 * np.log10(np.maximum(rows, 0.0)), DB_FLOOR)
    write_esd_csv(args.out, freqs, rows_db)
    print(f"wrote {args.out}")
    return 0


def cmd_stca(args) -> int:
    cfg = load_config(args.config)
    waveform = read_waveform_csv(args.waveform)
    weights = _derive_filter(cfg, waveform)
    grid = response_map(cfg, waveform, weights,
                        default_azimuth_grid(args.azimuth_points),
                        default_doppler_grid(args.doppler_points))
    write_stca_csv(args.out, grid)
    print(f"wrote {args.out}")
    return 0


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    mode = "sectors" if cfg.sectors else "bands"
    report = feasibility_precheck(cfg, mode)
    print(report.format_text())
    return 0 if report.feasible else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stapwave",
        description="Design and evaluate spectrally constrained radar code sets")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="run a joint code/filter design")
    p.add_argument("config")
    p.add_argument("--out", default="design_out", help="output directory")
    p.add_argument("--algorithm", choices=["dk_admm", "mm_admm"])
    p.add_argument("--mode", choices=["bands", "sectors"], default="bands")
    p.add_argument("--seed", type=int)
    p.add_argument("--force", action="store_true",
                   help="run even if the feasibility precheck fails")
    p.add_argument("--trace-every", type=int, default=1, dest="trace_every",
                   help="keep every Nth inner trace row")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("evaluate", help="audit a waveform against a scenario")
    p.add_argument("waveform")
    p.add_argument("config")
    p.add_argument("--out", default="evaluate_out")
    p.add_argument("--oversample", type=int, default=4)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("esd", help="export sampled spectra of a waveform")
    p.add_argument("waveform")
    p.add_argument("--out", default="esd.csv")
    p.add_argument("--oversample", type=int, default=4)
    p.set_defaults(func=cmd_esd)

    p = sub.add_parser("stca", help="export the angle-Doppler response map")
    p.add_argument("waveform")
    p.add_argument("config")
    p.add_argument("--out", default="stca.csv")
    p.add_argument("--azimuth-points", type=int, default=181)
    p.add_argument("--doppler-points", type=int, default=101)
    p.set_defaults(func=cmd_stca)

    p = sub.add_parser("check", help="feasibility precheck only")
    p.add_argument("config")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
