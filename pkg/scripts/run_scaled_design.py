#!/usr/bin/env python3
"""Run one joint design from a config and summarize the outcome.

Example:
    python3 scripts/run_scaled_design.py configs/scaled.json --out out/scaled
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stapwave import audit, cyclic_design, load_config, space_frequency_design
from stapwave.io import write_filter_csv, write_trace_csv, write_waveform_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config")
    parser.add_argument("--out", default="out/run")
    parser.add_argument("--algorithm", choices=["dk_admm", "mm_admmm", "mm_admm"])
    args = parser.parse_args()

    cfg = load_config(args.config)
    design = space_frequency_design if cfg.sectors else cyclic_design
    result = design(cfg, algorithm=args.algorithm)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_waveform_csv(out / "waveform.csv", result.waveform)
    write_filter_csv(out / "filter.csv", result.filter, cfg.n_pulses, cfg.n_rx)
    write_trace_csv(out / "trace.csv", result.trace)

    print(f"algorithm        : {result.algorithm} ({result.mode})")
    print(f"baseline SINR    : {result.baseline_sinr_db:9.4f} dB")
    print(f"final SINR       : {result.final_sinr_db:9.4f} dB")
    print(f"outer iterations : {len(result.trace.outer_rows())}")
    print(f"converged        : {result.converged}   flags: {list(result.flags) or 'none'}")
    report = audit(cfg, result.waveform, result.mode)
    print(report.format_text())
    print(f"outputs in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
