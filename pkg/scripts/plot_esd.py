#!/usr/bin/env python3
"""Plot the spectra of the initializer and a designed waveform with the
stopbands shaded.

Example:
    python3 scripts/plot_esd.py configs/scaled.json out/scaled/waveform.csv --out esd.png
"""

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from stapwave import initial_waveform, load_config
from stapwave.io import read_waveform_csv
from stapwave.spectral import esd, esd_grid


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("config")
    parser.add_argument("waveform")
    parser.add_argument("--out", default="esd.png")
    args = parser.parse_args()

    cfg = load_config(args.config)
    designed = read_waveform_csv(args.waveform)
    start = initial_waveform(cfg)
    freqs = esd_grid(cfg.code_length, oversample=8)

    fig, axes = plt.subplots(cfg.n_tx, 1, figsize=(7, 2.2 * cfg.n_tx), sharex=True)
    axes = np.atleast_1d(axes)
    for n, ax in enumerate(axes):
        for wf, label, style in ((start, "initial", "C0--"), (designed, "designed", "C1-")):
            vals = esd(wf.codes[n], freqs)
            ax.plot(freqs, 10 * np.log10(np.maximum(vals, 1e-30)), style, label=label)
        for band in cfg.bands:
            ax.axvspan(band.f_lo, band.f_hi, color="0.85")
            ax.hlines(band.cap_db, band.f_lo, band.f_hi, color="r", linestyle="-.")
        ax.set_ylabel(f"antenna {n + 1} (dB)")
        ax.grid(alpha=0.3)
    axes[0].legend(loc="lower left")
    axes[-1].set_xlabel("normalized frequency")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
