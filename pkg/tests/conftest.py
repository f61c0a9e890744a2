import json
from pathlib import Path

import numpy as np
import pytest

from stapwave import parse_config

REPO = Path(__file__).resolve().parents[1]
CONFIGS = REPO / "configs"


def scaled_document(**overrides):
    """The scaled experiment scenario as a plain dict, override-friendly."""
    with open(CONFIGS / "scaled.json", "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for key, value in overrides.items():
        group, _, field = key.partition(".")
        if field:
            doc.setdefault(group, {})[field] = value
        else:
            doc[group] = value
    return doc


def scaled_config(**overrides):
    return parse_config(scaled_document(**overrides))


def tiny_document(seed=0, **overrides):
    """A very small random scenario for solver property tests."""
    rng = np.random.default_rng(seed)
    f_lo = float(rng.uniform(0.1, 0.6))
    doc = {
        "radar": {"n_tx": 2, "n_rx": 2, "d_tx": float(rng.uniform(0.5, 2.0)),
                  "d_rx": 0.5, "wavelength": 0.3, "altitude": 9000.0,
                  "platform_speed": float(rng.uniform(50.0, 120.0)),
                  "total_energy": 1.0, "papr_bound": float(rng.choice([1.0, 2.0, 8.0]))},
        "timing": {"n_pulses": 2, "prf": 1000.0, "code_length": 8,
                   "sample_rate": 800e3},
        "target": {"azimuth_deg": float(rng.uniform(-25.0, 25.0)),
                   "normalized_doppler": float(rng.uniform(-0.4, 0.4)),
                   "range_m": 12728.0},
        "clutter": {"n_rings": 1, "n_patches_per_ring": 8,
                    "patch_power": float(rng.uniform(1.0, 30.0))},
        "noise": {"noise_power": 1.0},
        "bands": [{"f_lo": f_lo, "f_hi": f_lo + float(rng.uniform(0.05, 0.15)),
                   "cap_db": -20.0}],
        "solver": {"penalty": 5.0, "admm_tol": 1e-7, "admm_max_iter": 600,
                   "dk_max_iter": 25, "max_outer_iter": 25, "seed": int(seed)},
        "init": {"kind": "random_ce"},
    }
    for key, value in overrides.items():
        group, _, field = key.partition(".")
        if field:
            doc.setdefault(group, {})[field] = value
        else:
            doc[group] = value
    return doc


def tiny_config(seed=0, **overrides):
    return parse_config(tiny_document(seed, **overrides))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_unit_energy(rng, size, energy=1.0):
    vec = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return vec * np.sqrt(energy) / np.linalg.norm(vec)
