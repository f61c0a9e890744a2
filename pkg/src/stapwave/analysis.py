"""Post-design evaluation: angle-Doppler response maps, constraint audits,
and clutter Doppler-uncertainty robustness."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .filters import mvdr_filter, output_sinr
from .model import interference_covariance, operator_at, target_response
from .scenario import ScenarioConfig, build_clutter_geometry
from .spectral import space_frequency_sectors, stop_bands
from .waveform import Waveform, papr

DB_FLOOR = -300.0

ENERGY_REL_TOL = 1e-10
PAPR_REL_TOL = 1e-10
LEAKAGE_REL_TOL = 1e-6


def _to_db(values: np.ndarray) -> np.ndarray:
    out = np.full(values.shape, DB_FLOOR)
    mask = values > 0.0
    out[mask] = 10.0 * np.log10(values[mask])
    return np.maximum(out, DB_FLOOR)


@dataclass(frozen=True)
class ResponseMap:
    """Joint angle-Doppler power response of a code/filter pair, in dB."""

    azimuth_deg: np.ndarray
    doppler: np.ndarray
    power_db: np.ndarray      # shape (azimuths, dopplers)


def default_azimuth_grid(points: int = 181) -> np.ndarray:
    return np.linspace(-90.0, 90.0, points)


def default_doppler_grid(points: int = 101) -> np.ndarray:
    return np.linspace(-0.5, 0.5, points)


def response_map(cfg: ScenarioConfig, waveform: Waveform, weights: np.ndarray,
                 azimuth_deg: np.ndarray | None = None,
                 doppler: np.ndarray | None = None) -> ResponseMap:
    """Evaluate |w^H V(theta, f) s|^2 over an angle-Doppler grid.

    The response factors per azimuth into a length-M correlation against the
    filter, after which every Doppler column is a single inner product.
    """
    azimuth_deg = default_azimuth_grid() if azimuth_deg is None else np.asarray(azimuth_deg, float)
    doppler = default_doppler_grid() if doppler is None else np.asarray(doppler, float)
    m = cfg.n_pulses
    stacked = waveform.sample_major
    pulse_steering = np.exp(2j * np.pi * np.outer(doppler, np.arange(m)))
    weights_by_pulse = weights.reshape(m, -1)

    power = np.empty((azimuth_deg.size, doppler.size))
    for i, az in enumerate(azimuth_deg):
        op = operator_at(cfg, math.radians(az), 0.0)
        snapshot = op.apply_spatial(stacked)
        correlation = weights_by_pulse.conj() @ snapshot
        power[i] = np.abs(pulse_steering @ correlation) ** 2
    return ResponseMap(azimuth_deg, doppler, _to_db(power))


# ---------------------------------------------------------------------------
# constraint audit

@dataclass(frozen=True)
class AuditEntry:
    name: str
    value: float
    limit: float
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    entries: tuple[AuditEntry, ...]
    all_pass: bool
    mode: str

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "all_pass": self.all_pass,
            "entries": [
                {"name": e.name, "value": e.value, "limit": e.limit,
                 "passed": e.passed}
                for e in self.entries
            ],
        }

    def format_text(self) -> str:
        lines = [f"audit mode: {self.mode}"]
        for e in self.entries:
            verdict = "PASS" if e.passed else "FAIL"
            lines.append(f"  {e.name}: value {e.value:.12e}  limit {e.limit:.12e}  {verdict}")
        lines.append("overall: " + ("PASS" if self.all_pass else "FAIL"))
        return "\n".join(lines)


def audit(cfg: ScenarioConfig, waveform: Waveform, mode: str | None = None
          ) -> AuditReport:
    """Exact-arithmetic check of every code constraint.

    Values are compared unrounded: energy to a 1e-10 relative window, peak
    power and cap leakage against their limits with the solver's accepted
    slack.  Sector configs are audited over the stacked code vector.
    """
    if mode is None:
        mode = "sectors" if cfg.sectors else "bands"
    entries: list[AuditEntry] = []
    if mode == "sectors":
        stacked = waveform.sample_major
        energy = float(np.vdot(stacked, stacked).real)
        entries.append(AuditEntry("energy", energy, cfg.total_energy,
                                  abs(energy - cfg.total_energy)
                                  <= ENERGY_REL_TOL * cfg.total_energy))
        peak = papr(stacked)
        entries.append(AuditEntry("papr", peak, cfg.papr_bound,
                                  peak <= cfg.papr_bound * (1.0 + PAPR_REL_TOL)))
        for k, sector in enumerate(space_frequency_sectors(cfg)):
            value = float(np.vdot(stacked, sector.matrix @ stacked).real)
            entries.append(AuditEntry(f"sector_leakage[{k}]", value, sector.cap,
                                      value <= sector.cap * (1.0 + LEAKAGE_REL_TOL)))
    else:
        target_energy = cfg.per_antenna_energy
        bands = stop_bands(cfg)
        for n, code in enumerate(waveform.codes):
            energy = float(np.vdot(code, code).real)
            entries.append(AuditEntry(f"energy[antenna {n + 1}]", energy, target_energy,
                                      abs(energy - target_energy)
                                      <= ENERGY_REL_TOL * target_energy))
            peak = papr(code)
            entries.append(AuditEntry(f"papr[antenna {n + 1}]", peak, cfg.papr_bound,
                                      peak <= cfg.papr_bound * (1.0 + PAPR_REL_TOL)))
            for k, band in enumerate(bands):
                value = float(np.vdot(code, band.matrix @ code).real)
                entries.append(AuditEntry(
                    f"leakage[antenna {n + 1}, band {k}]", value, band.cap,
                    value <= band.cap * (1.0 + LEAKAGE_REL_TOL)))
    return AuditReport(tuple(entries), all(e.passed for e in entries), mode)


# ---------------------------------------------------------------------------
# Doppler-uncertainty robustness

def doppler_robustness(cfg: ScenarioConfig, waveform: Waveform,
                       weights: np.ndarray, spread: float,
                       refilter: bool = False) -> float:
    """SINR in dB against clutter whose Doppler is smeared by ``spread``.

    With ``refilter`` the receive filter is refit to the smeared covariance;
    otherwise the supplied filter is held fixed.
    """
    if spread < 0.0:
        raise ValueError("spread must be non-negative")
    patches = [replace(p, doppler_spread=spread)
               for p in build_clutter_geometry(cfg)]
    stacked = waveform.sample_major
    cov = interference_covariance(cfg, patches, stacked)
    steering = target_response(cfg, stacked)
    if refilter:
        weights = mvdr_filter(cov, steering)
    sinr = output_sinr(weights, steering, cov, cfg.target.amplitude ** 2)
    return 10.0 * math.log10(sinr)
