"""Scenario configuration, clutter-ring geometry, and waveform initializers.

Configs are JSON documents with top-level groups ``radar``, ``timing``,
``target``, ``clutter``, ``noise``, ``bands``, ``sectors``, ``solver`` and
``init``.  Angles are degrees in files and radians internally.  Band caps are
given in dB and converted to linear energies on parse.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .waveform import Waveform

SPEED_OF_LIGHT = 299792458.0

ALGORITHMS = ("dk_admm", "mm_admm")
INIT_KINDS = ("lfm", "random_ce", "file")


class ConfigError(ValueError):
    """Raised when a scenario document is malformed or violates an invariant."""


@dataclass(frozen=True)
class TargetSpec:
    azimuth_rad: float
    normalized_doppler: float
    amplitude: float = 1.0
    range_m: float = 12728.0


@dataclass(frozen=True)
class ClutterSpec:
    n_rings: int = 0                 # half-count: 2 * n_rings + 1 iso-range rings
    n_patches_per_ring: int = 0
    patch_power: Any = 1.0           # scalar or (2P+1) x N_c nested sequence
    doppler_uncertainty: Any = 0.0   # scalar or table, fraction of the PRF


@dataclass(frozen=True)
class BandSpec:
    f_lo: float
    f_hi: float
    cap_db: float

    @property
    def cap(self) -> float:
        """Allowed in-band energy on a linear scale."""
        return 10.0 ** (self.cap_db / 10.0)


@dataclass(frozen=True)
class SectorSpec:
    theta_lo_rad: float
    theta_hi_rad: float


@dataclass(frozen=True)
class SolverSpec:
    algorithm: str = "dk_admm"
    penalty: float = 4.0             # consensus penalty, must exceed 2
    admm_tol: float = 5e-10
    admm_max_iter: int = 1000
    inner_tol: float = 3e-3          # ratio-update relative stop
    outer_tol: float = 3e-4          # cyclic relative SINR stop
    mm_inner_max_iter: int = 100
    seed: int = 0
    cd_sweeps: int = 1
    mm_steps: int = 1
    dk_max_iter: int = 100
    max_outer_iter: int = 100


@dataclass(frozen=True)
class InitSpec:
    kind: str = "lfm"
    chirp_rate: float = 0.0          # Hz/s, used by the lfm kind
    path: str | None = None          # waveform CSV, used by the file kind


@dataclass(frozen=True)
class ScenarioConfig:
    n_tx: int
    n_rx: int
    n_pulses: int
    code_length: int
    d_tx: float = 0.5
    d_rx: float = 0.5
    wavelength: float = 0.3
    altitude: float = 9000.0
    platform_speed: float = 75.0
    prf: float = 1000.0
    sample_rate: float = 800e3
    total_energy: float = 1.0
    papr_bound: float = 0.0          # 0 in the constructor means "energy only" (rho = L)
    target: TargetSpec = field(default_factory=lambda: TargetSpec(0.0, 0.0))
    clutter: ClutterSpec = field(default_factory=ClutterSpec)
    noise_power: float = 1.0
    bands: tuple[BandSpec, ...] = ()
    sectors: tuple[SectorSpec, ...] = ()
    solver: SolverSpec = field(default_factory=SolverSpec)
    init: InitSpec = field(default_factory=InitSpec)

    def __post_init__(self):
        if self.papr_bound == 0.0:
            object.__setattr__(self, "papr_bound", float(self.code_length))
        _validate(self)

    @property
    def per_antenna_energy(self) -> float:
        return self.total_energy / self.n_tx

    @property
    def n_clutter_patches(self) -> int:
        return (2 * self.clutter.n_rings + 1) * self.clutter.n_patches_per_ring


@dataclass(frozen=True)
class ClutterPatch:
    ring_index: int                  # p in [-P, P]
    patch_index: int                 # k in [1, N_c]
    azimuth_rad: float
    mean_doppler: float              # normalized, wrapped into [-0.5, 0.5)
    doppler_spread: float
    power: float


def wrap_doppler(f: float) -> float:
    """Wrap a normalized Doppler frequency into [-0.5, 0.5)."""
    return float(np.mod(f + 0.5, 1.0) - 0.5)


def _validate(cfg: ScenarioConfig) -> None:
    sol = cfg.solver
    if cfg.n_tx < 1 or cfg.n_rx < 1 or cfg.n_pulses < 1 or cfg.code_length < 1:
        raise ConfigError("array sizes, pulse count and code length must be positive")
    if not 1.0 <= cfg.papr_bound <= cfg.code_length * cfg.n_tx:
        # the sector-constrained mode bounds the PAPR over all L * N_t samples
        if cfg.papr_bound < 1.0:
            raise ConfigError("radar.papr_bound: PAPR bound below 1")
        raise ConfigError("radar.papr_bound must not exceed the code length")
    if not cfg.sectors and cfg.papr_bound > cfg.code_length:
        raise ConfigError("radar.papr_bound must not exceed the code length")
    if cfg.total_energy <= 0:
        raise ConfigError("radar.total_energy must be positive")
    if cfg.noise_power <= 0:
        raise ConfigError("noise.noise_power must be positive")
    if cfg.sample_rate <= 0 or cfg.prf <= 0 or cfg.wavelength <= 0:
        raise ConfigError("timing values must be positive")
    if sol.penalty <= 2.0:
        raise ConfigError("solver.penalty must exceed 2")
    for name, value in (("admm_tol", sol.admm_tol), ("inner_tol", sol.inner_tol),
                        ("outer_tol", sol.outer_tol)):
        if value <= 0:
            raise ConfigError(f"solver.{name} must be positive")
    if sol.algorithm not in ALGORITHMS:
        raise ConfigError(f"solver.algorithm must be one of {ALGORITHMS}")
    if cfg.init.kind not in INIT_KINDS:
        raise ConfigError(f"init.kind must be one of {INIT_KINDS}")
    if cfg.init.kind == "file" and not cfg.init.path:
        raise ConfigError("init.path is required when init.kind is 'file'")
    if abs(cfg.target.normalized_doppler) > 0.5:
        raise ConfigError("target doppler must lie in [-0.5, 0.5]")
    for i, band in enumerate(cfg.bands):
        if not (0.0 <= band.f_lo < band.f_hi <= 1.0):
            raise ConfigError(f"bands[{i}]: need 0 <= f_lo < f_hi <= 1")
    for i, sec in enumerate(cfg.sectors):
        if not (-math.pi / 2 <= sec.theta_lo_rad < sec.theta_hi_rad <= math.pi / 2):
            raise ConfigError(f"sectors[{i}]: need -90 <= theta_lo < theta_hi <= 90 deg")
    if cfg.sectors and len(cfg.sectors) != len(cfg.bands):
        raise ConfigError("sectors must pair one-to-one with bands")
    if cfg.clutter.n_rings < 0 or cfg.clutter.n_patches_per_ring < 0:
        raise ConfigError("clutter counts must be non-negative")
    _resolve_table(cfg.clutter.patch_power, cfg.clutter, "patch_power")
    _resolve_table(cfg.clutter.doppler_uncertainty, cfg.clutter, "doppler_uncertainty")
    for i, a in enumerate(cfg.bands):
        for b in cfg.bands[i + 1:]:
            if a.f_lo < b.f_hi and b.f_lo < a.f_hi:
                warnings.warn("scenario has overlapping stopbands", stacklevel=2)
                break


def _resolve_table(value, clutter: ClutterSpec, name: str) -> np.ndarray:
    """Broadcast a scalar, or validate a (2P+1) x N_c table."""
    rings = 2 * clutter.n_rings + 1
    cols = clutter.n_patches_per_ring
    if np.isscalar(value):
        if value < 0:
            raise ConfigError(f"clutter.{name} must be non-negative")
        return np.full((rings, cols), float(value))
    table = np.asarray(value, dtype=float)
    if table.shape != (rings, cols):
        raise ConfigError(
            f"clutter.{name} table must have shape ({rings}, {cols}), got {table.shape}")
    if np.any(table < 0):
        raise ConfigError(f"clutter.{name} must be non-negative")
    return table


# ---------------------------------------------------------------------------
# parsing

_REQUIRED = object()


def _pick(group: Mapping, group_name: str, key: str, default=_REQUIRED):
    if key in group:
        return group[key]
    if default is _REQUIRED:
        raise ConfigError(f"missing required field {group_name}.{key}")
    return default


def parse_config(document: str | Mapping[str, Any]) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a JSON string or mapping."""
    if isinstance(document, str):
        try:
            tree = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config document: {exc}") from exc
    else:
        tree = dict(document)
    if not isinstance(tree, Mapping):
        raise ConfigError("config document must be a JSON object")

    known = {"radar", "timing", "target", "clutter", "noise", "bands",
             "sectors", "solver", "init"}
    unknown = set(tree) - known
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    radar = tree.get("radar", {})
    timing = tree.get("timing", {})
    target = tree.get("target", {})
    clutter = tree.get("clutter")
    noise = tree.get("noise", {})
    solver = tree.get("solver", {})
    init = tree.get("init", {})

    code_length = int(_pick(timing, "timing", "code_length"))

    doppler = target.get("normalized_doppler")
    speed = target.get("speed")
    wavelength = float(_pick(radar, "radar", "wavelength", 0.3))
    prf = float(_pick(timing, "timing", "prf", 1000.0))
    if doppler is None and speed is None:
        raise ConfigError("target needs either normalized_doppler or speed")
    if doppler is not None and speed is not None:
        raise ConfigError("target takes normalized_doppler or speed, not both")
    if doppler is None:
        doppler = wrap_doppler(2.0 * float(speed) / (wavelength * prf))

    target_spec = TargetSpec(
        azimuth_rad=math.radians(float(_pick(target, "target", "azimuth_deg"))),
        normalized_doppler=float(doppler),
        amplitude=float(_pick(target, "target", "amplitude", 1.0)),
        range_m=float(_pick(target, "target", "range_m", 12728.0)),
    )

    if clutter is None:
        clutter_spec = ClutterSpec()
    else:
        power = _pick(clutter, "clutter", "patch_power", 1.0)
        spread = _pick(clutter, "clutter", "doppler_uncertainty", 0.0)
        clutter_spec = ClutterSpec(
            n_rings=int(_pick(clutter, "clutter", "n_rings", 0)),
            n_patches_per_ring=int(_pick(clutter, "clutter", "n_patches_per_ring")),
            patch_power=_as_table_or_scalar(power),
            doppler_uncertainty=_as_table_or_scalar(spread),
        )

    bands = tuple(
        BandSpec(f_lo=float(_pick(b, f"bands[{i}]", "f_lo")),
                 f_hi=float(_pick(b, f"bands[{i}]", "f_hi")),
                 cap_db=float(_pick(b, f"bands[{i}]", "cap_db")))
        for i, b in enumerate(tree.get("bands", []) or [])
    )
    sectors = tuple(
        SectorSpec(theta_lo_rad=math.radians(float(_pick(s, f"sectors[{i}]", "theta_lo_deg"))),
                   theta_hi_rad=math.radians(float(_pick(s, f"sectors[{i}]", "theta_hi_deg"))))
        for i, s in enumerate(tree.get("sectors", []) or [])
    )

    defaults = SolverSpec()
    solver_spec = SolverSpec(
        algorithm=str(_pick(solver, "solver", "algorithm", defaults.algorithm)),
        penalty=float(_pick(solver, "solver", "penalty", defaults.penalty)),
        admm_tol=float(_pick(solver, "solver", "admm_tol", defaults.admm_tol)),
        admm_max_iter=int(_pick(solver, "solver", "admm_max_iter", defaults.admm_max_iter)),
        inner_tol=float(_pick(solver, "solver", "inner_tol", defaults.inner_tol)),
        outer_tol=float(_pick(solver, "solver", "outer_tol", defaults.outer_tol)),
        mm_inner_max_iter=int(_pick(solver, "solver", "mm_inner_max_iter",
                                    defaults.mm_inner_max_iter)),
        seed=int(_pick(solver, "solver", "seed", defaults.seed)),
        cd_sweeps=int(_pick(solver, "solver", "cd_sweeps", defaults.cd_sweeps)),
        mm_steps=int(_pick(solver, "solver", "mm_steps", defaults.mm_steps)),
        dk_max_iter=int(_pick(solver, "solver", "dk_max_iter", defaults.dk_max_iter)),
        max_outer_iter=int(_pick(solver, "solver", "max_outer_iter",
                                 defaults.max_outer_iter)),
    )
    init_spec = InitSpec(
        kind=str(_pick(init, "init", "kind", "lfm")),
        chirp_rate=float(_pick(init, "init", "chirp_rate", 0.0)),
        path=init.get("path"),
    )

    return ScenarioConfig(
        n_tx=int(_pick(radar, "radar", "n_tx")),
        n_rx=int(_pick(radar, "radar", "n_rx")),
        n_pulses=int(_pick(timing, "timing", "n_pulses")),
        code_length=code_length,
        d_tx=float(_pick(radar, "radar", "d_tx", 0.5)),
        d_rx=float(_pick(radar, "radar", "d_rx", 0.5)),
        wavelength=wavelength,
        altitude=float(_pick(radar, "radar", "altitude", 9000.0)),
        platform_speed=float(_pick(radar, "radar", "platform_speed", 75.0)),
        prf=prf,
        sample_rate=float(_pick(timing, "timing", "sample_rate", 800e3)),
        total_energy=float(_pick(radar, "radar", "total_energy", 1.0)),
        papr_bound=float(_pick(radar, "radar", "papr_bound", float(code_length))),
        target=target_spec,
        clutter=clutter_spec,
        noise_power=float(_pick(noise, "noise", "noise_power", 1.0)),
        bands=bands,
        sectors=sectors,
        solver=solver_spec,
        init=init_spec,
    )


def _as_table_or_scalar(value):
    if np.isscalar(value):
        return float(value)
    return tuple(tuple(float(x) for x in row) for row in value)


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# clutter geometry

def build_clutter_geometry(cfg: ScenarioConfig) -> list[ClutterPatch]:
    """Lay out the iso-range clutter rings.

    Each of the 2P+1 rings carries N_c patches with azimuths uniform over the
    forward sector [-pi/2, pi/2).  The mean Doppler of a patch follows the
    side-looking platform-motion model: 2 v_a sin(theta) cos(phi_p) / (lambda
    f_r), with phi_p the depression angle of ring p obtained from the platform
    altitude and the ring slant range (target range plus p range bins).
    """
    spec = cfg.clutter
    if spec.n_patches_per_ring == 0:
        return []
    power = _resolve_table(spec.patch_power, spec, "patch_power")
    spread = _resolve_table(spec.doppler_uncertainty, spec, "doppler_uncertainty")
    n_c = spec.n_patches_per_ring
    azimuths = -0.5 * math.pi + math.pi * np.arange(n_c) / n_c
    range_bin = SPEED_OF_LIGHT / (2.0 * cfg.sample_rate)
    doppler_gain = 2.0 * cfg.platform_speed / (cfg.wavelength * cfg.prf)

    patches = []
    for p in range(-spec.n_rings, spec.n_rings + 1):
        slant = cfg.target.range_m + p * range_bin
        if slant < cfg.altitude:
            raise ConfigError(
                f"ring {p} slant range {slant:.1f} m is below the platform altitude")
        sin_dep = cfg.altitude / slant
        cos_dep = math.sqrt(max(0.0, 1.0 - sin_dep * sin_dep))
        for k in range(n_c):
            theta = float(azimuths[k])
            doppler = wrap_doppler(doppler_gain * math.sin(theta) * cos_dep)
            patches.append(ClutterPatch(
                ring_index=p,
                patch_index=k + 1,
                azimuth_rad=theta,
                mean_doppler=doppler,
                doppler_spread=float(spread[p + spec.n_rings, k]),
                power=float(power[p + spec.n_rings, k]),
            ))
    return patches


# ---------------------------------------------------------------------------
# initial waveforms

def initial_waveform(cfg: ScenarioConfig) -> Waveform:
    """Produce the starting code matrix selected by the ``init`` group.

    The chirped initializer deliberately ignores the spectral masks; the
    design loop is expected to pull it into the feasible set.  Per-antenna
    energy is exact by construction for the generated kinds.
    """
    n, L = cfg.n_tx, cfg.code_length
    amplitude = math.sqrt(cfg.total_energy / (L * n))
    if cfg.init.kind == "lfm":
        t = np.arange(L) / cfg.sample_rate
        phase = math.pi * cfg.init.chirp_rate * t * t
        row = amplitude * np.exp(1j * phase)
        return Waveform(np.tile(row, (n, 1)))
    if cfg.init.kind == "random_ce":
        rng = np.random.default_rng(cfg.solver.seed)
        phases = rng.normal(0.0, math.pi, size=(n, L))
        return Waveform(amplitude * np.exp(1j * phases))
    if cfg.init.kind == "file":
        from .io import read_waveform_csv
        wf = read_waveform_csv(cfg.init.path)
        if wf.codes.shape != (n, L):
            raise ConfigError(
                f"waveform file has shape {wf.codes.shape}, expected {(n, L)}")
        return wf
    raise ConfigError(f"unknown init kind {cfg.init.kind!r}")
