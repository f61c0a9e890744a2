"""Joint low-PAPR transmit-code and receive-filter design for airborne MIMO
radar operating next to licensed spectrum users."""

__version__ = "0.1.0"

from .analysis import AuditReport, ResponseMap, audit, doppler_robustness, response_map
from .design import (DesignResult, DesignTrace, TraceRow, cyclic_design,
                     space_frequency_design)
from .filters import mvdr_filter, optimal_sinr, output_sinr, to_db
from .scenario import (ClutterPatch, ConfigError, ScenarioConfig,
                       build_clutter_geometry, initial_waveform, load_config,
                       parse_config)
from .spectral import (band_matrix, esd, feasibility_precheck, leakage,
                       sector_matrix, space_frequency_matrix)
from .waveform import Waveform

__all__ = [
    "AuditReport", "ClutterPatch", "ConfigError", "DesignResult", "DesignTrace",
    "ResponseMap", "ScenarioConfig", "TraceRow", "Waveform", "audit",
    "band_matrix", "build_clutter_geometry", "cyclic_design",
    "doppler_robustness", "esd", "feasibility_precheck", "initial_waveform",
    "leakage", "load_config", "mvdr_filter", "optimal_sinr", "output_sinr",
    "parse_config", "response_map", "sector_matrix", "space_frequency_design",
    "space_frequency_matrix", "to_db", "__version__",
]
