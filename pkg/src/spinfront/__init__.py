"""Correlation-front dynamics for open spin chains.

Computes end-to-end correlation measures (correlation functions, mutual
information, classical correlation, quantum discord, entanglement of
formation) for a flipped spin propagating along a chain, and extracts the
generalized propagation velocity from start-up-time scans, including its
sudden switch as the chain grows.
"""

__version__ = "0.1.0"

from .chain import (
    AmplitudeVector,
    ChainSpec,
    InitialState,
    Model,
    ModeTable,
    amplitudes,
    build_mode_table,
    end_amplitudes,
    end_amplitude_series,
    evolve_full,
    rwa_spectral_comparison,
)
from .measures import (
    CorrelationSample,
    EndPairState,
    cf_xx,
    cf_zz,
    classical_correlation,
    concurrence,
    end_pair_state,
    entanglement_of_formation,
    mutual_information,
    quantum_discord,
    sample_all,
)
from .analysis import (
    PeakFit,
    PeakOrder,
    StartupScan,
    VelocityEstimate,
    arrival_peaks,
    detect_switch,
    extract_peaks,
    fit_peak_scaling,
    scan_startup,
    scan_startup_multi,
    startup_time,
    velocity,
)

__all__ = [
    "__version__",
    "AmplitudeVector", "ChainSpec", "InitialState", "Model", "ModeTable",
    "amplitudes", "build_mode_table", "end_amplitudes",
    "end_amplitude_series", "evolve_full", "rwa_spectral_comparison",
    "CorrelationSample", "EndPairState", "cf_xx", "cf_zz",
    "classical_correlation", "concurrence", "end_pair_state",
    "entanglement_of_formation", "mutual_information", "quantum_discord",
    "sample_all",
    "PeakFit", "PeakOrder", "StartupScan", "VelocityEstimate",
    "arrival_peaks", "detect_switch", "extract_peaks", "fit_peak_scaling",
    "scan_startup", "scan_startup_multi", "startup_time", "velocity",
]
