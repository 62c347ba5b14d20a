"""Cascaded biexciton-exciton photon emission from a quantum dot in a two-mode cavity.

The package simulates the diamond-shaped four-level system (ground, two
fine-structure-split excitons, biexciton) coupled to a pair of degenerate,
polarization-resolved cavity modes.  From the dissipative dynamics it
computes two-time correlation functions on a nonuniform t-tau grid and
reduces them to photon figures of merit: visibility, Hong-Ou-Mandel
indistinguishability, the two-photon polarization density matrix and its
concurrence.  A Purcell-factor bridge converts between cavity quantities
(Q, mode energy, Purcell enhancement) and model parameters (g, kappa), and
a sweep harness drives deterministic, resumable parameter scans.

Internal units: energies in micro-eV, times in ps, hbar = 658.2119569 ueV ps.
"""

from .units import HBAR_UEV_PS, rate_of, energy_of
from .config import (
    ElectronicParams,
    CavityParams,
    PulseParams,
    GridParams,
    DephasingParams,
    SystemConfig,
    ValidatedConfig,
    validate,
    config_from_json,
    config_to_json,
    config_hash,
)
from .errors import (
    InvalidField,
    GridMismatch,
    ZeroEmission,
    OutOfRange,
    StepUnstable,
    DegenerateRidge,
    CorruptCheckpoint,
    TailWarning,
)
from .hilbert import HilbertSpace, Level, build_space, projector, annihilator, emission_channel
from .liouville import Liouvillian, Trajectory, build_liouvillian, build_hamiltonian, lindblad_term, collapse_set, propagate, pulse_envelope
from .twotime import TwoTimeGrid, CorrelationMap, CorrelationEngine, double_integral
from .metrics import (
    PhotonMetrics,
    TwoPhotonDensityMatrix,
    MetricsOptions,
    visibility,
    analytic_visibility,
    indistinguishability,
    two_photon_dm,
    concurrence,
    metrics_bundle,
)
from .purcell import PurcellPoint, RidgeFit, purcell_factor, coupling_from_purcell, kappa_for_purcell, ridge_fit

__all__ = [
    "HBAR_UEV_PS",
    "rate_of",
    "energy_of",
    "ElectronicParams",
    "CavityParams",
    "PulseParams",
    "GridParams",
    "DephasingParams",
    "SystemConfig",
    "ValidatedConfig",
    "validate",
    "config_from_json",
    "config_to_json",
    "config_hash",
    "InvalidField",
    "GridMismatch",
    "ZeroEmission",
    "OutOfRange",
    "StepUnstable",
    "DegenerateRidge",
    "CorruptCheckpoint",
    "TailWarning",
    "HilbertSpace",
    "Level",
    "build_space",
    "projector",
    "annihilator",
    "emission_channel",
    "Liouvillian",
    "Trajectory",
    "build_liouvillian",
    "build_hamiltonian",
    "lindblad_term",
    "collapse_set",
    "propagate",
    "pulse_envelope",
    "TwoTimeGrid",
    "CorrelationMap",
    "CorrelationEngine",
    "double_integral",
    "PhotonMetrics",
    "TwoPhotonDensityMatrix",
    "MetricsOptions",
    "visibility",
    "analytic_visibility",
    "indistinguishability",
    "two_photon_dm",
    "concurrence",
    "metrics_bundle",
    "PurcellPoint",
    "RidgeFit",
    "purcell_factor",
    "coupling_from_purcell",
    "kappa_for_purcell",
    "ridge_fit",
]

__version__ = "0.1.0"
