"""Momentum-space photon wavefunctions in a chosen Berry gauge.

Grids, triads and Berry potentials, two-component and vector
wavefunctions, the position/momentum/angular-momentum operators and their
commutator harness, position-space field synthesis, and the spin Hall
barycenter shift.
"""
from . import backend
from .errors import (
    ConfigError,
    GridError,
    IncompatibleGauge,
    PacketTouchesBoundary,
    PacketTouchesSingularCone,
    PhotonError,
    SingularGauge,
    TransversalityViolated,
    ZeroIntensity,
    ZeroWavevector,
)
from .gauge import BerryGauge, berry_potential, gauge_angle, triad_at, varpi_at
from .kgrid import Field, KGrid, build_grid
from .spinhall import SpinHallScenario, berry_phase_check, run_scenario, scan_theta
from .wavefunction import (
    TwoComponentWavefunction,
    VectorWavefunction,
    embed,
    gauge_transform,
    make_gaussian_packet,
    project,
)

__version__ = "0.1.0"

__all__ = [
    "BerryGauge", "ConfigError", "Field", "GridError", "IncompatibleGauge", "KGrid",
    "PacketTouchesBoundary", "PacketTouchesSingularCone", "PhotonError", "SingularGauge",
    "SpinHallScenario", "TransversalityViolated", "TwoComponentWavefunction",
    "VectorWavefunction", "ZeroIntensity", "ZeroWavevector", "backend", "berry_phase_check",
    "berry_potential", "build_grid", "embed", "gauge_angle", "gauge_transform",
    "make_gaussian_packet", "project", "run_scenario", "scan_theta", "triad_at", "varpi_at",
]
