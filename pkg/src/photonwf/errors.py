"""Exception types raised across the package."""


class PhotonError(Exception):
    """Base class for all package errors."""


class SingularGauge(PhotonError):
    """The wavevector lies inside the singular cone around +/-I."""


class ZeroWavevector(PhotonError):
    """|k| is below the grid's zero-wavevector threshold."""


class GridError(PhotonError, ValueError):
    """Invalid grid parameters, or a grid that is mostly masked."""


class TransversalityViolated(PhotonError):
    """A vector wavefunction has a component along its wavevector."""


class PacketTouchesBoundary(PhotonError):
    """A packet is not negligible on the boundary of its grid."""


class PacketTouchesSingularCone(PhotonError):
    """A packet is not negligible at masked (singular) grid points."""


class IncompatibleGauge(PhotonError):
    """Operators or states declared in different Berry gauges were combined."""


class ZeroIntensity(PhotonError):
    """A polarization quantity was requested at a dark point."""


class ConfigError(PhotonError, ValueError):
    """A run configuration failed validation."""
