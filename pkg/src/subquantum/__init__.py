"""Classical simulator of two-slit interference built from ballistically
spreading Gaussian channels, with a quantum-mechanical cross-check."""

from .doubleslit import FieldGrid, GridSpec, PhaseRamp, SlitConfig, average_current, intensity, sample_grid
from .errors import (
    ConfigError,
    DegenerateDensity,
    DomainTooSmall,
    ParseError,
    QuadratureUnresolved,
    StabilityViolation,
    SubquantumError,
    UndefinedSplit,
    UnsupportedConfiguration,
    ValidationError,
)
from .packet import PacketParams, PhysicalConstants

__version__ = "0.1.0"

__all__ = [
    "PhysicalConstants",
    "PacketParams",
    "SlitConfig",
    "PhaseRamp",
    "GridSpec",
    "FieldGrid",
    "intensity",
    "average_current",
    "sample_grid",
    "SubquantumError",
    "ConfigError",
    "ParseError",
    "ValidationError",
    "DegenerateDensity",
    "QuadratureUnresolved",
    "StabilityViolation",
    "DomainTooSmall",
    "UndefinedSplit",
    "UnsupportedConfiguration",
]
