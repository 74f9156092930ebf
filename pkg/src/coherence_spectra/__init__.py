"""Coherence, superposition and particle loss in vacuum-preserving channels."""

from .channel import (
    KrausChannel,
    LossChannelParams,
    LpcReport,
    apply_channel,
    check_exclusion_inequality,
    choi_matrix,
    from_loss_params,
    is_vacuum_preserving,
    lpc,
    random_vacuum_preserving_channel,
)
from .dynamics import JcConfig, ThreeLevelConfig, evolve, extract_field_channel
from .errors import (
    CoherenceError,
    DimensionError,
    NotVacuumPreservingError,
    PhysicsError,
    VacuumCompatibilityError,
    ValidationError,
)
from .interferometer import max_visibility_scan, simulate_mach_zehnder
from .linear_optics import (
    AncillaState,
    ModeUnitary,
    beam_splitter,
    convex_mixture,
    from_contraction,
    induced_channel,
    vacuum_preservation_test,
)
from .spectra import SpectrumRecord, SweepConfig, run_sweep, write_csv

__version__ = "0.1.0"

__all__ = [
    "KrausChannel",
    "LossChannelParams",
    "LpcReport",
    "apply_channel",
    "check_exclusion_inequality",
    "choi_matrix",
    "from_loss_params",
    "is_vacuum_preserving",
    "lpc",
    "random_vacuum_preserving_channel",
    "JcConfig",
    "ThreeLevelConfig",
    "evolve",
    "extract_field_channel",
    "CoherenceError",
    "DimensionError",
    "NotVacuumPreservingError",
    "PhysicsError",
    "VacuumCompatibilityError",
    "ValidationError",
    "max_visibility_scan",
    "simulate_mach_zehnder",
    "AncillaState",
    "ModeUnitary",
    "beam_splitter",
    "convex_mixture",
    "from_contraction",
    "induced_channel",
    "vacuum_preservation_test",
    "SpectrumRecord",
    "SweepConfig",
    "run_sweep",
    "write_csv",
]
