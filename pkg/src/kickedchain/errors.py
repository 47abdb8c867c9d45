"""Exception types shared across the package."""


class SimulationError(Exception):
    """Base class for all kickedchain errors."""


class CapacityError(SimulationError):
    """Requested system size exceeds the supported range."""


class DimensionError(SimulationError):
    """Array or state dimensions do not match the declared chain size."""


class ConsistencyError(SimulationError):
    """A numerical invariant was violated (indicates corrupted data)."""


class CheckpointMismatchError(SimulationError):
    """Checkpoint on disk belongs to a different run configuration."""


class ConfigError(SimulationError):
    """Run configuration is invalid or incomplete."""
