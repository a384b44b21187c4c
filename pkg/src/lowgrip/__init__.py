"""Emergency-maneuver selection for a small ground vehicle on low-grip terrain.

Ground-parameter estimators (friction, soil cohesion and shear angle), a
sensor-fusion observer, per-maneuver distance regressions and a
deterministic plant simulator used to generate and check training data.
"""

from .core import (
    DataError,
    Deformable,
    HardSurface,
    LowgripError,
    ManeuverId,
    ManeuverOutcome,
    NumericalError,
    Scenario,
    SensorFrame,
    VehicleParams,
)

__version__ = "0.1.0"
