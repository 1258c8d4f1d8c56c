"""Finite-scale topological and measure-theoretic pressure estimators for
nonautonomous dynamical systems on finite metric-space discretizations."""

from .measure import (
    DiscreteMeasure,
    LocalPressureProfile,
    TestFunctionFamily,
    bernoulli_measure,
    default_family,
    empirical_measure,
    local_pressure,
)
from .pressure import (
    CapacityPressure,
    ClassicalPressure,
    PackingPressure,
    PesinPressure,
    PressureEstimate,
    capacity_pressure,
    classical_pressure,
    critical_value,
    packing_pressure,
    pesin_pressure,
    relationship_report,
)
from .space import BowenBall, MetricSpace, PointSet, bowen_ball, bowen_dist, bowen_rows
from .systems import (
    MapSequence,
    Potential,
    System,
    birkhoff_sum,
    builtin_system,
    compose,
)

__version__ = "0.1.0"

__all__ = [
    "MetricSpace",
    "PointSet",
    "BowenBall",
    "bowen_dist",
    "bowen_rows",
    "bowen_ball",
    "MapSequence",
    "Potential",
    "System",
    "compose",
    "birkhoff_sum",
    "builtin_system",
    "PressureEstimate",
    "critical_value",
    "classical_pressure",
    "capacity_pressure",
    "pesin_pressure",
    "packing_pressure",
    "relationship_report",
    "ClassicalPressure",
    "CapacityPressure",
    "PesinPressure",
    "PackingPressure",
    "DiscreteMeasure",
    "TestFunctionFamily",
    "LocalPressureProfile",
    "bernoulli_measure",
    "default_family",
    "local_pressure",
    "empirical_measure",
    "__version__",
]
