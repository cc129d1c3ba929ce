from map_stability.metrics.stability import (
    presence,
    loc_stability,
    shape_stability,
    instance_stability,
    one_sided_stability,
    aggregate,
    InstanceStability,
    ClassSummary,
    StabilityReport,
)

from map_stability.metrics.precision import (
    chamfer_ap,
    interpolated_ap,
    PrecisionReport,
)
