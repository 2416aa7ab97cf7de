"""Rate-distortion regions under logarithmic loss for two correlated sources."""

from .discrete import (
    AuxJoint,
    Dist,
    JointPmf,
    binary_entropy,
    conditional_entropy,
    dsbs,
    entropy,
    mutual_information,
    posterior,
    validate_pmf,
)
from .errors import LoglossError, NonConvergenceWarning, ValidationError
from .logloss import (
    DistortionSplit,
    Reproduction,
    ReproductionSeq,
    decompose_distortion,
    distortion_typical_set,
    erasure_rd,
    expected_distortion,
    optimal_estimator,
    sequence_distortion,
    symbol_distortion,
)
from .region_jd import (
    JdQuery,
    jd_boundary,
    jd_contains_closed,
    jd_contains_lp,
    jd_corner_points,
    rd_logloss,
    sw_region_contains,
    wz_logloss,
)
from .region_xd import XdQuery, xd_contains, xd_grid_oracle, xd_min_hxu, xd_tradeoff_curve

__version__ = "0.1.0"
