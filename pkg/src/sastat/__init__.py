"""Linear-time agglomerative spatial autocorrelation over reusable merge orders.

The statistic replays a precomputed agglomeration order over a feature,
tracking the within-cluster sum of squares in constant time per merge;
classical Moran/Geary baselines, order builders, synthetic generators,
a saturation-curve fitter, and an experiment harness round out the
package.
"""

from .baselines import (
    GlobalStat,
    NullSummary,
    WeightScheme,
    geary_c,
    moran_i,
    permutation_null,
)
from .errors import (
    CoincidentPointsError,
    DataError,
    FitError,
    MatrixCapError,
    OrderFormatError,
    SaStatError,
    ZeroVarianceError,
)
from .fitting import SigmoidFit, fit_log_sigmoid
from .linkage import (
    DEFAULT_MATRIX_CAP,
    average_linkage,
    build_order,
    furthest_linkage,
    kdtree_order,
    median_linkage,
    single_linkage,
)
from .model import (
    Dataset,
    FeatureVector,
    MergeEvent,
    MergeOrder,
    PointSet,
    read_dataset,
    read_merge_order,
    write_dataset,
    write_merge_order,
)
from .stats import (
    ClusterStat,
    SaResult,
    SaTrace,
    compute_sa,
    compute_sa_multi,
    merge_update,
    null_expectation,
    trace_export,
)
from .synth import GenSpec, disk_average, gen_iid, grid_sample, subsample, uniform_coords

__version__ = "0.1.0"
