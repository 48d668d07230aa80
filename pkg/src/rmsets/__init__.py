"""Small representative subsets under the happiness / regret framework."""

from .core import (
    Dataset,
    Point,
    Selection,
    UtilityVector,
    convex_hull_2d,
    kth_best_score,
    normalize_dataset,
    score,
    skyline,
)
from .evaluation import FunctionSample, RegretReport, ahr_sample, arr_sample, khapp_grid, max_regret_lp, simplex_grid
from .reduction import ReducedDataset, ReductionConfig, map_back, reduce_additive, reduce_multiplicative
from .krms import PtasConfig, greedy_1rms, ptas_search
from .arms_sampled import greedy_ahr, sample_linear_utilities
from .smawk import MatrixOracle, check_inverse_monge, smawk_column_maxima
from .arms2d import (
    average_happiness_2d,
    build_envelope,
    compute_H,
    dual_intersection_x,
    approx_2d_arms,
    exact_2d_arms,
    happiness_integral_F,
)

__version__ = "0.1.0"
