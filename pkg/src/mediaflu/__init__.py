"""Media-aware deterministic influenza transmission models.

Simulates SEEIIR/SEIR dynamics with prevalence-dependent media functions,
fits them to weekly surveillance windows under box constraints, compares
media functions by corrected AIC, and reproduces media-engagement
regression analyses.
"""

from .epi import (
    DEFAULT_DT,
    MEDIA_EXPONENTIAL,
    MEDIA_INVERSE_LINEAR,
    MEDIA_INVERSE_QUADRATIC,
    MEDIA_KINDS,
    MEDIA_LINEAR,
    MEDIA_NONE,
    NO_MEDIA,
    SEEIIR,
    SEIR,
    VARIANTS,
    CompartmentState,
    EpiParams,
    FinalSize,
    MediaFunction,
    Trajectory,
    final_size,
    integrate,
    media_eval,
    peak_of,
    rhs_seeiir,
    rhs_seir,
)
from .errors import MediafluError
from .fit import (
    BoxBounds,
    FitResult,
    bounded_fit,
    finite_diff_gradient,
    fitted_weekly_series,
    multi_start_fit,
    rss_objective,
    theta_to_params,
)
from .ingest import DataTable, join_engagement, parse_csv, split_seasons, write_csv
from .mediastats import (
    PairedSeries,
    RegressionFit,
    lin_vs_quad,
    ols_fit,
    pearson,
    quad_weight_vs_severity,
    residual_series,
)
from .metrics import (
    BoxplotSummary,
    ErrorSummary,
    boxplot_summary,
    error_summary,
    final_size_error,
    moods_median_test,
    peak_timing_error,
    rms_error,
)
from .observe import (
    FitWindow,
    WeeklySeries,
    apply_window,
    initial_state,
    make_window,
    weekly_incidence,
)
from .selection import (
    AverageWeight,
    LeadTimeResult,
    ModelScore,
    aicc,
    akaike_weights,
    average_probability,
    lead_time_analysis,
    season_probabilities,
)

__version__ = "0.1.0"
