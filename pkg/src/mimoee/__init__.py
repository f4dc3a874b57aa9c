"""Energy efficiency of multi-antenna transmissions, measured as goodput
per Joule: closed forms for single-receive-antenna links, Monte Carlo
estimation for general MIMO, large-system Gaussian approximations, and
search tools for the optimal diagonal precoder.
"""

__version__ = "0.1.0"

from .core import (
    BracketFailureError,
    ChannelSample,
    DimensionMismatchError,
    GprCurve,
    GridTooLargeError,
    LengthMismatchError,
    McEstimate,
    NonPositiveFieldError,
    NotMisoError,
    NotSimoError,
    NoWitnessError,
    PowerAllocation,
    SystemParams,
    ZeroPowerError,
    majorizes,
    validate_params,
)
from .montecarlo import (
    McConfig,
    gpr_mc,
    merge_estimates,
    mutual_information,
    outage_probability_mc,
    sample_channel,
    sample_channel_batch,
    upa_gpr_curve_mc,
)
from .closed_form import (
    erlang_cdf,
    erlang_survival,
    fast_efficiency_sup,
    mimo_upa_gpr_smallp,
    miso_outage,
    miso_upa_gpr,
    simo_gpr,
    simo_outage,
    siso_gpr,
    siso_outage,
    static_efficiency,
    static_efficiency_sup,
)
from .solvers import (
    MisoPrecoderSolution,
    ThresholdTable,
    miso_optimal_precoder,
    miso_upa_optimal_power,
    siso_optimal_power,
    solve_c_thresholds,
    solve_nu,
)
from .asymptotics import (
    goodput_regime_a,
    goodput_regime_b,
    goodput_regime_c,
    inflection_regime_a,
    inflection_regime_b,
    inflection_regime_c,
    q_function,
    regime_b_limits,
)
from .search import (
    ConjectureReport,
    SchurVerdict,
    SimplexGrid,
    TisoWitness,
    conjecture1_scan,
    exhaustive_best_allocation,
    maximize_upa_gpr,
    schur_extreme_snr_check,
    tiso_counterexample,
    trace_logdet_gap,
    trace_logdet_inequality_check,
    unimodality_check,
)
