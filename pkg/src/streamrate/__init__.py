"""streamrate: rate-recovery bounds and simulators for zero-delay streaming
of Markov sources over burst-erasure channels."""

from .errors import (
    ConvergenceError,
    InfeasibleDistortionError,
    NumericalError,
    PrecisionError,
    ValidationError,
)
from .gauss_markov import (
    GmBounds,
    GmConfig,
    TestChannel,
    compute_bounds,
    eta_multi,
    finite_t_lower,
    gamma_single,
    high_res_rate,
    kalman_steady_sigma,
    lower_bound_single,
    naive_wz_rate,
    rate_upper_multi,
    rate_upper_single,
    riccati_prediction_error,
    solve_test_channel_single,
)
from .markov import (
    LosslessBounds,
    MarkovChain,
    binary_symmetric_chain,
    conditional_entropy_lag,
    is_symmetric,
    lossless_bounds,
    multiterminal_sum_rate,
    stationary_distribution,
    window_conditional_entropy,
)
from .oracle import (
    ErasurePattern,
    GaussianSystem,
    VerificationReport,
    conditional_variance,
    decode_mmse,
    decode_rate,
    enumerate_multi_burst,
    verify_exchange_inequalities,
    verify_multi_burst_worst_case,
    verify_single_burst_worst_case,
    worst_multi_burst,
)
from .sim import (
    BinningConfig,
    BinningResult,
    BurstSweepReport,
    SimConfig,
    StreamResult,
    simulate_binning,
    simulate_gm_stream,
    sweep_burst_position,
)
from .sliding import (
    BaselineRates,
    DecodeReport,
    DistortionVector,
    LayerPlan,
    baseline_rates,
    decodability_check,
    layer_plan,
    rate_recovery,
    reduce_window,
)

__version__ = "0.1.0"
