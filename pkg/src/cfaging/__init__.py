"""Cell-free massive MIMO uplink with channel aging and pilot contamination.

Closed-form spectral efficiencies for cell-free (LSFD and matched-filter
combining) and small-cell deployments, a Monte Carlo oracle to check them,
and a harness for drop-based CDF experiments.
"""

from .aging import AgingProfile, EstimationStats, correlation_profile, estimation_variance
from .harness import (
    CDFResult,
    ExperimentSpec,
    ValidationReport,
    load_config,
    percentile,
    run_drops,
    sweep_doppler,
    validate,
    velocity_to_normalized_doppler,
)
from .scenario import (
    NetworkScenario,
    PilotAssignment,
    PilotPolicy,
    PowerMode,
    SimConfig,
    assign_pilots,
    generate_scenario,
    path_loss,
)
from .se_engine import (
    Combining,
    SEReport,
    WeightVector,
    evaluate,
    lsfd_weights,
    se_cf,
    se_smallcell,
    select_best_ap,
    sinr_cf,
)
from .specfun import bessel_j0, exp_e1_scaled, exp_integral_e1

__version__ = "0.1.0"
