"""Nearly unstable integer-valued AR(1) processes.

Simulation by binomial thinning, exact transition probabilities and log
likelihood ratios around the unit root, efficient and least-squares
estimators of the local parameter, unit-root tests, the Poisson limit
experiment, and a reproducible Monte Carlo harness.

The hot kernels run on a compiled extension when it is available and fall
back to pure Python otherwise; see inar1.backend.
"""

from .backend import backend_name, using_compiled
from .backend import kernels as _kernels
from .dist import (
    InnovationSpec,
    ValidationReport,
    moments,
    pmf,
    sample,
    spec_from_dict,
    spec_from_flag,
    spec_to_dict,
    validate_regularity,
)
from .errors import (
    ConfigError,
    DegeneratePathError,
    InvalidSpecError,
    ParameterError,
    UndefinedRatioError,
)
from .inference import (
    TestOutcome,
    df_statistic,
    df_test,
    efficient_estimate,
    efficient_test,
    ols_estimates,
    plugin_estimates,
    semiparam_estimate,
)
from .likelihood import (
    LogLikelihoodReport,
    binom_pmf,
    binom_tail_bound,
    binom_tail_factor2,
    loglik,
    loglr_approx,
    loglr_exact,
    loglr_leading,
    transition_logprob,
    transition_prob,
    transition_split,
)
from .limitexp import (
    LimitExperiment,
    exact_tv_vs_poisson,
    limit_efficient_estimator,
    limit_experiment,
    limit_lr,
    limit_test_power,
    limit_variance_bound,
    poisson_binomial_pmf,
    poisson_pmf,
    serfling_bound,
)
from .montecarlo import (
    ExperimentConfig,
    SummaryRow,
    Threshold,
    check_thresholds,
    derive_seed,
    empirical_tv,
    run_replications,
    summarize_estimator,
)
from .process import (
    LocalParam,
    Path,
    SimulationRecord,
    down_moves,
    expected_path_sum,
    expected_path_sum_at_unit_root,
    load_path,
    save_path,
    simulate_path,
    simulate_path_recorded,
    stability_event,
    theoretical_moments,
    thin,
)

RandomStream = _kernels.RandomStream

__version__ = "0.1.0"
