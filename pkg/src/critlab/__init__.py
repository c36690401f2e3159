"""critlab: Monte Carlo laboratory for critical points of random polynomials.

Sample polynomials with IID roots from a configurable measure, certify all
critical points at arbitrary precision, and statistically test convergence
of the critical-point distribution, root/critical-point pairing, and the
unit-circle determinantal limit.
"""

from .circle import (
    CoefficientVector,
    CountLaw,
    GafSample,
    circle_trial,
    count_law,
    poisson_binomial_pmf,
    power_sum_coefficients,
    sample_gaf_zeros,
)
from .classic import (
    HullCheck,
    PerturbationDemo,
    gauss_lucas_check,
    interlacing_check,
    jensen_check,
    marden_check,
    perturbation_demo,
    unity_critical_points,
)
from .errors import (
    ConfigurationError,
    DomainError,
    IndeterminateCountError,
    PoleError,
    SingularityError,
    SolverFailure,
)
from .experiment import ExperimentConfig, aggregate_reports, load_config, run_experiment
from .measures import (
    Atomic,
    ComplexGaussian,
    EnergyEstimate,
    MeasureSpec,
    RootSample,
    UniformAnnulus,
    UniformCircle,
    UniformDisk,
    UniformSegment,
    energy_estimate,
    measure_from_dict,
    potential,
    potential_quadrature,
    sample_roots,
    truncated_potential,
)
from .metrics import (
    DiscreteMeasure,
    LowerModulus,
    PairingReport,
    empirical_potential,
    ks_statistic,
    lower_modulus,
    min_gap_statistic,
    pairing_report,
    prohorov_distance,
)
from .polyroots import (
    CriticalPointSet,
    PolynomialRoots,
    RootPolynomial,
    aberth_roots,
    critical_points,
    derivative_coefficients,
    eval_log_derivative,
    rouche_ball_count,
)
from .seeds import split_seed, splitmix64

__version__ = "0.1.0"
