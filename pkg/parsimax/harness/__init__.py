from .dgp import (
    DgpConfig,
    ErrorKind,
    ErrorModel,
    RegressorKind,
    RegressorModel,
    exact_covariance,
    exact_moments,
    gaussian_moments,
    generate,
)
from .experiments import (
    ExperimentReport,
    consistency_experiment,
    pd_failure_census,
    power_curve,
    power_experiment,
    replication_data,
    replication_seed,
    size_experiment,
)
from .identities import IdentityReport, bordered_witness, verify_identities
from .populations import atom_count, rademacher_population, random_moment_pair, random_pd, random_population
from .wald import WaldResult, chi2_sf, robust_b_covariance, wald_baseline
