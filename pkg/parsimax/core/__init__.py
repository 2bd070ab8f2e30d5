from .linalg import (
    CholeskyFactor,
    EigenDecomposition,
    PDCertificate,
    PDStatus,
    SymMatrix,
    certify_pd,
    cholesky,
    inverse_spd,
    solve_spd,
    sym_eigen,
)
from .data import (
    Atom,
    CovarianceEstimate,
    CovarianceMethod,
    Dataset,
    FinitePopulation,
    MomentSet,
    population_moments,
    sample_moments,
)
from .regression import OlsFit, full_fit, ols, parsimonious_betas, parsimonious_fits, restricted_fit
from .covariance import (
    DMatrix,
    GhmPairing,
    OmegaPair,
    build_d,
    build_omega,
    estimate_v_ghm,
    estimate_v_restricted,
    estimate_v_restricted_blockwise,
    g_vectors,
    ghm_lambda_block,
    bordered_inverse_matrix,
    omega_term,
    schur_xx,
    v_blockwise,
    v_closed_form,
    v_full_model_homoscedastic,
    v_homoscedastic,
)
from .maxtest import (
    Estimator,
    MaxTestConfig,
    MaxTestResult,
    SamplerKind,
    SamplerPolicy,
    max_statistic,
    run_max_test,
    sample_max_sq,
    sampling_factor,
    simulate_pvalue,
)
