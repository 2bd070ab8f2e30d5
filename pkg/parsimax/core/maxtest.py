from dataclasses import dataclass
from enum import Enum, unique
import logging
from typing import Optional, Sequence, Tuple, Union
import numpy as np
from parsimax.exc import ConfigError, EmptyBetas, NotPositiveDefinite, ParsimaxError, StageFailure
from .covariance import GhmPairing, estimate_v_ghm, estimate_v_restricted
from .data import CovarianceEstimate, Dataset
from .linalg import SymMatrix, cholesky, sym_eigen
from .regression import parsimonious_betas, parsimonious_fits
from .streams import DRAW_STREAM, block_sizes, check_seed, ordered_map, stream


@unique
class Estimator(Enum):
    GHM_BLOCKWISE = 'ghm_blockwise'
    RESTRICTED_CLOSED_FORM = 'restricted_closed_form'
    # V-hat when it is certified PD, V-tilde otherwise
    GHM_THEN_RESTRICTED = 'ghm_then_restricted'


@unique
class SamplerPolicy(Enum):
    CHOLESKY_THEN_EIGEN = 'cholesky_then_eigen'
    EIGEN_ONLY = 'eigen_only'


@unique
class SamplerKind(Enum):
    CHOLESKY = 'cholesky'
    EIGEN = 'eigen'


@dataclass(frozen=True)
class MaxTestConfig:
    draws: int = 10000
    seed: int = 0
    estimator: Estimator = Estimator.RESTRICTED_CLOSED_FORM
    sampler_policy: SamplerPolicy = SamplerPolicy.CHOLESKY_THEN_EIGEN
    plus_one: bool = False  # (1 + #) / (M + 1) instead of # / M
    ghm_pairing: GhmPairing = GhmPairing.SQUARED_OWN

    def __post_init__(self):
        if int(self.draws) < 1:
            raise ConfigError(f'draws must be at least 1, got {self.draws}')
        check_seed(self.seed)


@dataclass(frozen=True)
class MaxTestResult:
    betas: np.ndarray
    statistic: float
    p_value: float
    covariance: CovarianceEstimate
    sampler_used: SamplerKind
    draws: int
    exceedances: int
    n: int


CovarianceLike = Union[CovarianceEstimate, SymMatrix]


def _sym(v: CovarianceLike) -> SymMatrix:
    return v.v if isinstance(v, CovarianceEstimate) else v


def max_statistic(betas: Sequence[float], n: int) -> float:
    """T_n = max_i (sqrt(n) * beta_ni)^2"""
    betas = np.asarray(betas, dtype=float).reshape(-1)
    if betas.shape[0] == 0:
        raise EmptyBetas('max statistic needs at least one coefficient')
    if n < 1:
        raise ConfigError(f'sample size must be positive, got {n}')
    return float(np.max((np.sqrt(n) * betas) ** 2))


def sampling_factor(v: CovarianceLike,
                    policy: SamplerPolicy = SamplerPolicy.CHOLESKY_THEN_EIGEN) -> Tuple[np.ndarray, SamplerKind]:
    """
    A matrix F with F F' = v (or its PSD part): the Cholesky factor when allowed and
    it succeeds, else U diag(sqrt(max(lambda, 0))).
    """
    m = _sym(v)
    if policy == SamplerPolicy.CHOLESKY_THEN_EIGEN:
        try:
            return cholesky(m, which='V').lower, SamplerKind.CHOLESKY
        except NotPositiveDefinite:
            logging.info('Cholesky factorisation of V failed, falling back to eigendecomposition')

    values, vectors = sym_eigen(m)
    clipped = np.clip(values, 0.0, None)
    if np.any(values < 0):
        logging.debug(f'Clipped {int(np.sum(values < 0))} negative eigenvalue(s), smallest {values[-1]!r}')
    return vectors * np.sqrt(clipped), SamplerKind.EIGEN


def _max_sq_draws(factor: np.ndarray, draws: int, seed: int, workers: Optional[int]) -> np.ndarray:
    sizes = block_sizes(draws)
    h = factor.shape[0]

    def block(k: int) -> np.ndarray:
        normals = stream(seed, DRAW_STREAM, k).standard_normal((sizes[k], h))
        return np.max((normals @ factor.T) ** 2, axis=1)

    return np.concatenate(ordered_map(block, range(len(sizes)), workers))


def sample_max_sq(v: CovarianceLike, draws: int, seed: int,
                  policy: SamplerPolicy = SamplerPolicy.CHOLESKY_THEN_EIGEN,
                  workers: Optional[int] = 1) -> np.ndarray:
    """M draws of max_i N_i^2 with N ~ N(0, v); deterministic given (seed, draws)"""
    factor, _ = sampling_factor(v, policy)
    return _max_sq_draws(factor, int(draws), check_seed(seed), workers)


def _simulate(statistic: float, v: CovarianceLike, cfg: MaxTestConfig,
              workers: Optional[int]) -> Tuple[float, int, SamplerKind]:
    if not statistic >= 0:
        raise ConfigError(f'statistic must be nonnegative, got {statistic!r}')
    factor, kind = sampling_factor(v, cfg.sampler_policy)
    values = _max_sq_draws(factor, cfg.draws, cfg.seed, workers)
    exceedances = int(np.count_nonzero(values > statistic))
    if cfg.plus_one:
        p_value = (1 + exceedances) / (cfg.draws + 1)
    else:
        p_value = exceedances / cfg.draws
    return p_value, exceedances, kind


def simulate_pvalue(statistic: float, v: CovarianceLike, cfg: MaxTestConfig,
                    workers: Optional[int] = 1) -> float:
    """#{j : T^(j) > statistic} / M, strict inequality"""
    return _simulate(statistic, v, cfg, workers)[0]


def select_covariance(d: Dataset, cfg: MaxTestConfig, fits=None) -> CovarianceEstimate:
    if cfg.estimator == Estimator.RESTRICTED_CLOSED_FORM:
        return estimate_v_restricted(d)

    ghm = estimate_v_ghm(d, fits, cfg.ghm_pairing)
    if cfg.estimator == Estimator.GHM_THEN_RESTRICTED and not ghm.certificate.is_positive_definite:
        logging.info(f'GHM estimate is {ghm.certificate.status.value}; using the restricted estimate')
        return estimate_v_restricted(d)
    return ghm


def run_max_test(d: Dataset, cfg: MaxTestConfig, workers: Optional[int] = None) -> MaxTestResult:
    stage = 'parsimonious_fits'
    try:
        fits = parsimonious_fits(d, workers)
        betas = parsimonious_betas(fits)
        statistic = max_statistic(betas, d.n)

        stage = 'covariance'
        covariance = select_covariance(d, cfg, fits)

        stage = 'simulate_pvalue'
        p_value, exceedances, kind = _simulate(statistic, covariance, cfg, workers)
    except ParsimaxError as err:
        raise StageFailure(stage, err) from err

    logging.debug(f'T={statistic!r} p={p_value!r} via {kind.value} ({covariance.method.value})')
    return MaxTestResult(
        betas=betas,
        statistic=statistic,
        p_value=p_value,
        covariance=covariance,
        sampler_used=kind,
        draws=cfg.draws,
        exceedances=exceedances,
        n=d.n,
    )
