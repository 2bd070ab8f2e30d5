from dataclasses import dataclass, replace
from enum import Enum, unique
from typing import Optional, Sequence, Tuple
import numpy as np
import scipy.signal
from parsimax.core import (
    CovarianceEstimate, Dataset, FinitePopulation, MomentSet, SymMatrix, cholesky,
    population_moments, v_closed_form,
)
from parsimax.core.streams import DATA_STREAM, check_seed, stream
from parsimax.exc import ConfigError, NotPositiveDefinite


@unique
class RegressorKind(Enum):
    IID_GAUSSIAN = 'iid_gaussian'
    AR1_GAUSSIAN = 'ar1_gaussian'


@unique
class ErrorKind(Enum):
    HOMOSCEDASTIC = 'homoscedastic'
    HETEROSCEDASTIC_SCALE = 'heteroscedastic_scale'


@dataclass(frozen=True)
class RegressorModel:
    """
    Unit-variance Gaussian regressors with common correlation rho. The AR(1) variant
    starts from the stationary distribution, so every t shares the same marginal.
    """
    kind: RegressorKind = RegressorKind.IID_GAUSSIAN
    rho: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not abs(self.rho) < 1:
            raise ConfigError(f'|rho| must be below 1, got {self.rho}')
        if not abs(self.phi) < 1:
            raise ConfigError(f'|phi| must be below 1, got {self.phi}')
        if self.kind == RegressorKind.IID_GAUSSIAN and self.phi != 0:
            raise ConfigError('phi only applies to ar1_gaussian regressors')


@dataclass(frozen=True)
class ErrorModel:
    """
    e_t = scale(z_t, x_t) * standard normal. Heteroscedastic scale is
    sqrt(intercept + sum_k c_k X_tk^2) over X_t = [z_t', x_t']'; an empty
    coefficient tuple puts 0.5 on x_1.
    """
    kind: ErrorKind = ErrorKind.HOMOSCEDASTIC
    sigma: float = 1.0
    intercept: float = 0.5
    coefficients: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigError(f'sigma must be nonnegative, got {self.sigma}')
        if self.kind == ErrorKind.HETEROSCEDASTIC_SCALE:
            if not self.intercept > 0:
                raise ConfigError('heteroscedastic intercept must be positive')
            if any(c < 0 for c in self.coefficients):
                raise ConfigError('heteroscedastic coefficients must be nonnegative')
        object.__setattr__(self, 'coefficients', tuple(float(c) for c in self.coefficients))

    def weights(self, p: int, h: int) -> np.ndarray:
        if not self.coefficients:
            c = np.zeros(p + h)
            c[p] = 0.5
            return c
        if len(self.coefficients) != p + h:
            raise ConfigError(f'need {p + h} scale coefficients, got {len(self.coefficients)}')
        return np.asarray(self.coefficients)

    def variance(self, z: np.ndarray, x: np.ndarray) -> np.ndarray:
        if self.kind == ErrorKind.HOMOSCEDASTIC:
            return np.full(z.shape[0], self.sigma ** 2)
        stacked = np.hstack([z, x])
        return self.intercept + (stacked ** 2) @ self.weights(z.shape[1], x.shape[1])


@dataclass(frozen=True)
class DgpConfig:
    n: int
    p: int
    h: int
    regressor_model: RegressorModel = RegressorModel()
    error_model: ErrorModel = ErrorModel()
    a: Tuple[float, ...] = ()
    b: Tuple[float, ...] = ()
    seed: int = 0
    intercept: bool = True
    # Draw (z, x, sigma2) from these atoms instead of the Gaussian models
    population: Optional[FinitePopulation] = None

    def __post_init__(self):
        if self.p < 1 or self.h < 1:
            raise ConfigError(f'need p >= 1 and h >= 1, got p={self.p}, h={self.h}')
        if self.n <= self.p + self.h:
            raise ConfigError(f'n must exceed p + h = {self.p + self.h}, got {self.n}')
        a = tuple(float(v) for v in self.a) or (0.0,) * self.p
        b = tuple(float(v) for v in self.b) or (0.0,) * self.h
        if len(a) != self.p or len(b) != self.h:
            raise ConfigError(f'a needs {self.p} entries and b needs {self.h}')
        if self.population is not None and (self.population.p, self.population.h) != (self.p, self.h):
            raise ConfigError('population dimensions do not match p and h')
        check_seed(self.seed)
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'b', b)

    @property
    def under_null(self) -> bool:
        return not any(self.b)

    def with_b(self, b: Sequence[float]) -> 'DgpConfig':
        return replace(self, b=tuple(b))

    def with_n(self, n: int) -> 'DgpConfig':
        return replace(self, n=n)

    @property
    def free_regressors(self) -> int:
        return (self.p - 1 if self.intercept else self.p) + self.h


def equicorrelation(order: int, rho: float) -> SymMatrix:
    return SymMatrix((1 - rho) * np.eye(order) + rho * np.ones((order, order)))


def _correlation_factor(order: int, rho: float) -> np.ndarray:
    try:
        return cholesky(equicorrelation(order, rho), which='regressor correlation').lower
    except NotPositiveDefinite:
        raise ConfigError(f'rho={rho} gives no valid correlation matrix for {order} regressors')


def _gaussian_regressors(cfg: DgpConfig, rng: np.random.Generator) -> np.ndarray:
    k = cfg.free_regressors
    factor = _correlation_factor(k, cfg.regressor_model.rho)
    model = cfg.regressor_model
    if model.kind == RegressorKind.IID_GAUSSIAN:
        return rng.standard_normal((cfg.n, k)) @ factor.T

    # Stationary start, innovations scaled to keep unit marginal variance
    start = rng.standard_normal(k) @ factor.T
    innovations = rng.standard_normal((cfg.n, k)) @ factor.T * np.sqrt(1 - model.phi ** 2)
    initial = (model.phi * start)[None, :]
    series, _ = scipy.signal.lfilter([1.0], [1.0, -model.phi], innovations, axis=0, zi=initial)
    return series


def generate(cfg: DgpConfig, rng: Optional[np.random.Generator] = None) -> Dataset:
    """y_t = z_t'a + x_t'b + e_t; deterministic given cfg.seed (or the rng passed in)"""
    rng = rng if rng is not None else stream(cfg.seed, DATA_STREAM)

    if cfg.population is not None:
        pop = cfg.population
        picks = rng.choice(pop.size, size=cfg.n, p=pop.prob)
        z, x = pop.z[picks], pop.x[picks]
        variance = pop.sigma2[picks]
    else:
        free = _gaussian_regressors(cfg, rng)
        n_free_z = cfg.p - 1 if cfg.intercept else cfg.p
        z = free[:, :n_free_z]
        if cfg.intercept:
            z = np.hstack([np.ones((cfg.n, 1)), z])
        x = free[:, n_free_z:]
        variance = cfg.error_model.variance(z, x)

    errors = np.sqrt(variance) * rng.standard_normal(cfg.n)
    y = z @ np.asarray(cfg.a) + x @ np.asarray(cfg.b) + errors
    return Dataset(y, z, x)


def gaussian_moments(cfg: DgpConfig) -> Tuple[MomentSet, MomentSet]:
    """
    Exact (Gamma, Lambda) for the Gaussian regressor models. Fourth moments of
    X = mu + W, W ~ N(0, S), come from Isserlis' theorem.
    """
    if cfg.population is not None:
        raise ConfigError('gaussian_moments does not apply to population DGPs')
    size = cfg.p + cfg.h
    offset = 1 if cfg.intercept else 0
    mu = np.zeros(size)
    s = np.zeros((size, size))
    if cfg.intercept:
        mu[0] = 1.0
    s[offset:, offset:] = equicorrelation(cfg.free_regressors, cfg.regressor_model.rho).entries
    gamma = s + np.outer(mu, mu)

    errors = cfg.error_model
    if errors.kind == ErrorKind.HOMOSCEDASTIC:
        lam = errors.sigma ** 2 * gamma
    else:
        c = errors.weights(cfg.p, cfg.h)
        lam = errors.intercept * gamma
        for k in np.flatnonzero(c):
            # E[X_k^2 X_a X_b]
            fourth = (
                mu[k] ** 2 * np.outer(mu, mu)
                + mu[k] ** 2 * s
                + 2 * mu[k] * (np.outer(mu, s[k]) + np.outer(s[k], mu))
                + s[k, k] * np.outer(mu, mu)
                + s[k, k] * s
                + 2 * np.outer(s[k], s[k])
            )
            lam = lam + c[k] * fourth

    return MomentSet.from_assembled(gamma, cfg.p), MomentSet.from_assembled(lam, cfg.p)


def exact_moments(cfg: DgpConfig) -> Tuple[MomentSet, MomentSet]:
    if cfg.population is not None:
        return population_moments(cfg.population)
    return gaussian_moments(cfg)


def exact_covariance(cfg: DgpConfig) -> CovarianceEstimate:
    """V under H0 for the DGP, from its exact moments"""
    gamma, lam = exact_moments(cfg)
    return v_closed_form(gamma, lam)
