"""
Asymptotic covariance V of sqrt(n) * beta-hat across the parsimonious regressions.

Two representations are implemented side by side:

- blockwise: V[i, j] = g_i Lambda_ij g_j', with g_i the last row of Gamma_ii^-1;
  the selection matrix R is never built, only the (p+1)-th rows are used;
- closed form: V = D^-1 (Omega_zx' Omega_zz Omega_zx + Lambda_xx
  - Lambda_zx' Lambda_zz^-1 Lambda_zx) D^-1.

They agree whenever every Lambda_ij shares the same Lambda_zz block (population
moments, or the common restricted residuals). GHM's estimator uses different
residuals per regressor and only has the blockwise form.
"""
from dataclasses import dataclass
from enum import Enum, unique
import logging
from typing import List, Optional, Sequence
import numpy as np
from parsimax.exc import ConfigError, DimensionMismatch, NonPositiveDii, NotPositiveDefinite, RankDeficient
from .data import CovarianceEstimate, CovarianceMethod, Dataset, MomentSet, pairwise_cross, sample_moments
from .linalg import EPS, SymMatrix, inverse_spd, solve_spd
from .regression import OlsFit, parsimonious_fits, restricted_fit


@dataclass(frozen=True)
class OmegaPair:
    omega_zx: np.ndarray  # [Gamma_zx; Lambda_zx], 2p x h
    omega_zz: SymMatrix  # [[G^-1 L G^-1, -G^-1], [-G^-1, L^-1]] on the zz blocks

    def omega_iz(self, i: int) -> np.ndarray:
        return self.omega_zx[:, i]


@dataclass(frozen=True)
class DMatrix:
    diag: np.ndarray  # d_ii = gamma_ii - gamma_iz' Gamma_zz^-1 gamma_iz

    def scale(self, m: np.ndarray) -> np.ndarray:
        """D^-1 m D^-1"""
        inv = 1.0 / self.diag
        return m * inv[:, None] * inv[None, :]


@unique
class GhmPairing(Enum):
    SQUARED_OWN = 'squared_own'  # Lambda_ij weighted by u_it^2
    CROSS_PRODUCT = 'cross_product'  # Lambda_ij weighted by u_it * u_jt


def _zz_projection(gamma: MomentSet) -> np.ndarray:
    """Gamma_zz^-1 Gamma_zx; column i is Gamma_zz^-1 gamma_iz"""
    return solve_spd(gamma.zz, gamma.zx, which='Gamma_zz')


def build_omega(gamma: MomentSet, lam: MomentSet) -> OmegaPair:
    gzz_inv = inverse_spd(gamma.zz, which='Gamma_zz').entries
    lzz_inv = inverse_spd(lam.zz, which='Lambda_zz').entries
    omega_zz = np.block([
        [gzz_inv @ lam.zz.entries @ gzz_inv, -gzz_inv],
        [-gzz_inv, lzz_inv],
    ])
    return OmegaPair(np.vstack([gamma.zx, lam.zx]), SymMatrix(omega_zz))


def build_d(gamma: MomentSet, projection: Optional[np.ndarray] = None) -> DMatrix:
    if projection is None:
        projection = _zz_projection(gamma)
    gamma_ii = np.diag(gamma.xx.entries)
    diag = gamma_ii - np.sum(gamma.zx * projection, axis=0)
    floor = (gamma.p + 1) * EPS * np.abs(gamma_ii)
    for i, value in enumerate(diag):
        if not value > floor[i]:
            raise NonPositiveDii(i, float(value))
    return DMatrix(diag)


def g_vectors(gamma: MomentSet) -> np.ndarray:
    """
    Rows g_i = [-d_ii^-1 gamma_iz' Gamma_zz^-1, d_ii^-1], the last row of Gamma_ii^-1.
    One Gamma_zz solve serves every regressor.
    """
    projection = _zz_projection(gamma)
    d = build_d(gamma, projection)
    g = np.empty((gamma.h, gamma.p + 1))
    g[:, :gamma.p] = -projection.T / d.diag[:, None]
    g[:, gamma.p] = 1.0 / d.diag
    return g


def schur_xx(moments: MomentSet, which: str = 'Lambda_zz') -> SymMatrix:
    """Lambda_xx - Lambda_zx' Lambda_zz^-1 Lambda_zx, the Schur complement w.r.t. Lambda_zz"""
    solved = solve_spd(moments.zz, moments.zx, which=which)
    return SymMatrix(moments.xx.entries - moments.zx.T @ solved)


def omega_term(omega: OmegaPair) -> np.ndarray:
    return omega.omega_zx.T @ omega.omega_zz.entries @ omega.omega_zx


def bordered_inverse_matrix(a: SymMatrix, b: np.ndarray) -> SymMatrix:
    """[[B'AB, B'], [B, A^-1]]; positive semidefinite for any PD A"""
    b = np.array(b, dtype=float, ndmin=2)
    if b.shape[0] != a.order:
        raise DimensionMismatch(f'B needs {a.order} rows to match A, got {b.shape[0]}')
    a_inv = inverse_spd(a, which='A').entries
    return SymMatrix(np.block([
        [b.T @ a.entries @ b, b.T],
        [b, a_inv],
    ]))


def v_closed_form(gamma: MomentSet, lam: MomentSet,
                  method: CovarianceMethod = CovarianceMethod.POPULATION_CLOSED_FORM) -> CovarianceEstimate:
    omega = build_omega(gamma, lam)
    d = build_d(gamma)
    middle = omega_term(omega) + schur_xx(lam).entries
    return CovarianceEstimate(SymMatrix(d.scale(middle)), method)


def _g_vectors_per_block(gamma: MomentSet) -> np.ndarray:
    try:
        return g_vectors(gamma)
    except NonPositiveDii as err:
        raise NotPositiveDefinite('Gamma_ii', err.index) from err


def v_blockwise(gamma: MomentSet, lam: MomentSet,
                method: CovarianceMethod = CovarianceMethod.POPULATION_BLOCKWISE) -> CovarianceEstimate:
    g = _g_vectors_per_block(gamma)
    h = gamma.h
    v = np.empty((h, h))
    for i in range(h):
        for j in range(i, h):
            v[i, j] = v[j, i] = g[i] @ lam.block(i, j) @ g[j]
    return CovarianceEstimate(SymMatrix(v), method)


def v_homoscedastic(gamma: MomentSet, sigma2: float) -> CovarianceEstimate:
    """sigma^2 D^-1 (Gamma_xx - Gamma_zx' Gamma_zz^-1 Gamma_zx) D^-1"""
    if not sigma2 > 0:
        raise ConfigError(f'sigma2 must be positive, got {sigma2!r}')
    d = build_d(gamma)
    v = d.scale(schur_xx(gamma, 'Gamma_zz').entries) * sigma2
    return CovarianceEstimate(SymMatrix(v), CovarianceMethod.HOMOSCEDASTIC)


def v_full_model_homoscedastic(gamma: MomentSet, sigma2: float) -> SymMatrix:
    """Asymptotic covariance of sqrt(n) * b-hat from the full regression, for contrast"""
    if not sigma2 > 0:
        raise ConfigError(f'sigma2 must be positive, got {sigma2!r}')
    return inverse_spd(schur_xx(gamma, 'Gamma_zz'), which='Schur complement').scaled(sigma2)


def _restricted_moments(d: Dataset):
    fit = restricted_fit(d)
    return sample_moments(d), sample_moments(d, fit.residuals ** 2)


def estimate_v_restricted(d: Dataset) -> CovarianceEstimate:
    """
    V-tilde: the closed form on sample moments, Lambda weighted by the common
    restricted residuals. Zero residuals are kept as zero weights.
    """
    gamma, lam = _restricted_moments(d)
    estimate = v_closed_form(gamma, lam, CovarianceMethod.RESTRICTED_CLOSED_FORM)
    if not estimate.certificate.is_positive_definite:
        logging.debug(f'Restricted estimate not PD: {estimate.certificate}')
    return estimate


def estimate_v_restricted_blockwise(d: Dataset) -> CovarianceEstimate:
    gamma, lam = _restricted_moments(d)
    return v_blockwise(gamma, lam, CovarianceMethod.RESTRICTED_BLOCKWISE)


def _residual_matrix(fits: Sequence[OlsFit]) -> np.ndarray:
    return np.column_stack([f.residuals for f in fits])


def _pair_weights(residuals: np.ndarray, i: int, j: int, pairing: GhmPairing) -> np.ndarray:
    if pairing == GhmPairing.SQUARED_OWN:
        return residuals[:, i] ** 2
    return residuals[:, i] * residuals[:, j]


def ghm_lambda_block(d: Dataset, fits: Sequence[OlsFit], i: int, j: int,
                     pairing: GhmPairing = GhmPairing.SQUARED_OWN) -> np.ndarray:
    """Lambda-hat_ij = n^-1 sum_t w_t X_it X_jt' with per-regression residual weights"""
    w = _pair_weights(_residual_matrix(fits), i, j, pairing)
    return pairwise_cross(d.parsimonious_design(i) * w[:, None], d.parsimonious_design(j)) / d.n


def estimate_v_ghm(d: Dataset, fits: Optional[List[OlsFit]] = None,
                   pairing: GhmPairing = GhmPairing.SQUARED_OWN) -> CovarianceEstimate:
    """
    V-hat: entry (i, j) is g_i Lambda-hat_ij g_j'. Since g_i Lambda-hat_ij g_j' equals
    n^-1 sum_t w_t (g_i . X_it)(g_j . X_jt), the entries come from one product of
    per-regressor scores. No positive definiteness is enforced.
    """
    fits = fits if fits is not None else parsimonious_fits(d)
    if len(fits) != d.h:
        raise DimensionMismatch(f'expected {d.h} parsimonious fits, got {len(fits)}')

    try:
        g = g_vectors(sample_moments(d))
    except NonPositiveDii as err:
        raise RankDeficient(err.index, 'x is collinear with Z') from err

    scores = d.z @ g[:, :d.p].T + d.x * g[:, d.p]
    residuals = _residual_matrix(fits)
    if pairing == GhmPairing.SQUARED_OWN:
        v = pairwise_cross(scores * residuals ** 2, scores) / d.n
    else:
        weighted = scores * residuals
        v = pairwise_cross(weighted, weighted) / d.n

    estimate = CovarianceEstimate(SymMatrix(v), CovarianceMethod.GHM_BLOCKWISE)
    if not estimate.certificate.is_positive_definite:
        logging.warning(f'GHM estimate is {estimate.certificate.status.value}, '
                        f'min eigenvalue {estimate.certificate.min_eigenvalue!r}')
    return estimate
