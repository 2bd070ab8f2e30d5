from dataclasses import dataclass
from typing import Optional
import numpy as np
import scipy.special
from parsimax.core import Dataset, OlsFit, SymMatrix, full_fit, inverse_spd, solve_spd
from parsimax.core.data import pairwise_cross


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    p_value: float
    df: int


def chi2_sf(statistic: float, df: int) -> float:
    """Upper chi-square tail through the regularized upper incomplete gamma Q(df/2, x/2)"""
    return float(scipy.special.gammaincc(df / 2.0, statistic / 2.0))


def robust_b_covariance(d: Dataset, fit: Optional[OlsFit] = None) -> np.ndarray:
    """
    Heteroscedasticity-robust asymptotic covariance of sqrt(n) * b-hat from the full
    regression: the (b, b) block of Gamma^-1 Lambda Gamma^-1 with full-model residuals.
    """
    fit = fit if fit is not None else full_fit(d)
    design = d.design
    lam = pairwise_cross(design * (fit.residuals ** 2)[:, None], design) / d.n
    gamma_inv = inverse_spd(fit.gram, which='Gram matrix').entries
    sandwich = gamma_inv @ lam @ gamma_inv
    return sandwich[d.p:, d.p:]


def wald_baseline(d: Dataset) -> WaldResult:
    """W = n b' C^-1 b with C the robust covariance; comparison arm for the max test"""
    fit = full_fit(d)
    b = fit.coefficients[d.p:]
    if not np.any(b):
        return WaldResult(0.0, 1.0, d.h)
    covariance = SymMatrix(robust_b_covariance(d, fit))
    statistic = float(d.n * b @ solve_spd(covariance, b, which='robust covariance of b'))
    return WaldResult(statistic, chi2_sf(statistic, d.h), d.h)
