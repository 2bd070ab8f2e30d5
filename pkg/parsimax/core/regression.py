from dataclasses import dataclass
import logging
from typing import List, Optional, Sequence
import numpy as np
from parsimax.exc import DimensionMismatch, NotPositiveDefinite, RankDeficient
from .data import Dataset, pairwise_cross
from .linalg import SymMatrix, certify_pd, solve_spd
from .streams import ordered_map


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    residuals: np.ndarray
    gram: SymMatrix  # n^-1 design'design, reused by the covariance formulas

    @property
    def regressor_count(self) -> int:
        return self.coefficients.shape[0]

    @property
    def rss(self) -> float:
        return float(np.sum(self.residuals ** 2))

    @property
    def last_coefficient(self) -> float:
        return float(self.coefficients[-1])


def ols(design: np.ndarray, y: np.ndarray, index: Optional[int] = None) -> OlsFit:
    """
    Least squares through the normal equations n^-1 W'W theta = n^-1 W'y.
    The Gram matrix must pass certify_pd; `index` labels the design in errors.
    """
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if design.ndim != 2 or design.shape[0] != y.shape[0]:
        raise DimensionMismatch(f'design {design.shape} does not match y of length {y.shape[0]}')
    n = y.shape[0]

    gram = SymMatrix(pairwise_cross(design, design) / n)
    certificate = certify_pd(gram)
    if not certificate.is_positive_definite:
        raise RankDeficient(index, f'min eigenvalue of the Gram matrix is {certificate.min_eigenvalue!r}')

    moment = pairwise_cross(design, y[:, None]) / n
    try:
        coefficients = solve_spd(gram, moment, which='Gram matrix').reshape(-1)
    except NotPositiveDefinite as err:
        raise RankDeficient(index, str(err)) from err

    residuals = y - design @ coefficients
    coefficients.setflags(write=False)
    residuals.setflags(write=False)
    return OlsFit(coefficients, residuals, gram)


def parsimonious_fits(d: Dataset, workers: int = 1) -> List[OlsFit]:
    """Fits y on [Z, x_i] for every key regressor; output follows regressor order"""
    logging.debug(f'Fitting {d.h} parsimonious regressions on n={d.n}, p={d.p}')
    return ordered_map(lambda i: ols(d.parsimonious_design(i), d.y, index=i), range(d.h), workers)


def parsimonious_betas(fits: Sequence[OlsFit]) -> np.ndarray:
    return np.array([f.last_coefficient for f in fits])


def restricted_fit(d: Dataset) -> OlsFit:
    """The regression under H0: y on Z only. Its residuals are the common u-tilde"""
    return ols(d.z, d.y)


def full_fit(d: Dataset) -> OlsFit:
    """y on [Z X]; coefficients are ordered (a-hat, b-hat)"""
    return ols(d.design, d.y)
