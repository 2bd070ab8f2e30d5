from dataclasses import dataclass
from enum import Enum, unique
import logging
from typing import NamedTuple, Union
import numpy as np
import scipy.linalg
from parsimax.exc import ConvergenceFailure, DimensionMismatch, NotPositiveDefinite


EPS = np.finfo(float).eps

ArrayLike = Union[np.ndarray, list, tuple]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SymMatrix:
    """
    Dense symmetric matrix. Construction absorbs accumulation-order asymmetry
    by averaging with the transpose, so entries[i, j] == entries[j, i] exactly.
    """
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=float, ndmin=2)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f'SymMatrix needs a square matrix, got shape {m.shape}')
        if m.shape[0] < 1:
            raise DimensionMismatch('SymMatrix order must be at least 1')
        object.__setattr__(self, 'entries', _frozen((m + m.T) / 2))

    @classmethod
    def identity(cls, order: int) -> 'SymMatrix':
        return cls(np.eye(order))

    @property
    def order(self) -> int:
        return self.entries.shape[0]

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def scaled(self, factor: float) -> 'SymMatrix':
        return SymMatrix(self.entries * factor)


@dataclass(frozen=True)
class CholeskyFactor:
    lower: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


@unique
class PDStatus(Enum):
    POSITIVE_DEFINITE = 'positive_definite'
    POSITIVE_SEMIDEFINITE = 'positive_semidefinite'
    INDEFINITE = 'indefinite'


@dataclass(frozen=True)
class PDCertificate:
    status: PDStatus
    min_eigenvalue: float
    tolerance_used: float

    @property
    def is_positive_definite(self) -> bool:
        return self.status == PDStatus.POSITIVE_DEFINITE


class EigenDecomposition(NamedTuple):
    values: np.ndarray  # descending
    vectors: np.ndarray  # orthonormal columns, matching values


def cholesky(m: SymMatrix, which: str = 'matrix') -> CholeskyFactor:
    """
    Lower Cholesky factor of m. Raises NotPositiveDefinite when a squared pivot
    is at or below order * eps * max|m|, so callers can fall back to sym_eigen.
    """
    try:
        lower = scipy.linalg.cholesky(m.entries, lower=True)
    except (np.linalg.LinAlgError, ValueError) as err:
        logging.debug(f'Cholesky of {which} failed: {err}')
        raise NotPositiveDefinite(which) from err

    tolerance = m.order * EPS * m.max_abs
    pivots = np.diag(lower) ** 2
    if np.any(pivots <= tolerance):
        logging.debug(f'Cholesky of {which} hit a pivot of {pivots.min()!r}')
        raise NotPositiveDefinite(which)

    return CholeskyFactor(_frozen(lower))


def sym_eigen(m: SymMatrix) -> EigenDecomposition:
    try:
        values, vectors = scipy.linalg.eigh(m.entries)
    except np.linalg.LinAlgError as err:
        raise ConvergenceFailure(f'eigendecomposition did not converge: {err}') from err
    # eigh sorts ascending
    return EigenDecomposition(_frozen(values[::-1].copy()), _frozen(vectors[:, ::-1].copy()))


def solve_spd(m: SymMatrix, rhs: ArrayLike, which: str = 'matrix') -> np.ndarray:
    """Solves m @ x = rhs through the Cholesky factor; no explicit inverse is formed"""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != m.order:
        raise DimensionMismatch(f'{which} has order {m.order} but rhs has {rhs.shape[0]} rows')
    factor = cholesky(m, which)
    return scipy.linalg.cho_solve((factor.lower, True), rhs)


def inverse_spd(m: SymMatrix, which: str = 'matrix') -> SymMatrix:
    return SymMatrix(solve_spd(m, np.eye(m.order), which))


def certify_pd(m: SymMatrix) -> PDCertificate:
    try:
        values = scipy.linalg.eigvalsh(m.entries)
    except np.linalg.LinAlgError as err:
        raise ConvergenceFailure(f'eigenvalues did not converge: {err}') from err

    min_eigenvalue = float(values[0])
    tolerance = m.order * EPS * float(np.max(np.abs(values)))
    if min_eigenvalue > tolerance:
        status = PDStatus.POSITIVE_DEFINITE
    elif min_eigenvalue >= -tolerance:
        status = PDStatus.POSITIVE_SEMIDEFINITE
    else:
        status = PDStatus.INDEFINITE
    return PDCertificate(status, min_eigenvalue, tolerance)
