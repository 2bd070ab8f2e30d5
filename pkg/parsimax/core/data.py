from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Iterable, Optional, Sequence, Tuple
import numpy as np
from parsimax.exc import DimensionMismatch, InvalidDataset, TooFewRows
from .linalg import PDCertificate, SymMatrix, certify_pd


# Rows per einsum chunk; bounds the (k, k, chunk) temporary
_CHUNK = 4096


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_matrix(values, name: str) -> np.ndarray:
    m = np.array(values, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DimensionMismatch(f'{name} must be a matrix, got {m.ndim} dimensions')
    return m


def pairwise_cross(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """
    Sum over rows t of outer(left[t], right[t]).

    The row index is laid out along the contiguous axis so numpy reduces it with
    pairwise summation instead of a running total.
    """
    if left.shape[0] != right.shape[0]:
        raise DimensionMismatch(f'row counts differ: {left.shape[0]} vs {right.shape[0]}')
    partials = []
    for start in range(0, left.shape[0], _CHUNK):
        stop = start + _CHUNK
        block = np.einsum('ti,tj->ijt', left[start:stop], right[start:stop])
        partials.append(np.ascontiguousarray(block).sum(axis=-1))
    if not partials:
        return np.zeros((left.shape[1], right.shape[1]))
    return np.ascontiguousarray(np.stack(partials, axis=-1)).sum(axis=-1)


@dataclass(frozen=True)
class Dataset:
    """
    Observed sample for y_t = z_t'a + x_t'b + e_t. Z holds the protected regressors
    (callers usually put the constant there; nothing requires it), X the key ones.
    """
    y: np.ndarray
    z: np.ndarray
    x: np.ndarray
    z_names: Tuple[str, ...] = ()
    x_names: Tuple[str, ...] = ()

    def __post_init__(self):
        y = np.array(self.y, dtype=float).reshape(-1)
        z = _as_matrix(self.z, 'Z')
        x = _as_matrix(self.x, 'X')
        n = y.shape[0]
        if z.shape[0] != n or x.shape[0] != n:
            raise DimensionMismatch(
                f'y has {n} rows but Z has {z.shape[0]} and X has {x.shape[0]}')
        p, h = z.shape[1], x.shape[1]
        if p < 1 or h < 1:
            raise InvalidDataset(f'need p >= 1 and h >= 1, got p={p}, h={h}')
        if n <= p + h:
            raise TooFewRows(n, p, h)
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(z)) and np.all(np.isfinite(x))):
            raise InvalidDataset('dataset contains non-finite values')

        z_names = tuple(self.z_names) or tuple(f'z{k + 1}' for k in range(p))
        x_names = tuple(self.x_names) or tuple(f'x{k + 1}' for k in range(h))
        if len(z_names) != p or len(x_names) != h:
            raise DimensionMismatch('column name count does not match the matrices')

        object.__setattr__(self, 'y', _frozen(y))
        object.__setattr__(self, 'z', _frozen(z))
        object.__setattr__(self, 'x', _frozen(x))
        object.__setattr__(self, 'z_names', z_names)
        object.__setattr__(self, 'x_names', x_names)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.z.shape[1]

    @property
    def h(self) -> int:
        return self.x.shape[1]

    @property
    def design(self) -> np.ndarray:
        """The full-data matrix [Z X], rows X_t = [z_t', x_t']'"""
        return np.hstack([self.z, self.x])

    def parsimonious_design(self, i: int) -> np.ndarray:
        """Rows X_it = [z_t', x_it]'"""
        return np.hstack([self.z, self.x[:, i:i + 1]])

    def with_x_order(self, order: Sequence[int]) -> 'Dataset':
        order = list(order)
        return Dataset(self.y, self.z, self.x[:, order], self.z_names,
                       tuple(self.x_names[i] for i in order))

    def with_x_scaled(self, scales: Sequence[float]) -> 'Dataset':
        return Dataset(self.y, self.z, self.x * np.asarray(scales, dtype=float),
                       self.z_names, self.x_names)


@dataclass(frozen=True)
class Atom:
    z: Sequence[float]
    x: Sequence[float]
    sigma2: float
    prob: float


@dataclass(frozen=True)
class FinitePopulation:
    """
    Exact discrete distribution over (z, x, sigma2) atoms. sigma2 stands for
    E(e_t^2 | z, x); every expectation used here depends on e only through e^2.
    """
    z: np.ndarray
    x: np.ndarray
    sigma2: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        z = _as_matrix(self.z, 'atom z')
        x = _as_matrix(self.x, 'atom x')
        sigma2 = np.array(self.sigma2, dtype=float).reshape(-1)
        prob = np.array(self.prob, dtype=float).reshape(-1)
        k = prob.shape[0]
        if z.shape[0] != k or x.shape[0] != k or sigma2.shape[0] != k:
            raise DimensionMismatch('atom fields must all have one entry per atom')
        if np.any(prob <= 0):
            raise InvalidDataset('atom probabilities must be positive')
        if abs(float(np.sum(prob)) - 1.0) > 1e-12:
            raise InvalidDataset(f'atom probabilities sum to {np.sum(prob)!r}, not 1')
        if np.any(sigma2 < 0) or not np.all(np.isfinite(sigma2)):
            raise InvalidDataset('sigma2 must be finite and nonnegative')

        stacked = np.hstack([z, x])
        gram = SymMatrix(pairwise_cross(stacked * prob[:, None], stacked))
        if not certify_pd(gram).is_positive_definite:
            raise InvalidDataset('population second-moment matrix is not positive definite')

        object.__setattr__(self, 'z', _frozen(z))
        object.__setattr__(self, 'x', _frozen(x))
        object.__setattr__(self, 'sigma2', _frozen(sigma2))
        object.__setattr__(self, 'prob', _frozen(prob))

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom]) -> 'FinitePopulation':
        atoms = list(atoms)
        return cls(
            z=[a.z for a in atoms],
            x=[a.x for a in atoms],
            sigma2=[a.sigma2 for a in atoms],
            prob=[a.prob for a in atoms],
        )

    @property
    def p(self) -> int:
        return self.z.shape[1]

    @property
    def h(self) -> int:
        return self.x.shape[1]

    @property
    def size(self) -> int:
        return self.prob.shape[0]

    def atoms(self) -> Iterable[Atom]:
        for k in range(self.size):
            yield Atom(tuple(self.z[k]), tuple(self.x[k]), float(self.sigma2[k]),
                       float(self.prob[k]))


@dataclass(frozen=True)
class MomentSet:
    """
    One family of second moments, unweighted (the Gamma family) or weighted by
    squared errors (the Lambda family). Per-regressor symbols are views:
    column i of zx is gamma_iz / lambda_iz, xx[i, j] is gamma_ij / lambda_ij.
    """
    zz: SymMatrix
    zx: np.ndarray
    xx: SymMatrix

    def __post_init__(self):
        zx = np.array(self.zx, dtype=float, ndmin=2)
        if zx.shape != (self.zz.order, self.xx.order):
            raise DimensionMismatch(
                f'zx must be {self.zz.order}x{self.xx.order}, got {zx.shape}')
        object.__setattr__(self, 'zx', _frozen(zx))

    @classmethod
    def from_assembled(cls, matrix: np.ndarray, p: int) -> 'MomentSet':
        m = SymMatrix(matrix).entries
        return cls(SymMatrix(m[:p, :p]), m[:p, p:], SymMatrix(m[p:, p:]))

    @property
    def p(self) -> int:
        return self.zz.order

    @property
    def h(self) -> int:
        return self.xx.order

    def assembled(self) -> SymMatrix:
        return SymMatrix(np.block([[self.zz.entries, self.zx],
                                   [self.zx.T, self.xx.entries]]))

    def iz(self, i: int) -> np.ndarray:
        return self.zx[:, i]

    def block(self, i: int, j: int) -> np.ndarray:
        """The (p+1)x(p+1) moment of X_it X_jt' with X_it = [z_t', x_it]'"""
        p = self.p
        out = np.empty((p + 1, p + 1))
        out[:p, :p] = self.zz.entries
        out[:p, p] = self.zx[:, j]
        out[p, :p] = self.zx[:, i]
        out[p, p] = self.xx.entries[i, j]
        return out

    def scaled(self, factor: float) -> 'MomentSet':
        return MomentSet(self.zz.scaled(factor), self.zx * factor, self.xx.scaled(factor))


@unique
class CovarianceMethod(Enum):
    GHM_BLOCKWISE = 'ghm_blockwise'
    RESTRICTED_CLOSED_FORM = 'restricted_closed_form'
    RESTRICTED_BLOCKWISE = 'restricted_blockwise'
    POPULATION_CLOSED_FORM = 'population_closed_form'
    POPULATION_BLOCKWISE = 'population_blockwise'
    HOMOSCEDASTIC = 'homoscedastic'


@dataclass(frozen=True)
class CovarianceEstimate:
    v: SymMatrix
    method: CovarianceMethod
    certificate: PDCertificate = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'certificate', certify_pd(self.v))

    @property
    def h(self) -> int:
        return self.v.order


def _moments_from_rows(z: np.ndarray, x: np.ndarray, weights: np.ndarray,
                       divisor: float) -> MomentSet:
    weighted = weights[:, None]
    zz = pairwise_cross(z * weighted, z) / divisor
    zx = pairwise_cross(z * weighted, x) / divisor
    xx = pairwise_cross(x * weighted, x) / divisor
    return MomentSet(SymMatrix(zz), zx, SymMatrix(xx))


def sample_moments(d: Dataset, weights: Optional[Sequence[float]] = None) -> MomentSet:
    """
    n^-1 sum_t w_t (outer products of z_t, x_t). Unit weights give the Gamma-hat
    family; weights u_t^2 give the Lambda-tilde family.
    """
    w = np.ones(d.n) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape[0] != d.n:
        raise DimensionMismatch(f'expected {d.n} weights, got {w.shape[0]}')
    return _moments_from_rows(d.z, d.x, w, d.n)


def population_moments(pop: FinitePopulation) -> Tuple[MomentSet, MomentSet]:
    """Exact (Gamma, Lambda) families as finite sums over the atoms"""
    gamma = _moments_from_rows(pop.z, pop.x, pop.prob, 1.0)
    lam = _moments_from_rows(pop.z, pop.x, pop.prob * pop.sigma2, 1.0)
    return gamma, lam
