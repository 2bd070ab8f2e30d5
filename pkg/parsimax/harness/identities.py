"""
Exact-moment identity checks: the two representations of V agree, V is PD when
Lambda is, the homoscedastic collapse holds with a zero Omega term, and the
block matrix [[B'AB, B'], [B, A^-1]] is never indefinite.
"""
from dataclasses import dataclass, field
import itertools
import logging
import time
from typing import Dict, Sequence, Tuple
import numpy as np
from parsimax.core import (
    MomentSet, PDStatus, SymMatrix, build_omega, certify_pd, bordered_inverse_matrix, omega_term,
    population_moments, v_blockwise, v_closed_form, v_homoscedastic,
)
from parsimax.core.streams import POPULATION_STREAM, stream
from .populations import random_moment_pair, random_pd, random_population


P_GRID = (1, 2, 3)
H_GRID = (1, 2, 5, 10)


@dataclass
class IdentityReport:
    tolerance: float
    representation_max_deviation: float = 0.0
    representation_cases: int = 0
    restricted_pd_cases: int = 0
    restricted_pd_failures: int = 0
    homoscedastic_max_deviation: float = 0.0
    omega_term_max_abs: float = 0.0
    bordered_cases: int = 0
    bordered_indefinite: int = 0
    bordered_witness_max_abs: float = 0.0
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (
            self.representation_max_deviation < self.tolerance
            and self.restricted_pd_failures == 0
            and self.homoscedastic_max_deviation < self.tolerance
            and self.omega_term_max_abs < self.tolerance
            and self.bordered_indefinite == 0
            and self.bordered_witness_max_abs < self.tolerance
        )


def _scaled_gap(left: np.ndarray, right: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(left))))
    return float(np.max(np.abs(left - right))) / scale


def representation_deviation(rng: np.random.Generator, p_grid: Sequence[int] = P_GRID,
                             h_grid: Sequence[int] = H_GRID) -> Tuple[float, int]:
    """Largest |closed form - blockwise| over heteroscedastic populations on the grid"""
    worst, cases = 0.0, 0
    for p, h in itertools.product(p_grid, h_grid):
        gamma, lam = _population_pair(rng, p, h)
        closed = v_closed_form(gamma, lam).v.entries
        blockwise = v_blockwise(gamma, lam).v.entries
        worst = max(worst, _scaled_gap(closed, blockwise))
        cases += 1
    return worst, cases


def _population_pair(rng: np.random.Generator, p: int, h: int) -> Tuple[MomentSet, MomentSet]:
    return population_moments(random_population(rng, p, h))


def restricted_pd_failures(rng: np.random.Generator, cases: int) -> int:
    """Cases where Lambda is certified PD but the closed-form V is not"""
    failures = 0
    for k in range(cases):
        p, h = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        gamma, lam = random_moment_pair(rng, p, h)
        if not certify_pd(lam.assembled()).is_positive_definite:
            continue
        certificate = v_closed_form(gamma, lam).certificate
        if not certificate.is_positive_definite:
            logging.warning(f'Case {k}: Lambda is PD but V is {certificate.status.value}')
            failures += 1
    return failures


def homoscedastic_deviation(rng: np.random.Generator, cases: int) -> Tuple[float, float]:
    """(max |V(Gamma, s2 Gamma) - V_homo|, max |Omega term|), both scaled"""
    worst_v, worst_omega = 0.0, 0.0
    for _ in range(cases):
        p, h = int(rng.integers(1, 4)), int(rng.integers(1, 6))
        gamma, _ = random_moment_pair(rng, p, h)
        sigma2 = float(rng.uniform(0.25, 4.0))
        lam = gamma.scaled(sigma2)
        closed = v_closed_form(gamma, lam).v.entries
        homo = v_homoscedastic(gamma, sigma2).v.entries
        worst_v = max(worst_v, _scaled_gap(closed, homo))
        term = omega_term(build_omega(gamma, lam))
        scale = max(1.0, gamma.assembled().max_abs * sigma2)
        worst_omega = max(worst_omega, float(np.max(np.abs(term))) / scale)
    return worst_v, worst_omega


def bordered_witness(a: SymMatrix, b: np.ndarray, x1: np.ndarray) -> float:
    """x'Mx for x = [x1', -x1'B'A]'; zero up to rounding"""
    m = bordered_inverse_matrix(a, b)
    x = np.concatenate([x1, -(b @ x1) @ a.entries])
    return float(x @ m.entries @ x)


def bordered_checks(rng: np.random.Generator, cases: int) -> Tuple[int, float]:
    """(indefinite count, largest scaled |witness quadratic form|)"""
    indefinite, worst = 0, 0.0
    for _ in range(cases):
        rows, cols = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        a = SymMatrix(random_pd(rng, rows))
        b = rng.standard_normal((rows, cols))
        m = bordered_inverse_matrix(a, b)
        if certify_pd(m).status == PDStatus.INDEFINITE:
            indefinite += 1
        x1 = rng.standard_normal(cols)
        x_scale = float(x1 @ x1) * max(1.0, m.max_abs) * (1.0 + a.max_abs) ** 2
        worst = max(worst, abs(bordered_witness(a, b, x1)) / x_scale)
    return indefinite, worst


def verify_identities(seed: int = 0, tolerance: float = 1e-10, pd_cases: int = 500,
                      homoscedastic_cases: int = 200, bordered_cases: int = 200) -> IdentityReport:
    rng = stream(seed, POPULATION_STREAM)
    report = IdentityReport(tolerance=tolerance)

    started = time.monotonic()
    report.representation_max_deviation, report.representation_cases = representation_deviation(rng)
    report.timings['representation'] = time.monotonic() - started

    started = time.monotonic()
    report.restricted_pd_cases = pd_cases
    report.restricted_pd_failures = restricted_pd_failures(rng, pd_cases)
    report.timings['restricted_pd'] = time.monotonic() - started

    started = time.monotonic()
    report.homoscedastic_max_deviation, report.omega_term_max_abs = homoscedastic_deviation(
        rng, homoscedastic_cases)
    report.timings['homoscedastic'] = time.monotonic() - started

    started = time.monotonic()
    report.bordered_cases = bordered_cases
    report.bordered_indefinite, report.bordered_witness_max_abs = bordered_checks(rng, bordered_cases)
    report.timings['bordered'] = time.monotonic() - started

    level = logging.INFO if report.passed else logging.WARNING
    logging.log(level, f'Identity suite {"passed" if report.passed else "FAILED"}: '
                       f'representation gap {report.representation_max_deviation!r}')
    return report
