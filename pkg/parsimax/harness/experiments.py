"""
Monte Carlo experiments: size, power, consistency of the covariance estimators,
and the positive-definiteness census.

Replication r draws its data and its simulated p-value from a seed derived from
(master seed, r), so a report only depends on the master seed and the config.
"""
from dataclasses import dataclass, field, replace
import logging
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar
import numpy as np
from parsimax.core import (
    CovarianceEstimate, Dataset, MaxTestConfig, estimate_v_ghm, estimate_v_restricted, run_max_test,
)
from parsimax.core.streams import DATA_STREAM, REPLICATION_STREAM, derive_seed, ordered_map, stream
from parsimax.exc import ConfigError, NumericalError
from .dgp import DgpConfig, exact_covariance, generate
from .wald import wald_baseline


T = TypeVar('T')

RESTRICTED_ARM = 'restricted_closed_form'
GHM_ARM = 'ghm_blockwise'


@dataclass
class ExperimentReport:
    kind: str
    replications: int
    alpha: Optional[float] = None
    rejection_rate: Optional[float] = None
    rejection_se: Optional[float] = None
    baseline_rejection_rate: Optional[float] = None  # Wald
    mean_min_eigenvalue: Dict[str, float] = field(default_factory=dict)
    pd_failure_count: Dict[str, int] = field(default_factory=dict)
    sampler_counts: Dict[str, int] = field(default_factory=dict)
    frobenius_errors: List[Tuple[int, float]] = field(default_factory=list)
    ghm_frobenius_errors: List[Tuple[int, float]] = field(default_factory=list)
    estimator_gap: List[Tuple[int, float]] = field(default_factory=list)
    wall_time: float = 0.0


@dataclass(frozen=True)
class _Outcome:
    p_value: float
    sampler: str
    min_eigenvalue: float
    wald_p_value: Optional[float]


def replication_seed(master: int, replication: int) -> int:
    return derive_seed(master, REPLICATION_STREAM, replication)


def replication_data(cfg: DgpConfig, replication: int, index: int = 0) -> Dataset:
    seed = replication_seed(cfg.seed, replication)
    return generate(cfg, stream(seed, DATA_STREAM, index))


def _replicate(fn: Callable[[int], T], replications: int, workers: Optional[int], kind: str) -> List[T]:
    step = max(1, replications // 10)

    def task(r: int) -> T:
        out = fn(r)
        if (r + 1) % step == 0:
            logging.info(f'{kind}: replication {r + 1}/{replications}')
        return out

    return ordered_map(task, range(replications), workers)


def _check_alpha(alpha: float):
    if not 0 <= alpha <= 1:
        raise ConfigError(f'alpha must lie in [0, 1], got {alpha}')


def _rejection_experiment(kind: str, cfg: DgpConfig, test_cfg: MaxTestConfig, replications: int,
                          alpha: float, include_wald: bool, workers: Optional[int]) -> ExperimentReport:
    _check_alpha(alpha)
    if replications < 1:
        raise ConfigError('replications must be at least 1')
    started = time.monotonic()

    def one(r: int) -> _Outcome:
        d = replication_data(cfg, r)
        result = run_max_test(d, replace(test_cfg, seed=replication_seed(cfg.seed, r)), workers=1)
        wald_p = wald_baseline(d).p_value if include_wald else None
        return _Outcome(result.p_value, result.sampler_used.value,
                        result.covariance.certificate.min_eigenvalue, wald_p)

    outcomes = _replicate(one, replications, workers, kind)
    rate = sum(o.p_value <= alpha for o in outcomes) / replications
    samplers: Dict[str, int] = {}
    for o in outcomes:
        samplers[o.sampler] = samplers.get(o.sampler, 0) + 1

    report = ExperimentReport(
        kind=kind,
        replications=replications,
        alpha=alpha,
        rejection_rate=rate,
        rejection_se=float(np.sqrt(rate * (1 - rate) / replications)),
        mean_min_eigenvalue={test_cfg.estimator.value: float(np.mean([o.min_eigenvalue for o in outcomes]))},
        sampler_counts=dict(sorted(samplers.items())),
        wall_time=time.monotonic() - started,
    )
    if include_wald:
        report.baseline_rejection_rate = sum(o.wald_p_value <= alpha for o in outcomes) / replications
    logging.info(f'{kind}: rejection rate {rate:.4f} over {replications} replications')
    return report


def size_experiment(cfg: DgpConfig, test_cfg: MaxTestConfig, replications: int, alpha: float = 0.05,
                    include_wald: bool = False, workers: Optional[int] = None) -> ExperimentReport:
    if not cfg.under_null:
        raise ConfigError('size_experiment needs b = 0')
    return _rejection_experiment('size', cfg, test_cfg, replications, alpha, include_wald, workers)


def power_experiment(cfg: DgpConfig, test_cfg: MaxTestConfig, replications: int, alpha: float = 0.05,
                     include_wald: bool = False, workers: Optional[int] = None) -> ExperimentReport:
    if cfg.under_null:
        logging.warning('power_experiment called with b = 0; this measures size')
    return _rejection_experiment('power', cfg, test_cfg, replications, alpha, include_wald, workers)


def power_curve(cfg: DgpConfig, test_cfg: MaxTestConfig, index: int, grid: Sequence[float],
                replications: int, alpha: float = 0.05,
                workers: Optional[int] = None) -> List[Tuple[float, ExperimentReport]]:
    """power_experiment with b_index swept over grid, all other b at their config value"""
    if not 0 <= index < cfg.h:
        raise ConfigError(f'regressor index {index} outside 0..{cfg.h - 1}')
    curve = []
    for value in grid:
        b = list(cfg.b)
        b[index] = value
        curve.append((value, power_experiment(cfg.with_b(b), test_cfg, replications, alpha,
                                              workers=workers)))
    return curve


def _frobenius(left: CovarianceEstimate, right: CovarianceEstimate) -> float:
    return float(np.linalg.norm(left.v.entries - right.v.entries))


def consistency_experiment(cfg: DgpConfig, n_grid: Sequence[int], replications: int,
                           workers: Optional[int] = None) -> ExperimentReport:
    """
    Mean Frobenius distance of V-tilde and V-hat to the exact V (and to each other)
    for each sample size in n_grid.
    """
    if not cfg.under_null:
        raise ConfigError('consistency_experiment needs b = 0')
    started = time.monotonic()
    target = exact_covariance(cfg)
    report = ExperimentReport(kind='consistency', replications=replications)

    for n in n_grid:
        sized = cfg.with_n(n)

        def one(r: int) -> Tuple[float, float, float]:
            d = replication_data(sized, r, index=n)
            restricted = estimate_v_restricted(d)
            ghm = estimate_v_ghm(d)
            return _frobenius(restricted, target), _frobenius(ghm, target), _frobenius(restricted, ghm)

        errors = np.array(_replicate(one, replications, workers, f'consistency n={n}'))
        means = errors.mean(axis=0)
        report.frobenius_errors.append((n, float(means[0])))
        report.ghm_frobenius_errors.append((n, float(means[1])))
        report.estimator_gap.append((n, float(means[2])))

    report.wall_time = time.monotonic() - started
    return report


def pd_failure_census(cfg: DgpConfig, replications: int, workers: Optional[int] = None) -> ExperimentReport:
    """Counts replications where each estimator fails to be certified positive definite"""
    started = time.monotonic()

    def certify(estimator: Callable[[Dataset], CovarianceEstimate], d: Dataset) -> Tuple[bool, float]:
        try:
            certificate = estimator(d).certificate
        except NumericalError as err:
            logging.debug(f'Estimator failed outright: {err}')
            return False, float('-inf')
        return certificate.is_positive_definite, certificate.min_eigenvalue

    def one(r: int):
        d = replication_data(cfg, r)
        return certify(estimate_v_restricted, d), certify(estimate_v_ghm, d)

    outcomes = _replicate(one, replications, workers, 'census')
    report = ExperimentReport(kind='census', replications=replications)
    for arm, column in ((RESTRICTED_ARM, 0), (GHM_ARM, 1)):
        arm_outcomes = [o[column] for o in outcomes]
        report.pd_failure_count[arm] = sum(not ok for ok, _ in arm_outcomes)
        finite = [value for _, value in arm_outcomes if np.isfinite(value)]
        report.mean_min_eigenvalue[arm] = float(np.mean(finite)) if finite else float('nan')
    report.wall_time = time.monotonic() - started
    return report
