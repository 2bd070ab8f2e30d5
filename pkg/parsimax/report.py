"""
JSON documents written by the CLI.

Every document has the keys command, config_echo, result and diagnostics
(sampler_used, pd_certificate, timings). Floats are written with repr(), the
shortest text that parses back to the same double; NaN and infinities become null.
"""
from dataclasses import asdict
import json
import math
from typing import Any, Dict, Optional
import numpy as np
from parsimax.core import MaxTestResult, PDCertificate
from parsimax.harness import ExperimentReport, IdentityReport


def _clean(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def certificate(cert: PDCertificate) -> Dict[str, Any]:
    return {
        'status': cert.status.value,
        'min_eigenvalue': cert.min_eigenvalue,
        'tolerance_used': cert.tolerance_used,
    }


def max_test_result(result: MaxTestResult, alpha: float) -> Dict[str, Any]:
    return {
        'n': result.n,
        'betas': result.betas,
        'statistic': result.statistic,
        'p_value': result.p_value,
        'alpha': alpha,
        'reject': result.p_value <= alpha,
        'draws': result.draws,
        'exceedances': result.exceedances,
        'covariance': {
            'method': result.covariance.method.value,
            'matrix': result.covariance.v.entries,
        },
    }


def experiment_result(report: ExperimentReport) -> Dict[str, Any]:
    body = asdict(report)
    body.pop('wall_time')
    for key in ('frobenius_errors', 'ghm_frobenius_errors', 'estimator_gap'):
        body[key] = [{'n': n, 'mean': mean} for n, mean in body[key]]
    return body


def identity_result(report: IdentityReport) -> Dict[str, Any]:
    body = asdict(report)
    body.pop('timings')
    body['passed'] = report.passed
    return body


def document(command: str, config_echo: Dict[str, Any], result: Any,
             sampler_used: Any = None, pd_certificate: Optional[Dict[str, Any]] = None,
             timings: Optional[Dict[str, float]] = None) -> Dict[str, Any]:
    return {
        'command': command,
        'config_echo': config_echo,
        'result': result,
        'diagnostics': {
            'sampler_used': sampler_used,
            'pd_certificate': pd_certificate,
            'timings': timings,
        },
    }


def error_object(err: Exception, exit_code: int) -> Dict[str, Any]:
    cause = getattr(err, 'cause', None)
    body = {
        'error': type(err).__name__,
        'message': str(err),
        'exit_code': exit_code,
    }
    if cause is not None:
        body['stage'] = err.stage
        body['cause'] = type(cause).__name__
    return body


def render(doc: Dict[str, Any]) -> str:
    return json.dumps(_clean(doc), indent=2, allow_nan=False) + '\n'
