"""
Run configuration: the validated RunSpec built from command-line flags, and the
JSON experiment file (validated with pydantic) that describes a simulation design.
"""
from dataclasses import dataclass, field
import json
from pathlib import Path
from typing import List, Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from parsimax.core import Estimator, GhmPairing, MaxTestConfig, SamplerPolicy
from parsimax.core.streams import SEED_MAX
from parsimax.exc import ConfigError, InputFileNotFound
from parsimax.harness import DgpConfig, ErrorKind, ErrorModel, RegressorKind, RegressorModel


COMMANDS = ('test', 'size', 'power', 'consistency', 'census', 'verify-identities')
EXPERIMENT_COMMANDS = ('size', 'power', 'consistency', 'census')

DEFAULT_DRAWS = 10000
DEFAULT_SEED = 0
DEFAULT_ALPHA = 0.05
DEFAULT_REPLICATIONS = 1000


class _Strict(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class RegressorModelFile(_Strict):
    kind: RegressorKind = RegressorKind.IID_GAUSSIAN
    rho: float = Field(0.0, gt=-1, lt=1)
    phi: float = Field(0.0, gt=-1, lt=1)


class ErrorModelFile(_Strict):
    kind: ErrorKind = ErrorKind.HETEROSCEDASTIC_SCALE
    sigma: float = Field(1.0, ge=0)
    intercept: float = Field(0.5, gt=0)
    coefficients: List[float] = Field(default_factory=list)


class DgpFile(_Strict):
    n: int = Field(200, ge=2)
    p: int = Field(2, ge=1)
    h: int = Field(10, ge=1)
    intercept: bool = True
    regressor_model: RegressorModelFile = Field(default_factory=RegressorModelFile)
    error_model: ErrorModelFile = Field(default_factory=ErrorModelFile)
    a: List[float] = Field(default_factory=list)
    b: List[float] = Field(default_factory=list)
    seed: Optional[int] = Field(None, ge=0, le=SEED_MAX)


class ExperimentFile(_Strict):
    """
    Simulation design for the size, power, consistency and census commands.
    Command-line flags given explicitly take precedence over these values.
    """
    dgp: DgpFile = Field(default_factory=DgpFile)
    replications: int = Field(DEFAULT_REPLICATIONS, ge=1)
    alpha: float = Field(DEFAULT_ALPHA, gt=0, lt=1)
    draws: int = Field(DEFAULT_DRAWS, ge=1)
    estimator: Estimator = Estimator.RESTRICTED_CLOSED_FORM
    sampler: SamplerPolicy = SamplerPolicy.CHOLESKY_THEN_EIGEN
    n_grid: List[int] = Field(default_factory=lambda: [100, 1000, 10000])
    # Values swept over b_1 by the power command; empty runs a single power experiment
    b_grid: List[float] = Field(default_factory=list)
    include_wald: bool = False


def load_experiment_file(path: Optional[str]) -> ExperimentFile:
    if path is None:
        return ExperimentFile()
    source = Path(path)
    if not source.is_file():
        raise InputFileNotFound(f'Config file not found: {source}')
    try:
        return ExperimentFile.model_validate(json.loads(source.read_text(encoding='utf-8')))
    except UnicodeDecodeError as err:
        raise ConfigError(f'{source} is not valid UTF-8: {err}') from err
    except json.JSONDecodeError as err:
        raise ConfigError(f'{source} is not valid JSON: {err}') from err
    except ValidationError as err:
        raise ConfigError(f'Invalid config file {source}: {err}') from err


@dataclass(frozen=True)
class RunSpec:
    command: str
    input_path: Optional[str] = None
    y_column: Optional[str] = None
    z_columns: Tuple[str, ...] = ()
    x_columns: Tuple[str, ...] = ()
    draws: int = DEFAULT_DRAWS
    seed: int = DEFAULT_SEED
    estimator: Estimator = Estimator.RESTRICTED_CLOSED_FORM
    sampler: SamplerPolicy = SamplerPolicy.CHOLESKY_THEN_EIGEN
    alpha: float = DEFAULT_ALPHA
    plus_one: bool = False
    ghm_pairing: GhmPairing = GhmPairing.SQUARED_OWN
    replications: int = DEFAULT_REPLICATIONS
    experiment: ExperimentFile = field(default_factory=ExperimentFile)
    workers: Optional[int] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f'Unknown command {self.command!r}')
        if not 0 < self.alpha < 1:
            raise ConfigError(f'alpha must lie strictly between 0 and 1, got {self.alpha}')
        if self.replications < 1:
            raise ConfigError(f'replications must be at least 1, got {self.replications}')
        if self.command == 'test':
            self._check_columns()
        # MaxTestConfig validates draws and seed
        self.test_config()

    def _check_columns(self):
        if not self.input_path:
            raise ConfigError('the test command needs --input')
        if not self.y_column or not self.z_columns or not self.x_columns:
            raise ConfigError('the test command needs --y, --z and --x')
        named = [self.y_column, *self.z_columns, *self.x_columns]
        duplicates = sorted({name for name in named if named.count(name) > 1})
        if duplicates:
            raise ConfigError(f'y, Z and X columns must be disjoint; repeated: {", ".join(duplicates)}')

    def test_config(self) -> MaxTestConfig:
        return MaxTestConfig(
            draws=self.draws,
            seed=self.seed,
            estimator=self.estimator,
            sampler_policy=self.sampler,
            plus_one=self.plus_one,
            ghm_pairing=self.ghm_pairing,
        )

    def dgp_config(self) -> DgpConfig:
        """The experiment file's DGP; its seed defaults to the run seed"""
        dgp = self.experiment.dgp
        return DgpConfig(
            n=dgp.n,
            p=dgp.p,
            h=dgp.h,
            intercept=dgp.intercept,
            regressor_model=RegressorModel(dgp.regressor_model.kind, dgp.regressor_model.rho,
                                           dgp.regressor_model.phi),
            error_model=ErrorModel(dgp.error_model.kind, dgp.error_model.sigma,
                                   dgp.error_model.intercept, tuple(dgp.error_model.coefficients)),
            a=tuple(dgp.a),
            b=tuple(dgp.b),
            seed=self.seed if dgp.seed is None else dgp.seed,
        )

    def echo(self) -> dict:
        """Resolved settings, as reported back in the JSON output"""
        echo = {
            'command': self.command,
            'draws': self.draws,
            'seed': self.seed,
            'estimator': self.estimator.value,
            'sampler': self.sampler.value,
            'alpha': self.alpha,
            'plus_one': self.plus_one,
            'ghm_pairing': self.ghm_pairing.value,
        }
        if self.command == 'test':
            echo.update(input=self.input_path, y=self.y_column,
                        z=list(self.z_columns), x=list(self.x_columns))
        elif self.command in EXPERIMENT_COMMANDS:
            echo.update(replications=self.replications,
                        experiment=self.experiment.model_dump(mode='json'))
        return echo
