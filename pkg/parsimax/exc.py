from typing import Optional


class ParsimaxError(Exception):
    pass


# Bad input: the CLI exits with code 2
class DataError(ParsimaxError):
    pass


class DimensionMismatch(DataError):
    pass


class InvalidDataset(DataError):
    pass


class InputFileNotFound(DataError, FileNotFoundError):
    pass


class MissingColumn(DataError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f'Column not found in header: {name}')


class NonNumericCell(DataError):
    def __init__(self, row: int, column: str, value: str):
        self.row = row
        self.column = column
        super().__init__(f'Non-numeric cell at row {row}, column {column}: {value!r}')


class TooFewRows(DataError):
    def __init__(self, n: int, p: int, h: int):
        self.n = n
        super().__init__(f'Need more than p + h = {p + h} rows, got {n}')


class ConfigError(DataError):
    pass


class EmptyBetas(DataError):
    pass


# Numerical breakdown: the CLI exits with code 3
class NumericalError(ParsimaxError):
    pass


class NotPositiveDefinite(NumericalError):
    """Used when a matrix that must be positive definite fails the check"""
    def __init__(self, which: str = 'matrix', index: Optional[int] = None):
        self.which = which
        self.index = index
        label = which if index is None else f'{which}[{index}]'
        super().__init__(f'{label} is not positive definite')


class ConvergenceFailure(NumericalError):
    pass


class RankDeficient(NumericalError):
    """The design matrix (or the i-th parsimonious design) lacks full column rank"""
    def __init__(self, index: Optional[int] = None, detail: str = ''):
        self.index = index
        where = 'design' if index is None else f'parsimonious design for regressor {index}'
        msg = f'{where} is rank deficient'
        super().__init__(f'{msg}: {detail}' if detail else msg)


class NonPositiveDii(NumericalError):
    def __init__(self, index: int, value: float):
        self.index = index
        self.value = value
        super().__init__(
            f'd_ii for regressor {index} is {value!r}; x_{index} is (nearly) collinear with Z')


class StageFailure(ParsimaxError):
    """Wraps an upstream error with the max-test stage it came from"""
    def __init__(self, stage: str, cause: ParsimaxError):
        self.stage = stage
        self.cause = cause
        super().__init__(f'{stage}: {cause}')
