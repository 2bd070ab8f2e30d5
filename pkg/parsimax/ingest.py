"""CSV in and out. A header row is required; cells must parse as floats."""
import logging
from pathlib import Path
from typing import Sequence, Union
import numpy as np
import pandas as pd
from parsimax.core import Dataset
from parsimax.exc import InputFileNotFound, InvalidDataset, MissingColumn, NonNumericCell


PathLike = Union[str, Path]

# 17 significant digits round-trip any double
FLOAT_FORMAT = '%.17g'


def _read_frame(path: Path) -> pd.DataFrame:
    # Every column is read so the parser checks each row's field count
    try:
        frame = pd.read_csv(path, encoding='utf-8', float_precision='round_trip', skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise InvalidDataset(f'{path} is empty; a header row is required')
    except UnicodeDecodeError as err:
        raise InvalidDataset(f'{path} is not valid UTF-8: {err}') from err
    except pd.errors.ParserError as err:
        raise InvalidDataset(f'{path} is malformed: {err}') from err
    # More fields than header names turns the leading columns into an index
    if not isinstance(frame.index, pd.RangeIndex):
        raise InvalidDataset(f'{path} has rows with more fields than the header')
    return frame


def _numeric_column(frame: pd.DataFrame, name: str) -> np.ndarray:
    column = frame[name]
    if column.dtype.kind in 'if':
        values = column.to_numpy(dtype=float)
        missing = np.flatnonzero(np.isnan(values))
        if missing.size:
            raise NonNumericCell(int(missing[0]) + 1, name, '')
        return values

    parsed = pd.to_numeric(column, errors='coerce')
    bad = parsed.isna().to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise NonNumericCell(row + 1, name, str(column.iloc[row]))
    return parsed.to_numpy(dtype=float)


def ingest_csv(path: PathLike, y: str, z: Sequence[str], x: Sequence[str]) -> Dataset:
    """
    Reads y, Z and X (columns in the order given) from a CSV file. Rows are
    numbered from 1 after the header in NonNumericCell errors.
    """
    path = Path(path)
    if not path.is_file():
        raise InputFileNotFound(f'Input file not found: {path}')

    frame = _read_frame(path)
    header = [str(c) for c in frame.columns]
    wanted = [y, *z, *x]
    for name in wanted:
        if name not in header:
            raise MissingColumn(name)

    logging.debug(f'Read {len(frame)} rows x {len(header)} columns from {path}')
    columns = {name: _numeric_column(frame, name) for name in wanted}
    return Dataset(
        y=columns[y],
        z=np.column_stack([columns[name] for name in z]),
        x=np.column_stack([columns[name] for name in x]),
        z_names=tuple(z),
        x_names=tuple(x),
    )


def write_csv(d: Dataset, path: PathLike, y_name: str = 'y'):
    """Writes y, Z, X with 17 significant digits so ingest_csv recovers the exact doubles"""
    frame = pd.DataFrame(np.column_stack([d.y, d.z, d.x]),
                         columns=[y_name, *d.z_names, *d.x_names])
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
