"""
Series I/O
Loading, writing, binning and rate/cumulative conversion of evenly spaced series

Features:
- One-column files (samples only) and two-column (time, value) files
- '#' comment lines, blank lines, LF or CRLF line endings
- Half-open binning of event timestamps into counts per interval
- Running-sum integration and first-difference differentiation
"""

import logging
import math
from typing import Iterable, Optional, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from models.series import SeriesFormat, SeriesRole, TimeSeries
from modules.errors import SeriesError
from modules.utils import validate_input_file

logger = logging.getLogger(__name__)

MIN_SERIES_LENGTH = 4
SPACING_RTOL = 1e-6
# Slack when a timestamp sits on a bin boundary up to float round-off
BOUNDARY_EPS = 1e-9


def make_series(samples, tau0: float, role: Union[SeriesRole, str] = SeriesRole.RATE, label: str = "") -> TimeSeries:
    """Build a TimeSeries, reporting validation problems as SeriesError"""
    try:
        return TimeSeries(samples=samples, tau0=tau0, role=role, label=label)
    except ValidationError as e:
        raise SeriesError(f"Invalid time series: {e}") from e


def _parse_column(values: Iterable[str], column: str, path: str) -> np.ndarray:
    parsed = []
    for row, text in enumerate(values, start=1):
        try:
            parsed.append(float(text))
        except (TypeError, ValueError):
            raise SeriesError(f"{path}: non-numeric {column} on data row {row}: {text!r}")
    return np.array(parsed, dtype=np.float64)


def _read_table(path: str, fmt: SeriesFormat) -> pd.DataFrame:
    if fmt == SeriesFormat.ONE_COLUMN:
        options = dict(sep=",", engine="c")
    else:
        options = dict(sep=r"[\s,]+", engine="python")
    try:
        return pd.read_csv(path, header=None, comment="#", skip_blank_lines=True, dtype=str,
                           skipinitialspace=True, **options)
    except pd.errors.EmptyDataError:
        return pd.DataFrame()
    except pd.errors.ParserError as e:
        raise SeriesError(f"{path}: malformed rows ({e})") from e


def load_series(path: str, fmt: Union[SeriesFormat, str] = SeriesFormat.ONE_COLUMN,
                tau0: Optional[float] = None, role: Union[SeriesRole, str] = SeriesRole.RATE,
                label: Optional[str] = None) -> TimeSeries:
    """
    Load an evenly spaced series from a text file

    Args:
        path: Input file
        fmt: one-column (tau0 required) or two-column (tau0 inferred from the times)
        tau0: Sampling period for one-column files
        role: Role tag of the samples
        label: Source label, defaults to the path

    Returns:
        TimeSeries with samples in file order

    Raises:
        SeriesError: missing file, non-numeric row, inconsistent spacing, N < 4
    """
    fmt = SeriesFormat(fmt)
    ok, message = validate_input_file(path)
    if not ok:
        raise SeriesError(message)

    table = _read_table(path, fmt)
    expected_columns = 1 if fmt == SeriesFormat.ONE_COLUMN else 2
    if not table.empty and table.shape[1] != expected_columns:
        raise SeriesError(f"{path}: expected {expected_columns} column(s) per row, found {table.shape[1]}")

    if fmt == SeriesFormat.ONE_COLUMN:
        if tau0 is None:
            raise SeriesError("tau0 is required for one-column series files")
        samples = _parse_column(table.iloc[:, 0] if not table.empty else [], "value", path)
    else:
        times = _parse_column(table.iloc[:, 0] if not table.empty else [], "time", path)
        samples = _parse_column(table.iloc[:, 1] if not table.empty else [], "value", path)
        inferred = _infer_spacing(times, path)
        if tau0 is not None and not math.isclose(tau0, inferred, rel_tol=SPACING_RTOL):
            logger.warning(f"[Series IO] {path}: tau0 {tau0} overridden by file spacing {inferred}")
        tau0 = inferred

    if samples.size < MIN_SERIES_LENGTH:
        raise SeriesError(f"{path}: need at least {MIN_SERIES_LENGTH} samples, found {samples.size}")

    series = make_series(samples, tau0, role, label if label is not None else str(path))
    logger.info(f"[Series IO] Loaded {series.n_samples} samples from {path} (tau0={series.tau0}, role={series.role.value})")
    return series


def _infer_spacing(times: np.ndarray, path: str) -> float:
    """Constant spacing of the time column within SPACING_RTOL"""
    if times.size < 2:
        raise SeriesError(f"{path}: need at least 2 rows to infer the sampling period")
    if not np.all(np.isfinite(times)):
        raise SeriesError(f"{path}: non-finite time value")
    tau0 = (times[-1] - times[0]) / (times.size - 1)
    if not tau0 > 0:
        raise SeriesError(f"{path}: time column must be increasing")
    deviation = np.abs(np.diff(times) - tau0)
    worst = int(np.argmax(deviation))
    if deviation[worst] > SPACING_RTOL * tau0:
        raise SeriesError(
            f"{path}: inconsistent spacing between rows {worst + 1} and {worst + 2} "
            f"({times[worst + 1] - times[worst]} vs mean {tau0})"
        )
    return float(tau0)


def write_series(series: TimeSeries, path: str, fmt: Union[SeriesFormat, str] = SeriesFormat.ONE_COLUMN,
                 header: Optional[str] = None) -> str:
    """Write a series as text with round-trip exact decimals; returns the path"""
    fmt = SeriesFormat(fmt)
    if fmt == SeriesFormat.ONE_COLUMN:
        frame = pd.DataFrame({"value": series.samples})
    else:
        frame = pd.DataFrame({"time": np.arange(series.n_samples) * series.tau0, "value": series.samples})

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        frame.to_csv(fh, header=False, index=False, float_format="%.17g")

    logger.debug(f"[Series IO] Wrote {series.n_samples} samples to {path}")
    return path


def read_timestamps(path: str) -> np.ndarray:
    """One timestamp per line, '#' comments allowed"""
    ok, message = validate_input_file(path)
    if not ok:
        raise SeriesError(message)
    table = _read_table(path, SeriesFormat.ONE_COLUMN)
    return _parse_column(table.iloc[:, 0] if not table.empty else [], "timestamp", path)


def bin_timestamps(timestamps, tau0: float, span: Optional[float] = None, label: str = "") -> TimeSeries:
    """
    Count events per half-open bin [k tau0, (k+1) tau0)

    Events at or beyond span are dropped. Without span the last bin is the
    one holding the latest timestamp.
    """
    ts = np.asarray(timestamps, dtype=np.float64).ravel()
    if not (tau0 > 0 and math.isfinite(tau0)):
        raise SeriesError(f"tau0 must be positive and finite, got {tau0}")
    if ts.size == 0 and span is None:
        raise SeriesError("cannot bin an empty timestamp list without a span")
    if not np.all(np.isfinite(ts)):
        raise SeriesError("timestamps must be finite")
    if np.any(ts < 0):
        raise SeriesError("timestamps must be non-negative")

    q = ts / tau0
    idx = np.floor(q).astype(np.int64)
    idx[(q - idx) > 1.0 - BOUNDARY_EPS] += 1

    if span is not None:
        if not (span > 0 and math.isfinite(span)):
            raise SeriesError(f"span must be positive and finite, got {span}")
        n_bins = int(math.ceil(span / tau0 - BOUNDARY_EPS))
    else:
        n_bins = int(idx.max()) + 1

    inside = idx < n_bins
    dropped = int(ts.size - np.count_nonzero(inside))
    if dropped:
        logger.debug(f"[Series IO] {dropped} timestamps beyond span {span} dropped")

    counts = np.bincount(idx[inside], minlength=n_bins).astype(np.float64)
    return make_series(counts, tau0, SeriesRole.RATE, label)


def integrate(series: TimeSeries, allow_cumulative: bool = False) -> TimeSeries:
    """Running sum x_k = x_{k-1} + tau0 y_k with x_0 = tau0 y_0"""
    if series.role == SeriesRole.CUMULATIVE:
        if not allow_cumulative:
            raise SeriesError("series is already cumulative; integrating it again is likely a mistake")
        logger.warning(f"[Series IO] Integrating cumulative series '{series.label}' on request")
    return series.with_samples(np.cumsum(series.samples * series.tau0), role=SeriesRole.CUMULATIVE)


def differentiate(series: TimeSeries) -> TimeSeries:
    """Inverse of integrate: y_k = (x_k - x_{k-1}) / tau0 with y_0 = x_0 / tau0"""
    return series.with_samples(np.diff(series.samples, prepend=0.0) / series.tau0, role=SeriesRole.RATE)
