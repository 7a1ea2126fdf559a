"""
Modified Allan variance engine

Mod sigma_y^2(n tau0) = sum_j W_j^2 / (2 n^4 tau0^2 m), m = N - 3n + 1,
W_j = sum_{i=j}^{j+n-1} D_i and D_i = x_{i+2n} - 2 x_{i+n} + x_i
(0-based, j = 0..N-3n).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import numpy as np

from models.curve import CurvePoint, MavarCurve, TauGrid
from models.series import TimeSeries
from modules.errors import GridError

logger = logging.getLogger(__name__)

DEFAULT_RATIO = 1.1
MIN_SERIES_LENGTH = 4


def make_tau_grid(n_samples: int, ratio: float = DEFAULT_RATIO, n_max: Optional[int] = None) -> TauGrid:
    """
    Geometric grid n = round(ratio^j), j = 0, 1, ..., deduplicated

    Args:
        n_samples: Series length N (>= 4)
        ratio: Progression ratio in (1, 2]; 1.1 gives about 24 points per decade
        n_max: Largest n allowed, at most floor(N/3)

    Returns:
        TauGrid starting at n=1
    """
    if n_samples < MIN_SERIES_LENGTH:
        raise GridError(f"need N >= {MIN_SERIES_LENGTH} for a tau grid, got {n_samples}")
    if not 1.0 < ratio <= 2.0:
        raise GridError(f"grid ratio must lie in (1, 2], got {ratio}")
    cap = n_samples // 3
    if n_max is not None:
        if not 1 <= n_max <= cap:
            raise GridError(f"n_max={n_max} outside [1, {cap}] for N={n_samples}")
        cap = n_max

    values: List[int] = []
    j = 0
    while True:
        n = int(math.floor(ratio ** j + 0.5))
        if n > cap:
            break
        if not values or n != values[-1]:
            values.append(n)
        j += 1
    return TauGrid(n_values=values, ratio=ratio)


def _check_n(n_samples: int, n: int):
    if n_samples < MIN_SERIES_LENGTH:
        raise GridError(f"need N >= {MIN_SERIES_LENGTH} samples, got {n_samples}")
    if not 1 <= n <= n_samples // 3:
        raise GridError(f"n={n} outside [1, {n_samples // 3}] for N={n_samples}")


def mavar_naive(series: TimeSeries, n: int) -> float:
    """Direct double-sum evaluation, kept as the correctness oracle"""
    n = int(n)
    _check_n(series.n_samples, n)
    xs = series.samples.tolist()
    m = len(xs) - 3 * n + 1

    total = 0.0
    for j in range(m):
        w = 0.0
        for i in range(j, j + n):
            w += xs[i + 2 * n] - 2.0 * xs[i + n] + xs[i]
        total += w * w
    return total / (2.0 * n ** 4 * series.tau0 ** 2 * m)


def _mavar_point(x: np.ndarray, n: int, tau0: float) -> float:
    # Sliding window W_{j+1} = W_j + D_{j+n} - D_j, accumulated as a cumulative
    # sum of the increments so trend residue telescopes instead of drifting
    m = x.size - 3 * n + 1
    d = x[2 * n:] - 2.0 * x[n:-n] + x[:-2 * n]
    w = np.empty(m)
    w[0] = d[:n].sum()
    if m > 1:
        w[1:] = w[0] + np.cumsum(d[n:] - d[:-n])
    return float(np.dot(w, w) / (2.0 * n ** 4 * tau0 ** 2 * m))


def confidence_width(n_samples: int, n: int) -> float:
    """Relative confidence-interval width sqrt(m_1 / m), 1 at n=1"""
    return math.sqrt((n_samples - 2) / (n_samples - 3 * n + 1))


def mavar_fast(series: TimeSeries, grid: TauGrid, workers: int = 1) -> MavarCurve:
    """
    MAVAR at every grid point in O(N) per point

    Grid points may be evaluated concurrently; the curve is assembled in
    grid order either way.
    """
    n_samples = series.n_samples
    if n_samples < MIN_SERIES_LENGTH:
        raise GridError(f"need N >= {MIN_SERIES_LENGTH} samples, got {n_samples}")
    if grid.n_max > n_samples // 3:
        raise GridError(f"grid reaches n={grid.n_max} but N={n_samples} allows at most {n_samples // 3}")

    x = series.samples
    ns = [int(n) for n in grid.n_values]

    if workers > 1 and len(ns) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(lambda n: _mavar_point(x, n, series.tau0), ns))
    else:
        values = [_mavar_point(x, n, series.tau0) for n in ns]

    points = [
        CurvePoint(n=n, tau=n * series.tau0, value=value, m=n_samples - 3 * n + 1,
                   conf=confidence_width(n_samples, n))
        for n, value in zip(ns, values)
    ]
    logger.debug(f"[MAVAR] {len(points)} grid points over N={n_samples} ('{series.label}')")
    return MavarCurve(points=points, source_label=series.label, role_used=series.role,
                      n_samples=n_samples, tau0=series.tau0)


def mavar_curve(series: TimeSeries, ratio: float = DEFAULT_RATIO, n_max: Optional[int] = None,
                workers: int = 1) -> MavarCurve:
    """Grid construction plus engine in one call"""
    return mavar_fast(series, make_tau_grid(series.n_samples, ratio, n_max), workers=workers)


def _overlapping_allan_variance(series: TimeSeries, n: int) -> float:
    """Overlapping two-sample Allan variance from phase-like samples (oracle for n=1)"""
    _check_n(series.n_samples, n)
    x = series.samples
    d = x[2 * n:] - 2.0 * x[n:-n] + x[:-2 * n]
    return float(np.dot(d, d) / (2.0 * n ** 2 * series.tau0 ** 2 * d.size))
