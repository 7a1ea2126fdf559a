"""
Baseline Hurst estimators used to cross-check the MAVAR method

- Variance-time plot of aggregated means
- Periodogram log-log slope
- Haar-wavelet logscale diagram with the usual bias correction
"""

import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import signal
from scipy.special import digamma, polygamma

from models.estimate import EstimationMethod, HurstEstimate
from models.generator import alpha_to_hurst, hurst_to_alpha
from models.series import SeriesRole, TimeSeries
from modules.errors import DegenerateSeriesError, FitError, GridError, SeriesError
from modules.estimation import _fit_points

logger = logging.getLogger(__name__)

DEFAULT_BAND = (0.01, 0.25)
MIN_PERIODOGRAM_LENGTH = 64
VTP_POINTS = 20
# Haar leaks across neighbouring octaves; the finest ones bend away from the power law
LD_FIRST_OCTAVE = 4


def _lrd_estimate(method: EstimationMethod, hurst: float, slope: float, fit_range: Tuple[float, float],
                  residual_rms: float, convention: str) -> HurstEstimate:
    alpha = hurst_to_alpha(hurst)
    return HurstEstimate(H=hurst, alpha=alpha, gamma=2.0 * hurst - 1.0, lrd_valid=0.5 < hurst < 1.0,
                         method=method, slope=slope, fit_range=fit_range, residual_rms=residual_rms,
                         convention=convention)


# ========================================================================
# Variance-time plot
# ========================================================================

def default_windows(n_samples: int) -> np.ndarray:
    """About 20 log-spaced aggregation windows from 1 to max(2, N/64)"""
    w_max = min(max(2, n_samples // 64), n_samples // 4)
    return np.unique(np.round(np.logspace(0.0, math.log10(w_max), VTP_POINTS)).astype(np.int64))


def variance_time_plot(y: TimeSeries, windows: Optional[Sequence[int]] = None) -> Tuple[pd.DataFrame, HurstEstimate]:
    """
    Sample variance of non-overlapping block means against block width w

    Slope s of log var vs log w gives H = 1 + s/2.
    """
    if y.role != SeriesRole.RATE:
        raise SeriesError(f"variance-time plot needs rate samples, got role {y.role.value}")
    n_samples = y.n_samples
    windows = default_windows(n_samples) if windows is None else np.unique(np.asarray(windows, dtype=np.int64))
    if windows.size < 3:
        raise GridError(f"variance-time plot needs at least 3 distinct windows, got {windows.size}")
    if windows[0] < 1 or windows[-1] > n_samples // 4:
        raise GridError(f"windows must lie in [1, {n_samples // 4}] for N={n_samples}")

    variances, blocks = [], []
    for w in windows:
        k = n_samples // int(w)
        means = y.samples[: k * w].reshape(k, int(w)).mean(axis=1)
        variances.append(float(np.var(means, ddof=1)))
        blocks.append(k)
    variances = np.array(variances)
    if variances[0] == 0.0:
        raise DegenerateSeriesError("degenerate series: zero sample variance")
    if np.any(variances <= 0.0):
        raise FitError("zero aggregated variance; log-log fit impossible")

    table = pd.DataFrame({"w": windows, "variance": variances, "blocks": blocks})
    slope, _, _, rms = _fit_points(np.log10(windows), np.log10(variances), np.ones(windows.size))
    estimate = _lrd_estimate(EstimationMethod.VARIANCE_TIME, 1.0 + slope / 2.0, slope,
                             (float(windows[0]), float(windows[-1])), rms, "H = 1 + s/2")
    return table, estimate


# ========================================================================
# Periodogram
# ========================================================================

def periodogram(x: TimeSeries) -> pd.DataFrame:
    """One-sided periodogram of the mean-removed samples, DC bin dropped"""
    freqs, power = signal.periodogram(x.samples, fs=1.0 / x.tau0, window='boxcar', detrend='constant',
                                      scaling='density', return_onesided=True)
    return pd.DataFrame({"f": freqs[1:], "power": power[1:]})


def periodogram_estimate(x: TimeSeries, band: Tuple[float, float] = DEFAULT_BAND) -> HurstEstimate:
    """
    Slope alpha_hat of log power vs log frequency over a band given as
    fractions of Nyquist; S_x ~ f^alpha gives H = (1 - alpha_hat) / 2
    """
    if x.n_samples < MIN_PERIODOGRAM_LENGTH:
        raise SeriesError(f"periodogram estimate needs N >= {MIN_PERIODOGRAM_LENGTH}, got {x.n_samples}")
    lo, hi = band
    if not 0.0 < lo < hi <= 1.0:
        raise GridError(f"fit band must satisfy 0 < lo < hi <= 1, got {band}")

    table = periodogram(x)
    if not np.any(table["power"].to_numpy() > 0.0):
        raise DegenerateSeriesError("degenerate series: periodogram is zero")

    nyquist = 0.5 / x.tau0
    f = table["f"].to_numpy()
    p = table["power"].to_numpy()
    mask = (f >= lo * nyquist) & (f <= hi * nyquist) & (p > 0.0)
    if np.count_nonzero(mask) < 4:
        raise FitError(f"only {np.count_nonzero(mask)} periodogram bins inside the fit band")

    alpha_hat, _, _, rms = _fit_points(np.log10(f[mask]), np.log10(p[mask]), np.ones(np.count_nonzero(mask)))
    return _lrd_estimate(EstimationMethod.PERIODOGRAM, alpha_to_hurst(alpha_hat), alpha_hat,
                         (float(f[mask][0]), float(f[mask][-1])), rms,
                         "S_x ~ f^alpha_hat, H = (1 - alpha_hat)/2, gamma = -alpha_hat")


# ========================================================================
# Haar logscale diagram
# ========================================================================

def max_octave(n_samples: int) -> int:
    """Deepest octave with at least four detail coefficients"""
    return int(math.floor(math.log2(n_samples))) - 2


def default_octaves(n_samples: int) -> Tuple[int, int]:
    """(LD_FIRST_OCTAVE, max_octave), moved down on short series to keep three octaves"""
    j_max = max_octave(n_samples)
    return max(1, min(LD_FIRST_OCTAVE, j_max - 2)), j_max


def haar_logscale_diagram(x: TimeSeries, octaves: Optional[Tuple[int, int]] = None) -> Tuple[pd.DataFrame, HurstEstimate]:
    """
    Per-octave Haar detail energy and its weighted regression on the octave

    y_j = log2(mean d_j^2) - g_j with g_j = digamma(n_j/2)/ln 2 - log2(n_j/2);
    weights are 1 / Var(y_j) = ln(2)^2 / trigamma(n_j/2). The slope is the
    scaling exponent gamma and H = (1 + gamma) / 2.
    """
    j_max = max_octave(x.n_samples)
    if j_max < 2:
        raise SeriesError(f"N={x.n_samples} too short for a logscale diagram")
    j1, j2 = octaves if octaves is not None else default_octaves(x.n_samples)
    if j1 < 1 or j2 > j_max or j2 <= j1:
        raise GridError(f"octave range ({j1}, {j2}) outside 1..{j_max} for N={x.n_samples}")

    rows = []
    approx = x.samples
    for j in range(1, j2 + 1):
        approx = approx[: approx.size - approx.size % 2]
        pairs = approx.reshape(-1, 2)
        detail = (pairs[:, 0] - pairs[:, 1]) / math.sqrt(2.0)
        approx = (pairs[:, 0] + pairs[:, 1]) / math.sqrt(2.0)
        count = detail.size
        energy = float(np.mean(detail ** 2))
        half = count / 2.0
        rows.append({
            "j": j,
            "n_j": count,
            "energy": energy,
            "y": math.log2(energy) - (digamma(half) / math.log(2.0) - math.log2(half)) if energy > 0 else -math.inf,
            "variance": float(polygamma(1, half)) / math.log(2.0) ** 2
        })

    table = pd.DataFrame(rows)
    if np.all(table["energy"].to_numpy() == 0.0):
        raise DegenerateSeriesError("degenerate series: all Haar details vanish")
    used = table[(table["j"] >= j1) & (table["j"] <= j2)]
    if np.any(used["energy"].to_numpy() <= 0.0):
        raise FitError("zero detail energy inside the octave range")

    slope, _, _, rms = _fit_points(used["j"].to_numpy(dtype=np.float64), used["y"].to_numpy(),
                                   1.0 / used["variance"].to_numpy())
    estimate = _lrd_estimate(EstimationMethod.HAAR_LD, (1.0 + slope) / 2.0, slope, (float(j1), float(j2)), rms,
                             "Haar logscale diagram, slope = gamma = 2H - 1")
    logger.debug(f"[Baselines] LD slope {slope:.4f} over octaves {j1}..{j2}")
    return table, estimate
