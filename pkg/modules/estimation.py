"""
Hurst estimation from MAVAR curves

Weighted log-log slope fits, the slope -> (H, alpha, gamma) mapping,
exhaustive segmented fits, and a dispatcher over the MAVAR method and the
baseline estimators.
"""

import itertools
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from models.curve import MavarCurve
from models.estimate import EstimationMethod, HurstEstimate, SegmentedFit, SlopeFit, Weighting
from models.series import SeriesRole, TimeSeries
from modules.errors import DegenerateSeriesError, FitError
from modules.mavar import DEFAULT_RATIO, mavar_curve

logger = logging.getLogger(__name__)

DEFAULT_N_LO = 5
DEFAULT_TAIL_DIVISOR = 30
MIN_FIT_POINTS = 4
MAVAR_CONVENTION = "H = mu/2 + 2, alpha = -3 - mu, gamma = 2H - 1"


def tail_limit(n_samples: int, tail_divisor: int = DEFAULT_TAIL_DIVISOR) -> int:
    """Largest n kept by the right-tail exclusion (n <= N / tail_divisor)"""
    return n_samples // tail_divisor


def _fit_points(x: np.ndarray, y: np.ndarray, w: np.ndarray) -> Tuple[float, float, float, float]:
    """Weighted line fit; returns slope, intercept, weighted SSR, weighted residual rms"""
    slope, intercept = np.polyfit(x, y, 1, w=np.sqrt(w))
    resid = y - (slope * x + intercept)
    ssr = float(np.sum(w * resid ** 2))
    return float(slope), float(intercept), ssr, math.sqrt(ssr / float(np.sum(w)))


def _select(curve: MavarCurve, n_lo: int, n_hi: Optional[int], tail_divisor: int,
            weighting: Weighting) -> Tuple[np.ndarray, ...]:
    n_hi = tail_limit(curve.n_samples, tail_divisor) if n_hi is None else n_hi
    ns = curve.n_values
    mask = (ns >= n_lo) & (ns <= n_hi)
    if np.count_nonzero(mask) < MIN_FIT_POINTS:
        raise FitError(
            f"only {np.count_nonzero(mask)} curve points in n range [{n_lo}, {n_hi}], need {MIN_FIT_POINTS}"
        )
    values = curve.values[mask]
    if np.all(values == 0.0):
        raise DegenerateSeriesError("degenerate series: MAVAR is zero everywhere in the fit range")
    if np.any(values <= 0.0):
        raise FitError("non-positive MAVAR value inside the fit range; log-log fit impossible")

    if Weighting(weighting) == Weighting.CONFIDENCE:
        weights = 1.0 / curve.confs[mask] ** 2
    else:
        weights = np.ones(values.size)
    return ns[mask], curve.taus[mask], np.log10(curve.taus[mask]), np.log10(values), weights


def _slope_fit(ns, taus, x, y, w, weighting: Weighting) -> SlopeFit:
    slope, intercept, ssr, rms = _fit_points(x, y, w)
    return SlopeFit(mu=slope, intercept=intercept, n_lo=int(ns[0]), n_hi=int(ns[-1]),
                    tau_lo=float(taus[0]), tau_hi=float(taus[-1]), n_points=int(ns.size),
                    residual_rms=rms, ssr=ssr, weighting=weighting)


def fit_slope(curve: MavarCurve, n_lo: int = DEFAULT_N_LO, n_hi: Optional[int] = None,
              tail_divisor: int = DEFAULT_TAIL_DIVISOR,
              weighting: Union[Weighting, str] = Weighting.CONFIDENCE) -> SlopeFit:
    """
    Fit log10(Mod sigma^2) = mu log10(tau) + b over n_lo <= n <= n_hi

    Args:
        curve: MAVAR curve
        n_lo: Smallest n fitted (MAVAR follows its power law for n > 4)
        n_hi: Largest n fitted, default N // tail_divisor
        tail_divisor: Right-tail exclusion when n_hi is not given
        weighting: confidence (weights m / m_1) or uniform

    Raises:
        DegenerateSeriesError: the curve is zero throughout the range
        FitError: fewer than 4 points or a non-positive value in range
    """
    weighting = Weighting(weighting)
    ns, taus, x, y, w = _select(curve, n_lo, n_hi, tail_divisor, weighting)
    fit = _slope_fit(ns, taus, x, y, w, weighting)
    logger.debug(f"[Estimation] mu={fit.mu:.4f} over n in [{fit.n_lo}, {fit.n_hi}] ({fit.n_points} points)")
    return fit


def hurst_from_slope(fit: SlopeFit) -> HurstEstimate:
    """H = mu/2 + 2; flagged, not rejected, outside -3 < mu < -2"""
    mu = fit.mu
    hurst = mu / 2.0 + 2.0
    return HurstEstimate(
        H=hurst,
        alpha=-3.0 - mu,
        gamma=2.0 * hurst - 1.0,
        lrd_valid=-3.0 < mu < -2.0,
        method=EstimationMethod.MAVAR,
        slope=mu,
        mu=mu,
        fit_range=(fit.tau_lo, fit.tau_hi),
        residual_rms=fit.residual_rms,
        convention=MAVAR_CONVENTION
    )


def _segment_costs(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """O(1) weighted-regression SSR of any slice [i, j) from prefix sums"""
    xc = x - np.average(x, weights=w)
    yc = y - np.average(y, weights=w)

    def prefix(v):
        return np.concatenate(([0.0], np.cumsum(v)))

    sw, sx, sy = prefix(w), prefix(w * xc), prefix(w * yc)
    sxx, sxy, syy = prefix(w * xc * xc), prefix(w * xc * yc), prefix(w * yc * yc)

    def cost(i: int, j: int) -> float:
        W = sw[j] - sw[i]
        X, Y = sx[j] - sx[i], sy[j] - sy[i]
        vxx = (sxx[j] - sxx[i]) - X * X / W
        vxy = (sxy[j] - sxy[i]) - X * Y / W
        vyy = (syy[j] - syy[i]) - Y * Y / W
        return max(vyy - vxy * vxy / vxx, 0.0)

    return cost


def fit_segments(curve: MavarCurve, k: int = 2, n_lo: int = DEFAULT_N_LO, n_hi: Optional[int] = None,
                 tail_divisor: int = DEFAULT_TAIL_DIVISOR,
                 weighting: Union[Weighting, str] = Weighting.CONFIDENCE,
                 min_points: int = MIN_FIT_POINTS) -> SegmentedFit:
    """
    Best k-segment fit by exhaustive breakpoint search over grid points

    Each segment is an independent weighted line with at least min_points
    points; breakpoints are reported at the geometric midpoint of the two
    grid taus they separate.
    """
    if k not in (1, 2, 3):
        raise FitError(f"segment count must be 1, 2 or 3, got {k}")
    weighting = Weighting(weighting)
    ns, taus, x, y, w = _select(curve, n_lo, n_hi, tail_divisor, weighting)
    n_points = ns.size
    if n_points < k * min_points:
        raise FitError(f"{n_points} points cannot hold {k} segments of {min_points}")

    cost = _segment_costs(x, y, w)
    best_splits: Sequence[int] = ()
    best_cost = math.inf
    if k == 1:
        best_cost = cost(0, n_points)
    else:
        cuts = range(min_points, n_points - min_points + 1)
        for splits in itertools.combinations(cuts, k - 1):
            bounds = (0,) + splits + (n_points,)
            if any(b - a < min_points for a, b in zip(bounds, bounds[1:])):
                continue
            total = sum(cost(a, b) for a, b in zip(bounds, bounds[1:]))
            if total < best_cost:
                best_cost, best_splits = total, splits

    bounds = (0,) + tuple(best_splits) + (n_points,)
    segments: List[SlopeFit] = [
        _slope_fit(ns[a:b], taus[a:b], x[a:b], y[a:b], w[a:b], weighting)
        for a, b in zip(bounds, bounds[1:])
    ]
    breakpoints = [math.sqrt(taus[s - 1] * taus[s]) for s in best_splits]
    total_residual = float(sum(s.ssr for s in segments))

    logger.debug(f"[Estimation] {k}-segment fit: slopes {[round(s.mu, 4) for s in segments]}, "
                 f"breakpoints {breakpoints}")
    return SegmentedFit(segments=segments, breakpoints=breakpoints, total_residual=total_residual)


def estimate_hurst(series: TimeSeries, method: Union[EstimationMethod, str] = EstimationMethod.MAVAR,
                   ratio: float = DEFAULT_RATIO, n_lo: int = DEFAULT_N_LO, n_hi: Optional[int] = None,
                   tail_divisor: int = DEFAULT_TAIL_DIVISOR,
                   weighting: Union[Weighting, str] = Weighting.CONFIDENCE,
                   **baseline_options: Any) -> HurstEstimate:
    """
    Estimate H of a series with one method

    The MAVAR grid stops at the top of the fit range. Extra keyword
    arguments go to the baseline estimator (windows, band, octaves).
    """
    # Imported here: baselines depends on the fit helpers of this module
    from modules import baselines

    method = EstimationMethod(method)
    if method == EstimationMethod.MAVAR:
        top = tail_limit(series.n_samples, tail_divisor) if n_hi is None else n_hi
        top = min(top, series.n_samples // 3)
        if top < n_lo:
            raise FitError(f"N={series.n_samples} too short for a fit starting at n={n_lo}")
        curve = mavar_curve(series, ratio=ratio, n_max=top)
        return hurst_from_slope(fit_slope(curve, n_lo=n_lo, n_hi=top, weighting=weighting))
    if method == EstimationMethod.VARIANCE_TIME:
        return baselines.variance_time_plot(series, baseline_options.get("windows"))[1]
    if method == EstimationMethod.PERIODOGRAM:
        return baselines.periodogram_estimate(series, baseline_options.get("band", baselines.DEFAULT_BAND))
    return baselines.haar_logscale_diagram(series, baseline_options.get("octaves"))[1]


def estimate_report(estimate: HurstEstimate, segmented: Optional[SegmentedFit] = None,
                    curve: Optional[MavarCurve] = None, tail_divisor: Optional[int] = None,
                    role: Optional[SeriesRole] = None) -> Dict[str, Any]:
    """
    Estimate JSON document: method, H, alpha, gamma, mu, lrd_valid, fit_range_tau, residual_rms, segments

    role_used comes from the curve, or from role for estimates built without one.
    """
    report: Dict[str, Any] = {
        "method": estimate.method.value,
        "H": estimate.H,
        "alpha": estimate.alpha,
        "gamma": estimate.gamma,
        "mu": estimate.mu,
        "slope": estimate.slope,
        "lrd_valid": estimate.lrd_valid,
        "fit_range": list(estimate.fit_range),
        "fit_range_tau": list(estimate.fit_range) if estimate.method == EstimationMethod.MAVAR else None,
        "residual_rms": estimate.residual_rms,
        "convention": estimate.convention,
        "segments": []
    }
    if curve is not None:
        report["role_used"] = curve.role_used.value
        report["source_label"] = curve.source_label
        report["n_samples"] = curve.n_samples
        report["tau0"] = curve.tau0
    elif role is not None:
        report["role_used"] = SeriesRole(role).value
    if tail_divisor is not None:
        report["tail_policy"] = f"points with n > N/{tail_divisor} excluded from fits"
    if segmented is not None:
        report["breakpoints_tau"] = segmented.breakpoints
        report["total_residual"] = segmented.total_residual
        for segment in segmented.segments:
            mapped = hurst_from_slope(segment)
            report["segments"].append({
                "mu": segment.mu,
                "H": mapped.H,
                "alpha": mapped.alpha,
                "lrd_valid": mapped.lrd_valid,
                "fit_range_tau": [segment.tau_lo, segment.tau_hi],
                "n_range": [segment.n_lo, segment.n_hi],
                "residual_rms": segment.residual_rms
            })
    return report
