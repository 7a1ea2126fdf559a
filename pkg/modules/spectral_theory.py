"""
Spectral theory of the modified Allan variance

Closed forms and numerical integrals used as independent oracles for the
engine: the filter transfer function |H_MA(n, f)|^2 and its n -> inf limit,
the power-law response, and the response to deterministic signals
(quadratic drift, sinusoid, step).

Frequencies are handled through the dimensionless u = f * tau, where
|H_MA|^2 = 2 (pi u)^2 sinc(u)^4 D_n(u)^2 with D_n(u) = sin(pi u) / (n sin(pi u / n)).
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Iterable, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from models.curve import CurvePoint, MavarCurve, TauGrid
from models.estimate import PowerLawModel
from models.series import SeriesRole
from modules.errors import GridError, QuadratureError
from modules.mavar import confidence_width

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

DEFAULT_REL_TOL = 1e-6
# Panels [k, k+1] in u are integrated one by one up to this lobe, the rest harmonically
LOBE_PANELS = 20
QUAD_LIMIT = 400


def _scalar_or_array(value: np.ndarray, like) -> ArrayLike:
    return float(value) if np.ndim(like) == 0 else value


def _dirichlet_sq(u: np.ndarray, n: int) -> np.ndarray:
    """D_n(u)^2, equal to 1 at the removable singularities u = k n"""
    if n == 1:
        return np.ones_like(u)
    denom = np.sinc(u / n)
    safe = np.abs(denom) > 1e-300
    ratio = np.divide(np.sinc(u), denom, out=np.ones_like(u), where=safe)
    return ratio ** 2


def transfer_mag_sq(n: int, tau: float, f: ArrayLike) -> ArrayLike:
    """|H_MA(n, f)|^2 = 2 sin^6(pi tau f) / ((n pi tau f)^2 sin^2(pi tau f / n))"""
    if n < 1 or tau <= 0:
        raise GridError(f"transfer function needs n >= 1 and tau > 0, got n={n}, tau={tau}")
    u = np.asarray(f, dtype=np.float64) * tau
    value = 2.0 * (np.pi * u) ** 2 * np.sinc(u) ** 4 * _dirichlet_sq(u, n)
    return _scalar_or_array(value, f)


def transfer_limit_mag_sq(tau: float, f: ArrayLike) -> ArrayLike:
    """n -> inf limit 2 sin^6(pi f tau) / (pi f tau)^4"""
    if tau <= 0:
        raise GridError(f"tau must be positive, got {tau}")
    u = np.asarray(f, dtype=np.float64) * tau
    value = 2.0 * (np.pi * u) ** 2 * np.sinc(u) ** 6
    return _scalar_or_array(value, f)


def main_lobe_peak(n: int, tau: float) -> float:
    """Frequency of the transfer-function maximum inside (0, 1/tau)"""
    result = minimize_scalar(lambda f: -transfer_mag_sq(n, tau, f),
                             bounds=(1e-9 / tau, 1.0 / tau), method='bounded',
                             options={'xatol': 1e-10 / tau})
    return float(result.x)


# ========================================================================
# Power-law response
# ========================================================================

def _checked_quad(func, a: float, b: float, rel_tol: float, abs_tol: float = 0.0, **kwargs) -> Tuple[float, float]:
    result = quad(func, a, b, full_output=1, epsabs=abs_tol, epsrel=rel_tol, limit=QUAD_LIMIT, **kwargs)
    value, abserr = float(result[0]), float(result[1])
    if len(result) > 3:
        if abserr > max(abs_tol, rel_tol * abs(value)) * 10.0:
            raise QuadratureError(
                f"quadrature over [{a}, {b}] did not converge: {result[3]} (estimate {value}, error {abserr})",
                value=value, abserr=abserr
            )
        logger.warning(f"[Theory] Loose quadrature over [{a}, {b}]: error {abserr:.3g} on {value:.6g}")
    return value, abserr


@lru_cache(maxsize=4096)
def _power_law_integral(alpha: float, n: int, upper: float, rel_tol: float) -> float:
    """
    I = integral_0^upper u^(alpha+2) (2 pi)^2 |H_MA(n, u)|^2 du  (tau = 1)

    First panel: algebraic weight u^(alpha+4) against a smooth kernel.
    Next panels: one filter lobe each. Beyond LOBE_PANELS: sin^6 expanded into
    harmonics and integrated with cosine weights against the smooth envelope.
    """
    def lobe_kernel(u):
        # integrand / u^(alpha+4), tends to 8 pi^4 at u = 0
        u = np.asarray(u, dtype=np.float64)
        return float(8.0 * np.pi ** 4 * np.sinc(u) ** 4 * _dirichlet_sq(u, n))

    def integrand(u):
        return u ** (alpha + 2.0) * 4.0 * np.pi ** 2 * transfer_mag_sq(n, 1.0, u)

    def envelope(u):
        return 8.0 * u ** alpha / (n ** 2 * math.sin(math.pi * u / n) ** 2)

    first_end = min(1.0, upper)
    total, _ = _checked_quad(lobe_kernel, 0.0, first_end, rel_tol, weight='alg', wvar=(alpha + 4.0, 0.0))
    abs_tol = rel_tol * total * 1e-2

    k = 1
    while k < LOBE_PANELS and k < upper:
        value, _ = _checked_quad(integrand, float(k), min(k + 1.0, upper), rel_tol, abs_tol)
        total += value
        k += 1

    if upper > LOBE_PANELS:
        # sin^6(pi u) = (10 - 15 cos 2 pi u + 6 cos 4 pi u - cos 6 pi u) / 32
        a, b = float(LOBE_PANELS), float(upper)
        value, _ = _checked_quad(envelope, a, b, rel_tol, abs_tol)
        tail = 10.0 * value
        for coeff, harmonic in ((-15.0, 1), (6.0, 2), (-1.0, 3)):
            value, _ = _checked_quad(envelope, a, b, rel_tol, abs_tol, weight='cos', wvar=2.0 * np.pi * harmonic)
            tail += coeff * value
        total += tail / 32.0

    return total


def mavar_theoretical(model: PowerLawModel, tau: float, n: int, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """
    Mod sigma_y^2(tau) = integral S_x(f) (2 pi f)^2 |H_MA(n, f)|^2 df over (0, f_h]

    Integration also stops at the Nyquist frequency n / (2 tau) of the
    sampling implied by tau0 = tau / n.

    Raises:
        QuadratureError: the integral did not reach the requested tolerance
    """
    if tau <= 0 or n < 1:
        raise GridError(f"need tau > 0 and n >= 1, got tau={tau}, n={n}")
    upper = min(model.f_h * tau, n / 2.0)
    total = 0.0
    for component in model.components:
        integral = _power_law_integral(component.alpha, int(n), upper, rel_tol)
        total += component.h * tau ** (-3.0 - component.alpha) * integral
    return total


def theoretical_curve(model: PowerLawModel, grid: TauGrid, tau0: float, n_samples: Optional[int] = None,
                      rel_tol: float = DEFAULT_REL_TOL, workers: int = 1) -> MavarCurve:
    """
    Theoretical MAVAR over a grid as a MavarCurve

    m and the confidence column come from a nominal series length
    (default 30 * n_max, so the usual tail exclusion keeps every point).
    """
    n_samples = n_samples if n_samples is not None else 30 * grid.n_max
    if grid.n_max > n_samples // 3:
        raise GridError(f"grid reaches n={grid.n_max} but nominal N={n_samples} allows {n_samples // 3}")
    ns = [int(n) for n in grid.n_values]

    def evaluate(n):
        return mavar_theoretical(model, n * tau0, n, rel_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            values = list(executor.map(evaluate, ns))
    else:
        values = [evaluate(n) for n in ns]

    points = [CurvePoint(n=n, tau=n * tau0, value=v, m=n_samples - 3 * n + 1, conf=confidence_width(n_samples, n))
              for n, v in zip(ns, values)]
    alphas = ", ".join(f"{c.alpha:g}" for c in model.components)
    return MavarCurve(points=points, source_label=f"theory(alpha={alphas})", role_used=SeriesRole.CUMULATIVE,
                      n_samples=n_samples, tau0=tau0)


# ========================================================================
# Deterministic signals
# ========================================================================

def mavar_sine(A: float, f_m: float, tau: ArrayLike) -> ArrayLike:
    """
    Infinite-average response A^2 sin^6(pi f_m tau) / (pi f_m tau)^4 to a
    rate-domain sinusoid of amplitude A; ripple period 2 / f_m in tau
    """
    if f_m <= 0:
        raise GridError(f"f_m must be positive, got {f_m}")
    u = f_m * np.asarray(tau, dtype=np.float64)
    value = A ** 2 * (np.pi * u) ** 2 * np.sinc(u) ** 6
    return _scalar_or_array(value, tau)


def mavar_sine_finite(A: float, f_m: float, tau: float, n: int) -> float:
    """Finite-n sine response (A^2 / 2) |H_MA(n, f_m)|^2"""
    return 0.5 * A ** 2 * transfer_mag_sq(n, tau, f_m)


def mavar_quadratic(C: float, tau: ArrayLike) -> ArrayLike:
    """2 C^2 tau^2; offset and linear drift contribute nothing"""
    tau_arr = np.asarray(tau, dtype=np.float64)
    return _scalar_or_array(2.0 * C ** 2 * tau_arr ** 2, tau)


def mavar_step_ideal(A: float, tau: float) -> float:
    """A step has no effect on the infinite-average MAVAR"""
    return 0.0


def impulse_response(n: int, tau0: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Taps h_l, l = 1..3n-1, of the filter acting on rate samples
    y_l = (x_l - x_{l-1}) / tau0 whose mean-square output over the
    sliding windows is the MAVAR estimate
    """
    if n < 1 or tau0 <= 0:
        raise GridError(f"need n >= 1 and tau0 > 0, got n={n}, tau0={tau0}")
    lags = np.arange(1, 3 * n)
    g = np.where(lags <= n, -lags, np.where(lags <= 2 * n, -n + 2 * (lags - n), n - (lags - 2 * n)))
    return lags * tau0, g / (math.sqrt(2.0) * n ** 2)


def transfer_table(n_values: Iterable[int], tau: float, f_values: np.ndarray) -> pd.DataFrame:
    """Plot data: |H_MA|^2 for several n plus the n -> inf limit"""
    table = {"f": f_values, "f_tau": f_values * tau}
    for n in n_values:
        table[f"n{n}"] = transfer_mag_sq(int(n), tau, f_values)
    table["limit"] = transfer_limit_mag_sq(tau, f_values)
    return pd.DataFrame(table)
