"""
Synthetic long-range-dependent series by spectral shaping, plus the
deterministic contaminants (offset/drift, sine, step) used by validation runs
"""

import logging
import math
from typing import Any, Dict, Optional, Union

import numpy as np
from pydantic import ValidationError

from models.generator import AmplitudeMode, Contaminant, ContaminantKind, GeneratorSpec
from models.series import SeriesRole, TimeSeries
from modules.errors import GeneratorError
from modules.series_io import make_series

logger = logging.getLogger(__name__)


def make_generator_spec(data: Union[GeneratorSpec, Dict[str, Any]]) -> GeneratorSpec:
    """GeneratorSpec from a JSON-style dict, reporting problems as GeneratorError"""
    if isinstance(data, GeneratorSpec):
        return data
    try:
        return GeneratorSpec.model_validate(data)
    except ValidationError as e:
        raise GeneratorError(f"Invalid generator spec: {e}") from e


def make_contaminant(data: Union[Contaminant, Dict[str, Any]]) -> Contaminant:
    if isinstance(data, Contaminant):
        return data
    try:
        return Contaminant.model_validate(data)
    except ValidationError as e:
        raise GeneratorError(f"Invalid contaminant: {e}") from e


def gen_lrd(spec: GeneratorSpec, tau0: float = 1.0, label: Optional[str] = None) -> TimeSeries:
    """
    Generate a real series whose one-sided PSD follows h * f^alpha

    Bins f_k = k / (N tau0), k = 1..N/2, each carry a cosine of mean-square
    power 2 S(f_k) df (fixed amplitude, or Rayleigh with that mean square)
    and an independent uniform phase. DC is zero. The inverse real FFT
    enforces conjugate symmetry. Output role is rate.
    """
    if not (tau0 > 0 and math.isfinite(tau0)):
        raise GeneratorError(f"tau0 must be positive and finite, got {tau0}")

    n = spec.n
    rng = np.random.default_rng(spec.seed)
    df = 1.0 / (n * tau0)
    freqs = np.arange(1, n // 2 + 1) * df
    psd = spec.h * freqs ** spec.alpha

    if spec.mode == AmplitudeMode.RAYLEIGH:
        amplitude = rng.rayleigh(scale=np.sqrt(psd * df))
    else:
        amplitude = np.sqrt(2.0 * psd * df)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=freqs.size)

    coeffs = np.zeros(n // 2 + 1, dtype=np.complex128)
    coeffs[1:] = 0.5 * n * amplitude * np.exp(1j * phase)
    x = np.fft.irfft(coeffs, n=n)

    if spec.normalize:
        x = x - x.mean()
        x = x / x.std()

    logger.debug(f"[Synth] Generated N={n} alpha={spec.alpha} seed={spec.seed} mode={spec.mode.value}")
    return make_series(x, tau0, SeriesRole.RATE,
                       label if label is not None else f"lrd(alpha={spec.alpha:g}, seed={spec.seed})")


def contaminant_signal(c: Contaminant, n: int, tau0: float) -> np.ndarray:
    """Samples of the deterministic contaminant at t_k = k tau0, k = 0..n-1"""
    k = np.arange(n)
    t = k * tau0

    if c.kind == ContaminantKind.OFFSET_DRIFT:
        return c.a + c.b * t + c.c * t ** 2

    if c.kind == ContaminantKind.SINE:
        nyquist = 1.0 / (2.0 * tau0)
        if c.f_m > nyquist * (1.0 + 1e-12):
            raise GeneratorError(f"sine frequency {c.f_m} Hz above Nyquist {nyquist} Hz")
        return c.a * np.sin(2.0 * np.pi * c.f_m * t)

    if not 1 < c.m < n:
        raise GeneratorError(f"step delay M={c.m} must lie strictly inside (1, {n})")
    return np.where(k >= c.m, c.a, 0.0)


def apply_contaminant(series: TimeSeries, c: Contaminant) -> TimeSeries:
    """Add a contaminant sample-wise; contaminants commute"""
    signal = contaminant_signal(c, series.n_samples, series.tau0)
    return series.with_samples(series.samples + signal)
