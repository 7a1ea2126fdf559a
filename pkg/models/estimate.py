"""
Data Models for power-law models, slope fits and Hurst estimates
"""

from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class PowerLawComponent(BaseModel):
    """One term h * f^alpha of S_x(f)"""
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=-5.0, le=0.0, description="PSD exponent")
    h: float = Field(gt=0, allow_inf_nan=False, description="PSD amplitude")


class PowerLawModel(BaseModel):
    """S_x(f) = sum_i h_i f^alpha_i for 0 < f <= f_h"""
    model_config = ConfigDict(frozen=True)

    components: List[PowerLawComponent] = Field(min_length=1)
    f_h: float = Field(gt=0, allow_inf_nan=False, description="Upper cutoff frequency in hertz")

    @property
    def order(self) -> int:
        return len(self.components)

    @classmethod
    def single(cls, alpha: float, h: float = 1.0, f_h: float = 0.5) -> "PowerLawModel":
        return cls(components=[PowerLawComponent(alpha=alpha, h=h)], f_h=f_h)


class Weighting(str, Enum):
    UNIFORM = "uniform"
    CONFIDENCE = "confidence"


class EstimationMethod(str, Enum):
    MAVAR = "mavar"
    VARIANCE_TIME = "variance-time"
    PERIODOGRAM = "periodogram"
    HAAR_LD = "haar-ld"


# Short names used on the command line
METHOD_ALIASES = {
    "mavar": EstimationMethod.MAVAR,
    "vtp": EstimationMethod.VARIANCE_TIME,
    "periodogram": EstimationMethod.PERIODOGRAM,
    "haarld": EstimationMethod.HAAR_LD
}


class SlopeFit(BaseModel):
    """Straight-line fit of log10(value) against log10(tau)"""
    model_config = ConfigDict(frozen=True)

    mu: float = Field(description="Log-log slope")
    intercept: float = Field(description="log10 of the power-law constant")
    n_lo: int = Field(ge=1)
    n_hi: int = Field(ge=1)
    tau_lo: float = Field(gt=0)
    tau_hi: float = Field(gt=0)
    n_points: int = Field(ge=2)
    residual_rms: float = Field(ge=0)
    ssr: float = Field(default=0.0, ge=0, description="Weighted sum of squared log residuals")
    weighting: Weighting = Weighting.CONFIDENCE

    @model_validator(mode='after')
    def range_ordered(self):
        if self.n_hi < self.n_lo:
            raise ValueError('n_hi must not be below n_lo')
        return self


class HurstEstimate(BaseModel):
    """Hurst parameter, PSD exponent and LRD exponent from one estimation method"""
    model_config = ConfigDict(frozen=True)

    H: float
    alpha: float
    gamma: float
    lrd_valid: bool
    method: EstimationMethod
    slope: float = Field(description="Raw regression slope of the method")
    fit_range: Tuple[float, float] = Field(description="Fitted abscissa range (tau, window, frequency or octave)")
    residual_rms: float = Field(default=0.0, ge=0)
    mu: Optional[float] = Field(default=None, description="MAVAR slope, for the mavar method")
    convention: str = Field(default="", description="Slope-to-H mapping in force")

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode='json')


class SegmentedFit(BaseModel):
    """Contiguous piecewise-linear log-log fit"""
    model_config = ConfigDict(frozen=True)

    segments: List[SlopeFit] = Field(min_length=1, max_length=3)
    breakpoints: List[float] = Field(default_factory=list, description="tau values between segments")
    total_residual: float = Field(ge=0)

    @model_validator(mode='after')
    def segments_contiguous(self):
        if len(self.breakpoints) != len(self.segments) - 1:
            raise ValueError('need exactly one breakpoint between consecutive segments')
        for left, right in zip(self.segments, self.segments[1:]):
            if right.n_lo <= left.n_hi:
                raise ValueError('segments must be ordered and non-overlapping in tau')
        return self
