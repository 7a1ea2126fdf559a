"""
Data Models for synthetic series generation and deterministic contaminants
"""

from enum import Enum
from typing import Any, Dict, Optional

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator

from modules.utils import is_power_of_two

# Hurst values accepted when a spec is given by H rather than alpha
HURST_MIN = 0.5
HURST_MAX = 1.0


def hurst_to_alpha(hurst: float) -> float:
    return 1.0 - 2.0 * hurst


def alpha_to_hurst(alpha: float) -> float:
    return (1.0 - alpha) / 2.0


class AmplitudeMode(str, Enum):
    """Magnitude law of the spectral coefficients"""
    DETERMINISTIC = "deterministic-sqrt-psd"
    RAYLEIGH = "rayleigh"


class GeneratorSpec(BaseModel):
    """Spectral-shaping generator settings for S_x(f) = h * f^alpha"""
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    n: int = Field(validation_alias=AliasChoices('n', 'N'), ge=8, description="Series length, power of two")
    alpha: float = Field(gt=-5.0, le=0.0, description="PSD exponent of the generated series")
    h: float = Field(default=1.0, gt=0, allow_inf_nan=False, description="PSD amplitude")
    seed: int = Field(default=0, ge=0, lt=2 ** 64, description="PCG64 seed")
    mode: AmplitudeMode = Field(default=AmplitudeMode.RAYLEIGH, description="Amplitude law")
    normalize: bool = Field(default=True, description="Rescale to sample mean 0 and variance 1")

    @model_validator(mode='before')
    @classmethod
    def resolve_hurst(cls, data: Any) -> Any:
        """Accept H (keys 'hurst' or 'H') in place of alpha, using alpha = 1 - 2H"""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        hurst = data.pop('hurst', None)
        if 'H' in data:
            hurst = data.pop('H')
        if hurst is None:
            return data
        hurst = float(hurst)
        if not HURST_MIN <= hurst <= HURST_MAX:
            raise ValueError(f'hurst must be within [{HURST_MIN}, {HURST_MAX}], got {hurst}')
        alpha = hurst_to_alpha(hurst)
        if 'alpha' in data and abs(float(data['alpha']) - alpha) > 1e-9:
            raise ValueError(f'alpha {data["alpha"]} contradicts hurst {hurst}')
        data['alpha'] = alpha
        return data

    @field_validator('n')
    @classmethod
    def n_power_of_two(cls, v):
        if not is_power_of_two(v):
            raise ValueError(f'n must be a power of two, got {v}')
        return v

    @computed_field
    @property
    def hurst(self) -> float:
        return alpha_to_hurst(self.alpha)

    def to_dict(self) -> Dict[str, Any]:
        """JSON echo with keys n, alpha, hurst, h, seed, mode, normalize"""
        return self.model_dump(mode='json')


class ContaminantKind(str, Enum):
    OFFSET_DRIFT = "offset-drift"
    SINE = "sine"
    STEP = "step"


class Contaminant(BaseModel):
    """
    Deterministic signal added to a series:
    offset-drift A + B t + C t^2, sine A sin(2 pi f_m t), step A u(k - M)
    """
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    kind: ContaminantKind = Field(description="Contaminant family")
    a: float = Field(default=0.0, validation_alias=AliasChoices('a', 'A'), allow_inf_nan=False)
    b: float = Field(default=0.0, validation_alias=AliasChoices('b', 'B'), allow_inf_nan=False)
    c: float = Field(default=0.0, validation_alias=AliasChoices('c', 'C'), allow_inf_nan=False)
    f_m: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False, description="Sine frequency in hertz")
    m: Optional[int] = Field(default=None, validation_alias=AliasChoices('m', 'M'), description="Step delay index")

    @model_validator(mode='after')
    def parameters_for_kind(self):
        if self.kind == ContaminantKind.SINE and self.f_m is None:
            raise ValueError('sine contaminant requires f_m')
        if self.kind == ContaminantKind.STEP and self.m is None:
            raise ValueError('step contaminant requires M')
        return self
