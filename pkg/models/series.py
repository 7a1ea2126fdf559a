"""
Data Models for Time Series
Using Pydantic for data validation; sample arrays are copied and frozen
"""

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class SeriesRole(str, Enum):
    """How the samples relate to the underlying process"""
    CUMULATIVE = "cumulative"  # phase-like, e.g. cumulative packet count
    RATE = "rate"              # e.g. packets per bin


class SeriesFormat(str, Enum):
    """Supported text layouts for series files"""
    ONE_COLUMN = "one-column"
    TWO_COLUMN = "two-column"


def frozen_array(values: Any, dtype=np.float64) -> np.ndarray:
    """Copy values into a one-dimensional read-only array"""
    arr = np.array(values, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"expected a one-dimensional array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class TimeSeries(BaseModel):
    """Evenly spaced samples x_k with sampling period tau0 and a role tag"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray = Field(description="Sample values in file order")
    tau0: float = Field(gt=0, allow_inf_nan=False, description="Sampling period in seconds")
    role: SeriesRole = Field(default=SeriesRole.RATE, description="Cumulative or rate samples")
    label: str = Field(default="", description="Free-form source label")

    @field_validator('samples', mode='before')
    @classmethod
    def samples_finite(cls, v):
        arr = frozen_array(v)
        if arr.size == 0:
            raise ValueError('series must contain at least one sample')
        if not np.all(np.isfinite(arr)):
            raise ValueError('series contains NaN or infinite samples')
        return arr

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def n_samples(self) -> int:
        return int(self.samples.size)

    @property
    def duration(self) -> float:
        """Covered time span N * tau0"""
        return self.n_samples * self.tau0

    def with_samples(self, samples: Any, role: Optional[SeriesRole] = None, label: Optional[str] = None) -> "TimeSeries":
        """New series sharing tau0 (and by default role and label) with this one"""
        return TimeSeries(
            samples=samples,
            tau0=self.tau0,
            role=self.role if role is None else role,
            label=self.label if label is None else label
        )

    def to_summary(self) -> dict:
        return {
            "label": self.label,
            "role": self.role.value,
            "n_samples": self.n_samples,
            "tau0": self.tau0
        }
