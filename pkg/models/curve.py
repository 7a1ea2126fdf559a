"""
Data Models for MAVAR curves and observation-interval grids
"""

from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.series import SeriesRole, frozen_array

CURVE_COLUMNS = ["n", "tau", "mavar", "m", "conf"]


class TauGrid(BaseModel):
    """Strictly increasing averaging factors n (tau = n * tau0)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_values: np.ndarray = Field(description="Averaging factors, strictly increasing")
    ratio: float = Field(default=1.1, gt=1.0, le=2.0, description="Geometric progression ratio")

    @field_validator('n_values', mode='before')
    @classmethod
    def increasing_positive(cls, v):
        arr = frozen_array(v, dtype=np.int64)
        if arr.size == 0:
            raise ValueError('grid must contain at least one n value')
        if arr[0] < 1:
            raise ValueError('grid n values must be >= 1')
        if np.any(np.diff(arr) <= 0):
            raise ValueError('grid n values must be strictly increasing')
        return arr

    def __len__(self) -> int:
        return int(self.n_values.size)

    @property
    def n_max(self) -> int:
        return int(self.n_values[-1])

    def taus(self, tau0: float) -> np.ndarray:
        return self.n_values * tau0


class CurvePoint(BaseModel):
    """One grid point of a MAVAR curve"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    tau: float = Field(gt=0)
    value: float = Field(ge=0, allow_inf_nan=False, description="Mod sigma_y^2(tau)")
    m: int = Field(ge=1, description="Averaged term count N - 3n + 1")
    conf: float = Field(gt=0, description="Relative confidence-interval width, 1 at n=1")


class MavarCurve(BaseModel):
    """Modified Allan variance over a tau grid"""
    model_config = ConfigDict(frozen=True)

    points: List[CurvePoint] = Field(min_length=1)
    source_label: str = ""
    role_used: SeriesRole = SeriesRole.RATE
    n_samples: int = Field(ge=4, description="Length N of the analysed series")
    tau0: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode='after')
    def tau_increasing(self):
        taus = [p.tau for p in self.points]
        if any(b <= a for a, b in zip(taus, taus[1:])):
            raise ValueError('curve tau values must be strictly increasing')
        return self

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_values(self) -> np.ndarray:
        return np.array([p.n for p in self.points], dtype=np.int64)

    @property
    def taus(self) -> np.ndarray:
        return np.array([p.tau for p in self.points], dtype=np.float64)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.points], dtype=np.float64)

    @property
    def m_values(self) -> np.ndarray:
        return np.array([p.m for p in self.points], dtype=np.int64)

    @property
    def confs(self) -> np.ndarray:
        return np.array([p.conf for p in self.points], dtype=np.float64)

    def scaled(self, factor: float) -> "MavarCurve":
        """Copy with every value multiplied by a non-negative factor"""
        points = [p.model_copy(update={"value": p.value * factor}) for p in self.points]
        return self.model_copy(update={"points": points})

    def to_frame(self) -> pd.DataFrame:
        """Tabular form with the curve CSV columns n,tau,mavar,m,conf"""
        return pd.DataFrame({
            "n": self.n_values,
            "tau": self.taus,
            "mavar": self.values,
            "m": self.m_values,
            "conf": self.confs
        }, columns=CURVE_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, source_label: str = "", role_used: SeriesRole = SeriesRole.RATE) -> "MavarCurve":
        """Rebuild a curve from its CSV columns; N and tau0 follow from m = N - 3n + 1 and tau = n tau0"""
        missing = [c for c in CURVE_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"curve table lacks columns: {missing}")
        first = frame.iloc[0]
        n_samples = int(first["m"]) + 3 * int(first["n"]) - 1
        tau0 = float(first["tau"]) / int(first["n"])
        points = [
            CurvePoint(n=int(row.n), tau=float(row.tau), value=float(row.mavar), m=int(row.m), conf=float(row.conf))
            for row in frame.itertuples(index=False)
        ]
        return cls(points=points, source_label=source_label, role_used=role_used, n_samples=n_samples, tau0=tau0)
