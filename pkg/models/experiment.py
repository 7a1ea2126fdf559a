"""
Data Models for seeded validation experiments
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator

from models.curve import MavarCurve
from models.estimate import EstimationMethod
from models.generator import AmplitudeMode
from modules.utils import is_power_of_two


class ExperimentKind(str, Enum):
    ACCURACY = "accuracy"
    CONVERGENCE = "convergence"
    STEP_ROBUSTNESS = "step-robustness"
    TRACE = "trace"


class CellStatus(str, Enum):
    OK = "ok"
    FAILED = "failed"


DEFAULT_H_LIST = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.00]
DEFAULT_STEP_AMPLITUDES = [0.0, 0.5, 1.0, 2.0]
DEFAULT_STEP_DELAYS = [0.05, 0.25, 0.50, 0.75, 0.95]


class ExperimentConfig(BaseModel):
    """Parameters of one experiment run"""
    model_config = ConfigDict(frozen=True, extra='forbid', populate_by_name=True)

    experiment: ExperimentKind
    h_list: List[float] = Field(default_factory=lambda: list(DEFAULT_H_LIST),
                                validation_alias=AliasChoices('h_list', 'H_list', 'hurst_list'), min_length=1)
    n_list: List[int] = Field(default_factory=lambda: [131072],
                              validation_alias=AliasChoices('n_list', 'N_list'), min_length=1)
    seeds_per_cell: int = Field(default=10, ge=1)
    step_amplitudes: List[float] = Field(default_factory=lambda: list(DEFAULT_STEP_AMPLITUDES))
    step_delays: List[float] = Field(default_factory=lambda: list(DEFAULT_STEP_DELAYS),
                                     description="Step delays as fractions of N")
    methods: List[EstimationMethod] = Field(default_factory=lambda: [EstimationMethod.MAVAR], min_length=1)
    mode: AmplitudeMode = Field(default=AmplitudeMode.DETERMINISTIC,
                                description="Generator amplitude law; fixed sqrt-PSD amplitudes by default")
    master_seed: int = Field(default=20050101, ge=0)
    tau0: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    generated_n: Optional[int] = Field(default=None, description="Length generated before truncation (convergence)")
    workers: int = Field(default=1, ge=1)
    output_dir: Optional[str] = None

    @field_validator('h_list')
    @classmethod
    def hurst_in_range(cls, v):
        bad = [h for h in v if not 0.5 <= h <= 1.0]
        if bad:
            raise ValueError(f'H values must lie in [0.5, 1.0], got {bad}')
        return v

    @field_validator('n_list')
    @classmethod
    def lengths_power_of_two(cls, v):
        bad = [n for n in v if n < 8 or not is_power_of_two(n)]
        if bad:
            raise ValueError(f'N values must be powers of two >= 8, got {bad}')
        return v

    @field_validator('step_delays')
    @classmethod
    def delays_inside(cls, v):
        bad = [d for d in v if not 0.0 < d < 1.0]
        if bad:
            raise ValueError(f'step delays must be fractions strictly inside (0, 1), got {bad}')
        return v

    @model_validator(mode='after')
    def generated_length(self):
        if self.generated_n is not None and (self.generated_n < 8 or not is_power_of_two(self.generated_n)):
            raise ValueError(f'generated_n must be a power of two >= 8, got {self.generated_n}')
        return self

    @property
    def source_length(self) -> int:
        """Length generated per seed; truncations are taken from its prefix"""
        return self.generated_n if self.generated_n is not None else max(self.n_list)


class CellResult(BaseModel):
    """Aggregate of one (method, H, N[, A, M]) cell over its seeds"""
    model_config = ConfigDict(frozen=True)

    method: EstimationMethod
    h_true: float
    n: int
    amplitude: Optional[float] = None
    delay_frac: Optional[float] = None
    delay: Optional[int] = None
    estimates: List[float] = Field(default_factory=list, description="Per-seed H estimates")
    deltas: List[float] = Field(default_factory=list, description="Per-seed error or shift")
    mean: Optional[float] = Field(default=None, description="None when the cell failed")
    std: Optional[float] = None
    status: CellStatus = CellStatus.OK
    message: str = ""
    flags: List[str] = Field(default_factory=list)


class ExperimentReport(BaseModel):
    """Cells in config-product order plus run metadata"""
    model_config = ConfigDict(frozen=True)

    kind: ExperimentKind
    cells: List[CellResult]
    metadata: Dict[str, Any] = Field(default_factory=dict)
    curves: Dict[str, MavarCurve] = Field(default_factory=dict, description="Plot curves keyed by cell label")

    @property
    def failed_cells(self) -> List[CellResult]:
        return [c for c in self.cells if c.status == CellStatus.FAILED]

    def to_frame(self) -> pd.DataFrame:
        """Summary table; step sweeps report shifts, the others errors"""
        rows = []
        for cell in self.cells:
            row = {"method": cell.method.value, "H_true": cell.h_true, "N": cell.n}
            if self.kind == ExperimentKind.STEP_ROBUSTNESS:
                row.update({"A": cell.amplitude, "M_frac": cell.delay_frac, "M": cell.delay,
                            "mean_shift": cell.mean, "std_shift": cell.std})
            else:
                row.update({"mean_err": cell.mean, "std_err": cell.std})
            row.update({"status": cell.status.value, "flags": ";".join(cell.flags), "message": cell.message})
            rows.append(row)
        return pd.DataFrame(rows)

    def to_seed_frame(self) -> pd.DataFrame:
        """Long table with one row per seed"""
        rows = []
        for cell in self.cells:
            for rep, (est, delta) in enumerate(zip(cell.estimates, cell.deltas)):
                row = {"method": cell.method.value, "H_true": cell.h_true, "N": cell.n, "seed_index": rep,
                       "H_est": est, "delta": delta}
                if self.kind == ExperimentKind.STEP_ROBUSTNESS:
                    row.update({"A": cell.amplitude, "M_frac": cell.delay_frac, "M": cell.delay})
                rows.append(row)
        return pd.DataFrame(rows)
