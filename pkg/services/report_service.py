"""
Report Service
Handles report files: MAVAR curve CSVs, estimate JSON, experiment tables and plot data
"""

import json
import logging
import os
import re
from typing import Any, Dict, Optional

import pandas as pd

from config import Config
from models.curve import MavarCurve
from models.experiment import ExperimentReport
from models.series import SeriesRole

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def safe_name(label: str) -> str:
    """File-system friendly form of a curve or cell label"""
    return re.sub(r"[^A-Za-z0-9_.=-]+", "_", label).strip("_") or "curve"


class ReportService:
    """Service for writing and reading analysis reports"""

    def __init__(self, output_dir: Optional[str] = None):
        """
        Initialize report service

        Args:
            output_dir: Directory for reports
                        If None, uses Config.OUTPUT_DIR (MAVAR_OUTPUT_DIR)
        """
        self.output_dir = output_dir or Config.OUTPUT_DIR
        os.makedirs(self.output_dir, exist_ok=True)
        logger.debug(f"[Report Service] Output directory: {self.output_dir}")

    def path(self, *parts: str) -> str:
        """Path inside the output directory, creating parent folders"""
        full = os.path.join(self.output_dir, *parts)
        os.makedirs(os.path.dirname(full), exist_ok=True)
        return full

    # ========================================================================
    # Tables
    # ========================================================================

    def write_table(self, frame: pd.DataFrame, name: str) -> str:
        """CSV with a header row and round-trip exact floats"""
        target = self.path(name)
        frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
        logger.info(f"[Report Service] Wrote {len(frame)} rows to {target}")
        return target

    @staticmethod
    def read_table(path: str) -> pd.DataFrame:
        return pd.read_csv(path, float_precision="round_trip")

    def write_curve(self, curve: MavarCurve, name: str = "mavar_curve.csv") -> str:
        """Curve CSV with columns n,tau,mavar,m,conf"""
        return self.write_table(curve.to_frame(), name)

    @classmethod
    def read_curve(cls, path: str, role_used: SeriesRole = SeriesRole.RATE) -> MavarCurve:
        return MavarCurve.from_frame(cls.read_table(path), source_label=path, role_used=role_used)

    # ========================================================================
    # JSON
    # ========================================================================

    def write_json(self, document: Dict[str, Any], name: str) -> str:
        """Pretty-printed UTF-8 JSON"""
        target = self.path(name)
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(document, fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        logger.info(f"[Report Service] Wrote {target}")
        return target

    @staticmethod
    def read_json(path: str) -> Dict[str, Any]:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    # ========================================================================
    # Experiments
    # ========================================================================

    def write_experiment(self, report: ExperimentReport, stem: Optional[str] = None,
                         fmt: str = "csv") -> Dict[str, str]:
        """
        Write an experiment report

        csv: <stem>.csv summary, <stem>_seeds.csv per-seed rows,
        <stem>_meta.json metadata, <stem>_curves/ plot curves.
        json: one <stem>.json document holding all of it.

        Returns:
            Mapping of artifact name to written path
        """
        stem = stem or report.kind.value.replace("-", "_")
        written: Dict[str, str] = {}
        if fmt == "json":
            document = {
                "kind": report.kind.value,
                "metadata": report.metadata,
                "cells": [cell.model_dump(mode="json") for cell in report.cells],
                "curves": {label: curve.to_frame().to_dict(orient="list") for label, curve in report.curves.items()}
            }
            written["report"] = self.write_json(document, f"{stem}.json")
            return written

        written["summary"] = self.write_table(report.to_frame(), f"{stem}.csv")
        written["seeds"] = self.write_table(report.to_seed_frame(), f"{stem}_seeds.csv")
        written["metadata"] = self.write_json(report.metadata, f"{stem}_meta.json")
        for label, curve in report.curves.items():
            written[f"curve:{label}"] = self.write_curve(curve, os.path.join(f"{stem}_curves", f"{safe_name(label)}.csv"))
        if report.failed_cells:
            logger.warning(f"[Report Service] {len(report.failed_cells)} failed cells recorded in {written['summary']}")
        return written
