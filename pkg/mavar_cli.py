#!/usr/bin/env python3
"""
Command-line entry point for MAVAR Hurst analysis.

Usage:
    python mavar_cli.py analyze trace.txt --tau0 0.008 --segments 2 --methods mavar haarld
    python mavar_cli.py generate --spec '{"H": 0.8, "N": 65536, "seed": 7}' --output lrd.txt
    python mavar_cli.py accuracy --H 0.6 0.8 --N 1024 2048 --seeds 10 --methods mavar haarld
    python mavar_cli.py convergence --H 0.75 --seeds 4
    python mavar_cli.py step-sweep --N 1024 --amplitudes 0 0.5 1 2
    python mavar_cli.py theory --alpha -0.6 --n-max 1000
    python mavar_cli.py bin packets.txt --tau0 0.008 --output counts.txt

Exit codes: 0 success, 1 input or configuration error, 2 analysis validity failure.
"""

import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from config import Config
from models.estimate import METHOD_ALIASES, EstimationMethod, PowerLawComponent, PowerLawModel, Weighting
from models.experiment import ExperimentConfig, ExperimentKind
from models.generator import AmplitudeMode
from models.series import SeriesFormat, SeriesRole
from modules.errors import (DegenerateSeriesError, ExperimentError, FitError, GeneratorError, GridError,
                            QuadratureError, SeriesError)
from modules.estimation import MIN_FIT_POINTS, estimate_hurst, estimate_report, fit_segments, fit_slope, \
    hurst_from_slope, tail_limit
from modules.mavar import make_tau_grid, mavar_curve
from modules.series_io import bin_timestamps, integrate, load_series, read_timestamps, write_series
from modules.spectral_theory import theoretical_curve, transfer_table
from modules.synth import apply_contaminant, gen_lrd, make_contaminant, make_generator_spec
from modules.utils import package_versions, setup_logging
from services.experiment_service import CONVERGENCE_LENGTHS, ExperimentService
from services.report_service import ReportService

logger = logging.getLogger("mavar_cli")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ANALYSIS = 2


def _methods(names: Optional[List[str]]) -> List[EstimationMethod]:
    methods = [METHOD_ALIASES[name] for name in (names or ["mavar"])]
    return list(dict.fromkeys(methods))


def _load_json_argument(value: str) -> Any:
    """Inline JSON text or the path of a JSON file"""
    if os.path.isfile(value):
        with open(value, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(value)


# ========================================================================
# analyze
# ========================================================================

def cmd_analyze(args) -> int:
    """MAVAR curve, single and segmented fits, optional baselines"""
    reports = ReportService(args.out)
    series = load_series(args.input, SeriesFormat(args.input_format), tau0=args.tau0, role=SeriesRole(args.role))
    if args.integrate:
        series = integrate(series)

    curve = mavar_curve(series, ratio=args.ratio)
    n_hi = args.n_hi if args.n_hi is not None else tail_limit(series.n_samples, args.tail_divisor)
    in_range = int(np.count_nonzero((curve.n_values >= args.n_lo) & (curve.n_values <= n_hi)))
    if in_range < MIN_FIT_POINTS:
        raise SeriesError(f"insufficient data: N={series.n_samples} leaves {in_range} grid points in "
                          f"n range [{args.n_lo}, {n_hi}], need {MIN_FIT_POINTS}")

    if args.format == "json":
        written = [reports.write_json(curve.to_frame().to_dict(orient="list"), "mavar_curve.json")]
    else:
        written = [reports.write_curve(curve, "mavar_curve.csv")]

    weighting = Weighting(args.weighting)
    fit = fit_slope(curve, n_lo=args.n_lo, n_hi=n_hi, weighting=weighting)
    segmented = None
    if args.segments > 1:
        segmented = fit_segments(curve, k=args.segments, n_lo=args.n_lo, n_hi=n_hi, weighting=weighting)
    document = estimate_report(hurst_from_slope(fit), segmented, curve, args.tail_divisor)

    baselines: List[Dict[str, Any]] = []
    for method in _methods(args.methods):
        if method == EstimationMethod.MAVAR:
            continue
        try:
            baselines.append(estimate_report(estimate_hurst(series, method), role=series.role))
        except (FitError, GridError, SeriesError) as e:
            logger.warning(f"[CLI] {method.value} estimate failed: {e}")
            baselines.append({"method": method.value, "role_used": series.role.value, "error": str(e)})
    document["baselines"] = baselines

    written.append(reports.write_json(document, "estimate.json"))
    logger.info(f"[CLI] H={document['H']:.4f} mu={document['mu']:.4f} lrd_valid={document['lrd_valid']} "
                f"(role {document['role_used']})")
    for path in written:
        print(path)
    return EXIT_OK


# ========================================================================
# generate
# ========================================================================

def _contaminants(value: Optional[str]) -> List[Dict[str, Any]]:
    """List of contaminant objects, or one object keyed by kind"""
    if not value:
        return []
    data = _load_json_argument(value)
    if isinstance(data, dict):
        if "kind" in data:
            return [data]
        return [dict(params, kind=kind) for kind, params in data.items()]
    if isinstance(data, list):
        return data
    raise GeneratorError(f"contaminants must be a JSON object or list, got {type(data).__name__}")


def cmd_generate(args) -> int:
    """Seeded LRD series plus contaminants, with a sidecar JSON echo"""
    data = _load_json_argument(args.spec)
    if not isinstance(data, dict):
        raise GeneratorError("generator spec must be a JSON object")
    if args.seed is not None:
        data.setdefault("seed", args.seed)
    spec = make_generator_spec(data)
    contaminants = [make_contaminant(c) for c in _contaminants(args.contaminants)]

    series = gen_lrd(spec, args.tau0)
    for contaminant in contaminants:
        series = apply_contaminant(series, contaminant)

    output = args.output or ReportService(args.out).path(f"lrd_H{spec.hurst:g}_N{spec.n}_seed{spec.seed}.txt")
    folder = os.path.dirname(output)
    if folder:
        os.makedirs(folder, exist_ok=True)
    write_series(series, output)

    sidecar = {
        "spec": spec.to_dict(),
        "contaminants": [c.model_dump(mode="json") for c in contaminants],
        "tau0": args.tau0,
        "role": series.role.value,
        "versions": package_versions()
    }
    with open(f"{output}.json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, ensure_ascii=False)
        fh.write("\n")
    logger.info(f"[CLI] Generated {series.n_samples} samples to {output}")
    print(output)
    return EXIT_OK


# ========================================================================
# experiments
# ========================================================================

EXPERIMENT_DEFAULTS = {
    ExperimentKind.ACCURACY: {},
    ExperimentKind.CONVERGENCE: {"h_list": [0.75], "n_list": CONVERGENCE_LENGTHS, "seeds_per_cell": 4},
    ExperimentKind.STEP_ROBUSTNESS: {"h_list": [0.80]},
}


def cmd_experiment(args) -> int:
    """accuracy, convergence and step-sweep"""
    kind = ExperimentKind(args.experiment)
    settings: Dict[str, Any] = {"seeds_per_cell": Config.SEEDS_PER_CELL, "master_seed": Config.MASTER_SEED,
                                "workers": Config.EXPERIMENT_WORKERS}
    settings.update(EXPERIMENT_DEFAULTS[kind])
    overrides = {
        "h_list": args.H, "n_list": args.N, "seeds_per_cell": args.seeds, "master_seed": args.seed,
        "workers": args.workers, "step_amplitudes": getattr(args, "amplitudes", None),
        "step_delays": getattr(args, "delays", None), "generated_n": getattr(args, "generated_n", None),
        "mode": args.mode
    }
    settings.update({key: value for key, value in overrides.items() if value is not None})
    config = ExperimentConfig(experiment=kind, methods=_methods(args.methods), tau0=args.tau0,
                              output_dir=args.out, **settings)

    service = ExperimentService(ratio=args.ratio, n_lo=args.n_lo, tail_divisor=args.tail_divisor)
    report = service.run(config)
    written = ReportService(args.out).write_experiment(report, fmt=args.format)
    for path in written.values():
        print(path)
    return EXIT_OK


# ========================================================================
# theory and bin
# ========================================================================

def cmd_theory(args) -> int:
    """Transfer-function plot data and the theoretical MAVAR of a power-law model"""
    reports = ReportService(args.out)
    tau = args.tau if args.tau is not None else args.tau0
    f_values = np.linspace(0.0, args.f_max_tau / tau, args.points)
    written = [reports.write_table(transfer_table(args.n_values, tau, f_values), "transfer.csv")]

    amplitudes = args.h if args.h is not None else [1.0] * len(args.alpha)
    if len(amplitudes) != len(args.alpha):
        raise GridError(f"{len(args.alpha)} alpha values but {len(amplitudes)} amplitudes")
    model = PowerLawModel(components=[PowerLawComponent(alpha=a, h=h) for a, h in zip(args.alpha, amplitudes)],
                          f_h=args.f_h if args.f_h is not None else 0.5 / args.tau0)
    nominal_n = 30 * args.n_max
    grid = make_tau_grid(nominal_n, ratio=args.ratio, n_max=args.n_max)
    curve = theoretical_curve(model, grid, args.tau0, n_samples=nominal_n, rel_tol=Config.QUAD_REL_TOL,
                              workers=args.workers or 1)
    written.append(reports.write_curve(curve, "theory_curve.csv"))
    for path in written:
        print(path)
    return EXIT_OK


def cmd_bin(args) -> int:
    """Counts per interval from one timestamp per line"""
    series = bin_timestamps(read_timestamps(args.input), args.tau0, span=args.span, label=args.input)
    output = args.output or ReportService(args.out).path("counts.txt")
    write_series(series, output, header=f"counts per {args.tau0} s bin from {args.input}")
    logger.info(f"[CLI] Binned into {series.n_samples} intervals: {output}")
    print(output)
    return EXIT_OK


# ========================================================================
# Parser
# ========================================================================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tau0", type=float, default=Config.DEFAULT_TAU0, help="Sampling period in seconds")
    common.add_argument("--seed", type=int, default=None, help="Master seed (experiments) or generator seed")
    common.add_argument("--out", default=None, help="Output directory (default MAVAR_OUTPUT_DIR)")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--methods", nargs="+", choices=sorted(METHOD_ALIASES), default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--log-level", default=Config.LOG_LEVEL)
    common.add_argument("--log-file", default=Config.LOG_FILE)
    common.add_argument("--log-format", choices=["text", "json"], default=Config.LOG_FORMAT)

    fit = argparse.ArgumentParser(add_help=False)
    fit.add_argument("--ratio", type=float, default=Config.GRID_RATIO, help="Tau grid ratio")
    fit.add_argument("--n-lo", type=int, default=Config.FIT_N_LO)
    fit.add_argument("--tail-divisor", type=int, default=Config.FIT_TAIL_DIVISOR)

    parser = argparse.ArgumentParser(prog="mavar_cli.py",
                                     description="Hurst parameter estimation by Modified Allan Variance")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common, fit], help="Analyze a series file")
    analyze.add_argument("input")
    analyze.add_argument("--input-format", choices=[f.value for f in SeriesFormat], default="one-column")
    analyze.add_argument("--role", choices=[r.value for r in SeriesRole], default="rate")
    analyze.add_argument("--integrate", action="store_true", help="Integrate rate samples before analysis")
    analyze.add_argument("--segments", type=int, choices=[1, 2, 3], default=1)
    analyze.add_argument("--n-hi", type=int, default=None)
    analyze.add_argument("--weighting", choices=[w.value for w in Weighting], default="confidence")
    analyze.set_defaults(handler=cmd_analyze)

    generate = sub.add_parser("generate", parents=[common], help="Generate a synthetic LRD series")
    generate.add_argument("--spec", required=True, help="Generator spec JSON (inline or file)")
    generate.add_argument("--contaminants", default=None, help="Contaminant JSON (inline or file)")
    generate.add_argument("--output", default=None)
    generate.set_defaults(handler=cmd_generate)

    for name, kind in (("accuracy", ExperimentKind.ACCURACY), ("convergence", ExperimentKind.CONVERGENCE),
                       ("step-sweep", ExperimentKind.STEP_ROBUSTNESS)):
        experiment = sub.add_parser(name, parents=[common, fit], help=f"Run the {kind.value} experiment")
        experiment.add_argument("--H", type=float, nargs="+", default=None)
        experiment.add_argument("--N", type=int, nargs="+", default=None)
        experiment.add_argument("--seeds", type=int, default=None, help="Seeds per cell")
        experiment.add_argument("--mode", choices=[m.value for m in AmplitudeMode], default=None,
                                help="Generator amplitude law (default deterministic-sqrt-psd)")
        if kind == ExperimentKind.CONVERGENCE:
            experiment.add_argument("--generated-n", type=int, default=None)
        if kind == ExperimentKind.STEP_ROBUSTNESS:
            experiment.add_argument("--amplitudes", type=float, nargs="+", default=None)
            experiment.add_argument("--delays", type=float, nargs="+", default=None, help="Fractions of N")
        experiment.set_defaults(handler=cmd_experiment, experiment=kind.value)

    theory = sub.add_parser("theory", parents=[common, fit], help="Write theoretical plot data")
    theory.add_argument("--alpha", type=float, nargs="+", default=[-0.6])
    theory.add_argument("--h", type=float, nargs="+", default=None)
    theory.add_argument("--f-h", type=float, default=None, help="Upper cutoff in hertz (default Nyquist)")
    theory.add_argument("--n-max", type=int, default=1000)
    theory.add_argument("--n-values", type=int, nargs="+", default=[1, 2, 4, 16, 128])
    theory.add_argument("--tau", type=float, default=None, help="tau of the transfer-function table")
    theory.add_argument("--f-max-tau", type=float, default=3.0)
    theory.add_argument("--points", type=int, default=601)
    theory.set_defaults(handler=cmd_theory)

    binning = sub.add_parser("bin", parents=[common], help="Bin event timestamps into counts")
    binning.add_argument("input")
    binning.add_argument("--span", type=float, default=None)
    binning.add_argument("--output", default=None)
    binning.set_defaults(handler=cmd_bin)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_file, args.log_level, args.log_format)
    try:
        return args.handler(args)
    except (DegenerateSeriesError, FitError, QuadratureError) as e:
        logger.error(f"[CLI] Analysis failed: {e}")
        return EXIT_ANALYSIS
    except (SeriesError, GeneratorError, GridError, ExperimentError, ValidationError,
            json.JSONDecodeError, OSError) as e:
        logger.error(f"[CLI] Invalid input: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
