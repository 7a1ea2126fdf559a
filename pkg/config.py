# config.py - environment-driven settings for the MAVAR analysis toolkit
import os
import sys
import logging
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


class Config:
    # ========================================================================
    # OUTPUT AND LOGGING
    # ========================================================================

    # Default directory for reports, curves and generated series
    OUTPUT_DIR = os.getenv('MAVAR_OUTPUT_DIR', os.path.join(os.getcwd(), 'mavar_output'))

    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('LOG_FILE')  # stderr only when unset
    LOG_FORMAT = os.getenv('LOG_FORMAT', 'text')  # text | json

    # ========================================================================
    # ANALYSIS DEFAULTS
    # ========================================================================

    DEFAULT_TAU0 = float(os.getenv('DEFAULT_TAU0', '1.0'))

    # Geometric tau grid, 24 values per decade at 1.1
    GRID_RATIO = float(os.getenv('GRID_RATIO', '1.1'))

    # Slope fit range: n >= FIT_N_LO and n <= N / FIT_TAIL_DIVISOR
    FIT_N_LO = int(os.getenv('FIT_N_LO', '5'))
    FIT_TAIL_DIVISOR = int(os.getenv('FIT_TAIL_DIVISOR', '30'))

    # Relative error target of the theoretical MAVAR quadrature
    QUAD_REL_TOL = float(os.getenv('QUAD_REL_TOL', '1e-6'))

    # ========================================================================
    # EXPERIMENTS
    # ========================================================================

    EXPERIMENT_WORKERS = int(os.getenv('EXPERIMENT_WORKERS', str(min(4, os.cpu_count() or 1))))
    MASTER_SEED = int(os.getenv('MASTER_SEED', '20050101'))
    SEEDS_PER_CELL = int(os.getenv('SEEDS_PER_CELL', '10'))

    # ========================================================================
    # VALIDATION AND UTILITY METHODS
    # ========================================================================

    @classmethod
    def validate_config(cls) -> bool:
        """Validate the configuration"""
        errors = []

        if cls.LOG_FORMAT not in ('text', 'json'):
            errors.append("LOG_FORMAT must be 'text' or 'json'")

        if not (cls.DEFAULT_TAU0 > 0):
            errors.append("DEFAULT_TAU0 must be positive")

        if not 1.0 < cls.GRID_RATIO <= 2.0:
            errors.append("GRID_RATIO must be in (1, 2]")

        if cls.FIT_N_LO < 1:
            errors.append("FIT_N_LO must be at least 1")

        if cls.FIT_TAIL_DIVISOR < 3:
            errors.append("FIT_TAIL_DIVISOR must be at least 3 (n never exceeds N/3)")

        if not 0.0 < cls.QUAD_REL_TOL < 1.0:
            errors.append("QUAD_REL_TOL must be between 0 and 1")

        if cls.EXPERIMENT_WORKERS < 1:
            errors.append("EXPERIMENT_WORKERS must be at least 1")

        if cls.SEEDS_PER_CELL < 1:
            errors.append("SEEDS_PER_CELL must be at least 1")

        if errors:
            raise ValueError(f"Configuration errors: {'; '.join(errors)}")

        return True

    @classmethod
    def get_summary(cls) -> dict:
        """Get the effective settings as a plain dict"""
        return {
            "output_dir": cls.OUTPUT_DIR,
            "log": {"level": cls.LOG_LEVEL, "file": cls.LOG_FILE, "format": cls.LOG_FORMAT},
            "analysis": {
                "default_tau0": cls.DEFAULT_TAU0,
                "grid_ratio": cls.GRID_RATIO,
                "fit_n_lo": cls.FIT_N_LO,
                "fit_tail_divisor": cls.FIT_TAIL_DIVISOR,
                "quad_rel_tol": cls.QUAD_REL_TOL
            },
            "experiments": {
                "workers": cls.EXPERIMENT_WORKERS,
                "master_seed": cls.MASTER_SEED,
                "seeds_per_cell": cls.SEEDS_PER_CELL
            }
        }

    @classmethod
    def print_config_summary(cls):
        """Log a summary of the current configuration"""
        summary = cls.get_summary()
        logger.info("=" * 60)
        logger.info("CONFIGURATION SUMMARY")
        logger.info("=" * 60)
        logger.info(f"Output directory: {summary['output_dir']}")
        logger.info(f"Logging: {summary['log']}")
        logger.info(f"Analysis defaults: {summary['analysis']}")
        logger.info(f"Experiments: {summary['experiments']}")
        logger.info("=" * 60)


# ========================================================================
# STARTUP VALIDATION
# ========================================================================

if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    try:
        Config.print_config_summary()
        Config.validate_config()
        logger.info("Configuration validated successfully")
    except ValueError as e:
        logger.error(f"Configuration error: {e}")
        sys.exit(1)
