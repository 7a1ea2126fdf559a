import logging
import os
import sys
from importlib import metadata
from typing import Dict, Iterable, Optional, Tuple

from pythonjsonlogger import jsonlogger

logger = logging.getLogger(__name__)

TEXT_LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
JSON_LOG_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


def setup_logging(log_file: Optional[str] = None, log_level: str = "INFO", log_format: str = "text"):
    """Setup application logging (stderr plus optional file, text or JSON lines)"""
    if log_format == "json":
        formatter = jsonlogger.JsonFormatter(JSON_LOG_FORMAT)
    else:
        formatter = logging.Formatter(TEXT_LOG_FORMAT)

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    for handler in handlers:
        handler.setFormatter(formatter)

    logging.basicConfig(
        level=getattr(logging, log_level.upper(), logging.INFO),
        handlers=handlers,
        force=True
    )


def validate_input_file(file_path: str) -> Tuple[bool, str]:
    """Check that an input series file exists and is non-empty"""
    if not os.path.exists(file_path):
        return False, f"File does not exist: {file_path}"
    if not os.path.isfile(file_path):
        return False, f"Not a regular file: {file_path}"
    if os.path.getsize(file_path) == 0:
        return False, f"File is empty: {file_path}"
    return True, "Valid input file"


def is_power_of_two(value: int) -> bool:
    return value > 0 and (value & (value - 1)) == 0


def package_versions(packages: Iterable[str] = ("numpy", "scipy", "pandas", "pydantic")) -> Dict[str, str]:
    """Installed versions of the numerical stack, recorded in report metadata"""
    versions = {}
    for name in packages:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions
