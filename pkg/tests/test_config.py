import json
import logging

import pytest

from config import Config
from modules.utils import is_power_of_two, package_versions, setup_logging, validate_input_file


def test_defaults_are_valid():
    assert Config.validate_config() is True


@pytest.mark.parametrize("name,value", [("GRID_RATIO", 1.0), ("FIT_TAIL_DIVISOR", 2), ("LOG_FORMAT", "xml"),
                                        ("SEEDS_PER_CELL", 0)])
def test_invalid_setting(monkeypatch, name, value):
    monkeypatch.setattr(Config, name, value)
    with pytest.raises(ValueError, match="Configuration errors"):
        Config.validate_config()


def test_summary_sections():
    summary = Config.get_summary()
    assert set(summary) == {"output_dir", "log", "analysis", "experiments"}
    assert summary["analysis"]["grid_ratio"] == Config.GRID_RATIO
    assert summary["experiments"]["master_seed"] == Config.MASTER_SEED


def test_json_logging_to_file(tmp_path):
    log_file = str(tmp_path / "nested" / "mavar.log")
    setup_logging(log_file, "DEBUG", "json")
    logging.getLogger("mavar.test").info("grid ready")
    for handler in logging.getLogger().handlers:
        handler.flush()

    with open(log_file, encoding="utf-8") as fh:
        record = json.loads(fh.readline())
    assert record["message"] == "grid ready"
    assert record["levelname"] == "INFO"
    assert record["name"] == "mavar.test"


def test_is_power_of_two():
    assert [v for v in range(0, 70) if is_power_of_two(v)] == [1, 2, 4, 8, 16, 32, 64]
    assert not is_power_of_two(-4)


def test_validate_input_file(tmp_path):
    assert not validate_input_file(str(tmp_path / "missing.txt"))[0]
    assert not validate_input_file(str(tmp_path))[0]
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert "empty" in validate_input_file(str(empty))[1]
    data = tmp_path / "data.txt"
    data.write_text("1.0\n")
    assert validate_input_file(str(data)) == (True, "Valid input file")


def test_package_versions():
    versions = package_versions(("numpy", "surely-not-installed-package"))
    assert versions["numpy"] != "unknown"
    assert versions["surely-not-installed-package"] == "unknown"
