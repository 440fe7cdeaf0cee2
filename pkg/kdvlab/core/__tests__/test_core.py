import pytest
from loguru import logger

from kdvlab.core.config import Settings
from kdvlab.core.errors import (
    ConstraintDriftError,
    GridError,
    InstabilityError,
    KdVLabError,
    ModulationConditionError,
    SingularSystemError,
)
from kdvlab.core.logging import RUN_LOG, run_log, setup_logging


def test_settings_defaults(monkeypatch):
    monkeypatch.delenv("CONDITION_LIMIT", raising=False)
    cfg = Settings(_env_file=None)
    assert cfg.DEFAULT_POINTS == 1024
    assert cfg.CONDITION_LIMIT == 10.0
    assert cfg.CONSTRAINT_TOLERANCE == 1e-4


def test_settings_read_the_environment(monkeypatch):
    monkeypatch.setenv("CONSTRAINT_TOLERANCE", "1e-5")
    assert Settings(_env_file=None).CONSTRAINT_TOLERANCE == 1e-5


def test_errors_carry_their_diagnostics():
    error = ModulationConditionError("Modulation matrix is ill-conditioned", 42.0)
    assert isinstance(error, SingularSystemError)
    assert error.condition_number == 42.0
    assert "4.200e+01" in str(error)

    drift = ConstraintDriftError(3e-4, 1e-4)
    assert (drift.drift, drift.tolerance) == (3e-4, 1e-4)
    assert InstabilityError("step", 1.5).t == 1.5
    assert issubclass(GridError, ValueError) and issubclass(GridError, KdVLabError)


def test_setup_logging_accepts_a_level():
    setup_logging("DEBUG")
    setup_logging()


def test_unknown_level_is_rejected():
    with pytest.raises(ValueError):
        setup_logging("LOUD")


def test_level_names_are_case_insensitive():
    setup_logging("warning")


def test_run_log_captures_only_its_block(tmp_path):
    logger.info("before the run")
    with run_log(tmp_path / "run") as path:
        logger.info("inside the run")
    logger.info("after the run")

    assert path == tmp_path / "run" / RUN_LOG
    text = path.read_text()
    assert "inside the run" in text
    assert "before the run" not in text and "after the run" not in text


def test_run_log_replaces_a_previous_log(tmp_path):
    with run_log(tmp_path):
        logger.info("first run")
    with run_log(tmp_path) as path:
        logger.info("second run")
    assert "first run" not in path.read_text()
