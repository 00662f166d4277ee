"""Unit tests for settings, logging, exceptions and the worker pool."""

import json
import logging
import threading
import time

import pytest

from src.lib.concurrency import parallel_map
from src.lib.config import Settings
from src.lib.exceptions import HybridQEDException, QuadratureError
from src.lib.logger import JSONFormatter, get_run_id, set_run_id


@pytest.mark.unit
class TestSettings:
    def test_defaults(self) -> None:
        s = Settings(_env_file=None)
        assert s.threads == 1
        assert s.quad_rel_tol == 1e-7
        assert s.ode_method == "Radau"
        assert s.log_format == "json"
        assert s.chi_literal is True

    def test_environment_override(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("THREADS", "4")
        monkeypatch.setenv("QUAD_REL_TOL", "1e-9")
        monkeypatch.setenv("CHI_LITERAL", "false")
        s = Settings(_env_file=None)
        assert s.threads == 4
        assert s.quad_rel_tol == 1e-9
        assert s.chi_literal is False

    def test_rejects_zero_threads(self, monkeypatch: pytest.MonkeyPatch) -> None:
        monkeypatch.setenv("THREADS", "0")
        with pytest.raises(ValueError):
            Settings(_env_file=None)


@pytest.mark.unit
class TestLogging:
    def _record(self, **extra: object) -> logging.LogRecord:
        record = logging.LogRecord("src.test", logging.WARNING, __file__, 10, "sweep %s", ("done",), None)
        for key, value in extra.items():
            setattr(record, key, value)
        return record

    def test_json_fields(self) -> None:
        payload = json.loads(JSONFormatter().format(self._record()))
        assert payload["level"] == "WARNING"
        assert payload["logger"] == "src.test"
        assert payload["message"] == "sweep done"
        assert payload["timestamp"].endswith("Z")

    def test_run_id_and_extra(self) -> None:
        set_run_id("run-42")
        payload = json.loads(JSONFormatter().format(self._record(extra={"points": 11})))
        assert payload["run_id"] == "run-42"
        assert payload["points"] == 11

    def test_generated_run_id(self) -> None:
        run_id = set_run_id()
        assert get_run_id() == run_id
        assert len(run_id) == 36


@pytest.mark.unit
class TestExceptions:
    def test_details_default(self) -> None:
        error = QuadratureError("did not converge")
        assert isinstance(error, HybridQEDException)
        assert error.message == "did not converge"
        assert error.details == {}
        assert str(error) == "did not converge"


@pytest.mark.unit
class TestParallelMap:
    def test_inline(self) -> None:
        assert parallel_map(lambda x: x * x, [1, 2, 3], threads=1) == [1, 4, 9]

    def test_empty(self) -> None:
        assert parallel_map(lambda x: x, [], threads=4) == []

    def test_order_preserved_across_threads(self) -> None:
        def slow_first(x: int) -> tuple[int, str]:
            time.sleep(0.05 if x == 0 else 0.0)
            return x, threading.current_thread().name

        results = parallel_map(slow_first, range(8), threads=4)
        assert [r[0] for r in results] == list(range(8))

    def test_exception_propagates(self) -> None:
        def fail(x: int) -> int:
            raise QuadratureError(f"item {x}")

        with pytest.raises(QuadratureError):
            parallel_map(fail, [1, 2], threads=2)
