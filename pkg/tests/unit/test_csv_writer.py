"""Unit tests for CSV rendering and the run manifest."""

import json
from pathlib import Path

import pytest

from src import __version__
from src.cli.csv_writer import emit_csv, format_cell, render_csv
from src.lib.exceptions import OutputError
from src.models.manifest import RunManifest


@pytest.mark.unit
class TestFormatCell:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (None, ""),
            (True, "true"),
            (False, "false"),
            (7, "7"),
            (float("nan"), "nan"),
            (0.1, "0.10000000000000001"),
            (0.5, "0.5"),
            (1e22, "1e+22"),
            ("iii", "iii"),
        ],
    )
    def test_cells(self, value: object, expected: str) -> None:
        assert format_cell(value) == expected  # type: ignore[arg-type]

    def test_float_round_trip(self) -> None:
        value = 53407075.11102643
        assert float(format_cell(value)) == value


@pytest.mark.unit
class TestRenderCsv:
    def test_header_and_rows(self) -> None:
        text = render_csv([(1.0, True), (float("nan"), False)], ("mu_p", "ok"))
        assert text.splitlines() == ["mu_p,ok", "1,true", "nan,false"]

    def test_width_mismatch(self) -> None:
        with pytest.raises(OutputError) as exc_info:
            render_csv([(1.0,)], ("a", "b"))
        assert exc_info.value.details["row"] == 0

    def test_manifest_comment_lines(self) -> None:
        manifest = RunManifest(
            subcommand="response",
            source="fig2",
            variant="iii",
            parameters={"omega_mech": 1.5},
            run_id="abc",
        )
        lines = render_csv([], ("delta",), manifest).splitlines()
        assert lines[0].startswith("# manifest: ")
        payload = json.loads(lines[0].removeprefix("# manifest: "))
        assert payload["tool_version"] == __version__
        assert payload["run_id"] == "abc"
        assert "# source: fig2" in lines
        assert "# variant: iii" in lines
        assert "# omega_mech: 1.5" in lines
        assert lines[-1] == "delta"


@pytest.mark.unit
class TestEmitCsv:
    def test_writes_file_and_parents(self, tmp_path: Path) -> None:
        target = tmp_path / "out" / "sweep.csv"
        emit_csv([(1, 2)], ("a", "b"), target)
        assert target.read_text(encoding="utf-8") == "a,b\n1,2\n"

    def test_stdout(self, capsys: pytest.CaptureFixture[str]) -> None:
        emit_csv([("x",)], ("label",))
        assert capsys.readouterr().out == "label\nx\n"

    def test_unwritable_path(self, tmp_path: Path) -> None:
        blocker = tmp_path / "file"
        blocker.write_text("", encoding="utf-8")
        with pytest.raises(OutputError) as exc_info:
            emit_csv([], ("a",), blocker / "nested.csv")
        assert exc_info.value.details["path"].endswith("nested.csv")
