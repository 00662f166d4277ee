"""CSV output with a run-manifest header."""

import csv
import io
import math
import sys
from collections.abc import Iterable, Sequence
from pathlib import Path

from src.lib.exceptions import OutputError
from src.lib.logger import get_logger
from src.models.manifest import RunManifest

logger = get_logger(__name__)

Cell = float | int | str | bool | None


def format_cell(value: Cell) -> str:
    """Serialize one cell; floats keep 17 significant digits and NaN prints as nan."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    return str(value)


def render_csv(
    rows: Iterable[Sequence[Cell]], schema: Sequence[str], manifest: RunManifest | None = None
) -> str:
    """
    Render manifest comment lines, the column header and the data rows.

    Raises:
        OutputError: If a row does not match the schema width
    """
    buffer = io.StringIO()
    if manifest is not None:
        for line in manifest.header_lines():
            buffer.write(line + "\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(schema)
    for index, row in enumerate(rows):
        if len(row) != len(schema):
            raise OutputError(
                f"Row {index} has {len(row)} cells, schema has {len(schema)} columns",
                details={"row": index, "schema": list(schema)},
            )
        writer.writerow([format_cell(cell) for cell in row])
    return buffer.getvalue()


def emit_csv(
    rows: Iterable[Sequence[Cell]],
    schema: Sequence[str],
    path: str | Path | None = None,
    manifest: RunManifest | None = None,
) -> None:
    """
    Write a CSV table to path, or to stdout when path is None.

    Args:
        rows: Data rows aligned with schema
        schema: Column names
        path: Output file
        manifest: Written as comment lines above the header

    Raises:
        OutputError: On I/O failure (details carry the path)
    """
    text = render_csv(rows, schema, manifest)
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write {target}: {e}", details={"path": str(target)}) from e
    logger.info(f"Wrote {target}")
