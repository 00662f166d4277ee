"""Run manifest written at the head of every output file."""

from datetime import datetime, timezone
from typing import Any

from pydantic import BaseModel, Field

from src import __version__


class RunManifest(BaseModel):
    """
    Everything needed to reproduce a CLI run.

    Attributes:
        subcommand: CLI subcommand that produced the file
        argv: Full argument vector
        source: Preset name or configuration file path
        variant: Variant label, if any
        chi_literal: Whether chi was read without the 2*pi factor
        parameters: Resolved SystemParams and DriveConfig fields
        options: Subcommand options (grid, method, tau grid, ...)
        summary: Scalar results derived from the rows (g2 at zero delay, photon flux, ...)
        tool_version: hybridqed version
        timestamp: Run start (UTC)
        run_id: Run identifier shared with the logs
        outputs: Files written by the run
    """

    subcommand: str
    argv: list[str] = Field(default_factory=list)
    source: str | None = None
    variant: str | None = None
    chi_literal: bool = False
    parameters: dict[str, Any] = Field(default_factory=dict)
    options: dict[str, Any] = Field(default_factory=dict)
    summary: dict[str, Any] = Field(default_factory=dict)
    tool_version: str = __version__
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    run_id: str | None = None
    outputs: list[str] = Field(default_factory=list)

    model_config = {
        "json_schema_extra": {
            "example": {
                "subcommand": "response",
                "argv": ["response", "--preset", "fig2", "--variant", "iii"],
                "source": "fig2",
                "variant": "iii",
                "chi_literal": True,
                "parameters": {"omega_mech": 53407075.11102643},
                "options": {"method": "closed"},
                "tool_version": "0.1.0",
                "timestamp": "2025-01-01T00:00:00Z",
                "run_id": "550e8400-e29b-41d4-a716-446655440000",
                "outputs": ["fig2_iii.csv"],
            }
        }
    }

    def header_lines(self) -> list[str]:
        """Comment lines: the JSON manifest followed by a readable echo."""
        lines = [f"# manifest: {self.model_dump_json()}"]
        lines.append(f"# subcommand: {self.subcommand}")
        if self.source:
            lines.append(f"# source: {self.source}")
        if self.variant:
            lines.append(f"# variant: {self.variant}")
        for key, value in self.parameters.items():
            lines.append(f"# {key}: {value!r}")
        for key, value in self.summary.items():
            lines.append(f"# summary.{key}: {value!r}")
        return lines
