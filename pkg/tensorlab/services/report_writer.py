"""
Serialização de relatórios e gravação atômica em disco
"""

import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, List, Optional

from tensorlab.config import get_settings
from tensorlab.errors import InvalidArgumentError, ReportIOError
from tensorlab.models import ExperimentReport, OutputFormat, TrialRecord
from tensorlab.services.logging import get_logger

logger = get_logger(__name__)

CSV_COLUMNS: List[str] = [
    "trial",
    "n",
    "dim",
    "m",
    "value",
    "gap",
    "count",
    "converged",
    "iterations",
    "seed_index",
    "wall_ms",
]


def _csv_cell(column: str, value: Any) -> str:
    if value is None:
        return ""
    if column == "count":
        return f'"{value}"'
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ReportWriter:
    """Serviço para serializar e gravar relatórios"""

    def emit(self, report: ExperimentReport, output_format: OutputFormat) -> bytes:
        """
        Serialise a report

        JSON is a single object in model field order; CSV is a header row
        followed by one row per record, counts quoted and floats in
        shortest round-trip form.

        Args:
            report: Report to serialise
            output_format: json or csv

        Returns:
            UTF-8 bytes
        """
        fmt = OutputFormat(output_format)
        if fmt is OutputFormat.JSON:
            text = json.dumps(report.model_dump(mode="json"), indent=2) + "\n"
        elif fmt is OutputFormat.CSV:
            text = self._to_csv(report.records)
        else:
            raise InvalidArgumentError("unknown output format", {"format": str(output_format)})
        return text.encode("utf-8")

    def _to_csv(self, records: List[TrialRecord]) -> str:
        lines = [",".join(CSV_COLUMNS)]
        for record in records:
            row = record.model_dump()
            lines.append(",".join(_csv_cell(col, row[col]) for col in CSV_COLUMNS))
        return "\n".join(lines) + "\n"

    def resolve_path(self, output: Optional[str], subcommand: str, seed: int, output_format: OutputFormat) -> Optional[Path]:
        """
        Where a report goes

        An explicit path wins; '-' means stdout. Without one the report goes
        to TENSORLAB_OUTPUT_DIR/<subcommand>-seed<seed>.<format> when that
        directory is configured, otherwise to stdout (None).
        """
        if output == "-":
            return None
        if output:
            return Path(output)
        output_dir = get_settings().OUTPUT_DIR
        if output_dir:
            return Path(output_dir) / f"{subcommand}-seed{seed}.{OutputFormat(output_format).value}"
        return None

    def write(self, payload: bytes, path: Optional[Path]) -> None:
        """
        Write bytes to a file atomically, or to stdout when path is None

        The payload goes to a temporary file in the target directory which
        then replaces the target.

        Raises:
            ReportIOError: the file could not be written
        """
        if path is None:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
            return

        tmp_name = None
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with tempfile.NamedTemporaryFile(
                dir=path.parent, prefix=f".{path.name}.", suffix=".tmp", delete=False
            ) as tmp:
                tmp_name = tmp.name
                tmp.write(payload)
                tmp.flush()
                os.fsync(tmp.fileno())
            os.replace(tmp_name, path)
            logger.info("report_written", path=str(path), size=len(payload))
        except OSError as e:
            if tmp_name and os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise ReportIOError("could not write report", {"path": str(path), "error": str(e)}) from e


report_writer = ReportWriter()
