"""
CSV and JSON writers for every command. Each file starts with metadata
(tool version, config hash, command); floats carry 17 significant digits and
nothing time-dependent is written, so reruns are byte-identical.
"""

import csv
import io
import json
import logging
import math
from numbers import Complex, Integral, Real
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, TextIO

import numpy as np

from src.config.settings import config

logger = logging.getLogger(__name__)


def format_number(value: Any) -> str:
    """17-significant-digit text for floats, plain text for everything else."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, Real):
        return format(float(value), ".17g")
    return str(value)


def _plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-native values."""
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, Integral):
        return int(value)
    if isinstance(value, Real):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Complex):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _expand(header: Sequence[str], first: Sequence[Any]) -> List[str]:
    columns: List[str] = []
    for name, value in zip(header, first):
        if isinstance(value, Complex) and not isinstance(value, Real):
            columns += [f"{name}_re", f"{name}_im"]
        else:
            columns.append(name)
    return columns


def _cells(row: Sequence[Any]) -> List[str]:
    cells: List[str] = []
    for value in row:
        if isinstance(value, Complex) and not isinstance(value, Real):
            cells += [format_number(value.real), format_number(value.imag)]
        else:
            cells.append(format_number(value))
    return cells


class Emitter:
    """
    Writes the outputs of one command into an output directory.
    With no directory, CSV goes to the given stream (stdout for the CLI).
    """

    def __init__(
        self,
        out_dir: Optional[str],
        config_sha256: str,
        command: str,
        stream: Optional[TextIO] = None,
    ) -> None:
        self.out_dir = Path(out_dir) if out_dir else None
        self.config_sha256 = config_sha256
        self.command = command
        self.stream = stream
        self.written: List[Path] = []
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    def metadata(self) -> Dict[str, str]:
        return {
            "tool": config["APP"]["NAME"],
            "version": config["APP"]["VERSION"],
            "config_sha256": self.config_sha256,
            "command": self.command,
        }

    def _write(self, name: str, text: str) -> None:
        if self.out_dir is None:
            if self.stream is not None:
                self.stream.write(text)
            return
        path = self.out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        self.written.append(path)
        logger.info("wrote %s", path)

    def csv_text(self, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        meta = self.metadata()
        buffer = io.StringIO()
        buffer.write(f"# tool: {meta['tool']} {meta['version']}\n")
        buffer.write(f"# config_sha256: {meta['config_sha256']}\n")
        buffer.write(f"# command: {meta['command']}\n")
        rows = [list(row) for row in rows]
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(_expand(header, rows[0]) if rows else list(header))
        writer.writerows(_cells(row) for row in rows)
        return buffer.getvalue()

    def write_csv(
        self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> None:
        """Function that writes a table

        Args:
            name (str): file name inside the output directory.
            header (Sequence[str]): column names; complex columns get _re/_im suffixes.
            rows (Iterable[Sequence[Any]]): one sequence per line.
        """
        self._write(name, self.csv_text(header, rows))

    def json_text(self, payload: Dict[str, Any]) -> str:
        document: Dict[str, Any] = dict(self.metadata())
        document.update(_plain(payload))
        return json.dumps(document, indent=2) + "\n"

    def write_json(self, name: str, payload: Dict[str, Any]) -> None:
        """Flat JSON object, metadata keys first, then the payload in insertion order."""
        self._write(name, self.json_text(payload))
