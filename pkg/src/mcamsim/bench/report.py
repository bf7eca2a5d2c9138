"""Reproducible run reports: CSV with an identifying header plus a text summary."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DomainError


def config_hash(config: dict) -> str:
    """Short stable digest of a JSON-serialisable config (key order does not matter)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return str(v)


@dataclass
class RunReport:
    """Rows of results tagged with the config that produced them.

    Columns named ``accuracy`` or ending in ``_acc`` must hold percentages.
    """

    title: str
    columns: tuple[str, ...]
    config: dict
    seed: int
    rows: list[tuple] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise DomainError(f"row has {len(values)} values for {len(self.columns)} columns")
        for name, v in zip(self.columns, values):
            if (name == "accuracy" or name.endswith("_acc")) and not 0.0 <= float(v) <= 100.0:
                raise DomainError(f"{name}={v} is not a percentage")
        self.rows.append(tuple(values))

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def header_lines(self) -> list[str]:
        return [f"{self.title}", f"config_hash={self.config_hash} seed={self.seed}"]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    def summary(self) -> str:
        cells = [list(self.columns)] + [[_fmt(v) for v in r] for r in self.rows]
        widths = [max(len(row[k]) for row in cells) for k in range(len(self.columns))]
        lines = self.header_lines()
        for i, row in enumerate(cells):
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
            if i == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
