"""Tabular reports with CSV/JSON emission and optional line plots."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

__all__ = ["Report", "format_value", "write_json", "plot_lines"]


def format_value(x) -> str:
    """Shortest round-tripping text for numbers; plain ``str`` otherwise."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(x)
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if hasattr(x, "item"):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(path, payload) -> None:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text)


@dataclass
class Report:
    columns: Sequence[str]
    rows: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    passed: Optional[bool] = None

    def add(self, **row):
        missing = set(self.columns) - set(row)
        if missing:
            raise KeyError(f"row is missing columns {sorted(missing)}")
        self.rows.append({c: row[c] for c in self.columns})

    def column(self, name):
        return [r[name] for r in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for r in self.rows:
            writer.writerow([format_value(r[c]) for c in self.columns])
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())


def plot_lines(path, x, series: dict, xlabel="", ylabel="", title="", logy=False) -> None:
    """Write a simple line chart as SVG (reproducible bytes for fixed input)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "hypflow", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 3.8))
        for label, y in series.items():
            ax.plot(x, y, marker="o", markersize=2.5, linewidth=1.2, label=label)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, alpha=0.3)
        if len(series) > 1:
            ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
