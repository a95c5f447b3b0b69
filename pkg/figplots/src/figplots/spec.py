"""Figure specifications: what to read, how to draw it, where to write it.

A spec is a JSON object:

    {
      "kind": "curves" | "heatmap",
      "inputs": [{"path": "metrics_1n_hg2.csv", "label": "HG2"}, ...],
      "output": "fig2.png",
      "x_label": "gamma / d_omega",      # optional
      "y_label": "value",                # optional
      "log_x": true,                     # optional (curves)
      "log_y": false,                    # optional (curves)
      "x_column": "r",                   # optional, curves long format
      "metrics": ["fm_fidelity", ...],   # optional filter, long format
      "y_columns": ["peak_ce_analytic"], # optional: wide-format curves
      "title": "..."                     # optional
    }

Curves accept the sweep runner's long format (x, metric_name, value, ...)
or, with ``y_columns``, any wide table keyed by ``x_column``.  Heatmaps
accept transfer-map files (n, m, re, im), one panel per input with a shared
linear amplitude scale.  Rendering never recomputes physics; it is strictly
read-only over the CSV contract.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path


class SpecError(ValueError):
    """Invalid figure spec or CSV that does not match the documented contract."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    x_label: str = ""
    y_label: str = ""
    log_x: bool = False
    log_y: bool = False
    x_column: str = "r"
    metrics: tuple = ()
    y_columns: tuple = ()
    title: str = ""

    @staticmethod
    def from_dict(raw: dict, base_dir: Path | None = None) -> "FigureSpec":
        if not isinstance(raw, dict):
            raise SpecError("figure spec must be a JSON object")
        kind = raw.get("kind")
        if kind not in ("curves", "heatmap"):
            raise SpecError(f"kind must be 'curves' or 'heatmap', got {kind!r}")
        inputs = raw.get("inputs")
        if not inputs or not isinstance(inputs, list):
            raise SpecError("inputs must be a non-empty list")
        base = Path(base_dir) if base_dir else Path(".")
        resolved = []
        for item in inputs:
            if not isinstance(item, dict) or "path" not in item:
                raise SpecError(f"each input needs a 'path': {item!r}")
            path = Path(item["path"])
            if not path.is_absolute():
                path = base / path
            resolved.append({"path": str(path), "label": item.get("label", path.stem)})
        output = raw.get("output")
        if not output:
            raise SpecError("output image path is required")
        out_path = Path(output)
        if not out_path.is_absolute():
            out_path = base / out_path
        return FigureSpec(
            kind=kind, inputs=tuple(resolved), output=str(out_path),
            x_label=raw.get("x_label", ""), y_label=raw.get("y_label", ""),
            log_x=bool(raw.get("log_x", False)), log_y=bool(raw.get("log_y", False)),
            x_column=raw.get("x_column", "r"), metrics=tuple(raw.get("metrics", ())),
            y_columns=tuple(raw.get("y_columns", ())), title=raw.get("title", ""),
        )

    @staticmethod
    def from_file(path) -> "FigureSpec":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except FileNotFoundError:
            raise SpecError(f"spec file not found: {path}")
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec is not valid JSON: {exc}")
        return FigureSpec.from_dict(raw, base_dir=path.parent)


def read_table(path) -> tuple[list[str], list[dict]]:
    """Read a CSV with a header row; empty or headerless files are errors."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SpecError(f"{path}: empty CSV, nothing to plot")
            rows = list(reader)
    except FileNotFoundError:
        raise SpecError(f"CSV not found: {path}")
    if not rows:
        raise SpecError(f"{path}: CSV has a header but no data rows")
    return list(reader.fieldnames), rows


def require_columns(path, fieldnames, needed) -> None:
    missing = [c for c in needed if c not in fieldnames]
    if missing:
        raise SpecError(f"{path}: missing columns {missing}; found {fieldnames}")
