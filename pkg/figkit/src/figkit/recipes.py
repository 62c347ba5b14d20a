"""Figure recipes: what to read, which kind of figure, how to label it.

A recipe is a JSON object:

    {
      "kind": "line" | "heatmap" | "heatmap+ridge" | "cross-sections",
      "input_csv": ["results.csv"],
      "x": "cascade.rate_ratio",
      "series": ["v_x", "v_xx"],              line / cross-sections
      "y": "cavity.hbar_g",                   heatmap kinds
      "value": "i_xx",                        heatmap kinds
      "sections_at": [200.0, 400.0],          cross-sections: fixed y values
      "ridge_json": "ridge.json",             heatmap+ridge overlay
      "analytic": "cascade_visibility",       optional overlay on line plots
      "reference_bands": [{"label": "I_ref", "value": 0.82, "halfwidth": 0.01}],
      "labels": {"x": "...", "y": "...", "title": "..."},
      "out_name": "fig.png"
    }

Validation is eager: missing columns or empty data fail before any
rendering starts.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

KINDS = ("line", "heatmap", "heatmap+ridge", "cross-sections")


class MissingColumn(Exception):
    pass


class EmptyData(Exception):
    pass


@dataclass(frozen=True)
class ReferenceBand:
    label: str
    value: float
    halfwidth: float = 0.01


@dataclass
class FigureRecipe:
    kind: str
    input_csv: tuple[str, ...]
    x: str
    series: tuple[str, ...] = ()
    y: Optional[str] = None
    value: Optional[str] = None
    sections_at: tuple[float, ...] = ()
    ridge_json: Optional[str] = None
    analytic: Optional[str] = None
    reference_bands: tuple[ReferenceBand, ...] = ()
    labels: dict = field(default_factory=dict)
    out_name: str = "figure.png"

    def required_columns(self) -> list[str]:
        cols = [self.x]
        cols += list(self.series)
        if self.kind in ("heatmap", "heatmap+ridge", "cross-sections"):
            if self.y:
                cols.append(self.y)
        if self.kind in ("heatmap", "heatmap+ridge"):
            if self.value:
                cols.append(self.value)
        return cols


def load_recipe(path) -> FigureRecipe:
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ValueError(f"recipe kind must be one of {KINDS}, got {kind!r}")
    bands = tuple(ReferenceBand(b["label"], float(b["value"]), float(b.get("halfwidth", 0.01)))
                  for b in doc.get("reference_bands", []))
    base = Path(path).parent
    inputs = tuple(str((base / p)) if not Path(p).is_absolute() else p
                   for p in doc["input_csv"])
    ridge = doc.get("ridge_json")
    if ridge is not None and not Path(ridge).is_absolute():
        ridge = str(base / ridge)
    recipe = FigureRecipe(
        kind=kind,
        input_csv=inputs,
        x=doc["x"],
        series=tuple(doc.get("series", [])),
        y=doc.get("y"),
        value=doc.get("value"),
        sections_at=tuple(doc.get("sections_at", [])),
        ridge_json=ridge,
        analytic=doc.get("analytic"),
        reference_bands=bands,
        labels=doc.get("labels", {}),
        out_name=doc.get("out_name", "figure.png"),
    )
    if recipe.kind in ("heatmap", "heatmap+ridge") and not (recipe.y and recipe.value):
        raise ValueError("heatmap recipes need 'y' and 'value'")
    if recipe.kind in ("line", "cross-sections") and not recipe.series:
        raise ValueError(f"{recipe.kind} recipes need a 'series' list")
    if recipe.kind == "cross-sections" and not (recipe.y and recipe.sections_at):
        raise ValueError("cross-sections recipes need 'y' and 'sections_at'")
    return recipe


def read_table(recipe: FigureRecipe) -> dict[str, np.ndarray]:
    """Concatenated numeric columns from all input CSVs; rows with empty
    cells in required columns are dropped."""
    needed = recipe.required_columns()
    collected: dict[str, list[float]] = {c: [] for c in needed}
    for path in recipe.input_csv:
        with open(path) as fh:
            header = fh.readline().rstrip("\n").split(",")
            for col in needed:
                if col not in header:
                    raise MissingColumn(f"column {col!r} not in {path} (columns: {header})")
            idx = {c: header.index(c) for c in needed}
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) < len(header):
                    continue
                cells = {c: parts[idx[c]] for c in needed}
                if any(v == "" for v in cells.values()):
                    continue
                for c, v in cells.items():
                    collected[c].append(float(v))
    table = {c: np.asarray(v) for c, v in collected.items()}
    if any(len(v) == 0 for v in table.values()):
        raise EmptyData(f"no usable rows in {list(recipe.input_csv)}")
    return table
