"""Summary table over probe result CSVs: representations x concepts."""

from __future__ import annotations

import csv
from pathlib import Path

from .datasets import CONCEPTS

MISSING_CELL = "—"

CONCEPT_COLUMNS = ["notes", "intervals", "scales", "chords", "progressions", "tempo", "time_signatures"]

COLUMN_TITLES = {
    "notes": "Notes",
    "intervals": "Intervals",
    "scales": "Scales",
    "chords": "Chords",
    "progressions": "Chord Progressions",
    "tempo": "Tempos",
    "time_signatures": "Time Signatures",
}

ROW_TITLES = {
    "mel": "Mel Spectrogram",
    "mfcc": "MFCC",
    "chroma": "Chroma",
    "aggregate": "Aggregate Handcrafted",
}

_PREFERRED_ROW_ORDER = ["mel", "mfcc", "chroma", "aggregate"]


def load_result_cells(results_dir) -> dict[tuple[str, str], float]:
    """(representation, concept) -> selected test metric, from every CSV in the dir."""
    cells = {}
    for path in sorted(Path(results_dir).glob("*.csv")):
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                if row.get("test_metric"):
                    key = (row["representation"], row["concept"])
                    cells[key] = float(row["test_metric"])
    return cells


def build_table(cells: dict[tuple[str, str], float]):
    """Rows of (representation, {concept: value}, average, n_present)."""
    reps = {rep for rep, _ in cells}
    ordered = [r for r in _PREFERRED_ROW_ORDER if r in reps]
    ordered += sorted(reps - set(_PREFERRED_ROW_ORDER))
    table = []
    for rep in ordered:
        values = {c: cells[(rep, c)] for c in CONCEPT_COLUMNS if (rep, c) in cells}
        average = sum(values.values()) / len(values)
        table.append((rep, values, average, len(values)))
    return table


def _cell(values, concept):
    return f"{values[concept]:.3f}" if concept in values else MISSING_CELL


def render_markdown(table) -> str:
    concepts = [c for c in CONCEPT_COLUMNS if any(c in values for _, values, _, _ in table)]
    header = ["Representation"] + [COLUMN_TITLES[c] for c in concepts] + ["Average"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    partial = False
    for rep, values, average, n_present in table:
        row = [ROW_TITLES.get(rep, rep)]
        row += [_cell(values, c) for c in concepts]
        star = "" if n_present == len(CONCEPTS) else "*"
        partial = partial or bool(star)
        row.append(f"{average:.3f}{star}")
        lines.append("| " + " | ".join(row) + " |")
    if partial:
        counts = ", ".join(
            f"{ROW_TITLES.get(rep, rep)}: {n}/{len(CONCEPTS)}"
            for rep, _, _, n in table
            if n != len(CONCEPTS)
        )
        lines.append("")
        lines.append(f"\\* average over present concepts only ({counts}).")
    return "\n".join(lines) + "\n"


def render_csv(table) -> str:
    concepts = [c for c in CONCEPT_COLUMNS if any(c in values for _, values, _, _ in table)]
    lines = [",".join(["representation"] + concepts + ["average", "concepts_present"])]
    for rep, values, average, n_present in table:
        cells = [_cell(values, c) for c in concepts]
        lines.append(",".join([rep] + cells + [f"{average:.3f}", str(n_present)]))
    return "\n".join(lines) + "\n"
