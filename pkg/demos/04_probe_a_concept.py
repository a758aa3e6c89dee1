"""Desk-scale end-to-end run: generate -> extract -> probe -> report.

Run: python demos/04_probe_a_concept.py
Uses a 5% stratified subsample of the scales dataset so it finishes in a
couple of minutes on a laptop. The same flow scales to the full corpus via
the CLI (see README).
"""

from pathlib import Path

from earbench.cli import main

root = Path("demo_out/probe_run")
data = root / "data"
results = root / "results"
results.mkdir(parents=True, exist_ok=True)

steps = [
    ["generate", "--concept", "scales", "--out", str(data), "--seed", "0", "--subsample", "0.05"],
    ["extract", "--concept", "scales", "--data", str(data), "--feature", "chroma",
     "--out", str(root / "scales_chroma.emb")],
    ["probe", "--concept", "scales", "--data", str(data),
     "--embeddings", str(root / "scales_chroma.emb"), "--preset", "lm-default",
     "--seed", "0", "--out", str(results / "scales_chroma.csv"), "--name", "chroma"],
    ["report", "--results", str(results), "--out", str(root / "table.md")],
]

for args in steps:
    print(f"\n$ earbench {' '.join(args)}")
    rc = main(args)
    if rc != 0:
        raise SystemExit(rc)

print(f"\nresult table written to {root/'table.md'}")
