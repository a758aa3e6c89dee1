"""Probing vectors that came from somewhere else, via the SYNEMB1 file format.

Run: python demos/05_external_embeddings.py
Any upstream system (a foundation model's pooled activations, typically) can
emit this format keyed to a generated manifest and reuse the probing stack
unchanged. Here the "model" is one informative dimension plus noise, so the
probe lands well above chance but below a real representation.
"""

from pathlib import Path

import numpy as np

from earbench import datasets
from earbench.cli import main
from earbench.embeddings import write_embeddings_file

root = Path("demo_out/external")
root.mkdir(parents=True, exist_ok=True)

main(["generate", "--concept", "chords", "--out", str(root), "--seed", "0",
      "--subsample", "0.05", "--manifest-only"])
records = datasets.read_manifest(root / "chords" / "manifest.jsonl")

rng = np.random.default_rng(0)
quality_index = {q: i for i, q in enumerate(["major", "minor", "diminished", "augmented"])}
matrix = rng.standard_normal((len(records), 64)).astype(np.float32)
matrix[:, 0] = [quality_index[r["quality"]] + 0.8 * rng.standard_normal() for r in records]

emb_path = root / "pretend_model.emb"
write_embeddings_file(emb_path, [r["id"] for r in records], matrix)
print(f"wrote {emb_path} ({emb_path.stat().st_size} bytes, {len(records)} x 64)")

results = root / "results"
results.mkdir(exist_ok=True)
main(["probe", "--concept", "chords", "--data", str(root), "--embeddings", str(emb_path),
      "--preset", "lm-default", "--seed", "0", "--out", str(results / "external.csv"),
      "--name", "pretend-model"])
print("\nchance level for four balanced chord qualities is 0.25")
