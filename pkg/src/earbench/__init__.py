"""earbench: concept-isolated music theory datasets and representation probes.

Seven synthetic datasets (tempo, time signatures, notes, intervals, scales,
chords, chord progressions) are rendered from first principles: symbolic
theory -> MIDI -> deterministic additive synthesis -> WAV. Handcrafted
spectral features or externally produced embeddings are then scored with
linear/MLP probes per concept.
"""

from . import datasets, embeddings, features, midi, probe, report, synth, theory
from .seeds import derive_seed, rng_for

__version__ = "0.1.0"

__all__ = [
    "datasets",
    "embeddings",
    "features",
    "midi",
    "probe",
    "report",
    "synth",
    "theory",
    "derive_seed",
    "rng_for",
    "__version__",
]
