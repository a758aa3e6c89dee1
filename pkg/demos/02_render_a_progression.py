"""Symbolic record -> MIDI file -> rendered WAV, for one progression sample.

Run: python demos/02_render_a_progression.py
Writes demo_out/progression.{mid,wav} plus the same audio with spacious reverb.
"""

from pathlib import Path

import numpy as np

from earbench import datasets, midi, synth

out = Path("demo_out")
out.mkdir(exist_ok=True)

# one record of the progressions dataset: vi-IV-I-V in G, instrument 27
record = {
    "id": "demo",
    "concept": "progressions",
    "progression_index": 9,
    "progression": "vi-IV-I-V",
    "key_mode": "major",
    "key_root": 7,
    "timbre_id": 27,
    "reverb_level": "dry",
    "rng_seed": 0,
    "midi_path": "progression.mid",
    "wav_path": "progression.wav",
}

seq = datasets.build_midi(record)
(out / "progression.mid").write_bytes(midi.encode_smf(seq))
print(f"MIDI: {len(seq.events)} events at {seq.ppq} PPQ -> {out/'progression.mid'}")

clip = datasets.render_sample(record)
(out / "progression.wav").write_bytes(synth.write_wav(clip))
print(f"audio: {len(clip)} samples, peak {np.abs(clip).max():.3f} -> {out/'progression.wav'}")

wet = synth.apply_reverb(clip, "spacious")
(out / "progression_spacious.wav").write_bytes(synth.write_wav(wet))
print(f"with reverb: tail energy x{np.sum(wet[44100:]**2)/np.sum(clip[44100:]**2):.2f} in the back half")

preset = synth.timbre_presets()[record["timbre_id"]]
print(f"\ninstrument 27: {len(preset.harmonic_amplitudes)} partials, "
      f"ADSR={tuple(round(v, 3) for v in preset.adsr)}, "
      f"detune {preset.detune_cents:+.1f} cents, vibrato {preset.vibrato}")
