import json
import math
from collections import Counter

import numpy as np
import pytest

from earbench import datasets, midi as smf, synth, theory
from earbench.datasets import (
    CONCEPTS,
    EXPECTED_COUNTS,
    LABEL_FIELDS,
    build_midi,
    build_records,
    click_pattern,
    generate_concept,
    make_split,
    read_manifest,
    render_sample,
    subsample_records,
)

SEED = 7


@pytest.fixture(scope="module")
def all_records():
    return {c: build_records(c, SEED) for c in CONCEPTS}


def test_counts_match_published_totals(all_records):
    for concept, records in all_records.items():
        assert len(records) == EXPECTED_COUNTS[concept], concept
    assert sum(EXPECTED_COUNTS.values()) == 104_585


def test_classification_label_balance(all_records):
    expected_per_class = {
        "time_signatures": 150,
        "notes": 828,
        "intervals": 3312,
        "scales": 2208,
        "chords": 3312,
        "progressions": 1104,
    }
    for concept, per_class in expected_per_class.items():
        counts = Counter(r[LABEL_FIELDS[concept]] for r in all_records[concept])
        assert set(counts.values()) == {per_class}, concept


def test_tempo_bpm_coverage(all_records):
    counts = Counter(r["bpm"] for r in all_records["tempo"])
    assert set(counts) == set(range(50, 211))
    assert len(counts) == 161
    assert set(counts.values()) == {25}  # 5 clicks x 5 offsets


def test_ids_unique_across_corpus(all_records):
    ids = [r["id"] for records in all_records.values() for r in records]
    assert len(ids) == len(set(ids))


def test_records_deterministic(all_records):
    for concept in ("tempo", "chords"):
        again = build_records(concept, SEED)
        assert again == all_records[concept]
    assert build_records("tempo", SEED + 1) != all_records["tempo"]


def test_offsets_stay_inside_one_bar(all_records):
    for r in all_records["tempo"]:
        assert 0.0 <= r["offset_s"] < 4 * 60.0 / r["bpm"]
    for r in all_records["time_signatures"]:
        bar_s = r["numerator"] * (4.0 / r["denominator"]) * 0.5
        assert 0.0 <= r["offset_s"] < bar_s


def test_concept_isolation_fields(all_records):
    for r in all_records["tempo"]:
        assert "timbre_id" not in r and r["reverb_level"] == "dry"
    for r in all_records["time_signatures"]:
        assert "timbre_id" not in r
    reverbs = {r["reverb_level"] for r in all_records["time_signatures"]}
    assert reverbs == {"dry", "medium", "spacious"}
    for concept in ("notes", "intervals", "scales", "chords", "progressions"):
        for r in all_records[concept][:200]:
            assert "click_id" not in r
            assert r["reverb_level"] == "dry"  # reverb perturbs only time signatures


def test_time_signature_classes(all_records):
    sigs = {r["time_signature"] for r in all_records["time_signatures"]}
    assert sigs == {"2/2", "3/4", "4/4", "3/8", "4/8", "6/8", "9/8", "12/8"}


def test_notes_register_block(all_records):
    notes = {r["midi_note"] for r in all_records["notes"]}
    assert min(notes) == 0 and max(notes) == 107
    octaves = {r["octave"] for r in all_records["notes"]}
    assert octaves == set(range(-1, 8))


def test_click_pattern_120bpm_four_four():
    record = {"concept": "tempo", "bpm": 120, "offset_s": 0.0}
    pattern = click_pattern(record)
    times = [t for t, _ in pattern]
    assert times == pytest.approx([0.5 * k for k in range(8)])
    downbeats = [t for t, down in pattern if down]
    assert downbeats == pytest.approx([0.0, 2.0])


def test_click_pattern_compound_meter():
    record = {"concept": "time_signatures", "numerator": 6, "denominator": 8, "offset_s": 0.25}
    pattern = click_pattern(record)
    assert pattern[0] == (0.25, True)
    assert pattern[1][0] == pytest.approx(0.5)
    downbeats = [t for t, down in pattern if down]
    assert np.allclose(np.diff(downbeats), 1.5)  # six eighths per bar at 120 BPM


@pytest.mark.parametrize("concept", CONCEPTS)
def test_sample_midi_round_trips(concept, all_records):
    rng = np.random.default_rng(0)
    records = all_records[concept]
    for i in rng.integers(0, len(records), size=5):
        seq = build_midi(records[int(i)])
        assert smf.decode_smf(smf.encode_smf(seq)) == seq


def test_tonal_midi_structure(all_records):
    record = next(r for r in all_records["chords"] if r["timbre_id"] == 3)
    seq = build_midi(record)
    kinds = [type(e.kind).__name__ for e in seq.events]
    assert kinds[:3] == ["TempoMeta", "TimeSignatureMeta", "ProgramChange"]
    note_ons = [e.kind for e in seq.events if isinstance(e.kind, smf.NoteOn)]
    assert len(note_ons) == 24  # 8 strikes x 3 chord tones
    assert all(n.velocity == smf.NOTE_VELOCITY for n in note_ons)
    assert all(n.channel == smf.MELODIC_CHANNEL for n in note_ons)


def test_rhythmic_midi_uses_percussion_channel(all_records):
    record = all_records["time_signatures"][0]
    seq = build_midi(record)
    note_ons = [e.kind for e in seq.events if isinstance(e.kind, smf.NoteOn)]
    assert note_ons and all(n.channel == smf.PERCUSSION_CHANNEL for n in note_ons)


@pytest.mark.parametrize("concept", CONCEPTS)
def test_rendered_clip_contract(concept, all_records):
    record = all_records[concept][len(all_records[concept]) // 2]
    clip = render_sample(record)
    assert clip.shape == (synth.CLIP_SAMPLES,)
    assert np.all(np.isfinite(clip))
    assert np.max(np.abs(clip)) <= 1.0
    assert float(np.sum(clip * clip)) > 0.0 or record["concept"] == "tempo"


def test_progression_audio_uses_resolved_chords(all_records):
    record = next(
        r for r in all_records["progressions"] if r["progression_index"] == 0 and r["key_root"] == 0
    )
    seq = build_midi(record)
    note_ons = [e.kind.note for e in seq.events if isinstance(e.kind, smf.NoteOn)]
    expected = [n for c in theory.resolve_progression(0, theory.PROGRESSIONS[0]) for n in c] * 2
    assert note_ons == expected


def test_split_proportions_classification(all_records):
    records = all_records["time_signatures"]
    split = make_split(records, "time_signatures", SEED)
    counts = Counter(split.values())
    assert counts == {"train": 840, "validation": 180, "test": 180}
    assert set(split) == {r["id"] for r in records}


def test_split_tempo_extrapolation_bands(all_records):
    records = all_records["tempo"]
    split = make_split(records, "tempo", SEED)
    by_id = {r["id"]: r for r in records}
    train_bpms = {by_id[i]["bpm"] for i, s in split.items() if s == "train"}
    eval_bpms = {by_id[i]["bpm"] for i, s in split.items() if s != "train"}
    assert train_bpms == set(range(74, 187))  # middle 113 of 161 values
    assert eval_bpms == set(range(50, 74)) | set(range(187, 211))
    counts = Counter(split.values())
    assert counts["validation"] == counts["test"] == 600
    assert counts["train"] == 2825


def test_split_deterministic(all_records):
    records = all_records["scales"]
    assert make_split(records, "scales", 3) == make_split(records, "scales", 3)
    assert make_split(records, "scales", 3) != make_split(records, "scales", 4)


def test_subsample_stratified_ceil(all_records):
    for concept in ("chords", "notes"):
        records = all_records[concept]
        sub = subsample_records(records, concept, 0.1, SEED)
        full_counts = Counter(r[LABEL_FIELDS[concept]] for r in records)
        sub_counts = Counter(r[LABEL_FIELDS[concept]] for r in sub)
        for value, n in full_counts.items():
            assert sub_counts[value] == math.ceil(0.1 * n)


def test_subsample_deterministic_and_sorted(all_records):
    records = all_records["scales"]
    a = subsample_records(records, "scales", 0.05, SEED)
    b = subsample_records(records, "scales", 0.05, SEED)
    assert a == b
    assert [r["id"] for r in a] == sorted(r["id"] for r in a)
    with pytest.raises(ValueError):
        subsample_records(records, "scales", 0.0, SEED)


def test_generate_concept_writes_layout(tmp_path):
    records = generate_concept("scales", tmp_path, SEED, subsample=0.01, workers=1)
    concept_dir = tmp_path / "scales"
    manifest = read_manifest(concept_dir / "manifest.jsonl")
    assert manifest == records
    split = json.loads((concept_dir / "splits" / f"{SEED}.json").read_text())
    assert set(split) == {r["id"] for r in records}
    for r in records[:3]:
        wav_bytes = (concept_dir / r["wav_path"]).read_bytes()
        clip, rate = synth.read_wav(wav_bytes)
        assert rate == synth.SAMPLE_RATE and len(clip) == synth.CLIP_SAMPLES
        seq = smf.decode_smf((concept_dir / r["midi_path"]).read_bytes())
        assert seq == build_midi(r)


def test_generate_manifest_only_writes_no_audio(tmp_path):
    generate_concept("notes", tmp_path, SEED, manifest_only=True)
    assert (tmp_path / "notes" / "manifest.jsonl").exists()
    assert not (tmp_path / "notes" / "audio").exists()


def test_read_manifest_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_manifest(tmp_path / "nope" / "manifest.jsonl")
