"""Tour of the symbolic layer: notes, modes, triads, roman numeral progressions.

Run: python demos/01_theory_basics.py
"""

from earbench import theory

print("== pitch arithmetic ==")
for name, pc, octave in [("middle C", 0, 4), ("A4 (concert pitch)", 9, 4), ("lowest MIDI note", 0, -1)]:
    print(f"{name:>22}: pitch class {pc}, octave {octave} -> MIDI {theory.note_from(pc, octave)}")

print("\n== the seven modes on C4 ==")
for mode in theory.MODE_NAMES:
    notes = theory.scale_notes(60, mode)
    names = [theory.PITCH_CLASS_NAMES[n % 12] for n in notes]
    print(f"{mode:>11}: {notes}  ({' '.join(names)})")

print("\n== triads and inversions on C4 ==")
for quality in theory.CHORD_QUALITIES:
    row = []
    for inversion in theory.INVERSIONS:
        row.append(f"{inversion}={theory.chord_notes(60, quality, inversion)}")
    print(f"{quality:>10}: {'  '.join(row)}")

print("\n== the 19 four-chord progressions ==")
for spec in theory.PROGRESSIONS:
    chords = theory.resolve_progression(0, spec)  # key of C
    spelled = []
    for numeral, chord in zip(spec.numerals, chords):
        root_name = theory.PITCH_CLASS_NAMES[chord[0] % 12]
        spelled.append(f"{root_name}{'' if numeral.quality == 'major' else numeral.quality[:3]}")
    print(f"{spec.index:>2} [{spec.key_mode:>13}] {spec.text:<15} -> {' '.join(spelled)}")

print("\nTransposition check: I-IV-V-I in D has the same shape, two semitones up:")
in_c = theory.resolve_progression(0, theory.PROGRESSIONS[0])
in_d = theory.resolve_progression(2, theory.PROGRESSIONS[0])
print("  C:", in_c)
print("  D:", in_d)
