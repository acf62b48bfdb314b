"""
Six editing pairs from one triple
=================================

Builds a tiny corpus on disk, samples one (A, B, C) triple and renders the
Add, Delete and Replace pairs it yields.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from acc_forge import AudioClip, load_base_corpus, load_event_library, sample_triples, save_wav, synthesize_six

root = Path(tempfile.mkdtemp())
rng = np.random.default_rng(0)

# one base clip with a caption
t = np.arange(8000) / 16000
save_wav(AudioClip(16000, 0.2 * np.sin(2 * np.pi * 180 * t) + 0.02 * rng.standard_normal(t.size)), root / "base.wav")
(root / "bases.jsonl").write_text(json.dumps(
    {"id": "b0", "audio_path": "base.wav", "caption": "A man speaks while rain falls"}) + "\n")

# two events with distinct labels
events = [("e0", "Animals", "dog bark", "a dog barking", 700), ("e1", "Music", "piano", "a short piano melody", 440)]
with open(root / "events.jsonl", "w") as fh:
    for eid, cat, label, phrase, f in events:
        save_wav(AudioClip(16000, 0.5 * np.sin(2 * np.pi * f * t[:1600])), root / f"{eid}.wav")
        fh.write(json.dumps({"id": eid, "category": cat, "label": label,
                             "audio_path": f"{eid}.wav", "description_phrase": phrase}) + "\n")

# sampling is a pure function of the seed
bases = load_base_corpus(root / "bases.jsonl")
library = load_event_library(root / "events.jsonl")
(triple,) = sample_triples(bases, library, seed=0, count=1)
print("triple:", triple.base.id, triple.event_b.label, "/", triple.event_c.label)

pairs = synthesize_six(triple, seed=123, out_dir=root / "out")
for p in pairs:
    print(f"{p.op.value:8s} {p.before_audio} -> {p.after_audio}")
    print(f"         {p.instruction!r}")

# A+B and A+C are rendered once and reused by every pair that needs them
print("distinct audio files:", len({a for p in pairs for a in (p.before_audio, p.after_audio)}))
