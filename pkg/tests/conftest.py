import json
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from acc_forge.audio_core import AudioClip, save_wav  # noqa: E402

CATEGORIES = [
    "NaturalSounds", "Transportation", "IndoorActivities", "OutdoorActivities",
    "Animals", "Speech", "Music", "HumanSounds",
]

BASE_CAPTIONS = [
    "A man speaks while rain falls.",
    "Wind blows hard against a window",
    "A crowd cheers in a large stadium.",
    "Water trickles over rocks in a stream",
    "An engine idles and then revs up.",
    "People talk quietly in a small room",
    "Birds chirp in the early morning.",
    "A train passes by on the tracks",
    "Footsteps echo in an empty hallway.",
    "A woman laughs and claps her hands",
]

EVENT_PHRASES = [
    ("bird song", "a burst of bird song"),
    ("dog bark", "a dog barking"),
    ("car horn", "a car horn honking"),
    ("door slam", "a door slamming shut"),
    ("glass break", "glass shattering on the floor"),
    ("cough", "someone coughing twice"),
    ("piano", "a short piano melody"),
    ("thunder", "a distant rumble of thunder"),
    ("siren", "an ambulance siren wailing"),
    ("clock", "a clock ticking steadily"),
    ("cat meow", "a cat meowing"),
    ("phone ring", "a phone ringing"),
]


def write_dataset(root: Path, n_bases: int, n_events: int, seed: int = 0,
                  base_rate: int = 16000, event_rate: int = 22050):
    """Synthetic base corpus and event library on disk; returns the two manifest paths."""
    rng = np.random.default_rng(seed)
    audio = root / "audio"
    audio.mkdir(parents=True, exist_ok=True)
    with open(root / "bases.jsonl", "w", encoding="utf-8") as fh:
        for i in range(n_bases):
            t = np.arange(int(0.5 * base_rate)) / base_rate
            x = 0.3 * np.sin(2 * np.pi * (200 + 37 * i) * t) + 0.05 * rng.standard_normal(t.size)
            save_wav(AudioClip(base_rate, x), audio / f"base{i}.wav")
            caption = BASE_CAPTIONS[i % len(BASE_CAPTIONS)]
            fh.write(json.dumps({"id": f"b{i}", "audio_path": f"audio/base{i}.wav", "caption": caption}) + "\n")
    with open(root / "events.jsonl", "w", encoding="utf-8") as fh:
        for j in range(n_events):
            t = np.arange(int((0.1 + 0.02 * (j % 5)) * event_rate)) / event_rate
            x = 0.5 * np.sin(2 * np.pi * (900 + 53 * j) * t) * np.hanning(t.size)
            save_wav(AudioClip(event_rate, x), audio / f"event{j}.wav")
            label, phrase = EVENT_PHRASES[j % len(EVENT_PHRASES)]
            if j >= len(EVENT_PHRASES):
                label, phrase = f"{label} {j}", f"{phrase} number {j}"
            fh.write(json.dumps({
                "id": f"e{j}", "category": CATEGORIES[j % 8], "label": label,
                "audio_path": f"audio/event{j}.wav", "description_phrase": phrase,
            }) + "\n")
    return root / "bases.jsonl", root / "events.jsonl"


@pytest.fixture
def dataset(tmp_path):
    return write_dataset(tmp_path / "data", n_bases=4, n_events=6)


# ------------------------------------------------------------ acceptance log

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if "acceptance" in report.keywords:
            doc = report.user_properties and dict(report.user_properties).get("criterion")
            _acceptance.append((report.outcome, doc or report.nodeid))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, name in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
