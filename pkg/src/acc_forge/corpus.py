"""Captioned base clips, the event library, and seeded triple sampling."""

from __future__ import annotations

import enum
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import (
    DuplicateId,
    EmptyCorpus,
    InsufficientEvents,
    MissingField,
    ParseError,
    UnknownCategory,
)
from .text import normalize_caption

log = logging.getLogger(__name__)


class Category(str, enum.Enum):
    NATURAL_SOUNDS = "NaturalSounds"
    TRANSPORTATION = "Transportation"
    INDOOR_ACTIVITIES = "IndoorActivities"
    OUTDOOR_ACTIVITIES = "OutdoorActivities"
    ANIMALS = "Animals"
    SPEECH = "Speech"
    MUSIC = "Music"
    HUMAN_SOUNDS = "HumanSounds"


@dataclass(frozen=True)
class CaptionedBase:
    id: str
    audio_path: Path
    caption: str

    def __post_init__(self):
        if not normalize_caption(self.caption).tokens:
            raise ValueError(f"caption of {self.id!r} has no word tokens")


@dataclass(frozen=True)
class SoundEvent:
    id: str
    category: Category
    label: str
    audio_path: Path
    description_phrase: str

    def __post_init__(self):
        object.__setattr__(self, "category", Category(self.category))
        if not self.label.strip() or not self.description_phrase.strip():
            raise ValueError(f"event {self.id!r} needs a label and a description phrase")


@dataclass(frozen=True)
class Triple:
    base: CaptionedBase
    event_b: SoundEvent
    event_c: SoundEvent

    def __post_init__(self):
        if self.event_b.id == self.event_c.id:
            raise ValueError("event_b and event_c must be different clips")
        if self.event_b.label == self.event_c.label:
            raise ValueError("event_b and event_c must carry different labels")


def iter_jsonl(path, *, strict: bool = True, errors: Optional[list] = None) -> Iterator[tuple[int, dict]]:
    """Yield ``(lineno, record)`` for every non-blank line of a JSONL file.

    Lines that are not JSON objects raise :class:`ParseError`, or are
    reported to ``errors`` and skipped when ``strict`` is false.
    """
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                record = ParseError(f"invalid JSON ({exc.msg})", path, lineno)
            if not isinstance(record, (dict, ParseError)):
                record = ParseError("expected a JSON object", path, lineno)
            if isinstance(record, ParseError):
                if strict:
                    raise record
                _report(record, errors)
                continue
            yield lineno, record


def _report(exc, errors):
    log.warning("skipping record: %s", exc)
    if errors is not None:
        errors.append(exc)


def _load(path, fields, build, strict, errors):
    path = Path(path)
    out, seen = [], set()
    for lineno, record in iter_jsonl(path, strict=strict, errors=errors):
        try:
            for name in fields:
                value = record.get(name)
                if not isinstance(value, str) or not value.strip():
                    raise MissingField(f"missing or empty field {name!r}", path, lineno)
            if record["id"] in seen:
                raise DuplicateId(f"duplicate id {record['id']!r}", path, lineno)
            try:
                item = build(record, path, lineno)
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError(str(exc), path, lineno) from None
        except ParseError as exc:
            if strict:
                raise
            _report(exc, errors)
            continue
        seen.add(item.id)
        out.append(item)
    return out


def load_base_corpus(manifest_path, *, strict: bool = True, errors: Optional[list] = None) -> list[CaptionedBase]:
    """Read ``{"id", "audio_path", "caption"}`` records in file order.

    Audio paths are resolved against the manifest's directory. With
    ``strict=False`` malformed records are skipped and their exceptions
    appended to ``errors``.
    """
    def build(rec, path, lineno):
        return CaptionedBase(rec["id"], path.parent / rec["audio_path"], rec["caption"])

    return _load(manifest_path, ("id", "audio_path", "caption"), build, strict, errors)


def load_event_library(taxonomy_path, *, strict: bool = True, errors: Optional[list] = None) -> list[SoundEvent]:
    def build(rec, path, lineno):
        if rec["category"] not in Category._value2member_map_:
            raise UnknownCategory(f"unknown category {rec['category']!r}", path, lineno)
        return SoundEvent(
            rec["id"], Category(rec["category"]), rec["label"],
            path.parent / rec["audio_path"], rec["description_phrase"],
        )

    fields = ("id", "category", "label", "audio_path", "description_phrase")
    events = _load(taxonomy_path, fields, build, strict, errors)
    n_clips, n_labels = library_stats(events)
    log.info("loaded %d event clips covering %d sound types", n_clips, n_labels)
    return events


def library_stats(events: Sequence[SoundEvent]) -> tuple[int, int]:
    """``(number of clips, number of distinct labels)``."""
    return len(events), len({e.label for e in events})


def sample_triples(bases: Sequence[CaptionedBase], events: Sequence[SoundEvent], seed: int, count: int) -> list[Triple]:
    """Draw ``count`` (A, B, C) triples.

    Bases are drawn uniformly. For the events, two distinct labels are drawn
    uniformly, then one clip uniformly within each label. The result depends
    only on the arguments.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if not bases:
        raise EmptyCorpus("no base clips to sample from")
    by_label: dict[str, list[SoundEvent]] = {}
    for ev in events:
        by_label.setdefault(ev.label, []).append(ev)
    labels = sorted(by_label)
    if len(labels) < 2:
        raise InsufficientEvents(f"need events with at least 2 distinct labels, got {len(labels)}")
    rng = np.random.default_rng(seed)
    triples = []
    for _ in range(count):
        base = bases[int(rng.integers(len(bases)))]
        lb, lc = rng.choice(len(labels), size=2, replace=False)
        pool_b, pool_c = by_label[labels[lb]], by_label[labels[lc]]
        b = pool_b[int(rng.integers(len(pool_b)))]
        c = pool_c[int(rng.integers(len(pool_c)))]
        triples.append(Triple(base, b, c))
    return triples
