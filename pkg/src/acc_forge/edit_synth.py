"""Six editing pairs per (A, B, C) triple.

A+B and A+C are rendered once per triple and shared between the Add, Delete
and Replace pairs that reference them::

    Add      A   -> A+B     A   -> A+C
    Delete   A+B -> A       A+C -> A
    Replace  A+B -> A+C     A+C -> A+B
"""

from __future__ import annotations

import enum
import functools
import hashlib
import json
import logging
import os
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import audio_core
from .audio_core import AudioClip, MixParams
from .corpus import SoundEvent, Triple, iter_jsonl
from .errors import ArityMismatch, MissingField, ParseError, SynthesisError

log = logging.getLogger(__name__)

DEFAULT_SNR_RANGE = (-5.0, 15.0)
MIX_DIR = "mixes"


class EditOp(str, enum.Enum):
    ADD = "Add"
    DELETE = "Delete"
    REPLACE = "Replace"


@dataclass(frozen=True)
class Provenance:
    """Everything needed to re-render a pair.

    ``event_b_id`` is the event named first in the instruction (the one
    added, deleted, or replaced); ``event_c_id`` is the replacement and only
    set for Replace. ``offset_seconds``, ``snr_db`` and ``gain`` hold one
    entry per event, in that order.
    """

    base_id: str
    event_b_id: str
    event_c_id: Optional[str]
    offset_seconds: tuple[float, ...]
    snr_db: tuple[float, ...]
    gain: tuple[float, ...]
    seed: int


@dataclass(frozen=True)
class EditPair:
    id: str
    op: EditOp
    before_audio: str
    after_audio: str
    before_caption: str
    after_caption: str
    instruction: str
    provenance: Provenance
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "op", EditOp(self.op))
        if self.before_caption == self.after_caption:
            raise ValueError(f"pair {self.id}: before and after captions are identical")

    def to_record(self) -> dict:
        record = asdict(self)
        record["op"] = self.op.value
        record["provenance"]["offset_seconds"] = list(self.provenance.offset_seconds)
        record["provenance"]["snr_db"] = list(self.provenance.snr_db)
        record["provenance"]["gain"] = list(self.provenance.gain)
        extra = record.pop("extra")
        record.update(extra)
        return record

    @classmethod
    def from_record(cls, record: dict) -> "EditPair":
        known = {"id", "op", "before_audio", "after_audio", "before_caption",
                 "after_caption", "instruction", "provenance"}
        prov = dict(record["provenance"])
        for key in ("offset_seconds", "snr_db", "gain"):
            prov[key] = tuple(prov[key])
        return cls(
            **{k: record[k] for k in known - {"provenance"}},
            provenance=Provenance(**prov),
            extra={k: v for k, v in record.items() if k not in known},
        )


def render_instruction(op: EditOp, event_b: SoundEvent, event_c: Optional[SoundEvent] = None) -> str:
    op = EditOp(op)
    if (op is EditOp.REPLACE) != (event_c is not None):
        raise ArityMismatch(f"{op.value} takes {'two events' if op is EditOp.REPLACE else 'one event'}")
    if op is EditOp.ADD:
        return f"add {event_b.description_phrase}"
    if op is EditOp.DELETE:
        return f"delete {event_b.description_phrase}"
    return f"replace {event_b.description_phrase} with {event_c.description_phrase}"


def render_mixed_caption(base_caption: str, event: SoundEvent) -> str:
    """Caption for a base clip with ``event`` mixed in.

    >>> from acc_forge.corpus import SoundEvent
    >>> ev = SoundEvent("e", "Animals", "bird", "b.wav", "a burst of bird song")
    >>> render_mixed_caption("A man speaks.", ev)
    'A man speaks, with a burst of bird song'
    """
    stem = base_caption.rstrip().rstrip(".").rstrip()
    return f"{stem}, with {event.description_phrase}"


def derive_seed(run_seed: int, index: int) -> int:
    """Independent per-triple seed, so triples can be rendered in any order."""
    return int(np.random.SeedSequence([run_seed, index]).generate_state(1, dtype=np.uint32)[0])


@functools.lru_cache(maxsize=2048)
def load_canonical(path: str, sample_rate: int = audio_core.CANONICAL_RATE) -> AudioClip:
    return audio_core.resample(audio_core.load_wav(path), sample_rate)


def draw_mix_params(base: AudioClip, event: AudioClip, rng: np.random.Generator,
                    snr_range=DEFAULT_SNR_RANGE) -> MixParams:
    snr = float(rng.uniform(*snr_range))
    slack = max(0.0, base.duration_seconds - event.duration_seconds)
    offset = float(rng.uniform(0.0, slack)) if slack > 0 else 0.0
    return MixParams(offset, snr, audio_core.gain_for_snr(base, event, snr))


@dataclass(frozen=True)
class RenderedTriple:
    a: AudioClip
    ab: AudioClip
    ac: AudioClip
    params_b: MixParams
    params_c: MixParams


def render_triple(triple: Triple, seed: int, snr_range=DEFAULT_SNR_RANGE,
                  sample_rate: int = audio_core.CANONICAL_RATE) -> RenderedTriple:
    """Mix A+B and A+C in memory. Pure in ``(triple, seed, snr_range, sample_rate)``."""
    rng = np.random.default_rng(seed)
    a = load_canonical(str(triple.base.audio_path), sample_rate)
    b = load_canonical(str(triple.event_b.audio_path), sample_rate)
    c = load_canonical(str(triple.event_c.audio_path), sample_rate)
    params_b = draw_mix_params(a, b, rng, snr_range)
    params_c = draw_mix_params(a, c, rng, snr_range)
    return RenderedTriple(a, audio_core.mix(a, b, params_b), audio_core.mix(a, c, params_c), params_b, params_c)


def store_clip(clip: AudioClip, out_dir) -> str:
    """Write ``clip`` under ``mixes/`` named by content hash; returns the relative path."""
    blob, clipped = audio_core.encode_wav(clip)
    rel = f"{MIX_DIR}/{hashlib.sha256(blob).hexdigest()[:20]}.wav"
    if clipped:
        log.warning("clipped %d sample(s) while writing %s", clipped, rel)
    target = Path(out_dir) / rel
    if not target.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(f".{target.name}.{uuid.uuid4().hex}.tmp")
        tmp.write_bytes(blob)
        os.replace(tmp, target)
    return rel


def synthesize_six(triple: Triple, seed: int, out_dir, *, index: int = 0,
                   snr_range=DEFAULT_SNR_RANGE,
                   sample_rate: int = audio_core.CANONICAL_RATE) -> list[EditPair]:
    """Render one triple and return its six pairs in canonical order.

    ``index`` is the triple's position in the run; it keeps pair ids unique
    when the same triple is drawn twice.
    """
    base, b, c = triple.base, triple.event_b, triple.event_c
    try:
        r = render_triple(triple, seed, snr_range, sample_rate)
        path_a, path_ab, path_ac = (store_clip(x, out_dir) for x in (r.a, r.ab, r.ac))
    except Exception as exc:
        exc.context = {"base_id": base.id, "event_b_id": b.id, "event_c_id": c.id, "seed": seed}
        raise

    cap_a = base.caption
    cap_ab = render_mixed_caption(cap_a, b)
    cap_ac = render_mixed_caption(cap_a, c)
    if cap_ab == cap_ac:
        raise SynthesisError(f"events {b.id} and {c.id} share a description phrase",
                             context={"base_id": base.id, "event_b_id": b.id, "event_c_id": c.id})

    pb, pc = r.params_b, r.params_c

    def prov(first, pfirst, second=None, psecond=None):
        params = [pfirst] + ([psecond] if psecond else [])
        return Provenance(
            base.id, first.id, second.id if second else None,
            tuple(p.offset_seconds for p in params), tuple(p.snr_db for p in params),
            tuple(p.resolved_gain for p in params), seed,
        )

    specs = [
        (EditOp.ADD, path_a, path_ab, cap_a, cap_ab, (b, None), prov(b, pb)),
        (EditOp.ADD, path_a, path_ac, cap_a, cap_ac, (c, None), prov(c, pc)),
        (EditOp.DELETE, path_ab, path_a, cap_ab, cap_a, (b, None), prov(b, pb)),
        (EditOp.DELETE, path_ac, path_a, cap_ac, cap_a, (c, None), prov(c, pc)),
        (EditOp.REPLACE, path_ab, path_ac, cap_ab, cap_ac, (b, c), prov(b, pb, c, pc)),
        (EditOp.REPLACE, path_ac, path_ab, cap_ac, cap_ab, (c, b), prov(c, pc, b, pb)),
    ]
    pairs = []
    for pos, (op, before, after, cap_before, cap_after, events, provenance) in enumerate(specs):
        pairs.append(EditPair(
            id=f"{base.id}:{b.id}:{c.id}:{op.value}:{6 * index + pos}",
            op=op,
            before_audio=before,
            after_audio=after,
            before_caption=cap_before,
            after_caption=cap_after,
            instruction=render_instruction(op, *events),
            provenance=provenance,
        ))
    return pairs


def synthesize_pairs(triples: Sequence[Triple], run_seed: int, out_dir, *, parallelism: int = 1,
                     snr_range=DEFAULT_SNR_RANGE,
                     sample_rate: int = audio_core.CANONICAL_RATE) -> list[EditPair]:
    """Six pairs per triple, in triple order regardless of ``parallelism``."""
    def work(i):
        return synthesize_six(triples[i], derive_seed(run_seed, i), out_dir, index=i,
                              snr_range=snr_range, sample_rate=sample_rate)

    if parallelism <= 1:
        chunks = [work(i) for i in range(len(triples))]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            chunks = list(pool.map(work, range(len(triples))))
    return [pair for chunk in chunks for pair in chunk]


def write_pairs(pairs: Sequence[EditPair], path) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False) + "\n")
    os.replace(tmp, path)


def read_pairs(path) -> list[EditPair]:
    pairs = []
    for lineno, record in iter_jsonl(path):
        try:
            pairs.append(EditPair.from_record(record))
        except (KeyError, TypeError) as exc:
            raise MissingField(f"bad edit-pair record ({exc})", path, lineno) from None
        except ValueError as exc:
            raise ParseError(str(exc), path, lineno) from None
    return pairs
