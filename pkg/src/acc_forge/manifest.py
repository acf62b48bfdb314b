"""Instruction-tuning samples for AC, ADC and ACC, plus group-aware splits."""

from __future__ import annotations

import enum
import json
import math
import os
import uuid
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

from .corpus import CaptionedBase, iter_jsonl
from .edit_synth import EditPair
from .errors import MisalignedInputs, ParseError

AUDIO_PLACEHOLDER = "<audio>"
SPLITS = ("train", "val", "test")


class Task(str, enum.Enum):
    AC = "AC"
    ADC = "ADC"
    ACC = "ACC"


DEFAULT_PROMPTS = {
    Task.AC: "Describe the audio.",
    Task.ADC: "Listen to the two audio clips and describe their difference.",
    Task.ACC: "Listen to the two audio clips and describe what they have in common.",
}


@dataclass(frozen=True)
class InstructionSample:
    task: Task
    audio_refs: list[str]
    prompt: str
    target: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "task", Task(self.task))
        want = 1 if self.task is Task.AC else 2
        if len(self.audio_refs) != want:
            raise ValueError(f"{self.task.value} samples take {want} audio reference(s), got {len(self.audio_refs)}")
        if not self.target:
            raise ValueError("target must be non-empty")

    def to_record(self) -> dict:
        return {
            "task": self.task.value,
            "audios": list(self.audio_refs),
            "prompt": self.prompt,
            "target": self.target,
            "meta": self.meta,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "InstructionSample":
        return cls(record["task"], list(record["audios"]), record["prompt"], record["target"],
                   dict(record.get("meta", {})))


@dataclass(frozen=True)
class SplitSpec:
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    seed: int = 0

    def __post_init__(self):
        if len(self.ratios) != 3 or any(r < 0 for r in self.ratios):
            raise ValueError("ratios must be three non-negative numbers")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)!r}")


def emit_ac_samples(bases: Sequence[CaptionedBase], prompt_template: str = DEFAULT_PROMPTS[Task.AC],
                    audio_ref: Optional[Callable[[CaptionedBase], str]] = None) -> list[InstructionSample]:
    if AUDIO_PLACEHOLDER in prompt_template:
        raise ValueError("AC prompts refer to a single implicit audio; drop the placeholder")
    audio_ref = audio_ref or (lambda base: str(base.audio_path))
    return [
        InstructionSample(Task.AC, [audio_ref(base)], prompt_template, base.caption,
                          {"id": base.id, "base_id": base.id})
        for base in bases
    ]


def _pair_meta(pair: EditPair) -> dict:
    return {"id": pair.id, "pair_id": pair.id, "op": pair.op.value, "base_id": pair.provenance.base_id}


def emit_adc_samples(pairs: Sequence[EditPair],
                     prompt_template: str = DEFAULT_PROMPTS[Task.ADC]) -> list[InstructionSample]:
    return [
        InstructionSample(Task.ADC, [p.before_audio, p.after_audio], prompt_template, p.instruction, _pair_meta(p))
        for p in pairs
    ]


def emit_acc_samples(pairs: Sequence[EditPair], commonalities: Sequence[Optional[str]],
                     prompt_template: str = DEFAULT_PROMPTS[Task.ACC]) -> list[InstructionSample]:
    """One ACC sample per pair whose commonality is not ``None``.

    ``None`` marks a pair whose commonality could not be derived; it is
    skipped, so ``len(result) == len(pairs) - commonalities.count(None)``.
    """
    if len(pairs) != len(commonalities):
        raise MisalignedInputs(f"{len(pairs)} pairs but {len(commonalities)} commonalities")
    return [
        InstructionSample(Task.ACC, [p.before_audio, p.after_audio], prompt_template, text, _pair_meta(p))
        for p, text in zip(pairs, commonalities)
        if text is not None
    ]


def _split_sizes(n: int, ratios) -> list[int]:
    # floor each share, then hand leftovers to the largest fractional parts (earlier split on ties)
    exact = [r * n for r in ratios]
    sizes = [math.floor(x + 1e-9) for x in exact]
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return sizes


def assign_splits(group_keys: Iterable[str], spec: SplitSpec) -> dict[str, str]:
    """Map each distinct group key to ``train``, ``val`` or ``test``."""
    keys = sorted(set(group_keys))
    perm = np.random.default_rng(spec.seed).permutation(len(keys))
    sizes = _split_sizes(len(keys), spec.ratios)
    assignment, pos = {}, 0
    for name, size in zip(SPLITS, sizes):
        for i in perm[pos:pos + size]:
            assignment[keys[i]] = name
        pos += size
    return assignment


def _group_key(sample: InstructionSample, index: int) -> str:
    return str(sample.meta.get("base_id", f"#{index}"))


def split(samples: Sequence[InstructionSample], spec: SplitSpec,
          assignment: Optional[Mapping[str, str]] = None):
    """Partition samples into ``(train, val, test)`` keeping each base clip in one split.

    Pass a precomputed ``assignment`` (from :func:`assign_splits`) to keep
    several sample files consistent with one another.
    """
    keys = [_group_key(s, i) for i, s in enumerate(samples)]
    if assignment is None:
        assignment = assign_splits(keys, spec)
    parts = {name: [] for name in SPLITS}
    for sample, key in zip(samples, keys):
        name = assignment[key]
        parts[name].append(replace(sample, meta={**sample.meta, "split": name}))
    return parts["train"], parts["val"], parts["test"]


def write_samples(samples: Sequence[InstructionSample], path) -> None:
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for s in samples:
            fh.write(json.dumps(s.to_record(), ensure_ascii=False) + "\n")
    os.replace(tmp, path)


def read_samples(path) -> list[InstructionSample]:
    out = []
    for lineno, record in iter_jsonl(path):
        try:
            out.append(InstructionSample.from_record(record))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad sample record ({exc})", path, lineno) from None
    return out
