"""Pipeline stages behind the ``acc-forge`` command.

Each ``cmd_*`` function takes a :class:`RunConfig`, writes its outputs under
``config.out`` and returns a small summary dict.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import uuid
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from . import corpus, edit_synth, manifest, metrics
from .commonality import MIN_REPLACE_TOKENS, derive_commonality
from .corpus import iter_jsonl
from .errors import EmptyCommonality, EmptyInput, MissingField, MissingPrediction
from .infer import InferenceClient, token_from_env
from .manifest import Task

log = logging.getLogger(__name__)

ENV_PREFIX = "ACC_FORGE_"
PAIRS_FILE = "pairs.jsonl"
ACC_PAIRS_FILE = "pairs_acc.jsonl"


@dataclass
class RunConfig:
    command: str = ""
    out: str = "out"
    seed: int = 0
    bases: Optional[str] = None
    events: Optional[str] = None
    pairs: Optional[str] = None
    triples: int = 1
    snr_min: float = -5.0
    snr_max: float = 15.0
    split: tuple = (0.8, 0.1, 0.1)
    min_length: int = MIN_REPLACE_TOKENS
    predictions: Optional[str] = None
    references: Optional[str] = None
    external_scores: Optional[str] = None
    labels: Optional[str] = None
    samples: Optional[str] = None
    parallelism: int = 1
    endpoint: Optional[str] = None
    token_env: str = "ACC_FORGE_TOKEN"
    timeout: float = 30.0
    retries: int = 2
    backoff: float = 0.5
    prompts: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError("parallelism must be >= 1")

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _coerce(name: str, value):
    kind = {f.name: f.type for f in dataclasses.fields(RunConfig)}[name]
    if value is None:
        return None
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    if kind == "tuple":
        if isinstance(value, str):
            value = value.split(",")
        return tuple(float(v) for v in value)
    if kind == "dict":
        return json.loads(value) if isinstance(value, str) else dict(value)
    return str(value)


def resolve_config(flags: Mapping, env: Optional[Mapping] = None, config_file=None) -> RunConfig:
    """Merge settings: explicit flags, then ``ACC_FORGE_*`` variables, then a JSON file, then defaults."""
    env = os.environ if env is None else env
    names = [f.name for f in dataclasses.fields(RunConfig)]
    merged = {}
    if config_file:
        with open(config_file, encoding="utf-8") as fh:
            file_values = json.load(fh)
        unknown = set(file_values) - set(names)
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        merged.update(file_values)
    for name in names:
        key = ENV_PREFIX + name.upper()
        if key in env:
            merged[name] = env[key]
    merged.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig(**{k: _coerce(k, v) for k, v in merged.items()})


def _require(config: RunConfig, *names):
    for name in names:
        value = getattr(config, name)
        if not value:
            raise MissingField(f"--{name.replace('_', '-')} is required for {config.command or 'this command'}")
        if not Path(value).exists():
            raise FileNotFoundError(2, "No such file or directory", str(value))


def _write_json(obj, path):
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
    tmp.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    os.replace(tmp, path)


# -------------------------------------------------------------------- stages

def cmd_build_pairs(config: RunConfig) -> dict:
    _require(config, "bases", "events")
    bases = corpus.load_base_corpus(config.bases)
    events = corpus.load_event_library(config.events)
    triples = corpus.sample_triples(bases, events, config.seed, config.triples)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    pairs = edit_synth.synthesize_pairs(
        triples, config.seed, config.out_dir, parallelism=config.parallelism,
        snr_range=(config.snr_min, config.snr_max),
    )
    edit_synth.write_pairs(pairs, config.out_dir / PAIRS_FILE)
    per_op = Counter(p.op.value for p in pairs)
    return {"triples": len(triples), "pairs": len(pairs), "per_op": {op.value: per_op[op.value] for op in edit_synth.EditOp}}


def cmd_derive_acc(config: RunConfig) -> dict:
    pairs_path = config.pairs or str(config.out_dir / PAIRS_FILE)
    config.pairs = pairs_path
    _require(config, "pairs")
    pairs = edit_synth.read_pairs(pairs_path)
    rows, skipped = [], 0
    for pair in pairs:
        record = pair.to_record()
        try:
            record["commonality"] = derive_commonality(pair, config.min_length)
        except EmptyCommonality:
            record["commonality"] = None
            record["skip_reason"] = "EmptyCommonality"
            skipped += 1
        rows.append(record)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.out_dir / ACC_PAIRS_FILE
    tmp = out_path.with_name(f".{out_path.name}.{uuid.uuid4().hex}.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    os.replace(tmp, out_path)
    return {"pairs": len(rows), "skipped": skipped}


def _rebase(ref: str, src_dir: Path, out_dir: Path) -> str:
    return Path(os.path.relpath(src_dir / ref, out_dir)).as_posix()


def cmd_emit_manifests(config: RunConfig) -> dict:
    pairs_path = config.pairs or str(config.out_dir / ACC_PAIRS_FILE)
    config.pairs = pairs_path
    _require(config, "pairs", "bases")
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    src_dir = Path(pairs_path).parent

    bases = corpus.load_base_corpus(config.bases)
    pairs = edit_synth.read_pairs(pairs_path)
    commonalities = []
    for pair in pairs:
        if "commonality" in pair.extra:
            commonalities.append(pair.extra["commonality"])
        else:
            try:
                commonalities.append(derive_commonality(pair, config.min_length))
            except EmptyCommonality:
                commonalities.append(None)
    pairs = [
        dataclasses.replace(p, before_audio=_rebase(p.before_audio, src_dir, out),
                            after_audio=_rebase(p.after_audio, src_dir, out))
        for p in pairs
    ]

    prompts = {**manifest.DEFAULT_PROMPTS, **{Task(k): v for k, v in config.prompts.items()}}
    samples = {
        "ac": manifest.emit_ac_samples(bases, prompts[Task.AC],
                                       lambda b: Path(os.path.relpath(b.audio_path, out)).as_posix()),
        "adc": manifest.emit_adc_samples(pairs, prompts[Task.ADC]),
        "acc": manifest.emit_acc_samples(pairs, commonalities, prompts[Task.ACC]),
    }
    spec = manifest.SplitSpec(tuple(config.split), config.seed)
    groups = {b.id for b in bases} | {p.provenance.base_id for p in pairs}
    assignment = manifest.assign_splits(groups, spec)

    counts = {}
    for task, task_samples in samples.items():
        for name, part in zip(manifest.SPLITS, manifest.split(task_samples, spec, assignment)):
            manifest.write_samples(part, out / f"{task}_{name}.jsonl")
            counts[f"{task}_{name}"] = len(part)
    counts["acc_skipped"] = len(pairs) - len(samples["acc"])
    return counts


def load_instances(predictions_path, references_path) -> list[metrics.EvalInstance]:
    refs = {}
    for lineno, rec in iter_jsonl(references_path):
        if "id" not in rec or not isinstance(rec.get("references"), list):
            raise MissingField("reference records need 'id' and a 'references' list", references_path, lineno)
        refs[str(rec["id"])] = rec["references"]
    preds = {}
    for lineno, rec in iter_jsonl(predictions_path):
        if "id" not in rec:
            raise MissingField("prediction records need 'id'", predictions_path, lineno)
        if isinstance(rec.get("candidate"), str):
            preds[str(rec["id"])] = rec["candidate"]
    missing = set(refs) - set(preds)
    if missing:
        raise MissingPrediction(missing)
    extra = set(preds) - set(refs)
    if extra:
        log.warning("ignoring %d prediction(s) without references", len(extra))
    return [metrics.EvalInstance(i, preds[i], refs[i]) for i in refs]


def render_table(report: metrics.MetricReport) -> str:
    """Fixed-width table, columns in ``METRIC_NAMES`` order."""
    width = max(len(n) for n in metrics.METRIC_NAMES) + 2
    cells = ["-" if report.scores[n] is None else f"{report.scores[n]:.4f}" for n in metrics.METRIC_NAMES]
    header = "".join(n.ljust(width) for n in metrics.METRIC_NAMES).rstrip()
    row = "".join(c.ljust(width) for c in cells).rstrip()
    return f"{header}\n{row}\n\nmeteor: {metrics.METEOR_LABEL}; '-' marks scores that were not supplied\n"


def report_to_json(report: metrics.MetricReport) -> dict:
    return {
        "metrics": {n: report.scores[n] for n in metrics.METRIC_NAMES},
        "meteor_variant": "exact-match",
        "instances": report.instance_scores,
    }


def cmd_evaluate(config: RunConfig) -> dict:
    _require(config, "predictions", "references")
    instances = load_instances(config.predictions, config.references)
    external = None
    if config.external_scores:
        with open(config.external_scores, encoding="utf-8") as fh:
            external = json.load(fh)
    report = metrics.evaluate_corpus(instances, external)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    table = render_table(report)
    (config.out_dir / "report.txt").write_text(table, encoding="utf-8")
    _write_json(report_to_json(report), config.out_dir / "report.json")
    return {"table": table, "metrics": report_to_json(report)["metrics"]}


def format_accuracy(correct: int, total: int) -> str:
    if total == 0:
        raise EmptyInput("no labelled instances to score")
    return f"{100.0 * correct / total:.2f}%"


def score_labels(rows) -> tuple[int, int]:
    correct = total = 0
    for row in rows:
        total += 1
        correct += str(row["predicted_label"]).strip().lower() == str(row["true_label"]).strip().lower()
    return correct, total


def cmd_score_labels(config: RunConfig) -> dict:
    _require(config, "labels")
    rows = []
    for lineno, rec in iter_jsonl(config.labels):
        if "predicted_label" not in rec or "true_label" not in rec:
            raise MissingField("label records need 'predicted_label' and 'true_label'", config.labels, lineno)
        rows.append(rec)
    correct, total = score_labels(rows)
    return {"correct": correct, "total": total, "accuracy": format_accuracy(correct, total)}


def cmd_infer(config: RunConfig) -> dict:
    _require(config, "samples")
    if not config.endpoint:
        raise MissingField("--endpoint is required for infer")
    samples = manifest.read_samples(config.samples)
    client = InferenceClient(
        config.endpoint, token=token_from_env(config.token_env), timeout=config.timeout,
        retries=config.retries, backoff=config.backoff, parallelism=config.parallelism,
    )
    rows = client.run(samples, audio_root=Path(config.samples).parent)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    out_path = config.out_dir / "predictions.jsonl"
    with open(out_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    failed = sum(1 for r in rows if r.get("error"))
    return {"samples": len(rows), "failed": failed, "retries": sum(r.get("retries", 0) for r in rows)}


COMMANDS = {
    "build-pairs": cmd_build_pairs,
    "derive-acc": cmd_derive_acc,
    "emit-manifests": cmd_emit_manifests,
    "evaluate": cmd_evaluate,
    "score-labels": cmd_score_labels,
    "infer": cmd_infer,
}


def run(config: RunConfig) -> dict:
    return COMMANDS[config.command](config)
