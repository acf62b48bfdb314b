import json
from pathlib import Path

import pytest

from acc_forge import cli, harness
from acc_forge.errors import EmptyInput, MissingPrediction
from acc_forge.harness import RunConfig, format_accuracy, resolve_config
from acc_forge.manifest import read_samples
from conftest import write_dataset

GOLDEN = Path(__file__).parent / "fixtures" / "golden"


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def error_record(err):
    line = [ln for ln in err.splitlines() if ln.startswith("error: ")][-1]
    return json.loads(line[len("error: "):])


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 3, "triples": 5, "out": "from_file", "split": [0.6, 0.2, 0.2]}))
    env = {"ACC_FORGE_SEED": "4", "ACC_FORGE_OUT": "from_env"}
    got = resolve_config({"command": "build-pairs", "seed": 9, "out": None}, env, cfg)
    assert got.seed == 9
    assert got.out == "from_env"
    assert got.triples == 5
    assert got.split == (0.6, 0.2, 0.2)
    assert got.snr_min == -5.0
    assert resolve_config({}, {}).seed == 0
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        resolve_config({}, {}, cfg)


def test_build_pairs_counts_and_rerun(tmp_path, dataset):
    bases, events = dataset
    config = RunConfig("build-pairs", out=str(tmp_path / "o"), bases=str(bases), events=str(events), triples=2)
    summary = harness.run(config)
    assert summary == {"triples": 2, "pairs": 12, "per_op": {"Add": 4, "Delete": 4, "Replace": 4}}
    first = (tmp_path / "o" / "pairs.jsonl").read_bytes()
    harness.run(config)
    assert (tmp_path / "o" / "pairs.jsonl").read_bytes() == first


def test_missing_input_names_path(tmp_path, capsys, dataset):
    bases, _ = dataset
    missing = tmp_path / "nope.jsonl"
    code, _, err = run_cli(capsys, "build-pairs", "--bases", bases, "--events", missing, "--out", tmp_path / "o")
    assert code == 2
    assert error_record(err)["path"] == str(missing)


def test_pipeline_stages(tmp_path, dataset):
    bases, events = dataset
    out = tmp_path / "o"
    common = dict(out=str(out), bases=str(bases), events=str(events), triples=4, seed=1)
    harness.run(RunConfig("build-pairs", **common))
    summary = harness.run(RunConfig("derive-acc", **common))
    rows = [json.loads(ln) for ln in (out / "pairs_acc.jsonl").read_text().splitlines()]
    assert summary["pairs"] == len(rows) == 24
    assert summary["skipped"] == sum(r["commonality"] is None for r in rows)
    for r in rows:
        if r["op"] == "Add":
            assert r["commonality"] == r["before_caption"]
        elif r["op"] == "Delete":
            assert r["commonality"] == r["after_caption"]

    counts = harness.run(RunConfig("emit-manifests", **common))
    files = sorted(p.name for p in out.glob("a*_*.jsonl"))
    assert len(files) == 9
    assert counts["acc_skipped"] == summary["skipped"]
    split_of = {}
    for name in files:
        task, part = name[:-6].split("_")
        for s in read_samples(out / name):
            assert len(s.audio_refs) == (1 if task == "ac" else 2)
            for ref in s.audio_refs:
                assert (out / ref).is_file()
            # one base id never spans two splits, in any task file
            assert split_of.setdefault(s.meta["base_id"], part) == part


def test_derive_acc_without_replace_skips_nothing(tmp_path, dataset):
    bases, events = dataset
    out = tmp_path / "o"
    harness.run(RunConfig("build-pairs", out=str(out), bases=str(bases), events=str(events), triples=3))
    lines = (out / "pairs.jsonl").read_text().splitlines()
    kept = [ln for ln in lines if json.loads(ln)["op"] != "Replace"]
    (out / "pairs.jsonl").write_text("\n".join(kept) + "\n")
    assert harness.run(RunConfig("derive-acc", out=str(out))) == {"pairs": 12, "skipped": 0}


def test_evaluate_identity_and_header(tmp_path):
    refs = write_jsonl(tmp_path / "r.jsonl", [
        {"id": "a", "references": ["a dog barks in the yard"]},
        {"id": "b", "references": ["rain falls on a tin roof"]},
    ])
    preds = write_jsonl(tmp_path / "p.jsonl", [
        {"id": "a", "candidate": "a dog barks in the yard"},
        {"id": "b", "candidate": "rain falls on a tin roof"},
    ])
    summary = harness.run(RunConfig("evaluate", out=str(tmp_path / "o"), predictions=str(preds), references=str(refs)))
    assert summary["metrics"]["bleu_1"] == 1.0
    header = summary["table"].splitlines()[0].split()
    assert header == ["bleu_1", "bleu_2", "bleu_3", "bleu_4", "fense", "spice", "spider", "cider_d", "meteor", "rouge_l"]
    saved = json.loads((tmp_path / "o" / "report.json").read_text())
    assert list(saved["metrics"]) == header


def test_evaluate_missing_prediction(tmp_path, capsys):
    refs = write_jsonl(tmp_path / "r.jsonl", [{"id": "a", "references": ["x y"]}, {"id": "b", "references": ["z"]}])
    preds = write_jsonl(tmp_path / "p.jsonl", [{"id": "a", "candidate": "x y"}, {"id": "b", "candidate": None}])
    with pytest.raises(MissingPrediction):
        harness.load_instances(preds, refs)
    code, _, err = run_cli(capsys, "evaluate", "--predictions", preds, "--references", refs, "--out", tmp_path)
    assert code == 2
    rec = error_record(err)
    assert rec["error"] == "MissingPrediction" and rec["ids"] == ["b"]


def test_evaluate_golden(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "evaluate", "--predictions", GOLDEN / "predictions.jsonl",
                           "--references", GOLDEN / "references.jsonl",
                           "--external-scores", GOLDEN / "external.json", "--out", tmp_path)
    assert code == 0
    assert (tmp_path / "report.txt").read_bytes() == (GOLDEN / "report.txt").read_bytes()
    assert out == (GOLDEN / "report.txt").read_text()
    want = json.loads((GOLDEN / "report.json").read_text())
    assert json.loads((tmp_path / "report.json").read_text()) == want


@pytest.mark.parametrize("correct,total,text", [(5, 5, "100.00%"), (0, 3, "0.00%"), (18, 25, "72.00%"), (1, 3, "33.33%")])
def test_format_accuracy(correct, total, text):
    assert format_accuracy(correct, total) == text


def test_score_labels_cli(tmp_path, capsys):
    rows = [{"predicted_label": "Dog ", "true_label": "dog"}] * 18 + [{"predicted_label": "cat", "true_label": "dog"}] * 7
    labels = write_jsonl(tmp_path / "l.jsonl", rows)
    code, out, _ = run_cli(capsys, "score-labels", "--labels", labels)
    assert code == 0 and json.loads(out)["accuracy"] == "72.00%"
    with pytest.raises(EmptyInput):
        format_accuracy(0, 0)
    empty = write_jsonl(tmp_path / "e.jsonl", [])
    code, _, err = run_cli(capsys, "score-labels", "--labels", empty)
    assert code == 2 and error_record(err)["error"] == "EmptyInput"


@pytest.mark.parametrize("argv", [
    ["evaluate"],
    ["evaluate", "--predictions", "missing.jsonl", "--references", "missing.jsonl"],
    ["score-labels", "--labels", "BAD"],
    ["derive-acc", "--pairs", "BAD"],
    ["emit-manifests", "--split", "0.5,0.1,0.1"],
    ["build-pairs", "--bases", "BASES", "--events", "EVENTS", "--triples", "-1"],
    ["build-pairs", "--parallelism", "0"],
    ["infer", "--samples", "BAD"],
])
def test_error_paths_exit_nonzero(tmp_path, capsys, argv):
    bases, events = write_dataset(tmp_path / "d", 2, 3)
    bad = write_jsonl(tmp_path / "bad.jsonl", [{"nothing": 1}])
    subst = {"BAD": bad, "BASES": bases, "EVENTS": events}
    argv = [str(subst.get(a, a)) for a in argv] + ["--out", str(tmp_path / "o")]
    code, _, err = run_cli(capsys, *argv)
    assert code != 0
    rec = error_record(err)
    assert rec["error"] and rec["message"]


def test_infer_cli(tmp_path, capsys):
    from mock_server import MockEndpoint
    from acc_forge.manifest import InstructionSample, Task, write_samples

    (tmp_path / "a.wav").write_bytes(b"x")
    write_samples([InstructionSample(Task.AC, ["a.wav"], f"p{i}", "t", {"id": str(i)}) for i in range(3)],
                  tmp_path / "s.jsonl")
    with MockEndpoint() as mock:
        code, out, _ = run_cli(capsys, "infer", "--samples", tmp_path / "s.jsonl", "--endpoint", mock.url,
                               "--out", tmp_path / "o")
    assert code == 0 and json.loads(out) == {"samples": 3, "failed": 0, "retries": 0}
    rows = [json.loads(ln) for ln in (tmp_path / "o" / "predictions.jsonl").read_text().splitlines()]
    assert [r["candidate"] for r in rows] == ["p0", "p1", "p2"]
