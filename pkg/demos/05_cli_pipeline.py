"""
The whole pipeline through the command line
===========================================

Runs build-pairs, derive-acc and emit-manifests on a generated corpus, then
scores a set of fake predictions.
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from conftest import write_dataset  # noqa: E402

from acc_forge.cli import main  # noqa: E402

root = Path(tempfile.mkdtemp())
bases, events = write_dataset(root / "data", n_bases=10, n_events=12)
out = root / "out"

# every stage reads and writes under the same output directory; clipping
# warnings are expected because low SNRs make the event louder than the base
main(["build-pairs", "--bases", str(bases), "--events", str(events), "--triples", "20", "--out", str(out)])
main(["derive-acc", "--out", str(out)])
main(["emit-manifests", "--bases", str(bases), "--out", str(out)])
print(sorted(p.name for p in out.glob("*.jsonl")))

# pretend a model echoed every difference instruction with one word dropped.
# ACC targets would make a poor showcase here: they repeat a handful of base
# captions, so every n-gram is common to all references and CIDEr-D gives 0
rows = [json.loads(line) for line in (out / "adc_train.jsonl").read_text().splitlines()]
with open(root / "refs.jsonl", "w") as r, open(root / "preds.jsonl", "w") as p:
    for row in rows:
        r.write(json.dumps({"id": row["meta"]["id"], "references": [row["target"]]}) + "\n")
        p.write(json.dumps({"id": row["meta"]["id"], "candidate": " ".join(row["target"].split()[:-1])}) + "\n")

main(["evaluate", "--predictions", str(root / "preds.jsonl"), "--references", str(root / "refs.jsonl"),
      "--out", str(out)])
