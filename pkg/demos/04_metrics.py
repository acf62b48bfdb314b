"""
Scoring captions
================

Corpus scores for a few candidate captions, with SPICE and FENSE supplied
from outside as they would be by their own tools.
"""

from acc_forge import EvalInstance, evaluate_corpus
from acc_forge.harness import render_table

instances = [
    EvalInstance("c1", "A man talks while rain falls.", ["A man speaks while rain falls", "Rain falls as a man talks"]),
    EvalInstance("c2", "A dog barks far away", ["A dog barks in the distance", "A dog is barking far away"]),
    EvalInstance("c3", "Birds chirp in the morning", ["Birds chirp in the early morning"]),
]

report = evaluate_corpus(instances)
print(render_table(report))

# SPIDEr appears once a SPICE score is available
report = evaluate_corpus(instances, {"spice": 0.37, "fense": 0.61})
print(render_table(report))

# per-instance scores for the metrics that have them
for key, scores in report.instance_scores.items():
    print(key, {k: round(v, 4) for k, v in scores.items()})
