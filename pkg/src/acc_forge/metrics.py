"""Corpus-level caption metrics.

BLEU-1..4, ROUGE-L, an exact-match METEOR variant and CIDEr-D are computed
here. SPICE and FENSE are taken as externally supplied corpus scores, and
SPIDEr is the mean of CIDEr-D and SPICE.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional, Sequence

from .errors import AccForgeError, CorpusTooSmall, EmptyCorpus, MissingComponent
from .text import tokenize

# Report column order.
METRIC_NAMES = (
    "bleu_1", "bleu_2", "bleu_3", "bleu_4", "fense", "spice",
    "spider", "cider_d", "meteor", "rouge_l",
)
EXTERNAL_METRICS = ("spice", "fense")
METEOR_LABEL = "meteor (exact-match variant)"

ROUGE_BETA = 1.2
CIDER_SIGMA = 6.0
CIDER_MAX_N = 4


@dataclass(frozen=True)
class EvalInstance:
    id: str
    candidate: str
    references: Sequence[str]

    def __post_init__(self):
        if not self.references:
            raise ValueError(f"instance {self.id!r} has no references")


@dataclass
class MetricReport:
    scores: dict[str, Optional[float]]
    instance_scores: dict[str, dict[str, float]] = field(default_factory=dict)

    def __getitem__(self, name):
        return self.scores[name]

    def present(self) -> dict[str, float]:
        return {k: v for k, v in self.scores.items() if v is not None}


def ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def clipped_matches(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int) -> tuple[int, int]:
    """``(clipped n-gram matches, candidate n-gram total)`` for one candidate."""
    cand = ngram_counts(candidate, n)
    max_ref: Counter = Counter()
    for ref in references:
        for gram, count in ngram_counts(ref, n).items():
            if count > max_ref[gram]:
                max_ref[gram] = count
    matched = sum(min(count, max_ref[gram]) for gram, count in cand.items())
    return matched, sum(cand.values())


def _tokenized(instances):
    return [(tokenize(x.candidate), [tokenize(r) for r in x.references]) for x in instances]


def bleu(instances: Sequence[EvalInstance], max_n: int = 4) -> list[float]:
    """Corpus BLEU for orders 1..``max_n`` without smoothing."""
    data = _tokenized(instances)
    matched = [0] * max_n
    total = [0] * max_n
    cand_len = ref_len = 0
    for cand, refs in data:
        for n in range(1, max_n + 1):
            m, t = clipped_matches(cand, refs, n)
            matched[n - 1] += m
            total[n - 1] += t
        cand_len += len(cand)
        ref_len += min((len(r) for r in refs), key=lambda length: (abs(length - len(cand)), length))
    if cand_len == 0:
        return [0.0] * max_n
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    scores, log_sum = [], 0.0
    for n in range(max_n):
        if matched[n] == 0:
            scores.extend([0.0] * (max_n - n))
            break
        log_sum += math.log(matched[n] / total[n])
        scores.append(bp * math.exp(log_sum / (n + 1)))
    return scores


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l_instance(candidate: Sequence[str], references: Sequence[Sequence[str]], beta: float = ROUGE_BETA) -> float:
    best = 0.0
    for ref in references:
        lcs = lcs_length(candidate, ref)
        if lcs == 0:
            continue
        p, r = lcs / len(candidate), lcs / len(ref)
        best = max(best, (1 + beta ** 2) * p * r / (r + beta ** 2 * p))
    return best


def rouge_l(instances: Sequence[EvalInstance]) -> float:
    data = _tokenized(instances)
    if not data:
        return 0.0
    return sum(rouge_l_instance(c, refs) for c, refs in data) / len(data)


def meteor_alignment(candidate: Sequence[str], reference: Sequence[str]) -> tuple[int, int]:
    """``(matches, chunks)`` of the best exact-match unigram alignment.

    Matches are maximized first, then chunks minimized. A chunk is a run of
    alignment links adjacent in both sentences, so the search maximizes the
    number of such adjacencies. Only reference positions whose word still
    occurs later in the candidate are tracked in the memo key.
    """
    cand, ref = tuple(candidate), tuple(reference)
    positions: dict[str, tuple[int, ...]] = {}
    for j, w in enumerate(ref):
        positions[w] = positions.get(w, ()) + (j,)
    remaining = [set(cand[i:]) for i in range(len(cand) + 1)]

    @lru_cache(maxsize=None)
    def best(i: int, prev: int, used: frozenset) -> tuple[int, int]:
        if i == len(cand):
            return 0, 0
        w = cand[i]
        live = frozenset(j for j in used if ref[j] in remaining[i + 1])
        result = best(i + 1, -1, live)
        for j in positions.get(w, ()):
            if j in used:
                continue
            m, adj = best(i + 1, j, live | {j} if w in remaining[i + 1] else live)
            cand_result = (m + 1, adj + (1 if prev >= 0 and j == prev + 1 else 0))
            if cand_result > result:
                result = cand_result
        return result

    matches, adjacencies = best(0, -1, frozenset())
    return matches, matches - adjacencies


def meteor_instance(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    best = 0.0
    for ref in references:
        m, chunks = meteor_alignment(candidate, ref)
        if m == 0:
            continue
        p, r = m / len(candidate), m / len(ref)
        fmean = 10 * p * r / (r + 9 * p)
        best = max(best, fmean * (1 - 0.5 * (chunks / m) ** 3))
    return best


def meteor_lite(instances: Sequence[EvalInstance]) -> float:
    data = _tokenized(instances)
    if not data:
        return 0.0
    return sum(meteor_instance(c, refs) for c, refs in data) / len(data)


def _tfidf(counts: Counter, df: Counter, log_n: float):
    vec = {g: tf * (log_n - math.log(max(1.0, df[g]))) for g, tf in counts.items()}
    return vec, math.sqrt(sum(v * v for v in vec.values()))


def cider_d_instances(instances: Sequence[EvalInstance], sigma: float = CIDER_SIGMA,
                      max_n: int = CIDER_MAX_N) -> list[float]:
    """Per-instance CIDEr-D; document frequencies come from the reference sets."""
    if len(instances) < 2:
        raise CorpusTooSmall(f"CIDEr-D needs at least 2 instances for document frequencies, got {len(instances)}")
    data = _tokenized(instances)
    df = [Counter() for _ in range(max_n)]
    for _, refs in data:
        for n in range(max_n):
            df[n].update({g for r in refs for g in ngram_counts(r, n + 1)})
    log_n = math.log(len(data))

    scores = []
    for cand, refs in data:
        cand_vecs = [_tfidf(ngram_counts(cand, n + 1), df[n], log_n) for n in range(max_n)]
        per_order = [0.0] * max_n
        for ref in refs:
            penalty = math.exp(-((len(cand) - len(ref)) ** 2) / (2 * sigma ** 2))
            for n in range(max_n):
                vc, nc = cand_vecs[n]
                vr, nr = _tfidf(ngram_counts(ref, n + 1), df[n], log_n)
                if nc == 0 or nr == 0:
                    continue
                dot = sum(min(vc[g], vr[g]) * vr[g] for g in vc if g in vr)
                per_order[n] += dot / (nc * nr) * penalty
        scores.append(10.0 * sum(per_order) / max_n / len(refs))
    return scores


def cider_d(instances: Sequence[EvalInstance], sigma: float = CIDER_SIGMA) -> float:
    scores = cider_d_instances(instances, sigma)
    return sum(scores) / len(scores)


def spider(cider_score: Optional[float], spice_score: Optional[float]) -> float:
    if cider_score is None or spice_score is None:
        missing = "cider_d" if cider_score is None else "spice"
        raise MissingComponent(f"SPIDEr needs {missing}")
    return (cider_score + spice_score) / 2.0


def _named(name, fn, *args):
    try:
        return fn(*args)
    except AccForgeError as exc:
        exc.metric = name
        raise


def evaluate_corpus(instances: Sequence[EvalInstance],
                    external_scores: Optional[Mapping[str, float]] = None) -> MetricReport:
    """Score a corpus; external ``spice``/``fense`` values are merged in.

    Metrics that were neither computed nor supplied are reported as ``None``.
    """
    if not instances:
        raise EmptyCorpus("no instances to evaluate")
    external = dict(external_scores or {})
    unknown = set(external) - set(EXTERNAL_METRICS)
    if unknown:
        raise ValueError(f"unexpected external metric(s): {sorted(unknown)}")

    scores: dict[str, Optional[float]] = dict.fromkeys(METRIC_NAMES)
    for n, value in enumerate(_named("bleu", bleu, instances), 1):
        scores[f"bleu_{n}"] = value
    cider_each = _named("cider_d", cider_d_instances, instances)
    scores["cider_d"] = sum(cider_each) / len(cider_each)

    data = _tokenized(instances)
    rouge_each = [rouge_l_instance(c, refs) for c, refs in data]
    meteor_each = [meteor_instance(c, refs) for c, refs in data]
    scores["rouge_l"] = sum(rouge_each) / len(data)
    scores["meteor"] = sum(meteor_each) / len(data)
    for name in EXTERNAL_METRICS:
        if external.get(name) is not None:
            scores[name] = float(external[name])
    if scores["spice"] is not None:
        scores["spider"] = spider(scores["cider_d"], scores["spice"])

    table = {
        x.id: {"cider_d": c, "meteor": m, "rouge_l": r}
        for x, c, m, r in zip(instances, cider_each, meteor_each, rouge_each)
    }
    return MetricReport(scores, table)
