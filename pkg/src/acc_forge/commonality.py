"""Commonality targets for edit pairs.

Add pairs share everything the pre-edit clip contains, so its caption is the
target; Delete pairs share the post-edit clip's content. Replace pairs share
only the part of the captions that survives the substitution, found as the
longest common run of words.
"""

from __future__ import annotations

from typing import Sequence, Union

from .edit_synth import EditOp, EditPair
from .errors import EmptyCommonality
from .text import TokenSeq, normalize_caption

MIN_REPLACE_TOKENS = 3
TRAILING_CONNECTIVES = frozenset({"with", "a", "an", "and", "the", "of"})

Tokens = Union[TokenSeq, Sequence[str]]


def _tokens(seq: Tokens) -> Sequence[str]:
    return seq.tokens if isinstance(seq, TokenSeq) else seq


def longest_common_word_substring(a: Tokens, b: Tokens) -> tuple[int, int, int]:
    """Longest contiguous token run present in both sequences.

    Returns ``(start_a, start_b, length)``. Ties go to the smallest
    ``start_a`` and then the smallest ``start_b``; ``length`` is 0 (with both
    starts 0) when the sequences share no token.
    """
    ta, tb = _tokens(a), _tokens(b)
    best = (0, 0, 0)
    prev = [0] * (len(tb) + 1)
    for i in range(1, len(ta) + 1):
        cur = [0] * (len(tb) + 1)
        ai = ta[i - 1]
        for j in range(1, len(tb) + 1):
            if ai == tb[j - 1]:
                run = prev[j - 1] + 1
                cur[j] = run
                cand = (i - run, j - run, run)
                if run > best[2] or (run == best[2] and cand[:2] < best[:2]):
                    best = cand
        prev = cur
    return best


def replace_overlap(before_caption: str, after_caption: str, min_length: int = MIN_REPLACE_TOKENS) -> str:
    before = normalize_caption(before_caption)
    after = normalize_caption(after_caption)
    start, _, length = longest_common_word_substring(before, after)
    while length and before.tokens[start + length - 1] in TRAILING_CONNECTIVES:
        length -= 1
    if length < min_length:
        raise EmptyCommonality(
            f"overlap of {length} token(s) between {before_caption!r} and {after_caption!r} "
            f"is below the minimum of {min_length}"
        )
    return before.source_slice(start, length)


def derive_commonality(pair: EditPair, min_length: int = MIN_REPLACE_TOKENS) -> str:
    if pair.op is EditOp.ADD:
        return pair.before_caption
    if pair.op is EditOp.DELETE:
        return pair.after_caption
    return replace_overlap(pair.before_caption, pair.after_caption, min_length)
