"""
What two clips have in common
=============================

Add and Delete keep one caption verbatim. Replace looks for the longest run
of words the two captions share.
"""

from acc_forge import derive_commonality, longest_common_word_substring
from acc_forge.commonality import replace_overlap
from acc_forge.edit_synth import EditOp, EditPair, Provenance
from acc_forge.errors import EmptyCommonality
from acc_forge.text import normalize_caption

before = "A man speaks while rain falls, with a dog barking"
after = "A man speaks while rain falls, with a short piano melody"

# token runs are compared in lowercase with punctuation as a separator
a, b = normalize_caption(before), normalize_caption(after)
print(a.tokens)
print(longest_common_word_substring(a.tokens, b.tokens))

# the shared run ends on "with a", which is trimmed; the original casing is kept
print(repr(replace_overlap(before, after)))

# too little overlap is reported rather than turned into a bad target
try:
    replace_overlap("Rain, with a dog barking", "Rain, with a piano melody")
except EmptyCommonality as exc:
    print("skipped:", exc)

# derive_commonality picks the rule from the pair's operation
prov = Provenance("b0", "e0", "e1", (0.1, 0.2), (5.0, 3.0), (0.4, 0.5), 7)
for op, cap_a, cap_b in [
    (EditOp.ADD, "A man speaks while rain falls", before),
    (EditOp.DELETE, after, "A man speaks while rain falls"),
    (EditOp.REPLACE, before, after),
]:
    pair = EditPair("p", op, "x.wav", "y.wav", cap_a, cap_b, "instruction", prov)
    print(f"{op.value:8s} -> {derive_commonality(pair)!r}")
