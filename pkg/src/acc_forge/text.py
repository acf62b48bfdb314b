"""Caption tokenization shared by dataset construction and scoring."""

from __future__ import annotations

import re
from dataclasses import dataclass

# Punctuation characters are token boundaries. Apostrophes stay inside words.
PUNCTUATION = '.,!?;:"()'
_TOKEN = re.compile(r'[^\s.,!?;:"()]+')


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]
    text: str = ""

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    def source_slice(self, start: int, length: int) -> str:
        """Original text covered by ``tokens[start:start + length]``."""
        if length <= 0:
            return ""
        return self.text[self.spans[start][0]:self.spans[start + length - 1][1]]


def normalize_caption(text: str) -> TokenSeq:
    """Lowercase word tokens with character spans into ``text``.

    >>> normalize_caption("A man speaks.").tokens
    ('a', 'man', 'speaks')
    """
    tokens, spans = [], []
    for m in _TOKEN.finditer(text):
        tokens.append(m.group().lower())
        spans.append(m.span())
    return TokenSeq(tuple(tokens), tuple(spans), text)


def tokenize(text: str) -> list[str]:
    return list(normalize_caption(text).tokens)
