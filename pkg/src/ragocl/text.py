"""Tokenization shared by BM25, the sparse surrogate, the hashing embedder and PathOCL."""

from __future__ import annotations

import re

_ALNUM_RUN = re.compile(r"[^\W_]+")


def _split_camel(word: str) -> list[str]:
    parts: list[str] = []
    start = 0
    for i in range(1, len(word)):
        prev, cur = word[i - 1], word[i]
        nxt = word[i + 1] if i + 1 < len(word) else ""
        # fooBar -> foo|Bar ; HTTPServer -> HTTP|Server
        if (prev.islower() and cur.isupper()) or (prev.isupper() and cur.isupper() and nxt.islower()):
            parts.append(word[start:i])
            start = i
    parts.append(word[start:])
    return parts


def tokenize(text: str) -> list[str]:
    """Lowercased tokens: split on non-alphanumerics, then on camelCase boundaries.

    >>> tokenize("self.ownedAttribute->size()")
    ['self', 'owned', 'attribute', 'size']
    """
    tokens: list[str] = []
    for run in _ALNUM_RUN.findall(text):
        tokens.extend(p.lower() for p in _split_camel(run) if p)
    return tokens


def words(text: str) -> list[str]:
    """Lowercased alphanumeric runs without camelCase splitting."""
    return [w.lower() for w in _ALNUM_RUN.findall(text)]
