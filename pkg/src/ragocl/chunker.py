"""Split textual PlantUML meta-models into one-declaration chunks.

Chunking is purely lexical: a chunk starts at every standalone ``class``,
``enum`` or ``association`` token and runs until the next one. Braces are not
tracked, so a keyword inside a class body also opens a new chunk.
"""

from __future__ import annotations

import bisect
import enum
import re
from dataclasses import dataclass

from ragocl.errors import NoDeclarationsFound

KEYWORDS = ("class", "enum", "association")
# top-level directives close the current chunk without opening a new one
_TERMINATORS = ("@startuml", "@enduml", "skinparam")

_NAME = re.compile(r'"([^"]+)"|([^\W\d][\w.:$]*)')


class ChunkKind(str, enum.Enum):
    CLASS = "Class"
    ENUM = "Enum"
    ASSOCIATION = "Association"


_KIND_BY_KEYWORD = {
    "class": ChunkKind.CLASS,
    "enum": ChunkKind.ENUM,
    "association": ChunkKind.ASSOCIATION,
}


@dataclass(frozen=True)
class RawMetaModel:
    name: str
    plantuml_text: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("meta-model name must be non-empty")
        if not self.plantuml_text:
            raise ValueError(f"meta-model {self.name!r} has empty PlantUML text")


@dataclass(frozen=True)
class Chunk:
    model_name: str
    index: int
    kind: ChunkKind
    text: str

    @property
    def keyword(self) -> str:
        return self.text.split(" ", 1)[0]

    @property
    def declared_name(self) -> str | None:
        """Identifier following the keyword, e.g. ``Person`` for ``class Person {``."""
        rest = self.text[len(self.keyword):]
        m = _NAME.search(rest)
        if m is None:
            return None
        return m.group(1) if m.group(1) is not None else m.group(2)


def normalize_text(raw: str) -> str:
    """Replace tabs/line breaks by spaces, collapse whitespace runs and strip."""
    return " ".join(raw.split())


def count_declarations(normalized: str) -> int:
    return sum(1 for tok in normalized.split(" ") if tok in KEYWORDS)


def chunk_metamodel(model: RawMetaModel) -> list[Chunk]:
    tokens = normalize_text(model.plantuml_text).split(" ")
    starts = [i for i, tok in enumerate(tokens) if tok in KEYWORDS]
    if not starts:
        raise NoDeclarationsFound(f"meta-model {model.name!r} contains no class/enum/association declaration")
    stops = sorted(starts + [i for i, tok in enumerate(tokens) if tok in _TERMINATORS] + [len(tokens)])
    bounds = [stops[bisect.bisect_right(stops, start)] for start in starts]
    return [
        Chunk(
            model_name=model.name,
            index=idx,
            kind=_KIND_BY_KEYWORD[tokens[start]],
            text=" ".join(tokens[start:end]),
        )
        for idx, (start, end) in enumerate(zip(starts, bounds))
    ]
