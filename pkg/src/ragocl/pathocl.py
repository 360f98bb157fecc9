"""PathOCL baseline: rank simple paths through the class graph and use them as prompt context.

Relation direction table (keys of :data:`DEFAULT_DIRECTIONS`):

=============  ============================  ==========
kind           arrows                        edges
=============  ============================  ==========
forward        ``-->`` ``..>`` ``->``        src -> tgt
backward       ``<--`` ``<..``               tgt -> src
both           ``--`` ``..`` ``<-->``        both ways
composition    ``*--`` / ``--*``             whole -> part
aggregation    ``o--`` / ``--o``             whole -> part
=============  ============================  ==========
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

from ragocl.chunker import Chunk, ChunkKind, RawMetaModel, chunk_metamodel
from ragocl.errors import DanglingAssociation
from ragocl.text import tokenize, words
from ragocl.vectorizers import DenseProvider, cosine_similarity

log = logging.getLogger(__name__)

Direction = Literal["forward", "backward", "both"]

DEFAULT_DIRECTIONS: dict[str, Direction] = {
    "forward": "forward",
    "backward": "backward",
    "both": "both",
    "composition": "forward",
    "aggregation": "forward",
}

_IDENT = r'(?:"[^"]+"|[^\W\d][\w.:$]*)'
_MULT = r'(?:"[^"]*"\s*)?'
_ARROW = r"(?P<arrow>[<*o]?(?:-+|\.+)[>*o]?)"
_RELATION = re.compile(
    rf"(?P<src>{_IDENT})\s*{_MULT}{_ARROW}\s*{_MULT}(?P<tgt>{_IDENT})(?:\s*:\s*(?P<label>[^{{}}]*))?"
)


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    label: str


@dataclass(frozen=True)
class ModelGraph:
    nodes: frozenset[str]
    edges: frozenset[Edge]

    def successors(self) -> dict[str, list[str]]:
        adj: dict[str, set[str]] = {n: set() for n in self.nodes}
        for e in self.edges:
            adj[e.source].add(e.target)
        return {n: sorted(s) for n, s in adj.items()}

    def to_edge_list(self) -> str:
        """Debug export: ``source<TAB>label<TAB>target`` lines, sorted."""
        rows = sorted((e.source, e.label, e.target) for e in self.edges)
        return "".join(f"{s}\t{lbl}\t{t}\n" for s, lbl, t in rows)


@dataclass(frozen=True)
class PathBudget:
    max_path_len: int = 6
    max_paths: int = 10_000

    def __post_init__(self):
        if self.max_path_len < 1 or self.max_paths < 1:
            raise ValueError("path budget limits must be >= 1")


@dataclass
class EnumeratedPaths:
    paths: list[tuple[str, ...]] = field(default_factory=list)
    # True once the max_paths cap was reached; further paths may exist
    truncated: bool = False


@dataclass(frozen=True)
class PathCandidate:
    node_sequence: tuple[str, ...]
    score: float
    context_text: str


@dataclass(frozen=True)
class Relation:
    source: str
    target: str
    arrow: str
    label: str

    @property
    def kind(self) -> str:
        a = self.arrow
        if a[0] == "*" or a[-1] == "*":
            return "composition"
        if a[0] == "o" or a[-1] == "o":
            return "aggregation"
        left, right = a[0] == "<", a[-1] == ">"
        if left and right:
            return "both"
        if right:
            return "forward"
        if left:
            return "backward"
        return "both"

    def whole_first(self) -> tuple[str, str]:
        """(whole, part) for composition/aggregation; (source, target) otherwise."""
        if self.arrow[-1] in "*o":
            return self.target, self.source
        return self.source, self.target


def _unquote(name: str) -> str:
    return name[1:-1] if name.startswith('"') and name.endswith('"') else name


def parse_association(chunk: Chunk) -> Relation | None:
    """Find the relation in an association chunk; ``None`` when no arrow is present."""
    body = chunk.text[len(chunk.keyword):].strip()
    m = _RELATION.search(body)
    if m is None:
        return None
    label = (m.group("label") or "").strip()
    if not label:
        # "association owns Person --> Car": name tokens before the source
        label = body[: m.start()].strip().strip('"')
    return Relation(_unquote(m.group("src")), _unquote(m.group("tgt")), m.group("arrow"), label)


def _directed(rel: Relation, directions: Mapping[str, Direction]) -> list[tuple[str, str]]:
    kind = rel.kind
    src, tgt = rel.whole_first() if kind in ("composition", "aggregation") else (rel.source, rel.target)
    how = directions[kind]
    if how == "forward":
        return [(src, tgt)]
    if how == "backward":
        return [(tgt, src)]
    return [(src, tgt), (tgt, src)]


def build_graph(
    model: RawMetaModel | Sequence[Chunk],
    directions: Mapping[str, Direction] = DEFAULT_DIRECTIONS,
) -> ModelGraph:
    chunks = chunk_metamodel(model) if isinstance(model, RawMetaModel) else list(model)
    nodes = {c.declared_name for c in chunks if c.kind is ChunkKind.CLASS and c.declared_name}
    edges: set[Edge] = set()
    for c in chunks:
        if c.kind is not ChunkKind.ASSOCIATION:
            continue
        rel = parse_association(c)
        if rel is None:
            log.warning("skipping association without a relation arrow: %s", c.text)
            continue
        missing = sorted({rel.source, rel.target} - nodes)
        if missing:
            raise DanglingAssociation(missing)
        for s, t in _directed(rel, {**DEFAULT_DIRECTIONS, **directions}):
            edges.add(Edge(s, t, rel.label))
    return ModelGraph(frozenset(nodes), frozenset(edges))


def enumerate_simple_paths(graph: ModelGraph, budget: PathBudget = PathBudget()) -> EnumeratedPaths:
    """Depth-first, lexicographic enumeration of every simple path (single nodes included).

    Paths are emitted in a fixed order (start node, then DFS), so a larger
    ``max_paths`` only ever appends to the result.
    """
    adj = graph.successors()
    out = EnumeratedPaths()

    for start in sorted(graph.nodes):
        path = [start]
        on_path = {start}
        out.paths.append((start,))
        if len(out.paths) >= budget.max_paths:
            out.truncated = True
            return out
        stack = [iter(adj[start])] if budget.max_path_len > 1 else []
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if nxt in on_path:
                continue
            path.append(nxt)
            on_path.add(nxt)
            out.paths.append(tuple(path))
            if len(out.paths) >= budget.max_paths:
                out.truncated = True
                return out
            if len(path) < budget.max_path_len:
                stack.append(iter(adj[nxt]))
            else:
                on_path.discard(path.pop())
    return out


def _fold_plural(token: str) -> list[str]:
    forms = [token]
    if len(token) > 1 and token.endswith("s"):
        forms.append(token[:-1])
    return forms


def extract_elements(nl_spec: str, graph: ModelGraph) -> set[str]:
    """Specification terms naming a class or an association-label token (lowercased)."""
    vocab = {n.lower() for n in graph.nodes}
    for e in graph.edges:
        vocab.update(tokenize(e.label))
        vocab.update(words(e.label))
    found: set[str] = set()
    for tok in dict.fromkeys(words(nl_spec) + tokenize(nl_spec)):
        for form in _fold_plural(tok):
            if form in vocab:
                found.add(form)
                break
    return found


def jaccard_similarity(a: Iterable, b: Iterable) -> float:
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return 0.0
    return len(a & b) / len(union)


def rank_paths(
    paths: Sequence[Sequence[str]],
    elements: set[str],
    measure: Literal["jaccard", "cosine"] = "jaccard",
    k: int = 1,
    provider: DenseProvider | None = None,
) -> list[PathCandidate]:
    if not paths:
        raise ValueError("rank_paths needs at least one path")
    names = [[n.lower() for n in p] for p in paths]
    if measure == "jaccard":
        scores = [jaccard_similarity(ns, elements) for ns in names]
    elif measure == "cosine":
        if provider is None:
            raise ValueError("cosine measure needs a dense provider")
        if not elements:
            scores = [0.0] * len(paths)
        else:
            vecs = provider.embed([" ".join(sorted(elements))] + [" ".join(ns) for ns in names])
            # negative cosine carries no relevance signal; keep scores in [0, 1]
            scores = [max(0.0, cosine_similarity(vecs[0], v)) for v in vecs[1:]]
    else:
        raise ValueError(f"unknown measure {measure!r}")
    order = sorted(range(len(paths)), key=lambda i: (-scores[i], len(paths[i]), tuple(paths[i])))
    return [
        PathCandidate(tuple(paths[i]), scores[i], " -> ".join(paths[i]))
        for i in order[:k]
    ]


def paths_to_context(candidates: Sequence[PathCandidate], model_chunks: Sequence[Chunk]) -> str:
    """Class chunks along each path, then the association chunks linking consecutive nodes."""
    classes: dict[str, Chunk] = {}
    links: dict[frozenset[str], list[Chunk]] = {}
    for c in model_chunks:
        if c.kind is ChunkKind.CLASS and c.declared_name:
            classes.setdefault(c.declared_name, c)
        elif c.kind is ChunkKind.ASSOCIATION:
            rel = parse_association(c)
            if rel is not None:
                links.setdefault(frozenset((rel.source, rel.target)), []).append(c)

    emitted: list[str] = []
    seen: set[int] = set()

    def emit(chunk: Chunk) -> None:
        if chunk.index not in seen:
            seen.add(chunk.index)
            emitted.append(chunk.text)

    for cand in candidates:
        seq = cand.node_sequence
        for node in seq:
            if node in classes:
                emit(classes[node])
        for a, b in zip(seq, seq[1:]):
            for chunk in links.get(frozenset((a, b)), []):
                emit(chunk)
    return " ".join(emitted)


class PathOclContext:
    """Per-model cache of graphs and enumerated paths used by the sweep and service."""

    def __init__(self, budget: PathBudget = PathBudget(), directions: Mapping[str, Direction] = DEFAULT_DIRECTIONS):
        self.budget = budget
        self.directions = directions
        self._cache: dict[str, tuple[ModelGraph, EnumeratedPaths]] = {}

    def graph_and_paths(self, model_name: str, chunks: Sequence[Chunk]) -> tuple[ModelGraph, EnumeratedPaths]:
        hit = self._cache.get(model_name)
        if hit is None:
            graph = build_graph(chunks, self.directions)
            paths = enumerate_simple_paths(graph, self.budget)
            if paths.truncated:
                log.warning("path enumeration for %s truncated at %d paths", model_name, len(paths.paths))
            hit = self._cache[model_name] = (graph, paths)
        return hit

    def context(
        self,
        nl_spec: str,
        model_name: str,
        chunks: Sequence[Chunk],
        measure: Literal["jaccard", "cosine"],
        k: int,
        provider: DenseProvider | None = None,
    ) -> tuple[list[PathCandidate], str]:
        if k == 0:
            return [], ""
        graph, paths = self.graph_and_paths(model_name, chunks)
        if not paths.paths:
            return [], ""
        elements = extract_elements(nl_spec, graph)
        ranked = rank_paths(paths.paths, elements, measure, k, provider)
        return ranked, paths_to_context(ranked, chunks)
