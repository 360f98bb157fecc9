import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ragocl.chunker import RawMetaModel, chunk_metamodel
from ragocl.errors import DanglingAssociation
from ragocl.pathocl import (
    Edge,
    ModelGraph,
    PathBudget,
    PathCandidate,
    PathOclContext,
    build_graph,
    enumerate_simple_paths,
    extract_elements,
    jaccard_similarity,
    paths_to_context,
    rank_paths,
)
from ragocl.vectorizers import HashingEmbedder

from oracles import simple_paths_oracle


def graph(nodes, edges):
    return ModelGraph(frozenset(nodes), frozenset(Edge(a, b, "") for a, b in edges))


def test_build_graph_forward_association():
    g = build_graph(RawMetaModel("m", "class A {} class B {} association A --> B"))
    assert g.nodes == {"A", "B"}
    assert {(e.source, e.target) for e in g.edges} == {("A", "B")}


def test_build_graph_classes_only_and_enums_excluded():
    g = build_graph(RawMetaModel("m", "class A {} class B {} enum E { X }"))
    assert g.nodes == {"A", "B"} and not g.edges


def test_build_graph_dangling():
    with pytest.raises(DanglingAssociation) as info:
        build_graph(RawMetaModel("m", "class A {} association A --> C"))
    assert info.value.names == ["C"]


@pytest.mark.parametrize(
    "arrow, expected",
    [
        ("-->", {("A", "B")}),
        ("<--", {("B", "A")}),
        ("--", {("A", "B"), ("B", "A")}),
        ("<-->", {("A", "B"), ("B", "A")}),
        ("..>", {("A", "B")}),
        ("*--", {("A", "B")}),
        ("--*", {("B", "A")}),
        ("o--", {("A", "B")}),
        ("--o", {("B", "A")}),
    ],
)
def test_direction_table(arrow, expected):
    g = build_graph(RawMetaModel("m", f"class A {{}} class B {{}} association A {arrow} B"))
    assert {(e.source, e.target) for e in g.edges} == expected


def test_direction_table_is_configurable():
    g = build_graph(RawMetaModel("m", "class A {} class B {} association A -- B"), {"both": "forward"})
    assert {(e.source, e.target) for e in g.edges} == {("A", "B")}


def test_labels_and_multiplicities():
    text = ('class Person {} class Car {} association owns Person --> Car '
            'association Car "0..*" -- "1" Person : driver')
    g = build_graph(RawMetaModel("m", text))
    labels = {(e.source, e.label, e.target) for e in g.edges}
    assert ("Person", "owns", "Car") in labels
    assert ("Car", "driver", "Person") in labels and ("Person", "driver", "Car") in labels
    assert g.to_edge_list().splitlines()[0].count("\t") == 2


def test_association_without_arrow_is_skipped():
    g = build_graph(RawMetaModel("m", "class A {} association something vague"))
    assert not g.edges


def test_chain_paths():
    res = enumerate_simple_paths(graph("ABC", [("A", "B"), ("B", "C")]), PathBudget(10, 1000))
    assert set(res.paths) == {("A",), ("B",), ("C",), ("A", "B"), ("B", "C"), ("A", "B", "C")}
    assert len(res.paths) == 6 and not res.truncated


def test_diamond_paths():
    g = graph("ABCD", [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")])
    res = enumerate_simple_paths(g, PathBudget(10, 1000))
    a_to_d = [p for p in res.paths if p[0] == "A" and p[-1] == "D"]
    assert a_to_d == [("A", "B", "D"), ("A", "C", "D")]


def test_budget_cap():
    res = enumerate_simple_paths(graph("AB", [("A", "B")]), PathBudget(max_paths=1))
    assert res.paths == [("A",)] and res.truncated


def test_budget_length_cap():
    g = graph("ABCD", [("A", "B"), ("B", "C"), ("C", "D")])
    res = enumerate_simple_paths(g, PathBudget(max_path_len=2))
    assert max(len(p) for p in res.paths) == 2
    assert set(res.paths) == simple_paths_oracle("ABCD", [("A", "B"), ("B", "C"), ("C", "D")], 2)


def test_cycles_terminate():
    g = graph("ABC", [("A", "B"), ("B", "C"), ("C", "A"), ("B", "A")])
    res = enumerate_simple_paths(g)
    assert set(res.paths) == simple_paths_oracle("ABC", [("A", "B"), ("B", "C"), ("C", "A"), ("B", "A")])


def random_graph(rng, max_nodes=8):
    nodes = [f"N{i}" for i in range(rng.randint(1, max_nodes))]
    p = rng.uniform(0.05, 0.5)
    edges = [(a, b) for a in nodes for b in nodes if a != b and rng.random() < p]
    return nodes, edges


def test_enumeration_matches_brute_force_small():
    rng = random.Random(5)
    for _ in range(50):
        nodes, edges = random_graph(rng, 6)
        res = enumerate_simple_paths(graph(nodes, edges), PathBudget(10, 10**6))
        assert len(res.paths) == len(set(res.paths))
        assert set(res.paths) == simple_paths_oracle(nodes, edges)


def test_budget_monotonicity():
    rng = random.Random(9)
    for _ in range(30):
        nodes, edges = random_graph(rng, 6)
        g = graph(nodes, edges)
        full = enumerate_simple_paths(g, PathBudget(10, 10**6)).paths
        for cap in (1, 2, 5, 17):
            assert enumerate_simple_paths(g, PathBudget(10, cap)).paths == full[:cap]


def test_extract_elements():
    g = graph(["Person", "Car"], [])
    assert extract_elements("every person owns cars", g) == {"person", "car"}
    assert extract_elements("nothing relevant", g) == set()
    assert extract_elements("Person person PERSON", g) == {"person"}


def test_extract_elements_edge_labels_and_camel_case():
    g = ModelGraph(frozenset({"OwnedElement", "Package"}),
                   frozenset({Edge("Package", "OwnedElement", "containedItems")}))
    assert extract_elements("each ownedElement of a package has contained items", g) == {
        "ownedelement", "package", "contained", "items"}


def test_jaccard():
    assert jaccard_similarity({"x", "y"}, {"y", "z"}) == 1 / 3
    assert jaccard_similarity({"a"}, {"a"}) == 1.0
    assert jaccard_similarity(set(), set()) == 0.0


@given(st.sets(st.sampled_from("abcdef")), st.sets(st.sampled_from("abcdef")))
def test_jaccard_symmetric_bounded(a, b):
    assert jaccard_similarity(a, b) == jaccard_similarity(b, a)
    assert 0.0 <= jaccard_similarity(a, b) <= 1.0


def test_rank_paths_identity_first():
    paths = [("A",), ("A", "B"), ("B", "C")]
    ranked = rank_paths(paths, {"a", "b"}, "jaccard", k=3)
    assert ranked[0].node_sequence == ("A", "B") and ranked[0].score == 1.0


def test_rank_paths_hand_scored():
    # against {a, b}: {a,c} -> 1/3, {a} -> 1/2, {a,c,d} -> 1/4
    paths = [("A", "C"), ("A",), ("A", "C", "D")]
    elements = {"a", "b"}
    assert [jaccard_similarity({n.lower() for n in p}, elements) for p in paths] == [1 / 3, 1 / 2, 1 / 4]
    (best,) = rank_paths(paths, elements, "jaccard", k=1)
    assert best.node_sequence == ("A",) and best.score == 1 / 2


def test_rank_paths_exhaustive_and_ties():
    paths = [("B", "A"), ("A", "B"), ("C",), ("A",)]
    ranked = rank_paths(paths, {"z"}, "jaccard", k=10)
    assert [c.node_sequence for c in ranked] == [("A",), ("C",), ("A", "B"), ("B", "A")]
    assert ranked[2].context_text == "A -> B"


@given(st.text(alphabet="abcABC person Car", max_size=30))
def test_rank_paths_case_invariant(spec):
    g = graph(["Person", "Car", "Abc"], [("Person", "Car"), ("Car", "Abc")])
    paths = enumerate_simple_paths(g).paths
    lower = rank_paths(paths, extract_elements(spec.lower(), g), "jaccard", k=5)
    upper = rank_paths(paths, extract_elements(spec.upper(), g), "jaccard", k=5)
    assert lower == upper


def test_rank_paths_cosine():
    paths = [("Person", "Car"), ("Engine",)]
    ranked = rank_paths(paths, {"engine"}, "cosine", k=2, provider=HashingEmbedder())
    assert ranked[0].node_sequence == ("Engine",)
    assert ranked[0].score == pytest.approx(1.0)
    assert all(0.0 <= c.score <= 1.0 for c in ranked)
    with pytest.raises(ValueError):
        rank_paths(paths, {"engine"}, "cosine", k=1)
    assert [c.score for c in rank_paths(paths, set(), "cosine", 2, HashingEmbedder())] == [0.0, 0.0]


CHUNKS = chunk_metamodel(RawMetaModel("m", "class A { x } class B { y } class C { } "
                                           "association A --> B : ab association B --> C : bc"))


def test_paths_to_context_single_path():
    text = paths_to_context([PathCandidate(("A", "B"), 1.0, "")], CHUNKS)
    assert text == "class A { x } class B { y } association A --> B : ab"
    for piece in ("class A { x }", "class B { y }", "association A --> B : ab"):
        assert text.count(piece) == 1


def test_paths_to_context_dedup_and_empty():
    text = paths_to_context([PathCandidate(("A",), 1, ""), PathCandidate(("A", "B"), 0.5, "")], CHUNKS)
    assert text.count("class A { x }") == 1
    assert paths_to_context([], CHUNKS) == ""


def test_context_helper_caches_graph():
    ctx = PathOclContext()
    ranked, text = ctx.context("b needs c", "m", CHUNKS, "jaccard", 1)
    assert ranked[0].node_sequence == ("B", "C")
    assert text == "class B { y } class C { } association B --> C : bc"
    assert ctx.context("x", "m", CHUNKS, "jaccard", 0) == ([], "")
    assert "m" in ctx._cache
