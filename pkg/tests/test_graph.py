import itertools

import pytest
from hypothesis import given, strategies as st

from cutsparse.graph import (
    Edge,
    GraphError,
    Multigraph,
    ParseError,
    Sparsifier,
    WeightedEdge,
    align_sparsifier,
    contract_edge,
    cut_weight,
    generate,
    parse_graph,
    parse_sparsifier,
    serialize_graph,
)
from oracles import brute_cut, brute_edges, subsets
from strategies import multigraphs


def test_parse_path():
    g = parse_graph("3 2\n0 1 1\n1 2 1")
    assert g.n == 3 and g.m == 2
    assert [(e.a, e.b, e.weight) for e in g.edges] == [(0, 1, 1), (1, 2, 1)]


def test_parse_merges_duplicates():
    g = parse_graph("2 2\n0 1 2\n0 1 3")
    assert g.edges == (Edge(0, 0, 1, 5),)


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("2 1\n0 2 1", 2, "vertex index out of range"),
        ("2 1\n0 1 0", 2, "weight"),
        ("2 1\n0 1 1.5", 2, "not integer"),
        ("2 1\n0 1", 2, "expected"),
        ("3 2\n0 1 1\n# note\n1 x 1", 4, "malformed"),
    ],
)
def test_parse_errors_name_line(text, line, fragment):
    with pytest.raises(ParseError) as info:
        parse_graph(text)
    assert info.value.line == line
    assert fragment in str(info.value)
    assert f"line {line}" in str(info.value)


def test_vertex_range_message():
    with pytest.raises(ParseError, match="vertex index out of range, line 2"):
        parse_graph("2 1\n0 2 1")


def test_comments_and_blank_lines():
    g = parse_graph("# header next\n3 2   # n m\n\n0 1 1\n1 2 4 # heavy\n")
    assert g.total_weight() == 5


def test_serialize_path():
    assert serialize_graph(generate("path", n=3)) == "3 2\n0 1 1\n1 2 1\n"


def test_serialize_real_weight():
    sp = Sparsifier(2, [WeightedEdge(0, 0, 1, 1.5)])
    assert "0 1 1.5" in serialize_graph(sp).splitlines()
    # twelve significant digits
    sp = Sparsifier(2, [WeightedEdge(0, 0, 1, 1 / 3)])
    assert serialize_graph(sp).splitlines()[1] == "0 1 0.333333333333"


@given(multigraphs(min_n=1, max_n=9, max_w=7))
def test_roundtrip(g):
    assert parse_graph(serialize_graph(g)) == g


def test_roundtrip_random_gnp():
    for seed in range(100):
        g = generate("random-gnp", seed=seed, n=9, p=0.4, wmax=5)
        assert parse_graph(serialize_graph(g)) == g


def test_sparsifier_drops_zero_weight():
    sp = Sparsifier(3, [WeightedEdge(0, 0, 1, 0.0), WeightedEdge(1, 1, 2, 2.0)])
    assert [e.id for e in sp.edges] == [1]


def test_parse_sparsifier_rejects_nonpositive():
    with pytest.raises(ParseError):
        parse_sparsifier("2 1\n0 1 -1")


def test_align_sparsifier_uses_endpoints():
    g = generate("path", n=4)
    sp = parse_sparsifier("4 1\n2 3 2.5\n")
    al = align_sparsifier(g, sp)
    assert al.edges == (WeightedEdge(2, 2, 3, 2.5),)
    with pytest.raises(GraphError):
        align_sparsifier(g, parse_sparsifier("4 1\n0 3 1\n"))


def test_multigraph_drops_loops_and_checks():
    g = Multigraph(3, [Edge(0, 1, 1, 3), Edge(1, 0, 2, 1)])
    assert g.m == 1
    with pytest.raises(GraphError):
        Multigraph(2, [Edge(0, 0, 5, 1)])
    with pytest.raises(GraphError):
        Multigraph(2, [Edge(0, 0, 1, 0)])


def test_cut_weight_examples():
    assert cut_weight(generate("path", n=3), {0}) == 1
    assert cut_weight(generate("figure1", n=6), {0}) == 5
    k4 = generate("complete", n=4)
    for s in itertools.combinations(range(4), 2):
        assert cut_weight(k4, set(s)) == 4


def test_cut_weight_bitmask_matches_set():
    g = generate("figure1", n=6)
    assert cut_weight(g, 0b000101) == cut_weight(g, {0, 2})


@pytest.mark.parametrize("s", [set(), {0, 1, 2}, 0, 0b111])
def test_cut_weight_rejects_trivial(s):
    with pytest.raises(GraphError):
        cut_weight(generate("path", n=3), s)


@given(multigraphs(min_n=2, max_n=7), st.data())
def test_cut_symmetry(g, data):
    s = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
    rest = set(range(g.n)) - s
    assert cut_weight(g, s) == cut_weight(g, rest) == brute_cut(brute_edges(g), s)


@given(multigraphs(min_n=3, max_n=6), st.data())
def test_cut_additive_over_edge_split(g, data):
    ids = [e.id for e in g.edges]
    part = data.draw(st.sets(st.sampled_from(ids))) if ids else set()
    s = data.draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
    a = g.subgraph(part)
    b = g.subgraph(set(ids) - part)
    assert cut_weight(g, s) == cut_weight(a, s) + cut_weight(b, s)


def test_generate_figure1():
    g = generate("figure1", n=6)
    # n counts s, t and the n-2 midpoints
    assert g.n == 6 and g.m == 9 and g.total_weight() == 9


def test_generate_figure2():
    g = generate("figure2", n=5)
    assert g.m == 5 and g.total_weight() == 17
    assert sorted(e.weight for e in g.edges) == [1, 4, 4, 4, 4]


def test_generate_figure3():
    g = generate("figure3", k=4)
    assert g.n == 6 and g.edge(0).weight == 4 and g.total_weight() == 12


def test_generate_tree_lower_bound_smallest():
    g = generate("tree-lower-bound", n=1, k=1)
    # u_1, v_1, v_2
    assert g.n == 3 and g.m == 3 and g.total_weight() == 3


def test_generate_tree_lower_bound_layout():
    g = generate("tree-lower-bound", n=4, k=3)
    assert g.n == 9
    assert [g.edge(3 * i).weight for i in range(4)] == [3] * 4
    assert all(g.edge(3 * i + j).weight == 1 for i in range(4) for j in (1, 2))


def test_generate_dumbbell():
    g = generate("dumbbell", n=4)
    assert g.n == 8 and g.m == 13


@pytest.mark.parametrize(
    "family, params",
    [("figure1", {"n": 2}), ("cycle", {"n": 2}), ("tree-lower-bound", {"n": 0, "k": 1}),
     ("tree-lower-bound", {"n": 1, "k": 0}), ("random-gnp", {"n": 3, "p": 2}), ("nope", {})],
)
def test_generate_rejects(family, params):
    with pytest.raises(GraphError):
        generate(family, **params)


def test_generate_deterministic():
    a = generate("random-gnp", seed=11, n=12, p=0.3, wmax=4)
    b = generate("random-gnp", seed=11, n=12, p=0.3, wmax=4)
    assert a == b


def test_contract_path():
    h, mapping = contract_edge(generate("path", n=3), 0)
    assert h.n == 2 and [(e.a, e.b) for e in h.edges] == [(0, 1)]
    assert mapping == [0, 0, 1]


def test_contract_triangle_keeps_parallel_records():
    h, _ = contract_edge(generate("cycle", n=3), 0)
    assert h.n == 2 and h.m == 2
    assert {e.id for e in h.edges} == {1, 2}


def test_contract_unknown_id():
    with pytest.raises(GraphError):
        contract_edge(generate("path", n=3), 9)


@given(multigraphs(min_n=2, max_n=7, connected=True), st.randoms(use_true_random=False))
def test_contract_spanning_tree_leaves_only_nontree(g, rnd):
    import networkx as nx

    G = nx.Graph()
    for e in g.edges:
        G.add_edge(e.a, e.b, id=e.id)
    tree = [d["id"] for _, _, d in nx.minimum_spanning_edges(G, data=True)]
    rnd.shuffle(tree)
    h = g
    for eid in tree:
        h, _ = contract_edge(h, eid)
    assert h.n == 1 and h.m == 0


@given(multigraphs(min_n=3, max_n=8), st.data())
def test_contracted_cuts_are_original_cuts(g, data):
    if not g.m:
        return
    eid = data.draw(st.sampled_from([e.id for e in g.edges]))
    h, mapping = contract_edge(g, eid)
    for S in subsets(h.n):
        orig = {v for v in range(g.n) if mapping[v] in S}
        assert cut_weight(h, S) == cut_weight(g, orig)
