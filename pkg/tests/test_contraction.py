import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from cutsparse.connectivity import all_edge_connectivities, local_edge_connectivity
from cutsparse.contraction import (
    contract_experiment,
    contract_frequencies,
    contract_run,
    contract_rw_run,
    duplicate_edges,
    split_off_admissible,
)
from cutsparse.graph import GraphError, Multigraph, generate
from oracles import subsets
from strategies import multigraphs


def test_duplicate_path():
    g = duplicate_edges(generate("path", n=3))
    assert [e.weight for e in g.edges] == [2, 2]


@given(multigraphs(min_n=2, max_n=8, connected=True))
def test_duplicate_even_degrees_and_min_cut(g):
    from cutsparse.connectivity import global_min_cut

    d = duplicate_edges(g)
    assert all(x % 2 == 0 for x in d.degrees())
    assert global_min_cut(d)[0] >= 2


def test_split_path_middle():
    g = generate("path", n=3)
    h = split_off_admissible(g, 1, black=set())
    assert h.n == 2 and [(e.a, e.b, e.weight) for e in h.edges] == [(0, 1, 1)]


def test_split_rejects_black_vertex():
    with pytest.raises(GraphError):
        split_off_admissible(generate("path", n=3), 1, black={0})


def test_split_figure1_midpoints():
    n = 6
    h = duplicate_edges(generate("figure1", n=n))
    for _ in range(n - 2):
        h = split_off_admissible(h, 2, black={0})
    assert h.n == 2
    assert sum(e.weight for e in h.edges) == 2 + 2 * (n - 2)
    assert local_edge_connectivity(h, 0, 1) == 2 * (n - 1)


def test_split_star_no_black():
    star = duplicate_edges(Multigraph.from_edges(5, [(0, i, 1) for i in range(1, 5)]))
    h = split_off_admissible(star, 0, black=set())
    assert h.n == 4
    assert all(x % 2 == 0 for x in h.degrees())
    assert h.total_weight() == 4


def _black_pairs(g, black):
    verts = sorted({v for e in g.edges if e.id in black for v in (e.a, e.b)})
    return [(s, t) for i, s in enumerate(verts) for t in verts[i + 1:]]


@settings(max_examples=40)
@given(multigraphs(min_n=3, max_n=8, max_w=3, connected=True), st.data())
def test_isolation_succeeds_after_duplication(g, data):
    d = duplicate_edges(g)
    ids = [e.id for e in d.edges]
    black = data.draw(st.sets(st.sampled_from(ids), min_size=1, max_size=3))
    bverts = {v for e in d.edges if e.id in black for v in (e.a, e.b)}
    white = [v for v in range(d.n) if v not in bverts]
    if not white:
        return
    v = data.draw(st.sampled_from(white))
    h = split_off_admissible(d, v, black)
    shift = lambda x: x - (x > v)
    for s, t in _black_pairs(d, black):
        assert local_edge_connectivity(h, shift(s), shift(t)) == local_edge_connectivity(d, s, t)
    # black edges are untouched, so every cut restricted to them is unchanged
    for S in subsets(h.n):
        orig = {x for x in range(d.n) if x != v and shift(x) in S}
        before = sum(e.weight for e in d.edges if e.id in black and ((e.a in orig) != (e.b in orig)))
        after = sum(e.weight for e in h.edges if e.id in black and ((e.a in S) != (e.b in S)))
        assert before == after


def test_loop_guard_small_graph():
    g = generate("path", n=2)
    out = {contract_run(duplicate_edges(g), {0}, 1, random.Random(s)) for s in range(20)}
    assert out == {(0,)}


def test_contract_validation():
    g = duplicate_edges(generate("cycle", n=4))
    with pytest.raises(GraphError):
        contract_run(g, {0}, 0.5, random.Random(0))
    with pytest.raises(GraphError):
        contract_run(g, set(), 1, random.Random(0))
    with pytest.raises(GraphError):
        contract_frequencies(g, {0}, 1, "magic", 10)


def _k_of(edges, n, a, b):
    if not edges:
        return 0
    h = Multigraph(n, [tuple(e) for e in edges])
    return local_edge_connectivity(h, a, b)


@pytest.mark.parametrize("runner", ["split", "rw"])
def test_black_connectivity_invariant_along_traces(runner):
    for name, g, black in [
        ("cycle", generate("cycle", n=7), None),
        ("figure1", generate("figure1", n=6), {0}),
        ("gnp", generate("random-gnp", seed=4, n=9, p=0.5, wmax=2), None),
    ]:
        if black is None:
            black = {e.id for e in g.edges if e.id % 3 == 0}
        work = duplicate_edges(g) if runner == "split" else g
        K = min(all_edge_connectivities(work).k[e] for e in black)

        def check(edges, alive):
            for e in edges:
                if e[0] in black:
                    assert _k_of(edges, work.n, e[1], e[2]) >= K

        for s in range(15):
            rng = random.Random(s)
            if runner == "split":
                contract_run(work, black, 1, rng, on_step=check)
            else:
                contract_rw_run(work, black, 1, rng, on_step=check)


def test_rw_all_black_single_steps():
    g = generate("cycle", n=6)
    black = set(g.ids.tolist())
    steps = []
    contract_rw_run(g, black, 1, random.Random(3), on_step=lambda e, a: steps.append(len(a)))
    # every walk is one edge long, so each contraction removes exactly one vertex
    assert steps == [5, 4, 3, 2]


def test_output_is_black_subset():
    g = generate("figure1", n=6)
    for s in range(30):
        out = contract_rw_run(g, {0, 1}, 1, random.Random(s))
        assert set(out) <= {0, 1}
        out = contract_run(duplicate_edges(g), {0, 1}, 1, random.Random(s))
        assert set(out) <= {0, 1}


def test_frequencies_independent_of_jobs():
    g = generate("cycle", n=5)
    black = set(g.ids.tolist())
    a = contract_frequencies(g, black, 1, "rw", 9000, seed=2, jobs=1)
    b = contract_frequencies(g, black, 1, "rw", 9000, seed=2, jobs=2)
    assert a == b and sum(a.values()) == 9000


@pytest.mark.parametrize("algo", ["split", "rw"])
def test_small_experiment_meets_bound(algo):
    g = generate("cycle", n=6)
    out = contract_experiment(g, set(g.ids.tolist()), 1, algo, 20_000, seed=1)
    assert out["pass"]
    assert out["bound"] == pytest.approx(1 / 36)
    assert len(out["statistics"]["targets"]) == 15
