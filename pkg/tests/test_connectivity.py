import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from cutsparse.connectivity import (
    KappaAssignment,
    all_edge_connectivities,
    connectivity_estimation,
    connectivity_table,
    edge_strength_exact,
    effective_resistance,
    effective_resistances,
    estimate_kappa,
    format_table,
    global_min_cut,
    k_partition,
    local_edge_connectivity,
    ni_labels,
    strength_sum,
)
from cutsparse.graph import GraphError, InvariantError, Multigraph, cut_weight, generate
from oracles import brute_kst, brute_min_cut, brute_strength, nx_resistance, subsets
from strategies import multigraphs

# values reported for the example graphs: k_st = n-1, c_st = n/2, k'_st = 2 for
# figure1 and k_st = k'_st = n, c_st = 2 for figure2


def test_local_connectivity_examples():
    assert local_edge_connectivity(generate("figure1", n=6), 0, 1) == 5
    assert local_edge_connectivity(generate("path", n=3), 0, 2) == 1
    with pytest.raises(GraphError):
        local_edge_connectivity(generate("path", n=3), 1, 1)


def test_local_connectivity_disconnected_is_zero():
    g = Multigraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    assert local_edge_connectivity(g, 0, 3) == 0


@given(multigraphs(min_n=2, max_n=8, max_w=5), st.data())
def test_local_connectivity_matches_bruteforce(g, data):
    s = data.draw(st.integers(0, g.n - 1))
    t = data.draw(st.integers(0, g.n - 1).filter(lambda x: x != s))
    assert local_edge_connectivity(g, s, t) == brute_kst(g, s, t)


def test_local_connectivity_random_gnp_8():
    for seed in range(5):
        g = generate("random-gnp", seed=seed, n=8, p=0.5, wmax=3)
        for s, t in [(0, 7), (2, 5)]:
            assert local_edge_connectivity(g, s, t) == brute_kst(g, s, t)


def test_all_connectivities_examples():
    assert set(all_edge_connectivities(generate("cycle", n=5)).k.values()) == {2}
    assert all_edge_connectivities(generate("figure2", n=5)).k[0] == 5
    assert set(all_edge_connectivities(generate("complete", n=5)).k.values()) == {4}
    with pytest.raises(GraphError):
        all_edge_connectivities(Multigraph.from_edges(3, [(0, 1, 1)]))


def test_large_capacity_fallback_agrees():
    # total weight beyond int32 routes through the Python scaling solver
    g = Multigraph.from_edges(4, [(0, 1, 2**31), (1, 2, 3), (2, 3, 2**31), (0, 3, 5)])
    assert local_edge_connectivity(g, 0, 2) == 8
    assert local_edge_connectivity(g, 0, 1) == 2**31 + 3


def test_global_min_cut_examples():
    assert global_min_cut(generate("path", n=4))[0] == 1
    assert global_min_cut(generate("figure1", n=6))[0] == 2
    assert global_min_cut(generate("complete", n=4))[0] == 3


def test_global_min_cut_disconnected():
    g = Multigraph.from_edges(4, [(0, 1, 1), (2, 3, 1)])
    value, side = global_min_cut(g)
    assert value == 0 and cut_weight(g, side) == 0


@given(multigraphs(min_n=2, max_n=9, max_w=5, connected=True))
def test_global_min_cut_matches_enumeration(g):
    value, side = global_min_cut(g)
    assert value == brute_min_cut(g)
    assert cut_weight(g, side) == value


def test_worked_example_values():
    for n in (5, 6, 10):
        f1 = connectivity_table(generate("figure1", n=n))
        assert f1.k[0] == n - 1
        assert f1.strength[0] == 2
        assert abs(f1.conductance[0] - n / 2) <= 1e-8
        f2 = connectivity_table(generate("figure2", n=n))
        assert f2.k[0] == n and f2.strength[0] == n
        assert abs(f2.conductance[0] - 2) <= 1e-8


def test_resistance_examples():
    g = Multigraph.from_edges(2, [(0, 1, 7)])
    assert effective_resistances(g).conductance[0] == pytest.approx(7, abs=1e-9)
    assert effective_resistance(generate("path", n=4), 0, 3) == pytest.approx(3, abs=1e-9)
    with pytest.raises(GraphError):
        effective_resistances(Multigraph.from_edges(3, [(0, 1, 1)]))


@given(multigraphs(min_n=2, max_n=9, max_w=5, connected=True))
def test_resistance_matches_networkx(g):
    r = effective_resistances(g).resistance
    for e in g.edges:
        assert r[e.id] == pytest.approx(nx_resistance(g, e.a, e.b), rel=1e-9, abs=1e-9)


@given(multigraphs(min_n=2, max_n=12, max_w=6, connected=True))
def test_foster_identity(g):
    r = effective_resistances(g).resistance
    assert abs(sum(e.weight * r[e.id] for e in g.edges) - (g.n - 1)) <= 1e-8


def test_strength_examples():
    assert edge_strength_exact(generate("figure1", n=6)).strength[0] == 2
    assert edge_strength_exact(generate("figure2", n=5)).strength[0] == 5
    assert set(edge_strength_exact(generate("complete", n=4)).strength.values()) == {3}
    with pytest.raises(GraphError):
        edge_strength_exact(generate("path", n=70))


@given(multigraphs(min_n=2, max_n=7, max_w=4, connected=True))
def test_strength_matches_bruteforce(g):
    assert edge_strength_exact(g).strength == brute_strength(g)


@given(multigraphs(min_n=2, max_n=12, max_w=4, connected=True))
def test_strength_sum_bound(g):
    assert strength_sum(g, edge_strength_exact(g).strength) <= g.n - 1


@given(multigraphs(min_n=2, max_n=10, max_w=5, connected=True))
def test_k_dominates_conductance_and_strength(g):
    t = connectivity_table(g)
    for e in g.edges:
        assert t.k[e.id] >= t.conductance[e.id] - 1e-6
        assert t.k[e.id] >= t.strength[e.id]


def test_ni_examples():
    star = Multigraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
    assert set(ni_labels(star).labels.values()) == {1}
    assert sorted(ni_labels(generate("cycle", n=4)).labels.values()) == [1, 1, 1, 2]


def test_ni_weight_bound():
    g = Multigraph.from_edges(2, [(0, 1, 100)])
    with pytest.raises(GraphError, match="conductance"):
        ni_labels(g, max_weight=50)


def _is_forest(n, pairs):
    G = nx.MultiGraph()
    G.add_nodes_from(range(n))
    G.add_edges_from(pairs)
    return nx.is_forest(G)


@given(multigraphs(min_n=2, max_n=9, max_w=4, connected=True))
def test_ni_labels_properties(g):
    ni = ni_labels(g)
    k = all_edge_connectivities(g).k
    for e in g.edges:
        assert 1 <= ni.labels[e.id] <= k[e.id]
        lo, hi = ni.forest_range(e.id)
        assert hi - lo + 1 == e.weight
    for _, ids in ni.forests().items():
        assert _is_forest(g.n, [(g.edge(i).a, g.edge(i).b) for i in ids])


@given(multigraphs(min_n=2, max_n=8, max_w=4), st.integers(1, 4))
def test_ni_certificate_preserves_small_cuts(g, k):
    h = ni_labels(g).certificate(g, k)
    for S in subsets(g.n):
        c = cut_weight(g, S)
        if c <= k:
            assert cut_weight(h, S) == c
        else:
            assert cut_weight(h, S) >= k


def _check_partition(g, k, part):
    kk = all_edge_connectivities(g).k if g.is_connected() else None
    rest = g.subgraph(e.id for e in g.edges if e.id not in part)
    r = len(rest.components())
    size = sum(g.edge(i).weight for i in part)
    assert size <= 2 * k * (r - 1)
    if kk is not None:
        for e in g.edges:
            if kk[e.id] <= k:
                assert e.id in part
    return r


def test_k_partition_examples():
    g = generate("path", n=5)
    assert k_partition(g, 1) == {0, 1, 2, 3}
    assert k_partition(generate("complete", n=4), 1) == set()
    d = generate("dumbbell", n=4)
    part = k_partition(d, 1)
    assert part == {12} and _check_partition(d, 1, part) == 2


@given(multigraphs(min_n=2, max_n=10, max_w=4, connected=True), st.integers(1, 8))
def test_k_partition_contract(g, k):
    _check_partition(g, k, k_partition(g, k))


def test_k_partition_random_100():
    for seed in range(100):
        n = 4 + seed % 12
        g = generate("random-gnp", seed=seed, n=n, p=0.45, wmax=3)
        if not g.is_connected():
            continue
        for k in (1, 2, 4):
            _check_partition(g, k, k_partition(g, k))


def test_connest_examples():
    assert set(connectivity_estimation(generate("path", n=4)).values.values()) == {1}
    assert set(connectivity_estimation(generate("complete", n=4)).values.values()) == {2}


@given(multigraphs(min_n=2, max_n=10, max_w=6, connected=True))
def test_connest_lower_bound(g):
    kappa = connectivity_estimation(g)
    k = all_edge_connectivities(g).k
    assert kappa.covers(g)
    assert all(kappa[e.id] <= k[e.id] for e in g.edges)


# largest sum_e u_e / kappa_e / n measured for connest over the 50-graph
# random corpus was 1.566; the frozen constant leaves a little headroom
CONNEST_C = 2.0


def test_connest_sum_linear_on_corpus(corpus):
    for g in corpus:
        kappa = connectivity_estimation(g)
        assert sum(e.weight / kappa[e.id] for e in g.edges) <= CONNEST_C * g.n


def test_kappa_assignment_validation():
    with pytest.raises(GraphError):
        KappaAssignment({0: 0.0})
    with pytest.raises(GraphError):
        KappaAssignment({0: 1.0}, "made-up")
    with pytest.raises(GraphError):
        estimate_kappa(generate("path", n=3), "magic")


def test_estimate_kappa_provenance():
    g = generate("figure1", n=5)
    tags = {m: estimate_kappa(g, m).provenance for m in ("connectivity", "conductance", "strength", "ni", "connest")}
    assert tags == {"connectivity": "exact-connectivity", "conductance": "conductance",
                    "strength": "exact-strength", "ni": "ni-label", "connest": "connest"}


def test_format_table_columns():
    g = generate("figure1", n=4)
    text = format_table(g, connectivity_table(g), estimate_kappa(g, "ni"))
    lines = text.splitlines()
    assert lines[0] == "edge_id a b u k strength resistance conductance kappa"
    assert len(lines) == g.m + 1
    assert lines[1].split()[:6] == ["0", "0", "1", "1", "3", "2"]
