"""Generalized random contraction: Contract (with admissible splitting-off
of white vertices) and ContractRW (contracting random walks between black
vertices).  Both return the black edges crossing a random cut of the
final small graph."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .connectivity import _FlowOracle
from .graph import Edge, GraphError, InvariantError, Multigraph
from .rng import chunks, py_substream

# working edges are mutable [id, a, b, multiplicity] lists


def duplicate_edges(g: Multigraph) -> Multigraph:
    """Double every multiplicity: all degrees become even and no edge is a
    bridge, which is what splitting-off needs."""
    return g.scaled(2)


def _black_vertices(edges, black) -> set[int]:
    out = set()
    for e in edges:
        if e[0] in black:
            out.add(e[1])
            out.add(e[2])
    return out


def _pair_connectivity(edges, size: int, pairs):
    if not edges:
        return [0] * len(pairs)
    ends = np.array([(e[1], e[2]) for e in edges], dtype=np.int64)
    weights = np.array([e[3] for e in edges], dtype=np.int64)
    oracle = _FlowOracle(size, ends, weights)
    return [oracle(s, t) for s, t in pairs]


def _apply_split(edges, i: int, j: int, v: int, new_id: int):
    """Copy of ``edges`` with one copy each of edges i and j (incident to v)
    replaced by an edge between their far endpoints."""
    out = [list(e) for e in edges]
    ei, ej = out[i], out[j]
    u = ei[2] if ei[1] == v else ei[1]
    w = ej[2] if ej[1] == v else ej[1]
    ei[3] -= 1
    ej[3] -= 1
    if u != w:
        out.append([new_id, u, w, 1])
    return [e for e in out if e[3] > 0]


def _split_candidates(edges, v: int):
    inc = [k for k, e in enumerate(edges) if e[1] == v or e[2] == v]
    far = {k: (edges[k][2] if edges[k][1] == v else edges[k][1]) for k in inc}
    inc.sort(key=lambda k: (far[k], edges[k][0]))
    distinct, same = [], []
    for x, i in enumerate(inc):
        if edges[i][3] >= 2:
            same.append((i, i))
        for j in inc[x + 1:]:
            (distinct if far[i] != far[j] else same).append((i, j))
    return distinct + same


def _isolate(edges, v: int, black, size: int, next_id: int):
    """Split off pairs at white vertex ``v`` until it has no edges, accepting a
    split only if no black-black connectivity drops."""
    bv = sorted(_black_vertices(edges, black))
    pairs = [(s, t) for x, s in enumerate(bv) for t in bv[x + 1:]]
    base = _pair_connectivity(edges, size, pairs)
    while any(e[1] == v or e[2] == v for e in edges):
        for i, j in _split_candidates(edges, v):
            trial = _apply_split(edges, i, j, v, next_id)
            if _pair_connectivity(trial, size, pairs) == base:
                edges = trial
                next_id += 1
                break
        else:
            raise InvariantError(f"no admissible split at vertex {v}; splitting-off preconditions violated")
    return edges, next_id


def _eliminate_white(edges, alive: set[int], black, size: int, next_id: int, cache=None):
    white = sorted(alive - _black_vertices(edges, black))
    if not white:
        return edges, alive, next_id
    key = None
    if cache is not None:
        key = (tuple(tuple(e) for e in edges), tuple(sorted(alive)), next_id)
        hit = cache.get(key)
        if hit is not None:
            e2, a2, n2 = hit
            return [list(e) for e in e2], set(a2), n2
    alive = set(alive)
    for v in white:
        edges, next_id = _isolate(edges, v, black, size, next_id)
        alive.discard(v)
    if key is not None:
        if len(cache) > 10000:
            cache.clear()
        cache[key] = (tuple(tuple(e) for e in edges), tuple(sorted(alive)), next_id)
    return edges, alive, next_id


def split_off_admissible(g: Multigraph, v: int, black) -> Multigraph:
    """Isolate white vertex ``v`` by admissible splitting-off and delete it.

    Vertices above ``v`` shift down by one; edge ids are kept and new edges
    take fresh ids.
    """
    black = frozenset(black)
    if not 0 <= v < g.n:
        raise GraphError("vertex out of range")
    if any(e.id in black and v in (e.a, e.b) for e in g.edges):
        raise GraphError(f"vertex {v} is black")
    edges = [list(e) for e in g.edges]
    edges, next_id = _isolate(edges, v, black, g.n, g.next_id)
    shift = lambda x: x - (x > v)
    return Multigraph(g.n - 1, [Edge(e[0], shift(e[1]), shift(e[2]), e[3]) for e in edges], next_id=next_id)


def _pick_edge(edges, rng):
    total = 0
    for e in edges:
        total += e[3]
    x = rng.random() * total
    for e in edges:
        x -= e[3]
        if x < 0:
            return e
    return edges[-1]


def _merge(edges, into: int, gone: set[int]):
    out = []
    for e in edges:
        a = into if e[1] in gone else e[1]
        b = into if e[2] in gone else e[2]
        if a != b:
            e[1] = a
            e[2] = b
            out.append(e)
    return out


def _finish(edges, alive, black, rng):
    verts = sorted(alive)
    r = len(verts)
    if r < 2:
        return ()
    mask = rng.randrange(1, (1 << r) - 1)
    side = {verts[i] for i in range(r) if mask >> i & 1}
    return tuple(sorted(e[0] for e in edges if e[0] in black and ((e[1] in side) != (e[2] in side))))


def contract_run(g: Multigraph, black, alpha: float, rng, on_step=None, cache=None) -> tuple[int, ...]:
    """One run of Contract on ``g`` (the caller duplicates edges first).

    Loop while more than ceil(2 alpha) vertices remain: isolate and delete
    every white vertex by admissible splitting-off, then (if still above the
    limit) contract an edge chosen with probability proportional to its
    multiplicity.  Returns the sorted black edge ids crossing a uniformly
    random non-empty proper vertex subset; ``()`` when none cross.

    ``rng`` is a :class:`random.Random`.  ``on_step(edges, alive)`` is called
    after every contraction with the working edge lists.
    """
    if alpha < 1:
        raise GraphError("alpha must be >= 1")
    black = frozenset(black)
    if not black:
        raise GraphError("black edge set is empty")
    limit = math.ceil(2 * alpha)
    edges = [list(e) for e in g.edges]
    alive = set(range(g.n))
    next_id = g.next_id
    while len(alive) > limit:
        edges, alive, next_id = _eliminate_white(edges, alive, black, g.n, next_id, cache)
        if len(alive) <= limit:
            break
        e = _pick_edge(edges, rng)
        keep, gone = min(e[1], e[2]), max(e[1], e[2])
        edges = _merge(edges, keep, {gone})
        alive.discard(gone)
        if on_step is not None:
            on_step(edges, alive)
    return _finish(edges, alive, black, rng)


def contract_rw_run(g: Multigraph, black, alpha: float, rng, on_step=None) -> tuple[int, ...]:
    """One run of ContractRW.

    While more than ceil(2 alpha) black vertices remain: start at a black
    vertex chosen proportionally to degree, walk (transitions proportional to
    multiplicity) until the walk first reaches a black vertex after at least
    one step, and, if it ended somewhere other than its start, contract every
    edge it traversed.
    """
    if alpha < 1:
        raise GraphError("alpha must be >= 1")
    black = frozenset(black)
    if not black:
        raise GraphError("black edge set is empty")
    limit = math.ceil(2 * alpha)
    cap = 10**6 * g.n
    edges = [list(e) for e in g.edges]
    alive = set(range(g.n))
    while True:
        bv = _black_vertices(edges, black)
        if len(bv) <= limit:
            break
        deg: dict[int, int] = {}
        for e in edges:
            deg[e[1]] = deg.get(e[1], 0) + e[3]
            deg[e[2]] = deg.get(e[2], 0) + e[3]
        order = sorted(bv)
        x = rng.random() * sum(deg[v] for v in order)
        start = order[-1]
        for v in order:
            x -= deg[v]
            if x < 0:
                start = v
                break
        here, visited, steps = start, {start}, 0
        while True:
            x = rng.random() * deg[here]
            step = None
            for e in edges:
                if e[1] == here or e[2] == here:
                    step = e
                    x -= e[3]
                    if x < 0:
                        break
            here = step[2] if step[1] == here else step[1]
            visited.add(here)
            steps += 1
            if here in bv:
                break
            if steps >= cap:
                raise InvariantError("random walk step cap reached")
        if here != start:
            keep = min(visited)
            edges = _merge(edges, keep, visited - {keep})
            alive -= visited - {keep}
            if on_step is not None:
                on_step(edges, alive)
    return _finish(edges, alive, black, rng)


# --------------------------------------------------------------------------
# frequency experiment


def _run_chunk(args):
    g, black, alpha, algo, seed, index, count = args
    rng = py_substream(seed, index)
    counts: Counter = Counter()
    cache: dict = {}
    if algo == "split":
        for _ in range(count):
            counts[contract_run(g, black, alpha, rng, cache=cache)] += 1
    else:
        for _ in range(count):
            counts[contract_rw_run(g, black, alpha, rng)] += 1
    return counts


def contract_frequencies(g: Multigraph, black, alpha: float, algo: str, trials: int, seed: int = 0,
                         jobs: int = 1) -> Counter:
    """Output counts of ``trials`` runs; ``split`` runs on the duplicated graph.

    Trials are grouped in fixed-size chunks, each with its own substream, so
    the counts do not depend on ``jobs``.
    """
    if algo not in ("split", "rw"):
        raise GraphError("algo must be 'split' or 'rw'")
    black = frozenset(black)
    work = duplicate_edges(g) if algo == "split" else g
    tasks = [(work, black, alpha, algo, seed, idx, hi - lo) for idx, lo, hi in chunks(trials)]
    total: Counter = Counter()
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_run_chunk, tasks):
                total.update(part)
    else:
        for t in tasks:
            total.update(_run_chunk(t))
    return total


def contract_experiment(g: Multigraph, black, alpha: float, algo: str, trials: int, seed: int = 0,
                        jobs: int = 1) -> dict:
    """Frequency of every target F (cut-induced with q(F) <= alpha K) against
    the n^(-2 alpha) bound, passing when each frequency is at least the bound
    minus three binomial standard errors."""
    from .verify import cut_induced_sets, min_black_connectivity

    black = frozenset(black)
    K = min_black_connectivity(g, black)
    targets = cut_induced_sets(g, black, alpha * K)
    counts = contract_frequencies(g, black, alpha, algo, trials, seed, jobs)
    bound = float(g.n) ** (-2 * alpha)
    sigma = math.sqrt(bound * (1 - bound) / trials)
    rows = []
    ok = True
    for F, q in sorted(targets.items()):
        c = counts.get(F, 0)
        freq = c / trials
        passed = freq >= bound - 3 * sigma
        ok &= passed
        rows.append({"F": list(F), "q": q, "count": c, "frequency": freq, "pass": passed})
    return {
        "experiment": "contract",
        "params": {"algo": algo, "alpha": alpha, "n": g.n, "K": K, "black": sorted(black)},
        "seed": seed,
        "trials": trials,
        "statistics": {
            "frequencies": {",".join(map(str, F)) if F else "": c for F, c in sorted(counts.items())},
            "targets": rows,
            "sigma": sigma,
        },
        "bound": bound,
        "pass": bool(ok),
    }
