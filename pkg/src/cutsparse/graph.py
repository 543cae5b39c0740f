"""Integer-weighted undirected multigraphs, sparsifiers, edge-list I/O and
the example graph families used throughout the package."""

from __future__ import annotations

import math
import random
from typing import Iterable, NamedTuple

import numpy as np


class GraphError(ValueError):
    """Domain error: invalid graph, parameter or precondition."""


class InvariantError(RuntimeError):
    """Internal invariant violated; indicates a bug rather than bad input."""


class ParseError(GraphError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message}, line {line}")
        self.line = line


class Edge(NamedTuple):
    id: int
    a: int
    b: int
    weight: int


class WeightedEdge(NamedTuple):
    id: int
    a: int
    b: int
    weight: float


class _EdgeArrays:
    """Shared numpy views over an edge list (endpoints, weights, ids)."""

    def _arrays(self):
        if getattr(self, "_ends", None) is None:
            edges = self.edges
            self._ends = np.array([(e.a, e.b) for e in edges], dtype=np.int64).reshape(-1, 2)
            dtype = np.int64 if isinstance(self, Multigraph) else np.float64
            self._weights = np.array([e.weight for e in edges], dtype=dtype)
            self._ids = np.array([e.id for e in edges], dtype=np.int64)
        return self._ends, self._weights, self._ids

    @property
    def ends(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def weights(self) -> np.ndarray:
        return self._arrays()[1]

    @property
    def ids(self) -> np.ndarray:
        return self._arrays()[2]

    def edge(self, eid: int):
        if getattr(self, "_index", None) is None:
            self._index = {e.id: e for e in self.edges}
        try:
            return self._index[eid]
        except KeyError:
            raise GraphError(f"unknown edge id {eid}") from None

    def has_edge(self, eid: int) -> bool:
        try:
            self.edge(eid)
        except GraphError:
            return False
        return True

    @property
    def m(self) -> int:
        return len(self.edges)

    def total_weight(self):
        return sum(e.weight for e in self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=self.weights.dtype)
        if self.m:
            np.add.at(deg, self.ends[:, 0], self.weights)
            np.add.at(deg, self.ends[:, 1], self.weights)
        return deg

    def components(self) -> list[list[int]]:
        """Connected components as sorted vertex lists, ordered by smallest vertex."""
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            ra, rb = find(e.a), find(e.b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        groups: dict[int, list[int]] = {}
        for v in range(self.n):
            groups.setdefault(find(v), []).append(v)
        return sorted(groups.values())

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.components()) == 1


class Multigraph(_EdgeArrays):
    """Undirected graph with positive integer edge multiplicities.

    Edge records keep a stable integer id.  Parallel records between the same
    pair are allowed (contraction produces them); :meth:`from_edges` merges
    duplicates instead.
    """

    def __init__(self, n: int, edges: Iterable[Edge], next_id: int | None = None):
        if n < 1:
            raise GraphError("vertex count must be positive")
        self.n = int(n)
        recs = []
        seen = set()
        for e in edges:
            e = Edge(int(e[0]), int(e[1]), int(e[2]), e[3])
            if not (0 <= e.a < n and 0 <= e.b < n):
                raise GraphError(f"edge {e.id}: vertex index out of range")
            if e.a == e.b:
                continue
            if isinstance(e.weight, float) and not e.weight.is_integer():
                raise GraphError(f"edge {e.id}: weight must be an integer")
            w = int(e.weight)
            if w < 1:
                raise GraphError(f"edge {e.id}: weight must be >= 1")
            if e.id in seen:
                raise GraphError(f"duplicate edge id {e.id}")
            seen.add(e.id)
            recs.append(Edge(e.id, e.a, e.b, w))
        self.edges: tuple[Edge, ...] = tuple(recs)
        top = max(seen) + 1 if seen else 0
        self.next_id = max(top, next_id or 0)

    @classmethod
    def from_edges(cls, n: int, triples: Iterable[tuple[int, int, int]]) -> "Multigraph":
        """Build a graph from ``(a, b, w)`` triples.

        Ids follow first appearance; repeated pairs add their weights to the
        first record and self-loops are dropped.
        """
        pos: dict[tuple[int, int], int] = {}
        rows: list[list[int]] = []
        for a, b, w in triples:
            if a == b:
                continue
            key = (min(a, b), max(a, b))
            if key in pos:
                rows[pos[key]][3] += w
            else:
                pos[key] = len(rows)
                rows.append([len(rows), a, b, w])
        return cls(n, [Edge(*r) for r in rows])

    def with_weights(self, weights: dict[int, int]) -> "Multigraph":
        return Multigraph(
            self.n,
            [e._replace(weight=weights[e.id]) for e in self.edges if weights.get(e.id, 0) > 0],
            next_id=self.next_id,
        )

    def subgraph(self, edge_ids: Iterable[int]) -> "Multigraph":
        keep = set(edge_ids)
        return Multigraph(self.n, [e for e in self.edges if e.id in keep], next_id=self.next_id)

    def induced(self, vertices: Iterable[int]) -> tuple["Multigraph", list[int]]:
        """Vertex-induced subgraph relabelled to 0..k-1; returns it with the
        list mapping new indices back to old ones."""
        verts = sorted(set(vertices))
        local = {v: i for i, v in enumerate(verts)}
        edges = [
            Edge(e.id, local[e.a], local[e.b], e.weight)
            for e in self.edges
            if e.a in local and e.b in local
        ]
        return Multigraph(len(verts), edges, next_id=self.next_id), verts

    def as_sparsifier(self) -> "Sparsifier":
        return Sparsifier(self.n, [WeightedEdge(e.id, e.a, e.b, float(e.weight)) for e in self.edges])

    def scaled(self, factor: int) -> "Multigraph":
        return Multigraph(self.n, [e._replace(weight=e.weight * factor) for e in self.edges], self.next_id)

    def __eq__(self, other):
        return isinstance(other, Multigraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Multigraph(n={self.n}, m={self.m}, total_weight={self.total_weight()})"


class Sparsifier(_EdgeArrays):
    """Real-weighted subgraph on the vertex set of a source graph.

    ``meta`` carries free-form provenance (method, rho, stages...) used by the
    JSON sidecar; it does not take part in equality.
    """

    def __init__(self, n: int, edges: Iterable[WeightedEdge], meta: dict | None = None):
        self.n = int(n)
        recs = []
        for e in edges:
            e = WeightedEdge(int(e[0]), int(e[1]), int(e[2]), float(e[3]))
            if not (0 <= e.a < n and 0 <= e.b < n) or e.a == e.b:
                raise GraphError(f"edge {e.id}: bad endpoints ({e.a}, {e.b})")
            if e.weight < 0 or not math.isfinite(e.weight):
                raise GraphError(f"edge {e.id}: weight must be non-negative")
            if e.weight > 0:
                recs.append(e)
        self.edges: tuple[WeightedEdge, ...] = tuple(recs)
        self.meta = dict(meta or {})

    @classmethod
    def from_weights(cls, g: Multigraph, weights: dict[int, float], meta: dict | None = None) -> "Sparsifier":
        return cls(
            g.n,
            [WeightedEdge(e.id, e.a, e.b, float(weights[e.id])) for e in g.edges if weights.get(e.id, 0) > 0],
            meta,
        )

    def check_against(self, g: Multigraph) -> None:
        if self.n != g.n:
            raise GraphError(f"vertex count mismatch: sparsifier {self.n}, graph {g.n}")
        for e in self.edges:
            src = g.edge(e.id)
            if {src.a, src.b} != {e.a, e.b}:
                raise GraphError(f"edge {e.id}: endpoints differ from source graph")

    def scaled(self, factor: float) -> "Sparsifier":
        return Sparsifier(self.n, [e._replace(weight=e.weight * factor) for e in self.edges], self.meta)

    def __eq__(self, other):
        return isinstance(other, Sparsifier) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Sparsifier(n={self.n}, m={self.m})"


# --------------------------------------------------------------------------
# edge-list format


def _number(tok: str, lineno: int, integral: bool):
    try:
        if integral:
            return int(tok)
        return float(tok)
    except ValueError:
        if integral:
            try:
                float(tok)
            except ValueError:
                pass
            else:
                raise ParseError("weight not integer", lineno) from None
        raise ParseError(f"malformed number {tok!r}", lineno) from None


def _records(text: str):
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _parse(text: str, integral: bool):
    rows = _records(text)
    try:
        lineno, head = next(rows)
    except StopIteration:
        raise ParseError("missing header", 1) from None
    if len(head) != 2:
        raise ParseError("header must be 'n m'", lineno)
    n = _number(head[0], lineno, True)
    m = _number(head[1], lineno, True)
    if n < 1 or m < 0:
        raise ParseError("header values out of range", lineno)
    triples = []
    for lineno, toks in rows:
        if len(toks) != 3:
            raise ParseError("expected 'a b w'", lineno)
        a = _number(toks[0], lineno, True)
        b = _number(toks[1], lineno, True)
        w = _number(toks[2], lineno, integral)
        if not (0 <= a < n and 0 <= b < n):
            raise ParseError("vertex index out of range", lineno)
        if integral and w < 1:
            raise ParseError("weight must be >= 1", lineno)
        if not integral and not (w > 0 and math.isfinite(w)):
            raise ParseError("weight must be positive", lineno)
        if a == b:
            raise ParseError("self-loop", lineno)
        triples.append((a, b, w))
    if len(triples) != m:
        raise ParseError(f"header declares {m} edges, found {len(triples)}", lineno)
    return n, triples


def parse_graph(text: str) -> Multigraph:
    """Parse an edge-list document with integer weights.

    >>> parse_graph("2 2\\n0 1 2\\n0 1 3").edges
    (Edge(id=0, a=0, b=1, weight=5),)
    """
    n, triples = _parse(text, integral=True)
    return Multigraph.from_edges(n, triples)


def parse_sparsifier(text: str) -> Sparsifier:
    """Parse an edge-list document with positive real weights; ids follow line order."""
    n, triples = _parse(text, integral=False)
    return Sparsifier(n, [WeightedEdge(i, a, b, w) for i, (a, b, w) in enumerate(triples)])


def align_sparsifier(g: Multigraph, sp: Sparsifier) -> Sparsifier:
    """Re-key a parsed sparsifier onto the edge ids of ``g`` by endpoints.

    The text format carries no ids, so a sparsifier read back from disk is
    numbered by line; this maps each line to the edge of ``g`` with the same
    endpoint pair, summing repeats.
    """
    if sp.n != g.n:
        raise GraphError(f"vertex count mismatch: graph {g.n}, sparsifier {sp.n}")
    by_pair: dict[tuple[int, int], Edge] = {}
    for e in g.edges:
        by_pair.setdefault((min(e.a, e.b), max(e.a, e.b)), e)
    acc: dict[int, float] = {}
    for e in sp.edges:
        src = by_pair.get((min(e.a, e.b), max(e.a, e.b)))
        if src is None:
            raise GraphError(f"sparsifier edge ({e.a}, {e.b}) is not an edge of the graph")
        acc[src.id] = acc.get(src.id, 0.0) + e.weight
    return Sparsifier.from_weights(g, acc, sp.meta)


def _fmt_weight(w) -> str:
    if isinstance(w, (int, np.integer)):
        return str(int(w))
    w = float(w)
    if w.is_integer() and abs(w) < 1e15:
        return str(int(w))
    return f"{w:.12g}"


def serialize_graph(g: Multigraph | Sparsifier) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{e.a} {e.b} {_fmt_weight(e.weight)}" for e in g.edges)
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# cuts


def _members(s, n: int) -> np.ndarray:
    """Boolean membership vector for a cut given as a set, iterable or bitmask."""
    side = np.zeros(n, dtype=bool)
    if isinstance(s, (int, np.integer)):
        s = int(s)
        if s < 0 or s >> n:
            raise GraphError("bitmask has bits outside the vertex range")
        side[:] = (s >> np.arange(n)) & 1
    else:
        idx = list(s)
        if any(not 0 <= v < n for v in idx):
            raise GraphError("cut member out of range")
        side[idx] = True
    return side


def cut_weight(g: Multigraph | Sparsifier, s) -> float:
    """Total weight of edges with exactly one endpoint in ``s``."""
    side = _members(s, g.n)
    k = int(side.sum())
    if k == 0 or k == g.n:
        raise GraphError("cut side must be a non-empty proper subset")
    if not g.m:
        return 0
    ends = g.ends
    crossing = side[ends[:, 0]] != side[ends[:, 1]]
    total = g.weights[crossing].sum()
    return int(total) if isinstance(g, Multigraph) else float(total)


# --------------------------------------------------------------------------
# generators

FAMILIES = (
    "path",
    "cycle",
    "complete",
    "random-gnp",
    "figure1",
    "figure2",
    "figure3",
    "tree-lower-bound",
    "dumbbell",
)


def _need(cond: bool, msg: str):
    if not cond:
        raise GraphError(msg)


def generate(family: str, seed: int = 0, **params) -> Multigraph:
    """Build a member of one of the example families.

    ``figure1(n)``: edge s-t (s=0, t=1) plus n-2 two-edge paths through fresh
    midpoints.  ``figure2(n)``: edge s-t plus an s..t path of n-1 edges each of
    weight n-1.  ``figure3(k)``: edge s-t of weight k plus k unit two-edge
    paths.  ``tree-lower-bound(n, k)``: light paths v_i-u_i-v_{i+1} beside a
    heavy edge v_i-v_{i+1} of multiplicity k; u_i is vertex i-1 and v_i is
    vertex n+i-1.  ``dumbbell(n)``: two K_n joined by one unit bridge.
    """
    if family == "path":
        n = params.get("n", 0)
        _need(n >= 1, "path requires n >= 1")
        return Multigraph.from_edges(n, [(i, i + 1, 1) for i in range(n - 1)])
    if family == "cycle":
        n = params.get("n", 0)
        _need(n >= 3, "cycle requires n >= 3")
        return Multigraph.from_edges(n, [(i, (i + 1) % n, 1) for i in range(n)])
    if family == "complete":
        n = params.get("n", 0)
        w = params.get("w", 1)
        _need(n >= 1 and w >= 1, "complete requires n >= 1 and w >= 1")
        return Multigraph.from_edges(n, [(i, j, w) for i in range(n) for j in range(i + 1, n)])
    if family == "random-gnp":
        n = params.get("n", 0)
        p = params.get("p", 0.5)
        wmax = params.get("wmax", 1)
        _need(n >= 1 and 0 <= p <= 1 and wmax >= 1, "random-gnp requires n >= 1, 0 <= p <= 1, wmax >= 1")
        rng = random.Random(seed)
        triples = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < p:
                    triples.append((i, j, rng.randint(1, wmax)))
        return Multigraph.from_edges(n, triples)
    if family == "figure1":
        n = params.get("n", 0)
        _need(n >= 3, "figure1 requires n >= 3")
        triples = [(0, 1, 1)]
        for mid in range(2, n):
            triples += [(0, mid, 1), (mid, 1, 1)]
        return Multigraph.from_edges(n, triples)
    if family == "figure2":
        n = params.get("n", 0)
        _need(n >= 3, "figure2 requires n >= 3")
        # path s=0 -> 2 -> 3 -> ... -> n-1 -> t=1
        chain = [0] + list(range(2, n)) + [1]
        triples = [(0, 1, 1)] + [(chain[i], chain[i + 1], n - 1) for i in range(n - 1)]
        return Multigraph.from_edges(n, triples)
    if family == "figure3":
        k = params.get("k", 0)
        _need(k >= 1, "figure3 requires k >= 1")
        triples = [(0, 1, k)]
        for j in range(k):
            triples += [(0, 2 + j, 1), (2 + j, 1, 1)]
        return Multigraph.from_edges(k + 2, triples)
    if family == "tree-lower-bound":
        n = params.get("n", 0)
        k = params.get("k", 0)
        _need(n >= 1 and k >= 1, "tree-lower-bound requires n >= 1 and k >= 1")
        triples = []
        for i in range(n):
            u, v, v_next = i, n + i, n + i + 1
            triples += [(v, v_next, k), (v, u, 1), (u, v_next, 1)]
        return Multigraph.from_edges(2 * n + 1, triples)
    if family == "dumbbell":
        n = params.get("n", 4)
        _need(n >= 2, "dumbbell requires n >= 2")
        triples = [(i, j, 1) for i in range(n) for j in range(i + 1, n)]
        triples += [(n + i, n + j, 1) for i in range(n) for j in range(i + 1, n)]
        triples.append((n - 1, n, 1))
        return Multigraph.from_edges(2 * n, triples)
    raise GraphError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")


def tree_lb_edges(n: int) -> tuple[list[int], list[int], list[int]]:
    """Edge ids of ``generate('tree-lower-bound', n=n, k=...)`` per position:
    heavy v_i-v_{i+1}, light v_i-u_i, light u_i-v_{i+1}."""
    return [3 * i for i in range(n)], [3 * i + 1 for i in range(n)], [3 * i + 2 for i in range(n)]


# --------------------------------------------------------------------------
# contraction


def contract_edge(g: Multigraph, eid: int) -> tuple[Multigraph, list[int]]:
    """Identify the endpoints of edge ``eid`` and drop the resulting loops.

    Parallel records survive with their own ids.  Returns the new graph and
    ``mapping`` with ``mapping[old_vertex] = new_vertex``.
    """
    e = g.edge(eid)
    keep, gone = min(e.a, e.b), max(e.a, e.b)
    mapping = []
    for v in range(g.n):
        if v == gone:
            mapping.append(keep if keep < gone else keep - 1)
        else:
            mapping.append(v if v < gone else v - 1)
    edges = [
        Edge(x.id, mapping[x.a], mapping[x.b], x.weight)
        for x in g.edges
        if mapping[x.a] != mapping[x.b]
    ]
    return Multigraph(g.n - 1, edges, next_id=g.next_id), mapping
