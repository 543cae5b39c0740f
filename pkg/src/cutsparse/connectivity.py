"""Exact connectivity oracles and lower-bound estimators for k_e.

Oracles: s-t max-flow, Stoer-Wagner global minimum cut, exact edge strength
by min-cut recursion, and effective resistances from a dense Laplacian
solve.  Estimators: Nagamochi-Ibaraki forest labels, k-partitions and the
doubling ConnectivityEstimation recursion.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .graph import Edge, GraphError, InvariantError, Multigraph

_INT32_MAX = 2**31 - 1

PROVENANCES = ("exact-connectivity", "conductance", "exact-strength", "ni-label", "connest", "user")


@dataclass
class KappaAssignment:
    """Per-edge sampling parameter; every value must be positive and, unless
    user-supplied, a lower bound on the edge's connectivity."""

    values: dict[int, float]
    provenance: str = "user"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise GraphError(f"unknown kappa provenance {self.provenance!r}")
        for eid, v in self.values.items():
            if not v > 0:
                raise GraphError(f"kappa for edge {eid} must be positive, got {v}")

    def __getitem__(self, eid: int) -> float:
        return self.values[eid]

    def covers(self, g: Multigraph) -> bool:
        return all(e.id in self.values for e in g.edges)


@dataclass
class ConnectivityTable:
    """Per-edge connectivity quantities; fields not computed stay ``None``."""

    k: dict[int, int] | None = None
    strength: dict[int, int] | None = None
    resistance: dict[int, float] | None = None
    conductance: dict[int, float] | None = None

    def merged(self, other: "ConnectivityTable") -> "ConnectivityTable":
        return ConnectivityTable(
            k=other.k if other.k is not None else self.k,
            strength=other.strength if other.strength is not None else self.strength,
            resistance=other.resistance if other.resistance is not None else self.resistance,
            conductance=other.conductance if other.conductance is not None else self.conductance,
        )


@dataclass
class NILabels:
    """Nagamochi-Ibaraki forest labels.

    The ``weights[e]`` copies of edge ``e`` live in forests
    ``labels[e] - weights[e] + 1 .. labels[e]``.
    """

    labels: dict[int, int]
    weights: dict[int, int] = field(repr=False)

    def forest_range(self, eid: int) -> tuple[int, int]:
        r = self.labels[eid]
        return r - self.weights[eid] + 1, r

    def copies_in_first(self, eid: int, k: int) -> int:
        lo, hi = self.forest_range(eid)
        return max(0, min(hi, k) - lo + 1)

    def certificate(self, g: Multigraph, k: int) -> Multigraph:
        """The union H_k of the first ``k`` forests."""
        return g.with_weights({e.id: self.copies_in_first(e.id, k) for e in g.edges})

    def forests(self) -> dict[int, list[int]]:
        """Forest index -> ids of the edges with a copy in it."""
        out: dict[int, list[int]] = {}
        for eid in sorted(self.labels):
            lo, hi = self.forest_range(eid)
            for i in range(lo, hi + 1):
                out.setdefault(i, []).append(eid)
        return out


# --------------------------------------------------------------------------
# max-flow


def _flow_matrix(n: int, ends: np.ndarray, weights: np.ndarray) -> csr_matrix:
    rows = np.concatenate([ends[:, 0], ends[:, 1]])
    cols = np.concatenate([ends[:, 1], ends[:, 0]])
    caps = np.concatenate([weights, weights]).astype(np.int32)
    mat = csr_matrix((caps, (rows, cols)), shape=(n, n))
    mat.sum_duplicates()
    return mat


def _maxflow_scaling(n: int, ends, weights, s: int, t: int) -> int:
    """Capacity-scaling augmenting paths (BFS in a fixed order); used when
    capacities do not fit the int32 range of the scipy solver."""
    cap: list[dict[int, int]] = [dict() for _ in range(n)]
    for (a, b), w in zip(ends.tolist(), weights.tolist()):
        cap[a][b] = cap[a].get(b, 0) + w
        cap[b][a] = cap[b].get(a, 0) + w
    nbrs = [sorted(c) for c in cap]
    top = max((w for c in cap for w in c.values()), default=0)
    delta = 1 << max(0, int(top).bit_length() - 1)
    flow = 0
    while delta >= 1:
        while True:
            prev = [-1] * n
            prev[s] = s
            queue = deque([s])
            while queue and prev[t] < 0:
                x = queue.popleft()
                for y in nbrs[x]:
                    if prev[y] < 0 and cap[x][y] >= delta:
                        prev[y] = x
                        queue.append(y)
            if prev[t] < 0:
                break
            push = None
            y = t
            while y != s:
                x = prev[y]
                push = cap[x][y] if push is None else min(push, cap[x][y])
                y = x
            y = t
            while y != s:
                x = prev[y]
                cap[x][y] -= push
                cap[y][x] += push
                y = x
            flow += push
        delta //= 2
    return flow


class _FlowOracle:
    """Repeated s-t max-flow queries on one fixed graph."""

    def __init__(self, n: int, ends: np.ndarray, weights: np.ndarray):
        self.n = n
        self.ends = ends
        self.weights = weights
        big = weights.size and int(weights.sum()) > _INT32_MAX
        self.mat = None if (big or not weights.size) else _flow_matrix(n, ends, weights)

    def __call__(self, s: int, t: int) -> int:
        if not self.weights.size:
            return 0
        if self.mat is None:
            return _maxflow_scaling(self.n, self.ends, self.weights, s, t)
        return int(maximum_flow(self.mat, s, t, method="dinic").flow_value)


def local_edge_connectivity(g: Multigraph, s: int, t: int) -> int:
    """Minimum weight of a cut separating ``s`` from ``t`` (0 if disconnected)."""
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise GraphError("vertex out of range")
    if s == t:
        raise GraphError("s and t must differ")
    return _FlowOracle(g.n, g.ends, g.weights)(s, t)


def all_edge_connectivities(g: Multigraph) -> ConnectivityTable:
    if not g.is_connected():
        raise GraphError("graph is disconnected")
    oracle = _FlowOracle(g.n, g.ends, g.weights)
    cache: dict[tuple[int, int], int] = {}
    k = {}
    for e in g.edges:
        key = (min(e.a, e.b), max(e.a, e.b))
        if key not in cache:
            cache[key] = oracle(*key)
        k[e.id] = cache[key]
    return ConnectivityTable(k=k)


# --------------------------------------------------------------------------
# global minimum cut


def _dense(g) -> np.ndarray:
    W = np.zeros((g.n, g.n), dtype=np.float64)
    if g.m:
        np.add.at(W, (g.ends[:, 0], g.ends[:, 1]), g.weights)
        np.add.at(W, (g.ends[:, 1], g.ends[:, 0]), g.weights)
    return W


def _stoer_wagner(W: np.ndarray) -> tuple[float, list[int]]:
    n = len(W)
    W = W.copy()
    groups = [[i] for i in range(n)]
    active = list(range(n))
    best, best_side = math.inf, None
    while len(active) > 1:
        act = np.array(active)
        sub = W[np.ix_(act, act)]
        k = len(act)
        key = sub[0].copy()
        added = np.zeros(k, dtype=bool)
        added[0] = True
        key[0] = -np.inf
        prev, last, cut = 0, 0, 0.0
        for _ in range(k - 1):
            nxt = int(np.argmax(key))
            cut = key[nxt]
            prev, last = last, nxt
            added[nxt] = True
            key += sub[nxt]
            key[added] = -np.inf
        if cut < best:
            best, best_side = cut, list(groups[act[last]])
        p, q = act[prev], act[last]
        W[p] += W[q]
        W[:, p] += W[:, q]
        W[p, p] = 0.0
        groups[p].extend(groups[q])
        active.remove(q)
    return best, sorted(best_side)


def global_min_cut(g) -> tuple[int | float, frozenset[int]]:
    """Exact minimum-weight cut and one side of it.

    A disconnected graph yields value 0 and its first component.
    """
    if g.n < 2:
        raise GraphError("global minimum cut needs at least two vertices")
    comps = g.components()
    if len(comps) > 1:
        return 0, frozenset(comps[0])
    value, side = _stoer_wagner(_dense(g))
    if isinstance(g, Multigraph):
        value = int(round(value))
    return value, frozenset(side)


def _crossing_ids(g: Multigraph, side) -> list[int]:
    side = set(side)
    return [e.id for e in g.edges if (e.a in side) != (e.b in side)]


# --------------------------------------------------------------------------
# strength


def edge_strength_exact(g: Multigraph, max_n: int = 64) -> ConnectivityTable:
    """Exact strength k'_e for every edge.

    Splits each piece along a global minimum cut and recurses on the two
    induced sides.  An edge cut at some level gets the largest min-cut value
    seen on its path from the root: any induced subgraph containing it whose
    connectivity exceeds every such value would have stayed within one side.
    """
    if g.n > max_n:
        raise GraphError(f"exact strength limited to n <= {max_n} (got {g.n})")
    strength: dict[int, int] = {}
    stack: list[tuple[Multigraph, int]] = [(g, 0)]
    while stack:
        h, floor = stack.pop()
        if h.m == 0:
            continue
        comps = h.components()
        if len(comps) > 1:
            stack.extend((h.induced(c)[0], floor) for c in comps)
            continue
        lam, side = global_min_cut(h)
        level = max(lam, floor)
        for eid in _crossing_ids(h, side):
            strength[eid] = level
        other = [v for v in range(h.n) if v not in side]
        stack.append((h.induced(side)[0], level))
        stack.append((h.induced(other)[0], level))
    return ConnectivityTable(strength=strength)


def strength_sum(g: Multigraph, strength: dict[int, int]) -> Fraction:
    """Exact sum over all copies of 1/k'_e."""
    return sum((Fraction(e.weight, strength[e.id]) for e in g.edges), Fraction(0))


# --------------------------------------------------------------------------
# effective resistance


def laplacian(g) -> np.ndarray:
    W = _dense(g)
    return np.diag(W.sum(axis=1)) - W


def _resistance_kernel(g, max_n: int) -> np.ndarray:
    if g.n > max_n:
        raise GraphError(f"dense resistance solve limited to n <= {max_n} (got {g.n})")
    if not g.is_connected():
        raise GraphError("graph is disconnected")
    # (L + J/n)^{-1} differs from L^+ by J/n, which cancels in r_ab
    return np.linalg.inv(laplacian(g) + 1.0 / g.n)


def effective_resistance(g, s: int, t: int, max_n: int = 2000) -> float:
    M = _resistance_kernel(g, max_n)
    return float(M[s, s] + M[t, t] - 2 * M[s, t])


def effective_resistances(g, max_n: int = 2000) -> ConnectivityTable:
    """Effective resistance r_e and conductance c_e = 1/r_e of every edge,
    treating edge e as a resistor of conductance u_e."""
    M = _resistance_kernel(g, max_n)
    a, b = g.ends[:, 0], g.ends[:, 1]
    r = M[a, a] + M[b, b] - 2 * M[a, b]
    ids = g.ids.tolist()
    res = dict(zip(ids, r.tolist()))
    return ConnectivityTable(resistance=res, conductance={e: 1.0 / x for e, x in res.items()})


# --------------------------------------------------------------------------
# Nagamochi-Ibaraki labels


def ni_labels(g: Multigraph, max_weight: int | None = None) -> NILabels:
    """Forest labels from a maximum-adjacency scan.

    The next vertex scanned is the unscanned one with the largest attachment
    count, ties going to the smallest index.  Scanning x labels each edge to an
    unscanned y with the forests just above y's current count.
    """
    limit = g.n**6 if max_weight is None else max_weight
    for e in g.edges:
        if e.weight > limit:
            raise GraphError(
                f"edge {e.id} weight {e.weight} exceeds the NI bound {limit}; "
                "use the conductance or connest estimators for heavy weights"
            )
    adj: list[list[Edge]] = [[] for _ in range(g.n)]
    for e in g.edges:
        adj[e.a].append(e)
        adj[e.b].append(e)
    attach = [0] * g.n
    scanned = [False] * g.n
    heap = [(0, v) for v in range(g.n)]
    labels = {}
    while heap:
        neg, x = heapq.heappop(heap)
        if scanned[x] or -neg != attach[x]:
            continue
        scanned[x] = True
        for e in adj[x]:
            y = e.b if e.a == x else e.a
            if scanned[y]:
                continue
            attach[y] += e.weight
            labels[e.id] = attach[y]
            heapq.heappush(heap, (-attach[y], y))
    return NILabels(labels=labels, weights={e.id: e.weight for e in g.edges})


# --------------------------------------------------------------------------
# k-partition and ConnectivityEstimation


def k_partition(g: Multigraph, k: int) -> set[int]:
    """An edge set E' holding every edge with k_e <= k, with total weight at
    most k times the number of extra components of g - E'.

    Any piece with a cut of weight <= k loses that cut's edges and the sides are
    processed again; pieces whose minimum cut exceeds k are final.  Vertices of
    weighted degree <= k are peeled first, as a cheap such cut.
    """
    if k < 1:
        raise GraphError("k must be positive")
    removed: set[int] = set()
    stack = [g]
    while stack:
        h = stack.pop()
        if h.m == 0:
            continue
        comps = h.components()
        if len(comps) > 1:
            stack.extend(h.induced(c)[0] for c in comps if len(c) > 1)
            continue
        deg = h.degrees()
        low = np.flatnonzero(deg <= k)
        if low.size:
            side = {int(low[0])}
        else:
            lam, side = global_min_cut(h)
            if lam > k:
                continue
        cut = _crossing_ids(h, side)
        removed.update(cut)
        cut_set = set(cut)
        stack.append(h.subgraph(e.id for e in h.edges if e.id not in cut_set))
    return removed


def connectivity_estimation(g: Multigraph) -> KappaAssignment:
    """Doubling recursion: edges of Partition(H, 2k) get kappa = k, and every
    non-trivial component left over is processed with 2k."""
    if not g.is_connected():
        raise GraphError("graph is disconnected")
    kappa: dict[int, int] = {}
    if g.m == 0:
        return KappaAssignment({}, "connest")
    max_depth = 2 * math.log2(max(2, g.total_weight())) + 2
    stack: list[tuple[Multigraph, int, int]] = [(g, 1, 1)]
    while stack:
        h, k, depth = stack.pop()
        if depth > max_depth:
            raise InvariantError(f"connectivity estimation exceeded depth {max_depth:.1f}")
        part = k_partition(h, 2 * k)
        for eid in part:
            kappa[eid] = k
        rest = h.subgraph(e.id for e in h.edges if e.id not in part)
        for comp in rest.components():
            if len(comp) > 1:
                sub = rest.induced(comp)[0]
                if sub.m:
                    stack.append((sub, 2 * k, depth + 1))
    if len(kappa) != g.m:
        raise InvariantError("connectivity estimation left edges unlabelled")
    return KappaAssignment(kappa, "connest")


# --------------------------------------------------------------------------
# dispatch


def estimate_kappa(g: Multigraph, method: str) -> KappaAssignment:
    """kappa for one of: connectivity, conductance, strength, ni, connest."""
    if method == "connectivity":
        return KappaAssignment(dict(all_edge_connectivities(g).k), "exact-connectivity")
    if method == "conductance":
        return KappaAssignment(dict(effective_resistances(g).conductance), "conductance")
    if method == "strength":
        return KappaAssignment(dict(edge_strength_exact(g).strength), "exact-strength")
    if method == "ni":
        return KappaAssignment(dict(ni_labels(g).labels), "ni-label")
    if method == "connest":
        return connectivity_estimation(g)
    raise GraphError(f"unknown kappa method {method!r}")


def connectivity_table(g: Multigraph, strength_limit: int = 64) -> ConnectivityTable:
    """All oracle quantities for ``g``; strength is skipped above ``strength_limit``."""
    table = all_edge_connectivities(g).merged(effective_resistances(g))
    if g.n <= strength_limit:
        table = table.merged(edge_strength_exact(g, strength_limit))
    return table


TABLE_COLUMNS = ("edge_id", "a", "b", "u", "k", "strength", "resistance", "conductance", "kappa")


def format_table(g: Multigraph, table: ConnectivityTable, kappa: KappaAssignment | None = None) -> str:
    def cell(src, eid, fmt):
        if src is None or eid not in src:
            return "-"
        return fmt(src[eid])

    lines = [" ".join(TABLE_COLUMNS)]
    num = lambda x: f"{x:.12g}"
    for e in g.edges:
        lines.append(
            " ".join(
                [
                    str(e.id),
                    str(e.a),
                    str(e.b),
                    str(e.weight),
                    cell(table.k, e.id, str),
                    cell(table.strength, e.id, str),
                    cell(table.resistance, e.id, num),
                    cell(table.conductance, e.id, num),
                    cell(kappa.values if kappa else None, e.id, num),
                ]
            )
        )
    return "\n".join(lines) + "\n"
