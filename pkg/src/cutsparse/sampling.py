"""Sparsification by independent edge sampling, by random spanning trees,
and the three-stage chained pipeline."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import networkx as nx
import numpy as np

from .connectivity import (
    KappaAssignment,
    connectivity_estimation,
    edge_strength_exact,
    effective_resistances,
    ni_labels,
)
from .graph import Edge, GraphError, Multigraph, Sparsifier
from .rng import substream

log = logging.getLogger(__name__)

DEFAULT_D = 2.0
PIPELINE_PRECISION = 2**20


@dataclass(frozen=True)
class SamplingConfig:
    """Sampling parameters.

    The number of rounds is ``rho_override`` when set, otherwise
    ``ceil(d_constant * log2(n)**2 / epsilon**2)``.  ``stream`` selects the
    random substream derived from ``seed``.
    """

    epsilon: float = 0.5
    d_constant: float = DEFAULT_D
    rho_override: int | None = None
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise GraphError("epsilon must lie in (0, 1]")
        if not self.d_constant > 0:
            raise GraphError("d_constant must be positive")
        if self.rho_override is not None and self.rho_override < 1:
            raise GraphError("rho_override must be a positive integer")

    def rho(self, n: int) -> int:
        if self.rho_override is not None:
            return int(self.rho_override)
        lg = math.log2(n) if n > 1 else 0.0
        return max(1, math.ceil(self.d_constant * lg * lg / self.epsilon**2))

    def check(self, n: int) -> None:
        if self.epsilon < 1.0 / n:
            raise GraphError(
                f"epsilon {self.epsilon} < 1/n = {1.0 / n:.6g}; for such epsilon the graph is "
                "already its own sparsifier (the guarantee assumes epsilon >= 1/n)"
            )

    def rng(self, *extra) -> np.random.Generator:
        return substream(self.seed, (self.stream, *extra))


# --------------------------------------------------------------------------
# independent sampling


def _kappa_array(g: Multigraph, kappa: KappaAssignment) -> np.ndarray:
    try:
        vals = np.array([kappa.values[e.id] for e in g.edges], dtype=np.float64)
    except KeyError as exc:
        raise GraphError(f"kappa missing for edge {exc.args[0]}") from None
    if np.any(~(vals > 0)):
        raise GraphError("kappa must be positive for every edge")
    return vals


def sparsify(g: Multigraph, kappa: KappaAssignment, cfg: SamplingConfig, rng=None) -> Sparsifier:
    """Sample every copy of every edge in each of rho rounds with
    probability p_e = min(1, 1/kappa_e), giving each sampled copy weight
    1/(rho p_e).

    The per-edge count over all rounds is one Binomial(rho u_e, p_e) draw.
    """
    cfg.check(g.n)
    kap = _kappa_array(g, kappa)
    rho = cfg.rho(g.n)
    if rng is None:
        rng = cfg.rng()
    scale = np.maximum(kap, 1.0)
    p = 1.0 / scale
    counts = rng.binomial(g.weights * rho, p) if g.m else np.zeros(0, dtype=np.int64)
    w = counts * scale / rho
    meta = {
        "method": kappa.provenance,
        "epsilon": cfg.epsilon,
        "rho": rho,
        "seed": cfg.seed,
        "expected_size_bound": expected_size_bound(g, kappa, cfg),
    }
    return Sparsifier.from_weights(g, dict(zip(g.ids.tolist(), w.tolist())), meta)


def expected_size_bound(g: Multigraph, kappa: KappaAssignment, cfg: SamplingConfig) -> float:
    """rho * sum_e u_e / kappa_e."""
    if not g.m:
        return 0.0
    return float(cfg.rho(g.n) * np.sum(g.weights / _kappa_array(g, kappa)))


# --------------------------------------------------------------------------
# weighted uniform spanning trees


class _Block:
    """CSR random-walk tables for one biconnected block."""

    def __init__(self, vertices: list[int], edges: list[Edge]):
        self.vertices = vertices
        local = {v: i for i, v in enumerate(vertices)}
        r = len(vertices)
        rows: list[list[tuple[int, int, int]]] = [[] for _ in range(r)]
        for e in edges:
            a, b = local[e.a], local[e.b]
            rows[a].append((b, e.id, e.weight))
            rows[b].append((a, e.id, e.weight))
        self.r = r
        self.indptr = np.zeros(r + 1, dtype=np.int64)
        nbr, eid, hi = [], [], []
        for v, row in enumerate(rows):
            w = np.array([x[2] for x in row], dtype=np.float64)
            cum = v + np.cumsum(w) / w.sum()
            cum[-1] = v + 1
            nbr += [x[0] for x in row]
            eid += [x[1] for x in row]
            hi += cum.tolist()
            self.indptr[v + 1] = self.indptr[v] + len(row)
        self.nbr = np.array(nbr, dtype=np.int64)
        self.eid = np.array(eid, dtype=np.int64)
        self.hi = np.array(hi, dtype=np.float64)

    def wilson(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent trees at once; returns (count, r-1) edge ids.

        Loop-erased walks rooted at local vertex 0, started from vertices in
        ascending order; the successor pointers left behind are the tree.
        """
        r = self.r
        in_tree = np.zeros((count, r), dtype=bool)
        in_tree[:, 0] = True
        succ = np.zeros((count, r), dtype=np.int64)
        succ_edge = np.full((count, r), -1, dtype=np.int64)
        last_slot = self.indptr[1:] - 1
        for start in range(1, r):
            rows = np.flatnonzero(~in_tree[:, start])
            cur = np.full(rows.size, start, dtype=np.int64)
            while rows.size:
                j = np.searchsorted(self.hi, cur + rng.random(rows.size), side="right")
                j = np.minimum(j, last_slot[cur])
                nxt = self.nbr[j]
                succ[rows, cur] = nxt
                succ_edge[rows, cur] = self.eid[j]
                keep = ~in_tree[rows, nxt]
                rows, cur = rows[keep], nxt[keep]
            rows = np.flatnonzero(~in_tree[:, start])
            cur = np.full(rows.size, start, dtype=np.int64)
            while rows.size:
                in_tree[rows, cur] = True
                cur = succ[rows, cur]
                keep = ~in_tree[rows, cur]
                rows, cur = rows[keep], cur[keep]
        return succ_edge[:, 1:]


class TreeSampler:
    """Draws spanning trees with probability proportional to the product of
    edge multiplicities.

    A spanning tree is a union of independent spanning trees of the
    biconnected blocks, so each block runs Wilson's algorithm on its own;
    this keeps walks short on long chains of blocks.
    """

    def __init__(self, g: Multigraph):
        if not g.is_connected():
            raise GraphError("graph is disconnected")
        self.g = g
        simple = nx.Graph()
        simple.add_nodes_from(range(g.n))
        by_pair: dict[tuple[int, int], list[Edge]] = {}
        for e in g.edges:
            key = (min(e.a, e.b), max(e.a, e.b))
            by_pair.setdefault(key, []).append(e)
            simple.add_edge(*key)
        self.blocks = []
        for comp in nx.biconnected_component_edges(simple):
            pairs = sorted((min(a, b), max(a, b)) for a, b in comp)
            verts = sorted({v for p in pairs for v in p})
            self.blocks.append(_Block(verts, [e for p in pairs for e in by_pair[p]]))
        self.blocks.sort(key=lambda b: b.vertices)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """(count, n-1) array of tree edge ids."""
        if self.g.n == 1:
            return np.zeros((count, 0), dtype=np.int64)
        return np.concatenate([b.wilson(count, rng) for b in self.blocks], axis=1)


def sample_spanning_trees(g: Multigraph, count: int, rng: np.random.Generator) -> np.ndarray:
    return TreeSampler(g).sample(count, rng)


def uniform_spanning_tree(g: Multigraph, rng: np.random.Generator) -> frozenset[int]:
    return frozenset(sample_spanning_trees(g, 1, rng)[0].tolist())


def is_spanning_tree(g: Multigraph, edge_ids) -> bool:
    ids = list(edge_ids)
    if len(ids) != g.n - 1 or len(set(ids)) != len(ids):
        return False
    return g.subgraph(ids).is_connected()


def tree_edge_counts(g: Multigraph, trees: np.ndarray) -> np.ndarray:
    """How often each edge of ``g`` (in ``g.edges`` order) occurs in ``trees``."""
    if not trees.size:
        return np.zeros(g.m, dtype=np.int64)
    lookup = np.full(int(g.ids.max()) + 1, -1, dtype=np.int64)
    lookup[g.ids] = np.arange(g.m)
    return np.bincount(lookup[trees.ravel()], minlength=g.m)


def sparsify_by_trees(g: Multigraph, cfg: SamplingConfig, conductance: dict[int, float] | None = None,
                      rng=None) -> Sparsifier:
    """Sum of rho weighted uniform spanning trees, each tree edge contributing
    c_e / rho."""
    cfg.check(g.n)
    sampler = TreeSampler(g)
    if conductance is None:
        conductance = effective_resistances(g).conductance
    rho = cfg.rho(g.n)
    if rng is None:
        rng = cfg.rng()
    trees = sampler.sample(rho, rng)
    counts = tree_edge_counts(g, trees)
    c = np.array([conductance[e.id] for e in g.edges])
    w = counts * c / rho
    meta = {
        "method": "trees",
        "epsilon": cfg.epsilon,
        "rho": rho,
        "seed": cfg.seed,
        "expected_size_bound": float(rho * (g.n - 1)),
    }
    return Sparsifier.from_weights(g, dict(zip(g.ids.tolist(), w.tolist())), meta)


# --------------------------------------------------------------------------
# chained pipeline


def _rounded(sp: Sparsifier, factor: float) -> Multigraph:
    return Multigraph(
        sp.n, [Edge(e.id, e.a, e.b, max(1, int(round(e.weight * factor)))) for e in sp.edges]
    )


def _connest_all(g: Multigraph) -> KappaAssignment:
    kappa: dict[int, float] = {}
    for comp in g.components():
        if len(comp) > 1:
            kappa.update(connectivity_estimation(g.induced(comp)[0]).values)
    return KappaAssignment(kappa, "connest")


def sparsify_pipeline(g: Multigraph, cfg: SamplingConfig, precision: int = PIPELINE_PRECISION,
                      strength_limit: int = 64) -> Sparsifier:
    """Three chained sparsifications, each run at epsilon/4: NI labels, then
    ConnectivityEstimation on the stage-1 output, then exact strengths on the
    stage-2 output.  Real intermediate weights are multiplied by ``precision``
    and rounded to integers before the next estimate."""
    if cfg.epsilon < 4.0 / g.n:
        raise GraphError(f"pipeline needs epsilon >= 4/n = {4.0 / g.n:.6g}")
    stage_cfg = replace(cfg, epsilon=cfg.epsilon / 4)
    stages = []

    s1 = sparsify(g, KappaAssignment(ni_labels(g).labels, "ni-label"), stage_cfg, rng=cfg.rng(1))
    stages.append({"kappa": "ni-label", "epsilon": stage_cfg.epsilon, "rho": s1.meta["rho"], "edges": s1.m})

    g1 = _rounded(s1, precision)
    s2 = sparsify(g1, _connest_all(g1), stage_cfg, rng=cfg.rng(2))
    stages.append({"kappa": "connest", "epsilon": stage_cfg.epsilon, "rho": s2.meta["rho"], "edges": s2.m})
    out, units = s2, precision

    if g.n <= strength_limit:
        g2 = _rounded(s2, 1)
        k3 = KappaAssignment(edge_strength_exact(g2, strength_limit).strength, "exact-strength")
        s3 = sparsify(g2, k3, stage_cfg, rng=cfg.rng(3))
        stages.append({"kappa": "exact-strength", "epsilon": stage_cfg.epsilon, "rho": s3.meta["rho"], "edges": s3.m})
        out = s3
    else:
        log.warning("n=%d exceeds the strength oracle limit %d; stage 3 skipped", g.n, strength_limit)

    meta = {
        "method": "pipeline",
        "epsilon": cfg.epsilon,
        "rho": stages[-1]["rho"],
        "seed": cfg.seed,
        "expected_size_bound": None,
        "stages": stages,
        "precision": precision,
    }
    return Sparsifier(out.n, [e._replace(weight=e.weight / units) for e in out.edges], meta)
