"""Deterministic graph corpora used by the experiments and the test suite."""

from __future__ import annotations

import math

from .graph import Multigraph, generate


def connected_gnp(n: int, p: float, wmax: int = 1, seed: int = 0) -> Multigraph:
    """First connected G(n, p) draw, trying seeds seed, seed+1, ..."""
    for s in range(seed, seed + 1000):
        g = generate("random-gnp", seed=s, n=n, p=p, wmax=wmax)
        if g.is_connected():
            return g
    raise RuntimeError(f"no connected G({n}, {p}) within 1000 seeds")


def random_corpus(count: int = 50, max_n: int = 200, seed: int = 0) -> list[Multigraph]:
    """``count`` connected random multigraphs with sizes spread over
    [4, max_n]; edge density near 3 ln(n)/n, multiplicities up to 3."""
    out = []
    for i in range(count):
        n = 4 + (max_n - 4) * i // max(1, count - 1)
        p = min(1.0, 3 * math.log(n) / n)
        out.append(connected_gnp(n, p, wmax=3, seed=seed * 100_003 + 1000 * i))
    return out


def small_corpus() -> list[tuple[str, Multigraph]]:
    """Ten named graphs with n <= 14, small enough for exhaustive cut checks."""
    return [
        ("figure1(10)", generate("figure1", n=10)),
        ("figure3(4)", generate("figure3", k=4)),
        ("dumbbell(4)", generate("dumbbell", n=4)),
        ("figure2(6)", generate("figure2", n=6)),
        ("cycle(8)", generate("cycle", n=8)),
        ("complete(6)", generate("complete", n=6)),
        ("tree-lower-bound(3,2)", generate("tree-lower-bound", n=3, k=2)),
        ("gnp(10,0.5,2)", connected_gnp(10, 0.5, wmax=2, seed=1)),
        ("gnp(12,0.4,3)", connected_gnp(12, 0.4, wmax=3, seed=2)),
        ("gnp(14,0.3,1)", connected_gnp(14, 0.3, wmax=1, seed=3)),
    ]
