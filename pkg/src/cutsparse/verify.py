"""Brute-force cut verification, cut-induced set counting, bad-event
diagnostics and the analytic helper functions (g, g^-1, h, Chernoff forms,
the spanning-tree lower-bound probability)."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from .connectivity import all_edge_connectivities, effective_resistances, global_min_cut
from .graph import GraphError, Multigraph, Sparsifier, generate, tree_lb_edges
from .rng import chunks, substream
from .sampling import TreeSampler, tree_edge_counts

DEFAULT_MAX_ENUM = 24
_BLOCK = 1 << 15


def max_enum() -> int:
    return int(os.environ.get("CUTSPARSE_MAX_ENUM", DEFAULT_MAX_ENUM))


def _check_enum(n: int) -> None:
    cap = max_enum()
    if n > cap:
        raise GraphError(f"exhaustive cut enumeration capped at n <= {cap} (got {n}); use sampled verification")
    if n < 2:
        raise GraphError("cuts need at least two vertices")


def _mask_blocks(n: int):
    """Bitmasks 1 .. 2^(n-1)-1: every cut once, vertex n-1 never in S."""
    top = 1 << (n - 1)
    for lo in range(1, top, _BLOCK):
        yield np.arange(lo, min(top, lo + _BLOCK), dtype=np.int64)


def _sides(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def _crossing(g, sides: np.ndarray) -> np.ndarray:
    ends = g.ends
    return sides[:, ends[:, 0]] != sides[:, ends[:, 1]]


def all_cuts(g) -> tuple[np.ndarray, np.ndarray]:
    """(masks, weights) for all 2^(n-1)-1 cuts."""
    _check_enum(g.n)
    masks = np.arange(1, 1 << (g.n - 1), dtype=np.int64)
    if not g.m:
        return masks, np.zeros(masks.size)
    w = np.concatenate([_crossing(g, _sides(b, g.n)) @ g.weights for b in _mask_blocks(g.n)])
    return masks, w


def enumerate_cuts(g):
    """Yield ``(mask, weight)`` for every cut, with vertex n-1 outside S."""
    _check_enum(g.n)
    for block in _mask_blocks(g.n):
        w = _crossing(g, _sides(block, g.n)) @ g.weights if g.m else np.zeros(block.size)
        for mask, x in zip(block.tolist(), w.tolist()):
            yield mask, x


def mask_to_set(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


# --------------------------------------------------------------------------
# cut error


@dataclass
class ErrorReport:
    max_error: float
    argmax: list[int]
    cuts_inspected: int
    sampled: bool = False
    class_errors: dict[int, float] | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "max_error": self.max_error,
            "argmax": self.argmax,
            "cuts_inspected": self.cuts_inspected,
            "sampled": self.sampled,
        }
        if self.class_errors is not None:
            out["class_errors"] = {str(i): v for i, v in sorted(self.class_errors.items())}
        out.update(self.extra)
        return out


def _aligned_weights(g: Multigraph, sp: Sparsifier) -> np.ndarray:
    """Sparsifier weights laid out in ``g.edges`` order (0 where absent)."""
    sp.check_against(g)
    pos = {eid: i for i, eid in enumerate(g.ids.tolist())}
    w = np.zeros(g.m)
    for e in sp.edges:
        w[pos[e.id]] += e.weight
    return w


def _relative(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.abs(u - x) / u
    err[(u == 0) & (x == 0)] = 0.0
    return err


def cut_errors(g: Multigraph, sp: Sparsifier, sides: np.ndarray) -> np.ndarray:
    """Relative error |u(S) - w(S)| / u(S) for each row of a boolean side matrix."""
    w = _aligned_weights(g, sp)
    cross = _crossing(g, sides)
    return _relative(cross @ g.weights.astype(float), cross @ w)


def sampled_sides(g: Multigraph, samples: int = 10_000, seed: int = 0) -> np.ndarray:
    """Singletons, pairs, one side of a global minimum cut and ``samples``
    random non-empty proper subsets."""
    n = g.n
    rows = [np.eye(n, dtype=bool)]
    if n > 2:
        iu = np.triu_indices(n, 1)
        pairs = np.zeros((iu[0].size, n), dtype=bool)
        pairs[np.arange(iu[0].size), iu[0]] = True
        pairs[np.arange(iu[0].size), iu[1]] = True
        rows.append(pairs)
    _, side = global_min_cut(g)
    mc = np.zeros((1, n), dtype=bool)
    mc[0, sorted(side)] = True
    rows.append(mc)
    rng = substream(seed, 1)
    rnd = rng.random((samples, n)) < 0.5
    k = rnd.sum(axis=1)
    rnd = rnd[(k > 0) & (k < n)]
    rows.append(rnd)
    return np.concatenate(rows)


def max_cut_error(g: Multigraph, sp: Sparsifier, mode: str = "auto", samples: int = 10_000,
                  seed: int = 0) -> ErrorReport:
    """Largest relative cut error of ``sp`` against ``g``.

    ``exact`` enumerates every cut; ``sampled`` inspects the family from
    :func:`sampled_sides`; ``auto`` picks exact when n is within the
    enumeration cap.
    """
    if sp.n != g.n:
        raise GraphError(f"vertex count mismatch: graph {g.n}, sparsifier {sp.n}")
    if mode == "auto":
        mode = "exact" if g.n <= max_enum() else "sampled"
    if mode == "exact":
        _check_enum(g.n)
        w = _aligned_weights(g, sp)
        u = g.weights.astype(float)
        best, arg, count = -1.0, 0, 0
        for block in _mask_blocks(g.n):
            cross = _crossing(g, _sides(block, g.n))
            err = _relative(cross @ u, cross @ w)
            j = int(np.argmax(err))
            if err[j] > best:
                best, arg = float(err[j]), int(block[j])
            count += block.size
        return ErrorReport(best, mask_to_set(arg), count, sampled=False)
    if mode != "sampled":
        raise GraphError(f"unknown verification mode {mode!r}")
    sides = sampled_sides(g, samples, seed)
    err = cut_errors(g, sp, sides)
    j = int(np.argmax(err))
    return ErrorReport(float(err[j]), np.flatnonzero(sides[j]).tolist(), int(sides.shape[0]), sampled=True)


# --------------------------------------------------------------------------
# connectivity classes and cut-induced sets


def class_index(k: int) -> int:
    """i with 2^i <= k < 2^(i+1)."""
    return int(k).bit_length() - 1


@dataclass
class ConnectivityClasses:
    classes: dict[int, set[int]]
    fsmall_ok: bool | None = None


def _edge_k(g: Multigraph, k: dict[int, int] | None) -> dict[int, int]:
    return k if k is not None else all_edge_connectivities(g).k


def connectivity_classes(g: Multigraph, k: dict[int, int] | None = None) -> ConnectivityClasses:
    """Group edges by floor(log2 k_e).  At enumeration scale also confirms
    that every cut-induced subset F of class i has total weight below n^2 2^i."""
    k = _edge_k(g, k)
    classes: dict[int, set[int]] = {}
    for e in g.edges:
        classes.setdefault(class_index(k[e.id]), set()).add(e.id)
    fsmall = None
    if 2 <= g.n <= max_enum():
        fsmall = True
        for i, members in classes.items():
            col = np.array([e.id in members for e in g.edges])
            for block in _mask_blocks(g.n):
                cross = _crossing(g, _sides(block, g.n))
                if np.any(cross[:, col] @ g.weights[col] >= g.n**2 * 2**i):
                    fsmall = False
    return ConnectivityClasses(classes, fsmall)


def cut_induced_sets(g: Multigraph, b, threshold: float = math.inf) -> dict[tuple[int, ...], float]:
    """Every distinct non-empty ``delta(S) & b`` over cuts of weight <=
    ``threshold``, mapped to the least weight of a cut inducing it."""
    _check_enum(g.n)
    b = set(b)
    col = np.array([e.id in b for e in g.edges], dtype=bool)
    if not col.any():
        return {}
    bids = g.ids[col]
    found: dict[tuple[int, ...], float] = {}
    for block in _mask_blocks(g.n):
        cross = _crossing(g, _sides(block, g.n))
        w = cross @ g.weights
        sel = w <= threshold
        if not sel.any():
            continue
        rows = cross[sel][:, col]
        w = w[sel]
        nonempty = rows.any(axis=1)
        rows, w = rows[nonempty], w[nonempty]
        if not rows.size:
            continue
        uniq, inv = np.unique(np.packbits(rows, axis=1), axis=0, return_inverse=True)
        inv = inv.ravel()
        best = np.full(uniq.shape[0], np.inf)
        np.minimum.at(best, inv, w)
        first = np.zeros(uniq.shape[0], dtype=np.int64)
        first[inv[::-1]] = np.arange(inv.size)[::-1]
        for u_idx in range(uniq.shape[0]):
            key = tuple(sorted(bids[rows[first[u_idx]]].tolist()))
            val = best[u_idx].item()
            val = int(val) if float(val).is_integer() else val
            if key not in found or val < found[key]:
                found[key] = val
    return found


def min_black_connectivity(g: Multigraph, b, k: dict[int, int] | None = None) -> int:
    if not b:
        raise GraphError("black edge set is empty")
    k = _edge_k(g, k)
    return min(k[e] for e in b)


def count_cut_induced_sets(g: Multigraph, b, threshold: float, K: int | None = None,
                           k: dict[int, int] | None = None) -> int:
    """Number of distinct non-empty ``delta(S) & b`` with u(delta(S)) <= threshold.

    When ``K`` is given, every edge of ``b`` must have k_e >= K.
    """
    b = set(b)
    if not b:
        return 0
    if K is not None:
        k = _edge_k(g, k)
        for eid in sorted(b):
            if k[eid] < K:
                raise GraphError(f"edge {eid} has k_e = {k[eid]} < K = {K}")
    return len(cut_induced_sets(g, b, threshold))


def q_value(g: Multigraph, restriction, f) -> int:
    """Least weight of a cut S with delta(S) & restriction == f."""
    _check_enum(g.n)
    restriction = set(restriction)
    f = set(f)
    if not f <= restriction:
        raise GraphError("f must be a subset of the restriction set")
    col = np.array([e.id in restriction for e in g.edges], dtype=bool)
    want = np.array([e.id in f for e in g.edges], dtype=bool)[col]
    best = math.inf
    for block in _mask_blocks(g.n):
        cross = _crossing(g, _sides(block, g.n))
        hit = np.all(cross[:, col] == want, axis=1)
        if hit.any():
            best = min(best, int((cross[hit] @ g.weights).min()))
    if best == math.inf:
        raise GraphError("f is not induced by any cut")
    return best


# --------------------------------------------------------------------------
# analytic functions


def g_fn(x: float) -> float:
    """(1+x) ln(1+x) - x."""
    if x < 0:
        raise GraphError("g is used on x >= 0 only")
    return (1.0 + x) * math.log1p(x) - x


def g_inv(x: float, tol: float = 1e-12) -> float:
    """Inverse of :func:`g` on [0, inf) by safeguarded Newton iteration;
    stops when |g(y) - x| <= tol * x (or the bracket collapses to an ulp)."""
    if x < 0:
        raise GraphError("g_inv is defined for x >= 0")
    if x == 0:
        return 0.0
    lo, hi = 0.0, max(1.0, math.sqrt(2 * x))
    while g_fn(hi) < x:
        lo, hi = hi, 2 * hi
    y = min(math.sqrt(2 * x), hi)
    slack = tol * x
    for _ in range(200):
        gy = g_fn(y) - x
        if abs(gy) <= slack:
            return y
        if gy > 0:
            hi = y
        else:
            lo = y
        d = math.log1p(y)
        step = y - gy / d if d > 0 else None
        y = step if step is not None and lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 4 * math.ulp(hi):
            break
    return y


def h_fn(x: float) -> float:
    """2x / ln(1 + sqrt(x)), extended by h(0) = 0."""
    if x < 0:
        raise GraphError("h is used on x >= 0 only")
    if x == 0:
        return 0.0
    return 2 * x / math.log1p(math.sqrt(x))


def chernoff_bounds(mu: float, delta: float, u_max: float) -> tuple[float, float]:
    """Tail bounds for a weighted sum of independent [0,1] variables with
    weights in [0, u_max] and mean ``mu``: the two-sided form for
    Pr[|X-mu| >= delta mu] and the g-form for Pr[X - mu >= delta mu]."""
    if not (mu > 0 and delta > 0 and u_max > 0):
        raise GraphError("mu, delta and u_max must be positive")
    two_sided = 2 * math.exp(-delta * delta * mu / (2 * (1 + delta / 3) * u_max))
    upper_g = math.exp(-g_fn(delta) * mu / u_max)
    return two_sided, upper_g


# --------------------------------------------------------------------------
# bad events


@dataclass
class BadEventFlags:
    size: int
    q: int
    alpha: float
    x: float
    A: bool
    B: bool
    C: bool


def bad_event_flags(g: Multigraph, sp: Sparsifier, f, class_i: int, epsilon: float,
                    k: dict[int, int] | None = None) -> BadEventFlags:
    """Evaluate the three deviation events for the cut-induced set ``f`` of
    class ``class_i`` under sampled weights ``sp``."""
    if g.n < 2:
        raise GraphError("events need ln n > 0 (n >= 2)")
    k = _edge_k(g, k)
    members = {e.id for e in g.edges if class_index(k[e.id]) == class_i}
    f = set(f)
    if not f or not f <= members:
        raise GraphError(f"f must be a non-empty subset of class {class_i}")
    size = sum(g.edge(e).weight for e in f)
    q = q_value(g, members, f)
    ws = {e.id: e.weight for e in sp.edges}
    x = sum(ws.get(e, 0.0) for e in f)
    ln = math.log(g.n)
    dev = x - size
    return BadEventFlags(
        size=size,
        q=q,
        alpha=q / 2**class_i,
        x=x,
        A=abs(dev) > epsilon * size,
        B=abs(dev) > epsilon * q / ln,
        C=dev > g_inv(epsilon**2 * q / (size * ln)) * size,
    )


def bad_event_experiment(g: Multigraph, sampler, rho: int, epsilon: float, seeds,
                         k: dict[int, int] | None = None) -> list[dict]:
    """Empirical frequency of event A_F for every cut-induced F with
    q(F) <= |F| ln n, next to 2 n^(-d alpha(F) eps^2 / 6) with
    d = rho / ln(n)^2.  ``sampler(seed)`` returns a Sparsifier."""
    k = _edge_k(g, k)
    ln = math.log(g.n)
    d = rho / ln**2
    per_class: dict[int, set[int]] = {}
    for e in g.edges:
        per_class.setdefault(class_index(k[e.id]), set()).add(e.id)
    targets = []
    for i, members in sorted(per_class.items()):
        for F, q in cut_induced_sets(g, members).items():
            size = sum(g.edge(e).weight for e in F)
            if q <= size * ln:
                targets.append((i, F, size, q))
    hits = [0] * len(targets)
    seeds = list(seeds)
    for s in seeds:
        ws = {e.id: e.weight for e in sampler(s).edges}
        for j, (i, F, size, q) in enumerate(targets):
            x = sum(ws.get(e, 0.0) for e in F)
            if abs(x - size) > epsilon * size:
                hits[j] += 1
    out = []
    for (i, F, size, q), h in zip(targets, hits):
        alpha = q / 2**i
        out.append({"class": i, "F": list(F), "size": size, "q": q, "alpha": alpha,
                    "frequency": h / len(seeds), "bound": 2 * g.n ** (-d * alpha * epsilon**2 / 6)})
    return out


def cut_class_error_decomposition(g: Multigraph, sp: Sparsifier, k: dict[int, int] | None = None,
                                  epsilon: float | None = None, d_values=(0, 1, 2, 3)) -> ErrorReport:
    """Split the error of the worst cut C over connectivity classes,
    X_{C_i} - |C_i| for C_i = C & E_i, and check on every cut that
    sum_{i <= lg|C| - 2 lg n - d} |C & E_i| < 2^(1-d) |C|."""
    k = _edge_k(g, k)
    report = max_cut_error(g, sp, mode="exact")
    idx = np.array([class_index(k[e.id]) for e in g.edges])
    w = _aligned_weights(g, sp)
    side = np.zeros((1, g.n), dtype=bool)
    side[0, report.argmax] = True
    cross = _crossing(g, side)[0]
    classes = sorted(set(idx.tolist()))
    class_errors = {i: float(((w - g.weights) * (cross & (idx == i))).sum()) for i in classes}
    lg_n = math.log2(g.n)
    concentrate = True
    for block in _mask_blocks(g.n):
        cr = _crossing(g, _sides(block, g.n))
        size = cr @ g.weights
        per = np.stack([cr[:, idx == i] @ g.weights[idx == i] for i in classes], axis=1)
        ok = size > 0
        lg_c = np.log2(np.where(ok, size, 1))
        for dv in d_values:
            low = np.array(classes)[None, :] <= (lg_c - 2 * lg_n - dv)[:, None]
            lhs = (per * low).sum(axis=1)
            if np.any(ok & ~(lhs < 2.0 ** (1 - dv) * size)):
                concentrate = False
    size_c = float(g.weights[cross].sum())
    extra = {"concentrate_ok": concentrate, "cut_weight": size_c}
    if epsilon is not None and size_c > 0:
        extra["threshold_t"] = math.log2(size_c) - 4 * lg_n - math.log2(1 / epsilon)
    report.class_errors = class_errors
    report.extra.update(extra)
    return report


# --------------------------------------------------------------------------
# spanning-tree lower bound


def tree_lb_probability(n: int, k: int, rho: float) -> float:
    """1 - (1 - (2k+1)^-rho)^n: chance that some position is light in all
    rho trees."""
    if n < 1 or k < 1 or rho < 1:
        raise GraphError("need n >= 1, k >= 1, rho >= 1")
    q = (2 * k + 1) ** (-rho)
    return -math.expm1(n * math.log1p(-q))


def tree_lb_experiment(n: int, k: int, rho: int, trials: int, seed: int = 0) -> dict:
    """Sample ``trials`` tree sparsifiers (rho trees each) of the lower-bound
    graph; report how often some position is light in every tree, and the
    sparsifier weight of the cut {v_1, u_1, ..., v_i} at such positions."""
    if not (1 <= n <= 200 and 1 <= trials <= 10**6 and k >= 1 and rho >= 1):
        raise GraphError("need 1 <= n <= 200, 1 <= trials <= 1e6, k >= 1, rho >= 1")
    g = generate("tree-lower-bound", n=n, k=k)
    cond = effective_resistances(g).conductance
    c = np.array([cond[e.id] for e in g.edges])
    sampler = TreeSampler(g)
    heavy, light_vu, _ = tree_lb_edges(n)
    pos = {eid: i for i, eid in enumerate(g.ids.tolist())}
    heavy_col = np.array([pos[h] for h in heavy])
    # S_i = {v_1..v_i, u_1..u_{i-1}}: crossed by heavy_i and v_i-u_i only
    cross = np.zeros((g.m, n))
    for i in range(n):
        cross[pos[heavy[i]], i] = 1
        cross[pos[light_vu[i]], i] = 1
    true_cut = g.weights.astype(float) @ cross
    expect = (2 * k + 1) / (k + 1)
    flagged = 0
    witnessed_min, witnessed_max = math.inf, -math.inf
    exact = True
    for idx, lo, hi in chunks(trials):
        cnt = hi - lo
        trees = sampler.sample(cnt * rho, substream(seed, idx)).reshape(cnt, -1)
        lookup = np.full(int(g.ids.max()) + 1, -1, dtype=np.int64)
        lookup[g.ids] = np.arange(g.m)
        flat = lookup[trees] + g.m * np.arange(cnt)[:, None]
        counts = np.bincount(flat.ravel(), minlength=cnt * g.m).reshape(cnt, g.m)
        light_all = counts[:, heavy_col] == 0
        hit = light_all.any(axis=1)
        flagged += int(hit.sum())
        if hit.any():
            cuts = (counts * c / rho) @ cross
            vals = cuts[light_all]
            witnessed_min = min(witnessed_min, float(vals.min()))
            witnessed_max = max(witnessed_max, float(vals.max()))
            exact &= bool(np.all(np.abs(vals - expect) <= 1e-9 * expect))
    p = tree_lb_probability(n, k, rho)
    emp = flagged / trials
    sigma = math.sqrt(p * (1 - p) / trials)
    within = abs(emp - p) <= 3 * sigma
    true_val = float(true_cut[0])
    return {
        "experiment": "treelb",
        "params": {"n": n, "k": k, "rho": rho},
        "seed": seed,
        "trials": trials,
        "statistics": {
            "empirical_p": emp,
            "analytic_p": p,
            "sigma": sigma,
            "flagged_trials": flagged,
            "witnessed_min": None if flagged == 0 else witnessed_min,
            "witnessed_max": None if flagged == 0 else witnessed_max,
            "expected_witnessed": expect,
            "true_cut": true_val,
            "worst_cut_ratio": None if flagged == 0 else witnessed_min / true_val,
            "witnessed_exact": exact,
        },
        "bound": p,
        "pass": bool(within and exact),
    }
