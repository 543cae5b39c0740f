"""Command-line front end.

Every invocation writes a run manifest (command, argv, resolved parameters,
seed, version, timestamps, outputs).  It goes next to ``--out`` as
``<out>.manifest.json``, to ``--manifest`` when given, and otherwise to
stderr.  ``cutsparse replay MANIFEST`` re-runs the recorded argv.

Exit codes: 0 pass, 1 verification failure, 2 usage or domain error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .connectivity import (
    all_edge_connectivities,
    connectivity_table,
    estimate_kappa,
    format_table,
)
from .contraction import contract_experiment
from .graph import (
    FAMILIES,
    GraphError,
    InvariantError,
    align_sparsifier,
    generate,
    parse_graph,
    parse_sparsifier,
    serialize_graph,
)
from .sampling import DEFAULT_D, SamplingConfig, sparsify, sparsify_by_trees, sparsify_pipeline
from .verify import (
    class_index,
    count_cut_induced_sets,
    max_cut_error,
    min_black_connectivity,
    tree_lb_experiment,
)

KAPPA_METHODS = ("connectivity", "conductance", "strength", "ni", "connest")
SPARSIFY_METHODS = KAPPA_METHODS + ("trees", "pipeline")
CONTRACT_MAX_N = 12


class UsageError(GraphError):
    pass


def _clean(x):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str, outputs: list[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)
    outputs.append(path)


def _black_set(g, spec: str) -> set[int]:
    """``all``, ``heaviest``, ``class:i``, ``ids:a,b,c`` or ``edges:FILE``."""
    kind, _, arg = spec.partition(":")
    if kind == "all":
        return set(g.ids.tolist())
    if kind == "heaviest":
        if not g.m:
            raise UsageError("graph has no edges")
        best = max(g.edges, key=lambda e: (e.weight, -e.id))
        return {best.id}
    if kind == "class":
        try:
            i = int(arg)
        except ValueError:
            raise UsageError(f"bad class index {arg!r}") from None
        k = all_edge_connectivities(g).k
        out = {e.id for e in g.edges if class_index(k[e.id]) == i}
        if not out:
            present = sorted({class_index(v) for v in k.values()})
            raise UsageError(f"connectivity class {i} is empty; non-empty classes: {present}")
        return out
    if kind in ("ids", "edges"):
        text = arg.replace(",", " ") if kind == "ids" else _read(arg)
        try:
            ids = {int(t) for t in text.split()}
        except ValueError:
            raise UsageError("black edge ids must be integers") from None
        for eid in sorted(ids):
            if not g.has_edge(eid):
                raise UsageError(f"edge id {eid} not in graph")
        if not ids:
            raise UsageError("black edge set is empty")
        return ids
    raise UsageError(f"bad --black spec {spec!r}; use all, heaviest, class:i, ids:a,b or edges:FILE")


# --------------------------------------------------------------------------
# commands; each returns (exit code, resolved params)


def cmd_gen(args, outputs):
    params = {k: getattr(args, k) for k in ("n", "k", "p", "wmax", "w") if getattr(args, k) is not None}
    g = generate(args.family, seed=args.seed, **params)
    _write(args.out, serialize_graph(g), outputs)
    return 0, {"family": args.family, **params}


def cmd_sparsify(args, outputs):
    g = parse_graph(_read(args.input))
    cfg = SamplingConfig(epsilon=args.epsilon, d_constant=args.d, rho_override=args.rho, seed=args.seed)
    if args.method == "trees":
        sp = sparsify_by_trees(g, cfg)
    elif args.method == "pipeline":
        sp = sparsify_pipeline(g, cfg)
    else:
        sp = sparsify(g, estimate_kappa(g, args.method), cfg)
    sidecar = {
        "method": sp.meta.get("method", args.method),
        "epsilon": args.epsilon,
        "rho": sp.meta["rho"],
        "seed": args.seed,
        "edge_count": sp.m,
        "expected_size_bound": sp.meta.get("expected_size_bound"),
    }
    if "stages" in sp.meta:
        sidecar["stages"] = sp.meta["stages"]
    _write(args.out, serialize_graph(sp), outputs)
    side_path = args.sidecar or (f"{args.out}.json" if args.out not in (None, "-") else None)
    if side_path is not None:
        _write(side_path, dumps(sidecar), outputs)
    else:
        sys.stderr.write(dumps(sidecar))
    return 0, {"input": args.input, "method": args.method, "epsilon": args.epsilon, "d": args.d,
               "rho": sp.meta["rho"]}


def cmd_verify(args, outputs):
    g = parse_graph(_read(args.graph))
    sp = parse_sparsifier(_read(args.sparsifier))
    if sp.n != g.n:
        raise UsageError(f"vertex count mismatch: graph has {g.n}, sparsifier has {sp.n}")
    sp = align_sparsifier(g, sp)
    report = max_cut_error(g, sp, mode=args.mode, samples=args.samples, seed=args.seed)
    ok = report.max_error <= args.epsilon
    out = {
        "experiment": "verify",
        "params": {"mode": "sampled" if report.sampled else "exact", "epsilon": args.epsilon, "n": g.n},
        "seed": args.seed,
        "trials": report.cuts_inspected,
        "statistics": report.as_dict(),
        "bound": args.epsilon,
        "pass": bool(ok),
    }
    _write(args.out, dumps(out), outputs)
    return (0 if ok else 1), out["params"]


def cmd_countcuts(args, outputs):
    g = parse_graph(_read(args.graph))
    black = _black_set(g, args.black)
    k = all_edge_connectivities(g).k
    K = min_black_connectivity(g, black, k) if black else 0
    threshold = args.alpha * K
    count = count_cut_induced_sets(g, black, threshold, K=K if black else None, k=k)
    bound = float(g.n) ** (2 * args.alpha)
    ok = count < bound
    out = {
        "experiment": "countcuts",
        "params": {"alpha": args.alpha, "K": K, "n": g.n, "black": sorted(black), "threshold": threshold},
        "seed": 0,
        "trials": 1,
        "statistics": {"count": count},
        "bound": bound,
        "pass": bool(ok),
    }
    _write(args.out, dumps(out), outputs)
    return (0 if ok else 1), out["params"]


def cmd_contract(args, outputs):
    g = parse_graph(_read(args.graph))
    if g.n > CONTRACT_MAX_N:
        raise UsageError(f"contraction experiments are capped at n <= {CONTRACT_MAX_N} (got {g.n})")
    black = _black_set(g, args.black)
    out = contract_experiment(g, black, args.alpha, args.algo, args.trials, args.seed, args.jobs)
    _write(args.out, dumps(out), outputs)
    return (0 if out["pass"] else 1), out["params"]


def cmd_treelb(args, outputs):
    out = tree_lb_experiment(args.n, args.k, args.rho, args.trials, args.seed)
    _write(args.out, dumps(out), outputs)
    return (0 if out["pass"] else 1), out["params"]


def cmd_table(args, outputs):
    g = parse_graph(_read(args.graph))
    table = connectivity_table(g)
    kappa = estimate_kappa(g, args.kappa) if args.kappa else None
    _write(args.out, format_table(g, table, kappa), outputs)
    return 0, {"kappa": args.kappa}


def cmd_replay(args, outputs):
    try:
        manifest = json.loads(_read(args.manifest))
        argv = manifest["argv"]
    except (ValueError, KeyError):
        raise UsageError(f"{args.manifest} is not a run manifest") from None
    if argv and argv[0] == "replay":
        raise UsageError("refusing to replay a replay")
    return main(argv), {"argv": argv}


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cutsparse", description="Cut sparsification experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, seed=True, out=True):
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        if out:
            sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--manifest", help="run manifest path (default <out>.manifest.json, else stderr)")

    s = sub.add_parser("gen", help="generate a graph family")
    s.add_argument("family", choices=FAMILIES)
    s.add_argument("--n", type=int, help="size parameter")
    s.add_argument("--k", type=int, help="k for figure3 / tree-lower-bound")
    s.add_argument("--p", type=float, help="edge probability for random-gnp")
    s.add_argument("--wmax", type=int, help="largest multiplicity for random-gnp")
    s.add_argument("--w", type=int, help="multiplicity for complete")
    common(s)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("sparsify", help="sparsify a graph")
    s.add_argument("--in", dest="input", required=True, help="input graph (edge list, '-' for stdin)")
    s.add_argument("--method", choices=SPARSIFY_METHODS, default="connectivity", help="kappa source or scheme")
    s.add_argument("--epsilon", type=float, default=0.5, help="target relative cut error")
    s.add_argument("--d", type=float, default=DEFAULT_D, help=f"round constant, rho = ceil(d lg^2 n / eps^2) (default {DEFAULT_D})")
    s.add_argument("--rho", type=int, help="override the number of rounds")
    s.add_argument("--sidecar", help="JSON sidecar path (default <out>.json)")
    common(s)
    s.set_defaults(func=cmd_sparsify)

    s = sub.add_parser("verify", help="check every cut of a sparsifier")
    s.add_argument("--graph", required=True, help="original graph")
    s.add_argument("--sparsifier", required=True, help="weighted sparsifier")
    s.add_argument("--epsilon", type=float, required=True, help="tolerated relative error")
    s.add_argument("--mode", choices=("auto", "exact", "sampled"), default="auto", help="cut family")
    s.add_argument("--samples", type=int, default=10_000, help="random subsets in sampled mode")
    common(s)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("countcuts", help="count cut-induced subsets of black edges")
    s.add_argument("--graph", required=True, help="input graph")
    s.add_argument("--black", required=True, help="all | heaviest | class:i | ids:a,b | edges:FILE")
    s.add_argument("--alpha", type=float, default=1.0, help="threshold multiple of K")
    common(s, seed=False)
    s.set_defaults(func=cmd_countcuts)

    s = sub.add_parser("contract", help="contraction frequency experiment")
    s.add_argument("--graph", required=True, help="input graph (n <= 12)")
    s.add_argument("--black", required=True, help="all | heaviest | class:i | ids:a,b | edges:FILE")
    s.add_argument("--alpha", type=float, default=1.0, help="stop at ceil(2 alpha) vertices")
    s.add_argument("--algo", choices=("split", "rw"), default="split", help="contraction variant")
    s.add_argument("--trials", type=int, default=100_000, help="number of runs")
    s.add_argument("--jobs", type=int, default=1, help="worker processes (output does not depend on it)")
    common(s)
    s.set_defaults(func=cmd_contract)

    s = sub.add_parser("treelb", help="spanning-tree lower-bound experiment")
    s.add_argument("--n", type=int, required=True, help="positions (<= 200)")
    s.add_argument("--k", type=int, required=True, help="heavy multiplicity")
    s.add_argument("--rho", type=int, required=True, help="trees per sparsifier")
    s.add_argument("--trials", type=int, default=10_000, help="sparsifiers to sample")
    common(s)
    s.set_defaults(func=cmd_treelb)

    for name, kappa, text in (
        ("table", None, "per-edge connectivity, strength and conductance"),
        ("resist", None, "same table as 'table' (effective resistances included)"),
        ("connest", "connest", "table with the ConnectivityEstimation kappa column"),
    ):
        s = sub.add_parser(name, help=text)
        s.add_argument("--graph", required=True, help="input graph")
        s.add_argument("--kappa", choices=KAPPA_METHODS, default=kappa, help="also show an estimator column")
        common(s, seed=False)
        s.set_defaults(func=cmd_table)

    s = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay, out=None)
    return p


def _emit_manifest(args, argv, params, outputs, started, code):
    if args.command == "replay":
        return
    manifest = {
        "command": args.command,
        "argv": argv,
        "params": params,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "started": started,
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": outputs,
        "exit_code": code,
    }
    path = args.manifest or (f"{args.out}.manifest.json" if getattr(args, "out", None) not in (None, "-") else None)
    if path:
        Path(path).write_text(dumps(manifest))
    else:
        sys.stderr.write("manifest: " + json.dumps(_clean(manifest), sort_keys=True) + "\n")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    outputs: list[str] = []
    try:
        code, params = args.func(args, outputs)
    except InvariantError as exc:
        print(f"cutsparse: internal invariant violated: {exc}", file=sys.stderr)
        return 3
    except GraphError as exc:
        print(f"cutsparse: error: {exc}", file=sys.stderr)
        return 2
    _emit_manifest(args, argv, params, outputs, started, code)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
