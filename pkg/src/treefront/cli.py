"""Command-line entry point.

Subcommands: ``solve`` (run a DP solve and write front / solutions /
stats files), ``estimate`` (rank candidate decompositions without
solving), ``reconstruct`` (expand a persisted frontier into element
sets), ``gen knapsack`` (emit a synthetic aggregation instance),
``oracle`` (brute-force reference fronts for small inputs), and
``bench`` (timing comparison across thread counts and heuristic
settings).

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
import traceback

from .aggregation import (
    build_cut_graph,
    instance_to_json,
    knapsack_to_triangles,
    load_instance,
    objectives,
    path_td,
)
from .engine import DpConfig, SolveResult, skipped_resolver
from .estimator import rank_roots, score, select_root
from .fixedpoint import format_vector
from .fronts import front_to_text, vec_add
from .graphs import Graph, parse_graph
from .heuristic import HeuristicConfig
from .mst import solve_mst
from .oracle import brute_cuts, brute_mst, brute_tsp, pareto_filter_with_witness
from .stcut import CutInstance, solve_stcut
from .store import SolutionStore, StoreError
from .td import fuse_nodes, make_nice, parse_td, td_to_text, validate_for_graph
from .tsp import solve_tsp

PROBLEMS = ("stcut", "mst", "tsp", "aggregation")


class UsageError(Exception):
    """Invalid invocation or input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# small helpers


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _parse_params(pairs: list[str] | None) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise UsageError(f"expected KEY=VALUE, got {item!r}")
        out[key] = value
    return out


def _solution_parts(elements, element_kind: str, triangle_ids) -> list[str]:
    if element_kind == "edge":
        return [f"{e >> 32}-{e & 0xFFFFFFFF}" for e in elements]
    if triangle_ids is not None:
        return [triangle_ids[v - 1] for v in elements]
    return [str(v) for v in elements]


def _solution_line(index: int, parts: list[str]) -> str:
    tail = " " + " ".join(parts) if parts else ""
    return f"sol {index}:{tail}\n"


# ---------------------------------------------------------------------------
# solve


def _has_inner_edges(graph: Graph) -> bool:
    return any(1 <= u <= graph.n and 1 <= v <= graph.n for u, v, _ in graph.edges)


def _build_ntd(args, graph: Graph, with_edges: bool, fuse_on: bool):
    """Parse/derive the decomposition, pick a root, make it nice."""
    if args.td is not None:
        td = parse_td(_read_text(args.td))
    elif args.problem == "aggregation" and not _has_inner_edges(graph):
        td = path_td(graph.n)  # no adjacent triangles: trivial path works
    else:
        raise UsageError("--td is required (path to a decomposition file)")
    validate_for_graph(td, graph)
    if args.root is not None:
        if args.root not in td.bags:
            raise UsageError(f"--root {args.root} is not a bag id of the decomposition")
        root = args.root
    else:
        root = select_root(td, optimize=args.optimize_root, fuse=fuse_on)
    edges = [(u, v) for u, v, _ in graph.edges] if with_edges else None
    ntd = make_nice(td, root=root, with_edge_nodes=with_edges, edges=edges)
    if fuse_on:
        ntd = fuse_nodes(ntd)
    return ntd


def _dp_config(args, fuse_on: bool) -> DpConfig:
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    if args.max_disk is not None and args.max_disk <= 0:
        raise UsageError("--max-disk must be a positive byte count")
    try:
        hcfg = HeuristicConfig.from_mapping(_parse_params(args.heuristic_param))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad --heuristic-param: {exc}") from exc
    hcfg.enabled = args.heuristic == "on"
    return DpConfig(
        threads=args.threads,
        heuristic=hcfg,
        fuse=fuse_on,
        spill=args.spill,
        max_disk=args.max_disk,
    )


def _run_pipeline(args, cfg: DpConfig, store: SolutionStore):
    """Shared by solve and bench: load inputs, build the nice TD, run."""
    problem = args.problem
    if problem == "aggregation":
        reduction = build_cut_graph(load_instance(_read_text(args.graph)))
        graph = reduction.graph
    else:
        reduction = None
        graph = parse_graph(_read_text(args.graph))
    fuse_on = cfg.fuse and problem in ("stcut", "aggregation")
    cfg.fuse = fuse_on
    with_edges = problem in ("mst", "tsp")
    ntd = _build_ntd(args, graph, with_edges, fuse_on)
    if problem == "stcut":
        result = solve_stcut(graph, ntd, cfg, store)
    elif problem == "aggregation":
        result = solve_stcut(reduction.cut, ntd, cfg, store)
        store.set_meta(problem="aggregation", triangle_ids=list(reduction.triangle_ids))
    elif problem == "mst":
        result = solve_mst(graph, ntd, cfg, store)
    else:
        result = solve_tsp(graph, ntd, cfg, store)
    return result, reduction


def _open_store(args, d: int):
    """Returns (store, tempdir-or-None); caller keeps the tempdir alive."""
    if args.store:
        return SolutionStore(args.store, d=d), None
    tmp = tempfile.TemporaryDirectory(prefix="treefront-store-")
    return SolutionStore(tmp.name, d=d), tmp


def _graph_dimension(args) -> int:
    if args.problem == "aggregation":
        return 2
    return parse_graph(_read_text(args.graph)).d


def cmd_solve(args) -> int:
    cfg = _dp_config(args, fuse_on=args.fuse == "on")
    store, tmp = _open_store(args, _graph_dimension(args))
    try:
        started = time.perf_counter()
        result, reduction = _run_pipeline(args, cfg, store)
        elapsed = time.perf_counter() - started

        offset = reduction.offset if reduction is not None else None
        vectors = result.vectors
        if offset is not None:
            vectors = [vec_add(v, offset) for v in vectors]
        header = f"c offset {format_vector(offset)}\n" if offset is not None else ""
        text = header + front_to_text(vectors)
        if args.out:
            _write_text(args.out, text)
        else:
            sys.stdout.write(text)

        if not result.front and args.problem in ("mst", "tsp"):
            kind = "spanning tree" if args.problem == "mst" else "tour"
            print(f"note: no {kind} exists; the front is empty", file=sys.stderr)

        if args.solutions:
            resolver = skipped_resolver(result.ntd)
            kind = store.meta.get("element_kind", "vertex")
            tri = reduction.triangle_ids if reduction is not None else None
            memo: dict = {}
            with open(args.solutions, "w", encoding="utf-8") as fh:
                for i, (_, sid) in enumerate(result.front):
                    elements = store.reconstruct(sid, resolver, memo)
                    fh.write(_solution_line(i, _solution_parts(elements, kind, tri)))

        if args.stats:
            _write_stats(args, result, elapsed, cfg)

        if args.plot:
            if not args.out:
                raise UsageError("--plot derives its file names from --out")
            from .plotting import plot_front

            base = os.path.splitext(args.out)[0]
            labels = (
                ("area", "perimeter")
                if args.problem == "aggregation"
                else ("objective 1", "objective 2")
            )
            plot_front(
                vectors,
                base + ".svg",
                base + ".csv",
                title=f"{args.problem} Pareto front",
                labels=labels,
            )

        if args.out:
            print(f"front: {len(result.front)} entries -> {args.out}")
        return 0
    finally:
        if tmp is not None:
            tmp.cleanup()


def _write_stats(args, result: SolveResult, elapsed: float, cfg: DpConfig) -> None:
    with open(args.stats, "w", encoding="utf-8") as fh:
        for ns in result.node_stats:
            fh.write(json.dumps({"type": "node", **ns.as_dict()}, sort_keys=True) + "\n")
        for event in result.prune_events:
            fh.write(json.dumps({"type": "prune", **event}, sort_keys=True) + "\n")
        js = result.join_stats
        summary = {
            "type": "summary",
            "problem": args.problem,
            "front_entries": len(result.front),
            "seconds": round(elapsed, 6),
            "threads": cfg.threads,
            "heuristic": cfg.heuristic.enabled,
            "fuse": cfg.fuse,
            "pairs_total": js.pairs_total,
            "pairs_skipped": js.pairs_skipped,
            "skip_fraction": round(js.skip_fraction, 6),
            "records": result.store.count,
            "log_bytes": result.store.log_bytes(),
            "prune_events": len(result.prune_events),
        }
        fh.write(json.dumps(summary, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args) -> int:
    graph = parse_graph(_read_text(args.graph))
    names = sorted(n for n in os.listdir(args.td_dir) if n.endswith(".td"))
    if not names:
        raise UsageError(f"no .td files in {args.td_dir}")
    per_file = []
    for name in names:
        td = parse_td(_read_text(os.path.join(args.td_dir, name)))
        try:
            validate_for_graph(td, graph)
        except ValueError as exc:
            raise UsageError(f"{name}: {exc}") from exc
        bag, est_time, est_storage, _ = rank_roots(td, optimize=args.optimize_root)[0]
        per_file.append((name, bag, est_time, est_storage))
    ranking = score([(t, s) for _, _, t, s in per_file])
    lines = ["name\testmTime\testmStorage\tscore"]
    for index, sc in ranking:
        name, _, est_time, est_storage = per_file[index]
        lines.append(f"{name}\t{est_time:.6g}\t{est_storage:.6g}\t{sc:.4f}")
    out = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, out)
    else:
        sys.stdout.write(out)
    return 0


# ---------------------------------------------------------------------------
# reconstruct


def cmd_reconstruct(args) -> int:
    store = SolutionStore(args.store, create=False)
    meta = store.meta
    node = args.node if args.node is not None else meta.get("root_node")
    key = args.key if args.key is not None else meta.get("root_key")
    if node is None or key is None:
        raise UsageError("store records no root frontier; pass --node and --key")
    front = store.read_frontier(int(node), str(key))
    join_bags = {int(k): tuple(v) for k, v in meta.get("join_bags", {}).items()}

    def resolver(node_id: int, mask: int):
        bag = join_bags.get(node_id)
        if bag is None:
            raise StoreError(f"store meta records no join bag for node {node_id}")
        return [bag[i] for i in range(len(bag)) if mask >> i & 1]

    kind = meta.get("element_kind", "vertex")
    tri = meta.get("triangle_ids")
    fh = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        memo: dict = {}
        for i, (_, sid) in enumerate(front):
            elements = store.reconstruct(sid, resolver, memo)
            fh.write(_solution_line(i, _solution_parts(elements, kind, tri)))
    finally:
        if args.out:
            fh.close()
    return 0


# ---------------------------------------------------------------------------
# gen knapsack


def cmd_gen_knapsack(args) -> int:
    n = args.count
    if n < 1:
        raise UsageError("-n must be >= 1")
    explicit = args.profits is not None or args.weights is not None
    if explicit:
        if args.powers:
            raise UsageError("--powers and explicit --profits/--weights are exclusive")
        if args.profits is None or args.weights is None:
            raise UsageError("--profits and --weights must be given together")
        if len(args.profits) != n or len(args.weights) != n:
            raise UsageError(f"need exactly {n} profits and {n} weights")
        profits, weights = args.profits, args.weights
    else:
        profits = weights = [float(2**i) for i in range(1, n + 1)]
    inst = knapsack_to_triangles(profits, weights)
    json_path = args.out + ".json"
    td_path = args.out + ".td"
    _write_text(json_path, instance_to_json(inst))
    _write_text(td_path, td_to_text(path_td(n)))
    print(json_path)
    print(td_path)
    return 0


# ---------------------------------------------------------------------------
# oracle


def cmd_oracle(args) -> int:
    if args.problem == "aggregation":
        inst = load_instance(_read_text(args.graph))
        ids = [t for t, _ in inst.triangles]
        if len(ids) > 20:
            raise UsageError(f"oracle enumerates 2^n subsets; n={len(ids)} is too large")
        items = []
        for bits in range(1 << len(ids)):
            sel = frozenset(ids[i] for i in range(len(ids)) if bits >> i & 1)
            items.append((objectives(inst, sel), sel))
        entries = pareto_filter_with_witness(items)
    else:
        graph = parse_graph(_read_text(args.graph))
        brute = {"stcut": brute_cuts, "mst": brute_mst, "tsp": brute_tsp}[args.problem]
        entries = brute(graph)
    text = front_to_text([v for v, _ in entries])
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args) -> int:
    try:
        thread_counts = [int(t) for t in args.threads.split(",") if t]
    except ValueError as exc:
        raise UsageError(f"bad --threads list: {args.threads!r}") from exc
    if not thread_counts or any(t < 1 for t in thread_counts):
        raise UsageError("--threads needs a comma-separated list of counts >= 1")
    if args.repeat < 1:
        raise UsageError("--repeat must be >= 1")

    rows = []
    records = []
    for threads in thread_counts:
        for heuristic in ("on", "off"):
            label = f"threads={threads},heuristic={heuristic}"
            seconds = []
            entries = 0
            skip_fraction = 0.0
            for run in range(args.repeat):
                cfg = DpConfig(
                    threads=threads,
                    heuristic=HeuristicConfig(enabled=heuristic == "on"),
                    fuse=args.fuse == "on",
                )
                with tempfile.TemporaryDirectory(prefix="treefront-bench-") as tmp:
                    store = SolutionStore(tmp, d=_graph_dimension(args))
                    started = time.perf_counter()
                    result, _ = _run_pipeline(args, cfg, store)
                    took = time.perf_counter() - started
                seconds.append(took)
                entries = len(result.front)
                skip_fraction = result.join_stats.skip_fraction
                records.append(
                    {
                        "type": "bench",
                        "variant": label,
                        "run": run,
                        "seconds": round(took, 6),
                        "front_entries": entries,
                        "skip_fraction": round(skip_fraction, 6),
                    }
                )
            mean = sum(seconds) / len(seconds)
            rows.append((label, mean, min(seconds), entries, skip_fraction))

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
    print("variant\tmean_s\tmin_s\tentries\tskip_fraction")
    for label, mean, best, entries, skip in rows:
        print(f"{label}\t{mean:.4f}\t{best:.4f}\t{entries}\t{skip:.4f}")
    if args.plot:
        from .plotting import plot_bench

        base = os.path.splitext(args.plot)[0]
        plot_bench(
            [(label, mean) for label, mean, _, _, _ in rows],
            base + ".svg",
            base + ".csv",
            title=f"{args.problem} solve time",
        )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_solve_like_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    p.add_argument("--graph", required=True, help="graph file (instance JSON for aggregation)")
    p.add_argument("--td", help="tree decomposition file")
    p.add_argument("--root", type=int, help="bag id to root the decomposition at")
    p.add_argument(
        "--optimize-root",
        action="store_true",
        help="try every bag as root under the estimator (default: leaves only)",
    )
    p.add_argument("--fuse", choices=("on", "off"), default="on")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="treefront",
        description="Exact Pareto fronts via dynamic programming on tree decompositions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run a solve and write the front")
    _add_solve_like_args(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--max-disk", type=int, help="origin-log budget in bytes (triggers pruning)")
    p.add_argument("--heuristic", choices=("on", "off"), default="on")
    p.add_argument(
        "--heuristic-param",
        action="append",
        metavar="KEY=VALUE",
        help="override a heuristic parameter (e.g. n_h_max=500); repeatable",
    )
    p.add_argument("--spill", choices=("root", "all"), default="root")
    p.add_argument("--store", help="solution store directory (default: temporary)")
    p.add_argument("--out", help="front file (default: stdout)")
    p.add_argument("--solutions", help="write reconstructed element sets here")
    p.add_argument("--stats", help="write per-node stats as line-delimited JSON here")
    p.add_argument("--plot", action="store_true", help="render SVG+CSV next to --out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("estimate", help="rank decomposition files by predicted cost")
    p.add_argument("--graph", required=True)
    p.add_argument("--td-dir", required=True, help="directory of candidate .td files")
    p.add_argument("--optimize-root", action="store_true")
    p.add_argument("--out", help="write the TSV here (default: stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("reconstruct", help="expand a stored frontier into element sets")
    p.add_argument("--store", required=True)
    p.add_argument("--node", type=int, help="frontier node id (default: recorded root)")
    p.add_argument("--key", help="frontier key hex (default: recorded root key)")
    p.add_argument("--out", help="solutions file (default: stdout)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("gen", help="instance generators")
    gen_sub = p.add_subparsers(dest="generator", required=True)
    k = gen_sub.add_parser("knapsack", help="knapsack-as-aggregation instance")
    k.add_argument("-n", "--count", type=int, required=True, help="number of items")
    k.add_argument(
        "--powers",
        action="store_true",
        help="profit_i = weight_i = 2^i (the default when no lists are given)",
    )
    k.add_argument("--profits", type=float, nargs="+")
    k.add_argument("--weights", type=float, nargs="+")
    k.add_argument("--out", default="knapsack", help="output base name")
    k.set_defaults(func=cmd_gen_knapsack)

    p = sub.add_parser("oracle", help="brute-force reference front (small inputs)")
    p.add_argument("--problem", required=True, choices=PROBLEMS)
    p.add_argument("--graph", required=True)
    p.add_argument("--out", help="front file (default: stdout)")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="compare solve times across settings")
    _add_solve_like_args(p)
    p.add_argument("--threads", default="1", help="comma-separated thread counts")
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--out", help="write per-run lines as line-delimited JSON here")
    p.add_argument("--plot", help="render a bar chart to this SVG path")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        name = exc.filename or str(exc)
        print(f"error: {name}: no such file or directory", file=sys.stderr)
        return 2
    except IsADirectoryError as exc:
        print(f"error: {exc.filename}: is a directory", file=sys.stderr)
        return 2
    except (ValueError, StoreError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
