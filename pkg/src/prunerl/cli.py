"""Command-line pipeline: train agents, sparsify graphs with any method,
evaluate metrics, and aggregate comparison tables as tidy CSV.

Subcommands: train, sparsify, evaluate, compare, spanner-compare, h-sweep.
Exit codes: 0 success, 1 usage, 2 data error, 3 runtime failure.
"""

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import baselines
from .agent import Agent, train_loop
from .config import load_run_config, rng_streams
from .errors import ConfigError, PruneRLError
from .graph import load_communities, load_edge_list
from .metrics import PathQuerySet, adjusted_rand_index, louvain, pagerank, spearman_rho
from .rewards import make_reward_spec, reward_spsp

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3

BASELINE_METHODS = ("random_edge", "local_degree", "edge_forest_fire", "l_spar")


def _load_labels_if(path, graph):
    return load_communities(path, graph) if path else None


def _align_sparsified(graph, path):
    """Rebuild a sparsified edge list on the original graph's node universe,
    so metric vectors stay index-aligned even when the file omits nodes that
    became isolated."""
    kept = set()
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            u_orig, v_orig = line.split()[:2]
            try:
                u = graph.id_map[int(u_orig)]
                v = graph.id_map[int(v_orig)]
            except (KeyError, ValueError):
                raise ConfigError(
                    f"{path}: edge ({u_orig}, {v_orig}) is not in the dataset"
                )
            kept.add((u, v) if graph.directed else (min(u, v), max(u, v)))
    aligned = graph.copy()
    for eid in aligned.live_edge_ids():
        u, v = int(aligned.src[eid]), int(aligned.dst[eid])
        key = (u, v) if graph.directed else (min(u, v), max(u, v))
        if key not in kept:
            aligned.prune_edge(aligned.edge_ref(eid))
    return aligned


def _build_reward(cfg, graph):
    obj = cfg.objective
    if obj.kind == "community":
        labels = load_communities(obj.labels_path, graph)
        return make_reward_spec("community", graph, labels=labels, label_sign=obj.label_sign)
    if obj.kind == "spsp":
        return make_reward_spec("spsp", graph, pairs_per_endpoint=obj.pairs_per_endpoint)
    return make_reward_spec(obj.kind, graph)


def _run_method(method, graph, ratio, seed, checkpoint, eval_h):
    rng = np.random.default_rng(seed)
    if method == "random_edge":
        return baselines.random_edge(graph, ratio, rng)
    if method == "local_degree":
        return baselines.local_degree(graph, r=ratio)
    if method == "edge_forest_fire":
        return baselines.edge_forest_fire(graph, ratio, 0.95, rng)
    if method == "l_spar":
        return baselines.l_spar(graph, r=ratio)
    if method == "agent":
        if not checkpoint:
            raise ConfigError("method 'agent' requires a checkpoint")
        agent = Agent.load(checkpoint, graph)
        return agent.sparsify(graph, ratio, eval_h, rng)
    raise ConfigError(f"unknown method {method!r}")


def _evaluate_metric(graph, sparsified, metric, labels=None, seed=0,
                     spsp_pairs=8196, louvain_runs=8):
    rng = np.random.default_rng(seed)
    if metric == "pagerank":
        return spearman_rho(pagerank(graph), pagerank(sparsified))
    if metric == "community":
        if labels is None:
            raise ConfigError("community metric requires ground-truth labels")
        scores = [
            adjusted_rand_index(louvain(sparsified, rng).labels, labels)
            for _ in range(louvain_runs)
        ]
        return float(np.mean(scores))
    if metric == "modularity":
        scores = [louvain(sparsified, rng).modularity for _ in range(louvain_runs)]
        return float(np.mean(scores))
    if metric == "spsp":
        queries = PathQuerySet.sample(graph, spsp_pairs, rng)
        return reward_spsp(graph, sparsified, queries)
    raise ConfigError(f"unknown metric {metric!r}")


METRIC_FOR_OBJECTIVE = {
    "pagerank": "pagerank",
    "community": "community",
    "modularity": "modularity",
    "spsp": "spsp",
}


def _write_csv(path, rows, fieldnames):
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


# ------------------------------------------------------------------- commands


def cmd_train(args):
    cfg = load_run_config(args.config)
    graph = load_edge_list(cfg.dataset, directed=cfg.directed)
    reward = _build_reward(cfg, graph)
    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    streams = rng_streams(args.seed if args.seed is not None else cfg.seed)
    agent_cfg = cfg.agent
    agent = Agent(graph, agent_cfg, rng=streams["init"])
    ckpt = out_dir / "checkpoint.npz"
    if args.resume and ckpt.exists():
        agent = Agent.load(ckpt, graph)
    train_loop(
        agent,
        reward,
        cfg.train.episodes,
        streams["exploration"],
        log_path=out_dir / "training_log.csv",
        checkpoint_path=ckpt,
        checkpoint_every=cfg.train.checkpoint_every,
        patience=cfg.train.patience,
        patience_window=cfg.train.patience_window,
    )
    print(f"trained {agent.episodes_done} episodes, {agent.update_steps} update steps")
    print(f"checkpoint: {ckpt}")
    return EXIT_OK


def cmd_sparsify(args):
    graph = load_edge_list(args.dataset, directed=args.directed)
    sparsified = _run_method(
        args.method, graph, args.ratio, args.seed, args.checkpoint,
        args.eval_subgraph_len,
    )
    header = [
        f"method={args.method} ratio={args.ratio} seed={args.seed}",
        f"dataset={args.dataset}",
    ]
    params = getattr(sparsified, "method_params", None)
    if params:
        shown = {k: v for k, v in params.items() if not isinstance(v, dict)}
        header.append(f"params={shown}")
    sparsified.save_edge_list(args.out, header_lines=header)
    print(f"wrote {sparsified.edge_count} live edges to {args.out}")
    return EXIT_OK


def cmd_evaluate(args):
    graph = load_edge_list(args.dataset, directed=args.directed)
    sparsified = _align_sparsified(graph, args.sparsified)
    labels = _load_labels_if(args.labels, graph)
    value = _evaluate_metric(
        graph, sparsified, args.metric, labels=labels, seed=args.seed,
        spsp_pairs=args.spsp_pairs,
    )
    row = {
        "dataset": args.dataset,
        "method": "file",
        "edge_kept_ratio": sparsified.edge_count / graph.original_edge_count,
        "metric": args.metric,
        "seed": args.seed,
        "value": value,
    }
    if args.out:
        _write_csv(args.out, [row], list(row.keys()))
    print(f"{args.metric} = {value}")
    return EXIT_OK


def cmd_compare(args):
    cfg = load_run_config(args.config)
    graph = load_edge_list(cfg.dataset, directed=cfg.directed)
    labels = _load_labels_if(cfg.objective.labels_path, graph)
    metric = METRIC_FOR_OBJECTIVE[cfg.objective.kind]
    methods = list(BASELINE_METHODS)
    if args.checkpoint:
        methods.append("agent")
    cells = [
        (method, ratio, seed)
        for method in methods
        for ratio in cfg.evaluation.ratios
        for seed in range(cfg.evaluation.seeds)
    ]

    def run_cell(cell):
        method, ratio, seed = cell
        try:
            sp = _run_method(method, graph, ratio, seed, args.checkpoint,
                             cfg.evaluation.eval_subgraph_len)
            value = _evaluate_metric(
                graph, sp, metric, labels=labels, seed=seed,
                spsp_pairs=cfg.evaluation.spsp_pairs,
                louvain_runs=cfg.evaluation.louvain_runs,
            )
            return {"method": method, "ratio": ratio, "seed": seed,
                    "value": value, "error": ""}
        except Exception as exc:  # isolate per-cell failures
            return {"method": method, "ratio": ratio, "seed": seed,
                    "value": float("nan"), "error": str(exc)}

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(run_cell, cells))

    per_seed_rows = [
        {"dataset": cfg.dataset, "method": r["method"],
         "edge_kept_ratio": r["ratio"], "metric": metric, "seed": r["seed"],
         "value": r["value"], "error": r["error"]}
        for r in results
    ]
    agg = {}
    for r in results:
        if r["error"]:
            continue
        agg.setdefault((r["method"], r["ratio"]), []).append(r["value"])
    best = {}
    for (method, ratio), vals in agg.items():
        m = float(np.mean(vals))
        # spsp is a penalty: lower wins; everything else: higher wins
        score = -m if metric == "spsp" else m
        if ratio not in best or score > best[ratio][1]:
            best[ratio] = (method, score)
    table_rows = [
        {"dataset": cfg.dataset, "method": method, "ratio": ratio,
         "metric": metric, "mean": float(np.mean(vals)), "n_seeds": len(vals),
         "best": int(best[ratio][0] == method)}
        for (method, ratio), vals in sorted(agg.items())
    ]
    out_dir = Path(args.out or cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / "compare_cells.csv", per_seed_rows,
               ["dataset", "method", "edge_kept_ratio", "metric", "seed", "value", "error"])
    _write_csv(out_dir / "compare_table.csv", table_rows,
               ["dataset", "method", "ratio", "metric", "mean", "n_seeds", "best"])
    for row in table_rows:
        flag = " *" if row["best"] else ""
        print(f"{row['method']:>18} r={row['ratio']:<4} {metric}={row['mean']:.4f}{flag}")
    return EXIT_OK


def cmd_spanner_compare(args):
    graph = load_edge_list(args.dataset, directed=args.directed)
    agent = Agent.load(args.checkpoint, graph)
    rng = np.random.default_rng(args.seed)

    def sparsify_to_count(edge_count, rng_):
        ratio = edge_count / graph.original_edge_count
        return agent.sparsify(graph, ratio, args.eval_subgraph_len, rng_)

    rows = baselines.spanner_comparison_protocol(
        graph, args.stretch, sparsify_to_count, rng, runs=args.runs,
        n_pairs=args.spsp_pairs,
    )
    if args.out:
        _write_csv(args.out, rows, ["t", "mean_ratio", "spanner_rspsp", "agent_rspsp"])
    for r in rows:
        print(f"t={r['t']} kept={r['mean_ratio']:.4f} "
              f"spanner={r['spanner_rspsp']:.4f} agent={r['agent_rspsp']:.4f}")
    return EXIT_OK


def cmd_h_sweep(args):
    graph = load_edge_list(args.dataset, directed=args.directed)
    agent = Agent.load(args.checkpoint, graph)
    labels = _load_labels_if(args.labels, graph)
    rows = []
    for h in args.subgraph_lens:
        for seed in range(args.seeds):
            rng = np.random.default_rng(seed)
            t0 = time.perf_counter()
            sp = agent.sparsify(graph, args.ratio, h, rng)
            elapsed = time.perf_counter() - t0
            value = _evaluate_metric(graph, sp, args.metric, labels=labels, seed=seed)
            rows.append({"subgraph_len": h, "ratio": args.ratio,
                         "metric": args.metric, "seed": seed, "value": value,
                         "wall_time_s": elapsed})
    if args.out:
        _write_csv(args.out, rows,
                   ["subgraph_len", "ratio", "metric", "seed", "value", "wall_time_s"])
    for h in args.subgraph_lens:
        sub = [r for r in rows if r["subgraph_len"] == h]
        print(f"|H|={h}: mean {args.metric}={np.mean([r['value'] for r in sub]):.4f} "
              f"mean time={np.mean([r['wall_time_s'] for r in sub]):.3f}s")
    return EXIT_OK


# --------------------------------------------------------------------- parser


def build_parser():
    p = argparse.ArgumentParser(prog="prunerl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train an agent from a run config")
    t.add_argument("--config", required=True)
    t.add_argument("--seed", type=int, default=None)
    t.add_argument("--out", default=None)
    t.add_argument("--resume", action="store_true")
    t.set_defaults(func=cmd_train)

    s = sub.add_parser("sparsify", help="sparsify a dataset with any method")
    s.add_argument("--dataset", required=True)
    s.add_argument("--method", required=True,
                   choices=list(BASELINE_METHODS) + ["agent"])
    s.add_argument("--ratio", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--checkpoint", default=None)
    s.add_argument("--eval-subgraph-len", dest="eval_subgraph_len", type=int, default=32)
    s.add_argument("--directed", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sparsify)

    e = sub.add_parser("evaluate", help="score a sparsified edge list")
    e.add_argument("--dataset", required=True)
    e.add_argument("--sparsified", required=True)
    e.add_argument("--metric", required=True,
                   choices=["pagerank", "community", "modularity", "spsp"])
    e.add_argument("--labels", default=None)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--spsp-pairs", dest="spsp_pairs", type=int, default=8196)
    e.add_argument("--directed", action="store_true")
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_evaluate)

    c = sub.add_parser("compare", help="full method x ratio x seed grid")
    c.add_argument("--config", required=True)
    c.add_argument("--checkpoint", default=None)
    c.add_argument("--workers", type=int, default=4)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_compare)

    sc = sub.add_parser("spanner-compare", help="match the agent against the spanner")
    sc.add_argument("--dataset", required=True)
    sc.add_argument("--checkpoint", required=True)
    sc.add_argument("--stretch", type=int, nargs="+", default=[3, 5, 7])
    sc.add_argument("--runs", type=int, default=16)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--spsp-pairs", dest="spsp_pairs", type=int, default=512)
    sc.add_argument("--eval-subgraph-len", dest="eval_subgraph_len", type=int, default=32)
    sc.add_argument("--directed", action="store_true")
    sc.add_argument("--out", default=None)
    sc.set_defaults(func=cmd_spanner_compare)

    h = sub.add_parser("h-sweep", help="time/performance sweep over |H|")
    h.add_argument("--dataset", required=True)
    h.add_argument("--checkpoint", required=True)
    h.add_argument("--ratio", type=float, required=True)
    h.add_argument("--metric", default="pagerank",
                   choices=["pagerank", "community", "modularity", "spsp"])
    h.add_argument("--subgraph-lens", dest="subgraph_lens", type=int, nargs="+",
                   default=[8, 16, 32, 64])
    h.add_argument("--seeds", type=int, default=3)
    h.add_argument("--labels", default=None)
    h.add_argument("--directed", action="store_true")
    h.add_argument("--out", default=None)
    h.set_defaults(func=cmd_h_sweep)

    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PruneRLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
