"""Command-line front end.

Subcommands: ``generate``, ``attack``, ``defend``, ``cost``, ``experiment``,
``knapsack``. Each reads a JSON config file; common flags override config
fields. Exit codes: 0 success, 2 config error, 3 trial failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path as FsPath

import numpy as np

from pathdefense import __version__
from pathdefense import attacks as attack_mod
from pathdefense import costs as costs_mod
from pathdefense import datasets
from pathdefense import defense as defense_mod
from pathdefense import experiment as exp_mod
from pathdefense import zerosum
from pathdefense.dists import BudgetDist, TargetPathDist, ThreatModel, build_experiment_pair_dist
from pathdefense.graphs import Path, WeightVector

FORMATS = ("table", "csv", "json")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {path}: {exc}", 2) from exc


def _generator_from(cfg: dict) -> datasets.GeneratorSpec:
    family = cfg.get("family", "ER").upper()
    n = int(cfg.get("n", 100))
    seed = int(cfg.get("seed", 0))
    rate = float(cfg.get("weight_rate", 20.0))
    try:
        if family == datasets.ER:
            return datasets.er_spec(n, float(cfg.get("p", 0.048)), seed, rate)
        if family == datasets.BA:
            return datasets.ba_spec(n, int(cfg.get("m", 6)), seed, rate)
        if family == datasets.WS:
            return datasets.ws_spec(n, int(cfg.get("k", 12)), float(cfg.get("rewire", 0.05)), seed, rate)
        if family == datasets.SBM:
            return datasets.sbm_spec(
                tuple(cfg.get("sizes", (200, 50))),
                tuple(cfg.get("p_in", (0.06, 0.2))),
                float(cfg.get("p_out", 0.005)),
                seed,
                rate,
            )
    except ValueError as exc:
        raise CliError(str(exc), 2) from exc
    raise CliError(f"unknown generator family {family!r}", 2)


def _graph_source(cfg: dict, seed: int):
    graph_cfg = cfg.get("graph")
    if not isinstance(graph_cfg, dict):
        raise CliError("config needs a 'graph' object", 2)
    if "generator" in graph_cfg:
        spec = _generator_from({**graph_cfg["generator"], "seed": seed})
        g, w, c = datasets.generate(spec)
        return g, w, c, spec
    if "file" in graph_cfg:
        fcfg = graph_cfg["file"]
        f = datasets.EdgeListFile(
            path=fcfg["path"],
            directed=bool(fcfg.get("directed", False)),
            weight_semantics=fcfg.get("weights", "distance"),
        )
        try:
            loaded = datasets.load_edge_list(f)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load edge list: {exc}", 2) from exc
        return loaded.graph, loaded.weights, loaded.costs, None
    raise CliError("graph source must be 'generator' or 'file'", 2)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def emit(report: exp_mod.ExperimentReport, fmt: str, out_dir: str) -> list[str]:
    """Write the trajectory table and the aggregate summary; returns the
    written paths. All formats render the same repr'd numbers."""
    if fmt not in FORMATS:
        raise CliError(f"unknown format {fmt!r}", 2)
    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []
    rows = [row.as_tuple() for trial in report.trials for row in trial.rows]
    summary = {
        "config": _config_dict(report.config),
        "seed": report.config.seed,
        "version": __version__,
        "aggregate": report.aggregate(),
        "lower_bounds": {str(t.trial): _maybe(t.lower_bound) for t in report.trials},
        "errors": {str(t.trial): t.error for t in report.trials if t.error},
    }
    if fmt == "json":
        payload = {
            "columns": list(exp_mod.TRAJECTORY_COLUMNS),
            "rows": [[row[0], row[1]] + [_fmt_float(x) for x in row[2:]] for row in rows],
            "summary": summary,
        }
        path = out / "report.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        written.append(str(path))
        return written
    traj = out / "trajectory.csv"
    with traj.open("w", encoding="utf-8") as fh:
        fh.write(",".join(exp_mod.TRAJECTORY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join([str(row[0]), str(row[1])] + [_fmt_float(x) for x in row[2:]]) + "\n")
    written.append(str(traj))
    if fmt == "csv":
        spath = out / "summary.csv"
        agg = summary["aggregate"]
        with spath.open("w", encoding="utf-8") as fh:
            fh.write("key,value\n")
            fh.write(f"seed,{report.config.seed}\n")
            fh.write(f"version,{__version__}\n")
            for key in sorted(agg):
                value = agg[key]
                fh.write(f"{key},{_fmt_float(value) if isinstance(value, float) else value}\n")
        written.append(str(spath))
    else:
        spath = out / "summary.txt"
        lines = ["  ".join(f"{c:>12}" for c in exp_mod.TRAJECTORY_COLUMNS)]
        for row in rows:
            cells = [f"{row[0]:>12}", f"{row[1]:>12}"] + [f"{_fmt_float(x):>12}" for x in row[2:]]
            lines.append("  ".join(cells))
        lines.append("")
        for key, value in sorted(summary["aggregate"].items()):
            lines.append(f"{key} = {_fmt_float(value) if isinstance(value, float) else value}")
        spath.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(str(spath))
        print("\n".join(lines))
    path = out / "summary.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(str(path))
    return written


def _maybe(x: float):
    return None if math.isnan(x) else _fmt_float(x)


def _config_dict(cfg: exp_mod.ExperimentConfig) -> dict:
    out = {
        "target_count": cfg.target_count,
        "target_mode": cfg.target_mode,
        "budget_scale": cfg.budget_scale,
        "lambda_scale": cfg.lambda_scale,
        "f_plus": cfg.f_plus,
        "f_minus": cfg.f_minus,
        "defense": cfg.defense,
        "attack": cfg.attack_method,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "eps_attack": cfg.eps_attack,
        "eps_cost": cfg.eps_cost,
        "max_iters": cfg.max_iters,
    }
    if cfg.generator is not None:
        out["generator"] = {
            "family": cfg.generator.family,
            "n": cfg.generator.n,
            "params": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.generator.params.items()},
            "weight_rate": cfg.generator.weight_rate,
        }
    if cfg.edge_list is not None:
        out["edge_list"] = {
            "path": cfg.edge_list.path,
            "directed": cfg.edge_list.directed,
            "weights": cfg.edge_list.weight_semantics,
        }
    return out


def _experiment_config(cfg: dict, args) -> exp_mod.ExperimentConfig:
    graph_cfg = cfg.get("graph")
    if not isinstance(graph_cfg, dict):
        raise CliError("config needs a 'graph' object", 2)
    generator = None
    edge_list = None
    if "generator" in graph_cfg:
        generator = _generator_from(graph_cfg["generator"])
    elif "file" in graph_cfg:
        fcfg = graph_cfg["file"]
        edge_list = datasets.EdgeListFile(
            path=fcfg["path"],
            directed=bool(fcfg.get("directed", False)),
            weight_semantics=fcfg.get("weights", "distance"),
        )
    else:
        raise CliError("graph source must be 'generator' or 'file'", 2)
    targets = cfg.get("targets", {})
    thresholds = cfg.get("thresholds", {})
    try:
        return exp_mod.ExperimentConfig(
            generator=generator,
            edge_list=edge_list,
            target_count=int(targets.get("count", 1)),
            target_mode=targets.get("mode", "shared"),
            budget_scale=float(cfg.get("budget", {}).get("scale", 1.0)),
            lambda_scale=float(cfg.get("lambda", {}).get("scale", 1.0)),
            f_plus=float(cfg.get("f_plus", 1.0)),
            f_minus=float(cfg.get("f_minus", 1.0)),
            defense=args.defense or cfg.get("defense", "pathdefense"),
            attack_method=args.attack or cfg.get("attack", attack_mod.LP),
            trials=args.trials if args.trials is not None else int(cfg.get("trials", 10)),
            seed=args.seed if args.seed is not None else int(cfg.get("seed", 0)),
            eps_attack=float(thresholds.get("eps_attack", 1e-6)),
            eps_cost=float(thresholds.get("eps_cost", 0.0)),
            max_iters=int(thresholds.get("max_iters", 500)),
        )
    except (exp_mod.ConfigError, ValueError, TypeError) as exc:
        raise CliError(str(exc), 2) from exc


def _target_from(cfg: dict, g, w) -> Path:
    tcfg = cfg.get("target")
    if not isinstance(tcfg, dict):
        raise CliError("config needs a 'target' object", 2)
    if "nodes" in tcfg:
        try:
            return Path.from_nodes(g, tcfg["nodes"])
        except Exception as exc:
            raise CliError(f"bad target path: {exc}", 2) from exc
    try:
        s, t = int(tcfg["s"]), int(tcfg["t"])
    except (KeyError, ValueError) as exc:
        raise CliError("target needs 's' and 't' (or 'nodes')", 2) from exc
    rank = int(tcfg.get("rank", 5))
    ranked = datasets.k_shortest_paths(g, w, s, t, rank)
    if len(ranked) < rank:
        raise CliError(f"only {len(ranked)} simple paths between {s} and {t}, need {rank}", 2)
    return ranked[rank - 1][0]


def _cmd_generate(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    spec = _generator_from({**cfg.get("generator", cfg), "seed": seed})
    g, w, c = datasets.generate(spec)
    out = FsPath(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{spec.family.lower()}_n{spec.n}_seed{seed}.edges"
    with path.open("w", encoding="utf-8") as fh:
        for e, (u, v) in enumerate(g.edges):
            fh.write(f"{u} {v} {_fmt_float(w[e])} {_fmt_float(c[e])}\n")
    print(f"family={spec.family} n={g.node_count} m={g.edge_count} file={path}")
    return 0


def _cmd_attack(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    g, w, c, _ = _graph_source(cfg, seed)
    p_star = _target_from(cfg, g, w)
    method = args.attack or cfg.get("attack", attack_mod.LP)
    if method not in attack_mod.METHODS:
        raise CliError(f"unknown attack method {method!r}", 2)
    res = attack_mod.attack(g, w, c, p_star, method=method, seed=seed)
    print(f"target={list(p_star.nodes)}")
    print(f"cut_edges={sorted(res.cut.edges)}")
    print(f"cost={_fmt_float(res.cost)} feasible={res.feasible} no_attack={res.no_attack}")
    return 0


def _threat_model_from(cfg: dict, g, w, c, seed: int, method: str) -> tuple[ThreatModel, TargetPathDist]:
    tcfg = cfg.get("targets", {})
    count = int(tcfg.get("count", 1))
    try:
        if "s" in tcfg and "t" in tcfg:
            targets = datasets.select_target_paths(g, w, int(tcfg["s"]), int(tcfg["t"]), count)
        else:
            rng = np.random.default_rng((seed, 7))
            pair = exp_mod._sample_terminals(g, w, count, rng, shared=True)[0]
            targets = datasets.select_target_paths(g, w, pair[0], pair[1], count)
    except (datasets.InsufficientPathsError, exp_mod.ConfigError) as exc:
        raise CliError(str(exc), 2) from exc
    pair_dist = build_experiment_pair_dist(g, w, targets)
    bcfg = cfg.get("budget", {})
    if "rate" in bcfg:
        budget = BudgetDist.poisson(float(bcfg["rate"]))
    elif "point" in bcfg:
        budget = BudgetDist.point_mass(float(bcfg["point"]))
    else:
        budget = exp_mod.derive_budget_dist(
            g, w, c, targets, method=method, seed=seed, scale=float(bcfg.get("scale", 1.0))
        )
    base = ThreatModel(pair_dist, targets, budget, 0.0, float(cfg.get("f_plus", 1.0)), float(cfg.get("f_minus", 1.0)))
    lcfg = cfg.get("lambda", {})
    if "value" in lcfg:
        lam = float(lcfg["value"])
    else:
        lam = exp_mod.derive_lambda(g, w, base, scale=float(lcfg.get("scale", 1.0)))
    return (
        ThreatModel(pair_dist, targets, budget, lam, base.f_plus, base.f_minus),
        targets,
    )


def _cmd_defend(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    method = args.attack or cfg.get("attack", attack_mod.LP)
    defense = args.defense or cfg.get("defense", "pathdefense")
    g, w, c, _ = _graph_source(cfg, seed)
    tm, targets = _threat_model_from(cfg, g, w, c, seed, method)
    thresholds = cfg.get("thresholds", {})
    if defense == "bigweight":
        w_pub = defense_mod.bigweight(g, w, targets)
    elif defense == "zerosum":
        w_pub = zerosum.feasible_point_multi(g, w, c, targets, tm.budget_dist, method=method, seed=seed)
    elif defense == "pathdefense":
        dcfg = defense_mod.DefenseConfig(
            eps_cost=float(thresholds.get("eps_cost", 0.0)),
            eps_attack=float(thresholds.get("eps_attack", 1e-6)),
            max_iters=int(thresholds.get("max_iters", 500)),
            attack_method=method,
            seed=seed,
        )
        w_pub, _ = defense_mod.pathdefense(g, w, c, tm, dcfg)
    else:
        raise CliError(f"unknown defense {defense!r}", 2)
    out = FsPath(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / "published.edges"
    with path.open("w", encoding="utf-8") as fh:
        for e, (u, v) in enumerate(g.edges):
            fh.write(f"{u} {v} {_fmt_float(w_pub[e])} {_fmt_float(c[e])}\n")
    breakdown = costs_mod.compute_cost(g, w, w_pub, c, tm, method=method, seed=seed)
    print(f"defense={defense} published={path}")
    _print_breakdown(breakdown)
    return 0


def _print_breakdown(breakdown) -> None:
    print(
        "L_d={} L_e={} L_s={} total={} z={}".format(
            _fmt_float(breakdown.l_d),
            _fmt_float(breakdown.l_e),
            _fmt_float(breakdown.l_s),
            _fmt_float(breakdown.total),
            _fmt_float(1.0 - breakdown.z_empty),
        )
    )


def _cmd_cost(args) -> int:
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    method = args.attack or cfg.get("attack", attack_mod.LP)
    g, w, c, _ = _graph_source(cfg, seed)
    tm, _ = _threat_model_from(cfg, g, w, c, seed, method)
    if "published" in cfg:
        pub = datasets.load_edge_list(datasets.EdgeListFile(path=cfg["published"]))
        if pub.graph.edge_count != g.edge_count:
            raise CliError("published weights do not match the graph", 2)
        w_pub = pub.weights
    else:
        w_pub = w
    breakdown = costs_mod.compute_cost(g, w, w_pub, c, tm, method=method, seed=seed)
    lower = costs_mod.lower_bound_cost(g, w, tm)
    _print_breakdown(breakdown)
    print(f"lower_bound={_fmt_float(lower)} normalized={_fmt_float(breakdown.total / lower)}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    xcfg = _experiment_config(cfg, args)
    report = exp_mod.run_experiment(xcfg)
    emit(report, args.format, args.out or ".")
    failures = [t for t in report.trials if t.error]
    for t in failures:
        print(f"trial {t.trial} failed: {t.error}", file=sys.stderr)
    return 3 if failures else 0


def _cmd_knapsack(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    instance_path = cfg.get("instance", args.instance)
    if not instance_path:
        raise CliError("knapsack needs an instance file (config key 'instance' or --instance)", 2)
    try:
        inst = zerosum.read_knapsack_file(instance_path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read instance: {exc}", 2) from exc
    exact = zerosum.knapsack_reduce(inst, exact_defense=True)
    oracle = zerosum.knapsack_dp_oracle(inst)
    heuristic = zerosum.knapsack_reduce(inst, exact_defense=False)
    print(f"n={inst.n} U={inst.value_threshold} H={inst.weight_threshold}")
    print(f"reduction_exact={exact} dp_oracle={oracle} reduction_heuristic={heuristic}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pathdefense", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (
        ("generate", _cmd_generate),
        ("attack", _cmd_attack),
        ("defend", _cmd_defend),
        ("cost", _cmd_cost),
        ("experiment", _cmd_experiment),
        ("knapsack", _cmd_knapsack),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "knapsack"), help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=FORMATS, default="table")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--defense", choices=exp_mod.DEFENSES, default=None)
        p.add_argument("--attack", choices=attack_mod.METHODS, default=None)
        if name == "knapsack":
            p.add_argument("--instance", default=None)
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except exp_mod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
