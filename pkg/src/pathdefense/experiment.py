"""Seeded experiment driver.

One trial = sample (or load) a graph, pick terminals, build targets at
ranks 5, 7, 9, ... of the k-shortest list, derive the budget distribution
(Poisson at the mean attack cost on the clean graph) and the success cost
(half the no-attack user cost), run the chosen defense, and record the cost
trajectory. Everything derives from (config, seed): trial j uses sub-seed
(seed, j), so trials can run in any order with identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from pathdefense import attacks as attack_mod
from pathdefense import costs as costs_mod
from pathdefense import datasets
from pathdefense import defense as defense_mod
from pathdefense import zerosum
from pathdefense.dists import (
    BudgetDist,
    TargetPathDist,
    ThreatModel,
    build_experiment_pair_dist,
)
from pathdefense.graphs import Graph, WeightVector, CostVector, is_connected

DEFENSES = ("pathdefense", "zerosum", "bigweight", "none")

TRAJECTORY_COLUMNS = ("trial", "iter", "L_d", "L_e", "L_s", "total", "z_min", "normalized")


class ConfigError(Exception):
    """The experiment configuration is not usable."""


@dataclass(frozen=True)
class ExperimentConfig:
    generator: datasets.GeneratorSpec | None = None
    edge_list: datasets.EdgeListFile | None = None
    target_count: int = 1
    target_mode: str = "shared"  # shared | independent | extra_community
    budget_scale: float = 1.0
    lambda_scale: float = 1.0
    f_plus: float = 1.0
    f_minus: float = 1.0
    defense: str = "pathdefense"
    attack_method: str = attack_mod.LP
    trials: int = 10
    seed: int = 0
    eps_attack: float = 1e-6
    eps_cost: float = 0.0
    max_iters: int = 500

    def __post_init__(self):
        if (self.generator is None) == (self.edge_list is None):
            raise ConfigError("exactly one graph source must be set")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.defense not in DEFENSES:
            raise ConfigError(f"unknown defense {self.defense!r}")
        if self.attack_method not in attack_mod.METHODS:
            raise ConfigError(f"unknown attack method {self.attack_method!r}")
        if self.target_count < 1:
            raise ConfigError("target_count must be >= 1")
        if self.target_mode not in ("shared", "independent", "extra_community"):
            raise ConfigError(f"unknown target mode {self.target_mode!r}")


@dataclass(frozen=True)
class TrajectoryRow:
    trial: int
    iteration: int
    l_d: float
    l_e: float
    l_s: float
    total: float
    z_min: float
    normalized: float

    def as_tuple(self):
        return (
            self.trial,
            self.iteration,
            self.l_d,
            self.l_e,
            self.l_s,
            self.total,
            self.z_min,
            self.normalized,
        )


@dataclass
class TrialResult:
    trial: int
    lower_bound: float
    rows: list[TrajectoryRow] = field(default_factory=list)
    error: str | None = None

    @property
    def final(self) -> TrajectoryRow | None:
        return self.rows[-1] if self.rows else None


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    trials: list[TrialResult]

    @property
    def completed(self) -> list[TrialResult]:
        return [t for t in self.trials if t.error is None and t.rows]

    def aggregate(self) -> dict:
        finals = [t.final for t in self.completed]
        norm = [row.normalized for row in finals]
        z = [row.z_min for row in finals]
        total = [row.total for row in finals]
        out = {
            "trials": len(self.trials),
            "completed": len(finals),
            "failed": len(self.trials) - len(finals),
        }
        if finals:
            out.update(
                mean_normalized=float(np.mean(norm)),
                min_normalized=float(np.min(norm)),
                max_normalized=float(np.max(norm)),
                stderr_normalized=_stderr(norm),
                mean_total=float(np.mean(total)),
                stderr_total=_stderr(total),
                mean_final_z=float(np.mean(z)),
                max_final_z=float(np.max(z)),
            )
        return out


def _stderr(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _sub_seed(seed: int, *parts: int) -> int:
    out = seed & 0xFFFFFFFF
    for p in parts:
        out = (out * 1000003 + p + 1) & 0xFFFFFFFFFFFF
    return out


def derive_budget_dist(
    g: Graph,
    w: WeightVector,
    c: CostVector,
    targets: TargetPathDist,
    method: str = attack_mod.LP,
    seed: int = 0,
    scale: float = 1.0,
) -> BudgetDist:
    """Poisson budget at (scaled) mean attack cost over the clean graph;
    degenerates to a point mass at 0 when no attack removes anything."""
    costs = []
    for idx, (p_star, _) in enumerate(targets.entries):
        res = attack_mod.attack(g, w, c, p_star, method=method, seed=_sub_seed(seed, idx))
        costs.append(res.solution_cost if not math.isinf(res.solution_cost) else 0.0)
    rate = scale * (sum(costs) / len(costs)) if costs else 0.0
    if rate <= 0.0:
        return BudgetDist.point_mass(0)
    return BudgetDist.poisson(rate)


def derive_lambda(g: Graph, w: WeightVector, tm: ThreatModel, scale: float = 1.0) -> float:
    """Half the no-attack, no-perturbation user cost, optionally scaled."""
    return 0.5 * costs_mod.lower_bound_cost(g, w, tm) * scale


def _sample_terminals(g, w, count: int, rng, shared: bool) -> list[tuple[int, int]]:
    """Ordered terminal pairs with enough simple paths for rank selection.

    Shared mode draws one pair that supports all requested ranks (at least
    13 simple paths once 4+ targets are in play); independent mode draws one
    rank-5-capable pair per target.
    """
    if shared:
        threshold = max(3 + 2 * count, 13 if count >= 4 else 0)
        wanted = 1
    else:
        threshold = 5
        wanted = count
    n = g.node_count
    pairs = []
    attempts = 0
    while len(pairs) < wanted:
        attempts += 1
        if attempts > 2000:
            raise ConfigError("could not find terminal pairs with enough simple paths")
        s = int(rng.integers(n))
        t = int(rng.integers(n))
        if s == t:
            continue
        ranked = datasets.k_shortest_paths(g, w, s, t, threshold)
        if len(ranked) < threshold:
            continue
        pairs.append((s, t))
    return pairs


def _build_targets(g, w, cfg: ExperimentConfig, rng, spec) -> TargetPathDist:
    if cfg.target_mode == "extra_community":
        if spec is None or spec.family != datasets.SBM:
            raise ConfigError("extra-community targets need an SBM generator")
        communities = datasets.sbm_communities(spec)
        paths = [
            datasets.select_extra_community_path(g, w, communities, int(rng.integers(2**32)))
            for _ in range(cfg.target_count)
        ]
        return TargetPathDist.from_paths(paths)
    if cfg.target_mode == "shared":
        (s, t) = _sample_terminals(g, w, cfg.target_count, rng, shared=True)[0]
        return datasets.select_target_paths(g, w, s, t, cfg.target_count)
    pairs = _sample_terminals(g, w, cfg.target_count, rng, shared=False)
    paths = []
    for s, t in pairs:
        paths.extend(datasets.select_target_paths(g, w, s, t, 1).support)
    return TargetPathDist.from_paths(paths)


def _load_graph(cfg: ExperimentConfig, trial_seed: int):
    if cfg.generator is not None:
        spec = replace(cfg.generator, seed=trial_seed)
        g, w, c = datasets.generate(spec)
        return g, w, c, spec
    loaded = datasets.load_edge_list(cfg.edge_list)
    return loaded.graph, loaded.weights, loaded.costs, None


def run_trial(cfg: ExperimentConfig, trial: int) -> TrialResult:
    trial_seed = _sub_seed(cfg.seed, trial)
    result = TrialResult(trial=trial, lower_bound=math.nan)
    try:
        g, w, c, spec = _load_graph(cfg, trial_seed)
        rng = np.random.default_rng((cfg.seed, trial, 7))
        targets = _build_targets(g, w, cfg, rng, spec)
        pair_dist = build_experiment_pair_dist(g, w, targets)
        budget = derive_budget_dist(
            g, w, c, targets, method=cfg.attack_method, seed=trial_seed, scale=cfg.budget_scale
        )
        base_tm = ThreatModel(
            pair_dist=pair_dist,
            target_dist=targets,
            budget_dist=budget,
            lam=0.0,
            f_plus=cfg.f_plus,
            f_minus=cfg.f_minus,
        )
        lam = derive_lambda(g, w, base_tm, scale=cfg.lambda_scale)
        tm = ThreatModel(
            pair_dist=pair_dist,
            target_dist=targets,
            budget_dist=budget,
            lam=lam,
            f_plus=cfg.f_plus,
            f_minus=cfg.f_minus,
        )
        lower = costs_mod.lower_bound_cost(g, w, tm)
        result.lower_bound = lower

        def row(iteration: int, breakdown, z_value: float) -> TrajectoryRow:
            return TrajectoryRow(
                trial=trial,
                iteration=iteration,
                l_d=breakdown.l_d,
                l_e=breakdown.l_e,
                l_s=breakdown.l_s,
                total=breakdown.total,
                z_min=z_value,
                normalized=breakdown.total / lower,
            )

        baseline = costs_mod.compute_cost(
            g, w, w, c, tm, method=cfg.attack_method, seed=trial_seed
        )
        result.rows.append(row(0, baseline, 1.0 - baseline.z_empty))

        if cfg.defense == "none":
            return result
        if cfg.defense == "bigweight":
            w_pub = defense_mod.bigweight(g, w, targets)
            final = costs_mod.compute_cost(
                g, w, w_pub, c, tm, method=cfg.attack_method, seed=trial_seed
            )
            result.rows.append(row(1, final, 1.0 - final.z_empty))
            return result
        if cfg.defense == "zerosum":
            w_pub = zerosum.feasible_point_multi(
                g, w, c, targets, budget, method=cfg.attack_method, seed=trial_seed
            )
            final = costs_mod.compute_cost(
                g, w, w_pub, c, tm, method=cfg.attack_method, seed=trial_seed
            )
            result.rows.append(row(1, final, 1.0 - final.z_empty))
            return result
        dcfg = defense_mod.DefenseConfig(
            eps_cost=cfg.eps_cost,
            eps_attack=cfg.eps_attack,
            max_iters=cfg.max_iters,
            attack_method=cfg.attack_method,
            seed=trial_seed,
        )
        _, trace = defense_mod.pathdefense(g, w, c, tm, dcfg)
        for rec in trace.records:
            breakdown = costs_mod.CostBreakdown(
                l_d=rec.l_d, l_e=rec.l_e, l_s=rec.l_s, total=rec.total, z={}, z_empty=1.0 - rec.z_min
            )
            result.rows.append(row(rec.iteration, breakdown, rec.z_min))
        return result
    except Exception as exc:  # noqa: BLE001 - a trial failure is data
        result.error = f"{type(exc).__name__}: {exc}"
        return result


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    trials = [run_trial(cfg, j) for j in range(cfg.trials)]
    return ExperimentReport(config=cfg, trials=trials)
