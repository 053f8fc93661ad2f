"""Threat-model distributions: target paths, attacker budgets, user pairs.

The budget distribution enters every attack-probability computation through
its survival function Pr[B >= threshold]; target paths carry explicit
probabilities whose residual mass means "no target"; the pair distribution
weights the per-user cost terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from pathdefense.graphs import Graph, Path, WeightVector, shortest_path

_SUM_TOL = 1e-12
_PMF_CUTOFF = 1e-15


@dataclass(frozen=True)
class BudgetDist:
    """Distribution of the attacker's budget.

    One of Poisson(rate), a point mass, or an explicit table of
    (budget, probability) entries.
    """

    kind: str
    rate: float = 0.0
    point: float = 0.0
    table: tuple[tuple[float, float], ...] = ()

    @classmethod
    def poisson(cls, rate: float) -> "BudgetDist":
        if rate < 0:
            raise ValueError("rate must be nonnegative")
        return cls(kind="poisson", rate=float(rate))

    @classmethod
    def point_mass(cls, b: float) -> "BudgetDist":
        if b < 0:
            raise ValueError("budget must be nonnegative")
        return cls(kind="point", point=float(b))

    @classmethod
    def from_table(cls, entries: Iterable[tuple[float, float]]) -> "BudgetDist":
        table = tuple((float(b), float(p)) for b, p in entries)
        if any(b < 0 for b, _ in table):
            raise ValueError("budgets must be nonnegative")
        if any(p < 0 for _, p in table):
            raise ValueError("probabilities must be nonnegative")
        total = math.fsum(p for _, p in table)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"table probabilities sum to {total}, expected 1")
        return cls(kind="table", table=table)

    @property
    def max_support(self) -> float:
        """Largest budget with positive probability; inf when unbounded."""
        if self.kind == "poisson":
            return math.inf
        if self.kind == "point":
            return self.point
        return max((b for b, p in self.table if p > 0), default=0.0)


def budget_tail(b_dist: BudgetDist, threshold: float) -> float:
    """Pr[B >= threshold]. An infinite threshold (no viable attack) gives 0."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if math.isinf(threshold):
        return 0.0
    if b_dist.kind == "point":
        return 1.0 if b_dist.point >= threshold else 0.0
    if b_dist.kind == "table":
        return math.fsum(p for b, p in b_dist.table if b >= threshold)
    # Poisson: sum pmf terms below the threshold, stop once they vanish,
    # then complement.
    rate = b_dist.rate
    k = math.ceil(threshold)
    if k <= 0:
        return 1.0
    term = math.exp(-rate)
    acc = 0.0
    i = 0
    while i < k:
        if term < _PMF_CUTOFF and i > rate:
            break
        acc += term
        i += 1
        term *= rate / i
    return max(0.0, 1.0 - acc)


@dataclass(frozen=True)
class TargetPathDist:
    """Distribution over target paths; leftover mass means no target."""

    entries: tuple[tuple[Path, float], ...]

    def __post_init__(self):
        total = math.fsum(p for _, p in self.entries)
        if any(p <= 0 for _, p in self.entries):
            raise ValueError("target probabilities must be positive")
        if total > 1.0 + _SUM_TOL:
            raise ValueError(f"target probabilities sum to {total} > 1")

    @classmethod
    def from_paths(cls, paths: Iterable[Path], probs: Iterable[float] | None = None) -> "TargetPathDist":
        paths = list(paths)
        if probs is None:
            probs = [1.0 / len(paths)] * len(paths) if paths else []
        return cls(tuple(zip(paths, probs)))

    @property
    def support(self) -> list[Path]:
        return [p for p, _ in self.entries]

    @property
    def total_mass(self) -> float:
        return math.fsum(p for _, p in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class PairDist:
    """Source-destination distribution.

    Either an explicit map over ordered pairs, or the on-path mixture used
    in the experiments: probability ``mix`` spread uniformly over ordered
    pairs inside ``on_set`` and the rest spread over all other ordered
    pairs. If no pair lies outside the set, all mass goes inside.
    """

    kind: str
    explicit: tuple[tuple[tuple[int, int], float], ...] = ()
    on_set: frozenset[int] = frozenset()
    mix: float = 0.5

    @classmethod
    def from_map(cls, probs: dict[tuple[int, int], float]) -> "PairDist":
        entries = tuple(sorted((tuple(k), float(v)) for k, v in probs.items()))
        if any(u == v for (u, v), _ in entries):
            raise ValueError("diagonal pairs are not allowed")
        if any(p < 0 for _, p in entries):
            raise ValueError("pair probabilities must be nonnegative")
        total = math.fsum(p for _, p in entries)
        if abs(total - 1.0) > _SUM_TOL:
            raise ValueError(f"pair probabilities sum to {total}, expected 1")
        return cls(kind="explicit", explicit=entries)

    @classmethod
    def on_path_mixture(cls, on_set: Iterable[int], mix: float = 0.5) -> "PairDist":
        if not 0.0 <= mix <= 1.0:
            raise ValueError("mix must be a probability")
        return cls(kind="mixture", on_set=frozenset(int(v) for v in on_set), mix=mix)


def _mixture_sizes(d: PairDist, n: int) -> tuple[int, int]:
    on = sum(1 for v in d.on_set if 0 <= v < n)
    inside = on * (on - 1)
    outside = n * (n - 1) - inside
    return inside, outside


def pair_prob(d: PairDist, u: int, v: int, universe: Graph) -> float:
    """q_uv, the probability a random user travels from u to v."""
    if u == v:
        raise ValueError("diagonal pair has no probability")
    if d.kind == "explicit":
        for (a, b), p in d.explicit:
            if (a, b) == (u, v):
                return p
        return 0.0
    n = universe.node_count
    inside, outside = _mixture_sizes(d, n)
    in_a = u in d.on_set and v in d.on_set
    if outside == 0:
        return (1.0 / inside if inside else 0.0) if in_a else 0.0
    if in_a:
        return d.mix / inside if inside else 0.0
    return (1.0 - d.mix) / outside


def support_pairs(d: PairDist, universe: Graph) -> Iterator[tuple[int, int, float]]:
    """Deterministic iteration over (u, v, q_uv) with q_uv > 0."""
    if d.kind == "explicit":
        for (u, v), p in d.explicit:
            if p > 0:
                yield u, v, p
        return
    n = universe.node_count
    inside, outside = _mixture_sizes(d, n)
    for u in range(n):
        for v in range(n):
            if u == v:
                continue
            in_a = u in d.on_set and v in d.on_set
            if outside == 0:
                if in_a and inside:
                    yield u, v, 1.0 / inside
                continue
            if in_a:
                if d.mix > 0 and inside:
                    yield u, v, d.mix / inside
            elif d.mix < 1:
                yield u, v, (1.0 - d.mix) / outside


@dataclass(frozen=True)
class ThreatModel:
    """Everything the defender assumes about users and the attacker."""

    pair_dist: PairDist
    target_dist: TargetPathDist
    budget_dist: BudgetDist
    lam: float = 0.0
    f_plus: float = 1.0
    f_minus: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("attack-success cost must be nonnegative")
        if self.f_plus <= 0 or self.f_minus <= 0:
            raise ValueError("marginal error costs must be positive")


def build_experiment_pair_dist(g: Graph, w: WeightVector, targets: TargetPathDist) -> PairDist:
    """On-path mixture whose inside set covers every target path plus the
    true-weight shortest path between each target's terminals."""
    if not targets.entries:
        raise ValueError("targets must be nonempty")
    on: set[int] = set()
    for p, _ in targets.entries:
        on.update(p.nodes)
        sp, _ = shortest_path(g, w, p.source, p.dest)
        on.update(sp.nodes)
    return PairDist.on_path_mixture(on, 0.5)


def observed_graph_prob(
    attack_cost_by_target: dict[int, float],
    target_dist: TargetPathDist,
    budget_dist: BudgetDist,
) -> tuple[dict[int, float], float]:
    """Per-target attack probabilities and the leftover no-attack mass.

    ``attack_cost_by_target`` maps the index of each support target to its
    optimal attack cost (inf when no viable attack exists).
    """
    z: dict[int, float] = {}
    for idx, (_, prob) in enumerate(target_dist.entries):
        if idx not in attack_cost_by_target:
            raise ValueError(f"missing attack cost for target {idx}")
        z[idx] = prob * budget_tail(budget_dist, attack_cost_by_target[idx])
    z_empty = 1.0 - math.fsum(z.values())
    return z, z_empty
