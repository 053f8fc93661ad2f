import numpy as np
import pytest

from pathdefense.attacks import (
    GREEDY,
    LP,
    OPTIMAL,
    attack,
    competitors,
    greedy_cost_attack,
    is_unique_shortest,
    optimal_attack,
    pathattack_lp,
    repair_connectivity,
)
from pathdefense.dists import BudgetDist
from pathdefense.graphs import (
    CostVector,
    EdgeCut,
    Path,
    WeightedGraph,
    WeightVector,
    apply_cut,
    connected_components,
)

from conftest import pick_target, random_connected_graph
from oracles import attack_feasible, exhaustive_min_attack


class TestCompetitors:
    def test_diamond_no_cut(self, diamond, diamond_target):
        g, w, _ = diamond
        got = [p.nodes for p in competitors(g, w, diamond_target)]
        assert got == [(0, 1, 3)]

    def test_diamond_after_cut(self, diamond, diamond_target):
        g, w, c = diamond
        got = competitors(g, w, diamond_target, EdgeCut.from_edges([0], c))
        assert got == []

    def test_strictly_shortest_target(self, diamond):
        g, w, _ = diamond
        p_star = Path.from_nodes(g, [0, 1, 3])
        assert competitors(g, w, p_star) == []

    def test_includes_ties(self):
        g = WeightedGraph(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
        w = WeightVector([1, 1, 1, 1])
        p_star = Path.from_nodes(g, [0, 2, 3])
        assert [p.nodes for p in competitors(g, w, p_star)] == [(0, 1, 3)]

    def test_cut_overlapping_target_rejected(self, diamond, diamond_target):
        g, w, c = diamond
        with pytest.raises(ValueError):
            competitors(g, w, diamond_target, EdgeCut.from_edges([2], c))


class TestIsUniqueShortest:
    def test_diamond_with_cut(self, diamond, diamond_target):
        g, w, c = diamond
        assert is_unique_shortest(g, w, diamond_target, EdgeCut.from_edges([0], c))

    def test_diamond_without_cut(self, diamond, diamond_target):
        g, w, _ = diamond
        assert not is_unique_shortest(g, w, diamond_target)

    def test_tie_is_not_unique(self):
        g = WeightedGraph(4, [(0, 1), (1, 3), (0, 2), (2, 3)])
        w = WeightVector([1, 1, 1, 1])
        p_star = Path.from_nodes(g, [0, 2, 3])
        assert not is_unique_shortest(g, w, p_star)


class TestGreedy:
    def test_diamond(self, diamond, diamond_target):
        g, w, c = diamond
        res = greedy_cost_attack(g, w, c, diamond_target)
        assert res.feasible and res.cost == 1.0
        assert res.cut.edges == {0}  # lowest edge index among unit-cost ties

    def test_already_unique(self, diamond):
        g, w, c = diamond
        res = greedy_cost_attack(g, w, c, Path.from_nodes(g, [0, 1, 3]))
        assert res.feasible and res.cut.edges == frozenset() and res.cost == 0.0

    def test_triangle_tie(self):
        # Direct edge ties the two-hop target; the attacker cuts the direct
        # edge at its stated cost.
        g = WeightedGraph(3, [(0, 2), (0, 1), (1, 2)])
        w = WeightVector([2.0, 1.0, 1.0])
        c = CostVector([5.0, 1.0, 1.0])
        p_star = Path.from_nodes(g, [0, 1, 2])
        res = greedy_cost_attack(g, w, c, p_star)
        assert res.feasible and res.cut.edges == {0} and res.cost == 5.0


class TestLpAttack:
    def test_diamond_integral(self, diamond, diamond_target):
        g, w, c = diamond
        res = pathattack_lp(g, w, c, diamond_target, seed=5)
        assert res.feasible and res.cost == 1.0

    def test_already_unique(self, diamond):
        g, w, c = diamond
        res = pathattack_lp(g, w, c, Path.from_nodes(g, [0, 1, 3]), seed=5)
        assert res.feasible and res.cut.edges == frozenset()

    def test_deterministic_under_seed(self, diamond, diamond_target):
        g, w, c = diamond
        a = pathattack_lp(g, w, c, diamond_target, seed=11)
        b = pathattack_lp(g, w, c, diamond_target, seed=11)
        assert a.cut.edges == b.cut.edges and a.cost == b.cost


class TestOptimal:
    def test_diamond(self, diamond, diamond_target):
        g, w, c = diamond
        res = optimal_attack(g, w, c, diamond_target)
        assert res.feasible and res.cost == 1.0
        assert res.cut.edges <= {0, 1}

    def test_diamond_perturbed(self, diamond, diamond_target):
        g, w, c = diamond
        res = optimal_attack(g, w.with_increment(2, 2.0), c, diamond_target)
        assert res.cost == 2.0
        assert 4 in res.cut.edges and (res.cut.edges & {0, 1})

    def test_already_unique(self, diamond):
        g, w, c = diamond
        res = optimal_attack(g, w, c, Path.from_nodes(g, [0, 1, 3]))
        assert res.cost == 0.0 and res.feasible


class TestOracleSuite:
    def test_methods_against_exhaustive_minimum(self):
        rng = np.random.default_rng(101)
        for trial in range(60):
            g, w, c = random_connected_graph(rng)
            p_star, s, t = pick_target(rng, g, w)
            res = optimal_attack(g, w, c, p_star)
            assert res.feasible
            oracle_cut, oracle_cost = exhaustive_min_attack(
                g.node_count, g.edges, g.directed, w.values, c.values, p_star.nodes
            )
            assert res.cost == pytest.approx(oracle_cost, abs=1e-9), f"trial {trial}"
            assert attack_feasible(g.node_count, g.edges, g.directed, w.values, p_star.nodes, res.cut.edges)
            assert not (res.cut.edges & p_star.edge_set())
            greedy = greedy_cost_attack(g, w, c, p_star)
            lp = pathattack_lp(g, w, c, p_star, seed=trial)
            assert greedy.cost >= res.cost - 1e-9
            assert lp.cost >= res.cost - 1e-9
            assert attack_feasible(g.node_count, g.edges, g.directed, w.values, p_star.nodes, greedy.cut.edges)
            assert attack_feasible(g.node_count, g.edges, g.directed, w.values, p_star.nodes, lp.cut.edges)

    def test_optimal_cut_has_no_useless_edge(self):
        rng = np.random.default_rng(103)
        for _ in range(25):
            g, w, c = random_connected_graph(rng)
            p_star, _, _ = pick_target(rng, g, w)
            res = optimal_attack(g, w, c, p_star)
            for e in res.cut.edges:
                smaller = res.cut.edges - {e}
                # Removing e from the cut must break feasibility, otherwise
                # the cut paid for an edge that deletes no competitor.
                assert not attack_feasible(
                    g.node_count, g.edges, g.directed, w.values, p_star.nodes, smaller
                )


class TestConnectivityRepair:
    def test_connected_cut_unchanged(self, diamond, diamond_target):
        g, w, c = diamond
        res = optimal_attack(g, w, c, diamond_target)
        assert repair_connectivity(g, res.cut, c).edges == res.cut.edges

    def test_star_leaves_restored(self):
        # Star around node 0; target is the 0-1 edge. Cutting every other
        # spoke isolates leaves, so repair puts them back.
        g = WeightedGraph(5, [(0, 1), (0, 2), (0, 3), (0, 4)])
        c = CostVector([1, 2, 3, 4])
        cut = EdgeCut.from_edges([1, 2, 3], c)
        repaired = repair_connectivity(g, cut, c)
        assert repaired.edges == frozenset()

    def test_idempotent(self):
        rng = np.random.default_rng(107)
        for _ in range(20):
            g, w, c = random_connected_graph(rng, directed=False)
            p_star, _, _ = pick_target(rng, g, w)
            res = greedy_cost_attack(g, w, c, p_star)
            once = repair_connectivity(g, res.cut, c)
            twice = repair_connectivity(g, once, c)
            assert once.edges == twice.edges

    def test_optimal_attacks_never_disconnect_undirected(self):
        rng = np.random.default_rng(109)
        for _ in range(40):
            g, w, c = random_connected_graph(rng, directed=False)
            p_star, _, _ = pick_target(rng, g, w)
            res = optimal_attack(g, w, c, p_star)
            post = apply_cut(g, res.cut)
            assert len(connected_components(post)) == 1
            assert repair_connectivity(g, res.cut, c).edges == res.cut.edges


class TestDispatch:
    def test_budget_allows_attack(self, diamond, diamond_target):
        g, w, c = diamond
        res = attack(g, w, c, diamond_target, OPTIMAL, budget_dist=BudgetDist.point_mass(1))
        assert res.feasible and not res.no_attack and res.cost == 1.0

    def test_budget_zero_blocks(self, diamond, diamond_target):
        g, w, c = diamond
        res = attack(g, w, c, diamond_target, OPTIMAL, budget_dist=BudgetDist.point_mass(0))
        assert res.no_attack and res.cut.edges == frozenset() and res.cost == 0.0
        assert res.solution_cost == 1.0

    def test_unbounded_budget_always_attacks(self, diamond, diamond_target):
        g, w, c = diamond
        res = attack(g, w, c, diamond_target, GREEDY, budget_dist=BudgetDist.poisson(0.5))
        assert not res.no_attack and res.feasible

    def test_unknown_method(self, diamond, diamond_target):
        g, w, c = diamond
        with pytest.raises(ValueError):
            attack(g, w, c, diamond_target, "quantum")

    def test_all_methods_feasible(self, diamond, diamond_target):
        g, w, c = diamond
        for method in (GREEDY, LP, OPTIMAL):
            res = attack(g, w, c, diamond_target, method, seed=3)
            assert res.feasible
            assert is_unique_shortest(g, w, diamond_target, res.cut)
