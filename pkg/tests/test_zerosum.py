import itertools

import numpy as np
import pytest

from pathdefense.attacks import OPTIMAL, optimal_attack
from pathdefense.dists import BudgetDist, TargetPathDist
from pathdefense.graphs import Path, WeightVector
from pathdefense.zerosum import (
    KnapsackInstance,
    feasible_point_multi,
    feasible_point_single,
    knapsack_construct,
    knapsack_dp_oracle,
    knapsack_reduce,
    min_attack_probability,
    read_knapsack_file,
)

from conftest import pick_target, random_connected_graph
from oracles import max_lengthening_attack_cost


class TestFeasiblePointSingle:
    def test_diamond_point_mass_budgets(self, diamond, diamond_target):
        g, w, c = diamond
        # Budget 2: first increment ties the public shortest path, making a
        # two-edge attack necessary; cost 2 is still affordable so the loop
        # runs on until the target is the only surviving path.
        out = feasible_point_single(g, w, c, diamond_target, BudgetDist.point_mass(2))
        assert out.values.tolist() == [1.0, 1.0, 3.0, 2.0, 5.0]
        res = optimal_attack(g, out, c, diamond_target)
        assert res.cost == 2.0  # affordable: probability stays 1
        # Budget 1: the same single increment already outprices the attacker.
        out1 = feasible_point_single(g, w, c, diamond_target, BudgetDist.point_mass(1))
        res1 = optimal_attack(g, out1, c, diamond_target)
        assert res1.cost > 1.0

    def test_no_rivals_leaves_weights_alone(self):
        from pathdefense.graphs import WeightedGraph

        g = WeightedGraph(3, [(0, 1), (1, 2)], directed=True)
        w = WeightVector([1.0, 1.0])
        c = WeightVector([1.0, 1.0])
        from pathdefense.graphs import CostVector

        p_star = Path.from_nodes(g, [0, 1, 2])
        out = feasible_point_single(g, w, CostVector([1.0, 1.0]), p_star, BudgetDist.point_mass(3))
        assert out.values.tolist() == [1.0, 1.0]

    def test_reduction_graph_single_item(self):
        art = knapsack_construct(KnapsackInstance((2,), (3,), 2, 1))
        out = feasible_point_single(art.graph, art.weights, art.costs, art.target, art.budget_dist)
        # One increment of the item weight on the chain edge forces the
        # detour cut (cost 2) past the budget of 1.
        assert out[art.chain_edge(1)] == art.weights[art.chain_edge(1)] + 3.0
        res = optimal_attack(art.graph, out, art.costs, art.target)
        assert res.cost == 2.0 > art.budget_dist.point

    def test_poisson_budget_stops_via_tail(self, diamond, diamond_target):
        g, w, c = diamond
        out = feasible_point_single(g, w, c, diamond_target, BudgetDist.poisson(0.01))
        res = optimal_attack(g, out, c, diamond_target)
        from pathdefense.dists import budget_tail

        # Either the tail dropped below the stopping threshold or no rival
        # path remained to lengthen against.
        assert budget_tail(BudgetDist.poisson(0.01), res.cost) < 1e-12 or res.cost == 2.0


class TestFeasiblePointMulti:
    def test_single_target_matches_single(self, diamond, diamond_target):
        g, w, c = diamond
        targets = TargetPathDist.from_paths([diamond_target])
        multi = feasible_point_multi(g, w, c, targets, BudgetDist.point_mass(1))
        single = feasible_point_single(g, w, c, diamond_target, BudgetDist.point_mass(1))
        assert multi.values.tolist() == single.values.tolist()

    def test_disjoint_targets_union_increments(self):
        from pathdefense.graphs import CostVector, WeightedGraph

        # Two separate diamonds glued into one graph.
        edges = [(0, 1), (1, 3), (0, 2), (2, 3), (0, 3), (4, 5), (5, 7), (4, 6), (6, 7), (4, 7)]
        g = WeightedGraph(8, edges, directed=True)
        w = WeightVector([1, 1, 1, 2, 5, 1, 1, 1, 2, 5])
        c = CostVector([1.0] * 10)
        t1 = Path.from_nodes(g, [0, 2, 3])
        t2 = Path.from_nodes(g, [4, 6, 7])
        targets = TargetPathDist.from_paths([t1, t2])
        multi = feasible_point_multi(g, w, c, targets, BudgetDist.point_mass(1))
        s1 = feasible_point_single(g, w, c, t1, BudgetDist.point_mass(1))
        s2 = feasible_point_single(g, w, c, t2, BudgetDist.point_mass(1))
        expected = w.values + (s1.values - w.values) + (s2.values - w.values)
        assert multi.values.tolist() == expected.tolist()

    def test_identical_targets_processed_twice(self, diamond, diamond_target):
        g, w, c = diamond
        targets = TargetPathDist.from_paths([diamond_target, diamond_target], [0.5, 0.5])
        multi = feasible_point_multi(g, w, c, targets, BudgetDist.point_mass(1))
        # Second pass finds the attack already too expensive; weights match
        # the single-target run.
        single = feasible_point_single(g, w, c, diamond_target, BudgetDist.point_mass(1))
        assert multi.values.tolist() == single.values.tolist()


class TestMinAttackProbability:
    def test_diamond_budget_one(self, diamond, diamond_target):
        g, w, c = diamond
        targets = TargetPathDist.from_paths([diamond_target])
        assert min_attack_probability(g, w, c, targets, BudgetDist.point_mass(1)) == 0.0

    def test_no_budget(self, diamond, diamond_target):
        g, w, c = diamond
        targets = TargetPathDist.from_paths([diamond_target])
        assert min_attack_probability(g, w, c, targets, BudgetDist.point_mass(0)) == 0.0

    def test_no_rivals_is_zero(self):
        from pathdefense.graphs import CostVector, WeightedGraph

        g = WeightedGraph(3, [(0, 1), (1, 2)], directed=True)
        w = WeightVector([1.0, 1.0])
        p_star = Path.from_nodes(g, [0, 1, 2])
        targets = TargetPathDist.from_paths([p_star])
        out = min_attack_probability(g, w, CostVector([1.0, 1.0]), targets, BudgetDist.point_mass(5))
        assert out == 0.0


class TestTheoremThreeProperty:
    def test_outprices_budget_whenever_lengthening_can(self):
        rng = np.random.default_rng(307)
        done = 0
        while done < 20:
            g, w, c = random_connected_graph(rng, max_n=6, max_m=10, directed=False)
            p_star, _, _ = pick_target(rng, g, w, among=3)
            b = int(rng.integers(1, 4))
            out = feasible_point_single(g, w, c, p_star, BudgetDist.point_mass(b))
            res = optimal_attack(g, out, c, p_star)
            ceiling = max_lengthening_attack_cost(
                g.node_count, g.edges, g.directed, w.values, c.values, p_star.nodes
            )
            if ceiling > b:
                assert res.cost > b, "probability floor of zero was reachable but missed"
            else:
                assert res.cost <= b
                # The procedure ends with every rival cut: the target is the
                # only surviving route.
                from pathdefense.attacks import is_unique_shortest
                from pathdefense.graphs import apply_cut
                from pathdefense.graphs import second_shortest_excluding

                post = apply_cut(g, res.cut)
                assert second_shortest_excluding(post, out, p_star.source, p_star.dest, p_star) is None
            done += 1

    def test_iterations_strictly_lengthen_target(self, diamond, diamond_target):
        g, w, c = diamond
        out = feasible_point_single(g, w, c, diamond_target, BudgetDist.point_mass(2))
        from pathdefense.graphs import path_length

        assert path_length(g, out, diamond_target) > path_length(g, w, diamond_target)


class TestKnapsackConstruct:
    def test_smallest_instance(self):
        art = knapsack_construct(KnapsackInstance((2,), (1,), 1, 1))
        assert art.graph.node_count == 3 and art.graph.edge_count == 3
        assert art.target.nodes == (0, 1)

    def test_worked_example(self):
        art = knapsack_construct(KnapsackInstance((3, 4), (2, 3), 4, 3))
        assert art.budget_dist.point == 3.0
        assert art.f_minus == 5.0
        assert art.graph.node_count == 5 and art.graph.edge_count == 6
        # Chain edges weigh 1 each.
        assert sum(art.weights[art.chain_edge(i)] for i in (1, 2)) == 2.0
        # Detour edge costs carry the item values.
        left, right = art.detour_edges(2)
        assert art.costs[left] == 4.0 and art.costs[right] == 4.0

    def test_bottom_path_weight_is_item_count(self):
        for n in (1, 2, 4):
            inst = KnapsackInstance(tuple([2] * n), tuple([1] * n), 2, 1)
            art = knapsack_construct(inst)
            total = sum(art.weights[art.chain_edge(i)] for i in range(1, n + 1))
            assert total == float(n)


class TestKnapsackReduce:
    def test_worked_examples(self):
        yes = KnapsackInstance((3, 4), (2, 3), 4, 3)
        no = KnapsackInstance((3, 4), (2, 3), 7, 4)
        assert knapsack_reduce(yes, exact_defense=True) is True
        assert knapsack_dp_oracle(yes) is True
        assert knapsack_reduce(no, exact_defense=True) is False
        assert knapsack_dp_oracle(no) is False

    def test_single_item_suffices(self):
        inst = KnapsackInstance((1, 5), (2, 2), 1, 2)
        assert knapsack_reduce(inst, exact_defense=True) is True

    def test_take_everything(self):
        inst = KnapsackInstance((2, 2), (1, 1), 4, 2)
        assert knapsack_reduce(inst, exact_defense=True) is (sum((2, 2)) >= 4)

    def test_agreement_small_sweep(self):
        for n in (1, 2, 3):
            for values in itertools.product((1, 2, 3), repeat=n):
                for weights in itertools.product((1, 2, 3), repeat=n):
                    for u in range(1, sum(values) + 1):
                        for h in range(1, sum(weights) + 1):
                            inst = KnapsackInstance(values, weights, u, h)
                            assert knapsack_reduce(inst, exact_defense=True) == knapsack_dp_oracle(inst)

    def test_heuristic_mode_runs_the_pipeline(self):
        inst = KnapsackInstance((2,), (3,), 2, 3)
        # A single item is an easy instance: the heuristic perturbs exactly
        # that item's chain edge.
        assert knapsack_reduce(inst, exact_defense=False) is True
        assert knapsack_dp_oracle(inst) is True


class TestLemmaOneCutCondition:
    def test_cut_iff_chain_edge_at_least_detour(self):
        rng = np.random.default_rng(311)
        for _ in range(10):
            n = int(rng.integers(1, 4))
            values = tuple(int(v) for v in rng.integers(1, 4, n))
            weights = tuple(int(h) for h in rng.integers(1, 4, n))
            inst = KnapsackInstance(values, weights, max(1, sum(values) - 1), max(1, sum(weights) - 1))
            art = knapsack_construct(inst)
            for selection in itertools.product((0, 1), repeat=n):
                wv = art.weights.values.copy()
                for i in range(1, n + 1):
                    if selection[i - 1]:
                        wv[art.chain_edge(i)] += weights[i - 1]
                res = optimal_attack(art.graph, WeightVector(wv), art.costs, art.target)
                expected_cost = sum(v for v, sel in zip(values, selection) if sel)
                assert res.cost == pytest.approx(float(expected_cost))
                for i in range(1, n + 1):
                    left, right = art.detour_edges(i)
                    chain = art.chain_edge(i)
                    condition = wv[chain] >= wv[left] + wv[right]
                    hit = bool(res.cut.edges & {left, right})
                    assert hit == condition == bool(selection[i - 1])


class TestInstanceFile:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("2\n3 2\n4 3\n4 3\n", encoding="utf-8")
        inst = read_knapsack_file(path)
        assert inst == KnapsackInstance((3, 4), (2, 3), 4, 3)

    def test_bad_count(self, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("3\n3 2\n4 3\n4 3\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_knapsack_file(path)

    def test_bad_item_line(self, tmp_path):
        path = tmp_path / "inst.txt"
        path.write_text("1\n3\n4 3\n", encoding="utf-8")
        with pytest.raises(ValueError):
            read_knapsack_file(path)
