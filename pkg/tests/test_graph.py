import itertools

import numpy as np
import pytest
import scipy.sparse as sp

from nehari import (
    GraphError,
    GraphFunction,
    WeightedGraph,
    check_potential_growth,
    check_summability,
    diameter,
    ell1_embedding_constant,
    example_line_graph,
    line_graph_family,
    path_graph,
    path_metric,
    poincare_check,
    random_connected_graph,
    validate_graph,
)
from nehari.graph import TruncationFamily


def brute_force_distance(g, x, y):
    """Oracle: exhaustive simple-path enumeration."""
    ix, iy = g.index(x), g.index(y)
    n = g.n
    adj = {i: [] for i in range(n)}
    coo = g.b.tocoo()
    for i, j, w in zip(coo.row, coo.col, coo.data):
        adj[int(i)].append((int(j), 1.0 / w))
    best = [np.inf]

    def walk(node, seen, length):
        if node == iy:
            best[0] = min(best[0], length)
            return
        for nxt, step in adj[node]:
            if nxt not in seen:
                walk(nxt, seen | {nxt}, length + step)

    walk(ix, {ix}, 0.0)
    return best[0]


class TestValidation:
    def test_two_vertex_all_pass(self):
        g = WeightedGraph.from_edges([1, 2], 1.0, [(1, 2, 1.0)], c=0.0)
        report = validate_graph(g)
        assert report.passed
        assert np.allclose(g.V, 1.0)

    def test_asymmetric_weights_fail(self):
        b = sp.csr_matrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
        g = WeightedGraph((1, 2), np.ones(2), b, np.zeros(2))
        report = validate_graph(g)
        assert not report.passed
        assert not report["symmetric"].ok

    def test_line_graph_truncation_passes(self):
        report = validate_graph(example_line_graph(3, 3))
        assert report.passed

    def test_negative_measure_and_killing(self):
        g = WeightedGraph((0,), np.array([-1.0]), sp.csr_matrix((1, 1)), np.array([0.0]))
        assert not validate_graph(g)["positive_measure"].ok
        g2 = WeightedGraph((0,), np.array([1.0]), sp.csr_matrix((1, 1)), np.array([-0.5]))
        report = validate_graph(g2)
        assert not report["nonnegative_killing"].ok
        assert not report["potential_at_least_one"].ok

    def test_disconnected_flagged(self):
        g = WeightedGraph.from_edges([0, 1, 2], 1.0, [(0, 1, 1.0)])
        assert not validate_graph(g)["connected"].ok

    def test_from_edges_rejections(self):
        with pytest.raises(GraphError):
            WeightedGraph.from_edges([0, 1], 1.0, [(0, 1, 1.0), (1, 0, 2.0)])
        with pytest.raises(GraphError):
            WeightedGraph.from_edges([0, 1], 1.0, [(0, 0, 1.0)])
        with pytest.raises(GraphError):
            WeightedGraph.from_edges([0, 1], 1.0, [(0, 1, -1.0)])
        with pytest.raises(GraphError):
            WeightedGraph.from_edges([0, 1], 1.0, [], c=1.0, V=2.0)
        with pytest.raises(GraphError, match="V must be >= 1"):
            WeightedGraph.from_edges([0, 1], 1.0, [], V=0.5)


class TestPathMetric:
    def test_unit_weights(self):
        g = WeightedGraph.from_edges([1, 2, 3], 1.0, [(1, 2, 1.0), (2, 3, 1.0)])
        assert path_metric(g, 1, 3) == pytest.approx(2.0)

    def test_weighted_example(self):
        g = WeightedGraph.from_edges([1, 2, 3], 1.0, [(1, 2, 2.0), (2, 3, 4.0)])
        assert path_metric(g, 1, 3) == pytest.approx(brute_force_distance(g, 1, 3))
        assert path_metric(g, 1, 3) == pytest.approx(0.75)

    def test_disconnected_infinite(self):
        g = WeightedGraph.from_edges([0, 1, 2], 1.0, [(0, 1, 1.0)])
        assert path_metric(g, 0, 2) == np.inf

    def test_unknown_vertex(self):
        g = path_graph(2)
        with pytest.raises(GraphError):
            path_metric(g, 0, 99)

    def test_against_enumeration_oracle(self):
        for seed in range(4):
            g = random_connected_graph(7, seed=seed)
            for x, y in itertools.combinations(range(7), 2):
                assert path_metric(g, x, y) == pytest.approx(brute_force_distance(g, x, y), rel=1e-12)

    def test_metric_axioms_exhaustive(self):
        g = random_connected_graph(8, seed=3)
        d = {(x, y): path_metric(g, x, y) for x in range(8) for y in range(8)}
        for x in range(8):
            assert d[(x, x)] == 0.0
            for y in range(8):
                assert d[(x, y)] == pytest.approx(d[(y, x)], rel=1e-12)
                if x != y:
                    assert d[(x, y)] > 0
                for z in range(8):
                    assert d[(x, z)] <= d[(x, y)] + d[(y, z)] + 1e-12


class TestDiameter:
    def test_single_vertex(self, p3):
        assert diameter(p3, [0]) == 0.0

    def test_pair(self, p3):
        assert diameter(p3, [0, 2]) == pytest.approx(2.0)

    def test_empty_subset_errors(self, p3):
        with pytest.raises(GraphError):
            diameter(p3, [])

    def test_negative_half_partial_sums(self):
        # the negative half {-n..-1} spans edges b(z, z+1) = z^2 for z = -n..-2
        for n in (3, 6, 10):
            g = example_line_graph(n, 2)
            expect = sum(1.0 / z**2 for z in range(2, n + 1))
            assert diameter(g, range(-n, 0)) == pytest.approx(expect, abs=1e-12)
            expect0 = sum(1.0 / z**2 for z in range(1, n + 1))
            assert diameter(g, range(-n, 1)) == pytest.approx(expect0, abs=1e-12)


class TestSummability:
    def test_path_both_orientations(self, p3):
        assert check_summability(p3, [0, 1, 2]) == pytest.approx(4.0)

    def test_single_vertex_zero(self, p3):
        assert check_summability(p3, [1]) == 0.0

    def test_negative_half(self):
        g = example_line_graph(8, 2)
        expect = 2.0 * sum(1.0 / z**2 for z in range(2, 9))
        assert check_summability(g, range(-8, 0)) == pytest.approx(expect, rel=1e-14)

    def test_disconnected_subset_names_cut(self, p3):
        with pytest.raises(GraphError, match="disconnected"):
            check_summability(p3, [0, 2])

    def test_bounds_diameter(self, random_graphs):
        for g in random_graphs:
            total = check_summability(g)
            assert diameter(g) <= total + 1e-12


class TestPoincare:
    def test_constant_function(self, p3):
        lhs, rhs, ok = poincare_check(p3, [0, 1, 2], np.ones(3))
        assert lhs == 0.0 and ok

    def test_indicator_on_edge(self):
        g = path_graph(2)
        lhs, rhs, ok = poincare_check(g, [0, 1], np.array([1.0, 0.0]))
        assert lhs == pytest.approx(1.0)
        assert rhs == pytest.approx(np.sqrt(2.0))
        assert ok

    def test_random_property(self):
        rng = np.random.default_rng(0)
        for trial in range(100):
            g = random_connected_graph(20, seed=trial % 10)
            u = rng.standard_normal(20)
            subset = [v for v in range(20) if rng.random() < 0.6] or [0]
            _, _, ok = poincare_check(g, subset, u)
            assert ok


class TestPotentialGrowth:
    def test_line_family_matches_published_values(self):
        rows = check_potential_growth(line_graph_family(4), range(1, 11))
        for n, inf_v, m_k in zip(range(1, 11), (r[1] for r in rows), (r[2] for r in rows)):
            assert inf_v == pytest.approx(n + 1, rel=1e-12)
            assert np.isfinite(m_k)

    def test_constant_potential_stalls(self):
        fam = TruncationFamily(
            generate=lambda t: path_graph(t + 3),
            subset=lambda t: tuple(range(t + 1)),
        )
        rows = check_potential_growth(fam, range(1, 6))
        assert all(r[1] == pytest.approx(1.0) for r in rows)

    def test_quadratic_half_line_vs_bruteforce(self):
        def gen(t):
            n = t + 4
            ids = list(range(n))
            V = [max(1.0, float(i**2)) for i in ids]
            return WeightedGraph.from_edges(ids, 1.0, [(i, i + 1, 1.0) for i in range(n - 1)], V=V)

        fam = TruncationFamily(generate=gen, subset=lambda t: tuple(range(t + 1)))
        for t, inf_v, _ in check_potential_growth(fam, range(1, 8)):
            g = gen(t)
            outside = [i for i in g.vertices if i > t]
            brute = min(g.V[g.index(i)] for i in outside)
            assert inf_v == pytest.approx(brute)

    def test_empty_complement_errors(self):
        fam = TruncationFamily(
            generate=lambda t: path_graph(t),
            subset=lambda t: tuple(range(t)),
        )
        with pytest.raises(GraphError):
            check_potential_growth(fam, [2])

    def test_family_nesting(self):
        line_graph_family(4).validate_nesting(8)


class TestEll1Embedding:
    def test_full_vertex_set(self, p3):
        assert ell1_embedding_constant(p3, [0, 1, 2]) == pytest.approx(np.sqrt(3.0))

    def test_single_vertex_empty_k(self):
        g = WeightedGraph.from_edges([0], 1.0, [], c=3.0)
        assert ell1_embedding_constant(g, []) == pytest.approx(0.5)

    def test_bound_holds_on_random_inputs(self, random_graphs):
        rng = np.random.default_rng(1)
        for g in random_graphs:
            for _ in range(100):
                u = GraphFunction(g, rng.standard_normal(g.n))
                k = [v for v in g.vertices if rng.random() < 0.5]
                c_k = ell1_embedding_constant(g, k)
                assert u.lp_norm(1.0) <= c_k * u.energy_norm() * (1.0 + 1e-12)


class TestLineGraphExample:
    def test_edge_weights(self):
        g = example_line_graph(3, 3)
        assert g.b[g.index(0), g.index(1)] == 1.0
        assert g.b[g.index(1), g.index(2)] == 2.0
        assert g.b[g.index(-2), g.index(-1)] == 4.0

    def test_measure(self):
        g = example_line_graph(3, 3)
        assert g.m[g.index(0)] == 1.0
        assert g.m[g.index(-2)] == 0.25

    def test_potential(self):
        g = example_line_graph(3, 6)
        assert g.V[g.index(5)] == pytest.approx(5.0)
        assert g.V[g.index(-2)] == pytest.approx(1.0)
        assert g.V[g.index(0)] == pytest.approx(1.0)

    def test_paper_literal_variant_breaks_validity(self):
        g = example_line_graph(3, 3, paper_literal=True)
        assert g.V[g.index(-2)] == pytest.approx(0.0)
        assert not validate_graph(g).passed


class TestGraphFunction:
    def test_l2_below_energy_norm(self, random_graphs):
        rng = np.random.default_rng(2)
        for g in random_graphs:
            for _ in range(50):
                u = GraphFunction(g, rng.standard_normal(g.n))
                assert u.lp_norm(2.0) <= u.energy_norm() * (1.0 + 1e-12)

    def test_nonfinite_rejected(self, p3):
        with pytest.raises(GraphError):
            GraphFunction(p3, np.array([1.0, np.nan, 0.0]))

    def test_immutable(self, p3):
        u = GraphFunction(p3, np.ones(3))
        with pytest.raises(ValueError):
            u.values[0] = 2.0
