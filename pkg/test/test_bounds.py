import math
import unittest

import numpy as np

from hypothesis import given, settings, strategies as st

from pspectra.bounds import (
    OUTSIDE_HYPOTHESIS, TRUNCATION_NOTE, buser_test_function,
    buser_test_quotient, buser_upper_bounds, cheeger_lower_bound,
    classical_lower_bound, example2_comparison, example2_improvement_factor,
    full_report, max_degree, normalized_lower_bound
    )
from pspectra.cheeger import H0, H1
from pspectra.energy import GAP, rayleigh
from pspectra.graph import VertexSet, WeightedGraph
from pspectra.graph.generators import GeneratedGraph, GeneratorSpec, generate
from pspectra.metrics import constant_length, degree_metric


def k2() -> WeightedGraph:
    return WeightedGraph(['a', 'b'], [1.0, 1.0], [('a', 'b', 1.0)])


def path3() -> WeightedGraph:
    return WeightedGraph(['a', 'b', 'c'], [1.0, 1.0, 1.0],
                         [('a', 'b', 1.0), ('b', 'c', 1.0)])


class TestClosedForms(unittest.TestCase):

    def test_cheeger_lower_bound(self) -> None:
        self.assertEqual(cheeger_lower_bound(1.0, 2), 0.5)
        self.assertEqual(cheeger_lower_bound(1.0, 1), 1.0)
        self.assertAlmostEqual(cheeger_lower_bound(0.5, 3), 4 / 27 / 8)
        with self.assertRaises(ValueError):
            cheeger_lower_bound(-0.1, 2)

    def test_classical_and_normalized(self) -> None:
        self.assertEqual(classical_lower_bound(1.0, 2, 1.0), 0.5)
        self.assertEqual(normalized_lower_bound(1.0, 2), 0.5)
        self.assertEqual(classical_lower_bound(1.0, 2, 4.0), 0.125)

    def test_max_degree_convention(self) -> None:
        self.assertEqual(max_degree(path3()), (2.0, 'combinatorial'))
        weighted = WeightedGraph(['a', 'b'], [1.0, 1.0], [('a', 'b', 3.0)])
        self.assertEqual(max_degree(weighted), (3.0, 'weighted'))
        light = WeightedGraph(['a', 'b'], [0.5, 1.0], [('a', 'b', 1.0)])
        self.assertEqual(max_degree(light), (1.0, 'combinatorial'))
        classical = full_report(light, 2).rows[-1]
        self.assertEqual(classical.name, 'classical_gap')
        self.assertEqual(classical.note, OUTSIDE_HYPOTHESIS)
        self.assertFalse(classical.certified)
        self.assertEqual(classical.lhs, 2.0)

    def test_example2_improvement_factor(self) -> None:
        self.assertAlmostEqual(example2_improvement_factor(4, 9, 2), 2 / 9)
        self.assertEqual(example2_improvement_factor(4, 1, 1), 1.0)


class TestBuser(unittest.TestCase):

    def test_test_function(self) -> None:
        g = path3()
        f = buser_test_function(g, g.vertex_set(['a']))
        np.testing.assert_array_equal(f, [2.0, -1.0, -1.0])
        self.assertEqual(float(np.sum(g.measure * f)), 0.0)

    def test_k2_quotient(self) -> None:
        g = k2()
        for p in (1.0, 1.5, 2.0, 3.0):
            with self.subTest(p=p):
                self.assertAlmostEqual(
                    buser_test_quotient(g, g.vertex_set(['a']), p),
                    2 ** (p - 1))
        with self.assertRaises(ValueError):
            buser_test_quotient(g, g.vertex_set(['a', 'b']), 2)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10000),
           p=st.one_of(st.just(1.0), st.floats(1.1, 5.0)),
           bits=st.integers(1, 2 ** 7 - 2))
    def test_quotient_matches_the_rayleigh_quotient(self, seed: int,
                                                    p: float,
                                                    bits: int) -> None:
        g = generate(GeneratorSpec('erdos_renyi', n=7, prob=0.6, seed=seed,
                                   weights='random',
                                   measure='random')).graph
        W = VertexSet(g, [i for i in range(7) if bits >> i & 1])
        expected = rayleigh(g, buser_test_function(g, W), p, GAP).quotient
        assert math.isclose(buser_test_quotient(g, W, p), expected,
                            rel_tol=1e-7, abs_tol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10000), p=st.floats(1.0, 5.0),
           bits=st.integers(1, 2 ** 7 - 2))
    def test_quotient_is_below_the_upper_bound(self, seed: int, p: float,
                                               bits: int) -> None:
        g = generate(GeneratorSpec('erdos_renyi', n=7, prob=0.6, seed=seed,
                                   measure='random')).graph
        W = VertexSet(g, [i for i in range(7) if bits >> i & 1])
        if W.measure() > W.complement().measure():
            W = W.complement()
        boundary = float(np.sum(g.edge_weight[
            W.mask()[g.edge_u] != W.mask()[g.edge_v]]))
        bound = 2 ** (p - 1) * boundary / W.measure()
        assert buser_test_quotient(g, W, p) <= bound * (1 + 1e-12) + 1e-12

    def test_upper_bounds(self) -> None:
        g = k2()
        d = degree_metric(g, 2)
        self.assertEqual(buser_upper_bounds(g, d, H1, 2), 2.0)
        self.assertEqual(buser_upper_bounds(g, d, H1, 3), 4.0)
        self.assertEqual(buser_upper_bounds(g, d, H0, 2,
                                            g.vertex_set(['a'])), 1.0)
        self.assertEqual(buser_upper_bounds(g, d.scaled(0.5), H1, 2, h=1.0),
                         4.0)
        with self.assertLogs('pspectra.bounds', 'WARNING'):
            self.assertEqual(
                buser_upper_bounds(g, constant_length(g, 0.0), H1, 2),
                math.inf)


class TestFullReport(unittest.TestCase):

    def test_k2(self) -> None:
        report = full_report(k2(), 2)
        self.assertAlmostEqual(report.lambda_gap.lambda_estimate, 2.0)
        self.assertIsNone(report.lambda_ground)
        self.assertEqual([c.metric for c in report.constants],
                         ['degree', 'const:1.0'])
        self.assertTrue(all(c.in_rp for c in report.constants))
        self.assertEqual([c.h1.constant for c in report.constants],
                         [1.0, 1.0])
        self.assertEqual([row.name for row in report.rows],
                         ['cheeger_gap', 'buser_gap'] * 2
                         + ['classical_gap'])
        cheeger = report.rows[0]
        self.assertEqual(cheeger.lhs, 0.5)
        self.assertAlmostEqual(cheeger.rhs, 2.0)
        buser = report.rows[1]
        self.assertEqual(buser.rhs, 2.0)
        self.assertTrue(buser.certified)
        self.assertEqual((report.max_degree, report.max_degree_convention),
                         (1.0, 'combinatorial'))
        self.assertEqual(report.classical_lower, 0.5)
        self.assertEqual(report.intrinsic_to_classical, 1.0)
        self.assertFalse(report.escalated)
        self.assertTrue(report.passed)

    def test_lower_rows_only_for_admissible_lengths(self) -> None:
        g = k2()
        report = full_report(g, 2, metrics=[constant_length(g, 2.0)])
        self.assertFalse(report.constants[0].in_rp)
        self.assertEqual([row.name for row in report.rows],
                         ['buser_gap', 'classical_gap'])
        self.assertTrue(math.isnan(report.intrinsic_to_classical)
                        or report.intrinsic_to_classical == 0.0)

    def test_ground_rows(self) -> None:
        g = path3()
        report = full_report(g, 2, interior=g.vertex_set(['b']))
        self.assertAlmostEqual(report.lambda_ground.lambda_estimate, 2.0)
        ground = [row for row in report.rows
                  if row.name.endswith('_ground')]
        # the constant length is not in R_2 at the middle vertex
        self.assertEqual([row.name for row in ground],
                         ['cheeger_ground', 'buser_ground', 'buser_ground'])
        self.assertTrue(all(row.note == TRUNCATION_NOTE for row in ground))
        self.assertTrue(report.passed)

    @settings(max_examples=8, deadline=None)
    @given(seed=st.integers(0, 10000), p=st.floats(1.3, 3.5))
    def test_random_graphs_pass(self, seed: int, p: float) -> None:
        g = generate(GeneratorSpec('erdos_renyi', n=8, prob=0.6, seed=seed,
                                   weights='random',
                                   measure='random')).graph
        report = full_report(g, p, interior=VertexSet(g, [0, 1, 2]))
        assert report.passed, report.rows

    def test_normalizing_measure_gives_the_normalized_bound(self) -> None:
        g = generate(GeneratorSpec('cycle', n=7, seed=5, weights='random',
                                   measure='normalizing')).graph
        for p in (1.5, 2.0, 3.0):
            with self.subTest(p=p):
                report = full_report(g, p)
                intrinsic, unit = report.constants
                self.assertAlmostEqual(intrinsic.h1.constant,
                                       unit.h1.constant)
                self.assertAlmostEqual(
                    report.rows[0].lhs,
                    normalized_lower_bound(unit.h1.constant, p))
                self.assertAlmostEqual(
                    report.rows[0].lhs,
                    2 ** (p - 1) * (unit.h1.constant / p) ** p)

    def test_above_the_cutoff_uses_sweeps(self) -> None:
        g = generate(GeneratorSpec('cycle', n=12)).graph
        report = full_report(g, 2, max_exact_n=6)
        self.assertFalse(any(row.certified for row in report.rows))
        self.assertTrue(report.passed)


class TestExample2(unittest.TestCase):

    def test_intrinsic_bound_beats_the_classical_one(self) -> None:
        ratios = []
        for seed in (1, 2, 3):
            generated = generate(GeneratorSpec('example2', n=16, k=3,
                                               w0_size=8, seed=seed))
            report = full_report(generated.graph, 2, generated=generated)
            comparison = report.example2
            self.assertEqual(comparison.k, 3)
            self.assertEqual(comparison.n0, 7)
            self.assertEqual(comparison.hub, generated.hub)
            self.assertAlmostEqual(comparison.improvement_factor,
                                   math.sqrt(3) / 7)
            self.assertTrue(report.passed)
            if report.classical_lower > 0:
                ratios.append(report.intrinsic_to_classical)
        self.assertTrue(ratios)
        self.assertTrue(all(r >= 1 - 1e-9 for r in ratios))
        self.assertTrue(any(r > 1 for r in ratios))

    def test_needs_an_example2_graph(self) -> None:
        with self.assertRaises(ValueError):
            example2_comparison(GeneratedGraph(k2()), 2, 1.0)


if __name__ == '__main__':
    unittest.main()
