import unittest

import numpy as np

from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pspectra.energy import (
    GAP, GROUND, energy, energy_derivative, energy_directional_derivative,
    negative_part, p_laplacian_apply, p_mean_shift, parse_vertex_function,
    positive_part, rayleigh, sign_splitting_check, signed_moment,
    vertex_function, weak_solution_residual, write_vertex_function
    )
from pspectra.graph import InvalidGraphError, WeightedGraph
from pspectra.graph.generators import GeneratorSpec, generate
from pspectra.graph.graphfile import GraphFileError


def k2() -> WeightedGraph:
    return WeightedGraph(['a', 'b'], [1.0, 1.0], [('a', 'b', 1.0)])


def path3() -> WeightedGraph:
    return WeightedGraph(['a', 'b', 'c'], [1.0, 1.0, 1.0],
                         [('a', 'b', 1.0), ('b', 'c', 1.0)])


def random_graph(seed: int) -> WeightedGraph:
    return generate(GeneratorSpec('erdos_renyi', n=8, prob=0.5, seed=seed,
                                  weights='random', measure='random')).graph


values = arrays(float, 8, elements=st.floats(-3.0, 3.0))


class TestEnergy(unittest.TestCase):

    def test_k2(self) -> None:
        f = np.array([0.0, 1.0])
        for p in (1.0, 1.5, 2.0, 4.0):
            self.assertEqual(energy(k2(), f, p), 1.0)
        self.assertEqual(energy(k2(), np.array([0.0, 3.0]), 2), 9.0)

    def test_derivative_weak_form(self) -> None:
        f = np.array([0.0, 1.0])
        self.assertEqual(energy_derivative(k2(), f, np.array([1.0, 0.0]), 2),
                         -1.0)
        self.assertEqual(energy_derivative(k2(), f, f, 2), 1.0)
        self.assertEqual(
            energy_directional_derivative(k2(), f, f, 2), 2.0)
        with self.assertRaises(ValueError):
            energy_derivative(k2(), f, f, 1)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000), f=values, g=values,
           p=st.floats(2.0, 5.0))
    def test_directional_derivative_matches_finite_differences(
            self, seed: int, f: np.ndarray, g: np.ndarray, p: float) -> None:
        graph = random_graph(seed)
        t = 1e-6
        numeric = (energy(graph, f + t * g, p)
                   - energy(graph, f - t * g, p)) / (2 * t)
        exact = energy_directional_derivative(graph, f, g, p)
        scale = 1.0 + abs(exact) + energy(graph, f, p) + energy(graph, g, p)
        assert abs(numeric - exact) <= 1e-4 * scale

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 1000), f=values, g=values,
           p=st.floats(1.2, 5.0))
    def test_derivative_is_the_laplacian_inner_product(
            self, seed: int, f: np.ndarray, g: np.ndarray, p: float) -> None:
        graph = random_graph(seed)
        inner = float(np.sum(graph.measure * p_laplacian_apply(graph, f, p)
                             * g))
        weak = energy_derivative(graph, f, g, p)
        assert abs(inner - weak) <= 1e-9 * (1.0 + abs(weak) + abs(inner))


class TestShiftAndQuotients(unittest.TestCase):

    def test_p1_shift_is_the_weighted_median(self) -> None:
        g = WeightedGraph(['a', 'b', 'c'], [1.0, 1.0, 10.0], [])
        f = np.array([0.0, 1.0, 5.0])
        self.assertEqual(p_mean_shift(g, f, 1), 5.0)
        self.assertEqual(p_mean_shift(g, f, 2), 51.0 / 12.0)
        self.assertEqual(p_mean_shift(g, np.full(3, 2.0), 3), 2.0)

    @settings(max_examples=30, deadline=None)
    @given(f=arrays(float, 5, elements=st.floats(-5.0, 5.0)),
           p=st.floats(1.1, 6.0))
    def test_shift_stays_in_range_and_balances(self, f: np.ndarray,
                                               p: float) -> None:
        g = WeightedGraph(list('abcde'), [1.0, 2.0, 0.5, 1.0, 3.0], [])
        gamma = p_mean_shift(g, f, p)
        assert np.min(f) <= gamma <= np.max(f)
        if np.max(f) - np.min(f) > 1e-3:
            # moving gamma away in either direction increases the norm
            h = 1e-4 * (np.max(f) - np.min(f))
            norm = np.sum(g.measure * np.abs(f - gamma) ** p) * (1 - 1e-12)
            assert norm <= np.sum(g.measure * np.abs(f - gamma - h) ** p)
            assert norm <= np.sum(g.measure * np.abs(f - gamma + h) ** p)

    def test_rayleigh_on_k2(self) -> None:
        gap = rayleigh(k2(), np.array([1.0, -1.0]), 2)
        self.assertEqual(gap.shift, 0.0)
        self.assertEqual(gap.energy, 4.0)
        self.assertEqual(gap.quotient, 2.0)
        shifted = rayleigh(k2(), np.array([3.0, 1.0]), 2, GAP)
        self.assertEqual(shifted.shift, 2.0)
        self.assertEqual(shifted.quotient, 2.0)
        ground = rayleigh(k2(), np.array([1.0, 0.0]), 2, GROUND)
        self.assertEqual(ground.quotient, 1.0)

    def test_rayleigh_divides_by_the_mass_itself(self) -> None:
        for p in (2.0, 3.0, 7.0):
            with self.subTest(p=p):
                value = rayleigh(k2(), np.array([3.0, 1.0]), p, GAP)
                self.assertEqual(value.shift, 2.0)
                self.assertEqual(value.quotient, 2.0 ** (p - 1))
                ground = rayleigh(path3(), np.array([0.0, 2.0, 0.0]), p,
                                  GROUND)
                self.assertEqual(ground.quotient, 2.0)

    def test_rayleigh_rejects_degenerate_functions(self) -> None:
        with self.assertRaises(ValueError):
            rayleigh(k2(), np.zeros(2), 2, GROUND)
        with self.assertRaises(ValueError):
            rayleigh(k2(), np.ones(2), 2, GAP)
        with self.assertRaises(ValueError):
            rayleigh(k2(), np.ones(2), 2, 'spectral')

    def test_path3_critical_point_at_p3(self) -> None:
        g = path3()
        f = np.array([1.0, 0.0, -1.0])
        np.testing.assert_array_equal(p_laplacian_apply(g, f, 3),
                                      [1.0, 0.0, -1.0])
        self.assertEqual(weak_solution_residual(g, f, 1.0, 3), 0.0)
        self.assertGreater(weak_solution_residual(g, f, 2.0, 3), 0.5)
        self.assertEqual(rayleigh(g, f, 3, GROUND).quotient, 1.0)
        self.assertAlmostEqual(rayleigh(g, f, 3, GAP).quotient, 1.0)
        self.assertEqual(signed_moment(g, f, 3), 0.0)

    def test_residual_restricted_to_an_interior(self) -> None:
        g = path3()
        f = np.array([0.0, 1.0, 0.0])
        self.assertEqual(weak_solution_residual(g, f, 2.0, 2), 1.0)
        self.assertEqual(
            weak_solution_residual(g, f, 2.0, 2, g.vertex_set(['b'])), 0.0)
        self.assertEqual(
            weak_solution_residual(g, f, 2.0, 2, g.vertex_set([])), 0.0)


class TestParts(unittest.TestCase):

    def test_parts(self) -> None:
        f = np.array([2.0, -1.0, 0.0])
        np.testing.assert_array_equal(positive_part(f), [2.0, 0.0, 0.0])
        np.testing.assert_array_equal(negative_part(f), [0.0, 1.0, 0.0])
        np.testing.assert_array_equal(positive_part(f) - negative_part(f), f)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 1000), f=values, p=st.floats(1.0, 5.0))
    def test_sign_splitting(self, seed: int, f: np.ndarray,
                            p: float) -> None:
        if p == 1.0:
            p = 1.0 + 1e-9
        lhs, rhs = sign_splitting_check(random_graph(seed), f, p)
        assert lhs <= rhs + 1e-9 * (1.0 + abs(rhs))


class TestVertexFunctionFile(unittest.TestCase):

    def test_read_and_write(self) -> None:
        g = path3()
        f = parse_vertex_function(g, "F c -1\nF a 1.5\n# x\nF b 0\n")
        self.assertEqual(f.tolist(), [1.5, 0.0, -1.0])
        self.assertEqual(write_vertex_function(g, f),
                         "F a 1.5\nF b 0.0\nF c -1.0\n")

    def test_errors(self) -> None:
        g = path3()
        with self.assertRaises(GraphFileError):
            parse_vertex_function(g, "F a 1\nF a 2\n")
        with self.assertRaises(GraphFileError):
            parse_vertex_function(g, "F z 1\n")
        with self.assertRaises(GraphFileError):
            parse_vertex_function(g, "F a inf\n")
        with self.assertRaises(InvalidGraphError):
            parse_vertex_function(g, "F a 1\n")
        with self.assertRaises(ValueError):
            vertex_function(g, [1.0, 2.0])


if __name__ == '__main__':
    unittest.main()
