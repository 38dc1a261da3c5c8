import unittest

from textwrap import dedent

import numpy as np

from hypothesis import given, settings, strategies as st

from pspectra.graph import (
    InvalidGraphError, UnknownVertexError, VertexSet, WeightedGraph,
    boundary_measure, connected_components, edge_weight, incident_sums,
    induced_subgraph, is_connected, normalizing_measure, weighted_degree,
    weighted_degrees
    )
from pspectra.graph.generators import (
    GeneratorSpec, InfeasibleFamilyError, generate, minimizing_subset
    )
from pspectra.graph.graphfile import (
    GraphFileError, parse_graph, parse_vertex_set, write_graph
    )


def triangle() -> WeightedGraph:
    return WeightedGraph(['a', 'b', 'c'], [1.0, 2.0, 3.0],
                         [('a', 'b', 1.0), ('b', 'c', 2.0), ('c', 'a', 0.5)])


class TestWeightedGraph(unittest.TestCase):

    def test_edges_are_stored_once_with_lower_index_first(self) -> None:
        g = triangle()
        self.assertEqual(g.n, 3)
        self.assertEqual(g.num_edges, 3)
        self.assertEqual(g.edge_u.tolist(), [0, 0, 1])
        self.assertEqual(g.edge_v.tolist(), [1, 2, 2])
        self.assertEqual(g.edge_weight.tolist(), [1.0, 0.5, 2.0])
        self.assertEqual(g.row_sums.tolist(), [1.5, 3.0, 2.5])
        self.assertEqual(g.total_measure, 6.0)

    def test_arrays_are_read_only(self) -> None:
        g = triangle()
        with self.assertRaises(ValueError):
            g.measure[0] = 5.0

    def test_invalid_graphs_are_rejected(self) -> None:
        with self.assertRaises(InvalidGraphError):
            WeightedGraph(['a', 'b'], [1.0, 0.0], [('a', 'b', 1.0)])
        with self.assertRaises(InvalidGraphError):
            WeightedGraph(['a', 'b'], [1.0, 1.0], [('a', 'b', -1.0)])
        with self.assertRaises(InvalidGraphError):
            WeightedGraph(['a', 'b'], [1.0, 1.0], [('a', 'b', 0.0)])
        with self.assertRaises(InvalidGraphError):
            WeightedGraph(['a'], [1.0], [('a', 'a', 1.0)])
        with self.assertRaises(InvalidGraphError):
            WeightedGraph(['a', 'b'], [1.0, 1.0],
                          [('a', 'b', 1.0), ('b', 'a', 2.0)])
        with self.assertRaises(UnknownVertexError):
            WeightedGraph(['a'], [1.0], [('a', 'z', 1.0)])

    def test_unknown_vertex(self) -> None:
        with self.assertRaises(UnknownVertexError):
            triangle().index('z')
        with self.assertRaises(KeyError):
            weighted_degree(triangle(), 'z')

    def test_weighted_degree(self) -> None:
        g = triangle()
        self.assertEqual(weighted_degree(g, 'a'), 1.5)
        self.assertEqual(weighted_degree(g, 'b'), 1.5)
        np.testing.assert_allclose(weighted_degrees(g), [1.5, 1.5, 2.5 / 3])

    def test_normalizing_measure_gives_unit_degrees(self) -> None:
        g = normalizing_measure(triangle())
        np.testing.assert_allclose(weighted_degrees(g), 1.0)
        lonely = WeightedGraph(['a', 'b', 'c'], [1.0] * 3, [('a', 'b', 1.0)])
        with self.assertRaises(InvalidGraphError):
            normalizing_measure(lonely)

    def test_boundary_measure(self) -> None:
        g = triangle()
        W = g.vertex_set(['a'])
        self.assertEqual(boundary_measure(g, W).value, 1.5)
        self.assertEqual(boundary_measure(g, W.complement()).value, 1.5)
        self.assertEqual(boundary_measure(g, g.vertex_set([])).value, 0.0)
        self.assertEqual(edge_weight(g).name, 'b')

    def test_vertex_set(self) -> None:
        g = triangle()
        W = VertexSet(g, [2, 0])
        self.assertEqual(list(W), [0, 2])
        self.assertEqual(W.ids(), ['a', 'c'])
        self.assertEqual(W.measure(), 4.0)
        self.assertEqual(W, g.vertex_set(['c', 'a']))
        self.assertEqual(W.complement().ids(), ['b'])
        self.assertTrue(g.vertex_set(['a']).issubset(W))
        self.assertEqual(VertexSet.from_mask(g, W.mask()), W)

    def test_equal_graphs_share_vertex_sets(self) -> None:
        g, twin = triangle(), triangle()
        self.assertIsNot(g, twin)
        self.assertTrue(g.same_structure(twin))
        W = twin.vertex_set(['a'])
        self.assertEqual(boundary_measure(g, W).value, 1.5)
        self.assertEqual(W, g.vertex_set(['a']))
        heavier = WeightedGraph(['a', 'b', 'c'], [1.0, 2.0, 3.0],
                                [('a', 'b', 2.0), ('b', 'c', 2.0),
                                 ('c', 'a', 0.5)])
        self.assertFalse(g.same_structure(heavier))
        with self.assertRaises(ValueError):
            boundary_measure(heavier, W)

    def test_components_are_ordered_by_smallest_index(self) -> None:
        g = WeightedGraph(['a', 'b', 'c', 'd'], [1.0] * 4,
                          [('b', 'd', 1.0), ('a', 'c', 1.0)])
        components = connected_components(g)
        self.assertEqual([c.ids() for c in components],
                         [['a', 'c'], ['b', 'd']])
        self.assertFalse(is_connected(g))
        self.assertTrue(is_connected(triangle()))

    def test_incident_sums(self) -> None:
        g = triangle()
        values = np.array([1.0, 10.0, 100.0])
        np.testing.assert_array_equal(incident_sums(g, values),
                                      [11.0, 101.0, 110.0])
        np.testing.assert_array_equal(incident_sums(g, values, -values),
                                      [11.0, 99.0, -110.0])

    def test_induced_subgraph(self) -> None:
        g = triangle()
        sub, kept = induced_subgraph(g, g.vertex_set(['b', 'c']))
        self.assertEqual(sub.vertices, ('b', 'c'))
        self.assertEqual(sub.measure.tolist(), [2.0, 3.0])
        self.assertEqual(sub.edge_weight.tolist(), [2.0])
        self.assertEqual(kept.tolist(), [2])


class TestGraphFile(unittest.TestCase):

    K2 = dedent("""\
        # K2
        V a
        V b 1
        E a b 1
        """)

    def test_parse(self) -> None:
        g = parse_graph(self.K2)
        self.assertEqual(g.vertices, ('a', 'b'))
        self.assertEqual(g.measure.tolist(), [1.0, 1.0])
        self.assertEqual(g.edge_weight.tolist(), [1.0])

    def test_write_is_sorted_and_parses_back(self) -> None:
        text = write_graph(triangle())
        self.assertEqual(text, dedent("""\
            V a 1.0
            V b 2.0
            V c 3.0
            E a b 1.0
            E a c 0.5
            E b c 2.0
            """))
        self.assertEqual(write_graph(parse_graph(text)), text)

    def test_errors_carry_line_numbers(self) -> None:
        cases = [
            ("V a\nV a\n", 2, "duplicate vertex"),
            ("V a\nV b\nE a b -1\n", 3, "negative weight"),
            ("V a\nV b\nE a b 0\n", 3, "zero weight"),
            ("V a\nE a b 1\n", 2, "not declared"),
            ("V a\nV b\nE a a 1\n", 3, "self-loop"),
            ("V a 0\n", 1, "nonpositive measure"),
            ("V a\nV b\nE a b 1\nE b a 1\n", 4, "duplicate edge"),
            ("X a\n", 1, "unknown record"),
            ("V a b c\n", 1, "fields"),
            ("V a nan\n", 1, "non-finite"),
            ]
        for text, lineno, fragment in cases:
            with self.subTest(text=text):
                with self.assertRaises(GraphFileError) as raised:
                    parse_graph(text)
                self.assertEqual(raised.exception.lineno, lineno)
                self.assertIn(fragment, str(raised.exception))
                self.assertIn("line {}".format(lineno),
                              str(raised.exception))

    def test_vertex_set_records(self) -> None:
        g = triangle()
        W = parse_vertex_set(g, "# interior\nI c\nI a\n")
        self.assertEqual(W.ids(), ['a', 'c'])
        self.assertEqual(len(parse_vertex_set(g, "")), 0)
        for text, lineno in (("I a\nI z\n", 2), ("I b\nI b\n", 2),
                             ("V a\n", 1)):
            with self.subTest(text=text):
                with self.assertRaises(GraphFileError) as raised:
                    parse_vertex_set(g, text)
                self.assertEqual(raised.exception.lineno, lineno)


class TestGenerators(unittest.TestCase):

    def test_spec_parsing(self) -> None:
        spec = GeneratorSpec.parse("k_regular:n=10,k=3,seed=7")
        self.assertEqual(spec, GeneratorSpec('k_regular', n=10, k=3, seed=7))
        with self.assertRaises(ValueError):
            GeneratorSpec.parse("k_regular:n=ten")
        with self.assertRaises(ValueError):
            GeneratorSpec.parse("k_regular:colour=red")
        with self.assertRaises(ValueError):
            GeneratorSpec.parse("moebius:n=4")
        with self.assertRaises(ValueError):
            GeneratorSpec.parse("example2:n=20,k=4,w0_size=5,weights=random")

    def test_small_families(self) -> None:
        self.assertEqual(generate(GeneratorSpec('complete', n=5))
                         .graph.num_edges, 10)
        self.assertEqual(generate(GeneratorSpec('path', n=5))
                         .graph.num_edges, 4)
        cycle = generate(GeneratorSpec('cycle', n=5)).graph
        self.assertEqual(cycle.num_edges, 5)
        np.testing.assert_array_equal(cycle.combinatorial_degrees(), 2.0)

    def test_k_regular(self) -> None:
        g = generate(GeneratorSpec('k_regular', n=12, k=3, seed=4)).graph
        np.testing.assert_array_equal(g.combinatorial_degrees(), 3.0)
        again = generate(GeneratorSpec('k_regular', n=12, k=3, seed=4)).graph
        self.assertEqual(g.edge_u.tolist(), again.edge_u.tolist())
        self.assertEqual(g.edge_v.tolist(), again.edge_v.tolist())
        with self.assertRaises(InfeasibleFamilyError):
            generate(GeneratorSpec('k_regular', n=5, k=3))
        with self.assertRaises(InfeasibleFamilyError):
            generate(GeneratorSpec('k_regular', n=4, k=4))

    def test_erdos_renyi_is_seeded(self) -> None:
        spec = GeneratorSpec('erdos_renyi', n=15, prob=0.4, seed=11)
        a, b = generate(spec).graph, generate(spec).graph
        self.assertEqual(a.edge_u.tolist(), b.edge_u.tolist())
        self.assertEqual(a.edge_v.tolist(), b.edge_v.tolist())
        self.assertEqual(generate(spec._replace(prob=0.0)).graph.num_edges, 0)
        self.assertEqual(generate(spec._replace(prob=1.0)).graph.num_edges,
                         105)

    def test_weight_and_measure_policies(self) -> None:
        spec = GeneratorSpec('cycle', n=6, weights='random',
                             measure='random', seed=3)
        g = generate(spec).graph
        self.assertTrue(np.all((g.edge_weight >= 0.5)
                               & (g.edge_weight <= 2.0)))
        self.assertTrue(np.all((g.measure >= 0.5) & (g.measure <= 2.0)))
        normalized = generate(spec._replace(measure='normalizing')).graph
        np.testing.assert_allclose(weighted_degrees(normalized), 1.0)

    def test_tree_ball(self) -> None:
        generated = generate(GeneratorSpec('tree_ball', k=3, radius=3,
                                           measure='normalizing'))
        g = generated.graph
        self.assertEqual(g.n, 1 + 3 + 6 + 12)
        self.assertEqual(generated.root, 't0')
        self.assertEqual(len(generated.interior), 1 + 3 + 6)
        self.assertEqual(g.measure[0], 3.0)
        self.assertEqual(g.measure[-1], 1.0)

    def test_minimizing_subset(self) -> None:
        # two triangles joined by the edge (2, 3)
        pairs = [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]
        self.assertEqual(minimizing_subset(6, pairs, 3), (0, 1, 2))

    def test_example2(self) -> None:
        generated = generate(GeneratorSpec('example2', n=20, k=4, seed=1,
                                           w0_size=10))
        g, base = generated.graph, generated.base
        W0 = generated.minimizing_set
        self.assertEqual(len(W0), 10)
        self.assertEqual(generated.hub, g.vertices[min(W0)])
        hub = g.index(generated.hub)
        self.assertTrue(set(W0) - {hub} <= set(g.neighbors(hub)))
        self.assertGreaterEqual(g.num_edges, base.num_edges)
        self.assertLessEqual(g.num_edges, base.num_edges + 9)
        with self.assertRaises(InfeasibleFamilyError):
            generate(GeneratorSpec('example2', n=20, k=4, w0_size=11))

    @settings(max_examples=12, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), picks=st.data())
    def test_example2_weights_only_grow_boundaries(self, seed: int,
                                                   picks: st.DataObject
                                                   ) -> None:
        generated = generate(GeneratorSpec('example2', n=20, k=4,
                                           seed=seed, w0_size=10))
        g, base = generated.graph, generated.base
        W0 = list(generated.minimizing_set)
        self.assertEqual(boundary_measure(g, VertexSet(g, W0)).value,
                         boundary_measure(base, VertexSet(base, W0)).value)
        members = picks.draw(st.sets(st.integers(0, g.n - 1)))
        self.assertGreaterEqual(
            boundary_measure(g, VertexSet(g, members)).value,
            boundary_measure(base, VertexSet(base, members)).value)


if __name__ == '__main__':
    unittest.main()
