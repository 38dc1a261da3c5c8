""" Weighted graphs b over (X, m) and vertex subsets.

    A `WeightedGraph` is immutable: vertex ids are strings mapped to dense
    indices in declaration order, edges are stored once per unordered pair
    (u < v by index) sorted lexicographically, and every construction path
    validates symmetry, zero diagonal and positivity of the measure.
"""
import logging
import math

from typing import (
    Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional,
    Sequence, Tuple
    )

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components as _components

from ..numerics import accurate_sum

_logger = logging.getLogger(__name__)

EdgeTriple = Tuple[str, str, float]


class InvalidGraphError(ValueError):
    pass


class UnknownVertexError(KeyError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class WeightedGraph(object):
    """ A finite vertex set with symmetric edge weights b and measure m.
    """
    vertices: Tuple[str, ...]
    measure: np.ndarray
    edge_u: np.ndarray        # lower endpoint index
    edge_v: np.ndarray        # upper endpoint index
    edge_weight: np.ndarray
    row_sums: np.ndarray      # sum_y b(x, y)
    _index: Dict[str, int]
    _neighbors: Tuple[Tuple[int, ...], ...]

    def __init__(self, vertices: Sequence[str], measure: Sequence[float],
                 edges: Iterable[EdgeTriple]) -> None:
        index = _build_index(vertices)
        pairs: List[Tuple[int, int, float]] = []
        for a, b, weight in edges:
            try:
                i, j = index[a], index[b]
            except KeyError as exc:
                raise UnknownVertexError(
                    "edge ({}, {}) references undeclared vertex {}"
                    .format(a, b, exc.args[0]))
            pairs.append((min(i, j), max(i, j), weight))
            if i == j:
                raise InvalidGraphError("self-loop at vertex {}".format(a))
        self._init_arrays(tuple(vertices), index, measure, pairs)

    @classmethod
    def from_indices(cls, vertices: Sequence[str], measure: Sequence[float],
                     pairs: Iterable[Tuple[int, int, float]]
                     ) -> 'WeightedGraph':
        graph = cls.__new__(cls)
        index = _build_index(vertices)
        normalized = []
        for i, j, weight in pairs:
            if i == j:
                raise InvalidGraphError("self-loop at vertex {}"
                                        .format(vertices[i]))
            normalized.append((min(i, j), max(i, j), weight))
        graph._init_arrays(tuple(vertices), index, measure, normalized)
        return graph

    def _init_arrays(self, vertices: Tuple[str, ...], index: Dict[str, int],
                     measure: Sequence[float],
                     pairs: List[Tuple[int, int, float]]) -> None:
        n = len(vertices)
        m = np.asarray(measure, dtype=float)
        if m.shape != (n,):
            raise InvalidGraphError("expected {} measure values, got {}"
                                    .format(n, m.shape))
        for vertex, value in zip(vertices, m):
            if not (math.isfinite(value) and value > 0):
                raise InvalidGraphError("nonpositive measure {} at vertex {}"
                                        .format(value, vertex))

        pairs.sort(key=lambda pair: (pair[0], pair[1]))
        seen = set()
        for i, j, weight in pairs:
            if (i, j) in seen:
                raise InvalidGraphError("duplicate edge ({}, {})"
                                        .format(vertices[i], vertices[j]))
            seen.add((i, j))
            if not math.isfinite(weight) or weight < 0:
                raise InvalidGraphError("negative weight {} on edge ({}, {})"
                                        .format(weight, vertices[i],
                                                vertices[j]))
            if weight == 0:
                raise InvalidGraphError("zero weight on edge ({}, {})"
                                        .format(vertices[i], vertices[j]))

        self.vertices = vertices
        self._index = index
        self.measure = _frozen(m.copy())
        self.edge_u = _frozen(np.array([p[0] for p in pairs], dtype=np.int64))
        self.edge_v = _frozen(np.array([p[1] for p in pairs], dtype=np.int64))
        self.edge_weight = _frozen(np.array([p[2] for p in pairs],
                                            dtype=float))
        row_sums = np.zeros(n)
        np.add.at(row_sums, self.edge_u, self.edge_weight)
        np.add.at(row_sums, self.edge_v, self.edge_weight)
        self.row_sums = _frozen(row_sums)

        neighbors: List[List[int]] = [[] for _ in range(n)]
        for i, j, _ in pairs:
            neighbors[i].append(j)
            neighbors[j].append(i)
        self._neighbors = tuple(tuple(sorted(row)) for row in neighbors)

    def __repr__(self) -> str:
        return "WeightedGraph(n={}, edges={})".format(self.n, self.num_edges)

    def same_structure(self, other: 'WeightedGraph') -> bool:
        """ Same vertex ids, measure, edges and weights, in the same order
        """
        if other is self:
            return True
        return (self.vertices == other.vertices
                and np.array_equal(self.measure, other.measure)
                and np.array_equal(self.edge_u, other.edge_u)
                and np.array_equal(self.edge_v, other.edge_v)
                and np.array_equal(self.edge_weight, other.edge_weight))

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def num_edges(self) -> int:
        return len(self.edge_weight)

    @property
    def total_measure(self) -> float:
        return accurate_sum(self.measure)

    def index(self, vertex: str) -> int:
        try:
            return self._index[vertex]
        except KeyError:
            raise UnknownVertexError("unknown vertex {!r}".format(vertex))

    def neighbors(self, i: int) -> Tuple[int, ...]:
        return self._neighbors[i]

    def edges(self) -> Iterator[EdgeTriple]:
        for i, j, weight in zip(self.edge_u, self.edge_v, self.edge_weight):
            yield self.vertices[i], self.vertices[j], float(weight)

    def is_unit_weight(self) -> bool:
        return bool(np.all(self.edge_weight == 1.0))

    def combinatorial_degrees(self) -> np.ndarray:
        return np.array([len(row) for row in self._neighbors], dtype=float)

    def adjacency(self, values: Optional[np.ndarray] = None) -> sp.csr_matrix:
        """ Symmetric sparse matrix carrying `values` (default b) on edges.

            Built from explicit index arrays so that zero values remain
            stored entries, which scipy.sparse.csgraph reads as edges.
        """
        data = self.edge_weight if values is None else np.asarray(values)
        n = self.n
        rows = np.concatenate([self.edge_u, self.edge_v])
        cols = np.concatenate([self.edge_v, self.edge_u])
        vals = np.concatenate([data, data]).astype(float)
        order = np.lexsort((cols, rows))
        rows, cols, vals = rows[order], cols[order], vals[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return sp.csr_matrix((vals, cols, indptr), shape=(n, n))

    def laplacian(self) -> sp.csr_matrix:
        """ The matrix of f -> sum_y b(x,y)(f(x) - f(y)) (no 1/m factor)
        """
        return (sp.diags(self.row_sums) - self.adjacency()).tocsr()

    def with_measure(self, measure: Sequence[float]) -> 'WeightedGraph':
        return WeightedGraph.from_indices(
            self.vertices, measure,
            zip(self.edge_u.tolist(), self.edge_v.tolist(),
                self.edge_weight.tolist()))

    def vertex_set(self, vertices: Iterable[str]) -> 'VertexSet':
        return VertexSet(self, (self.index(vertex) for vertex in vertices))


def _build_index(vertices: Sequence[str]) -> Dict[str, int]:
    index: Dict[str, int] = {}
    for i, vertex in enumerate(vertices):
        if vertex in index:
            raise InvalidGraphError("duplicate vertex id {!r}".format(vertex))
        index[vertex] = i
    return index


class VertexSet(object):
    """ A subset W of the vertices of one graph, stored as dense indices.
    """
    graph: WeightedGraph
    indices: FrozenSet[int]

    def __init__(self, graph: WeightedGraph, indices: Iterable[int]) -> None:
        members = frozenset(int(i) for i in indices)
        for i in members:
            if not 0 <= i < graph.n:
                raise UnknownVertexError("vertex index {} outside graph"
                                         .format(i))
        self.graph = graph
        self.indices = members

    @classmethod
    def from_mask(cls, graph: WeightedGraph, mask: np.ndarray) -> 'VertexSet':
        return cls(graph, np.flatnonzero(mask).tolist())

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.sort_key())

    def __contains__(self, i: object) -> bool:
        return i in self.indices

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return (self.indices == other.indices
                and self.graph.same_structure(other.graph))

    def __hash__(self) -> int:
        return hash(self.indices)

    def __repr__(self) -> str:
        return "VertexSet({})".format(self.ids())

    def sort_key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.indices))

    def ids(self) -> List[str]:
        return [self.graph.vertices[i] for i in self.sort_key()]

    def mask(self) -> np.ndarray:
        mask = np.zeros(self.graph.n, dtype=bool)
        mask[list(self.indices)] = True
        return mask

    def measure(self) -> float:
        return accurate_sum(self.graph.measure[self.mask()])

    def complement(self) -> 'VertexSet':
        return VertexSet(self.graph,
                         set(range(self.graph.n)) - self.indices)

    def issubset(self, other: 'VertexSet') -> bool:
        return self.indices <= other.indices


class PairWeight(NamedTuple):
    """ A symmetric pair weight w, stored per edge of its graph.

        All pair weights used by the toolkit vanish off the edges
        (w <= b * sigma), so the per-edge representation is exact.
    """
    name: str
    values: np.ndarray


class BoundaryMeasureResult(NamedTuple):
    vertex_set: VertexSet
    weight_name: str
    value: float


def edge_weight(g: WeightedGraph) -> PairWeight:
    return PairWeight('b', g.edge_weight)


def weighted_degree(g: WeightedGraph, x: str) -> float:
    """ Deg(x) = (1/m(x)) sum_y b(x, y)
    """
    i = g.index(x)
    return float(g.row_sums[i] / g.measure[i])


def weighted_degrees(g: WeightedGraph) -> np.ndarray:
    return g.row_sums / g.measure


def normalizing_measure(g: WeightedGraph) -> WeightedGraph:
    """ Replace m by m(x) = sum_y b(x, y), so that Deg is identically 1
    """
    isolated = np.flatnonzero(g.row_sums == 0)
    if len(isolated):
        raise InvalidGraphError(
            "normalizing measure undefined: isolated vertex {!r}"
            .format(g.vertices[isolated[0]]))
    return g.with_measure(g.row_sums)


def induced_subgraph(g: WeightedGraph, W: VertexSet
                     ) -> Tuple[WeightedGraph, np.ndarray]:
    """ The restriction of b and m to W, with the kept edge positions of g
    """
    mask = W.mask()
    members = np.flatnonzero(mask)
    position = np.full(g.n, -1, dtype=np.int64)
    position[members] = np.arange(len(members))
    kept = np.flatnonzero(mask[g.edge_u] & mask[g.edge_v])
    sub = WeightedGraph.from_indices(
        [g.vertices[i] for i in members.tolist()], g.measure[members],
        zip(position[g.edge_u[kept]].tolist(),
            position[g.edge_v[kept]].tolist(), g.edge_weight[kept].tolist()))
    return sub, kept


def incident_sums(g: WeightedGraph, at_lower: np.ndarray,
                  at_upper: Optional[np.ndarray] = None) -> np.ndarray:
    """ For every vertex x the exact sum of the edge values at x

        An edge contributes at_lower to its lower-index endpoint and
        at_upper (default: the same value) to the other one.
    """
    if at_upper is None:
        at_upper = at_lower
    ends = np.concatenate([g.edge_u, g.edge_v])
    values = np.concatenate([at_lower, at_upper]).astype(float)
    order = np.argsort(ends, kind='stable')
    counts = np.bincount(ends, minlength=g.n)
    groups = np.split(values[order], np.cumsum(counts)[:-1])
    return np.array([accurate_sum(group) for group in groups])


def crossing_edges(g: WeightedGraph, mask: np.ndarray) -> np.ndarray:
    return mask[g.edge_u] != mask[g.edge_v]


def boundary_measure(g: WeightedGraph, W: VertexSet,
                     w: Optional[PairWeight] = None) -> BoundaryMeasureResult:
    """ |dW|_w: the sum of w(x, y) over ordered pairs in W x (X \\ W)
    """
    if not g.same_structure(W.graph):
        raise ValueError("vertex set belongs to a different graph")
    if w is None:
        w = edge_weight(g)
    if len(w.values) != g.num_edges:
        raise ValueError("pair weight {!r} has {} values for {} edges"
                         .format(w.name, len(w.values), g.num_edges))
    crossing = crossing_edges(g, W.mask())
    return BoundaryMeasureResult(W, w.name,
                                 accurate_sum(np.asarray(w.values)[crossing]))


def connected_components(g: WeightedGraph) -> List[VertexSet]:
    """ Components ordered by their smallest vertex index
    """
    count, labels = _components(g.adjacency(), directed=False)
    groups: Dict[int, List[int]] = {}
    for i, label in enumerate(labels.tolist()):
        groups.setdefault(label, []).append(i)
    ordered = sorted(groups.values(), key=lambda members: members[0])
    _logger.debug("graph %r has %d components", g, count)
    return [VertexSet(g, members) for members in ordered]


def is_connected(g: WeightedGraph) -> bool:
    return g.n > 0 and len(connected_components(g)) == 1
