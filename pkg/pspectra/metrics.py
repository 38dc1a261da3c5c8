""" Edge lengths d, the admissible classes R_p(b, m) and distance balls.

    d belongs to R_p(b, m) for p > 1 when every vertex satisfies
    sum_y b(x, y) d(x, y)^q <= m(x) with the conjugate exponent
    q = p / (p - 1); for p = 1 the condition is d <= 1 on every edge.
"""
import logging
import math

from typing import Iterable, List, NamedTuple, Optional

import numpy as np
from more_itertools import chunked
from scipy.sparse.csgraph import dijkstra

from .concurrency_model import ConcurrencyModel, default_model
from .graph import (
    InvalidGraphError, PairWeight, UnknownVertexError, VertexSet,
    WeightedGraph, incident_sums, weighted_degrees
    )
from .graph.graphfile import (
    GraphFileError, format_number, iter_records, parse_number
    )
from .numerics import check_exponent

_logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-12
CLOSURE_CHUNK = 64


def conjugate_exponent(p: float) -> float:
    check_exponent(p)
    return math.inf if p == 1 else p / (p - 1.0)


class EdgeLength(NamedTuple):
    """ A nonnegative length per edge of `graph`, in the graph's edge order
    """
    graph: WeightedGraph
    values: np.ndarray
    name: str

    def pair_weight(self) -> PairWeight:
        """ The weight b*d whose boundary measure enters the Cheeger constants
        """
        return PairWeight("b*{}".format(self.name),
                          self.graph.edge_weight * self.values)

    def scaled(self, c: float) -> 'EdgeLength':
        return edge_length(self.graph, c * self.values,
                           "{}*{}".format(format_number(c), self.name))


def edge_length(g: WeightedGraph, values: np.ndarray,
                name: str = 'custom') -> EdgeLength:
    lengths = np.array(values, dtype=float)
    if lengths.shape != (g.num_edges,):
        raise ValueError("expected {} edge lengths, got shape {}"
                         .format(g.num_edges, lengths.shape))
    if not np.all(np.isfinite(lengths)) or np.any(lengths < 0):
        raise ValueError("edge lengths must be finite and nonnegative")
    lengths.setflags(write=False)
    return EdgeLength(g, lengths, name)


class MembershipCertificate(NamedTuple):
    p: float
    is_member: bool
    worst_slack: float
    witness: Optional[str]  # vertex id, or "u~v" for the p = 1 edge rule


def _edge_label(g: WeightedGraph, e: int) -> str:
    return "{}~{}".format(g.vertices[g.edge_u[e]], g.vertices[g.edge_v[e]])


def degree_metric(g: WeightedGraph, p: float) -> EdgeLength:
    """ d_p(x, y) = (Deg(x) v Deg(y))^(-(p-1)/p), a member of R_p(b, m)
    """
    if not p > 1:
        raise ValueError("degree metric needs p > 1, got {}; use a constant "
                         "length for p = 1".format(p))
    check_exponent(p, strict=True)
    deg = weighted_degrees(g)
    larger = np.maximum(deg[g.edge_u], deg[g.edge_v])
    return edge_length(g, larger ** (-(p - 1.0) / p), 'degree')


def constant_length(g: WeightedGraph, c: float) -> EdgeLength:
    if not (math.isfinite(c) and c >= 0):
        raise ValueError("constant length must be finite and >= 0, got {}"
                         .format(c))
    return edge_length(g, np.full(g.num_edges, float(c)),
                       "const:{}".format(format_number(c)))


def scaled_constant_length(g: WeightedGraph, k: float,
                           p: float) -> EdgeLength:
    """ d = k^(-1/q) on every edge; in R_p when all weighted degrees are <= k
    """
    q = conjugate_exponent(p)
    return edge_length(g, np.full(g.num_edges, k ** (-1.0 / q)),
                       "k^-1/q:{}".format(format_number(k)))


def check_membership(g: WeightedGraph, d: EdgeLength,
                     p: float) -> MembershipCertificate:
    check_exponent(p)
    if not g.same_structure(d.graph):
        raise ValueError("edge length belongs to a different graph")
    if p == 1:
        if g.num_edges == 0:
            return MembershipCertificate(p, True, math.inf, None)
        slack = 1.0 - d.values
        worst = int(np.argmin(slack))
        return MembershipCertificate(
            p, bool(slack[worst] >= -MEMBERSHIP_TOLERANCE),
            float(slack[worst]), _edge_label(g, worst))

    q = conjugate_exponent(p)
    load = incident_sums(g, g.edge_weight * d.values ** q)
    slack = g.measure - load
    tolerance = MEMBERSHIP_TOLERANCE * np.maximum(1.0, g.measure)
    worst = int(np.argmin(slack))
    is_member = bool(np.all(slack >= -tolerance))
    if not is_member:
        _logger.debug("%s is not in R_%s: slack %r at %s", d.name, p,
                      float(slack[worst]), g.vertices[worst])
    return MembershipCertificate(p, is_member, float(slack[worst]),
                                 g.vertices[worst])


def delta(g: WeightedGraph, d: EdgeLength) -> float:
    """ The smallest edge length
    """
    if g.num_edges == 0:
        raise InvalidGraphError("delta(d) is undefined on an edgeless graph")
    return float(np.min(d.values))


class PseudoMetric(NamedTuple):
    """ All-pairs distances; math.inf between different components
    """
    graph: WeightedGraph
    dist: np.ndarray
    name: str

    def restricted_to_edges(self) -> EdgeLength:
        g = self.graph
        return edge_length(g, self.dist[g.edge_u, g.edge_v],
                           "closure({})".format(self.name))

    def triangle_violation(self) -> float:
        """ max over x, y, z of dist(x, y) - dist(x, z) - dist(z, y)
        """
        worst = 0.0
        for k in range(self.graph.n):
            detour = self.dist[:, k, None] + self.dist[None, k, :]
            excess = np.where(np.isinf(detour), -math.inf, self.dist - detour)
            worst = max(worst, float(np.max(excess)))
        return worst


def path_metric_closure(g: WeightedGraph, d: EdgeLength,
                        concurrency: Optional[ConcurrencyModel] = None
                        ) -> PseudoMetric:
    """ Shortest-path distances for the edge lengths d.
    """
    dist = source_distances(g, d, range(g.n), concurrency)
    dist.setflags(write=False)
    return PseudoMetric(g, dist, d.name)


def source_distances(g: WeightedGraph, d: EdgeLength,
                     sources: Iterable[int],
                     concurrency: Optional[ConcurrencyModel] = None
                     ) -> np.ndarray:
    """ One row of shortest-path distances per source, in source order

        Rows are computed per block of sources.
    """
    concurrency = concurrency or default_model()
    adjacency = g.adjacency(d.values)
    order = list(sources)

    def rows(block: List[int]) -> np.ndarray:
        return dijkstra(adjacency, directed=False, indices=block)

    blocks = concurrency.map(rows, chunked(order, CLOSURE_CHUNK))
    dist = np.vstack(blocks) if blocks else np.zeros((0, g.n))
    dist[np.arange(len(order)), order] = 0.0
    return dist


def combinatorial_metric(g: WeightedGraph) -> PseudoMetric:
    return path_metric_closure(g, constant_length(g, 1.0))


def distance_ball(pm: PseudoMetric, o: str, r: float) -> VertexSet:
    if not r >= 0:
        raise ValueError("ball radius must be >= 0, got {}".format(r))
    row = pm.dist[pm.graph.index(o)]
    return VertexSet.from_mask(pm.graph, row <= r)


def parse_edge_lengths(g: WeightedGraph, text: str,
                       name: str = 'file') -> EdgeLength:
    """ Read "D <u> <v> <value>" records, exactly one per edge of g
    """
    slot = {(int(u), int(v)): e for e, (u, v)
            in enumerate(zip(g.edge_u.tolist(), g.edge_v.tolist()))}
    values = np.full(g.num_edges, math.nan)
    for record in iter_records(text, {'D': (3,)}):
        a, b, raw = record.fields
        try:
            i, j = g.index(a), g.index(b)
        except UnknownVertexError as exc:
            raise GraphFileError(record.lineno, exc.args[0])
        e = slot.get((min(i, j), max(i, j)))
        if e is None:
            raise GraphFileError(record.lineno,
                                 "({}, {}) is not an edge".format(a, b))
        if not math.isnan(values[e]):
            raise GraphFileError(record.lineno,
                                 "duplicate length for ({}, {})".format(a, b))
        value = parse_number(record, raw)
        if value < 0:
            raise GraphFileError(record.lineno,
                                 "negative length {}".format(value))
        values[e] = value
    missing = np.flatnonzero(np.isnan(values))
    if len(missing):
        raise InvalidGraphError("no length given for edge {}"
                                .format(_edge_label(g, int(missing[0]))))
    return edge_length(g, values, name)


def write_edge_lengths(d: EdgeLength) -> str:
    g = d.graph
    rows = sorted((min(u, v), max(u, v), value) for (u, v, _), value
                  in zip(g.edges(), d.values.tolist()))
    return "".join("D {} {} {}\n".format(u, v, format_number(value))
                   for u, v, value in rows)
