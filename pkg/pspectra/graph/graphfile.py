""" Line-oriented text formats for graphs and per-graph data.

    Graph files::

        # comment
        V <id> [<m>]       measure defaults to 1
        E <u> <v> <b>      b > 0, endpoints declared before use

    Edge-length files use ``D <u> <v> <value>`` records and vertex-function
    files ``F <vertex> <value>``; they are parsed against an existing graph
    by `pspectra.metrics` and `pspectra.energy`. Vertex-set files list
    ``I <vertex>`` records.
    Writers sort their records, so output is byte-deterministic.
"""
import math

from typing import Dict, Iterator, List, NamedTuple, Sequence, Set, Tuple

from . import (
    InvalidGraphError, UnknownVertexError, VertexSet, WeightedGraph
    )


class GraphFileError(InvalidGraphError):
    """ A record that does not follow the file format; carries the line number
    """
    lineno: int

    def __init__(self, lineno: int, message: str) -> None:
        super(GraphFileError, self).__init__(
            "line {}: {}".format(lineno, message))
        self.lineno = lineno


class Record(NamedTuple):
    lineno: int
    tag: str
    fields: List[str]


def iter_records(text: str, arity: Dict[str, Sequence[int]]
                 ) -> Iterator[Record]:
    """ Yield the non-comment records of `text`, checking tags and arity.

    :param arity: allowed field counts (tag excluded) for every known tag
    """
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        tag, *fields = stripped.split()
        try:
            allowed = arity[tag]
        except KeyError:
            raise GraphFileError(lineno, "unknown record type {!r}"
                                 .format(tag))
        if len(fields) not in allowed:
            raise GraphFileError(
                lineno, "{} record takes {} fields, got {}"
                .format(tag, ' or '.join(str(a) for a in allowed),
                        len(fields)))
        yield Record(lineno, tag, fields)


def parse_number(record: Record, field: str) -> float:
    try:
        value = float(field)
    except ValueError:
        raise GraphFileError(record.lineno, "not a number: {!r}".format(field))
    if not math.isfinite(value):
        raise GraphFileError(record.lineno,
                             "non-finite number: {!r}".format(field))
    return value


def format_number(value: float) -> str:
    return repr(float(value))


def parse_graph(text: str) -> WeightedGraph:
    vertices: List[str] = []
    measure: List[float] = []
    declared: Set[str] = set()
    edges: List[Tuple[str, str, float]] = []
    seen_edges: Set[Tuple[str, str]] = set()

    for record in iter_records(text, {'V': (1, 2), 'E': (3,)}):
        if record.tag == 'V':
            vertex = record.fields[0]
            if vertex in declared:
                raise GraphFileError(record.lineno,
                                     "duplicate vertex id {!r}".format(vertex))
            value = (parse_number(record, record.fields[1])
                     if len(record.fields) == 2 else 1.0)
            if value <= 0:
                raise GraphFileError(
                    record.lineno,
                    "nonpositive measure {} at vertex {!r}"
                    .format(value, vertex))
            declared.add(vertex)
            vertices.append(vertex)
            measure.append(value)
        else:
            u, v = record.fields[0], record.fields[1]
            weight = parse_number(record, record.fields[2])
            for endpoint in (u, v):
                if endpoint not in declared:
                    raise GraphFileError(
                        record.lineno,
                        "edge endpoint {!r} not declared".format(endpoint))
            if u == v:
                raise GraphFileError(record.lineno,
                                     "self-loop at vertex {!r}".format(u))
            if weight < 0:
                raise GraphFileError(record.lineno,
                                     "negative weight {}".format(weight))
            if weight == 0:
                raise GraphFileError(record.lineno, "zero weight")
            key = (min(u, v), max(u, v))
            if key in seen_edges:
                raise GraphFileError(record.lineno,
                                     "duplicate edge ({}, {})".format(u, v))
            seen_edges.add(key)
            edges.append((u, v, weight))

    return WeightedGraph(vertices, measure, edges)


def write_graph(g: WeightedGraph) -> str:
    lines = ["V {} {}".format(vertex, format_number(m))
             for vertex, m in sorted(zip(g.vertices, g.measure.tolist()))]
    edges = sorted((min(u, v), max(u, v), weight)
                   for u, v, weight in g.edges())
    lines.extend("E {} {} {}".format(u, v, format_number(weight))
                 for u, v, weight in edges)
    return "\n".join(lines) + "\n"


def parse_vertex_set(g: WeightedGraph, text: str) -> VertexSet:
    """ Read "I <vertex>" records, e.g. the interior of a Dirichlet problem
    """
    members: Set[int] = set()
    for record in iter_records(text, {'I': (1,)}):
        vertex = record.fields[0]
        try:
            i = g.index(vertex)
        except UnknownVertexError as exc:
            raise GraphFileError(record.lineno, exc.args[0])
        if i in members:
            raise GraphFileError(record.lineno,
                                 "vertex {!r} listed twice".format(vertex))
        members.add(i)
    return VertexSet(g, members)
