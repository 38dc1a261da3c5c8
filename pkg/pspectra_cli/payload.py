""" Conversion of result records into JSON-compatible payloads.

    A `ResultVisitor` subclass declares one visit_*() method per record type;
    the type is read from the annotation of the method's parameter, and
    dispatch follows the MRO of the visited value. Subclasses inherit the
    targets of their bases and may override them.
"""
import inspect
import math
import time

from abc import ABC
from typing import Any, Callable, Dict, List, NamedTuple, Optional

import numpy as np

from pspectra.bounds import BoundReport
from pspectra.graph import VertexSet, WeightedGraph
from pspectra.metrics import EdgeLength

SCHEMA_VERSION = 1

Payload = Any


class ResultVisitor(ABC):
    __visitor_targets__: Dict[type, Callable[..., Payload]] = {}

    def __init_subclass__(cls, **kwargs: Any) -> None:
        super().__init_subclass__(**kwargs)
        targets = dict(cls.__visitor_targets__)
        for name, member in cls.__dict__.items():
            if not name.startswith('visit_') or not inspect.isfunction(member):
                continue
            signature = inspect.signature(member)
            if len(signature.parameters) != 2:
                raise TypeError("{} should have exactly 2 parameters"
                                .format(member.__name__))
            parameters = iter(signature.parameters.values())
            next(parameters)
            annotation = next(parameters).annotation
            if not isinstance(annotation, type):
                raise TypeError("visit_*() parameter must be annotated with "
                                "a type, got {}".format(repr(annotation)))
            targets[annotation] = member
        cls.__visitor_targets__ = targets

    def visit(self, value: Any) -> Payload:
        if value is None:
            return None
        for cls in type(value).mro():
            method = self.__visitor_targets__.get(cls, None)
            if method is not None:
                return method(self, value)
        raise TypeError("No visit_*() method for {}".format(repr(value)))


def number(value: float) -> Payload:
    """ Finite floats stay numbers; inf and nan become strings
    """
    value = float(value)
    if math.isfinite(value):
        return value
    if math.isnan(value):
        return 'nan'
    return 'inf' if value > 0 else '-inf'


class PayloadBuilder(ResultVisitor):

    def visit_bool(self, value: bool) -> Payload:
        return value

    def visit_numpy_bool(self, value: np.bool_) -> Payload:
        return bool(value)

    def visit_int(self, value: int) -> Payload:
        return value

    def visit_numpy_integer(self, value: np.integer) -> Payload:
        return int(value)

    def visit_float(self, value: float) -> Payload:
        return number(value)

    def visit_numpy_floating(self, value: np.floating) -> Payload:
        return number(float(value))

    def visit_str(self, value: str) -> Payload:
        return value

    def visit_array(self, value: np.ndarray) -> Payload:
        return [self.visit(item) for item in value.tolist()]

    def visit_list(self, value: list) -> Payload:
        return [self.visit(item) for item in value]

    def visit_dict(self, value: dict) -> Payload:
        return {str(key): self.visit(item) for key, item in value.items()}

    def visit_tuple(self, value: tuple) -> Payload:
        fields = getattr(value, '_fields', None)
        if fields is None:
            return [self.visit(item) for item in value]
        return {field: self.visit(getattr(value, field)) for field in fields}

    def visit_vertex_set(self, value: VertexSet) -> Payload:
        return value.ids()

    def visit_graph(self, value: WeightedGraph) -> Payload:
        return {'n': value.n, 'edges': value.num_edges,
                'total_measure': number(value.total_measure)}

    def visit_edge_length(self, value: EdgeLength) -> Payload:
        return {'name': value.name, 'values': self.visit(value.values)}

    def visit_bound_report(self, value: BoundReport) -> Payload:
        payload = self.visit_tuple(value)
        payload['passed'] = value.passed
        return payload


def to_payload(value: Any) -> Payload:
    return PayloadBuilder().visit(value)


class Table(NamedTuple):
    name: str
    columns: List[str]
    rows: List[List[Any]]


class RunManifest(NamedTuple):
    command: str
    inputs: List[str]
    flags: Dict[str, Any]
    seed: int
    version: str
    schema: int = SCHEMA_VERSION
    wall_time: Optional[float] = None

    def finished(self, started: float) -> 'RunManifest':
        return self._replace(wall_time=time.perf_counter() - started)


class Report(NamedTuple):
    manifest: RunManifest
    result: Any
    tables: List[Table]

    def payload(self) -> Dict[str, Any]:
        builder = PayloadBuilder()
        return {
            'schema': SCHEMA_VERSION,
            'manifest': builder.visit(self.manifest),
            'result': builder.visit(self.result),
            'tables': [{'name': t.name, 'columns': list(t.columns),
                        'rows': builder.visit(t.rows)}
                       for t in self.tables],
            }
