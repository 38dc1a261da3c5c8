""" Deterministic graph families used as fixtures and experiment inputs.

    A family is described by a `GeneratorSpec`, written on the command line
    as ``<family>:<key>=<value>,...``, e.g. ``k_regular:n=20,k=4,seed=7``.
    All randomness is drawn from `numpy.random.default_rng` seeded through
    `pspectra.seeding.rng_for`, so a GeneratorSpec fully determines the
    output:

    - erdos_renyi: one uniform draw per vertex pair (i < j, lexicographic),
      the pair is an edge when the draw is below `prob`;
    - k_regular: pairing model, n*k half-edges permuted and paired in order,
      rejected on self-loops or multi-edges, at most `MAX_PAIRING_ATTEMPTS`;
    - random weights and measures: uniform on [0.5, 2), drawn from child
      seeds labelled 'weights' and 'measure' after the structure is fixed.
"""
import itertools
import logging
import math

from typing import Dict, List, NamedTuple, Optional, Set, Tuple

import numpy as np
from more_itertools import chunked

from ..seeding import rng_for
from . import (
    InvalidGraphError, VertexSet, WeightedGraph, normalizing_measure
    )

_logger = logging.getLogger(__name__)

MAX_PAIRING_ATTEMPTS = 10000
EXHAUSTIVE_W0_LIMIT = 2 ** 20
RANDOM_RANGE = (0.5, 2.0)

FAMILIES = ('complete', 'path', 'cycle', 'erdos_renyi', 'k_regular',
            'tree_ball', 'example2')
WEIGHT_POLICIES = ('unit', 'random')
MEASURE_POLICIES = ('unit', 'normalizing', 'random')


class InfeasibleFamilyError(ValueError):
    pass


class GeneratorSpec(NamedTuple):
    """ A graph family with its parameters

        Parameters a family does not use keep their defaults.
        example2 takes its base graph from (n, k, seed) as a k_regular spec.
    """
    family: str
    n: int = 0
    k: int = 0
    prob: float = 0.5
    radius: int = 0
    seed: int = 0
    w0_size: int = 0
    weights: str = 'unit'
    measure: str = 'unit'

    @staticmethod
    def parse(text: str) -> 'GeneratorSpec':
        family, _, rest = text.partition(':')
        values: Dict[str, object] = {}
        for item in filter(None, rest.split(',')):
            key, sep, raw = item.partition('=')
            key = key.strip()
            if not sep or key not in GeneratorSpec._field_defaults:
                raise ValueError("bad generator parameter {!r} in {!r}"
                                 .format(item, text))
            default = GeneratorSpec._field_defaults[key]
            try:
                values[key] = type(default)(raw.strip())
            except ValueError:
                raise ValueError("bad value for {}: {!r}".format(key, raw))
        spec = GeneratorSpec(family.strip(), **values)  # type: ignore
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError("unknown graph family {!r}".format(self.family))
        if self.weights not in WEIGHT_POLICIES:
            raise ValueError("unknown weight policy {!r}".format(self.weights))
        if self.measure not in MEASURE_POLICIES:
            raise ValueError("unknown measure policy {!r}"
                             .format(self.measure))
        if not 0.0 <= self.prob <= 1.0:
            raise ValueError("edge probability {} outside [0, 1]"
                             .format(self.prob))
        if self.family == 'example2' and self.weights != 'unit':
            raise ValueError("example2 is defined for 0/1 weights only")
        if self.family == 'tree_ball' and (self.k < 1 or self.radius < 0):
            raise ValueError("tree_ball needs k >= 1 and radius >= 0")
        if self.family in ('complete', 'path', 'cycle', 'erdos_renyi',
                           'k_regular', 'example2') and self.n < 1:
            raise ValueError("{} needs n >= 1".format(self.family))


class GeneratedGraph(NamedTuple):
    graph: WeightedGraph
    root: Optional[str] = None                # tree_ball center
    interior: Optional[VertexSet] = None      # tree_ball: depth < radius
    minimizing_set: Optional[VertexSet] = None  # example2 W0
    hub: Optional[str] = None                 # example2 w
    base: Optional[WeightedGraph] = None      # example2 b0


Pairs = List[Tuple[int, int]]


def _ids(n: int, prefix: str = 'v') -> List[str]:
    return ["{}{}".format(prefix, i) for i in range(n)]


def _complete(n: int) -> Pairs:
    return list(itertools.combinations(range(n), 2))


def _path(n: int) -> Pairs:
    return [(i, i + 1) for i in range(n - 1)]


def _cycle(n: int) -> Pairs:
    if n < 3:
        return _path(n)
    return _path(n) + [(0, n - 1)]


def _erdos_renyi(n: int, prob: float, seed: int) -> Pairs:
    candidates = _complete(n)
    draws = rng_for(seed, 'structure').random(len(candidates))
    return [pair for pair, draw in zip(candidates, draws.tolist())
            if draw < prob]


def _k_regular(n: int, k: int, seed: int) -> Pairs:
    if k < 1 or k >= n or (n * k) % 2:
        raise InfeasibleFamilyError(
            "no simple {}-regular graph on {} vertices".format(k, n))
    rng = rng_for(seed, 'structure')
    stubs = np.repeat(np.arange(n), k)
    for attempt in range(MAX_PAIRING_ATTEMPTS):
        paired = rng.permutation(stubs).reshape(-1, 2)
        lo = np.minimum(paired[:, 0], paired[:, 1])
        hi = np.maximum(paired[:, 0], paired[:, 1])
        if np.any(lo == hi):
            continue
        pairs = sorted(zip(lo.tolist(), hi.tolist()))
        if len(set(pairs)) != len(pairs):
            continue
        _logger.debug("pairing model accepted after %d attempts",
                      attempt + 1)
        return pairs
    raise InfeasibleFamilyError(
        "pairing model found no simple {}-regular graph on {} vertices "
        "in {} attempts".format(k, n, MAX_PAIRING_ATTEMPTS))


def _tree_ball(k: int, radius: int) -> Tuple[Pairs, List[int]]:
    """ The ball of `radius` around a vertex of the infinite k-regular tree

        Vertices are numbered breadth first; returns edges and depths.
    """
    pairs: Pairs = []
    depth = [0]
    frontier = [0]
    for level in range(1, radius + 1):
        next_frontier = []
        for parent in frontier:
            for _ in range(k if parent == 0 else k - 1):
                child = len(depth)
                depth.append(level)
                pairs.append((parent, child))
                next_frontier.append(child)
        frontier = next_frontier
    return pairs, depth


def _boundary_sizes(n: int, pairs: Pairs, members: np.ndarray) -> np.ndarray:
    """ Boundary edge counts of a batch of subsets given as index rows
    """
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    v = np.array([p[1] for p in pairs], dtype=np.int64)
    masks = np.zeros((len(members), n), dtype=bool)
    np.put_along_axis(masks, members, True, axis=1)
    return np.count_nonzero(masks[:, u] != masks[:, v], axis=1)


def minimizing_subset(n: int, pairs: Pairs, size: int) -> Tuple[int, ...]:
    """ A subset of exactly `size` vertices with the fewest boundary edges.

        Exhaustive over combinations in lexicographic order (the first
        minimum wins) when there are at most EXHAUSTIVE_W0_LIMIT of them,
        otherwise grown greedily from vertex 0.
    """
    if math.comb(n, size) <= EXHAUSTIVE_W0_LIMIT:
        best: Optional[Tuple[int, Tuple[int, ...]]] = None
        for chunk in chunked(itertools.combinations(range(n), size), 4096):
            sizes = _boundary_sizes(n, pairs, np.array(chunk, dtype=np.int64))
            at = int(np.argmin(sizes))
            if best is None or sizes[at] < best[0]:
                best = (int(sizes[at]), tuple(chunk[at]))
        assert best is not None
        return best[1]

    _logger.info("choosing a %d-vertex minimizing set greedily", size)
    chosen: List[int] = [0]
    while len(chosen) < size:
        rest = [i for i in range(n) if i not in chosen]
        trial = np.array([chosen + [i] for i in rest], dtype=np.int64)
        sizes = _boundary_sizes(n, pairs, trial)
        chosen.append(rest[int(np.argmin(sizes))])
    return tuple(sorted(chosen))


def _example2(spec: GeneratorSpec) -> Tuple[Pairs, Pairs, Tuple[int, ...]]:
    base = _k_regular(spec.n, spec.k, spec.seed)
    if spec.w0_size < 1 or 2 * spec.w0_size > spec.n:
        raise InfeasibleFamilyError(
            "W0 size {} must lie in [1, n/2] for n = {}"
            .format(spec.w0_size, spec.n))
    w0 = minimizing_subset(spec.n, base, spec.w0_size)
    hub = w0[0]
    existing: Set[Tuple[int, int]] = set(base)
    extended = list(base)
    for other in w0[1:]:
        if (hub, other) not in existing:
            extended.append((hub, other))
    return base, sorted(extended), w0


def _apply_policies(spec: GeneratorSpec, vertices: List[str],
                    pairs: Pairs) -> WeightedGraph:
    if spec.weights == 'random':
        weights = rng_for(spec.seed, 'weights').uniform(
            *RANDOM_RANGE, size=len(pairs)).tolist()
    else:
        weights = [1.0] * len(pairs)
    if spec.measure == 'random':
        measure = rng_for(spec.seed, 'measure').uniform(
            *RANDOM_RANGE, size=len(vertices)).tolist()
    else:
        measure = [1.0] * len(vertices)
    graph = WeightedGraph.from_indices(
        vertices, measure, ((i, j, w) for (i, j), w in zip(pairs, weights)))
    if spec.measure == 'normalizing':
        graph = normalizing_measure(graph)
    return graph


def generate(spec: GeneratorSpec) -> GeneratedGraph:
    spec.validate()
    family = spec.family
    if family == 'complete':
        return GeneratedGraph(_apply_policies(spec, _ids(spec.n),
                                              _complete(spec.n)))
    if family == 'path':
        return GeneratedGraph(_apply_policies(spec, _ids(spec.n),
                                              _path(spec.n)))
    if family == 'cycle':
        return GeneratedGraph(_apply_policies(spec, _ids(spec.n),
                                              _cycle(spec.n)))
    if family == 'erdos_renyi':
        return GeneratedGraph(_apply_policies(
            spec, _ids(spec.n), _erdos_renyi(spec.n, spec.prob, spec.seed)))
    if family == 'k_regular':
        return GeneratedGraph(_apply_policies(
            spec, _ids(spec.n), _k_regular(spec.n, spec.k, spec.seed)))
    if family == 'tree_ball':
        pairs, depth = _tree_ball(spec.k, spec.radius)
        graph = _apply_policies(spec, _ids(len(depth), 't'), pairs)
        interior = VertexSet(graph, (i for i, level in enumerate(depth)
                                     if level < spec.radius))
        return GeneratedGraph(graph, root=graph.vertices[0],
                              interior=interior)
    if family == 'example2':
        base_pairs, pairs, w0 = _example2(spec)
        vertices = _ids(spec.n)
        base = _apply_policies(spec, vertices, base_pairs)
        graph = _apply_policies(spec, vertices, pairs)
        return GeneratedGraph(graph, minimizing_set=VertexSet(graph, w0),
                              hub=vertices[w0[0]], base=base)
    raise InvalidGraphError("unknown graph family {!r}".format(family))
