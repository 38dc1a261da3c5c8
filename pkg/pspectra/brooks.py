""" Exponential volume growth and the Brooks-type bound mu^p / (2 p^p).

    On an infinite graph whose pseudo metric d satisfies
    sum_y b(x, y) d(x, y)^p <= m(x), lambda0_p <= mu^p / (2 p^p). The
    proof tests the quotient with the functions

        f = ((e^(a r) ^ e^(a (2r - d(x0, .)))) - 1) v 0,
        g = (f + 2) 1_(B_2r),

    and this module reproduces it on finite truncations: a host ball of
    radius R with the Dirichlet interior ball(R - 1).
"""
import logging
import math

from abc import ABC, abstractmethod
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .concurrency_model import ConcurrencyModel
from .eigensolver import EigenResult, SolverConfig, solve_ground_dirichlet
from .energy import VertexFunction, energy, p_norm
from .graph import (
    InvalidGraphError, VertexSet, WeightedGraph, incident_sums,
    induced_subgraph
    )
from .graph.generators import GeneratorSpec, generate
from .metrics import (
    MEMBERSHIP_TOLERANCE, EdgeLength, constant_length, source_distances
    )
from .numerics import accurate_sum, check_exponent
from .seeding import rng_for

_logger = logging.getLogger(__name__)

BROOKS_ALPHA_FACTORS = (1.05, 1.25, 1.5)
ALL_CENTERS_LIMIT = 200
CENTER_SAMPLES = 32
BOUND_SLACK = 5e-3
INEQUALITY_RTOL = 1e-10

CENTER_MODES = ('auto', 'root', 'all', 'explicit')
SCHEDULE_TOO_SHORT = 'schedule too short'
NOT_DECREASING = 'lambda sequence not decreasing'
GROWTH_WINDOW = 'minimum over the top half of the unsaturated radii'
TRUNCATION_CAVEAT = ('finite truncations are consistent with the bound but '
                     'do not certify it for the infinite graph')
ROOT_CENTERS_NOTE = ('growth measured from the root only; pass centers=auto '
                     'for every vertex up to {} vertices'
                     .format(ALL_CENTERS_LIMIT))


class SaturatedGrowthError(ValueError):
    pass


class MetricConditionError(ValueError):
    pass


class CenterSpec(NamedTuple):
    """ Which centers o enter the inf over o of the ball-measure ratios

        'auto' takes every vertex up to ALL_CENTERS_LIMIT vertices and
        otherwise the root plus `samples` seeded random centers.
    """
    mode: str = 'auto'
    vertices: Tuple[str, ...] = ()
    samples: int = CENTER_SAMPLES
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in CENTER_MODES:
            raise ValueError("unknown center mode {!r}".format(self.mode))
        if self.mode == 'explicit' and not self.vertices:
            raise ValueError("explicit center mode needs vertices")
        if self.samples < 0:
            raise ValueError("center samples must be >= 0")

    def resolve(self, g: WeightedGraph, root: Optional[str]) -> List[int]:
        self.validate()
        if self.mode == 'explicit':
            return [g.index(v) for v in self.vertices]
        if self.mode == 'root':
            if root is None:
                raise ValueError("center mode 'root' needs a root vertex")
            return [g.index(root)]
        if self.mode == 'all' or g.n <= ALL_CENTERS_LIMIT:
            return list(range(g.n))
        first = g.index(root) if root is not None else 0
        others = np.array([i for i in range(g.n) if i != first])
        picks = rng_for(self.seed, 'centers').choice(
            len(others), size=min(self.samples, len(others)), replace=False)
        return [first] + sorted(others[picks].tolist())


class VolumeGrowthEstimate(NamedTuple):
    radii: List[int]           # unsaturated radii, increasing
    log_ratios: List[float]    # min over centers of log(m(B_r)/m(B_1)) / r
    mu_estimate: float
    centers_sampled: List[str]
    saturated: List[int]       # radii where some ball is all of X
    window: List[int]          # radii whose minimum gives mu_estimate


def _check_radii(radii: Sequence[int], minimum: int) -> List[int]:
    schedule = [int(r) for r in radii]
    if not schedule:
        raise ValueError("empty radius schedule")
    if any(r != s for r, s in zip(schedule, radii)):
        raise ValueError("radii must be integers")
    if schedule[0] < minimum:
        raise ValueError("radii must be >= {}".format(minimum))
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("radii must be strictly increasing")
    return schedule


def volume_growth(g: WeightedGraph, d: EdgeLength, radii: Sequence[int],
                  centers: CenterSpec = CenterSpec(),
                  root: Optional[str] = None,
                  concurrency: Optional[ConcurrencyModel] = None
                  ) -> VolumeGrowthEstimate:
    """ Ball-measure growth rates for the path metric of d.

        A finite graph has every ball equal to X eventually, so radii at
        which some sampled ball is saturated are excluded and listed.
    """
    schedule = _check_radii(radii, 1)
    sources = centers.resolve(g, root)
    rows = source_distances(g, d, sources, concurrency)
    m = g.measure

    kept: List[int] = []
    ratios: List[float] = []
    saturated: List[int] = []
    unit_balls = [accurate_sum(m[row <= 1.0]) for row in rows]
    for r in schedule:
        inside = rows <= r
        if bool(np.any(np.all(inside, axis=1))):
            saturated.append(r)
            continue
        ratio = min(math.log(accurate_sum(m[mask]) / base) / r
                    for mask, base in zip(inside, unit_balls))
        kept.append(r)
        ratios.append(ratio)
    if saturated:
        _logger.warning("balls saturate at radii %s", saturated)
    if not kept:
        raise SaturatedGrowthError("every radius in {} saturates the graph"
                                   .format(schedule))
    half = len(kept) // 2
    mu = min(ratios[half:])
    _logger.debug("growth rates %s, mu estimate %r", ratios, mu)
    return VolumeGrowthEstimate(kept, ratios, mu,
                                [g.vertices[i] for i in sources], saturated,
                                kept[half:])


def brooks_bound(mu: float, p: float) -> float:
    """ mu^p / (2 p^p)
    """
    check_exponent(p)
    if mu < 0:
        raise ValueError("growth rate must be >= 0, got {}".format(mu))
    return mu ** p / (2.0 * p ** p)


class BrooksMetricCertificate(NamedTuple):
    p: float
    holds: bool
    slack: np.ndarray    # m(x) - sum_y b(x, y) d(x, y)^p per vertex
    worst_slack: float
    witness: Optional[str]


def brooks_metric_check(g: WeightedGraph, d: EdgeLength,
                        p: float) -> BrooksMetricCertificate:
    """ sum_y b(x, y) d(x, y)^p <= m(x) at every vertex.

        The exponent is p itself, not the conjugate exponent of R_p.
    """
    check_exponent(p)
    load = incident_sums(g, g.edge_weight * d.values ** p)
    slack = g.measure - load
    if not g.n:
        return BrooksMetricCertificate(p, True, slack, math.inf, None)
    worst = int(np.argmin(slack))
    holds = bool(np.all(slack >= -MEMBERSHIP_TOLERANCE
                        * np.maximum(1.0, g.measure)))
    return BrooksMetricCertificate(p, holds, slack, float(slack[worst]),
                                   g.vertices[worst])


class BrooksTestFunction(NamedTuple):
    r: float
    x0: str
    alpha: float
    f: VertexFunction
    g: VertexFunction
    distance: np.ndarray   # d(x0, .)


def build_test_function(host: WeightedGraph, d: EdgeLength, r: float,
                        x0: str, alpha: float,
                        distances: Optional[np.ndarray] = None
                        ) -> BrooksTestFunction:
    """ f = e^(alpha s) - 1 with s = 2r - d(x0, .) clipped to [0, r]
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive, got {}".format(alpha))
    if not r >= 1:
        raise ValueError("test function radius must be >= 1, got {}"
                         .format(r))
    if distances is None:
        distances = source_distances(host, d, [host.index(x0)])[0]
    s = np.clip(2 * r - distances, 0.0, r)
    f = np.expm1(alpha * s)
    g = np.where(distances <= 2 * r, f + 2.0, 0.0)
    return BrooksTestFunction(r, x0, alpha, f, g, distances)


def lipschitz_check(host: WeightedGraph, d: EdgeLength,
                    tf: BrooksTestFunction, p: float) -> Tuple[bool, float]:
    """ |f(x) - f(y)|^p <= (alpha^p / 2)(g(x)^p + g(y)^p) d(x, y)^p per edge

        Returns the verdict and the largest lhs - rhs.
    """
    check_exponent(p)
    u, v = host.edge_u, host.edge_v
    lhs = np.abs(tf.f[u] - tf.f[v]) ** p
    rhs = tf.alpha ** p / 2.0 * (tf.g[u] ** p + tf.g[v] ** p) \
        * d.values ** p
    if not len(lhs):
        return True, 0.0
    excess = lhs - rhs
    holds = bool(np.all(excess <= INEQUALITY_RTOL * np.maximum(1.0, rhs)))
    return holds, float(np.max(excess))


def exponential_sum_check(s: float, t: float,
                          p: float) -> Tuple[float, float]:
    """ Both sides of |e^s - e^t|^p <= (1/2)(e^(sp) + e^(tp)) |s - t|^p
    """
    check_exponent(p)
    lhs = abs(math.exp(s) - math.exp(t)) ** p
    rhs = 0.5 * (math.exp(s * p) + math.exp(t * p)) * abs(s - t) ** p
    return lhs, rhs


class QuotientCheck(NamedTuple):
    quotient: float      # E_p(f) / ||f||^p
    bound: float         # (alpha^p / 2) (||g|| / ||f||)^p
    norm_ratio: float    # ||g|| / ||f||
    holds: bool


def quotient_bound_check(host: WeightedGraph, tf: BrooksTestFunction,
                         p: float) -> QuotientCheck:
    check_exponent(p)
    f_norm = p_norm(host, tf.f, p)
    if f_norm == 0:
        raise ValueError("test function vanishes")
    ratio = p_norm(host, tf.g, p) / f_norm
    quotient = energy(host, tf.f, p) / f_norm ** p
    bound = tf.alpha ** p / 2.0 * ratio ** p
    return QuotientCheck(quotient, bound, ratio,
                         quotient <= bound * (1.0 + INEQUALITY_RTOL))


class Truncation(NamedTuple):
    host: WeightedGraph
    interior: VertexSet
    root: str
    lengths: EdgeLength


class TruncatedFamily(ABC):
    """ A graph that can be cut down to the ball of any radius R.
    """
    name: str

    @abstractmethod
    def truncate(self, radius: int) -> Truncation:
        """ host = ball(radius), interior = ball(radius - 1)
        """
        raise NotImplementedError


class TreeFamily(TruncatedFamily):
    """ The k-regular tree with the combinatorial metric

        k = 2 gives the path, whose growth rate is 0.
    """

    def __init__(self, k: int, measure: str = 'normalizing') -> None:
        self.k = k
        self.measure = measure
        self.name = "tree:{}".format(k)
        GeneratorSpec('tree_ball', k=k, measure=measure).validate()

    def truncate(self, radius: int) -> Truncation:
        generated = generate(GeneratorSpec('tree_ball', k=self.k,
                                           radius=radius,
                                           measure=self.measure))
        host = generated.graph
        assert generated.root is not None and generated.interior is not None
        return Truncation(host, generated.interior, generated.root,
                          constant_length(host, 1.0))


class GraphBallFamily(TruncatedFamily):
    """ Balls around `root` in a given graph with edge lengths d
    """

    def __init__(self, d: EdgeLength, root: str,
                 name: str = 'custom') -> None:
        self.d = d
        self.root = root
        self.name = name
        self._distance = source_distances(d.graph, d,
                                          [d.graph.index(root)])[0]

    def truncate(self, radius: int) -> Truncation:
        g = self.d.graph
        ball = VertexSet.from_mask(g, self._distance <= radius)
        host, kept = induced_subgraph(g, ball)
        inner = self._distance[ball.mask()] <= radius - 1
        return Truncation(host, VertexSet.from_mask(host, inner), self.root,
                          EdgeLength(host, self.d.values[kept],
                                     self.d.name))


class FunctionCheckRow(NamedTuple):
    alpha: float
    r: float
    quotient: float
    bound: float
    norm_ratio: float
    lipschitz_holds: bool
    lipschitz_excess: float
    holds: bool


class BrooksRow(NamedTuple):
    radius: int
    host_size: int
    interior_size: int
    lambda_ground: EigenResult
    growth: VolumeGrowthEstimate
    bound: float
    test_functions: List[FunctionCheckRow]


class BrooksReport(NamedTuple):
    family: str
    p: float
    rows: List[BrooksRow]
    mu_estimate: float
    bound: float
    decreasing: bool
    quotient_route: bool
    bound_route: bool
    bound_route_note: str
    caveat: str = TRUNCATION_CAVEAT
    growth_window: str = GROWTH_WINDOW
    centers_note: str = ''


def _embed(host: WeightedGraph, vertices: Sequence[str],
           values: np.ndarray) -> np.ndarray:
    f = np.zeros(host.n)
    f[[host.index(v) for v in vertices]] = values
    return f


def brooks_verify(family: TruncatedFamily, p: float,
                  radius_schedule: Sequence[int],
                  cfg: SolverConfig = SolverConfig(),
                  alpha_factors: Sequence[float] = BROOKS_ALPHA_FACTORS,
                  centers: CenterSpec = CenterSpec('root'),
                  concurrency: Optional[ConcurrencyModel] = None,
                  slack: float = BOUND_SLACK) -> BrooksReport:
    """ Dirichlet lambda0_p along growing truncations against the bound.

        Each radius R yields the test functions with r = (R - 1) // 2 and
        alpha = (mu / p) c for c in alpha_factors, which then vanish off
        the interior. The radii run in order: every solve starts from the
        previous minimizer and from the test functions, so the sequence
        never increases and never exceeds the test-function quotients.
        Growth is measured from the root unless `centers` says otherwise;
        the report then carries ROOT_CENTERS_NOTE.
    """
    check_exponent(p, strict=True)
    schedule = _check_radii(radius_schedule, 3)
    if any(not c > 1 for c in alpha_factors):
        raise ValueError("alpha factors must exceed 1")

    rows: List[BrooksRow] = []
    previous: Optional[Tuple[Tuple[str, ...], np.ndarray]] = None
    for radius in schedule:
        t = family.truncate(radius)
        host = t.host
        certificate = brooks_metric_check(host, t.lengths, p)
        if not certificate.holds:
            raise MetricConditionError(
                "sum b d^p exceeds m at {} by {} (radius {})"
                .format(certificate.witness, -certificate.worst_slack,
                        radius))
        growth = volume_growth(host, t.lengths, range(1, radius), centers,
                               root=t.root, concurrency=concurrency)
        mu = growth.mu_estimate
        r = (radius - 1) // 2
        rho = source_distances(host, t.lengths, [host.index(t.root)])[0]
        functions: List[BrooksTestFunction] = []
        if mu > 0:
            functions = [build_test_function(host, t.lengths, r, t.root,
                                             mu / p * c, distances=rho)
                         for c in alpha_factors]
        else:
            _logger.warning("growth estimate is 0 at radius %d, no test "
                            "functions", radius)

        starts = [tf.f for tf in functions]
        if previous is not None:
            starts.append(_embed(host, *previous))
        result = solve_ground_dirichlet(host, t.interior, p, cfg,
                                        concurrency, extra_starts=starts)
        previous = (host.vertices, result.minimizer)

        checks: List[FunctionCheckRow] = []
        for tf in functions:
            lipschitz, excess = lipschitz_check(host, t.lengths, tf, p)
            q = quotient_bound_check(host, tf, p)
            checks.append(FunctionCheckRow(
                tf.alpha, tf.r, q.quotient, q.bound, q.norm_ratio,
                lipschitz, excess, q.holds and lipschitz))
        _logger.info("radius %d: lambda0 %r, mu %r", radius,
                     result.lambda_estimate, mu)
        rows.append(BrooksRow(radius, host.n, len(t.interior), result,
                              growth, brooks_bound(mu, p), checks))

    values = [row.lambda_ground.lambda_estimate for row in rows]
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    mu = rows[-1].growth.mu_estimate
    bound = brooks_bound(mu, p)
    quotient_route = all(c.holds for row in rows
                         for c in row.test_functions)
    bound_route = values[-1] <= bound + slack
    note = ''
    if not bound_route:
        note = SCHEDULE_TOO_SHORT if decreasing else NOT_DECREASING
        _logger.warning("lambda0 %r at radius %d is above the bound %r: %s",
                        values[-1], schedule[-1], bound, note)
    centers_note = ROOT_CENTERS_NOTE if centers.mode == 'root' else ''
    return BrooksReport(family.name, p, rows, mu, bound, decreasing,
                        quotient_route, bound_route, note,
                        centers_note=centers_note)


def family_from_graph(g: WeightedGraph, d: EdgeLength,
                      root: Optional[str] = None,
                      name: str = 'custom') -> GraphBallFamily:
    if not g.same_structure(d.graph):
        raise ValueError("edge length belongs to a different graph")
    if not g.n:
        raise InvalidGraphError("empty graph")
    return GraphBallFamily(d, root if root is not None else g.vertices[0],
                           name)
