""" Two-sided estimates of lambda0 and lambda1 from isoperimetric constants.

    Lower bounds hold for edge lengths d in R_p(b, m):

        (2^(p-1) / p^p) h(d)^p <= lambda

    and the upper bounds hold for every d with delta(d) > 0:

        lambda0 <= h0(d) / delta(d),   lambda1 <= 2^(p-1) h1(d) / delta(d).

    `full_report` evaluates all of them at one p, together with the
    classical degree-based lower bound, against solver estimates. Solver
    estimates are upper bounds on lambda, so a failing lower-bound row is a
    genuine defect while a failing upper-bound row can also mean the solver
    stopped early; the latter triggers one re-solve with twice the restarts.
"""
import logging
import math

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .cheeger import (
    DEFAULT_MAX_EXACT_N, EXACT, H0, H1, IsoperimetricResult,
    _SubsetEnumeration, isoperimetric
    )
from .concurrency_model import ConcurrencyModel, default_model
from .eigensolver import (
    EigenResult, SolverConfig, solve_gap, solve_ground_dirichlet
    )
from .energy import VertexFunction
from .graph import (
    VertexSet, WeightedGraph, boundary_measure, edge_weight, weighted_degrees
    )
from .graph.generators import GeneratedGraph
from .metrics import (
    EdgeLength, check_membership, conjugate_exponent, constant_length,
    degree_metric, delta
    )
from .numerics import check_exponent

_logger = logging.getLogger(__name__)

VERDICT_TOLERANCE = 1e-7
TRUNCATION_NOTE = 'truncation convention'
OUTSIDE_HYPOTHESIS = 'm < 1 somewhere, not a theorem here'


def cheeger_lower_bound(h: float, p: float) -> float:
    """ (2^(p-1) / p^p) h^p
    """
    check_exponent(p)
    if h < 0:
        raise ValueError("isoperimetric constant must be >= 0")
    return 2 ** (p - 1) / p ** p * h ** p


def classical_lower_bound(h: float, p: float, max_degree: float) -> float:
    """ (2 / M)^(p-1) (h / p)^p with h = h1(1)
    """
    check_exponent(p)
    return (2.0 / max_degree) ** (p - 1) * (h / p) ** p


def normalized_lower_bound(h: float, p: float) -> float:
    """ 2^(p-1) (h / p)^p; the classical bound when Deg is identically 1
    """
    check_exponent(p)
    return 2 ** (p - 1) * (h / p) ** p


def max_degree(g: WeightedGraph) -> Tuple[float, str]:
    """ M of the classical bound together with the convention used.

        0/1 weights give the maximal combinatorial degree, any measure;
        other weights the maximal weighted degree.
    """
    if g.is_unit_weight():
        return float(np.max(g.combinatorial_degrees(), initial=0.0)), \
            'combinatorial'
    return float(np.max(weighted_degrees(g), initial=0.0)), 'weighted'


def buser_upper_bounds(g: WeightedGraph, d: EdgeLength, variant: str,
                       p: float, interior: Optional[VertexSet] = None,
                       h: Optional[float] = None,
                       max_exact_n: int = DEFAULT_MAX_EXACT_N,
                       concurrency: Optional[ConcurrencyModel] = None
                       ) -> float:
    """ h0(d) / delta(d) (ground) or 2^(p-1) h1(d) / delta(d) (gap).

        h is computed exactly unless given. delta(d) = 0 gives +inf.
    """
    check_exponent(p)
    smallest = delta(g, d)
    if h is None:
        h = isoperimetric(g, d, variant, interior, mode=EXACT,
                          max_exact_n=max_exact_n,
                          concurrency=concurrency).constant
    if smallest == 0:
        _logger.warning("delta(%s) = 0, the upper bound is trivial", d.name)
        return math.inf
    if variant == H0:
        return h / smallest
    if variant == H1:
        return 2 ** (p - 1) * h / smallest
    raise ValueError("unknown variant {!r}".format(variant))


def buser_test_function(g: WeightedGraph, W: VertexSet) -> VertexFunction:
    """ f_W = m(X \\ W) 1_W - m(W) 1_(X \\ W), orthogonal to constants
    """
    inside = W.mask()
    a, c = W.measure(), W.complement().measure()
    return np.where(inside, c, -a)


def buser_test_quotient(g: WeightedGraph, W: VertexSet, p: float) -> float:
    """ The gap quotient shared by all two-valued functions split by W.

        With a = m(W), c = m(X \\ W) and r = 1/(p-1) it equals
        |dW|_b (a^r + c^r)^(p-1) / (a c), which is at most
        2^(p-1) |dW|_b / m(W) when a <= c.
    """
    check_exponent(p)
    boundary = boundary_measure(g, W, edge_weight(g)).value
    a, c = W.measure(), W.complement().measure()
    if a == 0 or c == 0:
        raise ValueError("test set must be a proper nonempty subset")
    if p == 1:
        return boundary * max(a, c) / (a * c)
    r = 1.0 / (p - 1.0)
    # factor max(a, c)^r out of the sum to keep large r finite
    big, small = max(a, c), min(a, c)
    return boundary * big * (1.0 + (small / big) ** r) ** (p - 1) / (a * c)


def example2_improvement_factor(k: float, n0: float, p: float) -> float:
    """ k^(1/q) / N0^(p-1), the gain of the intrinsic bound with d = k^(-1/q)
    """
    q = conjugate_exponent(p)
    return k ** (1.0 / q) / n0 ** (p - 1)


class Example2Comparison(NamedTuple):
    k: int
    n0: int
    hub: str
    improvement_factor: float
    structure_lower: float       # 2^(p-1) k^(-1/q) (h/p)^p
    classical_n0_lower: float    # (2/N0)^(p-1) (h/p)^p
    h1_degree_estimate: float    # lower estimate of h1(d_p)


def example2_comparison(generated: GeneratedGraph, p: float, h: float,
                        concurrency: Optional[ConcurrencyModel] = None
                        ) -> Example2Comparison:
    """ The predicted gains on a graph built by the example2 generator.

        h1_degree_estimate is (k+1)^(-1/q) min (|dW|_b - c) / #W over
        #W <= #X/2, with c = (k+1)^(-1/q) (k-1).
    """
    if generated.base is None or generated.minimizing_set is None:
        raise ValueError("graph was not built by the example2 generator")
    g = generated.graph
    k = int(np.max(generated.base.combinatorial_degrees()))
    n0 = len(generated.minimizing_set) - 1
    q = conjugate_exponent(p)
    scale = (k + 1) ** (-1.0 / q)
    best = _SubsetEnumeration(g, g.edge_weight, range(g.n), half=True,
                              offset=scale * (k - 1)) \
        .run(concurrency or default_model())
    estimate = scale * best.ratio if best is not None else math.nan
    return Example2Comparison(
        k, n0, generated.hub or '', example2_improvement_factor(k, n0, p),
        2 ** (p - 1) * k ** (-1.0 / q) * (h / p) ** p,
        (2.0 / n0) ** (p - 1) * (h / p) ** p if n0 > 0 else math.nan,
        estimate)


class InequalityRow(NamedTuple):
    """ lhs <= rhs; slack = rhs - lhs, so slack >= 0 means it holds
    """
    name: str
    metric: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    certified: bool   # isoperimetric constant computed exactly
    note: str = ''


def _row(name: str, metric: str, lhs: float, rhs: float, certified: bool,
         note: str = '') -> InequalityRow:
    slack = rhs - lhs
    return InequalityRow(name, metric, lhs, rhs, slack,
                         slack >= -VERDICT_TOLERANCE, certified, note)


class MetricConstants(NamedTuple):
    metric: str
    in_rp: bool
    delta: float
    h1: IsoperimetricResult
    h0: Optional[IsoperimetricResult]


class BoundReport(NamedTuple):
    p: float
    lambda_gap: EigenResult
    lambda_ground: Optional[EigenResult]
    constants: List[MetricConstants]
    rows: List[InequalityRow]
    max_degree: float
    max_degree_convention: str
    classical_lower: float
    normalized_lower: float
    intrinsic_to_classical: float
    example2: Optional[Example2Comparison]
    escalated: bool

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows
                   if row.note != OUTSIDE_HYPOTHESIS)


def _gap_rows(constants: Sequence[MetricConstants], lam: float,
              p: float) -> List[InequalityRow]:
    rows = []
    for c in constants:
        certified = c.h1.mode == EXACT
        if c.in_rp:
            rows.append(_row('cheeger_gap', c.metric,
                             cheeger_lower_bound(c.h1.constant, p), lam,
                             certified))
        upper = (2 ** (p - 1) * c.h1.constant / c.delta if c.delta > 0
                 else math.inf)
        rows.append(_row('buser_gap', c.metric, lam, upper, certified))
    return rows


def _ground_rows(constants: Sequence[MetricConstants],
                 lam: float, p: float) -> List[InequalityRow]:
    rows = []
    for c in constants:
        if c.h0 is None:
            continue
        certified = c.h0.mode == EXACT
        if c.in_rp:
            rows.append(_row('cheeger_ground', c.metric,
                             cheeger_lower_bound(c.h0.constant, p), lam,
                             certified, TRUNCATION_NOTE))
        upper = c.h0.constant / c.delta if c.delta > 0 else math.inf
        rows.append(_row('buser_ground', c.metric, lam, upper, certified,
                         TRUNCATION_NOTE))
    return rows


def _upper_failed(rows: Sequence[InequalityRow]) -> bool:
    return any(not row.passed and row.name.startswith('buser')
               for row in rows)


def default_metrics(g: WeightedGraph, p: float) -> List[EdgeLength]:
    return [degree_metric(g, p), constant_length(g, 1.0)]


def full_report(g: WeightedGraph, p: float,
                cfg: SolverConfig = SolverConfig(),
                metrics: Optional[Sequence[EdgeLength]] = None,
                interior: Optional[VertexSet] = None,
                max_exact_n: int = DEFAULT_MAX_EXACT_N,
                concurrency: Optional[ConcurrencyModel] = None,
                generated: Optional[GeneratedGraph] = None) -> BoundReport:
    """ Evaluate every bound at p for each edge length in `metrics`.

        Lower-bound rows are emitted only for lengths in R_p(b, m). Ground
        rows need a Dirichlet interior. Isoperimetric constants are exact
        within `max_exact_n` and sweep cuts of the solver minimizer above.
    """
    check_exponent(p, strict=True)
    metrics = list(metrics) if metrics is not None \
        else default_metrics(g, p)
    exact = g.n <= max_exact_n

    def constants_for(gap: Optional[EigenResult],
                      ground: Optional[EigenResult]) -> List[MetricConstants]:
        found = []
        for d in metrics:
            h1 = isoperimetric(
                g, d, H1, f=gap.minimizer if gap is not None else None,
                max_exact_n=max_exact_n, concurrency=concurrency)
            h0 = None
            if interior is not None:
                h0 = isoperimetric(
                    g, d, H0, interior,
                    f=ground.minimizer if ground is not None else None,
                    max_exact_n=max_exact_n, concurrency=concurrency)
            found.append(MetricConstants(
                d.name, check_membership(g, d, p).is_member, delta(g, d),
                h1, h0))
        return found

    constants = constants_for(None, None) if exact else []

    def solve(config: SolverConfig) -> Tuple[EigenResult,
                                             Optional[EigenResult]]:
        gap = solve_gap(
            g, p, config, concurrency,
            extra_starts=[buser_test_function(g, c.h1.witness)
                          for c in constants])
        ground = None
        if interior is not None:
            ground = solve_ground_dirichlet(
                g, interior, p, config, concurrency,
                extra_starts=[c.h0.witness.mask().astype(float)
                              for c in constants if c.h0 is not None])
        return gap, ground

    gap, ground = solve(cfg)
    if not exact:
        constants = constants_for(gap, ground)

    def rows_for(gap: EigenResult,
                 ground: Optional[EigenResult]) -> List[InequalityRow]:
        rows = _gap_rows(constants, gap.lambda_estimate, p)
        if ground is not None:
            rows.extend(_ground_rows(constants, ground.lambda_estimate, p))
        return rows

    rows = rows_for(gap, ground)
    escalated = False
    if _upper_failed(rows):
        escalated = True
        _logger.info("upper bound violated at p=%s, re-solving with %d "
                     "restarts", p, 2 * cfg.restarts)
        gap, ground = solve(cfg._replace(restarts=2 * cfg.restarts))
        rows = rows_for(gap, ground)

    unit = constant_length(g, 1.0)
    h_unit = next((c.h1.constant for c in constants
                   if c.metric == unit.name and c.h1.mode == EXACT), None)
    if h_unit is None:
        h_unit = isoperimetric(g, unit, H1, f=gap.minimizer,
                               max_exact_n=max_exact_n,
                               concurrency=concurrency).constant
    M, convention = max_degree(g)
    classical = classical_lower_bound(h_unit, p, M) if M > 0 else 0.0
    # M^(-(p-1)/p) lies in R_p only where m >= 1
    outside = convention == 'combinatorial' and bool(np.any(g.measure < 1))
    rows.append(_row('classical_gap', convention, classical,
                     gap.lambda_estimate, exact and not outside,
                     OUTSIDE_HYPOTHESIS if outside else ''))
    intrinsic = max((cheeger_lower_bound(c.h1.constant, p)
                     for c in constants if c.in_rp), default=0.0)
    ratio = intrinsic / classical if classical > 0 else math.nan

    example2 = None
    if generated is not None and generated.minimizing_set is not None:
        example2 = example2_comparison(generated, p, h_unit, concurrency)

    return BoundReport(p, gap, ground, constants, rows, M, convention,
                       classical, normalized_lower_bound(h_unit, p), ratio,
                       example2, escalated)
