""" Level sets, co-area and area formulas and isoperimetric constants.

    The isoperimetric ratio of a vertex set W for the edge length d is
    |dW|_{bd} / m(W). `exact_isoperimetric` minimizes it by enumerating
    vertex subsets as bit masks, in chunks distributed over a
    `ConcurrencyModel`; `sweep_cut` only looks at the level sets of a
    function and therefore gives an upper bound.

    Ties between equal ratios (relative tolerance RATIO_RTOL) go to the
    set of smaller measure, then to the lexicographically smallest sorted
    index tuple.
"""
import logging
import math

from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .concurrency_model import ConcurrencyModel, default_model
from .energy import VertexFunction, energy
from .graph import (
    PairWeight, VertexSet, WeightedGraph, boundary_measure, incident_sums
    )
from .metrics import EdgeLength, conjugate_exponent
from .numerics import accurate_sum, check_exponent

_logger = logging.getLogger(__name__)

DEFAULT_MAX_EXACT_N = 24
RATIO_RTOL = 1e-12
HALF_TOLERANCE = 1e-12
CHUNK_BITS = 14

H0 = 'h0'
H1 = 'h1'
EXACT = 'exact'
SWEEP = 'sweep'

FAMILIES = ('finite', 'half', 'support_half', 'levels')


class EnumerationCutoffError(ValueError):
    pass


class NoAdmissibleSetError(ValueError):
    pass


class LevelSet(NamedTuple):
    threshold: float
    vertex_set: VertexSet   # {x : f(x) > threshold}


def level_sets(g: WeightedGraph, f: VertexFunction) -> List[LevelSet]:
    """ The distinct nonempty level sets of f, from the full set down.

        The full set is listed at threshold min f - 1, then {f > v} for
        every distinct value v except the maximum.
    """
    values = np.unique(f)
    sets = [LevelSet(float(values[0]) - 1.0, VertexSet(g, range(g.n)))]
    for v in values[:-1].tolist():
        sets.append(LevelSet(v, VertexSet.from_mask(g, f > v)))
    return sets


def _breakpoints(f: VertexFunction) -> np.ndarray:
    if np.any(f < 0):
        raise ValueError("function must be nonnegative")
    return np.union1d([0.0], f)


def coarea_check(g: WeightedGraph, w: PairWeight,
                 f: VertexFunction) -> Tuple[float, float]:
    """ Both sides of sum_edges w |df| = integral_0^inf w(d{f > t}) dt
    """
    t = _breakpoints(f)
    lhs = accurate_sum(np.asarray(w.values)
                       * np.abs(f[g.edge_u] - f[g.edge_v]))
    rhs = accurate_sum([
        (upper - lower) * boundary_measure(
            g, VertexSet.from_mask(g, f > lower), w).value
        for lower, upper in zip(t[:-1].tolist(), t[1:].tolist())])
    return lhs, rhs


def area_check(g: WeightedGraph, f: VertexFunction) -> Tuple[float, float]:
    """ Both sides of sum_x m(x) f(x) = integral_0^inf m({f > t}) dt
    """
    t = _breakpoints(f)
    lhs = accurate_sum(g.measure * f)
    rhs = accurate_sum([
        (upper - lower) * accurate_sum(g.measure[f > lower])
        for lower, upper in zip(t[:-1].tolist(), t[1:].tolist())])
    return lhs, rhs


def chain_rule_proxy_check(a: float, b: float,
                           p: float) -> Tuple[float, float]:
    """ Both sides of |a^p - b^p| <= p ((a^p + b^p)/2)^((p-1)/p) |a - b|
    """
    check_exponent(p)
    if a < 0 or b < 0:
        raise ValueError("arguments must be nonnegative")
    ap, bp = a ** p, b ** p
    return abs(ap - bp), p * ((ap + bp) / 2.0) ** ((p - 1.0) / p) * abs(a - b)


class SweepRatio(NamedTuple):
    """ One admissible level set met by a sweep
    """
    swept: str          # 'f', '-f' or '|f|'
    threshold: float
    size: int
    measure: float
    ratio: float


class IsoperimetricResult(NamedTuple):
    constant: float
    witness: VertexSet
    mode: str
    variant: str
    metric_name: str
    ratio_table: Optional[List[SweepRatio]] = None


class _Candidate(NamedTuple):
    ratio: float
    measure: float
    members: Tuple[int, ...]

    def beats(self, other: Optional['_Candidate']) -> bool:
        if other is None:
            return True
        scale = max(abs(self.ratio), abs(other.ratio))
        if abs(self.ratio - other.ratio) > RATIO_RTOL * scale:
            return self.ratio < other.ratio
        if self.measure != other.measure:
            return self.measure < other.measure
        return self.members < other.members


def _best(candidates: Iterable[Optional[_Candidate]]) -> Optional[_Candidate]:
    best: Optional[_Candidate] = None
    for candidate in candidates:
        if candidate is not None and candidate.beats(best):
            best = candidate
    return best


def _half_limit(g: WeightedGraph) -> float:
    total = g.total_measure
    return total / 2.0 + HALF_TOLERANCE * total


class _SubsetEnumeration(object):
    """ Minimize (w(dW) - offset) / m(W) over nonempty W within candidates.

        With `half` only sets with m(W) <= m(X)/2 are admitted. When the
        candidates are all vertices and `half` is set, only masks without
        the last candidate are enumerated and each mask stands for itself
        and for its complement, which has the same boundary.
    """

    def __init__(self, g: WeightedGraph, weights: np.ndarray,
                 candidates: Sequence[int], half: bool,
                 offset: float = 0.0) -> None:
        self.g = g
        self.weights = np.asarray(weights, dtype=float)
        self.offset = offset
        self.candidates = np.array(candidates, dtype=np.int64)
        self.half = half
        self.limit = _half_limit(g) if half else math.inf
        self.paired = half and len(candidates) == g.n
        bits = len(candidates) - 1 if self.paired else len(candidates)
        self.stop = 1 << bits

    def chunks(self) -> List[Tuple[int, int]]:
        step = 1 << CHUNK_BITS
        return [(start, min(start + step, self.stop))
                for start in range(1, self.stop, step)]

    def __call__(self, chunk: Tuple[int, int]) -> Optional[_Candidate]:
        g = self.g
        masks = np.arange(chunk[0], chunk[1], dtype=np.int64)
        k = len(self.candidates)
        bits = ((masks[:, None] >> np.arange(k, dtype=np.int64)) & 1) \
            .astype(bool)
        members = np.zeros((len(masks), g.n), dtype=bool)
        members[:, self.candidates] = bits
        boundary = (members[:, g.edge_u] != members[:, g.edge_v]) \
            @ self.weights - self.offset
        sides = [members]
        if self.paired:
            sides.append(~members)
        best = None
        for side in sides:
            measure = side @ g.measure
            admissible = (measure > 0) & (measure <= self.limit)
            if not np.any(admissible):
                continue
            ratio = np.where(admissible,
                             boundary / np.where(admissible, measure, 1.0),
                             math.inf)
            low = float(np.min(ratio))
            near = np.flatnonzero(
                ratio <= low + RATIO_RTOL * abs(low))
            best = _best([best] + [
                _Candidate(float(ratio[i]), float(measure[i]),
                           tuple(np.flatnonzero(side[i]).tolist()))
                for i in near])
        return best

    def run(self, concurrency: ConcurrencyModel) -> Optional[_Candidate]:
        chunks = self.chunks()
        _logger.debug("enumerating %d subset masks in %d chunks",
                      self.stop - 1, len(chunks))
        return _best(concurrency.map(self, chunks))


def _exact_result(g: WeightedGraph, w: PairWeight,
                  best: _Candidate) -> Tuple[float, VertexSet]:
    witness = VertexSet(g, best.members)
    value = boundary_measure(g, witness, w).value / witness.measure()
    return value, witness


def _check_cutoff(size: int, max_exact_n: int, what: str) -> None:
    if size > max_exact_n:
        raise EnumerationCutoffError(
            "{} has {} vertices, above the exact enumeration cutoff {}; "
            "use sweep mode".format(what, size, max_exact_n))


def exact_isoperimetric(g: WeightedGraph, d: EdgeLength, variant: str = H1,
                        interior: Optional[VertexSet] = None,
                        max_exact_n: int = DEFAULT_MAX_EXACT_N,
                        concurrency: Optional[ConcurrencyModel] = None
                        ) -> IsoperimetricResult:
    """ h1(d) over m(W) <= m(X)/2, or h0(d) over W inside `interior`.

        For h0 the boundary is measured in the whole (host) graph; without
        an interior every vertex is admissible and the constant is 0.
    """
    w = d.pair_weight()
    if variant == H1:
        _check_cutoff(g.n, max_exact_n, "graph")
        enumeration = _SubsetEnumeration(g, w.values, range(g.n), half=True)
    elif variant == H0:
        members = (interior.sort_key() if interior is not None
                   else tuple(range(g.n)))
        if not members:
            raise ValueError("empty interior")
        _check_cutoff(len(members), max_exact_n, "interior")
        enumeration = _SubsetEnumeration(g, w.values, members, half=False)
    else:
        raise ValueError("unknown isoperimetric variant {!r}".format(variant))
    best = enumeration.run(concurrency or default_model())
    if best is None:
        raise NoAdmissibleSetError("no admissible vertex set in {!r}"
                                   .format(g))
    constant, witness = _exact_result(g, w, best)
    _logger.debug("%s(%s) = %r at %s", variant, d.name, constant, witness)
    return IsoperimetricResult(constant, witness, EXACT, variant, d.name)


def sweep_cut(g: WeightedGraph, d: EdgeLength, f: VertexFunction,
              variant: str = H1, interior: Optional[VertexSet] = None,
              level_function: str = 'values') -> IsoperimetricResult:
    """ The best isoperimetric ratio among the level sets of f and -f.

        level_function 'abs' sweeps the level sets of |f| (equivalently
        of |f|^p) instead. For h0 every level set is intersected with the
        interior.
    """
    if np.min(f) == np.max(f):
        raise ValueError("cannot sweep a constant function")
    if level_function == 'values':
        sweeps = [('f', f), ('-f', -f)]
    elif level_function == 'abs':
        sweeps = [('|f|', np.abs(f))]
    else:
        raise ValueError("unknown level function {!r}".format(level_function))
    if variant == H1:
        limit = _half_limit(g)
        restrict = None
    elif variant == H0:
        limit = math.inf
        restrict = interior.mask() if interior is not None else None
    else:
        raise ValueError("unknown isoperimetric variant {!r}".format(variant))

    w = d.pair_weight()
    seen = set()
    table: List[SweepRatio] = []
    best: Optional[_Candidate] = None
    for swept, h in sweeps:
        for level in level_sets(g, h):
            mask = level.vertex_set.mask()
            if restrict is not None:
                mask &= restrict
            W = VertexSet.from_mask(g, mask)
            if not len(W) or W.indices in seen:
                continue
            seen.add(W.indices)
            measure = W.measure()
            if measure > limit:
                continue
            ratio = boundary_measure(g, W, w).value / measure
            table.append(SweepRatio(swept, level.threshold, len(W), measure,
                                    ratio))
            candidate = _Candidate(ratio, measure, W.sort_key())
            if candidate.beats(best):
                best = candidate
    if best is None:
        raise NoAdmissibleSetError("no level set of the function is "
                                   "admissible for {}".format(variant))
    constant, witness = _exact_result(g, w, best)
    return IsoperimetricResult(constant, witness, SWEEP, variant, d.name,
                               table)


def isoperimetric(g: WeightedGraph, d: EdgeLength, variant: str = H1,
                  interior: Optional[VertexSet] = None,
                  f: Optional[VertexFunction] = None, mode: str = 'auto',
                  max_exact_n: int = DEFAULT_MAX_EXACT_N,
                  concurrency: Optional[ConcurrencyModel] = None
                  ) -> IsoperimetricResult:
    """ Exact enumeration, a sweep of f, or exact when within the cutoff
    """
    if mode not in (EXACT, SWEEP, 'auto'):
        raise ValueError("unknown mode {!r}".format(mode))
    size = g.n if variant == H1 or interior is None else len(interior)
    if mode == EXACT or (mode == 'auto' and size <= max_exact_n):
        return exact_isoperimetric(g, d, variant, interior, max_exact_n,
                                   concurrency)
    if f is None:
        raise EnumerationCutoffError(
            "{} vertices exceed the exact cutoff {} and no function to "
            "sweep was given".format(size, max_exact_n))
    _logger.warning("%d vertices exceed the exact cutoff %d, sweeping "
                    "level sets instead", size, max_exact_n)
    return sweep_cut(g, d, f, variant, interior)


class GeneralIsoperimetricReport(NamedTuple):
    family: str
    constant: float
    k_weights: np.ndarray
    lhs: float
    rhs: float
    slack: float
    passed: bool


def general_isoperimetric_constant(g: WeightedGraph, w: PairWeight,
                                   family: str, f: VertexFunction,
                                   max_exact_n: int = DEFAULT_MAX_EXACT_N,
                                   concurrency: Optional[ConcurrencyModel]
                                   = None) -> float:
    """ inf w(dW)/m(W) over the sets of the admissible family

        finite: all nonempty sets; half and support_half: sets with
        m(W) <= m(X)/2; levels: the sets {|f| > t}, t >= 0.
    """
    if family == 'levels':
        magnitude = np.abs(f)
        ratios = []
        for t in np.union1d([0.0], magnitude)[:-1].tolist():
            W = VertexSet.from_mask(g, magnitude > t)
            ratios.append(boundary_measure(g, W, w).value / W.measure())
        return min(ratios) if ratios else math.inf
    if family not in FAMILIES:
        raise ValueError("unknown admissible family {!r}".format(family))
    _check_cutoff(g.n, max_exact_n, "graph")
    best = _SubsetEnumeration(g, w.values, range(g.n),
                              half=(family != 'finite')) \
        .run(concurrency or default_model())
    return best.ratio if best is not None else math.inf


def general_isoperimetric_check(g: WeightedGraph, w: PairWeight,
                                sigma: np.ndarray, family: str,
                                f: VertexFunction, p: float,
                                max_exact_n: int = DEFAULT_MAX_EXACT_N,
                                concurrency: Optional[ConcurrencyModel]
                                = None) -> GeneralIsoperimetricReport:
    """ Check (2^(p-1)/p^p) h^p ||f||_m^(p^2) <= ||f||_k^(p(p-1)) E_p(f).

        k(x) = sum_y b sigma^(p/(p-1)) (x, y), and w <= b sigma is required
        on every edge; `sigma` is given per edge.
    """
    check_exponent(p, strict=True)
    sigma = np.asarray(sigma, dtype=float)
    bound = g.edge_weight * sigma
    if np.any(np.asarray(w.values) > bound * (1 + 1e-12)):
        raise ValueError("pair weight {!r} exceeds b*sigma".format(w.name))
    if family in ('half', 'support_half'):
        support = accurate_sum(g.measure[f != 0])
        if support > _half_limit(g):
            raise ValueError("family {} needs m(supp f) <= m(X)/2"
                             .format(family))
    q = conjugate_exponent(p)
    k = incident_sums(g, g.edge_weight * sigma ** q)
    h = general_isoperimetric_constant(g, w, family, f, max_exact_n,
                                       concurrency)
    mass_m = accurate_sum(g.measure * np.abs(f) ** p)
    mass_k = accurate_sum(k * np.abs(f) ** p)
    lhs = 2 ** (p - 1) / p ** p * h ** p * mass_m ** p if mass_m else 0.0
    rhs = mass_k ** (p - 1) * energy(g, f, p)
    slack = rhs - lhs
    passed = slack >= -1e-10 * max(1.0, abs(lhs), abs(rhs))
    return GeneralIsoperimetricReport(family, h, k, lhs, rhs, slack, passed)

