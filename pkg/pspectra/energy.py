""" The p-Dirichlet energy, its derivative and the Rayleigh quotients.

    Vertex functions are float arrays indexed like the vertices of their
    graph. Every sum runs once over the stored edges, which matches the
    1/2-double-sum convention of the energy, and is accumulated with
    `math.fsum`.
"""
import logging
import math

from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from .graph import (
    InvalidGraphError, UnknownVertexError, VertexSet, WeightedGraph,
    incident_sums
    )
from .graph.graphfile import (
    GraphFileError, format_number, iter_records, parse_number
    )
from .numerics import accurate_sum, check_exponent, signed_power

_logger = logging.getLogger(__name__)

VertexFunction = np.ndarray

GROUND = 'ground'
GAP = 'gap'


def vertex_function(g: WeightedGraph, values: np.ndarray) -> VertexFunction:
    f = np.array(values, dtype=float)
    if f.shape != (g.n,):
        raise ValueError("expected {} values, got shape {}"
                         .format(g.n, f.shape))
    if not np.all(np.isfinite(f)):
        raise ValueError("vertex function has non-finite values")
    return f


def edge_differences(g: WeightedGraph, f: VertexFunction) -> np.ndarray:
    """ f(u) - f(v) for every stored edge (u, v), u the lower index
    """
    return f[g.edge_u] - f[g.edge_v]


def energy(g: WeightedGraph, f: VertexFunction, p: float) -> float:
    check_exponent(p)
    return accurate_sum(g.edge_weight * np.abs(edge_differences(g, f)) ** p)


def p_norm(g: WeightedGraph, f: VertexFunction, p: float,
           shift: float = 0.0) -> float:
    """ ||f - shift|| in l^p(X, m)
    """
    return accurate_sum(g.measure * np.abs(f - shift) ** p) ** (1.0 / p)


def p_laplacian_apply(g: WeightedGraph, f: VertexFunction,
                      p: float) -> VertexFunction:
    """ L_p f(x) = (1/m(x)) sum_y b(x,y) |f(x)-f(y)|^(p-2) (f(x)-f(y))
    """
    check_exponent(p, strict=True)
    flux = g.edge_weight * signed_power(edge_differences(g, f), p)
    return incident_sums(g, flux, -flux) / g.measure


def energy_derivative(g: WeightedGraph, f: VertexFunction,
                      direction: VertexFunction, p: float) -> float:
    """ The weak form sum_edges b phi_p(df) dg, equal to <L_p f, g>_m.

        This is the left side of the weak eigenvalue equation; the
        derivative of t -> E_p(f + t g) is p times this value.
    """
    check_exponent(p, strict=True)
    flux = g.edge_weight * signed_power(edge_differences(g, f), p)
    return accurate_sum(flux * edge_differences(g, direction))


def energy_directional_derivative(g: WeightedGraph, f: VertexFunction,
                                  direction: VertexFunction,
                                  p: float) -> float:
    return p * energy_derivative(g, f, direction, p)


def p_mean_shift(g: WeightedGraph, f: VertexFunction, p: float) -> float:
    """ The gamma minimizing ||f - gamma||_{m,p}.

        p = 2 gives the m-weighted mean, p = 1 the smallest m-weighted
        median; otherwise the root of the increasing function
        gamma -> sum m phi_p(gamma - f) is bracketed by [min f, max f]
        and found by bisection.
    """
    check_exponent(p)
    lo, hi = float(np.min(f)), float(np.max(f))
    if lo == hi:
        return lo
    m = g.measure
    if p == 2:
        return accurate_sum(m * f) / accurate_sum(m)
    if p == 1:
        order = np.argsort(f, kind='stable')
        cumulative = np.cumsum(m[order])
        half = cumulative[-1] / 2.0
        return float(f[order][np.argmax(cumulative >= half)])

    def slope(gamma: float) -> float:
        return accurate_sum(m * signed_power(gamma - f, p))

    if slope(lo) >= 0:
        return lo
    if slope(hi) <= 0:
        return hi
    gamma = float(bisect(slope, lo, hi, xtol=1e-12 * (hi - lo)))
    _logger.debug("p-mean shift at p=%s: %r", p, gamma)
    return gamma


class QuotientValue(NamedTuple):
    energy: float
    norm_p: float
    shift: float
    quotient: float


def rayleigh(g: WeightedGraph, f: VertexFunction, p: float,
             variant: str = GAP) -> QuotientValue:
    """ E_p(f) / ||f - shift||^p with shift 0 (ground) or the p-mean (gap)
    """
    check_exponent(p)
    if variant == GROUND:
        if not np.any(f):
            raise ValueError("ground quotient of the zero function")
        shift = 0.0
    elif variant == GAP:
        if np.min(f) == np.max(f):
            raise ValueError("gap quotient of a constant function")
        shift = p_mean_shift(g, f, p)
    else:
        raise ValueError("unknown quotient variant {!r}".format(variant))
    e = energy(g, f, p)
    mass = accurate_sum(g.measure * np.abs(f - shift) ** p)
    return QuotientValue(e, mass ** (1.0 / p), shift, e / mass)


def weak_solution_residual(g: WeightedGraph, f: VertexFunction, lam: float,
                           p: float,
                           interior: Optional[VertexSet] = None) -> float:
    """ max_x m(x) |L_p f(x) - lam phi_p(f(x))|.

        With an interior, x runs over the interior only: a Dirichlet
        eigenfunction satisfies the equation there and nowhere else.
    """
    r = np.abs(p_laplacian_apply(g, f, p) - lam * signed_power(f, p)) \
        * g.measure
    if interior is not None:
        r = r[interior.mask()]
    return float(np.max(r)) if len(r) else 0.0


def signed_moment(g: WeightedGraph, f: VertexFunction, p: float) -> float:
    """ sum_x m(x) |f(x)|^(p-2) f(x); vanishes at gap minimizers
    """
    return accurate_sum(g.measure * signed_power(f, p))


def positive_part(f: VertexFunction) -> VertexFunction:
    return np.maximum(f, 0.0)


def negative_part(f: VertexFunction) -> VertexFunction:
    """ f_- with f = f_+ - f_-
    """
    return np.maximum(-f, 0.0)


def sign_splitting_check(g: WeightedGraph, f: VertexFunction,
                         p: float) -> Tuple[float, float]:
    """ Both sides of E_p(f_+) <= E_p'(f) f_+ (weak form)

        Edgewise this is |r_+ - s_+|^p <= |r-s|^(p-2) (r-s) (r_+ - s_+).
    """
    plus = positive_part(f)
    return energy(g, plus, p), energy_derivative(g, f, plus, p)


def parse_vertex_function(g: WeightedGraph, text: str) -> VertexFunction:
    """ Read "F <vertex> <value>" records, exactly one per vertex of g
    """
    values = np.full(g.n, math.nan)
    for record in iter_records(text, {'F': (2,)}):
        vertex, raw = record.fields
        try:
            i = g.index(vertex)
        except UnknownVertexError as exc:
            raise GraphFileError(record.lineno, exc.args[0])
        if not math.isnan(values[i]):
            raise GraphFileError(record.lineno,
                                 "duplicate value for {!r}".format(vertex))
        values[i] = parse_number(record, raw)
    missing = np.flatnonzero(np.isnan(values))
    if len(missing):
        raise InvalidGraphError("no value given for vertex {!r}"
                                .format(g.vertices[missing[0]]))
    return values


def write_vertex_function(g: WeightedGraph, f: VertexFunction) -> str:
    rows = sorted(zip(g.vertices, f.tolist()))
    return "".join("F {} {}\n".format(vertex, format_number(value))
                   for vertex, value in rows)
