""" Variational estimates of the p-Laplacian quantities lambda0 and lambda1.

    Both are minima of Rayleigh quotients; the solver runs normalized
    gradient descent with Armijo backtracking from several starts, polishes
    each run with L-BFGS-B and keeps the best quotient found. A run has
    converged when its weak residual meets the stationarity bound
    tol * max(1, lambda) * ||f||^(p-1). Every reported value is the exact
    quotient of the returned function and therefore an upper bound on the
    true minimum. At p = 2 the generalized symmetric eigenproblem
    L v = lambda diag(m) v serves as an oracle and as the first start.
"""
import logging
import math

from abc import ABC, abstractmethod
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.optimize import brentq, minimize
from scipy.sparse.linalg import eigsh

from .concurrency_model import ConcurrencyModel, default_model
from .energy import (
    GAP, GROUND, VertexFunction, p_mean_shift, p_norm, rayleigh,
    weak_solution_residual
    )
from .graph import VertexSet, WeightedGraph, connected_components
from .numerics import check_exponent, signed_power
from .seeding import rng_for

_logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000
SMOOTHING_FLOOR = 1e-14
MIN_STEP = 1e-30
POLISH_ROUNDS = 4


class SolverConfig(NamedTuple):
    restarts: int = 1
    seed: int = 0
    max_iters: int = 5000
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    tol_rel: float = 1e-12
    smoothing_eps: float = 1e-8
    tol_residual: float = 1e-6

    def validate(self) -> None:
        if self.restarts < 1:
            raise ValueError("restarts must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")
        if not 0 < self.sufficient_decrease < 1:
            raise ValueError("sufficient_decrease must lie in (0, 1)")
        if not self.tol_rel > 0:
            raise ValueError("tol_rel must be positive")
        if not self.smoothing_eps >= 0:
            raise ValueError("smoothing_eps must be nonnegative")
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")


class EigenResult(NamedTuple):
    p: float
    variant: str
    lambda_estimate: float
    minimizer: VertexFunction
    residual: float
    iterations: int
    converged: bool


def _dense_pair(g: WeightedGraph, rows: np.ndarray,
                count: int) -> Tuple[np.ndarray, np.ndarray]:
    laplacian = g.laplacian()[rows][:, rows]
    mass = g.measure[rows]
    if len(rows) <= DENSE_LIMIT:
        values, vectors = scipy.linalg.eigh(laplacian.toarray(),
                                            np.diag(mass))
        return values[:count], vectors[:, :count]
    scale = float(np.mean(laplacian.diagonal() / mass)) or 1.0
    values, vectors = eigsh(laplacian.tocsc(), k=count, M=sp.diags(mass),
                            sigma=-1e-3 * scale, which='LM')
    order = np.argsort(values)
    return values[order], vectors[:, order]


def linear_oracle_pair(g: WeightedGraph, variant: str = GAP,
                       interior: Optional[VertexSet] = None
                       ) -> Tuple[float, VertexFunction]:
    """ The p = 2 value with an eigenvector, extended by 0 off the interior
    """
    if variant == GAP:
        if g.n < 2:
            raise ValueError("gap needs at least two vertices")
        values, vectors = _dense_pair(g, np.arange(g.n), 2)
        return max(float(values[1]), 0.0), vectors[:, 1]
    if variant == GROUND:
        rows = np.array(interior.sort_key() if interior is not None
                        else range(g.n), dtype=np.int64)
        if not len(rows):
            raise ValueError("empty interior")
        values, vectors = _dense_pair(g, rows, 1)
        f = np.zeros(g.n)
        f[rows] = vectors[:, 0]
        return max(float(values[0]), 0.0), f
    raise ValueError("unknown variant {!r}".format(variant))


def linear_oracle(g: WeightedGraph, variant: str = GAP,
                  interior: Optional[VertexSet] = None) -> float:
    return linear_oracle_pair(g, variant, interior)[0]


class _RayleighProblem(ABC):
    """ Quotient E_p(f) / N(f) with value and gradient, for the descent.

        For p < 2 the energy kernel |t|^p may be replaced by
        (t^2 + eps^2)^(p/2) - eps^p.
    """

    def __init__(self, g: WeightedGraph, p: float) -> None:
        self.g = g
        self.p = p

    def energy_gradient(self, f: np.ndarray,
                        eps: float) -> Tuple[float, np.ndarray]:
        g, p = self.g, self.p
        diff = f[g.edge_u] - f[g.edge_v]
        if eps > 0 and p < 2:
            s = np.sqrt(diff * diff + eps * eps)
            e = float(np.sum(g.edge_weight * (s ** p - eps ** p)))
            flux = p * g.edge_weight * s ** (p - 2) * diff
        else:
            e = float(np.sum(g.edge_weight * np.abs(diff) ** p))
            flux = p * g.edge_weight * signed_power(diff, p)
        grad = (np.bincount(g.edge_u, flux, minlength=g.n)
                - np.bincount(g.edge_v, flux, minlength=g.n))
        return e, grad

    @abstractmethod
    def normalize(self, f: np.ndarray) -> np.ndarray:
        """ Representative of f with the same quotient and unit norm
        """

    @abstractmethod
    def denominator(self, f: np.ndarray) -> Tuple[float, np.ndarray]:
        """ N(f) and its gradient
        """

    def mask(self, grad: np.ndarray) -> np.ndarray:
        return grad

    def evaluate(self, f: np.ndarray,
                 eps: float) -> Tuple[float, np.ndarray]:
        e, e_grad = self.energy_gradient(f, eps)
        n, n_grad = self.denominator(f)
        q = e / n
        return q, self.mask((e_grad - q * n_grad) / n)

    @abstractmethod
    def exact(self, f: np.ndarray) -> float:
        """ The unsmoothed quotient computed with compensated sums
        """

    @abstractmethod
    def free(self) -> np.ndarray:
        """ Mask of the coordinates the quotient depends on
        """

    def center(self, f: np.ndarray) -> np.ndarray:
        return f

    def residual(self, f: np.ndarray, lam: float) -> float:
        return weak_solution_residual(self.g, self.center(f), lam, self.p)

    def stationary(self, f: np.ndarray, lam: float, tol: float) -> bool:
        return self.residual(f, lam) <= stationarity_bound(
            self.g, self.center(f), lam, self.p, tol)


class _GapProblem(_RayleighProblem):

    def shift(self, f: np.ndarray) -> float:
        lo, hi = float(np.min(f)), float(np.max(f))
        if self.p == 2:
            return float(np.sum(self.g.measure * f) / np.sum(self.g.measure))
        m, p = self.g.measure, self.p

        def slope(gamma: float) -> float:
            return float(np.sum(m * signed_power(gamma - f, p)))

        if lo == hi or slope(lo) >= 0:
            return lo
        if slope(hi) <= 0:
            return hi
        return brentq(slope, lo, hi, xtol=1e-14 * (hi - lo))

    def normalize(self, f: np.ndarray) -> np.ndarray:
        centered = f - self.shift(f)
        norm = float(np.sum(self.g.measure * np.abs(centered) ** self.p)) \
            ** (1.0 / self.p)
        return centered / norm

    def denominator(self, f: np.ndarray) -> Tuple[float, np.ndarray]:
        centered = f - self.shift(f)
        m, p = self.g.measure, self.p
        n = float(np.sum(m * np.abs(centered) ** p))
        return n, p * m * signed_power(centered, p)

    def exact(self, f: np.ndarray) -> float:
        return rayleigh(self.g, f, self.p, GAP).quotient

    def free(self) -> np.ndarray:
        return np.ones(self.g.n, dtype=bool)

    def center(self, f: np.ndarray) -> np.ndarray:
        return f - self.shift(f)


class _GroundProblem(_RayleighProblem):

    def __init__(self, g: WeightedGraph, p: float,
                 interior: VertexSet) -> None:
        super(_GroundProblem, self).__init__(g, p)
        self.interior = interior
        self.inside = interior.mask()

    def mask(self, grad: np.ndarray) -> np.ndarray:
        return np.where(self.inside, grad, 0.0)

    def normalize(self, f: np.ndarray) -> np.ndarray:
        f = np.where(self.inside, f, 0.0)
        norm = float(np.sum(self.g.measure * np.abs(f) ** self.p)) \
            ** (1.0 / self.p)
        return f / norm

    def denominator(self, f: np.ndarray) -> Tuple[float, np.ndarray]:
        m, p = self.g.measure, self.p
        return (float(np.sum(m * np.abs(f) ** p)),
                p * m * signed_power(f, p))

    def exact(self, f: np.ndarray) -> float:
        return rayleigh(self.g, f, self.p, GROUND).quotient

    def free(self) -> np.ndarray:
        return self.inside

    def residual(self, f: np.ndarray, lam: float) -> float:
        return weak_solution_residual(self.g, f, lam, self.p, self.interior)


class _Descent(NamedTuple):
    minimizer: np.ndarray
    quotient: float
    iterations: int


def _descend(problem: _RayleighProblem, start: np.ndarray,
             cfg: SolverConfig) -> _Descent:
    """ Backtracking gradient descent in the metric diag(m).

        When the smoothed quotient stalls, eps is divided by 10 until it
        drops below SMOOTHING_FLOOR; the run then continues unsmoothed
        until it stalls again. The descent only finds the basin, the
        polish stage and the residual decide convergence.
    """
    m = problem.g.measure
    eps = cfg.smoothing_eps if problem.p < 2 else 0.0
    f = problem.normalize(start)
    q, grad = problem.evaluate(f, eps)
    step = cfg.initial_step
    iteration = 0
    while iteration < cfg.max_iters:
        iteration += 1
        direction = -grad / m
        decrease = float(np.dot(grad, -direction))
        if not decrease > 0:
            break
        t = step
        while True:
            candidate = problem.normalize(f + t * direction)
            q_new, grad_new = problem.evaluate(candidate, eps)
            if q_new <= q - cfg.sufficient_decrease * t * decrease:
                break
            t *= cfg.shrink
            if t < MIN_STEP:
                break
        stalled = t < MIN_STEP
        if not stalled:
            change = (q - q_new) / max(abs(q), 1e-300)
            f, q, grad = candidate, q_new, grad_new
            step = t / cfg.shrink
        if stalled or change < cfg.tol_rel:
            if eps > 0:
                eps = eps * 0.1 if eps * 0.1 >= SMOOTHING_FLOOR else 0.0
                q, grad = problem.evaluate(f, eps)
                step = cfg.initial_step
                continue
            break
    start_f = problem.normalize(start)
    if problem.exact(start_f) < problem.exact(f):
        f = start_f
    return _Descent(f, problem.exact(f), iteration)


def _polish(problem: _RayleighProblem, run: _Descent,
            cfg: SolverConfig) -> _Descent:
    """ L-BFGS-B on the unsmoothed quotient over the free coordinates.

        Each round restarts from the normalized iterate; the gradient
        tolerance is the stationarity bound on the weak residual, which
        equals max |grad| / p at unit norm.
    """
    free = problem.free()
    f, quotient, iterations = run
    budget = cfg.max_iters
    for _ in range(POLISH_ROUNDS):
        if budget < 1 or problem.stationary(f, quotient, cfg.tol_residual):
            break
        full = f.copy()

        def objective(x: np.ndarray) -> Tuple[float, np.ndarray]:
            full[free] = x
            q, grad = problem.evaluate(full, 0.0)
            return q, grad[free]

        gtol = 0.1 * problem.p * cfg.tol_residual * max(1.0, quotient)
        found = minimize(objective, f[free], jac=True, method='L-BFGS-B',
                         options=dict(maxiter=budget, gtol=gtol, ftol=0.0,
                                      maxcor=20))
        if not found.nit:
            break
        iterations += int(found.nit)
        budget -= int(found.nit)
        candidate = f.copy()
        candidate[free] = found.x
        if not np.all(np.isfinite(candidate)):
            break
        try:
            problem.exact(candidate)
        except ValueError:
            break
        candidate = problem.normalize(candidate)
        value = problem.exact(candidate)
        if not value <= quotient * (1 + 1e-12) + 1e-300:
            _logger.debug("polish rejected at p=%s: %r > %r", problem.p,
                          value, quotient)
            break
        f, quotient = candidate, value
    return _Descent(f, quotient, iterations)


def stationarity_bound(g: WeightedGraph, f: VertexFunction, lam: float,
                       p: float, tol: float) -> float:
    """ tol * max(1, lam) * ||f||_{m,p}^(p-1), the residual an
        approximate eigenpair (lam, f) has to meet
    """
    return tol * max(1.0, lam) * p_norm(g, f, p) ** (p - 1)


def _random_start(g: WeightedGraph, cfg: SolverConfig, index: int,
                  inside: Optional[np.ndarray]) -> np.ndarray:
    f = rng_for(cfg.seed, 'restart', index).standard_normal(g.n)
    if inside is not None:
        f = np.where(inside, np.abs(f), 0.0)
    return f


def _solve(g: WeightedGraph, problem: _RayleighProblem, variant: str,
           starts: List[np.ndarray], cfg: SolverConfig,
           concurrency: Optional[ConcurrencyModel]) -> EigenResult:
    concurrency = concurrency or default_model()
    runs = concurrency.map(
        lambda start: _polish(problem, _descend(problem, start, cfg), cfg),
        starts)
    winner = min(range(len(runs)), key=lambda i: (runs[i].quotient, i))
    best = runs[winner]
    f = problem.center(best.minimizer)
    quotient = rayleigh(g, f, problem.p, variant).quotient
    residual = problem.residual(f, quotient)
    converged = residual <= stationarity_bound(g, f, quotient, problem.p,
                                               cfg.tol_residual)
    if not converged:
        _logger.warning("%s solver at p=%s did not converge in %d "
                        "iterations, residual %r", variant, problem.p,
                        best.iterations, residual)
    _logger.info("%s estimate at p=%s: %r (start %d of %d)", variant,
                 problem.p, quotient, winner, len(runs))
    return EigenResult(problem.p, variant, quotient, f, residual,
                       best.iterations, converged)


def solve_gap(g: WeightedGraph, p: float,
              cfg: SolverConfig = SolverConfig(),
              concurrency: Optional[ConcurrencyModel] = None,
              initial: Optional[VertexFunction] = None,
              extra_starts: Sequence[VertexFunction] = ()) -> EigenResult:
    """ Upper estimate of lambda1_p with its (p-mean centered) minimizer.

        Start 0 is `initial` if given, else the p = 2 eigenvector; then
        cfg.restarts - 1 seeded random starts, then `extra_starts`.
        A disconnected graph has lambda1_p = 0, attained by
        1_C - 1_(X \\ C) for the first component C.
    """
    check_exponent(p, strict=True)
    cfg.validate()
    if g.n < 2:
        raise ValueError("gap needs at least two vertices")
    components = connected_components(g)
    if len(components) > 1:
        f = np.where(components[0].mask(), 1.0, -1.0)
        f = f - p_mean_shift(g, f, p)
        _logger.info("graph is disconnected, lambda1 = 0")
        return EigenResult(p, GAP, rayleigh(g, f, p, GAP).quotient, f,
                           weak_solution_residual(g, f, 0.0, p), 0, True)
    first = (np.asarray(initial, dtype=float) if initial is not None
             else linear_oracle_pair(g, GAP)[1])
    starts = [first]
    starts.extend(_random_start(g, cfg, i, None)
                  for i in range(1, cfg.restarts))
    starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    return _solve(g, _GapProblem(g, p), GAP, starts, cfg, concurrency)


def solve_ground_dirichlet(host: WeightedGraph, interior: VertexSet, p: float,
                           cfg: SolverConfig = SolverConfig(),
                           concurrency: Optional[ConcurrencyModel] = None,
                           initial: Optional[VertexFunction] = None,
                           extra_starts: Sequence[VertexFunction] = ()
                           ) -> EigenResult:
    """ Upper estimate of lambda0_p over functions vanishing off interior
    """
    check_exponent(p, strict=True)
    cfg.validate()
    if not len(interior):
        raise ValueError("empty interior")
    inside = interior.mask()
    if initial is not None:
        first = np.asarray(initial, dtype=float)
    else:
        first = np.abs(linear_oracle_pair(host, GROUND, interior)[1])
    starts = [first]
    starts.extend(_random_start(host, cfg, i, inside)
                  for i in range(1, cfg.restarts))
    starts.extend(np.asarray(s, dtype=float) for s in extra_starts)
    return _solve(host, _GroundProblem(host, p, interior), GROUND, starts,
                  cfg, concurrency)


class SweepRow(NamedTuple):
    p: float
    lambda_estimate: float
    lower: Optional[float]
    upper: Optional[float]
    within: Optional[bool]
    converged: bool


class PSweepTable(NamedTuple):
    rows: List[SweepRow]
    limit_value: Optional[float]  # h1(1), the value at p = 1


def p_sweep(g: WeightedGraph, p_grid: Sequence[float],
            cfg: SolverConfig = SolverConfig(),
            concurrency: Optional[ConcurrencyModel] = None,
            max_exact_n: Optional[int] = None) -> PSweepTable:
    """ lambda1_p along a decreasing grid, each solve warm-started.

        Every row is bracketed by (2^(p-1)/p^p) h1(d_p)^p from below and
        2^(p-1) h1(1) from above when the graph is within the exact
        enumeration cutoff.
    """
    from .bounds import buser_test_function, cheeger_lower_bound
    from .cheeger import (
        DEFAULT_MAX_EXACT_N, EnumerationCutoffError, H1, exact_isoperimetric
        )
    from .metrics import constant_length, degree_metric

    grid = [float(p) for p in p_grid]
    if not grid:
        raise ValueError("empty p grid")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("p grid must be strictly decreasing")
    if not grid[-1] > 1:
        raise ValueError("p grid must stay above 1")
    cutoff = DEFAULT_MAX_EXACT_N if max_exact_n is None else max_exact_n

    try:
        h_unit = exact_isoperimetric(g, constant_length(g, 1.0), H1,
                                     max_exact_n=cutoff,
                                     concurrency=concurrency)
    except EnumerationCutoffError:
        _logger.warning("graph above the enumeration cutoff, brackets "
                        "omitted")
        h_unit = None

    rows = []
    previous: Optional[VertexFunction] = None
    for p in grid:
        extra = ([buser_test_function(g, h_unit.witness)]
                 if h_unit is not None else [])
        result = solve_gap(g, p, cfg, concurrency, initial=previous,
                           extra_starts=extra)
        previous = result.minimizer
        lower = upper = within = None
        if h_unit is not None:
            h_p = exact_isoperimetric(g, degree_metric(g, p), H1,
                                      max_exact_n=cutoff,
                                      concurrency=concurrency).constant
            lower = cheeger_lower_bound(h_p, p)
            upper = 2 ** (p - 1) * h_unit.constant
            within = (lower - 1e-7 <= result.lambda_estimate
                      <= upper + 1e-7)
        rows.append(SweepRow(p, result.lambda_estimate, lower, upper, within,
                             result.converged))
    return PSweepTable(rows, h_unit.constant if h_unit is not None else None)


def bracket_width(row: SweepRow) -> float:
    if row.lower is None or row.upper is None:
        return math.nan
    return row.upper - row.lower
