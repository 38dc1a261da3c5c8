""" Subcommands of the pspectra command line.

    Every handler returns an `Outcome`; `main` wraps it into a report with
    the run manifest and maps failures onto exit codes.
"""
import argparse
import logging
import sys
import time

from pathlib import Path
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence

import numpy as np

import pspectra
from pspectra.bounds import full_report
from pspectra.brooks import (
    BROOKS_ALPHA_FACTORS, CENTER_MODES, CenterSpec, TreeFamily,
    TruncatedFamily, brooks_metric_check, brooks_verify, family_from_graph
    )
from pspectra.cheeger import (
    DEFAULT_MAX_EXACT_N, H0, H1, isoperimetric, sweep_cut
    )
from pspectra.concurrency_model import ConcurrencyModel
from pspectra.eigensolver import (
    SolverConfig, linear_oracle, p_sweep, solve_gap, solve_ground_dirichlet
    )
from pspectra.energy import (
    GAP, GROUND, VertexFunction, parse_vertex_function, rayleigh,
    weak_solution_residual, write_vertex_function
    )
from pspectra.graph import (
    InvalidGraphError, VertexSet, WeightedGraph, boundary_measure,
    connected_components, is_connected
    )
from pspectra.graph.generators import GeneratedGraph, GeneratorSpec, generate
from pspectra.graph.graphfile import (
    GraphFileError, parse_graph, parse_vertex_set
    )
from pspectra.metrics import (
    EdgeLength, check_membership, constant_length, degree_metric, delta,
    parse_edge_lengths, path_metric_closure, scaled_constant_length,
    write_edge_lengths
    )

from .payload import Report, RunManifest, Table
from .reporter import REPORTERS

_logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 4


class Context(NamedTuple):
    config: SolverConfig
    concurrency: ConcurrencyModel
    max_exact_n: int


class Outcome(NamedTuple):
    inputs: List[str]
    result: Dict[str, Any]
    tables: List[Table]
    converged: bool = True


def _read(path: str) -> str:
    return Path(path).read_text(encoding='utf-8')


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding='utf-8')
    _logger.info("wrote %s", path)


def _file_spec(spec: str, what: str) -> str:
    kind, _, path = spec.partition(':')
    if kind != 'file' or not path:
        raise ValueError("{} must be file:<path>, got {!r}".format(what, spec))
    return path


def _load_path(path: str) -> GeneratedGraph:
    try:
        return GeneratedGraph(parse_graph(_read(path)))
    except GraphFileError as exc:
        raise InvalidGraphError("{}: {}".format(path, exc)) from exc


def _load(args: argparse.Namespace) -> GeneratedGraph:
    if args.generate is not None:
        return generate(GeneratorSpec.parse(args.generate))
    if args.graph is None:
        raise ValueError("give a graph file or --generate")
    return _load_path(args.graph)


def _load_all(args: argparse.Namespace) -> List[GeneratedGraph]:
    """ Every positional graph file, in order, or the --generate family
    """
    if args.generate is not None:
        if args.graph:
            raise ValueError("give graph files or --generate, not both")
        return [generate(GeneratorSpec.parse(args.generate))]
    if not args.graph:
        raise ValueError("give a graph file or --generate")
    return [_load_path(path) for path in args.graph]


def _inputs(args: argparse.Namespace) -> List[str]:
    if args.generate is not None:
        return ["generate:{}".format(args.generate)]
    if isinstance(args.graph, list):
        return list(args.graph)
    return [args.graph] if args.graph is not None else []


def _floats(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("not a list of numbers: {!r}"
                                         .format(text))
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _ints(text: str) -> List[int]:
    values = _floats(text)
    if any(v != int(v) for v in values):
        raise argparse.ArgumentTypeError("not a list of integers: {!r}"
                                         .format(text))
    return [int(v) for v in values]


def _edge_length(g: WeightedGraph, spec: str, p: float) -> EdgeLength:
    """ degree | combinatorial | const:<c> | k:<k> | file:<path>
    """
    kind, _, value = spec.partition(':')
    if kind == 'degree':
        return degree_metric(g, p)
    if kind == 'combinatorial':
        return constant_length(g, 1.0)
    if kind == 'const':
        return constant_length(g, float(value))
    if kind == 'k':
        return scaled_constant_length(g, float(value), p)
    if kind == 'file':
        return parse_edge_lengths(g, _read(value), name=value)
    raise ValueError("unknown metric {!r}".format(spec))


def _interior(generated: GeneratedGraph,
              text: Optional[str]) -> Optional[VertexSet]:
    """ file:<path> with "I <vertex>" records, or comma-separated ids
    """
    if text is None:
        return generated.interior
    if text.startswith('file:'):
        path = _file_spec(text, '--interior')
        try:
            return parse_vertex_set(generated.graph, _read(path))
        except GraphFileError as exc:
            raise InvalidGraphError("{}: {}".format(path, exc)) from exc
    ids = [item.strip() for item in text.split(',') if item.strip()]
    return generated.graph.vertex_set(ids)


def _function(g: WeightedGraph, spec: str) -> VertexFunction:
    path = _file_spec(spec, '--function')
    try:
        return parse_vertex_function(g, _read(path))
    except GraphFileError as exc:
        raise InvalidGraphError("{}: {}".format(path, exc)) from exc


def _vertex_rows(g: WeightedGraph, f: np.ndarray) -> List[List[Any]]:
    return [[vertex, value] for vertex, value
            in zip(g.vertices, f.tolist())]


def cmd_validate(args: argparse.Namespace, context: Context) -> Outcome:
    g = _load(args).graph
    components = connected_components(g)
    result = {'graph': g, 'connected': len(components) == 1,
              'components': components}
    summary = Table('summary', ['n', 'edges', 'total_measure', 'components'],
                    [[g.n, g.num_edges, g.total_measure, len(components)]])
    return Outcome(_inputs(args), result, [summary])


def cmd_metric(args: argparse.Namespace, context: Context) -> Outcome:
    g = _load(args).graph
    d = _edge_length(g, args.metric, args.p)
    if args.path_closure:
        d = path_metric_closure(g, d, context.concurrency) \
            .restricted_to_edges()
    if args.write_lengths is not None:
        _write(args.write_lengths, write_edge_lengths(d))
    membership = check_membership(g, d, args.p)
    brooks = brooks_metric_check(g, d, args.p)
    result = {'metric': d, 'p': args.p, 'membership': membership,
              'delta': delta(g, d) if g.num_edges else None,
              'brooks_condition': {'holds': brooks.holds,
                                   'worst_slack': brooks.worst_slack,
                                   'witness': brooks.witness}}
    lengths = Table('lengths', ['u', 'v', 'b', 'd'],
                    [[u, v, b, value] for (u, v, b), value
                     in zip(g.edges(), d.values.tolist())])
    return Outcome(_inputs(args), result, [lengths])


def cmd_cheeger(args: argparse.Namespace, context: Context) -> Outcome:
    generated = _load(args)
    g = generated.graph
    d = _edge_length(g, args.metric, args.p)
    interior = _interior(generated, args.interior) \
        if args.variant == H0 else None
    f = _function(g, args.function) if args.function is not None else None
    converged = True
    if f is None and args.mode != 'exact' and (
            args.mode == 'sweep' or g.n > context.max_exact_n):
        if args.variant == H1:
            solved = solve_gap(g, args.p, context.config,
                               context.concurrency)
        else:
            if interior is None:
                raise ValueError("h0 needs an interior")
            solved = solve_ground_dirichlet(g, interior, args.p,
                                            context.config,
                                            context.concurrency)
        f, converged = solved.minimizer, solved.converged
    found = isoperimetric(g, d, args.variant, interior, f=f,
                          mode=args.mode, max_exact_n=context.max_exact_n,
                          concurrency=context.concurrency)
    table = Table('constant', ['variant', 'metric', 'mode', 'constant',
                               'witness_size', 'witness_measure'],
                  [[found.variant, found.metric_name, found.mode,
                    found.constant, len(found.witness),
                    found.witness.measure()]])
    tables = [table]
    if found.ratio_table is not None:
        tables.append(Table('ratios', ['swept', 'threshold', 'size',
                                       'measure', 'ratio'],
                            [list(row) for row in found.ratio_table]))
    return Outcome(_inputs(args), {'isoperimetric': found}, tables,
                   converged)


def cmd_eigen(args: argparse.Namespace, context: Context) -> Outcome:
    """ Solve for lambda1 (gap) or the Dirichlet lambda0 (ground).

        A --function is evaluated on its own and also serves as the
        first start of the solver.
    """
    generated = _load(args)
    g = generated.graph
    interior = None
    if args.variant == GROUND:
        interior = _interior(generated, args.interior)
        if interior is None:
            raise ValueError("the ground variant needs --interior")
    result: Dict[str, Any] = {}
    given = None
    if args.function is not None:
        given = _function(g, args.function)
        value = rayleigh(g, given, args.p, args.variant)
        result['function'] = {
            'energy': value.energy, 'norm_p': value.norm_p,
            'shift': value.shift, 'quotient': value.quotient,
            'residual': weak_solution_residual(
                g, given - value.shift, value.quotient, args.p, interior)}
    if interior is None:
        solved = solve_gap(g, args.p, context.config, context.concurrency,
                           initial=given)
    else:
        solved = solve_ground_dirichlet(g, interior, args.p, context.config,
                                        context.concurrency, initial=given)
    result['eigen'] = solved
    result['linear_oracle'] = (linear_oracle(g, args.variant, interior)
                               if args.p == 2 else None)
    if args.write_function is not None:
        _write(args.write_function,
               write_vertex_function(g, solved.minimizer))
    table = Table('minimizer', ['vertex', 'value'],
                  _vertex_rows(g, solved.minimizer))
    return Outcome(_inputs(args), result, [table], solved.converged)


def cmd_sweep(args: argparse.Namespace, context: Context) -> Outcome:
    g = _load(args).graph
    table = p_sweep(g, args.p_grid, context.config, context.concurrency,
                    context.max_exact_n)
    rows = Table('sweep', ['p', 'lambda', 'lower', 'upper', 'within',
                           'converged'],
                 [list(row) for row in table.rows])
    return Outcome(_inputs(args), {'sweep': table}, [rows],
                   all(row.converged for row in table.rows))


def cmd_bounds(args: argparse.Namespace, context: Context) -> Outcome:
    """ One full report per (graph, p), graphs outermost
    """
    inputs = _inputs(args)
    reports = []
    labelled = []
    for source, generated in zip(inputs, _load_all(args)):
        g = generated.graph
        interior = _interior(generated, args.interior)
        for p in args.p:
            metrics = ([_edge_length(g, spec, p) for spec in args.metric]
                       if args.metric else None)
            report = full_report(
                g, p, context.config, metrics, interior,
                context.max_exact_n, context.concurrency,
                generated if generated.minimizing_set is not None else None)
            reports.append(report)
            labelled.append((source, report))
    rows = Table('inequalities', ['input', 'p', 'name', 'metric', 'lhs',
                                  'rhs', 'slack', 'passed', 'certified',
                                  'note'],
                 [[source, report.p] + list(row)
                  for source, report in labelled for row in report.rows])
    converged = all(r.lambda_gap.converged and
                    (r.lambda_ground is None or r.lambda_ground.converged)
                    for r in reports)
    return Outcome(inputs, {'reports': reports}, [rows], converged)


def _brooks_family(args: argparse.Namespace) -> TruncatedFamily:
    kind, _, value = args.family.partition(':')
    if kind == 'tree':
        return TreeFamily(int(value), args.measure)
    if kind == 'custom':
        g = parse_graph(_read(value))
        return family_from_graph(g, _edge_length(g, args.metric, args.p),
                                 args.root, name=args.family)
    raise ValueError("unknown Brooks family {!r}".format(args.family))


def cmd_brooks(args: argparse.Namespace, context: Context) -> Outcome:
    family = _brooks_family(args)
    centers = CenterSpec(args.centers, seed=args.seed)
    report = brooks_verify(family, args.p, args.radii, context.config,
                           args.alpha_grid, centers, context.concurrency)
    result = {
        'family': report.family, 'p': report.p,
        'mu_estimate': report.mu_estimate, 'bound': report.bound,
        'decreasing': report.decreasing,
        'quotient_route': report.quotient_route,
        'bound_route': report.bound_route,
        'bound_route_note': report.bound_route_note,
        'caveat': report.caveat, 'growth_window': report.growth_window,
        'centers_note': report.centers_note,
        'growth': [row.growth for row in report.rows],
        }
    radii = Table('radii', ['radius', 'host_size', 'interior_size',
                            'lambda', 'converged', 'mu_estimate', 'bound'],
                  [[row.radius, row.host_size, row.interior_size,
                    row.lambda_ground.lambda_estimate,
                    row.lambda_ground.converged,
                    row.growth.mu_estimate, row.bound]
                   for row in report.rows])
    functions = Table('test_functions',
                      ['radius', 'alpha', 'r', 'quotient', 'bound',
                       'norm_ratio', 'lipschitz_holds', 'lipschitz_excess',
                       'holds'],
                      [[row.radius] + list(check) for row in report.rows
                       for check in row.test_functions])
    return Outcome([args.family], result, [radii, functions],
                   all(row.lambda_ground.converged for row in report.rows))


def cmd_partition(args: argparse.Namespace, context: Context) -> Outcome:
    g = _load(args).graph
    if not is_connected(g):
        components = connected_components(g)
        _logger.warning("graph is disconnected, the components form the "
                        "partition")
        side = {i: k for k, c in enumerate(components) for i in c}
        table = Table('partition', ['vertex', 'side', 'value'],
                      [[v, side[i], None] for i, v in enumerate(g.vertices)])
        return Outcome(_inputs(args), {'components': components}, [table])

    solved = solve_gap(g, args.p, context.config, context.concurrency)
    f = solved.minimizer
    positive = VertexSet.from_mask(g, f > 0)
    if not len(positive):
        positive = VertexSet.from_mask(g, f == np.max(f))
    negative = positive.complement()
    smaller = min(positive, negative, key=lambda W: (W.measure(),
                                                      W.sort_key()))
    ratio = boundary_measure(g, smaller).value / smaller.measure()
    refined = sweep_cut(g, constant_length(g, 1.0), f, H1)
    result = {'lambda': solved.lambda_estimate,
              'sign_cut': {'positive': positive, 'negative': negative,
                           'ratio': ratio},
              'sweep': refined}
    table = Table('partition', ['vertex', 'side', 'value'],
                  [[v, 0 if i in positive else 1, value] for i, (v, value)
                   in enumerate(zip(g.vertices, f.tolist()))])
    return Outcome(_inputs(args), result, [table], solved.converged)


Handler = Callable[[argparse.Namespace, Context], Outcome]


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=0)
    common.add_argument('--threads', type=int, default=1)
    common.add_argument('--format', choices=sorted(REPORTERS),
                        default='json')
    common.add_argument('--output', default=None)
    common.add_argument('--strict', action='store_true')
    common.add_argument('--restarts', type=int, default=1)
    common.add_argument('--max-iters', type=int, default=5000)
    common.add_argument('--max-exact-n', type=int,
                        default=DEFAULT_MAX_EXACT_N)
    common.add_argument('-v', '--verbose', action='count', default=0)
    return common


def _graph_flags(parser: argparse.ArgumentParser,
                 many: bool = False) -> None:
    parser.add_argument('graph', nargs='*' if many else '?', default=None)
    parser.add_argument('--generate', default=None, metavar='FAMILY:K=V,..')


def _tol_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--tol', type=float, default=None,
                        help="stationarity tolerance of the solver "
                        "(default {})".format(SolverConfig().tol_residual))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='pspectra',
        description="p-Laplacian spectral estimates on weighted graphs")
    common = _common_flags()
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name: str, handler: Handler, graph: bool = True,
                many: bool = False) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common])
        sub.set_defaults(handler=handler)
        if graph:
            _graph_flags(sub, many)
        return sub

    command('validate', cmd_validate)

    sub = command('metric', cmd_metric)
    sub.add_argument('--p', type=float, default=2.0)
    sub.add_argument('--metric', default='degree')
    sub.add_argument('--path-closure', action='store_true',
                     help="replace d by its shortest-path closure on edges")
    sub.add_argument('--write-lengths', default=None, metavar='PATH')

    sub = command('cheeger', cmd_cheeger)
    sub.add_argument('--p', type=float, default=2.0)
    sub.add_argument('--metric', default='degree')
    sub.add_argument('--variant', choices=(H0, H1), default=H1)
    sub.add_argument('--mode', choices=('auto', 'exact', 'sweep'),
                     default='auto')
    sub.add_argument('--interior', default=None,
                     metavar='file:<path>|<id>,<id>,..')
    sub.add_argument('--function', default=None, metavar='file:<path>',
                     help="function to sweep instead of a minimizer")

    sub = command('eigen', cmd_eigen)
    sub.add_argument('--p', type=float, default=2.0)
    sub.add_argument('--variant', choices=(GAP, GROUND), default=GAP)
    sub.add_argument('--interior', default=None,
                     metavar='file:<path>|<id>,<id>,..')
    sub.add_argument('--function', default=None, metavar='file:<path>')
    sub.add_argument('--write-function', default=None, metavar='PATH')
    _tol_flag(sub)

    sub = command('sweep', cmd_sweep)
    sub.add_argument('--p-grid', type=_floats,
                     default=[2.0, 1.5, 1.2, 1.1, 1.05])
    _tol_flag(sub)

    sub = command('bounds', cmd_bounds, many=True)
    sub.add_argument('--p', type=float, nargs='+', required=True)
    sub.add_argument('--metric', action='append', default=None)
    sub.add_argument('--interior', default=None,
                     metavar='file:<path>|<id>,<id>,..')

    sub = command('brooks', cmd_brooks, graph=False)
    sub.add_argument('--family', required=True,
                     metavar='tree:<k>|custom:<graph file>')
    sub.add_argument('--p', type=float, default=2.0)
    sub.add_argument('--radii', type=_ints, required=True)
    sub.add_argument('--alpha-grid', type=_floats,
                     default=list(BROOKS_ALPHA_FACTORS))
    sub.add_argument('--measure', default='normalizing')
    sub.add_argument('--metric', default='combinatorial')
    sub.add_argument('--root', default=None)
    sub.add_argument('--centers', choices=CENTER_MODES[:3], default='root')

    sub = command('partition', cmd_partition)
    sub.add_argument('--p', type=float, default=2.0)
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {key: value for key, value in sorted(vars(args).items())
            if key not in ('handler', 'command')}


def _configure_logging(verbosity: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbosity, 2)]
    logging.basicConfig(stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)


def _error(message: str) -> None:
    sys.stderr.write("pspectra: error: {}\n".format(message))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    started = time.perf_counter()
    try:
        config = SolverConfig(restarts=args.restarts, seed=args.seed,
                              max_iters=args.max_iters)
        if getattr(args, 'tol', None) is not None:
            config = config._replace(tol_residual=args.tol)
        config.validate()
        context = Context(config,
                          ConcurrencyModel.for_threads(args.threads),
                          args.max_exact_n)
        outcome = args.handler(args, context)
    except OSError as exc:
        _error(str(exc))
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        _error(str(exc))
        return EXIT_INVALID

    manifest = RunManifest(args.command, outcome.inputs, _flags(args),
                           args.seed, pspectra.__version__)
    report = Report(manifest.finished(started), outcome.result,
                    outcome.tables)
    try:
        if args.output is None:
            REPORTERS[args.format](sys.stdout).emit(report)
        else:
            with open(args.output, 'w', encoding='utf-8') as stream:
                REPORTERS[args.format](stream).emit(report)
    except OSError as exc:
        _error(str(exc))
        return EXIT_IO
    if args.strict and not outcome.converged:
        _error("solver did not converge")
        return EXIT_NOT_CONVERGED
    return EXIT_OK
