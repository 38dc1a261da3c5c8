from .graph import VertexSet, WeightedGraph
from .graph.graphfile import parse_graph, write_graph
from .eigensolver import SolverConfig, solve_gap, solve_ground_dirichlet
from .bounds import full_report
from .brooks import brooks_verify

__version__ = '0.1.0'
