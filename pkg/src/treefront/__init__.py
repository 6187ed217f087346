"""Exact multiobjective optimization on tree decompositions.

The library computes complete Pareto fronts — every nondominated cost
vector, each with one witness solution — for three problems expressed
as dynamic programs over nice tree decompositions:

* minimum s-t cuts (:func:`solve_stcut`),
* spanning trees (:func:`solve_mst`),
* traveling-salesperson tours (:func:`solve_tsp`),

plus a geometric front end (:mod:`treefront.aggregation`) that reduces
region-aggregation instances, and synthetic knapsack encodings of them,
to the cut solver.

Costs are fixed-point integers at one decimal digit; all front algebra
is exact.  Joins run through a lossless skip heuristic, solutions are
reconstructed from a compact 16-byte-record origin log, and a cost
estimator ranks candidate decompositions and root choices before any
DP is run.  The ``treefront`` command line exposes the same machinery.
"""

from .engine import DpConfig, SolveResult
from .fronts import EMPTY_SOLUTION, dominates, front_from_text, front_to_text, heap_join
from .graphs import Graph, parse_graph
from .heuristic import HeuristicConfig, heuristic_join
from .mst import solve_mst, tree_edges
from .stcut import CutInstance, cut_selection, solve_stcut
from .store import SolutionStore
from .td import TreeDecomposition, fuse_nodes, make_nice, parse_td
from .tsp import solve_tsp, tour_edges

__version__ = "0.1.0"

__all__ = [
    "CutInstance",
    "DpConfig",
    "EMPTY_SOLUTION",
    "Graph",
    "HeuristicConfig",
    "SolutionStore",
    "SolveResult",
    "TreeDecomposition",
    "__version__",
    "cut_selection",
    "dominates",
    "front_from_text",
    "front_to_text",
    "fuse_nodes",
    "heap_join",
    "heuristic_join",
    "make_nice",
    "parse_graph",
    "parse_td",
    "solve_mst",
    "solve_stcut",
    "solve_tsp",
    "tour_edges",
    "tree_edges",
]
