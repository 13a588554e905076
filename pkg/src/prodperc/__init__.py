"""Bond percolation on high-dimensional Cartesian product graphs."""

from .analysis import (
    gw_survival_binomial,
    medium_component_bound,
    second_component_constant,
    solve_survival,
    subcritical_bound,
    tree_count_exact,
)
from .base import BaseGraph, GraphError, IsoResult, isoperimetric_exact, parse_base_graph
from .oracle import exact_percolation_stats, mc_agreement
from .percolation import (
    ComponentCensus,
    PercolationSample,
    RoundPlan,
    census,
    distance2_density,
    explore_component,
    make_round_plan,
)
from .product import (
    EdgeKey,
    Projection,
    ProductGraph,
    assemble,
    decompose_projections,
    parse_product,
    product_iso_bounds,
    restrict,
)

__version__ = "0.1.0"
