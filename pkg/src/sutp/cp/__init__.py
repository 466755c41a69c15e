"""A small trail-based constraint solver tailored to the unloading model."""

from sutp.cp.arith import (
    Equal,
    GuardedChain,
    GuardedEqual,
    IntervalSum,
    LessEqual,
    LinearCapacity,
    MaxOf,
    MinLink,
    Release,
    post_guarded_chain,
    post_linear_capacity,
    post_max,
)
from sutp.cp.kernel import BOOL, SMALL_INT, TIME, CpVar, Inconsistent, Propagator, Solver
from sutp.cp.search import (
    Decision,
    Limits,
    SearchResult,
    SearchStats,
    Status,
    luby,
    solve_branch_and_bound,
)
from sutp.cp.tables import (
    CompactTable,
    SmallTable,
    TableRelation,
    post_table,
    post_table_compact,
    post_table_small,
)
from sutp.cp.unary import (
    OptionalActivity,
    UnaryMulti,
    UnarySingle,
    post_min_link,
    post_unary_multi_interval,
    post_unary_single_interval,
)

__all__ = [
    "BOOL", "SMALL_INT", "TIME", "CompactTable", "CpVar", "Decision", "Equal", "GuardedChain",
    "GuardedEqual", "Inconsistent", "IntervalSum", "LessEqual", "Limits", "LinearCapacity",
    "MaxOf", "MinLink", "OptionalActivity", "Propagator", "Release", "SearchResult",
    "SearchStats", "SmallTable", "Solver", "Status", "TableRelation", "UnaryMulti",
    "UnarySingle", "luby", "post_guarded_chain", "post_linear_capacity", "post_max",
    "post_min_link", "post_table", "post_table_compact", "post_table_small",
    "post_unary_multi_interval", "post_unary_single_interval", "solve_branch_and_bound",
]
