"""Instance to block-structured matrices, and the flat oracle problems."""

from .blocks import (
    CHAINED, DECOMPOSED, BlockProblem, OperationalBlock, PlanningLayout, PlanningRows,
    SparseBlock, assemble_block_problem, build_coupling_blocks, build_operational_block,
    planning_layout, policy_budget,
)
from .monolithic import assemble_monolithic, stack_blocks

__all__ = [
    "CHAINED", "DECOMPOSED", "BlockProblem", "OperationalBlock", "PlanningLayout",
    "PlanningRows", "SparseBlock", "assemble_block_problem", "build_coupling_blocks",
    "build_operational_block", "planning_layout", "policy_budget", "assemble_monolithic",
    "stack_blocks",
]
