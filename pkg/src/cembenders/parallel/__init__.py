"""Deterministic parallel execution of sub-problem batches."""

from .pool import (
    BACKENDS, ENV_WORKERS, WorkBatch, WorkItem, assignment, map_subproblems, resolve_workers,
)

__all__ = ["BACKENDS", "ENV_WORKERS", "WorkBatch", "WorkItem", "assignment",
           "map_subproblems", "resolve_workers"]
