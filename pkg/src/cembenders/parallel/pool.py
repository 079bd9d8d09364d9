"""Fixed-size worker pool for sub-problem batches.

Sub-period ``w`` goes to worker ``w mod n_workers``; each worker solves its
share in ascending id order, and results are gathered back into ascending id
order, so the output never depends on timing or on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..benders.subproblem import SubResult, solve_subproblem
from ..errors import SubproblemError
from ..lpcore import SolveOptions

ENV_WORKERS = "BENDERS_WORKERS"
BACKENDS = ("thread", "process")


@dataclass(frozen=True)
class WorkItem:
    w: int
    block: object  # OperationalBlock, shared read-only
    y: np.ndarray
    z: np.ndarray


@dataclass(frozen=True)
class WorkBatch:
    items: tuple[WorkItem, ...]
    workers: int = 1
    seed: int = 0
    backend: str = "thread"
    opts: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        ids = [it.w for it in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError("sub-period ids must be unique within a batch")
        if self.workers < 1:
            raise ValueError(f"worker count must be at least 1, got {self.workers}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")


def resolve_workers(requested: int | None) -> int:
    """The ``BENDERS_WORKERS`` environment variable overrides the requested count."""
    env = os.environ.get(ENV_WORKERS, "").strip()
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{ENV_WORKERS}={env!r} is not an integer") from None
    else:
        n = 1 if requested is None else int(requested)
    if n < 1:
        raise ValueError(f"worker count must be at least 1, got {n}")
    return n


def assignment(ids, workers: int) -> list[list[int]]:
    """Static round-robin: worker k receives the ids with id mod workers == k."""
    out = [[] for _ in range(workers)]
    for w in sorted(ids):
        out[w % workers].append(w)
    return out


def _run_share(items: list[WorkItem], opts: SolveOptions) -> list[SubResult]:
    # Each worker solves its share in series and stops at the first failure.
    return [solve_subproblem(it.block, it.y, it.z, opts) for it in items]


def map_subproblems(batch: WorkBatch) -> list[SubResult]:
    by_id = {it.w: it for it in batch.items}
    shares = [[by_id[w] for w in ids] for ids in assignment(by_id, batch.workers)]
    shares = [s for s in shares if s]
    if batch.workers == 1 or len(shares) <= 1:
        results = [r for s in shares for r in _run_share(s, batch.opts)]
    else:
        pool_cls = ThreadPoolExecutor if batch.backend == "thread" else ProcessPoolExecutor
        results = []
        with pool_cls(max_workers=len(shares)) as pool:
            futures = [pool.submit(_run_share, s, batch.opts) for s in shares]
            errors = []
            for fut in futures:
                exc = fut.exception()
                if exc is not None:
                    errors.append(exc)
                    for other in futures:
                        other.cancel()
                else:
                    results.extend(fut.result())
            if errors:
                # Report the failing sub-period with the smallest id for a stable message.
                errs = sorted(errors, key=lambda e: getattr(e, "subperiod", None) or 0)
                exc = errs[0]
                if isinstance(exc, SubproblemError):
                    raise exc
                raise SubproblemError(f"worker failed: {exc}") from exc
    results.sort(key=lambda r: r.w)
    return results
