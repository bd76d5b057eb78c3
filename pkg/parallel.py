"""Ordered fan-out of independent per-item work."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


def fan_out(
    func: Callable[[T], R],
    items: Sequence[T],
    max_workers: int = 1,
    verbose: bool = False,
    progress_every: int = 100,
) -> list[R]:
    """Apply func to every item; results come back in input order whatever
    the completion order. `func` must be picklable when max_workers > 1."""
    if max_workers <= 1 or len(items) <= 1:
        results = []
        for completed, item in enumerate(items, start=1):
            results.append(func(item))
            if verbose and completed % progress_every == 0:
                print(f"[{completed}/{len(items)}] ✓")
        return results

    results: list = [None] * len(items)
    completed = 0
    with ProcessPoolExecutor(max_workers=max_workers) as executor:
        future_to_idx = {
            executor.submit(func, item): idx
            for idx, item in enumerate(items)
        }
        for future in as_completed(future_to_idx):
            results[future_to_idx[future]] = future.result()
            completed += 1
            if verbose and completed % progress_every == 0:
                print(f"[{completed}/{len(items)}] ✓")
    return results
