"""Ordered map over independent jobs."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor


def parallel_map(fn, jobs, threads: int = 1) -> list:
    """``[fn(j) for j in jobs]``, optionally on a thread pool; order is preserved."""
    jobs = list(jobs)
    if threads is None or threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))
