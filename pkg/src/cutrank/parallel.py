"""Deterministic worker-pool helper."""

from concurrent.futures import ThreadPoolExecutor


def ordered_map(fn, items, threads=1):
    """Map fn over items, returning results in input order.

    With threads > 1 the work is spread over a thread pool; results are
    collected in input order, so any later reduction sees the same sequence
    as a sequential run.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
