"""Order-preserving parallel helpers.

Work is addressed by index and written into a preallocated slot, so results
are identical for any worker count; reductions are left to the caller, which
should use a fixed-order sum (numpy's pairwise summation over one array).
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

__all__ = ["map_indexed"]


def map_indexed(fn: Callable[[int], T], count: int, threads: int = 1) -> list[T]:
    """Evaluate ``fn(i)`` for ``i in range(count)``, preserving index order.

    ``fn`` must be a pure function of its index for the worker-count
    independence guarantee to hold.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    out: list = [None] * count
    step = -(-count // threads)

    def run_chunk(lo: int) -> None:
        for i in range(lo, min(lo + step, count)):
            out[i] = fn(i)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(run_chunk, lo) for lo in range(0, count, step)]
        for fut in futures:
            fut.result()
    return out
