import logging
import os
from concurrent.futures.thread import ThreadPoolExecutor

LOGGER = logging.getLogger('cmc_foliation.worker_pool')


def default_workers():
    return max(1, min(8, os.cpu_count() or 1))


def chunked(items, size):
    """Splits a sequence (or array along the first axis) into consecutive slices of at most `size` elements"""
    if size <= 0:
        raise ValueError('Chunk size should be > 0, but was ' + str(size))

    return [items[start:start + size] for start in range(0, len(items), size)]


def map_ordered(func, items, max_workers=None):
    """Applies func to every item in a thread pool and returns results in input order.

    With a single item or a single worker everything runs in the calling thread."""
    items = list(items)
    if max_workers is None:
        max_workers = default_workers()

    if len(items) <= 1 or max_workers <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix='cmc-worker') as executor:
        return list(executor.map(func, items))
