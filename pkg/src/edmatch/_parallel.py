import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "EDMATCH_THREADS"

# below this many samples per item a thread pool costs more than it saves
_MIN_WORK = 1 << 14


def max_workers() -> int:
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_THREADS} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_THREADS} must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def pmap(fn, items, work_per_item: int = _MIN_WORK):
    """Order-preserving map, threaded when worthwhile.

    Results come back in input order, so output never depends on scheduling.
    """
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1 or work_per_item < _MIN_WORK:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))
