import os
from concurrent.futures import ThreadPoolExecutor

ENV_VAR = "MULTICOIN_WALK_THREADS"


def worker_count() -> int:
    """Worker cap from MULTICOIN_WALK_THREADS; 0 or unset means one per CPU."""
    raw = os.environ.get(ENV_VAR, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 0:
        raise ValueError(f"{ENV_VAR} must be >= 0, got {n}")
    return n if n > 0 else (os.cpu_count() or 1)


def ordered_map(fn, items):
    """Map ``fn`` over ``items``; results come back in input order."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
