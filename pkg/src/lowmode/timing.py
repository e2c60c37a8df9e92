"""Wall-clock helpers for the benchmark experiments."""

import statistics
import time

import numpy as np


def median_time(fn, repeats: int = 5):
    """Run ``fn()`` ``repeats`` times; return ``(median seconds, last result)``.

    ``fn`` may return a ``(result, seconds)`` pair to report its own timing
    (e.g. excluding bookkeeping); otherwise the monotonic clock is used.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        elapsed = time.perf_counter() - t0
        if isinstance(out, tuple) and len(out) == 2 and isinstance(out[1], float):
            result, elapsed = out
        else:
            result = out
        times.append(elapsed)
    return statistics.median(times), result


def fit_exponent(n, t) -> float:
    """Least-squares slope of ``log t`` against ``log n``."""
    return float(np.polyfit(np.log(np.asarray(n, float)), np.log(np.asarray(t, float)), 1)[0])
