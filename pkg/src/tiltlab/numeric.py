"""Small numerically-stable helpers used throughout the library."""
from __future__ import annotations

import numpy as np


def log_sum_exp(values: np.ndarray) -> float:
    """log(sum(exp(values))) with the usual max shift."""
    values = np.asarray(values, dtype=np.float64)
    m = float(np.max(values))
    if not np.isfinite(m):
        return m
    return m + float(np.log(np.sum(np.exp(values - m))))
