"""Crest and trough counting with a prominence threshold."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def count_extrema(values: Sequence[float], eps: float) -> tuple[int, int]:
    """Count interior crests and troughs of an ordered series.

    A turning point is confirmed only once the series has moved away from
    it by at least ``eps``, so each counted extremum differs from the next
    counted one by at least ``eps`` and ripples smaller than ``eps`` are
    ignored. The endpoints are never counted.

    Parameters
    ----------
    values : sequence of float
        Samples in time order, at least three of them.
    eps : float
        Prominence threshold, > 0.

    Returns
    -------
    (crests, troughs) : tuple of int
    """
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("need a 1-D series with at least 3 samples")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return _zigzag(x, eps)


def extrema_positions(values: Sequence[float], eps: float) -> tuple[list[int], list[int]]:
    """Indices of the counted crests and troughs (same rules as
    :func:`count_extrema`)."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ValueError("need a 1-D series with at least 3 samples")
    if not eps > 0:
        raise ValueError("eps must be positive")
    return _pivots(x, eps)


def _zigzag(x, eps):
    crests, troughs = _pivots(x, eps)
    return len(crests), len(troughs)


def _pivots(x, eps):
    crests: list[int] = []
    troughs: list[int] = []
    direction = 0  # +1 rising, -1 falling, 0 undecided
    hi = lo = 0
    for i in range(1, x.size):
        v = x[i]
        if direction == 0:
            if v > x[hi]:
                hi = i
            if v < x[lo]:
                lo = i
            if v - x[lo] >= eps:
                if lo > 0:
                    troughs.append(lo)
                direction, hi = 1, i
            elif x[hi] - v >= eps:
                if hi > 0:
                    crests.append(hi)
                direction, lo = -1, i
        elif direction > 0:
            if v > x[hi]:
                hi = i
            elif x[hi] - v >= eps:
                crests.append(hi)
                direction, lo = -1, i
        else:
            if v < x[lo]:
                lo = i
            elif v - x[lo] >= eps:
                troughs.append(lo)
                direction, hi = 1, i
    return crests, troughs
