"""Rank statistics: tie-aware Spearman correlation and bootstrap intervals.

SRCC is computed as the Pearson correlation of tie-averaged ranks, never
the d^2 shortcut (biased under ties, and MOS data is heavily tied).
Constant series raise DegenerateSeries instead of silently returning 0.

Bootstrap resampling uses an explicitly named generator so intervals are
reproducible across implementations from (seed, algorithm tag) alone:
resample r draws its indices from an xorshift64* stream whose state is the
r-th output of a splitmix64 stream started at the seed. Index draws use
rejection-free-in-practice modulo rejection (redraw while the 64-bit draw
falls in the biased tail). Tag: "splitmix64-xorshift64star".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeries, NonFiniteInput

RNG_TAG = "splitmix64-xorshift64star"

_M64 = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    """One splitmix64 output step from state x (finalizer only)."""
    z = (x + _SPLITMIX_GAMMA) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


def stream_seed(seed: int, stream: int) -> int:
    """State for sub-stream `stream`: the stream-th splitmix64 output."""
    state = _splitmix64((seed + stream * _SPLITMIX_GAMMA) & _M64)
    return state if state != 0 else _SPLITMIX_GAMMA


class Xorshift64Star:
    """Marsaglia xorshift64* with the Vigna output multiplier; 64-bit state."""

    def __init__(self, state: int):
        state &= _M64
        self._state = state if state != 0 else _SPLITMIX_GAMMA

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x = (x ^ (x << 25)) & _M64
        x ^= x >> 27
        self._state = x
        return (x * 0x2545F4914F6CDD1D) & _M64

    def randbelow(self, n: int) -> int:
        """Unbiased draw in [0, n) via modulo rejection."""
        limit = (_M64 + 1) - ((_M64 + 1) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n


@dataclass(frozen=True)
class PairedSeries:
    """Two finite vectors of equal length n >= 3, e.g. (UM values, MOS)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 1 or y.ndim != 1:
            raise ValueError("paired series must be 1-D vectors")
        if x.shape[0] != y.shape[0]:
            raise ValueError(f"length mismatch: {x.shape[0]} vs {y.shape[0]}")
        if x.shape[0] < 3:
            raise ValueError(f"need n >= 3 pairs, got {x.shape[0]}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise NonFiniteInput("non-finite value in paired series")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]


def average_ranks(x) -> np.ndarray:
    """1-based ranks; tied values share the mean of the ranks they span."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("ranks are defined for 1-D vectors")
    if not np.isfinite(x).all():
        raise NonFiniteInput("non-finite value in rank input")
    n = x.shape[0]
    order = np.argsort(x, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _is_constant(v: np.ndarray) -> bool:
    return bool(np.all(v == v[0]))


def _rank_pearson(x: np.ndarray, y: np.ndarray) -> float:
    rx = average_ranks(x)
    ry = average_ranks(y)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    r = float((dx @ dy) / np.sqrt((dx @ dx) * (dy @ dy)))
    return min(1.0, max(-1.0, r))


def spearman(series: PairedSeries) -> float:
    """Spearman rank correlation in [-1, 1] of the paired series."""
    if _is_constant(series.x):
        raise DegenerateSeries("x is constant; rank correlation undefined")
    if _is_constant(series.y):
        raise DegenerateSeries("y is constant; rank correlation undefined")
    return _rank_pearson(series.x, series.y)


_MAX_REDRAWS = 100


def bootstrap_ci(
    series: PairedSeries, resamples: int, level: float, seed: int
) -> tuple[float, float]:
    """Percentile bootstrap interval for the Spearman correlation.

    Paired resampling with replacement; deterministic given the seed.
    Resamples that come out constant are redrawn from the same sub-stream,
    up to a bounded retry count. Interval endpoints use linear-interpolation
    percentiles. Sub-streams are independent per resample, so a parallel
    run reproduces the sequential result exactly.
    """
    if resamples < 100:
        raise ValueError(f"need >= 100 resamples, got {resamples}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    if _is_constant(series.x):
        raise DegenerateSeries("x is constant; bootstrap undefined")
    if _is_constant(series.y):
        raise DegenerateSeries("y is constant; bootstrap undefined")

    n = series.n
    stats = np.empty(resamples, dtype=np.float64)
    for r in range(resamples):
        gen = Xorshift64Star(stream_seed(seed, r))
        for _ in range(_MAX_REDRAWS):
            idx = np.fromiter((gen.randbelow(n) for _ in range(n)), dtype=np.intp, count=n)
            xs = series.x[idx]
            ys = series.y[idx]
            if _is_constant(xs) or _is_constant(ys):
                continue
            stats[r] = _rank_pearson(xs, ys)
            break
        else:
            raise DegenerateSeries(
                f"resample {r} stayed constant after {_MAX_REDRAWS} redraws"
            )
    alpha = 1.0 - level
    low, high = np.percentile(stats, [100.0 * alpha / 2.0, 100.0 * (1.0 - alpha / 2.0)])
    return float(low), float(high)
