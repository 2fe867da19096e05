"""Exact histogram specification by lexicographic ordering of filter responses.

Samples of one channel are ranked by their K-tuple of filter responses,
compared lexicographically (identity response first).  The i-th ranked
content position then receives the i-th smallest style value.  When content
and style have the same number of samples, every output channel is a
permutation of the corresponding style channel.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ._parallel import pmap
from .core import FeatureMap, as_feature_map, resample_sorted
from .filters import FilterBank, apply, default_bank

__all__ = [
    "SortResult",
    "CollisionReport",
    "lex_order",
    "lsort",
    "match_channelwise",
    "collision_ratio",
    "mean_collision_ratio",
    "collision_report",
]


@dataclass(frozen=True, eq=False)
class SortResult:
    """``sorted_values[c, i]`` is the raw value at ``order[c, i]``."""

    sorted_values: np.ndarray  # (C, N) float32
    order: np.ndarray  # (C, N) intp


def lex_order(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stable lexicographic argsort of the columns of ``keys``.

    ``keys`` has shape ``(K, N)``; row 0 is the most significant key.  Later
    rows are only consulted for samples still tied on all earlier rows, so
    inputs without ties cost a single argsort.

    Returns ``(order, starts)`` where ``starts[i]`` is True when sorted
    position ``i`` opens a new group of fully tied tuples.
    """
    keys = np.asarray(keys)
    n = keys.shape[1]
    order = np.argsort(keys[0], kind="stable")
    starts = np.ones(n, dtype=bool)
    if n == 0:
        return order, starts
    s0 = keys[0][order]
    starts[1:] = s0[1:] != s0[:-1]

    for j in range(1, keys.shape[0]):
        gid = np.cumsum(starts) - 1
        size = np.bincount(gid)
        pos = np.flatnonzero(size[gid] > 1)
        if pos.size == 0:
            break
        sub = order[pos]
        g = gid[pos]
        kj = keys[j][sub]
        # stable: ties on key j keep their previous (ascending index) order
        perm = np.lexsort((kj, g))
        order[pos] = sub[perm]
        kj = kj[perm]
        # positions are contiguous per group, so neighbors in pos share a group
        # exactly when their group ids match
        split = (g[1:] == g[:-1]) & (kj[1:] != kj[:-1])
        starts[pos[1:][split]] = True
    return order, starts


def _check_stack(stack: np.ndarray) -> np.ndarray:
    stack = np.asarray(stack)
    if stack.ndim != 4:
        raise ValueError(f"response stack must have shape (K, C, H, W), got {stack.shape}")
    return stack


def lsort(stack: np.ndarray) -> SortResult:
    """Rank every channel's samples by their filter-response tuples.

    Residual full ties are broken by ascending flat spatial index.
    """
    stack = _check_stack(stack)
    k, c, h, w = stack.shape
    keys = stack.reshape(k, c, h * w)
    orders = pmap(lambda ch: lex_order(keys[:, ch])[0], range(c), work_per_item=k * h * w)
    order = np.stack(orders) if orders else np.empty((0, h * w), dtype=np.intp)
    values = np.take_along_axis(keys[0], order, axis=1).astype(np.float32)
    return SortResult(sorted_values=values, order=order)


def match_channelwise(
    content: FeatureMap, style: FeatureMap, bank: FilterBank | None = None
) -> FeatureMap:
    """Give each content channel the exact value distribution of the style channel.

    Parameters
    ----------
    content, style : FeatureMap
        Must have the same channel count; spatial sizes may differ.
    bank : FilterBank, optional
        Sort keys for the content side.  Defaults to the full ten-filter bank.

    Returns
    -------
    FeatureMap
        Content-shaped map.  With equal sample counts each channel is a
        permutation of the style channel's values; otherwise the sorted style
        values are first resampled along their quantile function.
    """
    content = as_feature_map(content)
    style = as_feature_map(style)
    if content.channels != style.channels:
        raise ValueError(
            f"channel count mismatch: content has {content.channels}, style has {style.channels}"
        )
    bank = default_bank() if bank is None else bank
    n = content.samples
    target = np.sort(style.matrix(), axis=1)
    if style.samples != n:
        target = np.stack([resample_sorted(t, n) for t in target]).astype(np.float32)

    ranks = lsort(apply(bank, content)).order
    out = np.empty((content.channels, n), dtype=np.float32)
    np.put_along_axis(out, ranks, target, axis=1)
    return FeatureMap(out.reshape(content.shape))


def _collisions(keys: np.ndarray) -> float:
    _, starts = lex_order(keys)
    gid = np.cumsum(starts) - 1
    size = np.bincount(gid)
    return float(np.count_nonzero(size[gid] > 1)) / keys.shape[1]


def collision_ratio(f: FeatureMap, bank: FilterBank) -> np.ndarray:
    """Per channel, fraction of samples whose full response tuple is not unique."""
    f = as_feature_map(f)
    stack = apply(bank, f)
    k = len(bank)
    keys = stack.reshape(k, f.channels, f.samples)
    return np.array(
        pmap(lambda c: _collisions(keys[:, c]), range(f.channels), work_per_item=k * f.samples)
    )


def mean_collision_ratio(f: FeatureMap, bank: FilterBank) -> float:
    return float(np.mean(collision_ratio(f, bank)))


@dataclass
class CollisionReport:
    """Collision ratio and sort timing for bank prefixes ``k = 1..K``."""

    k: list = field(default_factory=list)
    ratio: list = field(default_factory=list)  # mean over channels
    elapsed: list = field(default_factory=list)  # seconds per feature sort (median)
    channel_ratios: list = field(default_factory=list)

    def rows(self):
        return list(zip(self.k, self.ratio, self.elapsed))


def collision_report(
    f: FeatureMap, max_filters: int = 10, repeats: int = 5, bank: FilterBank | None = None
) -> CollisionReport:
    """Measure collisions and lexicographic sort time for growing filter prefixes.

    Filtering is done once up front; only :func:`lsort` is timed.
    """
    f = as_feature_map(f)
    bank = default_bank(max_filters) if bank is None else bank.prefix(max_filters)
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    stack = apply(bank, f)
    report = CollisionReport()
    for k in range(1, max_filters + 1):
        sub = stack[:k]
        keys = sub.reshape(k, f.channels, f.samples)
        per_channel = np.array([_collisions(keys[:, c]) for c in range(f.channels)])
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            lsort(sub)
            times.append(time.perf_counter() - t0)
        report.k.append(k)
        report.ratio.append(float(per_channel.mean()))
        report.elapsed.append(float(np.median(times)))
        report.channel_ratios.append(per_channel)
    return report
