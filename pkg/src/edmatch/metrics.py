"""Distances between feature maps: content, gram, mean+std, histogram, CMD, SWD.

All of them treat a feature map as ``H*W`` samples of a C-dimensional
variable.  Only ``content_l2`` needs identical spatial sizes.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import FeatureMap, as_feature_map, channel_stats, resample_sorted

__all__ = [
    "RNG_STREAM",
    "MetricReport",
    "SwdConfig",
    "content_l2",
    "gram_matrix",
    "gram_loss",
    "mean_std_loss",
    "histogram_l2",
    "cmd",
    "sw1d",
    "swd",
    "swd_directions",
    "metric_report",
]

# Bump if the direction-sampling recipe changes; reports quote it.
RNG_STREAM = "pcg64-normal-v1"


@dataclass(frozen=True)
class MetricReport:
    content: float
    gram: float
    mean_std: float
    histogram_l2: float
    cmd: float
    swd: float

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SwdConfig:
    """``directions=None`` means ``multiplier * C`` directions."""

    directions: int | None = None
    seed: int = 0
    multiplier: int = 4

    def __post_init__(self):
        if self.directions is not None and self.directions < 1:
            raise ValueError(f"directions must be >= 1, got {self.directions}")
        if self.multiplier < 1:
            raise ValueError(f"multiplier must be >= 1, got {self.multiplier}")

    def count(self, channels: int) -> int:
        return self.directions if self.directions is not None else self.multiplier * channels


def _pair(a, b):
    a = as_feature_map(a)
    b = as_feature_map(b)
    if a.channels != b.channels:
        raise ValueError(f"channel count mismatch: {a.channels} vs {b.channels}")
    return a, b


def content_l2(a: FeatureMap, b: FeatureMap) -> float:
    """Mean squared element-wise difference."""
    a = as_feature_map(a)
    b = as_feature_map(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    d = a.data.astype(np.float64) - b.data.astype(np.float64)
    return float(np.mean(d * d))


def gram_matrix(f: FeatureMap) -> np.ndarray:
    x = as_feature_map(f).matrix().astype(np.float64)
    return x @ x.T / x.shape[1]


def gram_loss(a: FeatureMap, b: FeatureMap) -> float:
    """Squared Frobenius distance of the gram matrices, divided by ``C**2``."""
    a, b = _pair(a, b)
    d = gram_matrix(a) - gram_matrix(b)
    return float(np.sum(d * d)) / a.channels**2


def mean_std_loss(a: FeatureMap, b: FeatureMap) -> float:
    a, b = _pair(a, b)
    sa, sb = channel_stats(a), channel_stats(b)
    return float(np.mean((sa.mean - sb.mean) ** 2 + (sa.std - sb.std) ** 2))


def histogram_l2(a: FeatureMap, b: FeatureMap, bins: int = 256) -> float:
    """Mean over channels of the L2 distance between normalized histograms.

    Both channels share ``bins`` equal-width bins over their joint range.
    A degenerate range puts all mass in bin 0 on both sides.
    """
    a, b = _pair(a, b)
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    xa, xb = a.matrix(), b.matrix()
    dists = []
    for ca, cb in zip(xa, xb):
        lo = float(min(ca.min(), cb.min()))
        hi = float(max(ca.max(), cb.max()))
        if hi <= lo:
            dists.append(0.0)
            continue
        ha, _ = np.histogram(ca, bins=bins, range=(lo, hi))
        hb, _ = np.histogram(cb, bins=bins, range=(lo, hi))
        d = ha / ca.size - hb / cb.size
        dists.append(float(np.sqrt(np.sum(d * d))))
    return float(np.mean(dists))


def _rescaled(a: FeatureMap, b: FeatureMap):
    xa = a.matrix().astype(np.float64)
    xb = b.matrix().astype(np.float64)
    lo = np.minimum(xa.min(axis=1), xb.min(axis=1))[:, None]
    span = np.maximum(xa.max(axis=1), xb.max(axis=1))[:, None] - lo
    # degenerate channels collapse to 0 on both sides
    safe = np.where(span > 0, span, 1.0)
    xa = np.where(span > 0, (xa - lo) / safe, 0.0)
    xb = np.where(span > 0, (xb - lo) / safe, 0.0)
    return xa, xb


def cmd(a: FeatureMap, b: FeatureMap, order: int = 5) -> float:
    """Central moment discrepancy on values rescaled per channel to [0, 1].

    ``||mean_a - mean_b|| + sum_{k=2..order} ||c_k(a) - c_k(b)||`` with
    vectors running over channels.
    """
    a, b = _pair(a, b)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    xa, xb = _rescaled(a, b)
    ma, mb = xa.mean(axis=1), xb.mean(axis=1)
    total = float(np.linalg.norm(ma - mb))
    da, db = xa - ma[:, None], xb - mb[:, None]
    for k in range(2, order + 1):
        total += float(np.linalg.norm(np.mean(da**k, axis=1) - np.mean(db**k, axis=1)))
    return total


def sw1d(x, y) -> float:
    """Mean squared difference of the sorted sequences.

    This is the squared 1-D Wasserstein-2 distance between the two empirical
    distributions.  Sequences of different length are compared after
    resampling the longer one's quantile function to the shorter length.
    """
    x = np.sort(np.asarray(x, dtype=np.float64).ravel())
    y = np.sort(np.asarray(y, dtype=np.float64).ravel())
    if x.size == 0 or y.size == 0:
        raise ValueError("sw1d of an empty sequence")
    n = min(x.size, y.size)
    x, y = resample_sorted(x, n), resample_sorted(y, n)
    d = x - y
    return float(np.mean(d * d))


def swd_directions(channels: int, count: int, seed: int) -> np.ndarray:
    """``(count, channels)`` unit vectors from normalized Gaussian draws."""
    rng = np.random.Generator(np.random.PCG64(seed))
    v = rng.standard_normal((count, channels))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # a zero draw has probability 0 but would divide by zero
    while np.any(norms == 0):
        bad = (norms == 0).ravel()
        v[bad] = rng.standard_normal((int(bad.sum()), channels))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
    return v / norms


def swd(a: FeatureMap, b: FeatureMap, cfg: SwdConfig | None = None) -> float:
    """Sliced Wasserstein distance: mean of :func:`sw1d` over random projections."""
    a, b = _pair(a, b)
    cfg = cfg or SwdConfig()
    dirs = swd_directions(a.channels, cfg.count(a.channels), cfg.seed)
    pa = np.sort(dirs @ a.matrix().astype(np.float64), axis=1)
    pb = np.sort(dirs @ b.matrix().astype(np.float64), axis=1)
    n = min(pa.shape[1], pb.shape[1])
    if pa.shape[1] != n:
        pa = np.stack([resample_sorted(r, n) for r in pa])
    if pb.shape[1] != n:
        pb = np.stack([resample_sorted(r, n) for r in pb])
    d = pa - pb
    return float(np.mean(np.mean(d * d, axis=1)))


def metric_report(
    a: FeatureMap,
    b: FeatureMap,
    *,
    bins: int = 256,
    cmd_order: int = 5,
    swd_cfg: SwdConfig | None = None,
) -> MetricReport:
    """All six distances.  ``content`` is NaN when spatial sizes differ."""
    a, b = _pair(a, b)
    return MetricReport(
        content=content_l2(a, b) if a.shape == b.shape else float("nan"),
        gram=gram_loss(a, b),
        mean_std=mean_std_loss(a, b),
        histogram_l2=histogram_l2(a, b, bins),
        cmd=cmd(a, b, cmd_order),
        swd=swd(a, b, swd_cfg),
    )
