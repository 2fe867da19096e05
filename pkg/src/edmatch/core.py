"""Feature-map container and elementary statistics.

A :class:`FeatureMap` is a ``C x H x W`` float32 grid.  Every spatial
position is one sample of a C-dimensional random variable, which is how all
the transforms in this package treat it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FeatureMap",
    "ChannelStats",
    "channel_stats",
    "covariance",
    "flatten_channel",
    "as_feature_map",
    "resample_sorted",
]


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Immutable ``(C, H, W)`` float32 tensor.

    The array is copied on construction and marked read-only, so instances
    can be shared freely between threads.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float32, copy=True)
        if arr.ndim != 3:
            raise ValueError(f"feature map must be 3-D (C, H, W), got shape {arr.shape}")
        if min(arr.shape) < 1:
            raise ValueError(f"feature map dimensions must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature map contains NaN or Inf")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_flat(cls, values, channels: int, height: int, width: int) -> "FeatureMap":
        values = np.asarray(values, dtype=np.float32).ravel()
        if values.size != channels * height * width:
            raise ValueError(
                f"data length {values.size} != C*H*W = {channels * height * width}"
            )
        return cls(values.reshape(channels, height, width))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def samples(self) -> int:
        return self.height * self.width

    def matrix(self) -> np.ndarray:
        """``C x (H*W)`` view of the data."""
        return self.data.reshape(self.channels, -1)

    def __repr__(self):
        c, h, w = self.shape
        return f"FeatureMap(C={c}, H={h}, W={w})"


def as_feature_map(f) -> FeatureMap:
    if isinstance(f, FeatureMap):
        return f
    return FeatureMap(f)


@dataclass(frozen=True)
class ChannelStats:
    mean: np.ndarray
    std: np.ndarray


def channel_stats(f: FeatureMap) -> ChannelStats:
    """Per-channel population mean and standard deviation.

    A constant channel has ``std == 0``; this is not an error.
    """
    x = as_feature_map(f).matrix().astype(np.float64)
    mean = x.mean(axis=1)
    std = np.sqrt(np.mean((x - mean[:, None]) ** 2, axis=1))
    return ChannelStats(mean=mean, std=std)


def covariance(f: FeatureMap, centered: bool = True) -> np.ndarray:
    """Population covariance ``(F - mu)(F - mu)^T / (H*W)``.

    With ``centered=False`` the mean is not subtracted, giving the raw
    second-moment matrix.  The result is exactly symmetric.
    """
    x = as_feature_map(f).matrix().astype(np.float64)
    if centered:
        x = x - x.mean(axis=1, keepdims=True)
    cov = x @ x.T / x.shape[1]
    # matmul does not guarantee bitwise symmetry
    return np.triu(cov) + np.triu(cov, 1).T


def flatten_channel(f: FeatureMap, c: int) -> np.ndarray:
    """Row-major scan of channel ``c``."""
    f = as_feature_map(f)
    if not 0 <= c < f.channels:
        raise IndexError(f"channel index {c} out of range for {f.channels} channels")
    return f.data[c].ravel()


def resample_sorted(values: np.ndarray, n: int) -> np.ndarray:
    """Resample an ascending sequence to length ``n`` along its quantile function.

    Sample ``i`` of the result sits at fractional rank ``i * (m-1) / (n-1)``
    of the input (length ``m``), linearly interpolated.  Returns the input
    unchanged when ``m == n``.
    """
    values = np.asarray(values)
    m = values.size
    if m == 0:
        raise ValueError("cannot resample an empty sequence")
    if n < 1:
        raise ValueError(f"target length must be positive, got {n}")
    if m == n:
        return values
    if n == 1:
        pos = np.array([(m - 1) / 2.0])
    else:
        pos = np.arange(n, dtype=np.float64) * ((m - 1) / (n - 1))
    return np.interp(pos, np.arange(m, dtype=np.float64), values.astype(np.float64))
