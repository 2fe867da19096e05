"""Neighborhood filter bank used to break ties in lexicographic sorting.

The default bank has ten normalized averaging masks of growing support.
Kernel 0 is the identity, so the raw value always leads the sort key; the
larger masks only matter for samples that tie on every smaller one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ._parallel import pmap
from .core import FeatureMap, as_feature_map

__all__ = ["FilterBank", "default_bank", "apply", "pad_reflect", "MAX_FILTERS"]

MAX_FILTERS = 10


def _mask(rows):
    return np.array([[int(ch) for ch in r] for r in rows], dtype=np.float64)


# (0/1 mask, normalizer); each normalizer is the mask's population
_DEFAULT_MASKS = [
    (_mask(["1"]), 1),
    (_mask(["010", "111", "010"]), 5),
    (_mask(["111", "111", "111"]), 9),
    (_mask(["00100", "01110", "11111", "01110", "00100"]), 13),
    (_mask(["01110", "11111", "11111", "11111", "01110"]), 21),
    (_mask(["11111"] * 5), 25),
    (
        _mask(["0001000", "0011100", "0111110", "1111111",
               "0111110", "0011100", "0001000"]),
        25,
    ),
    (
        _mask(["0011100", "0111110", "1111111", "1111111",
               "1111111", "0111110", "0011100"]),
        37,
    ),
    (
        _mask(["0111110", "1111111", "1111111", "1111111",
               "1111111", "1111111", "0111110"]),
        45,
    ),
    (_mask(["1111111"] * 7), 49),
]


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Ordered square kernels; index 0 has the highest sort priority."""

    kernels: tuple

    def __post_init__(self):
        ks = []
        for i, k in enumerate(self.kernels):
            k = np.array(k, dtype=np.float64, copy=True)
            if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] % 2 == 0:
                raise ValueError(f"kernel {i} must be square with odd side, got {k.shape}")
            if not np.all(np.isfinite(k)):
                raise ValueError(f"kernel {i} has non-finite weights")
            k.setflags(write=False)
            ks.append(k)
        if not ks:
            raise ValueError("filter bank must contain at least one kernel")
        if ks[0].shape != (1, 1) or ks[0][0, 0] != 1.0:
            raise ValueError("kernel 0 must be the 1x1 identity [1]")
        for i, k in enumerate(ks):
            if abs(k.sum() - 1.0) > 1e-9:
                raise ValueError(f"kernel {i} weights sum to {k.sum()}, expected 1")
        object.__setattr__(self, "kernels", tuple(ks))

    def __len__(self):
        return len(self.kernels)

    def __getitem__(self, i):
        return self.kernels[i]

    def prefix(self, k: int) -> "FilterBank":
        if not 1 <= k <= len(self):
            raise ValueError(f"prefix length {k} out of range 1..{len(self)}")
        return FilterBank(self.kernels[:k])


def default_bank(k: int = MAX_FILTERS) -> FilterBank:
    """First ``k`` kernels of the standard ten-filter bank."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_FILTERS:
        raise ValueError(f"filter count must be an integer in [1, {MAX_FILTERS}], got {k!r}")
    return FilterBank(tuple(mask / norm for mask, norm in _DEFAULT_MASKS[:k]))


def pad_reflect(plane: np.ndarray, pad: int) -> np.ndarray:
    """Mirror-pad a 2-D plane without repeating the edge sample.

    Along an axis shorter than the kernel (``2*pad + 1``) this falls back to
    edge replication.
    """
    if pad == 0:
        return plane
    out = plane
    for axis in (0, 1):
        widths = [(0, 0), (0, 0)]
        widths[axis] = (pad, pad)
        mode = "reflect" if out.shape[axis] >= 2 * pad + 1 else "edge"
        out = np.pad(out, widths, mode=mode)
    return out


def _correlate(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    if kernel.shape == (1, 1):
        return plane * kernel[0, 0]
    pad = kernel.shape[0] // 2
    padded = pad_reflect(plane, pad)
    out = ndimage.correlate(padded, kernel, mode="constant", cval=0.0)
    return out[pad:-pad, pad:-pad]


def apply(bank: FilterBank, f: FeatureMap) -> np.ndarray:
    """Filter responses with layout ``(K, C, H, W)``, float64.

    Each plane is the 2-D correlation (no kernel flip) of one channel with
    one kernel, same size as the input.
    """
    f = as_feature_map(f)
    x = f.data.astype(np.float64)
    planes = pmap(
        lambda k: np.stack([_correlate(x[c], k) for c in range(f.channels)]),
        bank.kernels,
        work_per_item=x.size,
    )
    return np.stack(planes)
