"""Exact distribution matching: channel-wise EHS followed by covariance matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .core import FeatureMap, as_feature_map
from .ehs import match_channelwise
from .filters import MAX_FILTERS, default_bank
from .gaussian import EIG_EPSILON, color, whiten

__all__ = ["EdmConfig", "edm", "edm_steps", "strength", "interpolate"]


@dataclass(frozen=True)
class EdmConfig:
    """Settings for :func:`edm`.

    ``alpha`` is clamped into ``[0, 1]``; ``filter_count`` must select a
    prefix of the default bank.
    """

    filter_count: int = MAX_FILTERS
    alpha: float = 1.0
    eig_epsilon: float = EIG_EPSILON
    correlate: bool = True

    def __post_init__(self):
        if not isinstance(self.filter_count, (int, np.integer)) or not (
            1 <= self.filter_count <= MAX_FILTERS
        ):
            raise ValueError(
                f"filter_count must be an integer in [1, {MAX_FILTERS}], got {self.filter_count!r}"
            )
        alpha = float(self.alpha)
        if not np.isfinite(alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        object.__setattr__(self, "alpha", min(1.0, max(0.0, alpha)))
        if not self.eig_epsilon >= 0:
            raise ValueError(f"eig_epsilon must be >= 0, got {self.eig_epsilon!r}")


def edm_steps(
    content: FeatureMap, style: FeatureMap, cfg: EdmConfig | None = None
) -> tuple[FeatureMap, FeatureMap]:
    """Return ``(histogram_matched, correlated)`` without the strength blend.

    The first element has each channel's values drawn exactly from the style
    channel; the second additionally carries the style covariance and mean.
    """
    cfg = cfg or EdmConfig()
    content = as_feature_map(content)
    style = as_feature_map(style)
    matched = match_channelwise(content, style, default_bank(cfg.filter_count))
    white, _ = whiten(matched, cfg.eig_epsilon)
    return matched, color(white, style, cfg.eig_epsilon)


def edm(content: FeatureMap, style: FeatureMap, cfg: EdmConfig | None = None) -> FeatureMap:
    """Match the full feature distribution of ``content`` to ``style``.

    Output keeps the content's shape.  With ``cfg.correlate`` off only the
    channel-wise step runs.  ``cfg.alpha < 1`` blends the result back toward
    the content.
    """
    cfg = cfg or EdmConfig()
    content = as_feature_map(content)
    style = as_feature_map(style)
    if content.channels != style.channels:
        raise ValueError(
            f"channel count mismatch: content has {content.channels}, style has {style.channels}"
        )
    if cfg.correlate:
        _, out = edm_steps(content, style, cfg)
    else:
        out = match_channelwise(content, style, default_bank(cfg.filter_count))
    if cfg.alpha == 1.0:
        return out
    return strength(content, out, cfg.alpha)


def strength(content: FeatureMap, stylized: FeatureMap, alpha: float) -> FeatureMap:
    """``alpha * stylized + (1 - alpha) * content``, element-wise."""
    content = as_feature_map(content)
    stylized = as_feature_map(stylized)
    if content.shape != stylized.shape:
        raise ValueError(f"shape mismatch: content {content.shape} vs stylized {stylized.shape}")
    alpha = float(alpha)
    if alpha == 0.0:
        return content
    if alpha == 1.0:
        return stylized
    c = content.data.astype(np.float64)
    s = stylized.data.astype(np.float64)
    return FeatureMap(alpha * s + (1.0 - alpha) * c)


def interpolate(
    content: FeatureMap, styles, weights, cfg: EdmConfig | None = None
) -> FeatureMap:
    """Weighted sum of per-style :func:`edm` outputs.

    ``weights`` must be non-negative and sum to 1 (within 1e-6).  Styles
    with zero weight are skipped.
    """
    cfg = cfg or EdmConfig()
    content = as_feature_map(content)
    styles = [as_feature_map(s) for s in styles]
    weights = [float(w) for w in weights]
    if not styles:
        raise ValueError("at least one style is required")
    if len(weights) != len(styles):
        raise ValueError(f"{len(styles)} styles but {len(weights)} weights")
    if any(w < 0 or not np.isfinite(w) for w in weights):
        raise ValueError(f"weights must be finite and non-negative, got {weights}")
    if abs(sum(weights) - 1.0) > 1e-6:
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")

    active = [(s, w) for s, w in zip(styles, weights) if w > 0]
    outs = pmap(lambda sw: edm(content, sw[0], cfg), active, work_per_item=content.data.size)
    if len(active) == 1 and active[0][1] == 1.0:
        return outs[0]
    acc = np.zeros(content.shape, dtype=np.float64)
    for out, (_, w) in zip(outs, active):
        acc += w * out.data.astype(np.float64)
    return FeatureMap(acc)
