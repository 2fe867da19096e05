"""Exact distribution matching between multi-channel feature maps."""

from .core import FeatureMap, ChannelStats, channel_stats, covariance, flatten_channel
from .filters import FilterBank, default_bank, apply
from .ehs import SortResult, lsort, match_channelwise, collision_ratio, mean_collision_ratio
from .gaussian import TransformKernels, adain, sym_eig, whiten, color, wct
from .edm import EdmConfig, edm, edm_steps, strength, interpolate
from .metrics import (
    MetricReport,
    SwdConfig,
    content_l2,
    gram_loss,
    mean_std_loss,
    histogram_l2,
    cmd,
    sw1d,
    swd,
    metric_report,
)

__version__ = "0.1.0"
