import warnings

import numpy as np
import pytest

from edmatch import FeatureMap


def fm(values, shape=None):
    arr = np.asarray(values, dtype=np.float32)
    if shape is not None:
        arr = arr.reshape(shape)
    return FeatureMap(arr)


def natural_maps(count, channels=3, size=32, seed=0):
    """Crops of the scikit-image sample photos, 8-bit valued (many ties).

    Each channel is a crop of one colour plane of one photo, so channels are
    natural-image statistics but not necessarily from the same location.
    """
    from skimage import data

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sources = [
            data.astronaut(), data.coffee(), data.chelsea(), data.rocket(),
            data.immunohistochemistry(), data.camera(), data.moon(), data.coins(),
            data.brick(), data.grass(), data.gravel(), data.clock(),
        ]
    planes = []
    for img in sources:
        planes.extend([img[..., i] for i in range(3)] if img.ndim == 3 else [img])
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        chans = []
        for _ in range(channels):
            p = planes[int(rng.integers(len(planes)))]
            y = int(rng.integers(0, p.shape[0] - size + 1))
            x = int(rng.integers(0, p.shape[1] - size + 1))
            chans.append(p[y : y + size, x : x + size])
        out.append(FeatureMap(np.stack(chans).astype(np.float32)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_spd(rng, c):
    a = rng.normal(size=(c, c))
    return a @ a.T / c + 0.1 * np.eye(c)


def random_instance(seed, c=8, h=16, w=16):
    """Full-rank (content, style) pair; style is correlated and non-Gaussian.

    The style marginals rotate through skewed, rectified and bimodal shapes
    so that matching the first two moments is not enough.
    """
    rng = np.random.default_rng(seed)
    n = h * w
    a = np.linalg.cholesky(random_spd(rng, c))
    b = np.linalg.cholesky(random_spd(rng, c))
    content = a @ rng.normal(size=(c, n)) + rng.normal(size=(c, 1))
    kind = seed % 3
    if kind == 0:
        z = rng.gamma(rng.uniform(0.5, 3.0, size=(c, 1)), size=(c, n))
    elif kind == 1:
        z = np.maximum(rng.normal(size=(c, n)), 0) + 0.1 * rng.normal(size=(c, n))
    else:
        z = np.where(rng.random((c, n)) < 0.3, rng.normal(3, 0.5, (c, n)), rng.normal(-1, 0.7, (c, n)))
    style = b @ z + rng.normal(size=(c, 1))
    return FeatureMap(content.reshape(c, h, w)), FeatureMap(style.reshape(c, h, w))
