import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linear_sum_assignment

from edmatch import (
    FeatureMap,
    SwdConfig,
    adain,
    cmd,
    content_l2,
    edm,
    gram_loss,
    histogram_l2,
    match_channelwise,
    mean_std_loss,
    metric_report,
    sw1d,
    swd,
)
from edmatch.metrics import swd_directions

from conftest import fm, random_instance

PAIRWISE = [
    lambda a, b: content_l2(a, b),
    lambda a, b: gram_loss(a, b),
    lambda a, b: mean_std_loss(a, b),
    lambda a, b: histogram_l2(a, b),
    lambda a, b: cmd(a, b),
    lambda a, b: swd(a, b, SwdConfig(seed=3)),
]


def assignment_w2sq(x, y):
    """Oracle: optimal assignment cost with squared distance, per sample."""
    cost = (np.asarray(x, float)[:, None] - np.asarray(y, float)[None, :]) ** 2
    r, c = linear_sum_assignment(cost)
    return cost[r, c].sum() / len(x)


def permutation_w2sq(x, y):
    """Oracle: exhaustive search over all matchings."""
    x = np.asarray(x, float)
    return min(np.mean((x - np.asarray(p, float)) ** 2) for p in itertools.permutations(y))


class TestContent:
    def test_examples(self):
        assert content_l2(fm([[[0, 2]]]), fm([[[1, 1]]])) == 1.0
        assert content_l2(fm(np.zeros((2, 2, 2))), fm(np.ones((2, 2, 2)))) == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            content_l2(fm(np.zeros((1, 2, 2))), fm(np.zeros((1, 2, 3))))


class TestGram:
    def test_examples(self):
        assert gram_loss(fm([[[1, 3]]]), fm([[[0, 0]]])) == 25.0

    def test_normalized_by_channels(self):
        a = fm(np.ones((2, 1, 1)))
        b = fm(np.zeros((2, 1, 1)))
        assert gram_loss(a, b) == pytest.approx(4 / 4)

    def test_spatial_sizes_may_differ(self, rng):
        a = FeatureMap(rng.normal(size=(3, 4, 4)))
        assert gram_loss(a, FeatureMap(np.tile(a.data, (1, 2, 1)))) == pytest.approx(0, abs=1e-12)


class TestMeanStd:
    def test_constants(self):
        assert mean_std_loss(fm(np.zeros((1, 2, 2))), fm(np.full((1, 2, 2), 3.0))) == 9.0

    def test_after_adain(self):
        c, s = random_instance(0)
        assert mean_std_loss(adain(c, s), s) <= 1e-8


class TestHistogram:
    def test_two_bins(self):
        a = fm(np.zeros((1, 2, 2)))
        b = fm(np.ones((1, 2, 2)))
        assert histogram_l2(a, b, bins=2) == pytest.approx(np.sqrt(2))

    def test_degenerate_range(self):
        assert histogram_l2(fm(np.full((1, 3, 3), 4.0)), fm(np.full((1, 2, 2), 4.0))) == 0.0

    def test_ehs_output_zero(self):
        c, s = random_instance(1)
        assert histogram_l2(match_channelwise(c, s), s) == 0.0


class TestCmd:
    def test_two_point_vs_constant(self):
        a = fm([[[0.0, 1.0]]])
        b = fm([[[0.5, 0.5]]])
        # means equal; c2 = 1/4, c3 = 0, c4 = 1/16, c5 = 0
        assert cmd(a, b, order=5) == pytest.approx(0.25 + 0.0625)
        assert cmd(a, b, order=2) == pytest.approx(0.25)

    def test_order_one_is_mean_gap(self):
        a = fm([[[0.0, 4.0]], [[1.0, 1.0]]])
        b = fm([[[2.0, 2.0]], [[0.0, 2.0]]])
        # both channels rescaled jointly; means 0.5 vs 0.5, 0.5 vs 0.5
        assert cmd(a, b, order=1) == pytest.approx(0.0)
        a2 = fm([[[0.0, 0.0]]])
        b2 = fm([[[1.0, 1.0]]])
        assert cmd(a2, b2, order=1) == pytest.approx(1.0)

    def test_scale_invariant(self, rng):
        a = FeatureMap(rng.normal(size=(3, 5, 5)))
        b = FeatureMap(rng.gamma(2.0, size=(3, 5, 5)))
        a10 = FeatureMap(a.data * 10.0)
        b10 = FeatureMap(b.data * 10.0)
        assert cmd(a, b) == pytest.approx(cmd(a10, b10), rel=1e-5)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            cmd(fm([[[1.0]]]), fm([[[1.0]]]), order=0)


class TestSw1d:
    def test_examples(self):
        assert sw1d([1, 2], [2, 1]) == 0.0
        assert sw1d([0, 0], [1, 1]) == 1.0

    def test_empty(self):
        with pytest.raises(ValueError):
            sw1d([], [1.0])

    def test_unequal_lengths_resample(self):
        assert sw1d([0.0, 1.0, 2.0], [0.0, 2.0]) == 0.0

    @pytest.mark.parametrize("n", range(1, 6))
    def test_exhaustive_permutation_oracle(self, n):
        seqs = list(itertools.combinations_with_replacement(range(4), n))
        for x in seqs[::3]:
            for y in seqs:
                assert sw1d(x, y) == pytest.approx(permutation_w2sq(x, y), abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=8).flatmap(
        lambda x: st.tuples(st.just(x), st.lists(st.floats(-1e3, 1e3), min_size=len(x), max_size=len(x)))
    ))
    def test_assignment_oracle_real_values(self, pair):
        x, y = pair
        assert sw1d(x, y) == pytest.approx(assignment_w2sq(x, y), rel=1e-9, abs=1e-9)


class TestSwd:
    def test_directions_are_unit_and_seeded(self):
        d = swd_directions(5, 20, seed=4)
        np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0)
        assert np.array_equal(d, swd_directions(5, 20, seed=4))
        assert not np.array_equal(d, swd_directions(5, 20, seed=5))

    def test_default_direction_count(self):
        assert SwdConfig().count(8) == 32
        assert SwdConfig(directions=3).count(8) == 3

    def test_one_channel_reduces_to_sw1d(self, rng):
        a = FeatureMap(rng.normal(size=(1, 6, 6)))
        b = FeatureMap(rng.gamma(2.0, size=(1, 6, 6)))
        expect = sw1d(a.data.ravel(), b.data.ravel())
        assert swd(a, b, SwdConfig(seed=1)) == pytest.approx(expect, rel=1e-12)
        # negated direction gives the same value
        assert sw1d(-a.data.ravel(), -b.data.ravel()) == pytest.approx(expect, rel=1e-12)

    def test_constant_shift_closed_form(self, rng):
        b = FeatureMap(rng.normal(size=(4, 7, 7)))
        shift = np.array([1.0, -2.0, 0.5, 3.0])
        a = FeatureMap(b.data.astype(np.float64) + shift[:, None, None])
        cfg = SwdConfig(seed=11)
        dirs = swd_directions(4, cfg.count(4), cfg.seed)
        expect = np.mean((dirs @ shift) ** 2)
        assert swd(a, b, cfg) == pytest.approx(expect, rel=1e-5)

    def test_permutation_invariant(self, rng):
        a = FeatureMap(rng.normal(size=(3, 5, 5)))
        perm = rng.permutation(25)
        b = FeatureMap(a.matrix()[:, perm].reshape(3, 5, 5))
        assert swd(a, b, SwdConfig(seed=2)) == 0.0
        assert histogram_l2(a, b) == 0.0
        assert sw1d(a.data[0], b.data[0]) == 0.0

    def test_edm_reduces_swd(self):
        better = 0
        for seed in range(10):
            c, s = random_instance(seed)
            cfg = SwdConfig(seed=seed)
            better += swd(edm(c, s), s, cfg) < swd(c, s, cfg)
        assert better >= 9


class TestGeneral:
    @pytest.mark.parametrize("metric", PAIRWISE)
    def test_zero_on_identical(self, metric, rng):
        a = FeatureMap(rng.normal(size=(3, 6, 6)))
        assert metric(a, a) == 0.0

    @pytest.mark.parametrize("metric", PAIRWISE)
    def test_symmetric(self, metric):
        a, b = random_instance(4)
        assert metric(a, b) == pytest.approx(metric(b, a), rel=1e-6, abs=1e-12)

    @pytest.mark.parametrize("metric", PAIRWISE)
    def test_non_negative(self, metric):
        a, b = random_instance(5)
        assert metric(a, b) >= 0

    @pytest.mark.parametrize("metric", PAIRWISE[1:])
    def test_channel_mismatch(self, metric):
        with pytest.raises(ValueError):
            metric(fm(np.zeros((2, 2, 2))), fm(np.zeros((3, 2, 2))))

    def test_report(self):
        a, b = random_instance(6)
        r = metric_report(a, a)
        assert all(v == 0.0 for v in r.as_dict().values())
        r = metric_report(a, b, swd_cfg=SwdConfig(seed=1))
        assert r.swd == swd(a, b, SwdConfig(seed=1))

    def test_report_content_nan_for_unequal_sizes(self, rng):
        r = metric_report(FeatureMap(rng.normal(size=(2, 3, 3))), FeatureMap(rng.normal(size=(2, 4, 4))))
        assert np.isnan(r.content)
        assert r.gram >= 0
