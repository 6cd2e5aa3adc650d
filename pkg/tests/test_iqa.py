"""Test module for VIF and the visual change measure"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from pyvcr.corruptions import apply_corruption, registry, sample_params
from pyvcr.image import Image, to_luminance, to_storage
from pyvcr.iqa import VifConfig, delta_v, visual_change, vif
from pyvcr.utils.testing import texture


def reference_vif(ref, dist, sigma_nsq=2.0, eps=1e-10):
    """Straight-line pixel domain VIF sharing no code with pyvcr.iqa

    Windowed sums use explicit 2D kernels on sliding windows, the
    smoothing before decimation pads symmetrically.
    """
    numerator = 0.0
    denominator = 0.0
    for scale in range(1, 5):
        size = 2 ** (4 - scale + 1) + 1
        sigma = size / 5.0
        offsets = np.arange(size) - size // 2
        taps = np.array([math.exp(-(o * o) / (2 * sigma * sigma)) for o in offsets])
        window = np.outer(taps, taps)
        window = window / window.sum()

        if scale > 1:
            half = size // 2
            padded_ref = np.pad(ref, half, mode="symmetric")
            padded_dist = np.pad(dist, half, mode="symmetric")
            ref = np.einsum(
                "ijkl,kl->ij", sliding_window_view(padded_ref, (size, size)), window
            )[::2, ::2]
            dist = np.einsum(
                "ijkl,kl->ij", sliding_window_view(padded_dist, (size, size)), window
            )[::2, ::2]

        ref_windows = sliding_window_view(ref, (size, size))
        dist_windows = sliding_window_view(dist, (size, size))
        mu1 = np.einsum("ijkl,kl->ij", ref_windows, window)
        mu2 = np.einsum("ijkl,kl->ij", dist_windows, window)
        sigma1_sq = np.einsum("ijkl,kl->ij", ref_windows ** 2, window) - mu1 ** 2
        sigma2_sq = np.einsum("ijkl,kl->ij", dist_windows ** 2, window) - mu2 ** 2
        cross = np.einsum("ijkl,kl->ij", ref_windows * dist_windows, window)
        sigma12 = cross - mu1 * mu2

        stats = zip(sigma1_sq.ravel(), sigma2_sq.ravel(), sigma12.ravel())
        for s1, s2, s12 in stats:
            s1 = max(s1, 0.0)
            s2 = max(s2, 0.0)
            g = s12 / (s1 + eps)
            sv = s2 - g * s12
            if s1 < eps:
                g = 0.0
                sv = s2
                s1 = 0.0
            if s2 < eps:
                g = 0.0
                sv = 0.0
            if g < 0:
                sv = s2
                g = 0.0
            sv = max(sv, eps)
            numerator += math.log10(1 + g * g * s1 / (sv + sigma_nsq))
            denominator += math.log10(1 + s1 / sigma_nsq)
    return numerator / denominator


def frozen_pairs(num=50, size=32):
    """Random reference images with noisy, scaled or unrelated partners"""
    rng = np.random.default_rng(2024)
    pairs = []
    for idx in range(num):
        ref = rng.uniform(0, 255, (size, size))
        kind = idx % 3
        if kind == 0:
            dist = ref + rng.normal(0, rng.uniform(1, 60), (size, size))
        elif kind == 1:
            dist = 0.5 * ref + 60
        else:
            dist = rng.uniform(0, 255, (size, size))
        pairs.append((ref, dist))
    return pairs


def test_vif_reference_oracle():
    """vif() equals an independent implementation on frozen random pairs"""
    for ref, dist in frozen_pairs():
        expected = reference_vif(ref, dist)
        assert vif(Image(ref), Image(dist)) == pytest.approx(expected, abs=1e-6)


def test_vif_identical():
    """Identical images have VIF 1 and no visual change"""
    img = to_luminance(Image(to_storage(texture(48, 1))))
    assert vif(img, img) == 1.0
    assert delta_v(img, img) == 0.0
    copy = Image(img.as_float())
    assert abs(vif(img, copy) - 1.0) < 1e-9


def test_vif_constant_reference():
    """A flat reference has no information to lose"""
    flat = Image(np.full((32, 32), 100.0))
    other = Image(np.random.default_rng(0).uniform(0, 255, (32, 32)))
    assert vif(flat, other) == 1.0
    assert delta_v(flat, other) == 0.0


def test_vif_noise_monotone():
    """More noise means less fidelity, averaged over draws"""
    img = to_luminance(Image(to_storage(texture(64, 5))))
    rng = np.random.default_rng(7)
    mean_vif = {}
    for sigma in [5, 50]:
        mean_vif[sigma] = np.mean(
            [
                vif(img, Image(img.pixels + rng.normal(0, sigma, img.pixels.shape)))
                for _ in range(20)
            ]
        )
    assert mean_vif[50] < mean_vif[5] < 1.0


def test_delta_v_range_corruptions():
    """Δv stays in [0, 1] over sampled applications of every corruption"""
    specs = registry()
    originals = [Image(to_storage(texture(32, seed))) for seed in range(4)]
    references = [to_luminance(img) for img in originals]
    values = []
    for idx in range(1000):
        spec = specs[idx % len(specs)]
        params = sample_params(spec, idx)
        corrupted = apply_corruption(
            spec, params, originals[idx % 4], rng_seed=idx + 5000
        )
        values.append(delta_v(references[idx % 4], to_luminance(corrupted)))
    values = np.array(values)
    assert ((values >= 0) & (values <= 1)).all()
    assert values.max() > 0.5


@settings(deadline=None, max_examples=20)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 200))
def test_delta_v_range(seed, noise):
    """Visual change is always within [0, 1]"""
    rng = np.random.default_rng(seed)
    ref = rng.uniform(0, 255, (24, 24))
    dist = ref + rng.normal(0, noise, ref.shape)
    value = delta_v(Image(ref), Image(dist))
    assert 0.0 <= value <= 1.0


def test_delta_v_shift_invariant():
    """Shifting both images by a constant leaves the visual change unchanged"""
    rng = np.random.default_rng(11)
    for _ in range(10):
        ref = rng.uniform(0, 200, (32, 32))
        dist = ref + rng.normal(0, 20, ref.shape)
        assert delta_v(Image(ref + 10), Image(dist + 10)) == pytest.approx(
            delta_v(Image(ref), Image(dist)), abs=1e-9
        )


@pytest.mark.parametrize(
    "vif_value, expected", [(1.0, 0.0), (1.3, 0.0), (0.3, 0.7), (0.0, 1.0), (-0.2, 1.0)]
)
def test_visual_change(vif_value, expected):
    """Clamped 1 - VIF"""
    assert visual_change(vif_value) == pytest.approx(expected, abs=1e-12)


def test_vif_errors():
    """Mismatched, too small, colour and non-image inputs"""
    small = Image(np.zeros((16, 40)))
    with pytest.raises(ValueError, match="too small"):
        vif(small, small)
    with pytest.raises(ValueError, match="mismatch"):
        vif(Image(np.zeros((32, 32))), Image(np.zeros((32, 33))))
    rgb = Image(np.zeros((32, 32, 3)))
    with pytest.raises(ValueError, match="to_luminance"):
        vif(rgb, rgb)
    with pytest.raises(TypeError):
        vif(np.zeros((32, 32)), np.zeros((32, 32)))
    # Fewer scales accept smaller images
    tiny = Image(np.random.default_rng(0).uniform(0, 255, (9, 9)))
    assert vif(tiny, tiny, VifConfig(num_scales=2)) == 1.0


def test_vif_config():
    """Window lengths, minimum sizes and validation"""
    cfg = VifConfig()
    assert [cfg.window_length(scale) for scale in range(1, 5)] == [17, 9, 5, 3]
    assert cfg.min_image_size() == 17
    assert VifConfig(num_scales=1).min_image_size() == 3
    assert VifConfig(num_scales=2).min_image_size() == 5
    assert VifConfig.from_dict(cfg.to_dict()) == cfg
    for kwargs in [{"num_scales": 0}, {"sigma_noise_sq": 0}, {"eps": -1}]:
        with pytest.raises(ValueError):
            VifConfig(**kwargs)
