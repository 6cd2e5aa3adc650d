"""Visual Information Fidelity and the visual change measure built on it

The fidelity measure is the pixel-domain multi-scale approximation:
the human visual system is modelled as additive Gaussian noise with
variance ``sigma_noise_sq``, and local image statistics are gathered
under Gaussian windows on a four-level pyramid.
"""

import logging

import numpy as np

from pyvcr.image import Image, filter_array, gaussian_kernel
from pyvcr.constants import VIF_SCALES, VIF_NOISE_VAR, VIF_EPS


logger = logging.getLogger(__name__)


class VifConfig(object):
    """Parameters of the human visual system model used by ``vif()``

    Args:
        num_scales (int): Number of pyramid levels, at least 1.
        sigma_noise_sq (float): Variance of the visual noise, positive.
        eps (float): Stabilizer for variance ratios, positive.
    """

    def __init__(
        self, num_scales=VIF_SCALES, sigma_noise_sq=VIF_NOISE_VAR, eps=VIF_EPS
    ):
        if int(num_scales) != num_scales or num_scales < 1:
            raise ValueError("num_scales must be a positive integer")
        if not sigma_noise_sq > 0:
            raise ValueError("sigma_noise_sq must be positive")
        if not eps > 0:
            raise ValueError("eps must be positive")
        self.num_scales = int(num_scales)
        self.sigma_noise_sq = float(sigma_noise_sq)
        self.eps = float(eps)

    def window_length(self, scale):
        """Length of the Gaussian window at a given scale, 1-based.

        With four scales this gives 17, 9, 5 and 3.
        """
        return 2 ** (self.num_scales - scale + 1) + 1

    def min_image_size(self):
        """Smallest image side for which every pyramid level fits its window"""
        side = 1
        while not self._fits(side):
            side += 1
        return side

    def _fits(self, side):
        for scale in range(1, self.num_scales + 1):
            if scale > 1:
                side = (side + 1) // 2
            if side < self.window_length(scale):
                return False
        return True

    def to_dict(self):
        """Dictionary representation, used in manifests"""
        return {
            "num_scales": self.num_scales,
            "sigma_noise_sq": self.sigma_noise_sq,
            "eps": self.eps,
        }

    @classmethod
    def from_dict(cls, dct):
        """Inverse of ``to_dict()``"""
        return cls(
            num_scales=dct.get("num_scales", VIF_SCALES),
            sigma_noise_sq=dct.get("sigma_noise_sq", VIF_NOISE_VAR),
            eps=dct.get("eps", VIF_EPS),
        )

    def __eq__(self, other):
        if not isinstance(other, VifConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "VifConfig(num_scales={}, sigma_noise_sq={}, eps={})".format(
            self.num_scales, self.sigma_noise_sq, self.eps
        )


def _check_pair(reference, distorted, cfg):
    for img in (reference, distorted):
        if not isinstance(img, Image):
            raise TypeError("vif() takes Image objects, got {}".format(type(img)))
        if img.channels != 1:
            raise ValueError(
                "vif() needs one-channel images, convert with to_luminance()"
            )
    if reference.pixels.shape != distorted.pixels.shape:
        raise ValueError(
            "Dimension mismatch, {}x{} vs {}x{}".format(
                reference.width, reference.height, distorted.width, distorted.height
            )
        )
    min_side = cfg.min_image_size()
    if min(reference.width, reference.height) < min_side:
        raise ValueError(
            "Image {}x{} too small for a {}-scale pyramid, "
            "need {} pixels per side".format(
                reference.width, reference.height, cfg.num_scales, min_side
            )
        )


def vif_arrays(ref, dist, cfg):
    """VIF between two float arrays of equal shape, no validation.

    Between scales the images are smoothed with the next window
    (same-size, reflected borders) and decimated by two. Local
    statistics are taken only where the window fits the image.
    """
    if np.array_equal(ref, dist):
        return 1.0
    eps = cfg.eps
    sigma_nsq = cfg.sigma_noise_sq
    num = 0.0
    den = 0.0
    for scale in range(1, cfg.num_scales + 1):
        win_len = cfg.window_length(scale)
        taps = gaussian_kernel(win_len / 5.0, win_len)
        if scale > 1:
            ref = filter_array(ref, taps, mode="reflect")[::2, ::2]
            dist = filter_array(dist, taps, mode="reflect")[::2, ::2]

        mu1 = filter_array(ref, taps, mode="valid")
        mu2 = filter_array(dist, taps, mode="valid")
        sigma1_sq = filter_array(ref * ref, taps, mode="valid") - mu1 * mu1
        sigma2_sq = filter_array(dist * dist, taps, mode="valid") - mu2 * mu2
        sigma12 = filter_array(ref * dist, taps, mode="valid") - mu1 * mu2

        # Cancellation can make tiny variances negative
        sigma1_sq = np.maximum(sigma1_sq, 0.0)
        sigma2_sq = np.maximum(sigma2_sq, 0.0)

        gain = sigma12 / (sigma1_sq + eps)
        sv_sq = sigma2_sq - gain * sigma12

        flat_ref = sigma1_sq < eps
        gain[flat_ref] = 0.0
        sv_sq[flat_ref] = sigma2_sq[flat_ref]
        sigma1_sq[flat_ref] = 0.0

        flat_dist = sigma2_sq < eps
        gain[flat_dist] = 0.0
        sv_sq[flat_dist] = 0.0

        negative = gain < 0
        sv_sq[negative] = sigma2_sq[negative]
        gain[negative] = 0.0
        sv_sq = np.maximum(sv_sq, eps)

        num += np.sum(np.log10(1.0 + gain * gain * sigma1_sq / (sv_sq + sigma_nsq)))
        den += np.sum(np.log10(1.0 + sigma1_sq / sigma_nsq))
        logger.debug("VIF scale %d, window %d, shape %s", scale, win_len, mu1.shape)

    if den <= 0:
        # Constant reference, nothing to lose
        return 1.0
    return float(num / den)


def vif(reference, distorted, cfg=None):
    """Visual Information Fidelity of a distorted image

    Args:
        reference (Image): Original image, one channel.
        distorted (Image): Changed image, one channel, same dimensions.
        cfg (VifConfig): Model parameters, defaults if None.

    Returns:
        float, 1.0 for identical images, below 1 for degradations
        and possibly above 1 for contrast enhancements.
    """
    if cfg is None:
        cfg = VifConfig()
    _check_pair(reference, distorted, cfg)
    return vif_arrays(reference.as_float(), distorted.as_float(), cfg)


def visual_change(vif_value):
    """Map a VIF value to visual change, max(0, 1 - VIF) clamped to [0, 1]"""
    return float(min(1.0, max(0.0, 1.0 - vif_value)))


def delta_v(reference, distorted, cfg=None):
    """Visual change between an original and a corrupted image

    0 means no perceived degradation (including enhancements),
    1 means all visual information is destroyed.

    Args:
        reference (Image): One-channel original
        distorted (Image): One-channel corrupted version
        cfg (VifConfig): Model parameters, defaults if None.

    Returns:
        float in [0, 1]
    """
    return visual_change(vif(reference, distorted, cfg))
