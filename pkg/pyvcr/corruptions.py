"""Parameterized image corruption functions and their parameter domains

Every corruption is a function of an image and a parameter vector drawn
from a product of closed real intervals. Internally images are handled
as floats in [0, 1]; the result is converted back to 8-bit storage.
"""

import copy
import json
import logging
import math
from pathlib import Path

import numpy as np
from matplotlib.colors import hsv_to_rgb, rgb_to_hsv
from scipy import ndimage

from pyvcr.image import Image, LUMINANCE_WEIGHTS, filter_array, gaussian_kernel
from pyvcr.image import to_storage
from pyvcr.utils.seeding import make_rng


logger = logging.getLogger(__name__)

FAMILIES = ["noise", "blur", "photometric"]

GLASS_ITERATIONS = 2


class CorruptionSpec(object):
    """A named corruption function with its parameter domain

    Args:
        name (str): Unique identifier in the registry
        param_domains (list): One (lo, hi) pair per parameter component
        family (str): One of "noise", "blur" or "photometric"
        function (callable): f(pixels, values, rng) -> pixels, working on
            float arrays in [0, 1] of shape (h, w, 3). rng is None for
            deterministic corruptions.
        param_names (list of str): Names for the components, used in
            messages and manifests.
        identity (tuple): Parameter vector that reproduces the input,
            or None if the domain has no such point.
        stochastic (bool): Whether the function consumes random numbers.
    """

    def __init__(
        self,
        name,
        param_domains,
        family,
        function=None,
        param_names=None,
        identity=None,
        stochastic=False,
    ):
        if family not in FAMILIES:
            raise ValueError("Unknown corruption family {}".format(family))
        domains = [(float(lo), float(hi)) for (lo, hi) in param_domains]
        if not domains:
            raise ValueError("Corruption {} needs at least one parameter".format(name))
        for (lo, hi) in domains:
            if not lo <= hi:
                raise ValueError(
                    "Invalid domain [{}, {}] for corruption {}".format(lo, hi, name)
                )
        if param_names is None:
            param_names = ["c{}".format(idx) for idx in range(len(domains))]
        if len(param_names) != len(domains):
            raise ValueError("One parameter name is needed per domain")
        self.name = name
        self.param_domains = domains
        self.family = family
        self.function = function
        self.param_names = list(param_names)
        self.identity = tuple(identity) if identity is not None else None
        self.stochastic = stochastic

    @property
    def num_params(self):
        """Number of parameter components"""
        return len(self.param_domains)

    def with_domains(self, param_domains):
        """Return a copy with other parameter domains"""
        if len(param_domains) != self.num_params:
            raise ValueError(
                "Corruption {} has {} parameters, got {} domains".format(
                    self.name, self.num_params, len(param_domains)
                )
            )
        new_spec = copy.copy(self)
        new_spec.param_domains = [(float(lo), float(hi)) for (lo, hi) in param_domains]
        for (lo, hi) in new_spec.param_domains:
            if not lo <= hi:
                raise ValueError(
                    "Invalid domain [{}, {}] for corruption {}".format(
                        lo, hi, self.name
                    )
                )
        return new_spec

    def __repr__(self):
        return "CorruptionSpec({}, {}, {})".format(
            self.name, self.family, self.param_domains
        )


class ParamVector(object):
    """Parameter values for one application of a corruption

    Args:
        values (iterable of float): One value per parameter component
    """

    def __init__(self, values):
        self.values = tuple(float(value) for value in values)

    def check(self, spec):
        """Raise ValueError unless every value is inside its interval"""
        if len(self.values) != spec.num_params:
            raise ValueError(
                "Corruption {} takes {} parameters, got {}".format(
                    spec.name, spec.num_params, len(self.values)
                )
            )
        for value, (lo, hi), name in zip(
            self.values, spec.param_domains, spec.param_names
        ):
            if not lo <= value <= hi:
                raise ValueError(
                    "Invalid parameter {}={} for {}, domain is [{}, {}]".format(
                        name, value, spec.name, lo, hi
                    )
                )

    def to_list(self):
        """Values as a list, for JSON"""
        return list(self.values)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, idx):
        return self.values[idx]

    def __eq__(self, other):
        if isinstance(other, ParamVector):
            return self.values == other.values
        return NotImplemented

    def __repr__(self):
        return "ParamVector({})".format(list(self.values))


def odd_kernel_size(value):
    """Round a real kernel size to the nearest odd integer, at least 1"""
    return max(1, int(2 * math.floor((value - 1) / 2.0 + 0.5) + 1))


def _luminance(pixels):
    return np.dot(pixels, np.array(LUMINANCE_WEIGHTS))


def _blur(pixels, sigma):
    if sigma <= 0:
        return pixels
    kernel_len = 2 * int(math.ceil(3 * sigma)) + 1
    return filter_array(pixels, gaussian_kernel(sigma, kernel_len), mode="reflect")


def _correlate_channels(pixels, kernel):
    return ndimage.correlate(pixels, kernel[:, :, np.newaxis], mode="reflect")


def gaussian_noise(pixels, values, rng):
    """Additive Gaussian noise with standard deviation sigma"""
    (sigma,) = values
    if sigma == 0:
        return pixels
    return pixels + rng.normal(0.0, sigma, pixels.shape)


def shot_noise(pixels, values, rng):
    """Poisson photon noise, fewer photons means more noise"""
    (photons,) = values
    return rng.poisson(pixels * photons) / photons


def impulse_noise(pixels, values, rng):
    """Salt and pepper noise on a fraction of the pixels.

    A hit pixel is set to white or black in all channels."""
    (amount,) = values
    hit = rng.random(pixels.shape[:2]) < amount
    salt = rng.random(pixels.shape[:2]) < 0.5
    out = pixels.copy()
    out[hit & salt] = 1.0
    out[hit & ~salt] = 0.0
    return out


def uniform_noise(pixels, values, rng):
    """Additive noise uniform on [-width, width]"""
    (width,) = values
    if width == 0:
        return pixels
    return pixels + rng.uniform(-width, width, pixels.shape)


def gaussian_blur(pixels, values, rng=None):
    """Gaussian blur with standard deviation sigma in pixels"""
    (sigma,) = values
    return _blur(pixels, sigma)


def box_blur(pixels, values, rng=None):
    """Mean filter over a square odd-sized window"""
    size = odd_kernel_size(values[0])
    if size == 1:
        return pixels
    return ndimage.uniform_filter(pixels, size=(size, size, 1), mode="reflect")


def median_blur(pixels, values, rng=None):
    """Median filter over a square odd-sized window"""
    size = odd_kernel_size(values[0])
    if size == 1:
        return pixels
    return ndimage.median_filter(pixels, size=(size, size, 1), mode="reflect")


def disc_kernel(radius):
    """Normalized disc with a one pixel linear edge blend"""
    extent = int(math.ceil(radius))
    offsets = np.arange(-extent, extent + 1, dtype=np.float64)
    dist = np.hypot(offsets[:, np.newaxis], offsets[np.newaxis, :])
    kernel = np.clip(radius + 0.5 - dist, 0.0, 1.0)
    return kernel / kernel.sum()


def defocus_blur(pixels, values, rng=None):
    """Convolution with a disc of the given radius"""
    (radius,) = values
    if radius <= 0:
        return pixels
    return _correlate_channels(pixels, disc_kernel(radius))


def glass_blur(pixels, values, rng):
    """Frosted glass: blur, random local pixel displacements, blur.

    Displacements are rounded normal draws with standard deviation sigma,
    repeated GLASS_ITERATIONS times.
    """
    (sigma,) = values
    if sigma <= 0:
        return pixels
    height, width = pixels.shape[:2]
    out = _blur(pixels, 0.5 * sigma)
    rows = np.arange(height)[:, np.newaxis]
    cols = np.arange(width)[np.newaxis, :]
    for _ in range(GLASS_ITERATIONS):
        d_row = np.rint(rng.normal(0.0, sigma, (height, width))).astype(int)
        d_col = np.rint(rng.normal(0.0, sigma, (height, width))).astype(int)
        out = out[
            np.clip(rows + d_row, 0, height - 1), np.clip(cols + d_col, 0, width - 1)
        ]
    return _blur(out, 0.5 * sigma)


def motion_kernel(length, angle):
    """Line kernel of odd size, angle in degrees counter-clockwise"""
    size = odd_kernel_size(length)
    kernel = np.zeros((size, size))
    centre = size // 2
    theta = math.radians(angle)
    steps = np.linspace(-centre, centre, 4 * size + 1)
    cols = np.rint(centre + steps * math.cos(theta)).astype(int)
    rows = np.rint(centre - steps * math.sin(theta)).astype(int)
    np.add.at(kernel, (rows, cols), 1.0)
    return kernel / kernel.sum()


def motion_blur(pixels, values, rng=None):
    """Linear motion blur of a given length and direction"""
    length, angle = values
    if odd_kernel_size(length) == 1:
        return pixels
    return _correlate_channels(pixels, motion_kernel(length, angle))


def brightness(pixels, values, rng=None):
    """Additive shift of the HSV value channel"""
    (shift,) = values
    hsv = rgb_to_hsv(np.clip(pixels, 0.0, 1.0))
    hsv[..., 2] = np.clip(hsv[..., 2] + shift, 0.0, 1.0)
    return hsv_to_rgb(hsv)


def hue_saturation_value(pixels, values, rng=None):
    """Hue rotation in degrees, saturation and value shifts on a 0-255 scale"""
    hue, saturation, value = values
    hsv = rgb_to_hsv(np.clip(pixels, 0.0, 1.0))
    hsv[..., 0] = np.mod(hsv[..., 0] + hue / 360.0, 1.0)
    hsv[..., 1] = np.clip(hsv[..., 1] + saturation / 255.0, 0.0, 1.0)
    hsv[..., 2] = np.clip(hsv[..., 2] + value / 255.0, 0.0, 1.0)
    return hsv_to_rgb(hsv)


def color_jitter(pixels, values, rng=None):
    """Brightness, contrast and saturation factors, applied in that order"""
    bright, contrast, saturation = values
    out = np.clip(pixels * bright, 0.0, 1.0)
    grey_mean = _luminance(out).mean()
    out = np.clip((out - grey_mean) * contrast + grey_mean, 0.0, 1.0)
    grey = _luminance(out)[..., np.newaxis]
    return np.clip((out - grey) * saturation + grey, 0.0, 1.0)


# name, family, parameter names, default domains, identity, function, stochastic
# The domains are calibrated so that Δv reaches close to 1 on natural images.
_CATALOGUE = [
    ("gaussian_noise", "noise", ["sigma"], [(0, 0.5)], (0,), gaussian_noise, True),
    ("shot_noise", "noise", ["photons"], [(1, 500)], None, shot_noise, True),
    ("impulse_noise", "noise", ["amount"], [(0, 0.5)], (0,), impulse_noise, True),
    ("uniform_noise", "noise", ["width"], [(0, 0.7)], (0,), uniform_noise, True),
    ("gaussian_blur", "blur", ["sigma"], [(0, 12)], (0,), gaussian_blur, False),
    ("box_blur", "blur", ["kernel"], [(1, 31)], (1,), box_blur, False),
    ("median_blur", "blur", ["kernel"], [(1, 31)], (1,), median_blur, False),
    ("defocus_blur", "blur", ["radius"], [(0, 12)], (0,), defocus_blur, False),
    ("glass_blur", "blur", ["sigma"], [(0, 4)], (0,), glass_blur, True),
    (
        "motion_blur",
        "blur",
        ["length", "angle"],
        [(0, 31), (0, 180)],
        (0, 0),
        motion_blur,
        False,
    ),
    ("brightness", "photometric", ["shift"], [(-0.7, 0.7)], (0,), brightness, False),
    (
        "hue_saturation_value",
        "photometric",
        ["hue", "saturation", "value"],
        [(-90, 90), (-80, 80), (-80, 80)],
        (0, 0, 0),
        hue_saturation_value,
        False,
    ),
    (
        "color_jitter",
        "photometric",
        ["brightness", "contrast", "saturation"],
        [(0.2, 1.8), (0.2, 1.8), (0.2, 1.8)],
        (1, 1, 1),
        color_jitter,
        False,
    ),
]


def registry():
    """The built-in corruptions with their default parameter domains

    Returns:
        list of CorruptionSpec, fresh objects on every call.
    """
    return [
        CorruptionSpec(
            name,
            domains,
            family,
            function=function,
            param_names=names,
            identity=identity,
            stochastic=stochastic,
        )
        for (name, family, names, domains, identity, function, stochastic) in _CATALOGUE
    ]


def get_spec(name, specs=None):
    """Look up a corruption by name

    Args:
        name (str): Corruption name
        specs (list of CorruptionSpec): Where to look, the built-in
            registry if None.
    """
    if specs is None:
        specs = registry()
    for spec in specs:
        if spec.name == name:
            return spec
    raise ValueError(
        "Unknown corruption {}, choose from {}".format(
            name, ", ".join(spec.name for spec in specs)
        )
    )


def load_spec_overrides(path, specs=None):
    """Override parameter domains from a JSON file

    The file holds an object, or a list of objects, of the form
    ``{"name": "gaussian_blur", "param_domains": [[0, 6]]}``.

    Args:
        path (str or Path): JSON file
        specs (list of CorruptionSpec): Specs to override, the built-in
            registry if None.

    Returns:
        list of CorruptionSpec, with the overridden domains.
    """
    if specs is None:
        specs = registry()
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    with open(path, encoding="utf-8") as f_handle:
        try:
            overrides = json.load(f_handle)
        except json.JSONDecodeError as err:
            raise ValueError("Invalid JSON in {}: {}".format(path, err)) from err
    if isinstance(overrides, dict):
        overrides = [overrides]
    by_name = {spec.name: spec for spec in specs}
    for override in overrides:
        if "name" not in override or "param_domains" not in override:
            raise ValueError(
                "Spec overrides in {} need 'name' and 'param_domains'".format(path)
            )
        name = override["name"]
        if name not in by_name:
            raise ValueError("Unknown corruption {} in {}".format(name, path))
        by_name[name] = by_name[name].with_domains(override["param_domains"])
        logger.info(
            "Parameter domains for %s set to %s", name, str(override["param_domains"])
        )
    return [by_name[spec.name] for spec in specs]


def sample_params(spec, rng_seed):
    """Draw a parameter vector uniformly from the domain of a corruption

    Args:
        spec (CorruptionSpec)
        rng_seed (int): Seed for the Philox generator. Equal seeds give
            equal vectors.

    Returns:
        ParamVector
    """
    rng = make_rng(rng_seed)
    uniforms = rng.random(spec.num_params)
    return ParamVector(
        lo + (hi - lo) * uniform
        for (lo, hi), uniform in zip(spec.param_domains, uniforms)
    )


def apply_corruption(spec, params, img, rng_seed=0):
    """Apply a corruption to an RGB image

    Args:
        spec (CorruptionSpec)
        params (ParamVector or sequence of float): Inside the domain of spec
        img (Image): Three-channel image
        rng_seed (int): Seed for stochastic corruptions, ignored by the
            deterministic ones.

    Returns:
        Image, 8-bit, same dimensions as the input.
    """
    if img.channels != 3:
        raise ValueError("Corruptions apply to three-channel images")
    if not isinstance(params, ParamVector):
        params = ParamVector(params)
    params.check(spec)
    rng = make_rng(rng_seed) if spec.stochastic else None
    pixels = spec.function(img.as_float() / 255.0, params.values, rng)
    return Image(to_storage(pixels * 255.0))
