"""Image representation, PNG/PPM/PGM codec, colour conversion and the
separable Gaussian filter shared by the quality assessment and the
corruption functions"""

import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image as PilImage
from scipy.ndimage import correlate1d


logger = logging.getLogger(__name__)

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# BT.601 luma weights
LUMINANCE_WEIGHTS = (0.299, 0.587, 0.114)

SAVE_FORMATS = {".png": "PNG", ".ppm": "PPM", ".pgm": "PPM", ".pnm": "PPM"}

FILTER_MODES = ["reflect", "valid"]


class Image(object):
    """An immutable raster image, one or three channels.

    Pixels are stored either as 8-bit integers (what is read from and
    written to disk) or as 64-bit floats in the nominal range [0, 255]
    (what filtering and colour conversion produce). Use ``as_float()``
    for computation and ``to_uint8()`` for storage.

    Args:
        pixels (np.ndarray): Array of shape (height, width) or
            (height, width, 3). The data is copied.
    """

    def __init__(self, pixels):
        array = np.array(pixels, copy=True)
        if array.ndim == 3 and array.shape[2] == 1:
            array = array[:, :, 0]
        if array.ndim not in (2, 3) or (array.ndim == 3 and array.shape[2] != 3):
            raise ValueError(
                "Image data must have shape (h, w) or (h, w, 3), got {}".format(
                    array.shape
                )
            )
        if array.size == 0:
            raise ValueError("Image data is empty")
        if array.dtype != np.uint8:
            array = array.astype(np.float64)
        array.setflags(write=False)
        self.pixels = array

    @property
    def height(self):
        """Number of pixel rows"""
        return self.pixels.shape[0]

    @property
    def width(self):
        """Number of pixel columns"""
        return self.pixels.shape[1]

    @property
    def channels(self):
        """1 for grayscale/luminance, 3 for RGB"""
        return 1 if self.pixels.ndim == 2 else 3

    def as_float(self):
        """Return a writable float64 copy of the pixel data"""
        return self.pixels.astype(np.float64)

    def to_uint8(self):
        """Return the 8-bit storage version of this image.

        Values are rounded half away from zero and clamped to [0, 255].
        """
        if self.pixels.dtype == np.uint8:
            return self
        return Image(to_storage(self.pixels))

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None

    def __repr__(self):
        return "Image(width={}, height={}, channels={}, dtype={})".format(
            self.width, self.height, self.channels, self.pixels.dtype
        )


def to_storage(array):
    """Convert floating point pixel values to 8-bit storage values

    Args:
        array (np.ndarray): Pixel values, nominally in [0, 255]

    Returns:
        np.ndarray of dtype uint8
    """
    # After clamping all values are non-negative, where half away
    # from zero is the same as floor(x + 0.5)
    return np.floor(np.clip(array, 0.0, 255.0) + 0.5).astype(np.uint8)


def _pnm_maxval(data):
    """Parse the maxval field from a binary PNM header.

    Returns:
        int, or None if the header is incomplete.
    """
    tokens = []
    pos = 2
    while len(tokens) < 3 and pos < len(data):
        char = data[pos : pos + 1]
        if char == b"#":
            newline = data.find(b"\n", pos)
            if newline < 0:
                return None
            pos = newline + 1
        elif char.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and data[end : end + 1].isdigit():
                end += 1
            if end == pos:
                return None
            tokens.append(int(data[pos:end]))
            pos = end
    if len(tokens) < 3:
        return None
    return tokens[2]


def load_image(path):
    """Load a PNG or binary PPM (P6) / PGM (P5) file

    Args:
        path (str or Path): File to read

    Returns:
        Image, with uint8 pixels

    Raises:
        IOError if the file does not exist or cannot be read,
        ValueError for unsupported formats, 16-bit data or
        corrupt streams.
    """
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    with open(path, "rb") as f_handle:
        data = f_handle.read()

    if data.startswith(PNG_SIGNATURE):
        # Bit depth is the first byte after width and height in IHDR
        if len(data) > 24 and data[24] == 16:
            raise ValueError("16-bit images are not supported: {}".format(path))
    elif data[:2] in (b"P5", b"P6"):
        maxval = _pnm_maxval(data)
        if maxval is None:
            raise ValueError("Corrupt stream in {}: incomplete header".format(path))
        if maxval > 255:
            raise ValueError("16-bit images are not supported: {}".format(path))
    else:
        raise ValueError(
            "Unsupported image format in {}, only PNG, PPM (P6) and PGM (P5)".format(
                path
            )
        )

    try:
        with PilImage.open(io.BytesIO(data)) as pil_image:
            pil_image.load()
            mode = pil_image.mode
            if mode in ("1", "LA"):
                pil_image = pil_image.convert("L")
            elif mode in ("P", "PA", "RGBA"):
                if "A" in mode:
                    logger.warning("Alpha channel ignored in %s", str(path))
                pil_image = pil_image.convert("RGB")
            pixels = np.asarray(pil_image)
    except (OSError, SyntaxError, EOFError, ValueError) as err:
        raise ValueError("Corrupt stream in {}: {}".format(path, err)) from err

    if pixels.dtype != np.uint8:
        raise ValueError("16-bit images are not supported: {}".format(path))

    logger.debug("Loaded %s, shape %s", str(path), str(pixels.shape))
    return Image(pixels)


def save_image(img, path):
    """Save an image as PNG, or as PPM/PGM

    The format is chosen from the file suffix. One-channel images
    go to ``.png`` or ``.pgm``, three-channel images to ``.png`` or
    ``.ppm``. Floating point images are converted to 8-bit storage
    first.

    Args:
        img (Image): Image to save
        path (str or Path): Destination. The parent directory must exist.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in SAVE_FORMATS:
        raise ValueError("Unsupported image suffix {}".format(path.suffix))
    if img.channels == 1 and suffix == ".ppm":
        raise ValueError("One-channel images must be saved as .pgm or .png")
    if img.channels == 3 and suffix == ".pgm":
        raise ValueError("Three-channel images must be saved as .ppm or .png")

    pil_image = PilImage.fromarray(np.ascontiguousarray(img.to_uint8().pixels))
    pil_image.save(str(path), format=SAVE_FORMATS[suffix])
    logger.debug("Wrote %s", str(path))


def to_luminance(img):
    """Convert an RGB image to floating point luminance

    Uses BT.601 weights, L = 0.299 R + 0.587 G + 0.114 B. One-channel
    images are returned unchanged.

    Args:
        img (Image)

    Returns:
        Image, one channel
    """
    if img.channels == 1:
        return img
    return Image(np.dot(img.as_float(), np.array(LUMINANCE_WEIGHTS)))


def gaussian_kernel(sigma, kernel_len):
    """Normalized one-dimensional Gaussian taps

    Args:
        sigma (float): Standard deviation in pixels, positive.
        kernel_len (int): Number of taps, odd and positive.

    Returns:
        np.ndarray, summing to one.
    """
    if kernel_len < 1 or kernel_len % 2 != 1:
        raise ValueError(
            "Kernel length must be odd and positive, got {}".format(kernel_len)
        )
    if not sigma > 0:
        raise ValueError("Gaussian sigma must be positive, got {}".format(sigma))
    radius = kernel_len // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(offsets ** 2) / (2.0 * sigma ** 2))
    return taps / taps.sum()


def filter_array(array, taps, mode="reflect"):
    """Separable filtering of the first two axes of an array

    Args:
        array (np.ndarray): 2D, or 3D where the last axis is channels.
        taps (np.ndarray): Symmetric one-dimensional kernel, odd length.
        mode (str): "reflect" keeps the size, mirroring at the borders.
            "valid" only keeps positions where the kernel fits inside
            the array, shrinking each axis by len(taps) - 1.

    Returns:
        np.ndarray of float64
    """
    if mode not in FILTER_MODES:
        raise ValueError(
            "Unknown filter mode {}, use one of {}".format(mode, FILTER_MODES)
        )
    array = np.asarray(array, dtype=np.float64)
    if mode == "reflect":
        out = correlate1d(array, taps, axis=0, mode="reflect")
        return correlate1d(out, taps, axis=1, mode="reflect")

    kernel_len = len(taps)
    height, width = array.shape[0], array.shape[1]
    if kernel_len > height or kernel_len > width:
        raise ValueError(
            "Kernel of length {} larger than image {}x{}".format(
                kernel_len, width, height
            )
        )
    radius = kernel_len // 2
    out = correlate1d(array, taps, axis=0, mode="constant")[
        radius : height - radius
    ]
    return correlate1d(out, taps, axis=1, mode="constant")[
        :, radius : width - radius
    ]


def gaussian_filter(img, sigma, kernel_len, mode="reflect"):
    """Gaussian smoothing of an image by separable convolution

    Args:
        img (Image)
        sigma (float): Standard deviation of the Gaussian, positive.
        kernel_len (int): Odd number of taps.
        mode (str): "reflect" (same size) or "valid" (shrinks).

    Returns:
        Image with float pixels
    """
    taps = gaussian_kernel(sigma, kernel_len)
    return Image(filter_array(img.pixels, taps, mode=mode))
