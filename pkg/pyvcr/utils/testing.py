"""Common functions and mock data for usage in pyvcr testing"""

from pathlib import Path

import numpy as np

from pyvcr.curves import PerformanceCurve
from pyvcr.image import Image, filter_array, gaussian_kernel, save_image, to_storage
from pyvcr.testset import Manifest, SampleRecord, load_corpus, write_manifest
from pyvcr.utils.seeding import make_rng


def texture(size, seed):
    """A smooth random RGB texture with edges, float pixels in [0, 255]

    Sums band-limited noise at two scales with a sinusoidal grating, so
    every scale of the VIF pyramid sees structure.
    """
    rng = make_rng(seed)
    rows, cols = np.mgrid[0:size, 0:size] / float(size)
    pixels = np.zeros((size, size, 3))
    for sigma, weight in [(1.0, 0.4), (4.0, 1.0)]:
        kernel_len = 2 * int(np.ceil(3 * sigma)) + 1
        noise = filter_array(
            rng.normal(size=(size, size, 3)),
            gaussian_kernel(sigma, kernel_len),
            mode="reflect",
        )
        pixels += weight * noise / noise.std()
    freq = rng.uniform(2, 8)
    angle = rng.uniform(0, np.pi)
    grating = np.sin(2 * np.pi * freq * (rows * np.cos(angle) + cols * np.sin(angle)))
    pixels += 0.8 * grating[:, :, np.newaxis]
    pixels = (pixels - pixels.min()) / (pixels.max() - pixels.min())
    return 20.0 + 215.0 * pixels


def synthetic_corpus(directory, num_images=10, size=64, seed=0):
    """Write a corpus of textures as PNG and list it like load_corpus()

    Args:
        directory (str or Path): Where to write, must exist.
        num_images (int): Number of images
        size (int): Side length in pixels
        seed (int): Seed for the textures

    Returns:
        list of (image_id, path)
    """
    directory = Path(directory)
    for idx in range(num_images):
        img = Image(to_storage(texture(size, seed + idx)))
        save_image(img, directory / "img{:02d}.png".format(idx))
    return load_corpus(directory)


def synthetic_observations(probability, num, seed=0):
    """(delta_v, correct) pairs with delta_v uniform on [0, 1]

    Args:
        probability (callable): Probability of a correct answer at delta_v,
            vectorized.
        num (int): Number of observations
        seed (int): Random seed
    """
    rng = make_rng(seed)
    values = rng.random(num)
    correct = rng.random(num) < probability(values)
    return list(zip(values, correct))


def step_subject(values):
    """Correctness probability of a subject right iff delta_v < 0.5"""
    return (np.asarray(values) < 0.5).astype(float)


def make_manifest(delta_vs, corruption="gaussian_noise", num_images=10):
    """A manifest without image files, for testing everything after generation"""
    records = [
        SampleRecord(
            "{}-{:06d}".format(corruption, idx),
            "img{:02d}".format(idx % num_images),
            corruption,
            [0.0],
            value,
            "img{:02d}.png".format(idx % num_images),
            "{}-{:06d}.png".format(corruption, idx),
            idx,
        )
        for idx, value in enumerate(delta_vs)
    ]
    return Manifest(corruption, records, 0)


def write_step_fixture(directory, num=5000, seed=0):
    """Files for a subject classifying correctly iff delta_v < 0.5

    Writes manifest.jsonl, predictions.csv (with a clean section) and
    truth.csv to the directory.

    Returns:
        dict with the three paths
    """
    directory = Path(directory)
    rng = make_rng(seed)
    manifest = make_manifest(rng.random(num))
    paths = {
        "manifest": directory / "manifest.jsonl",
        "predictions": directory / "predictions.csv",
        "truth": directory / "truth.csv",
    }
    write_manifest(manifest, paths["manifest"])
    image_ids = sorted({record.image_id for record in manifest.records})
    lines = ["sample_id,label"]
    lines += [
        "{},{}".format(record.sample_id, "dog" if record.delta_v < 0.5 else "cat")
        for record in manifest.records
    ]
    lines += ["image_id,label"] + ["{},dog".format(image_id) for image_id in image_ids]
    paths["predictions"].write_text("\n".join(lines) + "\n", encoding="utf-8")
    paths["truth"].write_text(
        "\n".join(["image_id,label"] + ["{},dog".format(i) for i in image_ids]) + "\n",
        encoding="utf-8",
    )
    return paths


def random_monotone_curve(rng, max_knots=12):
    """A random valid PerformanceCurve with 2 to max_knots knots"""
    num = int(rng.integers(2, max_knots + 1))
    knots = np.concatenate([[0.0], np.sort(rng.random(num - 2)), [1.0]])
    knots = np.unique(knots)
    values = np.sort(rng.random(len(knots)))[::-1]
    return PerformanceCurve(knots, values)


def constant_curve(value):
    """A flat curve"""
    return PerformanceCurve([0.0, 1.0], [value, value])


def linear_curve(start, end):
    """A straight curve from (0, start) to (1, end), start >= end"""
    return PerformanceCurve([0.0, 1.0], [start, end])


def curve_decreasing(curve, slack=1e-12):
    """True if no curve value exceeds the one to its left by more than slack"""
    return bool((np.diff(curve.table["value"].values) <= slack).all())


def dense_quadrature(function, num=100000):
    """Midpoint rule on [0, 1], the oracle for exact curve integrals"""
    points = (np.arange(num) + 0.5) / num
    return float(np.mean(function(points)))
