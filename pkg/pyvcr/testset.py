"""Generation of corruption test sets and their Δv coverage

A test set is drawn by repeatedly choosing a source image and a
parameter vector at random, applying the corruption and measuring the
visual change. Every record derives its random choices from
(master_seed, record index) only, so records can be produced in any
order and by any number of threads.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from pyvcr.constants import MIN_PER_BIN, NUM_BINS
from pyvcr.corruptions import ParamVector, apply_corruption, sample_params
from pyvcr.image import Image, load_image, save_image, to_luminance
from pyvcr.iqa import VifConfig, delta_v
from pyvcr.utils.seeding import check_seed, derive_seeds, make_rng


logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = [".png", ".ppm", ".pgm", ".pnm"]

MANIFEST_NAME = "manifest.jsonl"


class SampleRecord(object):
    """One generated sample: an original, its corrupted version and Δv

    Args:
        sample_id (str): Unique within a manifest
        image_id (str): Identifier of the source image
        corruption (str): Corruption name
        params (ParamVector): Parameters used
        delta_v (float): Visual change, in [0, 1]
        original_path (str): Source image file
        corrupted_path (str): Generated image file
        seed (int): Seed given to the corruption function
    """

    def __init__(
        self,
        sample_id,
        image_id,
        corruption,
        params,
        delta_v,
        original_path,
        corrupted_path,
        seed,
    ):
        if not 0.0 <= delta_v <= 1.0:
            raise ValueError(
                "delta_v {} outside [0, 1] for sample {}".format(delta_v, sample_id)
            )
        if not isinstance(params, ParamVector):
            params = ParamVector(params)
        self.sample_id = str(sample_id)
        self.image_id = str(image_id)
        self.corruption = corruption
        self.params = params
        self.delta_v = float(delta_v)
        self.original_path = str(original_path)
        self.corrupted_path = str(corrupted_path)
        self.seed = check_seed(seed)

    def to_dict(self):
        """Dictionary with the manifest field names"""
        return {
            "sample_id": self.sample_id,
            "image_id": self.image_id,
            "corruption": self.corruption,
            "params": self.params.to_list(),
            "delta_v": self.delta_v,
            "original_path": self.original_path,
            "corrupted_path": self.corrupted_path,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, dct):
        """Inverse of ``to_dict()``"""
        try:
            return cls(
                dct["sample_id"],
                dct["image_id"],
                dct["corruption"],
                ParamVector(dct["params"]),
                dct["delta_v"],
                dct["original_path"],
                dct["corrupted_path"],
                dct["seed"],
            )
        except KeyError as err:
            raise ValueError("Manifest record lacks field {}".format(err)) from err

    def __eq__(self, other):
        if not isinstance(other, SampleRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return "SampleRecord({}, {}, delta_v={})".format(
            self.sample_id, self.corruption, self.delta_v
        )


class Manifest(object):
    """A generated test set for one corruption

    Args:
        corruption (str): Corruption name shared by all records
        records (list of SampleRecord)
        master_seed (int): Seed the records were derived from
        vif_config (VifConfig): Model used for Δv
    """

    def __init__(self, corruption, records, master_seed, vif_config=None):
        self.corruption = corruption
        self.records = list(records)
        self.master_seed = check_seed(master_seed)
        self.vif_config = vif_config if vif_config is not None else VifConfig()
        seen = set()
        for record in self.records:
            if record.corruption != corruption:
                raise ValueError(
                    "Record {} has corruption {}, manifest is for {}".format(
                        record.sample_id, record.corruption, corruption
                    )
                )
            if record.sample_id in seen:
                raise ValueError("Duplicate sample_id {}".format(record.sample_id))
            seen.add(record.sample_id)

    def __len__(self):
        return len(self.records)

    def delta_v_values(self):
        """Δv of all records as an array, in record order"""
        return np.array([record.delta_v for record in self.records], dtype=float)

    def by_sample_id(self):
        """Dictionary from sample_id to SampleRecord"""
        return {record.sample_id: record for record in self.records}

    def header(self):
        """The first line of a manifest file, as a dictionary"""
        return {
            "corruption": self.corruption,
            "master_seed": self.master_seed,
            "vif_config": self.vif_config.to_dict(),
        }

    def __repr__(self):
        return "Manifest({}, {} records, master_seed={})".format(
            self.corruption, len(self.records), self.master_seed
        )


def load_corpus(directory):
    """List the source images in a directory

    Args:
        directory (str or Path): Directory with PNG/PPM/PGM files,
            subdirectories are not searched.

    Returns:
        list of (image_id, path) tuples, sorted by image_id where
        image_id is the file name without suffix.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise IOError("Corpus directory not found " + str(directory))
    images = sorted(
        (path.stem, path)
        for path in directory.iterdir()
        if path.is_file() and path.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise ValueError("No images found in {}".format(directory))
    image_ids = [image_id for (image_id, _) in images]
    if len(set(image_ids)) != len(image_ids):
        raise ValueError(
            "Image files in {} with equal names but different suffix".format(directory)
        )
    logger.info("Found %d images in %s", len(images), str(directory))
    return images


def _as_rgb(img):
    if img.channels == 3:
        return img
    return Image(np.repeat(img.pixels[:, :, np.newaxis], 3, axis=2))


def generate_testset(
    images, spec, n, master_seed, out_dir, vif_config=None, workers=1
):
    """Generate a test set for one corruption

    Record i chooses its source image (with replacement), its parameter
    vector and the seed for the corruption from three seeds derived
    from (master_seed, i). The corrupted images are written as PNG to
    out_dir, and the manifest to ``out_dir/manifest.jsonl``.

    Args:
        images (list): (image_id, path) tuples for the source images.
            One-channel images are replicated to three channels.
        spec (CorruptionSpec): Corruption to apply
        n (int): Number of records
        master_seed (int): Seed for all random choices
        out_dir (str or Path): Output directory, created if missing.
        vif_config (VifConfig): Model for Δv, defaults if None.
        workers (int): Number of threads. The result does not depend
            on it.

    Returns:
        Manifest
    """
    if not images:
        raise ValueError("No source images given")
    if int(n) != n or n < 1:
        raise ValueError(
            "Number of records must be a positive integer, got {}".format(n)
        )
    if workers < 1:
        raise ValueError("Number of workers must be positive")
    master_seed = check_seed(master_seed)
    if vif_config is None:
        vif_config = VifConfig()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    images = [(str(image_id), Path(path)) for (image_id, path) in images]

    choices = []
    for idx in range(int(n)):
        choice_seed, param_seed, apply_seed = derive_seeds(master_seed, idx, count=3)
        image_idx = int(make_rng(choice_seed).integers(len(images)))
        choices.append((idx, image_idx, sample_params(spec, param_seed), apply_seed))

    # Sources are decoded once, the corruption workers only read them
    sources = {}
    for image_idx in sorted({choice[1] for choice in choices}):
        original = _as_rgb(load_image(images[image_idx][1]))
        sources[image_idx] = (original, to_luminance(original))

    def make_record(choice):
        idx, image_idx, params, apply_seed = choice
        image_id, original_path = images[image_idx]
        original, original_lum = sources[image_idx]
        sample_id = "{}-{:06d}".format(spec.name, idx)
        corrupted = apply_corruption(spec, params, original, rng_seed=apply_seed)
        corrupted_path = out_dir / (sample_id + ".png")
        save_image(corrupted, corrupted_path)
        change = delta_v(original_lum, to_luminance(corrupted), vif_config)
        logger.debug(
            "%s from %s with %s, seed %d: delta_v %g",
            sample_id,
            image_id,
            params,
            apply_seed,
            change,
        )
        return SampleRecord(
            sample_id,
            image_id,
            spec.name,
            params,
            change,
            original_path,
            corrupted_path,
            apply_seed,
        )

    if workers == 1:
        records = [make_record(choice) for choice in choices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(make_record, choices))

    manifest = Manifest(spec.name, records, master_seed, vif_config)
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest


def write_manifest(manifest, path):
    """Write a manifest as JSON Lines, a header line and one line per record"""
    lines = [json.dumps(manifest.header(), sort_keys=True)]
    lines.extend(
        json.dumps(record.to_dict(), sort_keys=True) for record in manifest.records
    )
    with open(path, "w", encoding="utf-8", newline="\n") as f_handle:
        f_handle.write("\n".join(lines) + "\n")
    logger.info("Wrote manifest with %d records to %s", len(manifest), str(path))


def read_manifest(path):
    """Read a manifest written by ``write_manifest()``

    Args:
        path (str or Path): JSON Lines file

    Returns:
        Manifest
    """
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    with open(path, encoding="utf-8") as f_handle:
        lines = [line for line in f_handle.read().splitlines() if line.strip()]
    if not lines:
        raise ValueError("Empty manifest {}".format(path))
    try:
        header = json.loads(lines[0])
        records = [
            SampleRecord.from_dict(json.loads(line)) for line in lines[1:]
        ]
    except json.JSONDecodeError as err:
        raise ValueError("Invalid JSON in manifest {}: {}".format(path, err)) from err
    for key in ["corruption", "master_seed"]:
        if key not in header:
            raise ValueError("Manifest {} has no {} in its header".format(path, key))
    return Manifest(
        header["corruption"],
        records,
        header["master_seed"],
        VifConfig.from_dict(header.get("vif_config", {})),
    )


def coverage(manifest, num_bins=NUM_BINS, min_per_bin=MIN_PER_BIN):
    """Fraction of equal-width Δv bins holding enough records

    Bin j is [j/num_bins, (j+1)/num_bins), the last bin also holds 1.0.

    Args:
        manifest (Manifest): Test set, or any iterable of Δv values.
        num_bins (int): Number of bins
        min_per_bin (int): Records needed for a bin to count as covered

    Returns:
        tuple of (float, np.ndarray), the coverage in [0, 1] and the
        record count per bin.
    """
    if num_bins < 1:
        raise ValueError("num_bins must be positive")
    if min_per_bin < 1:
        raise ValueError("min_per_bin must be positive")
    if isinstance(manifest, Manifest):
        values = manifest.delta_v_values()
    else:
        values = np.asarray(list(manifest), dtype=float)
    if values.size and (values.min() < 0 or values.max() > 1):
        raise ValueError("delta_v values must be in [0, 1]")
    indices = np.minimum(np.floor(values * num_bins).astype(int), num_bins - 1)
    counts = np.bincount(indices, minlength=num_bins)
    covered = int((counts >= min_per_bin).sum())
    return covered / float(num_bins), counts
