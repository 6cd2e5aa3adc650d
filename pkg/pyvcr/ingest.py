"""Parsing of prediction, ground truth and label map files, and joining
predictions against a manifest into (delta_v, correct) observations

Predictions from humans and models share one CSV format::

  sample_id,label
  gaussian_noise-000000,dog
  gaussian_noise-000001,cat
  image_id,label
  img01,dog

The optional second section, starting at the ``image_id,label`` header,
holds predictions on the clean originals. It can also be a separate
file. Repeated judgments of one sample, e.g. by several human
participants, are written as ``<sample_id>#<n>``.
"""

import io
import logging
from pathlib import Path

import pandas as pd


logger = logging.getLogger(__name__)

REPEAT_SEPARATOR = "#"

SAMPLE_HEADER = ["sample_id", "label"]
CLEAN_HEADER = ["image_id", "label"]
LABEL_MAP_HEADER = ["fine_label", "entry_label"]


def base_sample_id(sample_id):
    """The manifest sample_id of a possibly repeated prediction id"""
    return sample_id.split(REPEAT_SEPARATOR, 1)[0]


class PredictionSet(object):
    """Predicted labels of one subject

    Args:
        subject (str): Name of the model, or e.g. "human"
        entries (dict): sample_id (possibly with repeat suffix) to label
        clean_entries (dict): image_id to label on the original image
    """

    def __init__(self, subject, entries, clean_entries=None):
        self.subject = subject
        self.entries = dict(entries)
        self.clean_entries = dict(clean_entries) if clean_entries else {}

    def __len__(self):
        return len(self.entries)

    def __repr__(self):
        return "PredictionSet({}, {} entries, {} clean)".format(
            self.subject, len(self.entries), len(self.clean_entries)
        )


class LabelMap(object):
    """Mapping from fine labels to entry-level classes

    Args:
        mapping (dict): fine label to entry-level label
    """

    def __init__(self, mapping):
        self.mapping = dict(mapping)

    @classmethod
    def identity(cls, labels):
        """A map sending each of the given labels to itself"""
        return cls({label: label for label in labels})

    @property
    def entry_labels(self):
        """Sorted list of the distinct entry-level labels"""
        return sorted(set(self.mapping.values()))

    def __contains__(self, label):
        return label in self.mapping

    def __len__(self):
        return len(self.mapping)

    def __repr__(self):
        return "LabelMap({} labels onto {} classes)".format(
            len(self.mapping), len(self.entry_labels)
        )


def _read_lines(path):
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    # Universal newlines, so CRLF and LF files read the same
    with open(path, encoding="utf-8-sig") as f_handle:
        lines = [line.strip() for line in f_handle.read().splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        logger.error("Empty file %s", str(path))
        raise ValueError("Empty file {}".format(path))
    return lines


def _is_header(line, header):
    return [cell.strip() for cell in line.split(",")] == header


def _parse_section(lines, header, path):
    """Two-column CSV lines, header first, to a dict of trimmed strings"""
    dframe = pd.read_csv(
        io.StringIO("\n".join(lines)), dtype=str, keep_default_na=False
    )
    dframe.columns = [col.strip() for col in dframe.columns]
    if list(dframe.columns) != header:
        raise ValueError(
            "Expected columns {} in {}, got {}".format(
                ",".join(header), path, ",".join(dframe.columns)
            )
        )
    keys = dframe[header[0]].str.strip()
    values = dframe[header[1]].str.strip()
    duplicated = keys[keys.duplicated()]
    if not duplicated.empty:
        logger.error("Duplicate %s %s in %s", header[0], duplicated.iloc[0], str(path))
        raise ValueError(
            "Duplicate {} {} in {}".format(header[0], duplicated.iloc[0], path)
        )
    if (keys == "").any() or (values == "").any():
        raise ValueError("Empty {} or {} in {}".format(header[0], header[1], path))
    return dict(zip(keys, values))


def parse_clean_predictions(path):
    """Read predictions on clean images, CSV with header image_id,label

    Returns:
        dict from image_id to label
    """
    lines = _read_lines(path)
    if not _is_header(lines[0], CLEAN_HEADER):
        raise ValueError("Missing header image_id,label in {}".format(path))
    return _parse_section(lines, CLEAN_HEADER, path)


def parse_predictions(path, clean_path=None, subject=None):
    """Read a prediction file

    Args:
        path (str or Path): CSV with header sample_id,label, optionally
            followed by a clean section with header image_id,label.
        clean_path (str or Path): Separate file with clean predictions
        subject (str): Name of the subject, the file stem if None.

    Returns:
        PredictionSet
    """
    lines = _read_lines(path)
    if not _is_header(lines[0], SAMPLE_HEADER):
        logger.error("Missing header sample_id,label in %s", str(path))
        raise ValueError("Missing header sample_id,label in {}".format(path))
    clean_start = next(
        (idx for idx, line in enumerate(lines) if _is_header(line, CLEAN_HEADER)),
        None,
    )
    sample_lines = lines[:clean_start]
    if len(sample_lines) < 2:
        raise ValueError("No predictions in {}".format(path))
    entries = _parse_section(sample_lines, SAMPLE_HEADER, path)

    clean_entries = {}
    if clean_start is not None:
        clean_entries = _parse_section(lines[clean_start:], CLEAN_HEADER, path)
    if clean_path is not None:
        if clean_entries:
            raise ValueError(
                "Clean predictions both in {} and in {}".format(path, clean_path)
            )
        clean_entries = parse_clean_predictions(clean_path)
    if subject is None:
        subject = Path(path).stem
    logger.info(
        "Loaded %d predictions and %d clean predictions for %s from %s",
        len(entries),
        len(clean_entries),
        subject,
        str(path),
    )
    return PredictionSet(subject, entries, clean_entries)


def parse_ground_truth(path):
    """Read true labels, CSV with header image_id,label

    Returns:
        dict from image_id to label
    """
    return parse_clean_predictions(path)


def parse_label_map(path):
    """Read a label map, CSV with header fine_label,entry_label

    Returns:
        LabelMap
    """
    lines = _read_lines(path)
    if not _is_header(lines[0], LABEL_MAP_HEADER):
        raise ValueError("Missing header fine_label,entry_label in {}".format(path))
    return LabelMap(_parse_section(lines, LABEL_MAP_HEADER, path))


def map_label(lmap, label):
    """Entry-level class of a label

    Args:
        lmap (LabelMap): Label map, or None for the identity.
        label (str)
    """
    if lmap is None:
        return label
    try:
        return lmap.mapping[label]
    except KeyError as err:
        raise ValueError("Unmapped label {}".format(label)) from err


def _check_mapped(lmap, labels):
    if lmap is None:
        return
    unmapped = sorted(set(labels) - set(lmap.mapping))
    if unmapped:
        logger.error("Labels not in the label map: %s", ", ".join(unmapped))
        raise ValueError("Unmapped labels: {}".format(", ".join(unmapped)))


def _prediction_rows(manifest, preds, allow_missing):
    """(record, label) for every prediction, in manifest order"""
    by_base = {}
    for pred_id in sorted(preds.entries):
        by_base.setdefault(base_sample_id(pred_id), []).append(pred_id)
    records = manifest.by_sample_id()
    unknown = sorted(set(by_base) - set(records))
    if unknown:
        logger.error("Predictions for unknown samples: %s", ", ".join(unknown[:10]))
        raise ValueError(
            "Predictions of {} for sample_ids not in the manifest: {}".format(
                preds.subject, ", ".join(unknown[:10])
            )
        )
    missing = [
        record.sample_id
        for record in manifest.records
        if record.sample_id not in by_base
    ]
    if missing and not allow_missing:
        raise ValueError(
            "Missing predictions of {} for sample_ids: {}".format(
                preds.subject, ", ".join(missing[:10])
            )
        )
    if missing:
        logger.warning("%d manifest samples without predictions", len(missing))
    return [
        (record, preds.entries[pred_id])
        for record in manifest.records
        for pred_id in by_base.get(record.sample_id, [])
    ]


def join_accuracy(manifest, preds, truth, lmap=None, allow_missing=False):
    """Observations of correctness of predictions on corrupted images

    A prediction is correct when its entry-level class equals that of
    the true label of the original image. Every prediction, repeats
    included, is one observation.

    Args:
        manifest (Manifest): The test set
        preds (PredictionSet): Predictions of one subject
        truth (dict): image_id to true label
        lmap (LabelMap): Label map, None for the identity
        allow_missing (bool): Tolerate manifest samples without
            predictions, e.g. for human data.

    Returns:
        tuple of (list of (delta_v, bool), float or None), the
        observations and the accuracy on clean images, None if there
        are no clean predictions.
    """
    rows = _prediction_rows(manifest, preds, allow_missing)
    image_ids = sorted({record.image_id for (record, _) in rows})
    no_truth = [image_id for image_id in image_ids if image_id not in truth]
    if no_truth:
        raise ValueError("No true label for image_ids: {}".format(", ".join(no_truth)))
    _check_mapped(lmap, [label for (_, label) in rows])
    _check_mapped(lmap, [truth[image_id] for image_id in image_ids])
    observations = [
        (
            record.delta_v,
            map_label(lmap, label) == map_label(lmap, truth[record.image_id]),
        )
        for (record, label) in rows
    ]

    clean_ids = [image_id for image_id in image_ids if image_id in preds.clean_entries]
    clean_accuracy = None
    if not clean_ids:
        logger.warning("No clean predictions for %s, no clean accuracy", preds.subject)
    else:
        if len(clean_ids) < len(image_ids):
            logger.warning(
                "Clean predictions for only %d of %d images",
                len(clean_ids),
                len(image_ids),
            )
        _check_mapped(lmap, [preds.clean_entries[image_id] for image_id in clean_ids])
        clean_accuracy = sum(
            map_label(lmap, preds.clean_entries[image_id])
            == map_label(lmap, truth[image_id])
            for image_id in clean_ids
        ) / float(len(clean_ids))
    logger.info(
        "Joined %d accuracy observations for %s", len(observations), preds.subject
    )
    return observations, clean_accuracy


def join_consistency(manifest, preds, lmap=None, allow_missing=False):
    """Observations of prediction consistency under corruption

    A prediction is consistent when its entry-level class equals that of
    the prediction on the original image.

    Args:
        manifest (Manifest): The test set
        preds (PredictionSet): Predictions with clean predictions
        lmap (LabelMap): Label map, None for the identity
        allow_missing (bool): See join_accuracy()

    Returns:
        list of (delta_v, bool)
    """
    rows = _prediction_rows(manifest, preds, allow_missing)
    image_ids = sorted({record.image_id for (record, _) in rows})
    no_clean = [
        image_id for image_id in image_ids if image_id not in preds.clean_entries
    ]
    if no_clean:
        logger.error("Missing clean predictions for %s", ", ".join(no_clean))
        raise ValueError(
            "Missing clean predictions of {} for image_ids: {}".format(
                preds.subject, ", ".join(no_clean)
            )
        )
    _check_mapped(lmap, [label for (_, label) in rows])
    _check_mapped(lmap, [preds.clean_entries[image_id] for image_id in image_ids])
    observations = [
        (
            record.delta_v,
            map_label(lmap, label)
            == map_label(lmap, preds.clean_entries[record.image_id]),
        )
        for (record, label) in rows
    ]
    logger.info(
        "Joined %d consistency observations for %s", len(observations), preds.subject
    )
    return observations
