"""VCR estimates and human-relative robustness metrics"""

import json
import logging
import math
import numbers
from pathlib import Path

import numpy as np

from pyvcr.constants import CI_LEVEL, MIN_PER_BIN, NUM_BINS
from pyvcr.constants import EPSILON as epsilon
from pyvcr.curves import (
    FIT_DESCRIPTION,
    PerformanceCurve,
    bin_observations,
    confidence_band,
    fit_monotone_curve,
    integrate_curve,
    raw_performance,
)


logger = logging.getLogger(__name__)

PROPERTIES = ["accuracy", "consistency"]

SCENARIOS = ["human-dominates", "model-dominates", "mixed"]


def _nan_to_none(values):
    return [None if math.isnan(value) else float(value) for value in values]


def _none_to_nan(values):
    return [np.nan if value is None else float(value) for value in values]


class VcrReport(object):
    """Estimated VCR of one subject on one corruption

    Args:
        subject (str): Model name, or "human"
        corruption (str): Corruption name
        property (str): "accuracy" or "consistency"
        r_hat (float): Area under the curve
        curve (PerformanceCurve): Fitted curve, possibly with band
        mean_performance (float): Plain fraction of correct observations
            over the whole test set, if known.
        num_observations (int): Number of observations the curve is
            estimated from.
        fit (str): Description of the fitting procedure
    """

    # pylint: disable=redefined-builtin
    def __init__(
        self,
        subject,
        corruption,
        property,
        r_hat,
        curve,
        mean_performance=None,
        num_observations=0,
        fit=FIT_DESCRIPTION,
    ):
        if property not in PROPERTIES:
            raise ValueError(
                "Unknown property {}, use one of {}".format(property, PROPERTIES)
            )
        if isinstance(r_hat, bool) or not isinstance(r_hat, numbers.Real):
            raise ValueError("r_hat must be a number, got {!r}".format(r_hat))
        if abs(r_hat - integrate_curve(curve)) > 1e-9:
            raise ValueError(
                "r_hat {} does not match the area under the curve {}".format(
                    r_hat, integrate_curve(curve)
                )
            )
        self.subject = subject
        self.corruption = corruption
        self.property = property
        self.r_hat = float(r_hat)
        self.curve = curve
        self.mean_performance = mean_performance
        self.num_observations = int(num_observations)
        self.fit = fit

    def to_dict(self):
        """JSON-ready dictionary, the curve included"""
        table = self.curve.table
        return {
            "subject": self.subject,
            "corruption": self.corruption,
            "property": self.property,
            "r_hat": self.r_hat,
            "mean_performance": self.mean_performance,
            "num_observations": self.num_observations,
            "fit": self.fit,
            "anchor_left": self.curve.anchor_left,
            "anchor_right": self.curve.anchor_right,
            "curve": {
                "v": [float(value) for value in table["v"]],
                "value": [float(value) for value in table["value"]],
                "band_lo": _nan_to_none(table["lo"]),
                "band_hi": _nan_to_none(table["hi"]),
                "wilson_lo": _nan_to_none(table["wilson_lo"]),
                "wilson_hi": _nan_to_none(table["wilson_hi"]),
            },
        }

    @classmethod
    def from_dict(cls, dct):
        """Inverse of ``to_dict()``"""
        try:
            curve_dict = dct["curve"]
            no_band = [None] * len(curve_dict["v"])
            curve = PerformanceCurve(
                curve_dict["v"],
                curve_dict["value"],
                lo=_none_to_nan(curve_dict.get("band_lo", no_band)),
                hi=_none_to_nan(curve_dict.get("band_hi", no_band)),
                anchor_left=dct.get("anchor_left"),
                anchor_right=dct.get("anchor_right"),
                wilson_lo=_none_to_nan(curve_dict.get("wilson_lo", no_band)),
                wilson_hi=_none_to_nan(curve_dict.get("wilson_hi", no_band)),
            )
            return cls(
                dct["subject"],
                dct["corruption"],
                dct["property"],
                dct["r_hat"],
                curve,
                mean_performance=dct.get("mean_performance"),
                num_observations=dct.get("num_observations", 0),
                fit=dct.get("fit", FIT_DESCRIPTION),
            )
        except KeyError as err:
            raise ValueError("VCR report lacks field {}".format(err)) from err
        except TypeError as err:
            raise ValueError("Malformed VCR report: {}".format(err)) from err

    def __repr__(self):
        return "VcrReport({}, {}, {}, r_hat={:.6f})".format(
            self.subject, self.corruption, self.property, self.r_hat
        )


class ComparisonReport(object):
    """Areas and indices comparing a model curve to a human curve

    Args:
        a_h (float): Area under the human curve
        a_m (float): Area under the model curve
        a_h_gt_m (float): Area where the human curve leads
        a_m_gt_h (float): Area where the model curve leads
        hmri (float): Human-relative model robustness index
        mrsi (float): Model robustness superiority index
        scenario (str): One of SCENARIOS
        human (VcrReport): Optional, the human report compared
        model (VcrReport): Optional, the model report compared
    """

    def __init__(
        self, a_h, a_m, a_h_gt_m, a_m_gt_h, hmri, mrsi, scenario, human=None, model=None
    ):
        if scenario not in SCENARIOS:
            raise ValueError("Unknown scenario {}".format(scenario))
        if a_h_gt_m > a_h + epsilon or a_m_gt_h > a_m + epsilon:
            raise ValueError("A lead area can not exceed the area under its curve")
        self.a_h = float(a_h)
        self.a_m = float(a_m)
        self.a_h_gt_m = float(a_h_gt_m)
        self.a_m_gt_h = float(a_m_gt_h)
        self.hmri = float(hmri)
        self.mrsi = float(mrsi)
        self.scenario = scenario
        self.human = human
        self.model = model

    @property
    def overlap(self):
        """Area under both curves"""
        return self.a_h - self.a_h_gt_m

    def to_dict(self):
        """JSON-ready dictionary. subject and r_hat refer to the model."""
        dct = {
            "hmri": self.hmri,
            "mrsi": self.mrsi,
            "areas": {
                "a_h": self.a_h,
                "a_m": self.a_m,
                "a_h_gt_m": self.a_h_gt_m,
                "a_m_gt_h": self.a_m_gt_h,
            },
            "scenario": self.scenario,
        }
        if self.model is not None:
            dct["subject"] = self.model.subject
            dct["corruption"] = self.model.corruption
            dct["property"] = self.model.property
            dct["r_hat"] = self.model.r_hat
        if self.human is not None:
            dct["human_subject"] = self.human.subject
            dct["human_corruption"] = self.human.corruption
            dct["human_r_hat"] = self.human.r_hat
        return dct

    def __repr__(self):
        return "ComparisonReport(hmri={:.6f}, mrsi={:.6f}, {})".format(
            self.hmri, self.mrsi, self.scenario
        )


def estimate_vcr(
    manifest,
    joined,
    anchor_left,
    property="accuracy",
    subject="",
    num_bins=NUM_BINS,
    min_per_bin=MIN_PER_BIN,
    anchor_right=None,
    level=CI_LEVEL,
):
    # pylint: disable=redefined-builtin
    """Estimate the VCR of a subject from its observations on a test set

    The observations are binned on Δv, a non-increasing curve is fitted
    and anchored, and its area is the estimate. The returned curve has a
    confidence band on every bin with at least min_per_bin observations.

    Args:
        manifest (Manifest): The test set, gives the corruption name.
        joined (list): (delta_v, correct) pairs, see the ingest module.
        anchor_left (float): Curve value at Δv = 0. For accuracy this is
            the accuracy on clean images, for consistency of a
            deterministic subject it is 1.
        property (str): "accuracy" or "consistency"
        subject (str): Name of the subject
        num_bins (int): M
        min_per_bin (int): L
        anchor_right (float): Optional curve value at Δv = 1
        level (float): Confidence level of the band

    Returns:
        VcrReport
    """
    joined = list(joined)
    if not joined:
        raise ValueError("No observations to estimate VCR from")
    hist = bin_observations(joined, num_bins)
    raw = raw_performance(hist, min_per_bin)
    curve = fit_monotone_curve(raw, hist, anchor_left, anchor_right)
    curve = confidence_band(hist, curve, level=level, min_per_bin=min_per_bin)
    r_hat = integrate_curve(curve)
    mean_performance = float(hist.correct.sum()) / float(hist.count.sum())
    logger.info(
        "VCR %s of %s on %s: %g (mean over test set %g, %d observations)",
        property,
        subject,
        manifest.corruption,
        r_hat,
        mean_performance,
        len(joined),
    )
    logger.info("Curve fitted by %s", FIT_DESCRIPTION)
    return VcrReport(
        subject,
        manifest.corruption,
        property,
        r_hat,
        curve,
        mean_performance=mean_performance,
        num_observations=len(joined),
    )


def _merged_differences(curve_a, curve_b):
    knots = np.union1d(curve_a.table["v"].values, curve_b.table["v"].values)
    return knots, curve_a(knots) - curve_b(knots)


def lead_area(curve_a, curve_b):
    """Area where curve a lies above curve b, the integral of (a - b)+

    Both curves are piecewise linear, so the difference is linear
    between the merged knots and the integral is exact: a segment where
    the difference changes sign contributes the triangle up to the
    crossing.

    Args:
        curve_a (PerformanceCurve)
        curve_b (PerformanceCurve)

    Returns:
        float, non-negative
    """
    knots, diff = _merged_differences(curve_a, curve_b)
    widths = np.diff(knots)
    left = diff[:-1]
    right = diff[1:]
    area = np.zeros_like(widths)

    both = (left >= 0) & (right >= 0)
    area[both] = widths[both] * (left[both] + right[both]) / 2.0

    falling = (left > 0) & (right < 0)
    area[falling] = (
        widths[falling] * left[falling] ** 2 / (left[falling] - right[falling]) / 2.0
    )
    rising = (left < 0) & (right > 0)
    area[rising] = (
        widths[rising] * right[rising] ** 2 / (right[rising] - left[rising]) / 2.0
    )
    return float(area.sum())


def hmri(human, model):
    """Human-relative model robustness index, 1 - A(h>m) / A(h)

    1 means the model is at least as good as humans everywhere.
    """
    area = integrate_curve(human)
    if area <= 0:
        raise ValueError("Area under the human curve is zero, HMRI is undefined")
    return float(min(1.0, max(0.0, 1.0 - lead_area(human, model) / area)))


def mrsi(human, model):
    """Model robustness superiority index, A(m>h) / A(m)

    0 means the model is nowhere better than humans.
    """
    area = integrate_curve(model)
    if area <= 0:
        raise ValueError("Area under the model curve is zero, MRSI is undefined")
    return float(min(1.0, max(0.0, lead_area(model, human) / area)))


def classify_scenario(hmri_value, mrsi_value):
    """Name the relation between a model and humans from the two indices

    HMRI = 1 means the model is nowhere behind humans (this includes equal
    curves). Otherwise MRSI = 0 means humans are nowhere behind the model,
    and the rest is mixed. Equality is tested with a 1e-12 tolerance.
    """
    if hmri_value >= 1.0 - epsilon:
        return "model-dominates"
    if mrsi_value <= epsilon:
        return "human-dominates"
    return "mixed"


def compare(human, model, classes=None):
    """Compare a model report against a human report

    Args:
        human (VcrReport): Human performance
        model (VcrReport): Model performance, same property.
        classes (list of list of str): Optional classes of visually
            similar corruptions. A human report on a corruption in the
            same class as the model's corruption is accepted.

    Returns:
        ComparisonReport
    """
    if human.property != model.property:
        raise ValueError(
            "Can not compare {} against {}".format(human.property, model.property)
        )
    if human.corruption != model.corruption:
        same_class = classes is not None and any(
            human.corruption in cls and model.corruption in cls for cls in classes
        )
        if not same_class:
            raise ValueError(
                "Can not compare reports on {} and {}".format(
                    human.corruption, model.corruption
                )
            )
        logger.info(
            "Using human curve of %s for the similar corruption %s",
            human.corruption,
            model.corruption,
        )
    a_h = integrate_curve(human.curve)
    a_m = integrate_curve(model.curve)
    a_h_gt_m = lead_area(human.curve, model.curve)
    a_m_gt_h = lead_area(model.curve, human.curve)
    hmri_value = hmri(human.curve, model.curve)
    mrsi_value = mrsi(human.curve, model.curve)
    scenario = classify_scenario(hmri_value, mrsi_value)
    logger.info(
        "%s vs %s: HMRI %g, MRSI %g, %s",
        model.subject,
        human.subject,
        hmri_value,
        mrsi_value,
        scenario,
    )
    return ComparisonReport(
        a_h,
        a_m,
        a_h_gt_m,
        a_m_gt_h,
        hmri_value,
        mrsi_value,
        scenario,
        human=human,
        model=model,
    )


def write_json(dct, path):
    """Write a dictionary as JSON with sorted keys and a final newline"""
    with open(path, "w", encoding="utf-8", newline="\n") as f_handle:
        f_handle.write(json.dumps(dct, sort_keys=True, indent=2) + "\n")
    logger.info("Wrote %s", str(path))


def read_report(path):
    """Read a VcrReport from a JSON file"""
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    with open(path, encoding="utf-8") as f_handle:
        try:
            dct = json.load(f_handle)
        except json.JSONDecodeError as err:
            raise ValueError("Invalid JSON in {}: {}".format(path, err)) from err
    return VcrReport.from_dict(dct)
