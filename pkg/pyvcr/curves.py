"""Performance versus visual change: binning, monotone curve fit,
integration and confidence bands"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.stats import norm

from pyvcr.constants import CI_LEVEL, MIN_PER_BIN, NUM_BINS
from pyvcr.constants import EPSILON as epsilon
from pyvcr.utils.isotonic import (
    check_decreasing,
    check_limits,
    clip_accumulate,
    isotonic_decreasing,
    moving_average,
)


logger = logging.getLogger(__name__)

SMOOTHING_WINDOW = 3

FIT_DESCRIPTION = (
    "weighted isotonic regression (pool adjacent violators, bin counts as "
    "weights), moving average of window {}, second isotonic pass, linear "
    "interpolation between bin centers".format(SMOOTHING_WINDOW)
)

CSV_COLUMNS = ["v", "value", "band_lo", "band_hi", "wilson_lo", "wilson_hi"]


class PerformanceHistogram(object):
    """Number of observations and number of correct ones per Δv bin

    Args:
        count (list of int): Observations per bin
        correct (list of int): Correct observations per bin
    """

    def __init__(self, count, correct):
        count = np.asarray(count, dtype=np.int64)
        correct = np.asarray(correct, dtype=np.int64)
        if count.ndim != 1 or count.shape != correct.shape:
            raise ValueError("count and correct must be vectors of equal length")
        if len(count) < 2:
            raise ValueError("At least two bins are needed")
        if (correct < 0).any() or (correct > count).any():
            raise ValueError("Need 0 <= correct <= count in every bin")
        self.count = count
        self.correct = correct

    @property
    def num_bins(self):
        """Number of bins, M"""
        return len(self.count)

    def bin_centers(self):
        """Representative Δv for each bin, (j + 0.5) / M"""
        return bin_centers(self.num_bins)

    def __add__(self, other):
        if not isinstance(other, PerformanceHistogram):
            return NotImplemented
        if other.num_bins != self.num_bins:
            raise ValueError(
                "Cannot add histograms with {} and {} bins".format(
                    self.num_bins, other.num_bins
                )
            )
        return PerformanceHistogram(
            self.count + other.count, self.correct + other.correct
        )

    def __eq__(self, other):
        if not isinstance(other, PerformanceHistogram):
            return NotImplemented
        return np.array_equal(self.count, other.count) and np.array_equal(
            self.correct, other.correct
        )

    def __repr__(self):
        return "PerformanceHistogram({} bins, {} observations)".format(
            self.num_bins, int(self.count.sum())
        )


class PerformanceCurve(object):
    """A non-increasing piecewise linear function of Δv on [0, 1]

    The knots are held in the dataframe ``table`` with columns ``v``,
    ``value``, ``lo``, ``hi``, ``wilson_lo`` and ``wilson_hi``. ``lo``
    and ``hi`` are the confidence band, NaN at knots without one, and
    always contain the curve value. ``wilson_lo`` and ``wilson_hi`` are
    the interval around the raw bin proportion the band was made from,
    which the fitted value may lie outside of.

    Args:
        v (list of float): Knot positions, strictly increasing from 0 to 1.
        value (list of float): Curve values in [0, 1], non-increasing.
        lo (list of float): Optional lower band, NaN for no band.
        hi (list of float): Optional upper band, NaN for no band.
        anchor_left (float): Value the curve was anchored to at v=0, if any.
        anchor_right (float): Value the curve was anchored to at v=1, if any.
        wilson_lo (list of float): Optional lower raw interval bound.
        wilson_hi (list of float): Optional upper raw interval bound.
    """

    def __init__(
        self,
        v,
        value,
        lo=None,
        hi=None,
        anchor_left=None,
        anchor_right=None,
        wilson_lo=None,
        wilson_hi=None,
    ):
        self.table = pd.DataFrame(
            {"v": np.asarray(v, dtype=np.float64), "value": value}, dtype=np.float64
        )
        for col, band in [
            ("lo", lo),
            ("hi", hi),
            ("wilson_lo", wilson_lo),
            ("wilson_hi", wilson_hi),
        ]:
            if band is None:
                self.table[col] = np.nan
            else:
                self.table[col] = np.asarray(band, dtype=np.float64)
        self.anchor_left = anchor_left
        self.anchor_right = anchor_right
        self.validate()

    def validate(self):
        """Raise ValueError unless the curve is well formed"""
        knots = self.table["v"].values
        values = self.table["value"].values
        if len(knots) < 2:
            raise ValueError("A curve needs at least two knots")
        if knots[0] != 0.0 or knots[-1] != 1.0:
            raise ValueError("Curve knots must start at 0 and end at 1")
        if not (np.diff(knots) > 0).all():
            raise ValueError("Curve knots must be strictly increasing")
        if np.isnan(values).any():
            raise ValueError("Curve values must be numbers")
        check_limits(values, lower=-epsilon, upper=1 + epsilon, colname="curve values")
        check_decreasing(values, colname="curve values")
        lo = self.table["lo"].values
        hi = self.table["hi"].values
        if not np.array_equal(np.isnan(lo), np.isnan(hi)):
            raise ValueError("Band bounds must be present at the same knots")
        banded = ~np.isnan(lo)
        if (lo[banded] > values[banded] + epsilon).any() or (
            hi[banded] < values[banded] - epsilon
        ).any():
            raise ValueError("Band must contain the curve value at every knot")
        wilson_lo = self.table["wilson_lo"].values
        wilson_hi = self.table["wilson_hi"].values
        raw = ~np.isnan(wilson_lo)
        if not np.array_equal(raw, ~np.isnan(wilson_hi)):
            raise ValueError("Wilson bounds must be present at the same knots")
        if (raw & ~banded).any():
            raise ValueError("Wilson bounds only at knots with a band")
        if (wilson_lo[raw] > wilson_hi[raw] + epsilon).any():
            raise ValueError("Wilson lower bound above upper bound")
        if (lo[raw] > wilson_lo[raw] + epsilon).any() or (
            hi[raw] < wilson_hi[raw] - epsilon
        ).any():
            raise ValueError("Band must contain the Wilson interval")

    @property
    def has_band(self):
        """True if some knot carries a confidence band"""
        return bool(self.table["lo"].notna().any())

    def interval_bounds(self):
        """Lower and upper interval per knot for overlap tests

        The Wilson interval where the curve has one, else the band.

        Returns:
            tuple of two np.ndarray, NaN at knots without a band.
        """
        has_wilson = self.table["wilson_lo"].notna().values
        lower = np.where(has_wilson, self.table["wilson_lo"], self.table["lo"])
        upper = np.where(has_wilson, self.table["wilson_hi"], self.table["hi"])
        return lower, upper

    @property
    def knots(self):
        """List of (v, value) tuples"""
        return list(zip(self.table["v"], self.table["value"]))

    def __call__(self, v):
        """Evaluate the curve, linearly between knots"""
        return np.interp(v, self.table["v"].values, self.table["value"].values)

    def with_band(self, lo, hi, wilson_lo=None, wilson_hi=None):
        """A copy of this curve with another confidence band"""
        return PerformanceCurve(
            self.table["v"].values,
            self.table["value"].values,
            lo=lo,
            hi=hi,
            anchor_left=self.anchor_left,
            anchor_right=self.anchor_right,
            wilson_lo=wilson_lo,
            wilson_hi=wilson_hi,
        )

    def __len__(self):
        return len(self.table)

    def __repr__(self):
        return "PerformanceCurve({} knots, area {:.6f}{})".format(
            len(self.table),
            integrate_curve(self),
            ", with band" if self.has_band else "",
        )


def bin_centers(num_bins):
    """Centers (j + 0.5) / M of the M equal-width bins of [0, 1]"""
    return (np.arange(num_bins) + 0.5) / num_bins


def bin_observations(observations, num_bins=NUM_BINS):
    """Accumulate (delta_v, correct) observations into a histogram

    Observation with visual change v goes to bin floor(v * (M - 1)), so
    v = 1 lands in the last bin.

    Args:
        observations (list): (delta_v, correct) pairs, correct is a bool.
        num_bins (int): M, at least 2.

    Returns:
        PerformanceHistogram
    """
    if num_bins < 2:
        raise ValueError("At least two bins are needed, got {}".format(num_bins))
    observations = list(observations)
    values = np.array([obs[0] for obs in observations], dtype=np.float64)
    correct = np.array([bool(obs[1]) for obs in observations], dtype=bool)
    if values.size and (
        np.isnan(values).any() or values.min() < 0 or values.max() > 1
    ):
        raise ValueError("delta_v values must be in [0, 1]")
    indices = np.floor(values * (num_bins - 1)).astype(np.int64)
    return PerformanceHistogram(
        np.bincount(indices, minlength=num_bins),
        np.bincount(indices, weights=correct, minlength=num_bins).astype(np.int64),
    )


def raw_performance(hist, min_per_bin=MIN_PER_BIN):
    """Fraction correct in every bin with enough observations

    Args:
        hist (PerformanceHistogram)
        min_per_bin (int): L, bins with fewer observations are missing.

    Returns:
        np.ndarray of length M, NaN marks missing bins.
    """
    if min_per_bin < 1:
        raise ValueError("min_per_bin must be at least 1")
    raw = np.full(hist.num_bins, np.nan)
    filled = hist.count >= min_per_bin
    raw[filled] = hist.correct[filled] / hist.count[filled]
    sparse = int(((hist.count > 0) & ~filled).sum())
    if sparse:
        logger.warning(
            "%d bins with fewer than %d observations are ignored", sparse, min_per_bin
        )
    return raw


def _check_anchor(anchor, name):
    if anchor is not None and not 0.0 <= anchor <= 1.0:
        raise ValueError("{} must be in [0, 1], got {}".format(name, anchor))


def fit_monotone_curve(raw, hist, anchor_left=None, anchor_right=None):
    """Fit a non-increasing curve to binned performance

    The bin values are fitted by weighted isotonic regression with the
    bin counts as weights, clipped to the anchors. The result is smoothed
    by a moving average over the anchored sequence and made
    non-increasing again by a second isotonic pass. The curve has a knot
    at 0, at every bin center and at 1. Anchored ends take the anchor
    value exactly, other ends and missing bins are interpolated, or
    extended flat from the nearest fitted bin.

    Args:
        raw (np.ndarray): Output of raw_performance(), NaN for missing bins.
        hist (PerformanceHistogram): Gives the weights
        anchor_left (float): Known value at v=0, e.g. clean accuracy, or
            1 for the consistency of a deterministic subject.
        anchor_right (float): Optional known value at v=1, e.g. chance level.

    Returns:
        PerformanceCurve
    """
    raw = np.asarray(raw, dtype=np.float64)
    if len(raw) != hist.num_bins:
        raise ValueError(
            "Got {} bin values for a histogram with {} bins".format(
                len(raw), hist.num_bins
            )
        )
    _check_anchor(anchor_left, "anchor_left")
    _check_anchor(anchor_right, "anchor_right")
    if (
        anchor_left is not None
        and anchor_right is not None
        and anchor_right > anchor_left
    ):
        raise ValueError("anchor_right can not exceed anchor_left")
    present = ~np.isnan(raw)
    if not present.any() and anchor_left is None and anchor_right is None:
        raise ValueError("No bins with enough data and no anchors to fit a curve to")

    upper = 1.0 if anchor_left is None else anchor_left
    lower = 0.0 if anchor_right is None else anchor_right
    centers = hist.bin_centers()[present]
    weights = hist.count[present].astype(np.float64)

    fitted = np.clip(isotonic_decreasing(raw[present], weights), lower, upper)
    if len(fitted):
        sequence = np.concatenate(
            [
                [anchor_left] if anchor_left is not None else [],
                fitted,
                [anchor_right] if anchor_right is not None else [],
            ]
        )
        smoothed = moving_average(sequence, SMOOTHING_WINDOW)
        if anchor_left is not None:
            smoothed = smoothed[1:]
        if anchor_right is not None:
            smoothed = smoothed[:-1]
        fitted = np.clip(isotonic_decreasing(smoothed, weights), lower, upper)

    points_v = list(centers)
    points_value = list(fitted)
    if anchor_left is not None:
        points_v.insert(0, 0.0)
        points_value.insert(0, anchor_left)
    if anchor_right is not None:
        points_v.append(1.0)
        points_value.append(anchor_right)

    knots = np.concatenate([[0.0], hist.bin_centers(), [1.0]])
    values = clip_accumulate(
        np.interp(knots, points_v, points_value), lower=0.0, upper=1.0
    )
    logger.debug(
        "Fitted curve to %d bins, anchors %s and %s",
        int(present.sum()),
        str(anchor_left),
        str(anchor_right),
    )
    return PerformanceCurve(
        knots, values, anchor_left=anchor_left, anchor_right=anchor_right
    )


def integrate_curve(curve):
    """Exact area under a piecewise linear curve on [0, 1]"""
    knots = curve.table["v"].values
    values = curve.table["value"].values
    return float(np.sum(np.diff(knots) * (values[1:] + values[:-1]) / 2.0))


def z_value(level):
    """Standard normal quantile for a two-sided interval at this level"""
    if not 0.0 < level < 1.0:
        raise ValueError("Confidence level must be in (0, 1), got {}".format(level))
    return float(norm.ppf((1.0 + level) / 2.0))


def wilson_interval(correct, count, level=CI_LEVEL):
    """Wilson score interval for a binomial proportion

    Args:
        correct (int or np.ndarray): Number of successes
        count (int or np.ndarray): Number of trials, positive
        level (float): Confidence level

    Returns:
        tuple of (lower, upper), same shape as the input.
    """
    z = z_value(level)
    count = np.asarray(count, dtype=np.float64)
    phat = np.asarray(correct, dtype=np.float64) / count
    denominator = 1.0 + z ** 2 / count
    center = (phat + z ** 2 / (2.0 * count)) / denominator
    spread = phat * (1.0 - phat) / count + z ** 2 / (4.0 * count ** 2)
    half_width = z / denominator * np.sqrt(spread)
    return np.maximum(center - half_width, 0.0), np.minimum(center + half_width, 1.0)


def confidence_band(hist, curve, level=CI_LEVEL, min_per_bin=1):
    """Attach pointwise confidence bands to a fitted curve

    Every bin with data gets the Wilson interval of its raw proportion
    at the bin center knot, widened where needed to contain the fitted
    value. The unwidened interval is kept in ``wilson_lo`` and
    ``wilson_hi``. The endpoint knots and empty bins get no band.

    Args:
        hist (PerformanceHistogram): Histogram the curve was fitted to
        curve (PerformanceCurve): Curve from fit_monotone_curve()
        level (float): Confidence level, 0.83 by default.
        min_per_bin (int): Bins with fewer observations get no band.

    Returns:
        PerformanceCurve, a copy with the band.
    """
    expected = np.concatenate([[0.0], hist.bin_centers(), [1.0]])
    knots = curve.table["v"].values
    if len(knots) != len(expected) or not np.allclose(knots, expected):
        raise ValueError("Curve knots do not match the bins of the histogram")
    banded = hist.count >= max(1, min_per_bin)
    lo = np.full(len(knots), np.nan)
    hi = np.full(len(knots), np.nan)
    wilson_lo = np.full(len(knots), np.nan)
    wilson_hi = np.full(len(knots), np.nan)
    if banded.any():
        inner = np.flatnonzero(banded) + 1
        wilson_lo[inner], wilson_hi[inner] = wilson_interval(
            hist.correct[banded], hist.count[banded], level
        )
        values = curve.table["value"].values[inner]
        lo[inner] = np.minimum(wilson_lo[inner], values)
        hi[inner] = np.maximum(wilson_hi[inner], values)
    logger.debug("Band at level %g on %d bins", level, int(banded.sum()))
    return curve.with_band(lo, hi, wilson_lo=wilson_lo, wilson_hi=wilson_hi)


def write_curve_csv(curve, path):
    """Export a curve as CSV with columns v, value, band_lo, band_hi,
    wilson_lo and wilson_hi

    Band and Wilson columns are empty at knots without them.
    """
    dframe = curve.table.rename(columns={"lo": "band_lo", "hi": "band_hi"})
    dframe[CSV_COLUMNS].to_csv(path, index=False, na_rep="")
    logger.info("Wrote curve to %s", str(path))


def read_curve_csv(path):
    """Read a curve written by ``write_curve_csv()``

    Returns:
        PerformanceCurve
    """
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    dframe = pd.read_csv(path)
    missing = set(CSV_COLUMNS[:2]) - set(dframe.columns)
    if missing:
        raise ValueError(
            "Curve file {} lacks columns {}".format(path, ", ".join(sorted(missing)))
        )
    bands = {
        arg: dframe[col].values if col in dframe else None
        for arg, col in [
            ("lo", "band_lo"),
            ("hi", "band_hi"),
            ("wilson_lo", "wilson_lo"),
            ("wilson_hi", "wilson_hi"),
        ]
    }
    return PerformanceCurve(dframe["v"].values, dframe["value"].values, **bands)


def plot_curves(curves, labels=None, mpl_ax=None, colors=None):
    """Plot performance curves with their confidence bands

    If mpl_ax is supplied, the curves are drawn on that, otherwise a
    new figure is made.

    Args:
        curves (list of PerformanceCurve)
        labels (list of str): Legend entries, one per curve
        mpl_ax (matplotlib.axes.Axes): Axis to draw on
        colors (list of str): Matplotlib colors, one per curve

    Returns:
        matplotlib.figure.Figure
    """
    # pylint: disable=import-outside-toplevel
    # Lazy import for speed reasons.
    import matplotlib.pyplot as plt

    if labels is None:
        labels = [""] * len(curves)
    if colors is None:
        colors = ["C{}".format(idx % 10) for idx in range(len(curves))]
    if mpl_ax is None:
        fig, useax = plt.subplots()
    else:
        useax = mpl_ax
        fig = useax.figure
    for curve, label, color in zip(curves, labels, colors):
        table = curve.table
        useax.plot(table["v"], table["value"], color=color, label=label)
        if curve.has_band:
            banded = table["lo"].notna()
            useax.fill_between(
                table["v"][banded],
                table["lo"][banded],
                table["hi"][banded],
                color=color,
                alpha=0.25,
                linewidth=0,
            )
    useax.set_xlim(0, 1)
    useax.set_ylim(0, 1.02)
    useax.set_xlabel("Visual change")
    useax.set_ylabel("Performance")
    if any(labels):
        useax.legend()
    return fig
