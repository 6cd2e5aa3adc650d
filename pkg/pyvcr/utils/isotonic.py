"""Monotonicity support functions for performance curves"""

import logging

import numpy as np

from pyvcr.constants import EPSILON as epsilon


logger = logging.getLogger(__name__)


def isotonic_decreasing(values, weights=None):
    """Weighted least squares fit of a non-increasing sequence.

    Pool-adjacent-violators: scanning left to right, a value larger than
    the block before it is merged with that block into their weighted
    mean, and merging continues backwards as long as the new block
    violates the order. The result is the unique minimizer of
    sum(w_i * (y_i - f_i)**2) over non-increasing f.

    Args:
        values (np.ndarray or list): Values to fit
        weights (np.ndarray or list): Positive weights, all ones if None.

    Returns:
        np.ndarray, same length as values.
    """
    values = np.asarray(values, dtype=np.float64)
    if weights is None:
        weights = np.ones_like(values)
    weights = np.asarray(weights, dtype=np.float64)
    if values.shape != weights.shape or values.ndim != 1:
        raise ValueError("values and weights must be vectors of equal length")
    if (weights <= 0).any():
        raise ValueError("Weights must be positive")

    # Each block is [mean, total weight, number of points]
    blocks = []
    for value, weight in zip(values, weights):
        blocks.append([value, weight, 1])
        while len(blocks) > 1 and blocks[-2][0] < blocks[-1][0]:
            mean2, weight2, size2 = blocks.pop()
            mean1, weight1, size1 = blocks[-1]
            total = weight1 + weight2
            mean = (mean1 * weight1 + mean2 * weight2) / total
            blocks[-1] = [mean, total, size1 + size2]
    if not blocks:
        return np.array([])
    return np.concatenate([np.full(size, mean) for (mean, _, size) in blocks])


def clip_accumulate(values, lower=None, upper=None):
    """Make a vector non-increasing by a running minimum, and clip it.

    Args:
        values (np.ndarray or list): Vector of numbers
        lower (float): Optional lower limit
        upper (float): Optional upper limit

    Returns:
        np.ndarray, copy of the input.
    """
    values = np.minimum.accumulate(np.asarray(values, dtype=np.float64))
    if lower is not None or upper is not None:
        values = np.clip(values, lower, upper)
    return values


def moving_average(values, window=3):
    """Centered moving average, the window shrinking at both ends

    Args:
        values (np.ndarray): Vector of numbers
        window (int): Odd window length

    Returns:
        np.ndarray
    """
    if window < 1 or window % 2 != 1:
        raise ValueError("Window length must be odd and positive")
    values = np.asarray(values, dtype=np.float64)
    half = window // 2
    padded_sum = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(len(values))
    start = np.maximum(idx - half, 0)
    stop = np.minimum(idx + half + 1, len(values))
    return (padded_sum[stop] - padded_sum[start]) / (stop - start)


def check_decreasing(values, colname=""):
    """Raise a ValueError if a vector increases by more than the slack

    Args:
        values (np.ndarray or list): Vector of numbers
        colname (str): Included in any error message.
    """
    steps = np.diff(np.asarray(values, dtype=np.float64))
    if steps.size and steps.max() > epsilon:
        raise ValueError(
            "Values in {} increase by {} somewhere".format(colname, steps.max())
        )


def check_limits(values, lower=None, upper=None, colname=""):
    """Raise a ValueError if a vector goes beyond the limits, equality allowed.

    Args:
        values (np.ndarray or list): Vector of numbers
        lower (float): Optional lower limit
        upper (float): Optional upper limit
        colname (str): Included in any error message.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return
    if upper is not None and (values > upper).any():
        raise ValueError("Values larger than upper limit in {}".format(colname))
    if lower is not None and (values < lower).any():
        raise ValueError("Values smaller than lower limit in {}".format(colname))
