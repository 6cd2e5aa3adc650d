"""Statistics for finding visually similar corruptions

Two corruptions are similar when humans can not tell their outputs
apart in a distinguishing experiment, judged by an exact binomial test,
or when the confidence bands of the human performance curves overlap.
Corruptions that are pairwise similar form a class, and human curves
may be reused within a class.
"""

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import logsumexp
from scipy.stats import binom

from pyvcr.constants import SIMILARITY_THRESHOLD


logger = logging.getLogger(__name__)

ALTERNATIVES = ["two-sided", "greater", "less"]

TRIALS_COLUMNS = ["corruption_a", "corruption_b", "n", "k"]

# Relative slack when comparing outcome probabilities to P(k)
RELATIVE_TOLERANCE = 1e-7


class DistinguishTrialSet(object):
    """Outcome of a distinguishing experiment for a pair of corruptions

    Args:
        corruption_a (str)
        corruption_b (str)
        n (int): Number of trials, at least 1
        k (int): Number of trials where the pair was told apart correctly
    """

    def __init__(self, corruption_a, corruption_b, n, k):
        if int(n) != n or int(k) != k:
            raise ValueError("Trial counts must be integers")
        if n < 1 or not 0 <= k <= n:
            raise ValueError(
                "Need n >= 1 and 0 <= k <= n, got n={}, k={} for {} and {}".format(
                    n, k, corruption_a, corruption_b
                )
            )
        self.corruption_a = corruption_a
        self.corruption_b = corruption_b
        self.n = int(n)
        self.k = int(k)

    @property
    def pair(self):
        """The two corruption names"""
        return (self.corruption_a, self.corruption_b)

    def __repr__(self):
        return "DistinguishTrialSet({}, {}, n={}, k={})".format(
            self.corruption_a, self.corruption_b, self.n, self.k
        )


def binomial_two_sided_pvalue(n, k, p=0.5, alternative="two-sided"):
    """Exact binomial test p-value

    The two-sided value sums the probabilities of all outcomes that are
    at most as likely as k (the minimum-likelihood method). Probabilities
    are handled as logarithms, so n can be large.

    Args:
        n (int): Number of trials
        k (int): Number of successes
        p (float): Success probability under the null hypothesis
        alternative (str): "two-sided", or "greater"/"less" for the
            one-sided tests P(X >= k) and P(X <= k).

    Returns:
        float in [0, 1]
    """
    if alternative not in ALTERNATIVES:
        raise ValueError(
            "Unknown alternative {}, use one of {}".format(alternative, ALTERNATIVES)
        )
    if int(n) != n or int(k) != k or n < 0 or not 0 <= k <= n:
        raise ValueError("Need integers 0 <= k <= n, got n={}, k={}".format(n, k))
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1), got {}".format(p))
    n = int(n)
    k = int(k)
    if alternative == "greater":
        return float(min(1.0, binom.sf(k - 1, n, p)))
    if alternative == "less":
        return float(min(1.0, binom.cdf(k, n, p)))

    log_pmf = binom.logpmf(np.arange(n + 1), n, p)
    selected = log_pmf <= log_pmf[k] + np.log1p(RELATIVE_TOLERANCE)
    if selected.all():
        return 1.0
    return float(min(1.0, np.exp(logsumexp(log_pmf[selected]))))


def is_similar_pair(
    trials, threshold=SIMILARITY_THRESHOLD, alternative="two-sided"
):
    """Decide whether humans could not distinguish two corruptions

    The pair is similar when the binomial p-value against guessing
    (p = 0.5) is at least the threshold.

    Args:
        trials (DistinguishTrialSet)
        threshold (float): Acceptance level for the p-value
        alternative (str): See binomial_two_sided_pvalue()

    Returns:
        tuple of (bool, float), the decision and the p-value.
    """
    pvalue = binomial_two_sided_pvalue(
        trials.n, trials.k, 0.5, alternative=alternative
    )
    return pvalue >= threshold, pvalue


def curves_overlap(curve_a, curve_b, v_min=0.0):
    """Check whether the confidence bands of two curves overlap

    The Wilson intervals around the raw bin proportions are compared
    where the curves carry them, the band otherwise.

    Args:
        curve_a (PerformanceCurve): Curve with band
        curve_b (PerformanceCurve): Curve with band on the same knots
        v_min (float): Knots below this Δv are not considered

    Returns:
        tuple of (bool, pd.DataFrame). The bool is True if the closed
        intervals intersect at every knot where both curves have a
        band. The dataframe has columns v, lo_a, hi_a, lo_b, hi_b and
        overlap for these knots.
    """
    table_a = curve_a.table
    table_b = curve_b.table
    if len(table_a) != len(table_b) or not np.allclose(table_a["v"], table_b["v"]):
        raise ValueError("Curves must share the same knots to compare bands")
    lo_a, hi_a = curve_a.interval_bounds()
    lo_b, hi_b = curve_b.interval_bounds()
    shared = ~np.isnan(lo_a) & ~np.isnan(lo_b) & (table_a["v"].values >= v_min)
    if not shared.any():
        raise ValueError("No knots where both curves have a confidence band")
    result = pd.DataFrame(
        {
            "v": table_a["v"].values[shared],
            "lo_a": lo_a[shared],
            "hi_a": hi_a[shared],
            "lo_b": lo_b[shared],
            "hi_b": hi_b[shared],
        }
    )
    result["overlap"] = np.maximum(result["lo_a"], result["lo_b"]) <= np.minimum(
        result["hi_a"], result["hi_b"]
    )
    logger.info(
        "Bands overlap at %d of %d knots", int(result["overlap"].sum()), len(result)
    )
    return bool(result["overlap"].all()), result


def check_pairwise(pairwise):
    """Raise ValueError unless pairwise is a valid similarity matrix

    Args:
        pairwise (pd.DataFrame): Booleans, index and columns are the
            same corruption names.
    """
    if sorted(pairwise.index) != sorted(pairwise.columns):
        raise ValueError("Similarity matrix needs equal row and column names")
    matrix = pairwise.loc[pairwise.columns, pairwise.columns].values.astype(bool)
    if not np.array_equal(matrix, matrix.T):
        raise ValueError("Similarity matrix is asymmetric")
    if not matrix.diagonal().all():
        raise ValueError("Every corruption must be similar to itself")


def similarity_classes(pairwise):
    """Group corruptions into classes of pairwise similar corruptions

    Names are visited in sorted order and each joins the first class
    whose every member it is similar to, or else starts a new class.

    Args:
        pairwise (pd.DataFrame): Symmetric boolean matrix with corruption
            names as index and columns, see pairwise_from_trials().

    Returns:
        list of lists of names, each corruption in exactly one class.
    """
    check_pairwise(pairwise)
    classes = []
    for name in sorted(pairwise.columns):
        for cls in classes:
            if all(bool(pairwise.loc[name, member]) for member in cls):
                cls.append(name)
                break
        else:
            classes.append([name])
    logger.info("Found %d classes among %d corruptions", len(classes), len(pairwise))
    return classes


def pairwise_from_trials(
    trial_sets, names=None, threshold=SIMILARITY_THRESHOLD, alternative="two-sided"
):
    """Build p-value and similarity matrices from trial sets

    Pairs without trials are taken as not similar.

    Args:
        trial_sets (list of DistinguishTrialSet)
        names (list of str): Corruptions to include, all names in the
            trials if None.
        threshold (float): Acceptance level, see is_similar_pair()
        alternative (str): See binomial_two_sided_pvalue()

    Returns:
        tuple of two pd.DataFrame, p-values (NaN for untested pairs)
        and similarity flags.
    """
    if names is None:
        names = sorted(
            {name for trials in trial_sets for name in trials.pair}
        )
    pvalues = pd.DataFrame(np.nan, index=names, columns=names)
    similar = pd.DataFrame(False, index=names, columns=names)
    for name in names:
        similar.loc[name, name] = True
    for trials in trial_sets:
        name_a, name_b = trials.pair
        if name_a not in names or name_b not in names:
            logger.warning("Ignoring trials for unknown pair %s, %s", name_a, name_b)
            continue
        if name_a == name_b:
            logger.warning("Ignoring trials of %s against itself", name_a)
            continue
        decision, pvalue = is_similar_pair(trials, threshold, alternative)
        if not np.isnan(pvalues.loc[name_a, name_b]):
            raise ValueError("Duplicate trials for {} and {}".format(name_a, name_b))
        for (row, col) in [(name_a, name_b), (name_b, name_a)]:
            pvalues.loc[row, col] = pvalue
            similar.loc[row, col] = decision
    untested = int(pvalues.isna().values.sum()) - len(names)
    if untested:
        logger.warning("%d pairs without trials, taken as not similar", untested // 2)
    return pvalues, similar


def load_trials(path):
    """Read a trials CSV with columns corruption_a, corruption_b, n, k

    Returns:
        list of DistinguishTrialSet
    """
    path = Path(path)
    if not path.is_file():
        raise IOError("File not found " + str(path))
    dframe = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    dframe.columns = [col.strip() for col in dframe.columns]
    missing = set(TRIALS_COLUMNS) - set(dframe.columns)
    if missing:
        logger.error("Trials file %s lacks columns %s", str(path), str(sorted(missing)))
        raise ValueError(
            "Trials file {} lacks columns {}".format(path, ", ".join(sorted(missing)))
        )
    trial_sets = []
    for _, row in dframe.iterrows():
        try:
            n = int(row["n"])
            k = int(row["k"])
        except ValueError as err:
            raise ValueError(
                "Non-integer trial counts in {}: {}".format(path, err)
            ) from err
        trial_sets.append(
            DistinguishTrialSet(
                row["corruption_a"].strip(), row["corruption_b"].strip(), n, k
            )
        )
    logger.info("Loaded %d trial sets from %s", len(trial_sets), str(path))
    return trial_sets


def transfer_source(target, classes, available):
    """Choose the corruption whose human curve can stand in for target

    Args:
        target (str): Corruption without (or with) human data
        classes (list of list of str): Output of similarity_classes()
        available (iterable of str): Corruptions with human data

    Returns:
        str, target itself if available, else the first available member
        of its class in sorted order.
    """
    available = set(available)
    if target in available:
        return target
    for cls in classes:
        if target in cls:
            candidates = sorted(available.intersection(cls))
            if candidates:
                logger.info("Human data for %s taken from %s", target, candidates[0])
                return candidates[0]
    raise ValueError(
        "No human data for {} or any corruption similar to it".format(target)
    )
