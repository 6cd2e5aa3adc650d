"""
Run this module from command line to run a few
tests intended for human inspection

 $ python interactive_tests.py

If you want to run individual tests, import this module in
a Python session and run the functions manually.
"""

import numpy as np

from matplotlib import pyplot as plt

from pyvcr.corruptions import apply_corruption, registry
from pyvcr.curves import bin_centers, bin_observations, plot_curves, raw_performance
from pyvcr.image import Image, to_luminance, to_storage
from pyvcr.iqa import delta_v
from pyvcr.metrics import compare, estimate_vcr
from pyvcr.utils.testing import (
    make_manifest,
    step_subject,
    synthetic_observations,
    texture,
)


def corruption_strips(size=96, steps=5):
    """One row per corruption, strength increasing to the right

    The first column is the original, the others walk the parameter
    domain from its lower to its upper end. Titles give the visual change.
    """
    original = Image(to_storage(texture(size, seed=3)))
    specs = registry()
    _, axes = plt.subplots(len(specs), steps + 1, figsize=(2 * steps, 2 * len(specs)))
    for row, spec in zip(axes, specs):
        row[0].imshow(original.pixels)
        row[0].set_ylabel(spec.name, rotation=0, ha="right")
        for mpl_ax, tparam in zip(row[1:], np.linspace(0, 1, steps)):
            params = [lo + tparam * (hi - lo) for (lo, hi) in spec.param_domains]
            corrupted = apply_corruption(spec, params, original, rng_seed=0)
            change = delta_v(to_luminance(original), to_luminance(corrupted))
            mpl_ax.imshow(corrupted.pixels)
            mpl_ax.set_title("{:.3f}".format(change), fontsize=8)
        for mpl_ax in row:
            mpl_ax.set_xticks([])
            mpl_ax.set_yticks([])
    plt.tight_layout()
    plt.show()


def fitted_curves(num=3000):
    """Raw bin values and fitted curves for a few synthetic subjects"""
    subjects = {
        "step": step_subject,
        "linear": lambda v: 1 - v,
        "logistic": lambda v: 1 / (1 + np.exp(20 * (v - 0.3))),
        "sqrt": lambda v: 0.9 - 0.8 * np.sqrt(v),
    }
    _, mpl_ax = plt.subplots()
    reports = []
    for idx, (name, probability) in enumerate(subjects.items()):
        observations = synthetic_observations(probability, num, seed=idx)
        manifest = make_manifest([obs[0] for obs in observations])
        anchor = float(probability(np.array([0.0]))[0])
        report = estimate_vcr(manifest, observations, anchor, subject=name)
        raw = raw_performance(bin_observations(observations))
        mpl_ax.plot(
            bin_centers(len(raw)), raw, ".", color="C{}".format(idx), alpha=0.6
        )
        reports.append(report)
        print("{}: VCR {:.4f}".format(name, report.r_hat))
    plot_curves(
        [report.curve for report in reports],
        labels=["{} {:.3f}".format(rep.subject, rep.r_hat) for rep in reports],
        mpl_ax=mpl_ax,
    )
    mpl_ax.set_title("Dots are raw bins, lines fitted curves with bands")
    plt.show()

    comparison = compare(reports[1], reports[2])
    print(
        "linear as human, logistic as model: HMRI {:.4f}, MRSI {:.4f}, {}".format(
            comparison.hmri, comparison.mrsi, comparison.scenario
        )
    )


def main():
    """Entry point for interactive tests, will run
    some code where the user is supposed to look at
    plots and verify visually"""

    print("")
    print("-- ******************************************")
    print("-- Manual visual check of the corruptions")
    print("--  Check:")
    print("--   * images degrade smoothly to the right")
    print("--   * visual change grows along each row")
    print("-- (close plot window to continue)")
    corruption_strips()

    print("")
    print("-- ******************************************")
    print("-- Manual visual check of curve fitting")
    print("--  Check:")
    print("--   * curves follow the raw bins and never increase")
    print("--   * bands contain the curves")
    print("-- (close plot window to continue)")
    fitted_curves()


if __name__ == "__main__":
    main()
