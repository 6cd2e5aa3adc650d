"""Command line tool for pyvcr"""

import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from pyvcr import __version__
from pyvcr.constants import (
    CI_LEVEL,
    MIN_PER_BIN,
    NUM_BINS,
    NUM_ENTRY_CLASSES,
    SIMILARITY_THRESHOLD,
    VIF_NOISE_VAR,
    VIF_SCALES,
)
from pyvcr.corruptions import get_spec, load_spec_overrides, registry
from pyvcr.curves import plot_curves, read_curve_csv, write_curve_csv
from pyvcr.image import load_image, to_luminance
from pyvcr.ingest import (
    join_accuracy,
    join_consistency,
    parse_ground_truth,
    parse_label_map,
    parse_predictions,
)
from pyvcr.iqa import VifConfig, delta_v
from pyvcr.metrics import PROPERTIES, compare, estimate_vcr, read_report, write_json
from pyvcr.similarity import (
    ALTERNATIVES,
    curves_overlap,
    load_trials,
    pairwise_from_trials,
    similarity_classes,
)
from pyvcr.testset import coverage, generate_testset, load_corpus, read_manifest

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

EPILOG = """
A typical run generates a test set per corruption with 'generate', lets
models (and humans) label the corrupted images, and turns the labels into
VCR reports with 'estimate'. Human and model reports on the same
corruption are compared with 'compare'.

Prediction files are CSV with the header sample_id,label. Predictions on
the clean originals follow in a second section with the header
image_id,label, or are given in a separate file with --clean. Ground truth
is CSV with image_id,label, a label map CSV with fine_label,entry_label.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
"""


class VcrArgumentParser(argparse.ArgumentParser):
    """Argument parser exiting with status 1 on usage errors"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


def _positive_int(value):
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return number


def _bins(value):
    number = int(value)
    if number < 2:
        raise argparse.ArgumentTypeError("need at least 2 bins")
    return number


def _level(value):
    number = float(value)
    if not 0 < number < 1:
        raise argparse.ArgumentTypeError("must be strictly between 0 and 1")
    return number


def _unit_interval(value):
    number = float(value)
    if not 0 <= number <= 1:
        raise argparse.ArgumentTypeError("must be in [0, 1]")
    return number


def _seed(value):
    number = int(value)
    if not 0 <= number < 2 ** 64:
        raise argparse.ArgumentTypeError("must be an integer in [0, 2**64)")
    return number


def _add_common_arguments(parser):
    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Print informational messages while processing input",
    )
    parser.add_argument(
        "--debug",
        action="store_true",
        help="Print debug information",
    )


def _add_vif_arguments(parser):
    parser.add_argument(
        "--vif-scales",
        type=_positive_int,
        default=VIF_SCALES,
        help="Number of scales in the VIF pyramid. Default {}".format(VIF_SCALES),
    )
    parser.add_argument(
        "--vif-noise-var",
        type=float,
        default=VIF_NOISE_VAR,
        help="Variance of the visual noise in VIF. Default {}".format(VIF_NOISE_VAR),
    )


def _add_binning_arguments(parser):
    parser.add_argument(
        "--bins",
        type=_bins,
        default=NUM_BINS,
        help="Number of visual change bins (M). Default {}".format(NUM_BINS),
    )
    parser.add_argument(
        "--min-per-bin",
        type=_positive_int,
        default=MIN_PER_BIN,
        help="Minimum observations for a bin to count (L). Default {}".format(
            MIN_PER_BIN
        ),
    )


def get_parser():
    """Construct the argparse parser for the command line script.

    Returns:
        argparse.ArgumentParser
    """
    parser = VcrArgumentParser(
        prog="pyvcr",
        description=(
            "pyvcr (" + __version__ + ") measures visually-continuous corruption "
            "robustness of image classifiers, relative to humans."
        ),
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--version",
        action="version",
        version="%(prog)s (version " + __version__ + ")",
    )
    subparsers = parser.add_subparsers(dest="subcommand", metavar="subcommand")
    subparsers.required = True

    generate = subparsers.add_parser(
        "generate", help="Generate a corruption test set from a corpus of images"
    )
    generate.add_argument("corpus", help="Directory with PNG/PPM/PGM images")
    generate.add_argument(
        "--corruption",
        required=True,
        help="Corruption name, one of: "
        + ", ".join(spec.name for spec in registry()),
    )
    generate.add_argument(
        "--n", type=_positive_int, required=True, help="Number of samples"
    )
    generate.add_argument("--seed", type=_seed, default=0, help="Master seed")
    generate.add_argument(
        "--spec", default=None, help="JSON file overriding parameter domains"
    )
    generate.add_argument(
        "--workers", type=_positive_int, default=1, help="Number of threads"
    )
    generate.add_argument("--out", required=True, help="Output directory")
    _add_vif_arguments(generate)
    _add_common_arguments(generate)

    delta = subparsers.add_parser(
        "delta-v", help="Print the visual change between two images"
    )
    delta.add_argument("reference", help="Original image")
    delta.add_argument("distorted", help="Changed image")
    _add_vif_arguments(delta)
    _add_common_arguments(delta)

    cov = subparsers.add_parser(
        "coverage", help="Visual change coverage of a test set, as JSON"
    )
    cov.add_argument("manifest", help="Manifest file from generate")
    _add_binning_arguments(cov)
    cov.add_argument("--out", default="-", help="JSON file, '-' for stdout")
    _add_common_arguments(cov)

    estimate = subparsers.add_parser(
        "estimate", help="Estimate VCR of a subject from its predictions"
    )
    estimate.add_argument("manifest", help="Manifest file from generate")
    estimate.add_argument("predictions", help="Predictions CSV")
    estimate.add_argument("--clean", default=None, help="Clean predictions CSV")
    estimate.add_argument(
        "--truth", default=None, help="Ground truth CSV, needed for accuracy"
    )
    estimate.add_argument("--label-map", default=None, help="Label map CSV")
    estimate.add_argument(
        "--property", choices=PROPERTIES, default="accuracy", help="Default accuracy"
    )
    estimate.add_argument(
        "--subject", default=None, help="Subject name, predictions file stem if unset"
    )
    estimate.add_argument(
        "--anchor-left",
        type=_unit_interval,
        default=None,
        help=(
            "Curve value at zero visual change. Defaults to the clean accuracy "
            "for accuracy and 1 for consistency"
        ),
    )
    estimate.add_argument(
        "--anchor-right",
        type=_unit_interval,
        nargs="?",
        const=1.0 / NUM_ENTRY_CLASSES,
        default=None,
        help="Curve value at full visual change. Chance level 1/{} if no "
        "value is given, no anchor if the option is absent".format(
            NUM_ENTRY_CLASSES
        ),
    )
    estimate.add_argument(
        "--level", type=_level, default=CI_LEVEL, help="Confidence level of the band"
    )
    estimate.add_argument(
        "--allow-missing",
        action="store_true",
        help="Accept samples without predictions, e.g. for human data",
    )
    _add_binning_arguments(estimate)
    estimate.add_argument("--out", default=".", help="Output directory")
    _add_common_arguments(estimate)

    comp = subparsers.add_parser(
        "compare", help="Compare a model report against a human report"
    )
    comp.add_argument("human", help="Human VCR report JSON")
    comp.add_argument("model", help="Model VCR report JSON")
    comp.add_argument(
        "--classes",
        default=None,
        help="JSON from 'similar --trials', allows human reports on similar "
        "corruptions",
    )
    comp.add_argument("--out", default="-", help="JSON file, '-' for stdout")
    _add_common_arguments(comp)

    similar = subparsers.add_parser(
        "similar", help="Binomial tests and classes of similar corruptions"
    )
    source = similar.add_mutually_exclusive_group(required=True)
    source.add_argument("--trials", default=None, help="Trials CSV")
    source.add_argument(
        "--curves", nargs=2, default=None, help="Two curve CSVs with bands"
    )
    similar.add_argument(
        "--threshold",
        type=_unit_interval,
        default=SIMILARITY_THRESHOLD,
        help="Pairs with a p-value at least this are similar",
    )
    similar.add_argument(
        "--alternative", choices=ALTERNATIVES, default="two-sided"
    )
    similar.add_argument(
        "--v-min", type=_unit_interval, default=0.0, help="Band comparison from here"
    )
    similar.add_argument("--out", default="-", help="JSON file, '-' for stdout")
    _add_common_arguments(similar)

    plot = subparsers.add_parser(
        "plot-data", help="Merge report curves into one CSV for plotting"
    )
    plot.add_argument("reports", nargs="+", help="VCR report JSON files")
    plot.add_argument("--out", default="-", help="CSV file, '-' for stdout")
    plot.add_argument("--figure", default=None, help="Also render a PNG figure")
    _add_common_arguments(plot)
    return parser


def _setup_logging(verbose, debug):
    if debug:
        logging.basicConfig(level=logging.DEBUG)
        logging.getLogger("pyvcr").setLevel(logging.DEBUG)
    elif verbose:
        logging.basicConfig(level=logging.INFO)
        logging.getLogger("pyvcr").setLevel(logging.INFO)


def _emit_json(dct, out):
    if out == "-":
        sys.stdout.write(json.dumps(dct, sort_keys=True, indent=2) + "\n")
    else:
        write_json(dct, out)


def main(argv=None):
    """Endpoint for the pyvcr command line utility.

    Translates from argparse API to the pyvcr Python API.

    Returns:
        int, the exit code
    """
    parser = get_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose, args.debug)
    try:
        return SUBCOMMANDS[args.subcommand](args)
    except (ValueError, OSError, KeyError) as err:
        logger.error("%s", str(err))
        return EXIT_DATA


def generate_main(args):
    """Generate a test set, print the manifest path"""
    specs = load_spec_overrides(args.spec) if args.spec else None
    spec = get_spec(args.corruption, specs)
    manifest = generate_testset(
        load_corpus(args.corpus),
        spec,
        args.n,
        args.seed,
        args.out,
        vif_config=VifConfig(args.vif_scales, args.vif_noise_var),
        workers=args.workers,
    )
    print(str(Path(args.out) / "manifest.jsonl"))
    logger.info("Generated %d samples", len(manifest))
    return EXIT_OK


def delta_v_main(args):
    """Print the visual change between two images"""
    reference = to_luminance(load_image(args.reference))
    distorted = to_luminance(load_image(args.distorted))
    vif_config = VifConfig(args.vif_scales, args.vif_noise_var)
    value = delta_v(reference, distorted, vif_config)
    print("{:.6f}".format(value))
    return EXIT_OK


def coverage_main(args):
    """Coverage of a manifest as JSON"""
    manifest = read_manifest(args.manifest)
    value, counts = coverage(manifest, args.bins, args.min_per_bin)
    _emit_json(
        {
            "corruption": manifest.corruption,
            "coverage": value,
            "num_bins": args.bins,
            "min_per_bin": args.min_per_bin,
            "counts": [int(count) for count in counts],
        },
        args.out,
    )
    return EXIT_OK


def estimate_main(args):
    """VCR report JSON and curve CSV from predictions"""
    manifest = read_manifest(args.manifest)
    preds = parse_predictions(args.predictions, args.clean, subject=args.subject)
    lmap = parse_label_map(args.label_map) if args.label_map else None
    anchor_left = args.anchor_left
    if args.property == "accuracy":
        if args.truth is None:
            raise ValueError("Accuracy needs ground truth, use --truth")
        joined, clean_accuracy = join_accuracy(
            manifest,
            preds,
            parse_ground_truth(args.truth),
            lmap,
            allow_missing=args.allow_missing,
        )
        if anchor_left is None:
            if clean_accuracy is None:
                raise ValueError(
                    "No clean predictions in {}, give --clean or --anchor-left".format(
                        args.predictions
                    )
                )
            anchor_left = clean_accuracy
    else:
        joined = join_consistency(
            manifest, preds, lmap, allow_missing=args.allow_missing
        )
        if anchor_left is None:
            anchor_left = 1.0
    report = estimate_vcr(
        manifest,
        joined,
        anchor_left,
        property=args.property,
        subject=preds.subject,
        num_bins=args.bins,
        min_per_bin=args.min_per_bin,
        anchor_right=args.anchor_right,
        level=args.level,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = "{}-{}-{}".format(report.subject, report.corruption, report.property)
    write_json(report.to_dict(), out_dir / (stem + ".json"))
    write_curve_csv(report.curve, out_dir / (stem + ".csv"))
    print(str(out_dir / (stem + ".json")))
    return EXIT_OK


def compare_main(args):
    """ComparisonReport JSON from a human and a model report"""
    classes = None
    if args.classes:
        with open(args.classes, encoding="utf-8") as f_handle:
            try:
                content = json.load(f_handle)
            except json.JSONDecodeError as err:
                raise ValueError(
                    "Invalid JSON in {}: {}".format(args.classes, err)
                ) from err
        if not isinstance(content, dict) or "classes" not in content:
            raise ValueError("No classes in {}".format(args.classes))
        classes = content["classes"]
    comparison = compare(read_report(args.human), read_report(args.model), classes)
    _emit_json(comparison.to_dict(), args.out)
    return EXIT_OK


def similar_main(args):
    """p-values and classes from trials, or a band overlap verdict"""
    if args.trials:
        pvalues, similar = pairwise_from_trials(
            load_trials(args.trials),
            threshold=args.threshold,
            alternative=args.alternative,
        )
        names = list(pvalues.columns)
        result = {
            "threshold": args.threshold,
            "alternative": args.alternative,
            "pvalues": {
                row: {
                    col: float(pvalues.loc[row, col])
                    for col in names
                    if row != col and not pd.isna(pvalues.loc[row, col])
                }
                for row in names
            },
            "similar": {
                row: sorted(
                    col for col in names if row != col and bool(similar.loc[row, col])
                )
                for row in names
            },
            "classes": similarity_classes(similar),
        }
    else:
        overlaps, table = curves_overlap(
            read_curve_csv(args.curves[0]), read_curve_csv(args.curves[1]), args.v_min
        )
        result = {
            "overlap": overlaps,
            "v_min": args.v_min,
            "knots": [
                {"v": float(row.v), "overlap": bool(row.overlap)}
                for row in table.itertuples()
            ],
        }
    _emit_json(result, args.out)
    return EXIT_OK


def plot_data_main(args):
    """Merged CSV of report curves, optionally a figure"""
    reports = [read_report(path) for path in args.reports]
    frames = []
    for report in reports:
        frame = report.curve.table.rename(columns={"lo": "band_lo", "hi": "band_hi"})
        frame.insert(0, "property", report.property)
        frame.insert(0, "corruption", report.corruption)
        frame.insert(0, "subject", report.subject)
        frames.append(frame)
    merged = pd.concat(frames, ignore_index=True)
    if args.out == "-":
        sys.stdout.write(merged.to_csv(index=False, na_rep=""))
    else:
        merged.to_csv(args.out, index=False, na_rep="")
        logger.info("Wrote %s", args.out)
    if args.figure:
        # pylint: disable=import-outside-toplevel
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig = plot_curves(
            [report.curve for report in reports],
            labels=[
                "{} {} {}".format(report.subject, report.corruption, report.property)
                for report in reports
            ],
        )
        fig.savefig(args.figure, format="png")
        plt.close(fig)
        logger.info("Wrote %s", args.figure)
    return EXIT_OK


SUBCOMMANDS = {
    "generate": generate_main,
    "delta-v": delta_v_main,
    "coverage": coverage_main,
    "estimate": estimate_main,
    "compare": compare_main,
    "similar": similar_main,
    "plot-data": plot_data_main,
}


if __name__ == "__main__":
    sys.exit(main())
