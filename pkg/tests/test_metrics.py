"""Test module for VCR estimation, lead areas and the HMRI/MRSI indices"""

import json

import numpy as np

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from pyvcr.curves import PerformanceCurve, integrate_curve
from pyvcr.metrics import (
    ComparisonReport,
    VcrReport,
    classify_scenario,
    compare,
    estimate_vcr,
    hmri,
    lead_area,
    mrsi,
    read_report,
    write_json,
)
from pyvcr.utils.testing import (
    constant_curve,
    dense_quadrature,
    linear_curve,
    make_manifest,
    random_monotone_curve,
    step_subject,
    synthetic_observations,
)


def report_for(curve, subject="model", corruption="gaussian_noise"):
    """A VcrReport wrapping a hand-made curve"""
    return VcrReport(subject, corruption, "accuracy", integrate_curve(curve), curve)


def refine(curve, num=5):
    """The same curve with extra knots between the existing ones"""
    knots = curve.table["v"].values
    extra = np.concatenate(
        [
            np.linspace(left, right, num + 2)[1:-1]
            for left, right in zip(knots, knots[1:])
        ]
    )
    finer = np.union1d(knots, extra)
    return PerformanceCurve(finer, np.minimum.accumulate(curve(finer)))


@pytest.mark.parametrize(
    "probability, anchor_left, expected",
    [
        (lambda v: np.ones_like(v), 1.0, 1.0),
        (lambda v: np.zeros_like(v), 0.0, 0.0),
    ],
)
def test_estimate_extremes(probability, anchor_left, expected):
    """A subject always right has VCR 1, one always wrong has VCR 0"""
    observations = synthetic_observations(probability, 2000, seed=1)
    manifest = make_manifest([obs[0] for obs in observations])
    report = estimate_vcr(manifest, observations, anchor_left)
    assert report.r_hat == pytest.approx(expected, abs=1e-12)
    assert report.mean_performance == expected
    assert report.num_observations == 2000


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_estimate_step_subject(seed):
    """Right iff Δv < 0.5 gives a VCR near 0.5"""
    observations = synthetic_observations(step_subject, 5000, seed=seed)
    manifest = make_manifest([obs[0] for obs in observations])
    report = estimate_vcr(manifest, observations, 1.0, subject="step")
    assert report.r_hat == pytest.approx(0.5, abs=0.03)
    assert report.subject == "step"
    assert report.corruption == "gaussian_noise"
    assert report.curve.has_band


def test_estimate_linear_subject():
    """Probability 1 - Δv gives a VCR near 0.5"""
    observations = synthetic_observations(lambda v: 1 - v, 5000, seed=3)
    manifest = make_manifest([obs[0] for obs in observations])
    report = estimate_vcr(manifest, observations, 1.0)
    assert report.r_hat == pytest.approx(0.5, abs=0.03)
    assert report.r_hat == pytest.approx(integrate_curve(report.curve), abs=1e-12)


def test_estimate_errors():
    """No observations, unknown properties"""
    manifest = make_manifest([0.5])
    with pytest.raises(ValueError, match="No observations"):
        estimate_vcr(manifest, [], 1.0)
    with pytest.raises(ValueError, match="Unknown property"):
        estimate_vcr(manifest, [(0.5, True)] * 30, 1.0, property="speed")


def test_lead_area_cases():
    """Hand-computed areas, including a crossing"""
    falling = linear_curve(1.0, 0.0)
    half = constant_curve(0.5)
    assert lead_area(falling, falling) == 0.0
    assert lead_area(constant_curve(1.0), constant_curve(0.0)) == 1.0
    assert lead_area(constant_curve(0.0), constant_curve(1.0)) == 0.0
    assert lead_area(falling, half) == pytest.approx(0.125, abs=1e-15)
    assert lead_area(half, falling) == pytest.approx(0.125, abs=1e-15)
    # Crossings between knots of different curves
    early = PerformanceCurve([0, 0.2, 1], [1, 0.2, 0.0])
    assert lead_area(falling, early) == pytest.approx(
        dense_quadrature(lambda v: np.maximum(falling(v) - early(v), 0)), abs=1e-8
    )


def test_lead_area_oracle():
    """Exact lead areas equal dense quadrature of the positive part"""
    rng = np.random.default_rng(12)
    for _ in range(50):
        one = random_monotone_curve(rng)
        two = random_monotone_curve(rng)
        assert lead_area(one, two) == pytest.approx(
            dense_quadrature(lambda v: np.maximum(one(v) - two(v), 0), num=400000),
            abs=1e-6,
        )


def test_overlap_identity():
    """A(h) - A(h > m) = A(m) - A(m > h), the area under both curves"""
    rng = np.random.default_rng(0)
    for _ in range(1000):
        human = random_monotone_curve(rng)
        model = random_monotone_curve(rng)
        assert integrate_curve(human) - lead_area(human, model) == pytest.approx(
            integrate_curve(model) - lead_area(model, human), abs=1e-12
        )


def test_knot_refinement():
    """Extra knots on the same function change no area"""
    rng = np.random.default_rng(6)
    for _ in range(50):
        human = random_monotone_curve(rng)
        model = random_monotone_curve(rng)
        assert lead_area(refine(human), model) == pytest.approx(
            lead_area(human, model), abs=1e-12
        )
        assert hmri(refine(human), refine(model, 3)) == pytest.approx(
            hmri(human, model), abs=1e-12
        )


def test_indices_constants():
    """HMRI and MRSI of hand-made curve pairs"""
    falling = linear_curve(1.0, 0.0)
    half = constant_curve(0.5)
    assert hmri(falling, half) == pytest.approx(0.75)
    assert mrsi(falling, half) == pytest.approx(0.25)

    assert hmri(constant_curve(0.9), half) == pytest.approx(1 - 0.4 / 0.9)
    assert mrsi(constant_curve(0.9), half) == 0.0
    assert hmri(half, constant_curve(0.9)) == 1.0
    assert mrsi(half, constant_curve(0.9)) == pytest.approx(0.4 / 0.9)

    with pytest.raises(ValueError, match="human curve"):
        hmri(constant_curve(0.0), half)
    with pytest.raises(ValueError, match="model curve"):
        mrsi(half, constant_curve(0.0))


@settings(deadline=None, max_examples=100)
@given(st.integers(0, 2 ** 32 - 1))
def test_indices_range(seed):
    """Both indices are in [0, 1]"""
    rng = np.random.default_rng(seed)
    human = random_monotone_curve(rng)
    model = random_monotone_curve(rng)
    if integrate_curve(human) > 0 and integrate_curve(model) > 0:
        assert 0 <= hmri(human, model) <= 1
        assert 0 <= mrsi(human, model) <= 1


@pytest.mark.parametrize(
    "hmri_value, mrsi_value, expected",
    [
        (1.0, 0.0, "model-dominates"),
        (1.0, 0.3, "model-dominates"),
        (1.0 - 1e-13, 0.0, "model-dominates"),
        (0.6, 0.0, "human-dominates"),
        (0.6, 1e-13, "human-dominates"),
        (0.6, 0.2, "mixed"),
    ],
)
def test_classify_scenario(hmri_value, mrsi_value, expected):
    """Scenario names from the indices"""
    assert classify_scenario(hmri_value, mrsi_value) == expected


def test_compare():
    """Comparison reports and their dictionaries"""
    human = report_for(linear_curve(1.0, 0.0), subject="human")
    model = report_for(constant_curve(0.5))
    comparison = compare(human, model)
    assert comparison.scenario == "mixed"
    assert comparison.hmri == pytest.approx(0.75)
    assert comparison.overlap == pytest.approx(0.375)
    dct = comparison.to_dict()
    assert dct["subject"] == "model" and dct["human_subject"] == "human"
    assert dct["areas"]["a_h_gt_m"] == pytest.approx(0.125)
    assert set(dct) >= {"hmri", "mrsi", "areas", "scenario", "r_hat"}

    same = compare(human, report_for(linear_curve(1.0, 0.0)))
    assert (same.hmri, same.mrsi, same.scenario) == (1.0, 0.0, "model-dominates")

    better = compare(human, report_for(constant_curve(1.0)))
    assert better.scenario == "model-dominates"
    worse = compare(human, report_for(PerformanceCurve([0, 1], [0.9, 0])))
    assert worse.scenario == "human-dominates"


def test_compare_corruption_classes():
    """Human curves transfer between corruptions of one class"""
    human = report_for(constant_curve(0.8), subject="human", corruption="box_blur")
    model = report_for(constant_curve(0.6), corruption="gaussian_blur")
    with pytest.raises(ValueError, match="Can not compare"):
        compare(human, model)
    classes = [["box_blur", "gaussian_blur"], ["gaussian_noise"]]
    assert compare(human, model, classes=classes).scenario == "human-dominates"
    with pytest.raises(ValueError):
        compare(human, model, classes=[["box_blur"], ["gaussian_blur"]])

    consistency = VcrReport(
        "model", "box_blur", "consistency", 0.6, constant_curve(0.6)
    )
    with pytest.raises(ValueError, match="accuracy against consistency"):
        compare(human, consistency)


def test_report_validation():
    """Unknown properties, scenarios and inconsistent areas"""
    curve = constant_curve(0.5)
    with pytest.raises(ValueError, match="does not match"):
        VcrReport("m", "c", "accuracy", 0.6, curve)
    with pytest.raises(ValueError):
        VcrReport("m", "c", "latency", 0.5, curve)
    with pytest.raises(ValueError):
        ComparisonReport(0.5, 0.5, 0, 0, 1, 0, "tie")
    with pytest.raises(ValueError):
        ComparisonReport(0.5, 0.5, 0.6, 0, 1, 0, "mixed")


def test_report_json(tmpdir):
    """Reports survive JSON, NaN band values as null"""
    observations = synthetic_observations(step_subject, 3000, seed=9)
    manifest = make_manifest([obs[0] for obs in observations])
    report = estimate_vcr(manifest, observations, 1.0, subject="step")
    dct = report.to_dict()
    assert dct["curve"]["band_lo"][0] is None
    assert dct["anchor_left"] == 1.0 and dct["anchor_right"] is None
    assert "isotonic" in dct["fit"]

    path = tmpdir / "report.json"
    write_json(dct, path)
    text = path.read_text("utf-8")
    assert text.endswith("}\n")
    assert "NaN" not in text
    assert json.loads(text) == dct
    assert read_report(path).to_dict() == dct
    assert VcrReport.from_dict(dct).to_dict() == dct

    with pytest.raises(ValueError, match="lacks field"):
        VcrReport.from_dict({"subject": "x"})
    with pytest.raises(ValueError, match="must be a number"):
        VcrReport.from_dict(dict(dct, r_hat="0.5"))
    with pytest.raises(ValueError, match="Malformed"):
        VcrReport.from_dict(dict(dct, curve={"v": 0.5, "value": 0.5}))
    with pytest.raises(ValueError, match="must be a number"):
        VcrReport("m", "c", "accuracy", None, constant_curve(0.5))
    (tmpdir / "bad.json").write_text("{", "utf-8")
    with pytest.raises(ValueError, match="Invalid JSON"):
        read_report(tmpdir / "bad.json")
    with pytest.raises(IOError):
        read_report(tmpdir / "nothere.json")
