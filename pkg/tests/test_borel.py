import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bayescond.borel import (
    DEFAULT_EPS,
    PROBES,
    DiagonalConditioningProblem,
    condition_via_variable,
    nested_event_limit,
    paradox_report,
    sup_distance,
)
from bayescond.conditional import JointDensity
from bayescond.corpus import independent_exp_joint, narrow_gaussian_joint
from bayescond.errors import GridTooCoarse, ZeroProbabilityEvent
from bayescond.measure import GridSpec, LebesgueBox, expectation, integrate

G = GridSpec(4096)
# sup |2 e^{-2v} - 4 v e^{-2v}| over v >= 0.25 is attained at v = 0.25 (sympy)
SUPDIFF_ORACLE = 0.60653065971263342

EXP = DiagonalConditioningProblem(independent_exp_joint(), "Exp(1) x Exp(1)")


@pytest.fixture(scope="module")
def limits():
    return {k: condition_via_variable(EXP, k, G) for k in ("difference", "ratio")}


@pytest.fixture(scope="module")
def report():
    return paradox_report(EXP, G)


def test_conditioners_hit_targets_on_diagonal():
    assert EXP.conditioner_targets() == {"difference": 0.0, "ratio": 0.0}


def test_difference_is_exp2(limits):
    d = limits["difference"]
    assert expectation(lambda v: v, d, G) == pytest.approx(0.5, abs=1e-3)
    np.testing.assert_allclose(d.eval(PROBES), 2 * np.exp(-2 * PROBES), atol=1e-4)


def test_ratio_is_gamma22(limits):
    d = limits["ratio"]
    assert expectation(lambda v: v, d, G) == pytest.approx(1.0, abs=1e-3)
    np.testing.assert_allclose(d.eval(PROBES), 4 * PROBES * np.exp(-2 * PROBES), atol=1e-4)


def test_limits_are_normalized(limits):
    for d in limits.values():
        assert integrate(d.eval, d.space, G) == pytest.approx(1.0, abs=1e-4)


def test_divergence(limits):
    s = sup_distance(limits["difference"], limits["ratio"])
    assert s >= 0.1
    assert s == pytest.approx(SUPDIFF_ORACLE, abs=1e-3)


def test_ratio_of_conditionals_is_proportional_to_v(limits):
    r = limits["ratio"].eval(PROBES) / limits["difference"].eval(PROBES) / PROBES
    assert np.max(np.abs(r / np.mean(r) - 1)) <= 0.01


def test_unknown_conditioner():
    with pytest.raises(ValueError):
        condition_via_variable(EXP, "product", G)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        paradox_report(EXP, GridSpec(2))
    with pytest.raises(GridTooCoarse):
        condition_via_variable(EXP, "ratio", GridSpec(8))


def test_reflection_symmetry():
    swapped = JointDensity.from_function(LebesgueBox.half_line(), LebesgueBox.half_line(),
                                         pdf=lambda a, b: EXP.joint(b, a))
    a = condition_via_variable(EXP, "difference", G).eval(PROBES)
    b = condition_via_variable(DiagonalConditioningProblem(swapped), "difference", G).eval(PROBES)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_band_converges_to_difference(report):
    d = report["nested"]["band"]["distance_to_limit"]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] <= 0.02


def test_wedge_converges_to_ratio(report):
    d = report["nested"]["wedge"]["distance_to_limit"]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] <= 0.02


def test_families_stay_apart(report):
    for fam in ("band", "wedge"):
        assert report["nested"][fam]["distance_to_other"][-1] >= 0.1


def test_report_means_and_mass(report):
    assert report["difference"]["mean"] == pytest.approx(0.5, abs=1e-3)
    assert report["ratio"]["mean"] == pytest.approx(1.0, abs=1e-3)
    for k in ("difference", "ratio"):
        assert report[k]["mass"] == pytest.approx(1.0, abs=1e-4)
        assert len(report[k]["grid"]) == len(report[k]["density"]) == len(PROBES)
    assert report["supdiff"] >= 0.1
    assert "conditioning variable" in report["verdict"]


def test_nested_densities_are_normalized():
    for fam in ("band", "wedge"):
        for d in nested_event_limit(EXP, fam, (0.2, 0.05), GridSpec(1024)):
            assert integrate(d.eval, d.space, GridSpec(1024)) == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("seq", [(0.1, 0.2), (0.1, 0.1), (0.1, -0.05), (0.0,)])
def test_eps_sequence_validated(seq):
    with pytest.raises(ValueError):
        nested_event_limit(EXP, "band", seq, G)


def test_unknown_family():
    with pytest.raises(ValueError):
        nested_event_limit(EXP, "disc", (0.1,), G)


def test_null_event_raises():
    # the joint lives on v2 in [10, 11]; v1 never comes within eps of it
    j = JointDensity.from_function(
        LebesgueBox.interval(0, 1), LebesgueBox.interval(10, 11), pdf=lambda a, b: np.ones_like(a * b))
    with pytest.raises(ZeroProbabilityEvent):
        nested_event_limit(DiagonalConditioningProblem(j), "band", (0.1,), GridSpec(64))


@pytest.mark.parametrize("width,tol", [(0.1, 0.01), (0.05, 0.0025)])
def test_narrow_gaussian_means_agree(width, tol):
    p = DiagonalConditioningProblem(narrow_gaussian_joint(width))
    g = GridSpec(4096, truncation=4.0)
    means = [expectation(lambda v: v, condition_via_variable(p, k, g), g) for k in ("difference", "ratio")]
    # the ratio branch carries an extra factor v, which shifts the mean by about width^2 / 2
    assert means[0] == pytest.approx(1.0, abs=1e-6)
    assert abs(means[1] - 1.0) <= tol


def test_narrow_gaussian_gap_shrinks():
    gaps = []
    for width in (0.1, 0.05):
        p = DiagonalConditioningProblem(narrow_gaussian_joint(width))
        g = GridSpec(4096, truncation=4.0)
        m = [expectation(lambda v: v, condition_via_variable(p, k, g), g) for k in ("difference", "ratio")]
        gaps.append(abs(m[0] - m[1]))
    assert gaps[1] < gaps[0] / 2


@settings(max_examples=10)
@given(st.floats(0.5, 3.0), st.floats(0.5, 3.0))
def test_exponential_rates_diverge_property(a, b):
    # Exp(a) x Exp(b): difference gives Exp(a + b), ratio gives Gamma(2, a + b)
    j = JointDensity.from_function(
        LebesgueBox.half_line(), LebesgueBox.half_line(),
        pdf=lambda x, y: np.where((x >= 0) & (y >= 0), a * b * np.exp(-a * x - b * y), 0.0))
    p = DiagonalConditioningProblem(j)
    g = GridSpec(2048, truncation=40.0 / (a + b))
    md = expectation(lambda v: v, condition_via_variable(p, "difference", g), g)
    mr = expectation(lambda v: v, condition_via_variable(p, "ratio", g), g)
    assert md == pytest.approx(1 / (a + b), rel=1e-3)
    assert mr == pytest.approx(2 / (a + b), rel=1e-3)


def test_default_eps():
    assert DEFAULT_EPS == (0.2, 0.1, 0.05, 0.025)
    assert math.isclose(PROBES[0], 0.25) and math.isclose(PROBES[-1], 8.0)
