import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bayescond.distributions import gamma_logpdf, poisson_logpmf
from bayescond.errors import (
    DivergentMass,
    EmptyMeasure,
    GridSpecError,
    NonFiniteIntegrand,
    ZeroMass,
)
from bayescond.measure import (
    CountingSet,
    Density,
    GridSpec,
    LebesgueBox,
    PointMassMixture,
    Product,
    grid_points,
    integrate,
    log_integrate,
    normalize,
    product_measure,
    tonelli_check,
)

SQUARE_40 = LebesgueBox(((0.0, 40.0), (0.0, 40.0)))


def test_exponential_square_integrates_to_one():
    val = integrate(lambda x, y: np.exp(-x - y), SQUARE_40, GridSpec(2000))
    assert val == pytest.approx(1.0, abs=1e-4)


def test_poisson_mass_sums_to_one_exactly():
    val = integrate(lambda k: np.exp(poisson_logpmf(k, 1.0)), CountingSet.range(0, 60))
    assert val == pytest.approx(1.0, abs=1e-12)


def test_gamma22_density_normalized_on_fine_grid(fine_grid):
    val = integrate(lambda t: 4 * t * np.exp(-2 * t), LebesgueBox.interval(0, 30), fine_grid)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_grid_convergence_is_second_order():
    f = lambda t: 4 * t * np.exp(-2 * t)
    space = LebesgueBox.interval(0, 30)
    errs = [abs(integrate(f, space, GridSpec(n)) - 1.0) for n in (250, 500, 1000, 2000)]
    for coarse, fine in zip(errs, errs[1:]):
        assert fine <= coarse / 2


def test_integrate_is_bit_deterministic():
    f = lambda x, y: (x + y) * np.exp(-x - y)
    a = integrate(f, SQUARE_40, GridSpec(300))
    b = integrate(f, SQUARE_40, GridSpec(300))
    assert a == b


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_integrate_independent_of_worker_count(workers):
    f = lambda x, y: (x + y) * np.exp(-x - y)
    ref = integrate(f, SQUARE_40, GridSpec(400), workers=1)
    assert integrate(f, SQUARE_40, GridSpec(400), workers=workers) == ref


def test_nonfinite_integrand_raises():
    with pytest.raises(NonFiniteIntegrand):
        integrate(lambda x: np.where(x > 0.5, np.nan, x), LebesgueBox.interval(0, 1), GridSpec(10))


def test_empty_counting_set_raises():
    with pytest.raises(EmptyMeasure):
        integrate(lambda k: k, CountingSet(()))


def test_product_measure_constructs_and_flattens():
    a, b, c = LebesgueBox.interval(0, 1), CountingSet((0, 1)), LebesgueBox.half_line()
    p = product_measure(a, b)
    assert isinstance(p, Product) and p.factors == (a, b)
    assert product_measure(p, c).factors == (a, b, c)
    wt = product_measure(LebesgueBox.half_line(), LebesgueBox.half_line())
    assert wt.ndim == 2
    (lo, hi), = wt.factors[0].resolved_bounds(GridSpec())
    assert (lo, hi) == (0.0, 30.0)


def test_normalize_gamma_kernel():
    d = Density(LebesgueBox.interval(0, 30), pdf=lambda t: t ** 2 * np.exp(-3 * t))
    n = normalize(d, GridSpec(100_000))
    assert n.normalized
    assert n.log_normalizer == pytest.approx(math.log(2 / 27), abs=1e-8)
    probes = np.linspace(0.1, 5, 20)
    np.testing.assert_allclose(n.eval(probes), 13.5 * probes ** 2 * np.exp(-3 * probes), rtol=1e-8)


def test_normalize_constant():
    n = normalize(Density(LebesgueBox.interval(0, 1), pdf=lambda x: np.full_like(x, 2.0)), GridSpec(64))
    np.testing.assert_allclose(n.eval(np.linspace(0, 1, 5)), 1.0)


def test_normalize_zero_raises():
    with pytest.raises(ZeroMass):
        normalize(Density(LebesgueBox.interval(0, 1), pdf=lambda x: np.zeros_like(x)), GridSpec(64))


def test_normalize_divergent_raises():
    d = Density(LebesgueBox.interval(0, 1), logpdf=lambda x: np.full_like(x, np.inf))
    with pytest.raises(DivergentMass):
        normalize(d, GridSpec(64))


def test_tonelli_symbolic_oracle():
    # int_0^inf int_0^inf (x + y) e^{-x-y} dx dy = 2 (sympy)
    a, b = tonelli_check(lambda x, y: (x + y) * np.exp(-x - y),
                         LebesgueBox.interval(0, 40), LebesgueBox.interval(0, 40), GridSpec(2000))
    assert a == pytest.approx(2.0, abs=1e-4)
    assert b == pytest.approx(2.0, abs=1e-4)
    assert abs(a - b) <= 1e-10


def test_tonelli_mixed_lebesgue_counting():
    a, b = tonelli_check(lambda x, k: np.exp(-x) * 2.0 ** (-k - 1),
                         LebesgueBox.interval(0, 40), CountingSet.range(0, 50), GridSpec(20000))
    assert a == pytest.approx(1.0, abs=1e-6)
    assert b == pytest.approx(1.0, abs=1e-6)
    assert abs(a - b) <= 1e-10


@pytest.mark.parametrize("w", [0.0, 0.3, 1.0])
def test_point_mass_mixture_mass(w):
    m = PointMassMixture((0.0,), LebesgueBox.interval(0, 40))

    def pdf(x):
        return np.where(x == 0.0, w, (1 - w) * np.exp(-x))

    assert integrate(pdf, m, GridSpec(40_000)) == pytest.approx(1.0, abs=1e-6)


def test_mixture_rejects_node_on_atom():
    m = PointMassMixture((0.5,), LebesgueBox.interval(0, 1))
    with pytest.raises(GridSpecError):
        m.axes(GridSpec(1))


def test_gridspec_validation():
    with pytest.raises(GridSpecError):
        GridSpec(nodes=1, rule="trapezoid")
    with pytest.raises(GridSpecError):
        GridSpec(truncation=math.inf)
    with pytest.raises(GridSpecError):
        GridSpec(truncation=0)
    with pytest.raises(GridSpecError):
        GridSpec(rule="simpson")


def test_measure_invariants():
    with pytest.raises(ValueError):
        LebesgueBox.interval(1, 1)
    with pytest.raises(ValueError):
        CountingSet((1, 1))
    with pytest.raises(ValueError):
        Product(())


def test_trapezoid_rule_integrates_linear_exactly():
    val = integrate(lambda x: 3 * x + 1, LebesgueBox.interval(0, 2), GridSpec(5, rule="trapezoid"))
    assert val == pytest.approx(8.0, abs=1e-14)


def test_grid_points_c_order():
    pts = grid_points(product_measure(CountingSet((0, 1)), CountingSet((5, 6, 7))), GridSpec())
    assert pts.tolist() == [[0, 5], [0, 6], [0, 7], [1, 5], [1, 6], [1, 7]]


@given(st.floats(0.5, 5.0), st.floats(0.5, 5.0))
def test_density_log_eval_consistent(shape, rate):
    d = Density(LebesgueBox.half_line(), logpdf=lambda t: gamma_logpdf(t, shape, rate))
    x = np.linspace(0.01, 10, 50)
    v = d.eval(x)
    assert np.all(v >= 0)
    pos = v > 0
    np.testing.assert_allclose(np.exp(d.log_eval(x))[pos], v[pos], rtol=1e-12)


@given(st.floats(2.0, 6.0), st.floats(0.5, 4.0))
def test_gamma_normalized_property(shape, rate):
    # shape >= 2 keeps the integrand smooth at 0, where midpoint is second order
    space = LebesgueBox.interval(0, 60)
    mass = math.exp(log_integrate(lambda t: gamma_logpdf(t, shape, rate), space, GridSpec(20000)))
    assert mass == pytest.approx(1.0, abs=1e-5)


@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=8), st.floats(1e-3, 1e3))
def test_integral_is_linear_in_scale(values, c):
    pts = CountingSet(tuple(range(len(values))))
    arr = np.array(values)
    f = lambda k: arr[k.astype(int)]
    assert integrate(lambda k: c * f(k), pts) == pytest.approx(c * integrate(f, pts), rel=1e-12)
