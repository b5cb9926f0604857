import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bayescond.bayes import posterior
from bayescond.corpus import (
    additive_normal_forward_model,
    normal_normal_model,
    shrinkage_prior,
    uniform_rate_model,
    waiting_times_model,
)
from bayescond.distributions import exponential_logpdf, gamma_density, gamma_logpdf, normal_logpdf, uniform_density
from bayescond.errors import DomainError, SingularTransform
from bayescond.measure import GridSpec, LebesgueBox, integrate
from bayescond.reparam import (
    ERRONEOUS,
    ForwardModel,
    Transform,
    acausality_demo,
    affine,
    finite_difference_jacobian,
    get_transform,
    param_reparam_check,
    posterior_invariance_report,
    pushforward_likelihood,
    wrong_jacobian_likelihood,
)

G = GridSpec(4096)
NAMES = ("cube", "log", "reciprocal", "affine")
POSITIVE = ("log", "reciprocal")

# frozen oracles (sympy)
CUBE_AT_1 = 0.12262648039048077     # e^{-1} / 3
LOG_AT_0 = 0.27067056647322538      # 2 e^{-2}
WRONG_AT_M2 = 0.020164227043261946  # phi(-1) / 12
SHRINKAGE = 1.9801980198019802      # 2 * 100 / 101

PROBES = {
    "identity": np.linspace(-5, 5, 41),
    "cube": np.linspace(-5, 5, 41),
    "affine": np.linspace(-5, 5, 41),
    "log": np.geomspace(1e-3, 1e3, 41),
    "reciprocal": np.geomspace(1e-3, 1e3, 41),
}


@pytest.mark.parametrize("name", sorted(PROBES))
def test_round_trip(name):
    t = get_transform(name)
    y = PROBES[name]
    np.testing.assert_allclose(t.inverse(t.forward(y)), y, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("name", sorted(PROBES))
def test_jacobian_matches_finite_difference(name):
    t = get_transform(name)
    y = PROBES[name]
    y = y[y != 0] if name == "cube" else y
    y = y[y > 1e-2] if name in ("log", "reciprocal") else y
    np.testing.assert_allclose(t.jacobian_det(y), finite_difference_jacobian(t, y), rtol=1e-5)
    assert np.all(t.jacobian_det(y) > 0)


def test_unknown_transform():
    with pytest.raises(KeyError):
        get_transform("sine")


def test_zero_slope_affine_is_singular():
    with pytest.raises(SingularTransform):
        affine(0.0)


def test_pushforward_examples():
    log_f = lambda y, t: exponential_logpdf(y, t)
    assert pushforward_likelihood(log_f, get_transform("cube"))(1.0, 1.0) == pytest.approx(CUBE_AT_1, rel=1e-12)
    assert pushforward_likelihood(log_f, get_transform("log"))(0.0, 2.0) == pytest.approx(LOG_AT_0, rel=1e-12)
    y = np.linspace(0.1, 5, 20)
    ident = pushforward_likelihood(log_f, get_transform("identity"))
    np.testing.assert_array_equal(ident(y, 1.5), np.exp(log_f(y, 1.5)))


def test_pushforward_singular_jacobian():
    lik = pushforward_likelihood(lambda y, t: exponential_logpdf(y, t), get_transform("cube"))
    with pytest.raises(SingularTransform):
        lik(0.0, 1.0)


@pytest.mark.parametrize("name", ["affine", "log", "reciprocal"])
@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_pushforward_slices_normalize(name, theta):
    t = get_transform(name)
    lik = pushforward_likelihood(lambda y, th: exponential_logpdf(y, th), t)
    # integrate in x over the image of (0, 60); the reciprocal image is cut at 1 / 60 and 1e9
    box = {"affine": (1.0, 121.0), "log": (-12.0, math.log(60.0)), "reciprocal": (1 / 60, 1e9)}[name]
    space = LebesgueBox.interval(*box)
    if name == "reciprocal":
        # substitute x = e^u so the heavy tail of x is resolved
        mass = integrate(lambda u: lik(np.exp(u), theta) * np.exp(u),
                         LebesgueBox.interval(math.log(box[0]), math.log(box[1])), GridSpec(40000))
    else:
        mass = integrate(lambda x: lik(x, theta), space, GridSpec(40000))
    assert mass == pytest.approx(1.0, abs=1e-4)


def test_cube_slice_normalizes():
    t = get_transform("cube")
    lik = pushforward_likelihood(lambda y, th: normal_logpdf(y, th, 1.0), t)
    # x = u^3 is not smooth enough for a direct grid; substitute back (an even node count avoids u = 0)
    mass = integrate(lambda u: lik(u ** 3 + 0.0, 0.7) * 3 * u ** 2, LebesgueBox.interval(-10, 10), GridSpec(40000))
    assert mass == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("model", [waiting_times_model, normal_normal_model], ids=["waiting", "normal"])
@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("y", [0.5, 1.0, 2.5])
def test_posterior_invariance(model, name, y):
    r = posterior_invariance_report(model(), get_transform(name), y, G)
    assert r.posterior_supdiff <= 1e-6
    assert r.map_index_equal
    assert r.log_marginal_shift == pytest.approx(r.expected_log_marginal_shift, abs=1e-6)


def test_invariance_examples():
    r = posterior_invariance_report(waiting_times_model(), get_transform("cube"), 1.0, G)
    assert r.posterior_supdiff <= 1e-8 and r.map_original == r.map_transformed
    r = posterior_invariance_report(waiting_times_model(), get_transform("log"), 1.0, G)
    assert r.posterior_supdiff <= 1e-8
    assert r.log_marginal_shift == pytest.approx(0.0, abs=1e-6)
    r = posterior_invariance_report(waiting_times_model(), get_transform("identity"), 1.0, G)
    assert r.posterior_supdiff <= 1e-12 and r.log_marginal_shift == 0.0


def test_invariance_rejects_point_outside_domain():
    with pytest.raises(DomainError):
        posterior_invariance_report(waiting_times_model(), get_transform("log"), -1.0, G)


def test_report_json_shape():
    d = posterior_invariance_report(waiting_times_model(), get_transform("cube"), 1.0, G).to_dict()
    assert {"posterior_supdiff", "map_correct", "map_wrong", "log_marginal_shift", "jacobian_at_obs"} <= set(d)


def test_wrong_jacobian_example():
    fm = additive_normal_forward_model()
    lik = wrong_jacobian_likelihood(fm, get_transform("cube"))
    assert lik(1.0, 2.0) == pytest.approx(WRONG_AT_M2, rel=1e-12)
    assert lik.label == ERRONEOUS and not lik.normalized


def test_wrong_jacobian_identity_coincides():
    fm = additive_normal_forward_model()
    t = get_transform("identity")
    x = np.linspace(-3, 3, 13)
    right = pushforward_likelihood(fm.log_likelihood, t)
    wrong = wrong_jacobian_likelihood(fm, t)
    np.testing.assert_allclose(wrong(x, 0.4), right(x, 0.4), rtol=1e-15)


def test_wrong_jacobian_slice_not_normalized():
    lik = wrong_jacobian_likelihood(additive_normal_forward_model(), get_transform("cube"))
    mass = integrate(lambda u: lik(u ** 3, 2.0) * 3 * u ** 2, LebesgueBox.interval(-10, 10), GridSpec(40001))
    # in y the integrand is phi(2 - y) * 3 y^2 / 12; its integral is (4 + 1) / 4 (sympy)
    assert mass == pytest.approx(1.25, abs=1e-6)
    assert abs(mass - 1) > 0.1


def test_wrong_jacobian_domain_error():
    fm = ForwardModel(g=lambda m: m, noise_logpdf=lambda r: normal_logpdf(r, 0.0, 1.0))
    lik = wrong_jacobian_likelihood(fm, get_transform("log"))
    with pytest.raises(DomainError):
        lik(0.0, -1.0)


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0.1, 5))
def test_symmetry_law(y, gm, sd):
    fm = ForwardModel(g=lambda m: m, noise_logpdf=lambda r, s: normal_logpdf(r, 0.0, s))
    a, b = fm.h(y, gm, sd), fm.h(gm, y, sd)
    assert abs(a - b) <= 1e-12
    assert fm.noise_density(y - gm, sd) == fm.noise_density(gm - y, sd)


def test_wrong_jacobian_pathology_against_shrinkage():
    g = GridSpec(12000)
    r = acausality_demo(additive_normal_forward_model(), shrinkage_prior(), get_transform("cube"), 2.0, g)
    assert abs(r.map_correct[0] - SHRINKAGE) <= r.grid_step
    assert r.map_shift_steps > 10
    assert r.map_shift > 0.1


def test_wrong_map_solves_stationarity():
    # erroneous log posterior: -(m - 2)^2 / 2 - m^2 / 200 - log(3 m^2); argmax on (0, 2) by dense search
    m = np.linspace(1e-3, 3, 3_000_001)
    f = -(m - 2) ** 2 / 2 - m ** 2 / 200 - np.log(3 * m ** 2)
    oracle = m[np.argmax(f)]
    r = acausality_demo(additive_normal_forward_model(), shrinkage_prior(), get_transform("cube"), 2.0,
                        GridSpec(12000))
    assert abs(r.map_wrong[0] - oracle) <= r.grid_step


@pytest.mark.parametrize("name", ["identity", "affine"])
def test_constant_jacobian_hides_the_error(name):
    r = acausality_demo(additive_normal_forward_model(), shrinkage_prior(), get_transform(name), 2.0,
                        GridSpec(12000))
    assert r.map_shift == 0.0


@pytest.mark.parametrize("name,nodes", [("cube", 12000), ("log", 6000), ("reciprocal", 6000)])
def test_wrong_jacobian_detectable(name, nodes):
    r = acausality_demo(additive_normal_forward_model(), shrinkage_prior(positive=name in POSITIVE),
                        get_transform(name), 2.0, GridSpec(nodes))
    assert r.map_shift_steps > 10
    assert r.to_dict()["map_wrong_label"] == ERRONEOUS


def test_param_reparam_reciprocal():
    r = param_reparam_check(gamma_density(2.0, 2.0), get_transform("reciprocal"), waiting_times_model(), 1.0,
                            G, eta_grid=GridSpec(200_000, truncation=1000.0))
    assert r.posterior_supdiff <= 1e-4


def test_param_reparam_matches_closed_form():
    # the pushed-forward posterior against Gamma(3, 3) itself, not against the grid posterior
    psi = get_transform("reciprocal")
    prior = gamma_density(2.0, 2.0)
    r = param_reparam_check(prior, psi, waiting_times_model(), 1.0, G,
                            eta_grid=GridSpec(200_000, truncation=1000.0))
    direct = posterior(waiting_times_model(), 1.0, G, refine=False)
    theta = direct.points[:, 0]
    closed = np.exp(gamma_logpdf(theta, 3.0, 3.0))
    assert np.max(np.abs(np.exp(direct.log_density) - closed)) + r.posterior_supdiff <= 1e-4


def test_param_reparam_identity():
    r = param_reparam_check(gamma_density(2.0, 2.0), get_transform("identity"), waiting_times_model(), 1.0, G)
    assert r.posterior_supdiff <= 1e-12


def test_uniform_priors_not_equivalent():
    m = uniform_rate_model(0.1, 5.0)
    r = param_reparam_check(m.prior, get_transform("reciprocal"), m, 1.0, G,
                            eta_prior=uniform_density(0.2, 10.0))
    assert not r.priors_equivalent
    assert r.prior_supdiff > 0.1
    assert r.posterior_supdiff > 0.1


def test_transform_domain():
    t = get_transform("log")
    assert t.in_domain(np.array([-1.0, 0.0, 1.0])).tolist() == [False, False, True]
    assert isinstance(t, Transform)
