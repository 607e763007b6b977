import math

import pytest

import longrun
import longrun._longrun


def test_tilt_and_rate():
    expo = longrun.model("exponential")
    t = expo.solve_tilt(0.3)
    assert expo.cgf_d1(t) == pytest.approx(0.3, abs=1e-12)
    assert expo.rate(0.3) == pytest.approx(0.3 - math.log(1.3), rel=1e-12)
    assert longrun.log_tilt_ratio(expo, 10, 0.3) == pytest.approx(10 * expo.rate(0.3), rel=1e-10)


def test_gaussian_adaptive_is_exact():
    normal = longrun.model("normal")
    y = longrun.oracle.sample_gaussian_conditional(0.3, 20, 19, seed=1)
    lg = longrun.eval_log_g(normal, 0.3, 20, y, center_shift="adaptive_mi")
    assert lg == pytest.approx(longrun.oracle.gaussian_conditional_logpdf(0.3, 20, y), rel=1e-9)


def test_sample_path_rescores_and_reproduces():
    gamma = longrun.model("gamma", shape=2.0, scale=1.0)
    a = longrun.sample_path(gamma, 2.4, 30, 10, seed=3)
    b = longrun.sample_path(gamma, 2.4, 30, 10, seed=3)
    assert a["values"] == b["values"]
    assert longrun.eval_log_g(gamma, 2.4, 30, a["values"]) == a["log_g"]


def test_tail_and_is_estimate():
    expo = longrun.model("exponential")
    a = longrun.oracle.exponential_level_for_probability(100, 1e-6)
    assert abs(longrun.log_tail_prob(expo, 100, a) - math.log(1e-6)) < 0.1
    r = longrun.is_estimate(expo, 0.5, 8, 3, 5000, seed=2)
    exact = math.exp(longrun.oracle.gamma_tail_exact(8, 0.5))
    assert abs(r["estimate"] - exact) < 4 * r["stderr"]


def test_select_k_and_rao_blackwell():
    expo = longrun.model("exponential")
    a = longrun.oracle.exponential_level_for_probability(100, 1e-8)
    rep = longrun.select_k(expo, a, 100, 1e6, 100, [10, 20], seed=1)
    assert rep["k_delta"] is None and len(rep["rows"]) == 2
    rb = longrun.rao_blackwell_gamma(2.0, 1.0, 2, [2], 200, 2, seed=1, rb_ks=[2])
    assert rb["var_rb"][0] == pytest.approx(rb["var_initial"][0], rel=1e-12)


def test_errors():
    with pytest.raises(ValueError):
        longrun.model("cauchy")
    with pytest.raises(ValueError):
        longrun.eval_log_g(longrun.model("normal"), 0.1, 5, [0.0], center_shift="middle")


def test_imports_the_expected_build():
    pkg = __import__("os").environ.get("LONGRUN_PYPKG")
    if pkg:
        assert longrun._longrun.__file__.startswith(pkg)
