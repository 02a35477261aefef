import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from splinedeconv.errors import HypothesisFailed, NotRieszBasis, QuadratureError
from splinedeconv.sequences import WeightedSequence
from splinedeconv.spline import (
    SampledFunction,
    SplineFunction,
    abs_linear_integral,
    amalgam_norm,
    analyze,
    autocorrelation,
    bspline,
    build_model,
    function_amalgam_norm,
    generator_from_spec,
    gramian_check,
    integrate_cells,
    lp_norm,
    piecewise_linear_lp,
    riesz_ratio_empirical,
    sampled_generator,
    synthesize,
    two_sided_exponential,
)

SQ3 = math.sqrt(3.0)


@pytest.fixture(scope="module")
def hat():
    return build_model(bspline(2))


@pytest.fixture(scope="module")
def box():
    return build_model(bspline(1))


@pytest.fixture(scope="module")
def expo():
    return build_model(two_sided_exponential(1.0))


def test_integrate_cells_exact_polynomial():
    edges = np.array([-1.0, 0.3, 2.0])
    vals = integrate_cells(lambda x: x**5 - 2 * x**2, edges, order=3, exact=True)
    assert math.fsum(vals) == pytest.approx((2**6 - 1) / 6 - 2 * (8 + 1) / 3, abs=1e-13)


def test_integrate_cells_adaptive_and_failure():
    vals = integrate_cells(np.exp, np.array([0.0, 1.0]), tol=1e-13)
    assert math.fsum(vals) == pytest.approx(math.e - 1, abs=1e-13)
    with pytest.raises(QuadratureError):
        integrate_cells(lambda x: 1 / np.sqrt(np.abs(x - 0.3)), np.array([0.0, 1.0]), tol=1e-15, max_level=3)


def test_bspline_values_and_fit_constant():
    g = bspline(2)
    np.testing.assert_allclose(g(np.array([-1.0, -0.5, 0.0, 0.25, 1.0, 3.0])), [0, 0.5, 1, 0.75, 0, 0])
    # max of (1-|x|)(1+|x|)² is 32/27, at |x| = 1/3
    assert 32 / 27 <= g.cert.C <= 32 / 27 * (1 + 1e-9)
    assert g.cert.alpha == 2.0
    assert bspline(4)(0.0) == pytest.approx(2 / 3)
    assert not bspline(1).deriv_available


def test_generator_spec_round_trip():
    for spec in ({"kind": "bspline", "order": 3}, {"kind": "exp", "rate": 2.0}):
        g = generator_from_spec(spec)
        assert generator_from_spec(g.to_dict()).to_dict() == g.to_dict()
    with pytest.raises(ValueError):
        generator_from_spec({"kind": "gauss"})


def test_autocorrelation_bsplines():
    np.testing.assert_allclose(autocorrelation(bspline(2)).values.real, [1 / 6, 2 / 3, 1 / 6], atol=1e-15)
    # cubic B-spline: the order-8 B-spline at the integers
    expected = np.array([1, 120, 1191, 2416, 1191, 120, 1]) / 5040
    np.testing.assert_allclose(autocorrelation(bspline(4)).values.real, expected, atol=1e-15)
    assert autocorrelation(bspline(1)).values.real.tolist() == [1.0]


def test_autocorrelation_exponential():
    # ∫ e^{-λ|x|} e^{-λ|x-k|} dx = (|k| + 1/λ) e^{-λ|k|}
    for rate in (1.0, 2.0):
        a = autocorrelation(two_sided_exponential(rate))
        k = np.arange(a.offset[0], a.upper[0] + 1)
        np.testing.assert_allclose(a.values.real, (np.abs(k) + 1 / rate) * np.exp(-rate * np.abs(k)), atol=1e-13)


def test_sampled_generator_matches_hat():
    g = sampled_generator(-1.0, 0.5, [0.0, 0.5, 1.0, 0.5, 0.0])
    np.testing.assert_allclose(autocorrelation(g).values.real, [1 / 6, 2 / 3, 1 / 6], atol=1e-14)


def test_gramian_check():
    A, B = gramian_check(WeightedSequence.from_1d([1 / 6, 2 / 3, 1 / 6], -1))
    assert A <= 1 / 3 < 1 <= B
    with pytest.raises(NotRieszBasis):
        gramian_check(WeightedSequence.from_1d([0.5, 1.0, 0.5], -1))
    with pytest.raises(HypothesisFailed):
        gramian_check(WeightedSequence.from_1d([0.1j, 1.0, 0.1j], -1))


def test_hat_model(hat):
    assert hat.A_gram == pytest.approx(1 / 3, abs=0.01) and hat.A_gram <= 1 / 3
    assert hat.biorth_defect < 1e-13
    k = np.arange(hat.b.offset[0], hat.b.upper[0] + 1)
    np.testing.assert_allclose(hat.b.values.real, SQ3 * (SQ3 - 2) ** np.abs(k), atol=1e-14)


def test_box_dual_is_itself(box):
    assert box.b.shape == (1,) and box.b[0] == 1
    x = np.linspace(-2, 2, 101)
    np.testing.assert_array_equal(box.psi(x), box.gen(x))


def test_exponential_model(expo):
    assert expo.A_gram > 0
    assert expo.biorth_defect < 1e-8


def test_lp_norms_of_generators():
    hat = bspline(2)
    assert lp_norm(hat, 1) == pytest.approx(1.0, abs=1e-15)
    assert lp_norm(hat, 2) == pytest.approx(math.sqrt(2 / 3), abs=1e-15)
    assert lp_norm(hat, math.inf) == 1.0
    assert lp_norm(hat, 3) == pytest.approx(0.5 ** (1 / 3), abs=1e-12)  # 2/(p+1)
    e = two_sided_exponential(2.0)
    assert lp_norm(e, 1) == pytest.approx(1.0, abs=1e-12)
    assert lp_norm(e, 2) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_lp_norm_complex_hat_spline_against_quad(rng, hat):
    c = WeightedSequence((0,), rng.standard_normal(6) + 1j * rng.standard_normal(6))
    f = hat.function(c)
    ref = sum(integrate.quad(lambda x: abs(f(np.array([x]))[0]), k, k + 1, epsabs=1e-14)[0] for k in range(-1, 6))
    assert lp_norm(f, 1) == pytest.approx(ref, rel=1e-10)
    assert lp_norm(f, 1) == pytest.approx(piecewise_linear_lp(c.restrict([-1], [6]).values, 1.0, 1), rel=1e-13)


@given(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
)
def test_abs_linear_integral_against_quad(u, v):
    ref = integrate.quad(lambda t: abs(u + (v - u) * t), 0, 1, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    assert float(abs_linear_integral(np.array([u]), np.array([v]))[0]) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_abs_linear_integral_sign_change():
    # |t - 1/2| integrates to 1/4
    assert float(abs_linear_integral(np.array([-0.5]), np.array([0.5]))[0]) == pytest.approx(0.25, abs=1e-16)


def test_amalgam_norms(hat):
    assert function_amalgam_norm(hat.gen) == pytest.approx(2.0)
    assert function_amalgam_norm(hat.gen, derivative=True) == pytest.approx(2.0)
    # ψ has cell maxima |b_j| nearest the origin, so the sum is 2 Σ_{j>=0} |b_j| = 3 + √3
    assert function_amalgam_norm(hat.psi) == pytest.approx(3 + SQ3, abs=1e-12)
    f = synthesize(hat, WeightedSequence.from_1d([1.0], 0), -2.0, 1 / 64, 257)
    assert amalgam_norm(f, math.inf, 1) == pytest.approx(2.0)
    assert amalgam_norm(f, 1, 1) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(ValueError):
        amalgam_norm(SampledFunction(0.1, 0.3, np.ones(4)), 1, 1)


def test_analyze_synthesize_round_trip(hat, rng):
    c = WeightedSequence((-3,), rng.standard_normal(8))
    f = synthesize(hat, c, -8.0, 1 / 16, 16 * 16 + 1)
    c_back = analyze(hat, f, (-3, 4))
    np.testing.assert_allclose(c_back.values, c.values, atol=1e-12)
    c_call = analyze(hat, hat.function(c), (-3, 4))
    np.testing.assert_allclose(c_call.values, c.values, atol=1e-10)


def test_riesz_ratios_hat(hat):
    lo, hi = riesz_ratio_empirical(hat, 2.0, trials=30)
    assert 1 / SQ3 - 1e-6 <= lo <= hi <= 1 + 1e-6
    lo, hi = riesz_ratio_empirical(hat, math.inf, trials=10)
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)


def test_spline_function_support_and_derivative():
    f = SplineFunction(bspline(2), WeightedSequence.from_1d([1.0, 2.0], 3))
    assert f.support == (2.0, 5.0)
    assert f(np.array([3.5]))[0] == pytest.approx(1.5)
    assert f.derivative(np.array([3.5]))[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        SplineFunction(bspline(2), WeightedSequence.delta(2))


def test_sampled_function_csv(tmp_path):
    SampledFunction(0.0, 0.5, np.array([1.0, 2.0 + 1j])).write_csv(tmp_path / "f.csv")
    assert (tmp_path / "f.csv").read_text().splitlines() == ["x,re,im", "0.0,1.0,0.0", "0.5,2.0,1.0"]


def test_complex_asymmetric_window_biorthogonal():
    # a skewed complex piecewise-linear window exercises the φ(· + k) convention
    g = sampled_generator(-1.0, 0.5, np.array([0.0, 0.3 + 0.4j, 1.0, 0.6 - 0.2j, 0.1j, 0.0]))
    model = build_model(g)
    assert not g.is_real_even
    assert model.a.is_hermitian(tol=1e-15)
    assert model.biorth_defect < 1e-10
