import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splinedeconv import bounds as bd
from splinedeconv.errors import HypothesisFailed, NotContracting, NotDense
from splinedeconv.sampling import (
    PartitionOfUnity,
    best_hat_certificate,
    default_k_range,
    estimate_gamma,
    hat_jitter_stats,
    jittered_points,
    load_points,
    operator_I,
    operator_Z,
    oscillation_bound,
    reconstruct,
    relative_separation,
    sampled_gram,
    save_points,
    validate_set,
)
from splinedeconv.sequences import WeightedSequence
from splinedeconv.spline import bspline, build_model, function_amalgam_norm, piecewise_linear_lp


@pytest.fixture(scope="module")
def hat():
    return build_model(bspline(2))


def _stream_points(n_cells, delta, jitter, seed, safety=0.999):
    # the point set hat_jitter_stats draws internally
    n = int(math.ceil(n_cells * (1 + 2 * jitter) / (safety * 2 * delta)))
    h = n_cells / n
    u = np.random.default_rng(seed).random(n)
    u *= 2.0 * jitter
    u -= jitter
    return (np.arange(n) + 0.5 + u) * h


def test_relative_separation():
    assert relative_separation([]) == 0
    assert relative_separation([0.1, 0.2, 0.9, 1.5, 3.0]) == 3
    assert relative_separation([-0.5, -0.1, 0.0]) == 2


def test_validate_set_errors():
    with pytest.raises(NotDense) as exc:
        validate_set([], 0.5)
    assert exc.value.gap == math.inf
    with pytest.raises(NotDense) as exc:
        validate_set([0.0, 0.5, 2.0], 0.6, (0, 2))
    assert exc.value.gap == pytest.approx(1.5)
    with pytest.raises(NotDense):
        validate_set([0.5, 1.0], 0.4, (0, 1))
    with pytest.raises(ValueError):
        validate_set([1.0, 0.5], 0.5)
    with pytest.raises(ValueError):
        validate_set([0.0, 3.0], 2.0, (0, 2))
    with pytest.raises(HypothesisFailed):
        validate_set([0.0], -1.0)


def test_validate_set_ok():
    X = validate_set(np.arange(0.0, 5.0), 0.6, (0, 4))
    assert X.n == 5 and X.N_X == 1 and X.window == (0.0, 4.0)


def test_points_round_trip(tmp_path, rng):
    pts = np.sort(rng.uniform(0, 10, 50))
    save_points(pts, tmp_path / "p.csv")
    (tmp_path / "q.csv").write_text("# header\n\n" + (tmp_path / "p.csv").read_text())
    np.testing.assert_array_equal(load_points(tmp_path / "q.csv"), pts)


def test_jittered_points(rng):
    x = jittered_points((0.0, 4.0), 0.5, 0.2, rng)
    assert len(x) == 8
    assert np.all(np.abs(x - (np.arange(8) + 0.5) * 0.5) <= 0.1)
    with pytest.raises(ValueError):
        jittered_points((0.0, 1.0), 0.3, 0.1, rng)


@given(st.lists(st.floats(0.01, 0.9), min_size=1, max_size=30), st.floats(0.0, 1.0))
def test_partition_of_unity(gaps, shift):
    delta = 0.5
    x = shift * 0.4 + np.concatenate([[0.0], np.cumsum(gaps)])
    X = validate_set(x, delta, (0.0, float(x[-1]) + 0.1))
    pou = PartitionOfUnity(X)
    grid = np.linspace(*X.window, 2001)
    assert pou.defect(grid) < 1e-12
    for j in range(X.n):
        lo, hi = pou.support(j)
        assert x[j] - delta < lo <= x[j] <= hi < x[j] + delta
        g = pou.bump(j, grid)
        assert g.min() >= 0 and g.max() <= 1
    total = sum(pou.bump(j, grid) for j in range(X.n))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_operator_I_interpolates():
    X = validate_set([0.2, 0.7, 1.5], 0.5, (0, 1.8))
    pou = PartitionOfUnity(X)
    np.testing.assert_allclose(operator_I(X, pou, np.array([1.0, 2.0, 3.0]), X.points), [1, 2, 3])
    with pytest.raises(ValueError):
        operator_I(X, pou, np.ones(2), X.points)


def test_oscillation_hat():
    rep = oscillation_bound(bspline(2), 0.1)
    assert rep.holds
    # (2⌈δ⌉ + 1) ‖φ'‖ δ with ‖φ'‖_{W(L^∞,ℓ¹)} = 2
    assert rep.bound == pytest.approx(0.6, rel=1e-12)
    # the δ-oscillation of the hat peaks at δ in each of the four unit cells it meets
    assert rep.direct == pytest.approx(0.4, abs=2 / 1024)


def test_default_k_range():
    assert default_k_range(bspline(2), (0.0, 10.0)) == (1, 9)
    with pytest.raises(HypothesisFailed):
        default_k_range(bspline(2), (0.0, 1.5))


def test_gram_consistent_with_samples(hat, rng):
    pts = jittered_points((0.0, 12.0), 0.25, 0.3, rng)
    X = validate_set(pts, 0.25, (0, 12))
    gram = sampled_gram(hat, X, PartitionOfUnity(X))
    c = rng.standard_normal(gram.k_range[1] - gram.k_range[0] + 1)
    samples = operator_Z(hat, X, WeightedSequence((gram.k_range[0],), c))
    np.testing.assert_allclose(gram.apply(c), gram.moments(samples), atol=1e-14)


def test_reconstruct_integer_samples(hat, rng):
    X = validate_set(np.arange(0.0, 17.0), 0.6, (0, 16))
    k_lo, k_hi = default_k_range(hat.gen, X.window)
    c = WeightedSequence((k_lo,), rng.standard_normal(k_hi - k_lo + 1))
    res = reconstruct(hat, X, operator_Z(hat, X, c), tol=1e-13)
    assert res.converged
    np.testing.assert_allclose(res.coeffs.values, c.values, atol=1e-11)
    assert 0 < res.gamma_observed < 1


def test_reconstruct_dense_set_is_fast(hat, rng):
    pts = jittered_points((0.0, 8.0), 1 / 64, 0.2, rng)
    X = validate_set(pts, 1 / 64, (0, 8))
    c = WeightedSequence((1,), rng.standard_normal(7))
    gram = sampled_gram(hat, X, PartitionOfUnity(X))
    res = reconstruct(hat, X, operator_Z(hat, X, c), gram=gram)
    np.testing.assert_allclose(res.coeffs.values, c.values, atol=1e-12)
    assert res.gamma_observed < 0.05
    assert estimate_gamma(hat, gram) < 0.05


def test_reconstruct_not_contracting(hat):
    # a single sample per two cells cannot determine the coefficients
    X = validate_set(np.arange(0.0, 17.0, 1.9), 1.0, (0, 16))
    k_lo, k_hi = default_k_range(hat.gen, X.window)
    c = WeightedSequence((k_lo,), np.ones(k_hi - k_lo + 1))
    gram = sampled_gram(hat, X, PartitionOfUnity(X))
    gram = type(gram)(gram.T * 3.0, gram.i_lo, gram.k_range, gram.G)
    with pytest.raises(NotContracting):
        reconstruct(hat, X, operator_Z(hat, X, c) * 3.0, gram=gram, max_iter=200)


def test_streamed_gram_matches_stored(hat):
    n_cells, delta, jitter, seed = 6, 0.3, 0.2, 7
    target = np.zeros((1, n_cells + 1))
    target[0, 1:-1] = [0.5, -1.0, 2.0, 0.0, 1.5]
    stats = hat_jitter_stats(n_cells, delta, jitter, seed, target)
    pts = _stream_points(n_cells, delta, jitter, seed)
    assert stats.n_points == len(pts)
    X = validate_set(pts, delta, (0, n_cells))
    ref = sampled_gram(hat, X, PartitionOfUnity(X), (1, n_cells - 1))
    got = stats.gram()
    assert got.i_lo == ref.i_lo and got.k_range == ref.k_range
    np.testing.assert_allclose(got.T, ref.T, atol=1e-15)
    samples = operator_Z(hat, X, WeightedSequence((0,), target[0]))
    np.testing.assert_allclose(stats.v_target[0], ref.moments(samples), atol=1e-15)
    f = np.abs(samples)
    assert stats.zf_norm2(target[0]) == pytest.approx(math.sqrt(np.sum(f**2)), rel=1e-13)
    assert stats.zf_norm_inf(target[0]) == pytest.approx(f.max(), rel=1e-14)
    lo, hi = stats.zf_norm1_bounds(target[0])
    assert lo <= np.sum(f) * (1 + 1e-13) and np.sum(f) <= hi * (1 + 1e-13)
    assert stats.N_X == relative_separation(pts)


def test_streamed_chunks_agree():
    a = hat_jitter_stats(3, 0.01, 0.2, 11)
    from splinedeconv import _hatstream

    rng = np.random.default_rng(11)
    st_small = _hatstream.stream_hat_jitter(rng, a.n_points, 3, a.h, 0.2, 0.01, 256, np.zeros((0, 4)), chunk=37)
    np.testing.assert_array_equal(st_small.count, a.count)
    np.testing.assert_allclose(st_small.T, a.T, rtol=1e-12)


def test_streamed_density_guard():
    with pytest.raises(ValueError):
        hat_jitter_stats(4, 0.1, 0.6, 0)


def test_best_hat_certificate_beats_default(hat):
    dn = function_amalgam_norm(hat.gen, derivative=True)
    cert = best_hat_certificate(hat.A_gram, dn, math.inf, 0.9)
    d_best = bd.solve_max_delta(cert, hat.A_gram, dn, math.inf, 0.9)
    d_two = bd.solve_max_delta(bspline(2).cert, hat.A_gram, dn, math.inf, 0.9)
    assert d_best > d_two
    assert 1.75 <= cert.alpha <= 5.0


def test_sampling_inequality_small_scale(hat, rng):
    # certified constants for the hat on a δ*-dense set, checked on a few random f
    dn = function_amalgam_norm(hat.gen, derivative=True)
    cert = best_hat_certificate(hat.A_gram, dn, math.inf, 0.9)
    delta = bd.solve_max_delta(cert, hat.A_gram, dn, math.inf, 0.9)
    rho = bd.sampling_rho(cert, hat.A_gram, dn, math.inf, delta)
    stats = hat_jitter_stats(2, delta, 0.2, 3)
    c_2, C_2 = bd.sampling_bounds(cert, hat.A_gram, stats.N_X, delta, rho, 2.0)
    for _ in range(5):
        c = np.zeros(3)
        c[1] = rng.standard_normal()
        r = stats.zf_norm2(c) / piecewise_linear_lp(c, 1.0, 2.0)
        assert c_2 <= r <= C_2
