import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from splinedeconv.sequences import (
    MultiIndex,
    WeightedSequence,
    apply_weight,
    convolve,
    load_sequence,
    momentum,
    save_sequence,
)

finite = st.floats(-10, 10, allow_nan=False)
seq_1d = st.builds(
    lambda vals, off: WeightedSequence.from_1d(np.array(vals), off),
    st.lists(finite, min_size=1, max_size=12),
    st.integers(-20, 20),
)


def test_multi_index_order_and_below():
    a = MultiIndex((2, 1))
    below = a.below()
    assert len(below) == 6
    assert below[0] == MultiIndex((0, 0)) and below[-1] == a
    assert all(b <= a for b in below)
    assert MultiIndex((1, 0)) < a and not a < a
    assert not MultiIndex((0, 2)) <= a
    assert a.binom(MultiIndex((1, 1))) == 2


def test_multi_index_rejects_negative():
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_sequence_indexing_and_restrict():
    s = WeightedSequence.from_1d([1, 2, 3], -1)
    assert s[-1] == 1 and s[1] == 3 and s[5] == 0
    r = s.restrict([-3], [0])
    assert r.offset == (-3,)
    np.testing.assert_array_equal(r.values, [0, 0, 1, 2])
    assert s.upper == (1,)


def test_reflect_and_hermitian():
    s = WeightedSequence.from_1d([1 - 1j, 5, 1 + 1j], -1)
    assert s.is_hermitian()
    r = WeightedSequence.from_1d([1, 2, 3], 2).reflect()
    assert r.offset == (-4,)
    assert r[-2] == 1 and r[-4] == 3


def test_trim_drops_zero_edges():
    s = WeightedSequence.from_1d([0, 0, 1, 2, 0], 3).trim()
    assert s.offset == (5,) and s.shape == (2,)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        WeightedSequence((0,), np.array([]))
    with pytest.raises(ValueError):
        WeightedSequence((0,), np.array([1.0, np.nan]))
    with pytest.raises(ValueError):
        WeightedSequence((0, 0), np.array([1.0]))


def test_momentum_known_values():
    a = WeightedSequence.from_1d([1, 1, 1], -1)
    # weights k = -1, 0, 1
    assert momentum(a, 1, "L1").value == 2.0
    assert momentum(a, 1, "L2").value == pytest.approx(math.sqrt(2))
    assert momentum(a, 0, "L2").value == pytest.approx(math.sqrt(3))
    with pytest.raises(ValueError):
        momentum(a, 1, "OP")


def test_weight_2d():
    a = WeightedSequence((-1, 0), np.ones((3, 2)))
    w = apply_weight(a, MultiIndex((1, 1)))
    # k1 * k2 over k1 in {-1,0,1}, k2 in {0,1}
    np.testing.assert_array_equal(w.values.real, [[0, -1], [0, 0], [0, 1]])


def test_convolve_matches_polynomial_product():
    a = WeightedSequence.from_1d([1, 2], -1)
    b = WeightedSequence.from_1d([3, 0, 1], 2)
    c = convolve(a, b)
    assert c.offset == (1,)
    np.testing.assert_array_equal(c.values.real, np.polymul([1, 2], [3, 0, 1])[::-1][::-1])


def test_json_round_trip(tmp_path, rng):
    a = WeightedSequence((-2, 3), rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4)))
    save_sequence(a, tmp_path / "a.json")
    b = load_sequence(tmp_path / "a.json")
    assert b.offset == a.offset
    np.testing.assert_array_equal(b.values, a.values)


def test_json_shape_mismatch():
    with pytest.raises(ValueError):
        WeightedSequence.from_dict({"dim": 1, "offset": [0], "shape": [3], "re": [1, 2]})


@given(seq_1d, seq_1d)
def test_convolution_commutes(a, b):
    assert convolve(a, b).allclose(convolve(b, a), rtol=1e-12, atol=1e-12)


@given(seq_1d, seq_1d)
def test_l1_norm_submultiplicative(a, b):
    assert convolve(a, b).norm(1) <= a.norm(1) * b.norm(1) * (1 + 1e-12) + 1e-12


@given(seq_1d)
def test_norm_ordering(a):
    assert a.norm(np.inf) <= a.norm(2) * (1 + 1e-12)
    assert a.norm(2) <= a.norm(1) * (1 + 1e-12)


@given(seq_1d, st.integers(0, 3))
def test_momentum_l2_below_l1(a, e):
    assert momentum(a, e, "L2").value <= momentum(a, e, "L1").value * (1 + 1e-12) + 1e-300


def test_norm_survives_underflow_and_overflow():
    tiny = WeightedSequence.from_1d([3e-200, 4e-200])
    assert tiny.norm(2) == pytest.approx(5e-200, rel=1e-15)
    huge = WeightedSequence.from_1d([3e200, 4e200])
    assert huge.norm(2) == pytest.approx(5e200, rel=1e-15)
