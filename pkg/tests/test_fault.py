import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from faultyms import FaultChannel, LevelPmf, QuantGrid, corrupt_message, corrupt_pmf, corrupt_words, pattern_error_prob
from oracles import corrupted_law, random_pmf


def test_pattern_error_prob_examples():
    assert pattern_error_prob(0b00100, 0.1, 5) == pytest.approx(0.06561, abs=1e-15)
    assert pattern_error_prob(0, 0.2, 5) == pytest.approx(0.8**5)
    assert sum(pattern_error_prob(e, 0.13, 5) for e in range(32)) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("delta", [-0.1, 0.51, 1.0])
def test_pattern_error_prob_rejects(delta):
    with pytest.raises(ValueError):
        pattern_error_prob(1, delta, 5)


@pytest.mark.parametrize("bits", [2, 3, 5, 7])
@pytest.mark.parametrize("delta", [0.0, 1e-3, 0.2, 0.5])
def test_transition_matrix(bits, delta):
    T = FaultChannel(delta, bits).transition
    assert T.shape == (2**bits, 2**bits)
    np.testing.assert_allclose(T.sum(axis=1), 1.0, atol=1e-12)
    np.testing.assert_array_equal(T, T.T)
    if delta == 0:
        np.testing.assert_array_equal(T, np.eye(2**bits))
    if delta == 0.5:
        np.testing.assert_allclose(T, 2.0**-bits, rtol=1e-14)


def test_channel_rejects_unphysical():
    with pytest.raises(ValueError):
        FaultChannel(0.6, 5)


def test_corrupt_identity_at_zero():
    g = QuantGrid(5)
    P = LevelPmf(g, random_pmf(np.random.default_rng(0), 31))
    out = corrupt_pmf(P, FaultChannel(0.0, 5))
    np.testing.assert_array_equal(out.mass, P.mass)


def test_corrupt_uniform_at_half():
    g = QuantGrid(5)
    P = LevelPmf(g, random_pmf(np.random.default_rng(1), 31))
    out = corrupt_pmf(P, FaultChannel(0.5, 5)).mass
    assert out[15] == pytest.approx(2 / 32, abs=1e-15)
    np.testing.assert_allclose(np.delete(out, 15), 1 / 32, atol=1e-15)


def test_corrupt_point_mass_b3():
    g = QuantGrid(3)
    out = corrupt_pmf(LevelPmf.point(g, 3 + 1), FaultChannel(0.1, 3)).mass
    # frozen from the brute-force enumeration in oracles.corrupted_law
    expected = corrupted_law(np.eye(7)[4], 3, 0.1)
    np.testing.assert_allclose(out, expected, atol=1e-15)
    assert out[3] == pytest.approx(0.09, abs=1e-15)
    assert out[4] == pytest.approx(0.729, abs=1e-15)
    np.testing.assert_allclose(expected, [0.009, 0.001, 0.081, 0.09, 0.729, 0.009, 0.081], atol=1e-15)


def test_corrupt_bit_mismatch():
    with pytest.raises(ValueError):
        corrupt_pmf(LevelPmf.point(QuantGrid(4), 0), FaultChannel(0.1, 5))


@pytest.mark.parametrize("bits", [2, 3, 4, 5])
def test_corrupt_matches_enumeration(bits):
    rng = np.random.default_rng(bits)
    L = 2**bits - 1
    for _ in range(20):
        p = random_pmf(rng, L)
        delta = float(rng.uniform(0, 0.5))
        got = corrupt_pmf(p, FaultChannel(delta, bits))
        np.testing.assert_allclose(got, corrupted_law(p, bits, delta), rtol=0, atol=1e-12)


pmfs = st.lists(st.floats(0, 1), min_size=15, max_size=15).filter(lambda v: sum(v) > 1e-3)


@settings(max_examples=60, deadline=None)
@given(pmfs, st.floats(0, 0.5))
def test_corrupt_normalized_and_mirror_equivariant(v, delta):
    g = QuantGrid(4)
    P = LevelPmf(g, np.array(v) / sum(v))
    ch = FaultChannel(delta, 4)
    out = corrupt_pmf(P, ch)
    assert out.total() == pytest.approx(1.0, abs=1e-12)
    assert np.all(out.mass >= 0)
    np.testing.assert_allclose(out.mirror().mass, corrupt_pmf(P.mirror(), ch).mass, atol=1e-15)


def _cascade(d1, d2):
    return d1 * (1 - d2) + d2 * (1 - d1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 0.5), st.floats(0, 0.5), st.integers(2, 6))
def test_cascade_composition_on_words(d1, d2, bits):
    T1, T2 = FaultChannel(d1, bits).transition, FaultChannel(d2, bits).transition
    np.testing.assert_allclose(T1 @ T2, FaultChannel(_cascade(d1, d2), bits).transition, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(pmfs, st.floats(0, 0.5), st.floats(0, 0.5))
def test_cascade_composition_symmetric_pmf(v, d1, d2):
    P = np.array(v) + np.array(v)[::-1]
    P /= P.sum()
    twice = corrupt_pmf(corrupt_pmf(P, FaultChannel(d1, 4)), FaultChannel(d2, 4))
    once = corrupt_pmf(P, FaultChannel(_cascade(d1, d2), 4))
    np.testing.assert_allclose(twice, once, atol=1e-12)


def test_cascade_breaks_for_asymmetric_pmf():
    # one pass leaves "+0" likelier than "-0"; re-splitting zero evenly forgets that
    P = LevelPmf.point(QuantGrid(3), 4)
    twice = corrupt_pmf(corrupt_pmf(P, FaultChannel(0.1, 3)), FaultChannel(0.1, 3))
    once = corrupt_pmf(P, FaultChannel(_cascade(0.1, 0.1), 3))
    assert not np.allclose(twice.mass, once.mass, atol=1e-6)
    assert twice.total() == pytest.approx(1.0, abs=1e-14)


def test_corrupt_message_extremes():
    rng = np.random.default_rng(0)
    words = np.arange(32)
    np.testing.assert_array_equal(corrupt_words(words, 0.0, 5, rng), words)
    np.testing.assert_array_equal(corrupt_words(words, 1.0, 5, rng), words ^ 0b11111)
    assert all(corrupt_message(w, FaultChannel(0.0, 5), rng) == w for w in range(32))


def test_empirical_flip_rate():
    rng = np.random.default_rng(12345)
    n, bits, delta = 1_000_000, 5, 0.01
    out = corrupt_words(np.zeros(n, dtype=np.int64), delta, bits, rng)
    for k in range(bits):
        rate = np.mean((out >> k) & 1)
        se = np.sqrt(delta * (1 - delta) / n)
        assert abs(rate - delta) <= 3 * se
