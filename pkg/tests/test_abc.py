import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from friable.abc import LENGTH_CAP, abc_report, convolve_exact, count_abc_exact
from friable.errors import CapacityError
from friable.saddle import solve_alpha
from friable.sieve import build_table, enumerate_smooth, psi_exact


@pytest.fixture(scope="module")
def small_table():
    return build_table(2000)


def _brute(t, x, y):
    S = enumerate_smooth(t, x, y)
    s = set(int(v) for v in S)
    ordered = same = 0
    for a in S:
        for b in S:
            if a + b > x:
                break
            if int(a + b) in s:
                ordered += 1
                same += a == b
    return ordered, same


def test_examples(small_table):
    assert count_abc_exact(small_table, 8, 2) == 3
    for x in (10, 57, 300):
        assert count_abc_exact(small_table, x, x) == x * (x - 1) // 2


def test_against_brute_force(small_table):
    for x in (1, 2, 30, 500, 2000):
        for y in (2, 3, 5, 10, 50):
            ordered, same = _brute(small_table, x, y)
            n = count_abc_exact(small_table, x, y)
            assert n == ordered
            # ordered pairs: two per unordered pair a < b, one for a = b
            assert n == 2 * ((ordered - same) // 2) + same


def test_monotone(small_table):
    prev = [count_abc_exact(small_table, x, 7) for x in range(1, 400, 13)]
    assert all(b >= a for a, b in zip(prev, prev[1:]))
    by_y = [count_abc_exact(small_table, 1500, y) for y in (2, 3, 5, 7, 11, 50, 200)]
    assert all(b >= a for a, b in zip(by_y, by_y[1:]))


def test_convolution_examples():
    assert list(convolve_exact([0, 1, 1])) == [0, 0, 1, 2, 1]
    assert list(convolve_exact(np.zeros(3, dtype=int))) == [0] * 5
    assert convolve_exact(np.zeros(0, dtype=int)).size == 0
    with pytest.raises(TypeError):
        convolve_exact(np.array([0.5, 1.0]))


def test_convolution_random_trials():
    rng = np.random.default_rng(3)
    for _ in range(100):
        n = int(rng.integers(1, 4097))
        v = rng.integers(0, 2, n)
        assert np.array_equal(convolve_exact(v), np.convolve(v, v))


def test_convolution_multi_modulus():
    # values whose convolution exceeds one and two moduli
    rng = np.random.default_rng(4)
    for bound in (10**4, 10**9):
        v = rng.integers(-bound, bound, 777)
        ref = np.convolve(v.astype(object), v.astype(object))
        got = convolve_exact(v)
        assert all(int(a) == int(b) for a, b in zip(got, ref))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=1, max_size=300))
def test_convolution_schoolbook_property(vals):
    v = np.array(vals, dtype=np.int64)
    c = convolve_exact(v)
    assert np.array_equal(c, np.convolve(v, v))
    assert int(c.sum()) == int(v.sum()) ** 2


def test_capacity():
    with pytest.raises(CapacityError):
        convolve_exact(np.array([2**40] * 3, dtype=np.int64) * 2**20)
    assert LENGTH_CAP == 1 << 27


def test_report(small_table):
    r = abc_report(small_table, None, 8, 2)
    assert (r.psi, r.prediction, r.n_exact, r.ratio) == (4, 4.0, 3, 0.75)
    assert r.bound_shape > 0
    sd = solve_alpha(2000, 40)
    r = abc_report(small_table, sd, 2000, 40)
    assert r.psi == psi_exact(small_table, 2000, 40)
    assert r.ratio == pytest.approx(2 * 2000 * r.n_exact / r.psi**3)
    assert r.bound_shape == pytest.approx(math.log(sd.u + 1) / math.log(40))


def test_ratio_envelope_medium(table):
    for x in (10**5, 10**6):
        y = round(math.exp(2 * math.sqrt(math.log(x) * math.log(math.log(x)))))
        r = abc_report(table, None, x, y)
        assert abs(r.ratio - 1) <= 5 * r.bound_shape
