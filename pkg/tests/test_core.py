import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entrokit.core import (
    Distribution,
    DomainError,
    Histogram,
    entr,
    entropy,
    falling_factorial,
    fingerprint,
    nats_to_bits,
    read_distribution,
    read_histogram,
    write_distribution,
    write_histogram,
)
from entrokit.sampling import Seed, generator


class TestEntr:
    def test_zero_is_continuous_extension(self):
        assert entr(0.0) == 0.0

    def test_one(self):
        assert entr(1.0) == 0.0

    def test_maximizer(self):
        # 1/e is the unique maximizer on [0, 1], with value 1/e
        assert entr(1.0 / math.e) == pytest.approx(1.0 / math.e, abs=1e-14)
        assert abs(entr(1 / math.e) - 0.3678794) < 1e-7

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            entr(-1e-9)

    def test_nan_rejected(self):
        with pytest.raises(DomainError):
            entr(float("nan"))

    def test_infinite_rejected(self):
        with pytest.raises(DomainError):
            entr(float("inf"))

    def test_array_input(self):
        out = entr(np.array([0.0, 0.5, 1.0]))
        np.testing.assert_allclose(out, [0.0, 0.5 * math.log(2.0), 0.0], atol=1e-15)

    @given(
        x=st.floats(0, 1),
        y=st.floats(0, 1),
        t=st.floats(0, 1),
    )
    @settings(max_examples=300, deadline=None)
    def test_concavity(self, x, y, t):
        mix = entr(t * x + (1 - t) * y)
        assert mix >= t * entr(x) + (1 - t) * entr(y) - 1e-12


class TestDistribution:
    def test_valid(self):
        d = Distribution(np.array([0.25, 0.75]))
        assert d.k == 2

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            Distribution(np.array([1.1, -0.1]))

    def test_bad_sum_rejected_not_renormalized(self):
        with pytest.raises(DomainError):
            Distribution(np.array([0.5, 0.6]))

    def test_sum_tolerance_scales_with_k(self):
        k = 1000
        probs = np.full(k, 1.0 / k)
        probs[0] += 0.5e-12 * k
        Distribution(probs)  # inside 1e-12 * k
        probs[0] += 2e-12 * k
        with pytest.raises(DomainError):
            Distribution(probs)

    def test_immutable(self):
        d = Distribution(np.array([0.5, 0.5]))
        with pytest.raises(ValueError):
            d.probs[0] = 0.9


class TestEntropy:
    def test_uniform_is_log_k(self):
        d = Distribution(np.full(4, 0.25))
        assert entropy(d) == pytest.approx(math.log(4), abs=1e-15)
        assert abs(entropy(d) - 1.3862944) < 1e-7

    def test_point_mass_is_zero(self):
        d = Distribution(np.array([1.0, 0.0, 0.0]))
        assert entropy(d) == 0.0

    def test_two_thirds_one_third(self):
        # independent evaluation of the defining sum
        expected = (2 / 3) * math.log(3 / 2) + (1 / 3) * math.log(3)
        d = Distribution(np.array([2 / 3, 1 / 3]))
        assert entropy(d) == pytest.approx(expected, abs=1e-15)
        assert abs(entropy(d) - 0.6365142) < 1e-7

    @given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_range_property(self, weights):
        probs = np.array(weights) / np.sum(weights)
        d = Distribution(probs)
        h = entropy(d)
        assert -1e-12 <= h <= math.log(d.k) + 1e-9

    def test_uniform_maximizes(self):
        rng = np.random.default_rng(7)
        k = 50
        uniform = Distribution(np.full(k, 1.0 / k))
        for _ in range(20):
            w = rng.random(k) + 1e-3
            perturbed = Distribution(w / w.sum())
            assert entropy(perturbed) <= entropy(uniform) + 1e-12


class TestHistogram:
    def test_n_is_sum(self):
        h = Histogram(np.array([3, 1, 1, 0]))
        assert h.n == 5
        assert h.k == 4

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            Histogram(np.array([1, -1]))

    def test_non_integer_rejected(self):
        with pytest.raises(DomainError):
            Histogram(np.array([1.5, 2.0]))


class TestFingerprint:
    def test_direct_count(self):
        fp = fingerprint(Histogram(np.array([3, 1, 1, 0])))
        assert fp.h == {1: 2, 3: 1}

    def test_empty(self):
        fp = fingerprint(Histogram(np.array([0, 0])))
        assert fp.h == {}

    def test_mass_balance(self):
        h = Histogram(np.array([2, 2, 2]))
        fp = fingerprint(h)
        assert fp.h == {2: 3}
        assert fp.n == 6 == h.n

    @given(st.lists(st.integers(0, 20), min_size=1, max_size=60))
    @settings(max_examples=200, deadline=None)
    def test_invariants(self, counts):
        h = Histogram(np.array(counts, dtype=np.int64))
        fp = fingerprint(h)
        assert fp.n == h.n
        assert fp.observed_symbols == int(np.count_nonzero(h.counts))


class TestFallingFactorial:
    def test_examples(self):
        assert falling_factorial(5, 2) == 20
        assert falling_factorial(3, 5) == 0
        assert falling_factorial(7, 0) == 1

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            falling_factorial(-1, 2)
        with pytest.raises(DomainError):
            falling_factorial(2, -1)

    @given(st.integers(0, 60), st.integers(0, 60))
    @settings(max_examples=200, deadline=None)
    def test_matches_factorial_ratio(self, x, m):
        expected = math.factorial(x) // math.factorial(x - m) if m <= x else 0
        assert falling_factorial(x, m) == expected

    def test_large_values_exact(self):
        # Python ints are exact at any width
        assert falling_factorial(200, 100) == math.factorial(200) // math.factorial(100)

    @pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_poisson_factorial_moment(self, lam, m):
        # E[(X)_m] = lam^m for X ~ Poisson(lam), within 5 standard errors
        rng = generator(Seed(base=99, stream=int(lam * 10) * 10 + m))
        draws = rng.poisson(lam, size=200_000).astype(float)
        values = np.ones_like(draws)
        for i in range(m):
            values *= draws - i
        se = np.std(values, ddof=1) / math.sqrt(values.size)
        assert abs(np.mean(values) - lam**m) <= 5 * se


class TestFileFormats:
    def test_histogram_round_trip(self, tmp_path):
        h = Histogram(np.array([3, 0, 2, 1]))
        path = tmp_path / "h.csv"
        write_histogram(h, path)
        back = read_histogram(path)
        np.testing.assert_array_equal(back.counts, h.counts)

    def test_histogram_no_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("0,5\n2,1\n")
        h = read_histogram(path)
        np.testing.assert_array_equal(h.counts, [5, 0, 1])

    def test_histogram_explicit_k_pads_zeros(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("symbol,count\n1,4\n")
        h = read_histogram(path, k=5)
        np.testing.assert_array_equal(h.counts, [0, 4, 0, 0, 0])

    def test_histogram_id_out_of_range(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("7,1\n")
        with pytest.raises(DomainError):
            read_histogram(path, k=3)

    def test_bad_line(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("0,1,2\n")
        with pytest.raises(DomainError):
            read_histogram(path)

    def test_distribution_round_trip(self, tmp_path):
        d = Distribution(np.array([0.125, 0.5, 0.375]))
        path = tmp_path / "d.csv"
        write_distribution(d, path)
        back = read_distribution(path)
        np.testing.assert_array_equal(back.probs, d.probs)


def test_nats_to_bits():
    assert nats_to_bits(math.log(2.0)) == pytest.approx(1.0, abs=1e-15)
