import math
from fractions import Fraction

import numpy as np
import pytest

from entrokit.core import Distribution, DomainError, Histogram, entr
from entrokit.estimators import (
    EstimatorConfig,
    PolyEstimatorTable,
    build_poly_table,
    miller_madow,
    plugin_bias_probe,
    plugin_entropy,
    poly_entropy,
    poly_term,
    poly_terms,
)
from entrokit.sampling import Seed, SyntheticSpec, generator, make_distribution, sample_poissonized, split_histogram
from oracles import poisson_expectation

PHI_35 = 0.6730116670092565  # entr(0.6) + entr(0.4), evaluated directly


class TestPluginEntropy:
    def test_empirical_point_mass(self):
        assert plugin_entropy(Histogram(np.array([5, 0]))) == 0.0

    def test_three_two(self):
        h = Histogram(np.array([3, 2]))
        assert plugin_entropy(h) == pytest.approx(PHI_35, abs=1e-15)
        assert abs(plugin_entropy(h) - 0.6730117) < 1e-7

    def test_empirical_uniform(self):
        h = Histogram(np.array([1, 1, 1, 1]))
        assert plugin_entropy(h) == pytest.approx(math.log(4), abs=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            plugin_entropy(Histogram(np.array([0, 0])))


class TestMillerMadow:
    def test_single_symbol(self):
        assert miller_madow(Histogram(np.array([5, 0]))) == 0.0

    def test_three_two(self):
        h = Histogram(np.array([3, 2]))
        assert miller_madow(h) == pytest.approx(PHI_35 + 0.1, abs=1e-15)

    def test_two_singletons(self):
        h = Histogram(np.array([1, 1]))
        assert miller_madow(h) == pytest.approx(math.log(2) + 0.25, abs=1e-15)

    def test_identity_with_plugin(self):
        h = Histogram(np.array([4, 2, 1, 0, 9]))
        observed = int(np.count_nonzero(h.counts))
        assert miller_madow(h) == plugin_entropy(h) + (observed - 1) / (2.0 * h.n)

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            miller_madow(Histogram(np.array([0])))


class TestEstimatorConfig:
    def test_defaults(self):
        cfg = EstimatorConfig()
        assert (cfg.c0, cfg.c1, cfg.c2) == (1.6, 3.5, 1.6)

    def test_degree_pin_at_1e5(self):
        # guards log-base mistakes: floor(1.6 * ln(1e5)) must be 18
        assert EstimatorConfig().degree(100_000, 1) == 18

    def test_adaptive_uses_n(self):
        cfg = EstimatorConfig(adaptive=True)
        assert cfg.k_eff(10_000, 500) == 500
        assert cfg.degree(10_000, 500) == int(1.6 * math.log(500))

    def test_validation(self):
        with pytest.raises(DomainError):
            EstimatorConfig(c0=0.0)
        with pytest.raises(DomainError):
            EstimatorConfig(adaptive_mode="nope")


class TestBuildTable:
    def test_paper_scale_parameters(self, phi_approx):
        cfg = EstimatorConfig()
        k, n = 100_000, 1000
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        assert table.degree == 18
        assert round(table.interval_scale) == 40  # c1 log k
        assert table.interval_scale == pytest.approx(3.5 * math.log(1e5), rel=1e-15)

    def test_unit_scale_keeps_coeffs(self, phi_approx):
        k, n = 1000, 100
        cfg = EstimatorConfig(c1=1.0 / math.log(k))
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        assert table.interval_scale == pytest.approx(1.0, rel=1e-12)
        np.testing.assert_allclose(table.scaled_coeffs, table.coeffs, rtol=1e-12)

    def test_degree_mismatch_rejected(self, phi_approx):
        cfg = EstimatorConfig()
        with pytest.raises(DomainError):
            build_poly_table(100_000, 1000, cfg, phi_approx(6))

    def test_zero_count_value(self, phi_approx):
        cfg = EstimatorConfig()
        k, n = 1000, 50
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        a0 = table.coeffs[0]
        assert poly_term(0, table) == pytest.approx(a0 * table.interval_scale / n, rel=1e-12)
        assert table.implied_poly(0.0) == pytest.approx(table.scaled_coeffs[0] / n, rel=1e-12)

    @pytest.mark.parametrize("mode", ["drop_constant", "pin_origin"])
    def test_adaptive_zero_at_origin(self, mode, phi_approx):
        cfg = EstimatorConfig(adaptive=True, adaptive_mode=mode)
        k, n = 10_000, 400
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        assert poly_term(0, table) == 0.0
        if mode == "drop_constant":
            assert table.implied_poly(0.0) == 0.0
            assert table.coeffs[0] == 0.0
        else:
            # original coefficients retained away from the origin
            assert table.coeffs[0] != 0.0
            assert poly_term(1, table) != 0.0


class TestUnbiasedness:
    def test_quadratic_fixture(self):
        # coefficients (0, 0, 1) on scale 2 with n = 4 imply the surrogate
        # 2 p^2 + p log 2; the per-count terms must average to it exactly
        table = PolyEstimatorTable(
            degree=2,
            k_eff=0,
            n=4,
            interval_scale=2.0,
            coeffs=np.array([0.0, 0.0, 1.0]),
            scaled_coeffs=np.array([0.0, 0.0, 0.5]),
            linear_term=math.log(2.0),
            pin_origin=False,
            source=None,
        )
        for p in (0.05, 0.2):
            assert table.implied_poly(p) == pytest.approx(2 * p * p + p * math.log(2), rel=1e-14)
            expect = poisson_expectation(lambda js: poly_terms(js, table), 4 * p)
            assert expect == pytest.approx(table.implied_poly(p), abs=1e-10)

    def test_poisson_expectation_matches_surrogate(self, phi_approx):
        cfg = EstimatorConfig()
        k, n = 100, 50
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        right_end = table.interval_scale / n
        for p in np.linspace(0.0, right_end, 12):
            expect = poisson_expectation(lambda js: poly_terms(js, table), n * p)
            assert expect == pytest.approx(table.implied_poly(p), abs=1e-8)

    def test_bias_dominated_by_approximation_error(self, phi_approx):
        cfg = EstimatorConfig()
        k, n = 100, 50
        approx = phi_approx(cfg.degree(k, n))
        table = build_poly_table(k, n, cfg, approx)
        right_end = table.interval_scale / n
        budget = right_end * approx.error + 1e-8
        for p in np.linspace(0.0, right_end, 12):
            expect = poisson_expectation(lambda js: poly_terms(js, table), n * p)
            assert abs(expect - entr(p)) <= budget


class TestRecurrenceExactness:
    def test_matches_rational_arithmetic(self, phi_approx):
        # scaled recurrence vs exact Fraction evaluation of the same series;
        # counts beyond the scale make the series catastrophically
        # cancellative, which the double-double path must survive
        cfg = EstimatorConfig()
        k, n = 200_000_000, 1000
        approx = phi_approx(cfg.degree(k, n))
        assert approx.degree == 30
        table = build_poly_table(k, n, cfg, approx)
        scale = Fraction(table.interval_scale)
        lin = Fraction(table.linear_term)
        for j in list(range(0, 31, 5)) + [100, 200]:
            exact = Fraction(0)
            ff = Fraction(1)
            for m, am in enumerate(table.coeffs):
                if m > 0:
                    ff *= Fraction(j - (m - 1))
                term = Fraction(float(am)) * ff / scale ** (m - 1)
                exact += term
            exact = (exact + lin * j) / table.n
            got = poly_term(j, table)
            assert got == pytest.approx(float(exact), rel=1e-9)


class TestPolyEntropy:
    @pytest.fixture()
    def small_table(self, phi_approx):
        cfg = EstimatorConfig()
        k, n = 200, 60
        return cfg, k, n, build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))

    def test_all_zero_counts(self, small_table, phi_approx):
        cfg, k, n, table = small_table
        h = Histogram(np.zeros(k, dtype=np.int64))
        expected = min(max(k * poly_term(0, table), 0.0), math.log(k))
        assert poly_entropy(h, None, k, n, cfg, table) == pytest.approx(expected, rel=1e-12)

    def test_all_zero_counts_adaptive(self, phi_approx):
        cfg = EstimatorConfig(adaptive=True)
        k, n = 200, 60
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        h = Histogram(np.zeros(k, dtype=np.int64))
        assert poly_entropy(h, None, k, n, cfg, table) == 0.0

    def test_single_branch_large_counts(self, small_table):
        cfg, k, n, table = small_table
        tau = cfg.threshold(k, n)
        per = int(tau) + 5
        counts = np.zeros(k, dtype=np.int64)
        counts[:10] = per
        h = Histogram(counts)
        n_eff = 10 * per
        # every selection count exceeds the threshold, but zero-count
        # symbols still route to the polynomial branch
        # rebuild the table for the realized sample size
        table_eff = build_poly_table(k, n_eff, cfg, table.source)
        expected = 10 * (entr(per / n_eff) + 0.5 / n_eff) + (k - 10) * poly_term(0, table_eff)
        expected = min(max(expected, 0.0), math.log(k))
        assert poly_entropy(h, None, k, n_eff, cfg, table_eff) == pytest.approx(expected, rel=1e-10)

    def test_permutation_invariance_bitwise(self, small_table):
        cfg, k, n, table = small_table
        rng = generator(Seed(base=5, stream=0))
        counts = rng.poisson(0.6, size=k)
        counts[0] = 50
        h = Histogram(counts)
        perm = rng.permutation(k)
        hp = Histogram(counts[perm])
        assert poly_entropy(h, None, k, n, cfg, table) == poly_entropy(hp, None, k, n, cfg, table)
        assert plugin_entropy(h) == plugin_entropy(hp)
        assert miller_madow(h) == miller_madow(hp)

    def test_split_mode_permutation_invariance(self, small_table, phi_approx):
        cfg, k, n, table = small_table
        cfg_split = EstimatorConfig(split=True)
        table = build_poly_table(k, n, cfg_split, phi_approx(cfg_split.degree(k, n)))
        rng = generator(Seed(base=6, stream=0))
        est = rng.poisson(1.0, size=k)
        sel = rng.poisson(1.0, size=k)
        perm = rng.permutation(k)
        a = poly_entropy(Histogram(est), Histogram(sel), k, n, cfg_split, table)
        b = poly_entropy(Histogram(est[perm]), Histogram(sel[perm]), k, n, cfg_split, table)
        assert a == b

    def test_range_clamped(self, small_table):
        cfg, k, n, table = small_table
        rng = generator(Seed(base=7, stream=0))
        for _ in range(50):
            counts = rng.poisson(2.0, size=k)
            v = poly_entropy(Histogram(counts), None, k, n, cfg, table)
            assert 0.0 <= v <= math.log(k)

    def test_no_upper_clamp_flag(self, phi_approx):
        cfg = EstimatorConfig(clamp_upper=False)
        k, n = 200, 60
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        h = Histogram(np.ones(k, dtype=np.int64) * 0)
        v = poly_entropy(h, None, k, n, cfg, table)
        assert v == pytest.approx(k * poly_term(0, table), rel=1e-12)
        assert v > 0.0

    def test_length_mismatch_rejected(self, small_table):
        cfg, k, n, table = small_table
        with pytest.raises(DomainError):
            poly_entropy(Histogram(np.zeros(k + 1, dtype=np.int64)), None, k, n, cfg, table)

    def test_split_requires_selection(self, small_table, phi_approx):
        cfg = EstimatorConfig(split=True)
        k, n = 200, 60
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        with pytest.raises(DomainError):
            poly_entropy(Histogram(np.zeros(k, dtype=np.int64)), None, k, n, cfg, table)

    def test_table_mismatch_rejected(self, small_table, phi_approx):
        cfg, k, n, table = small_table
        with pytest.raises(DomainError):
            poly_entropy(Histogram(np.zeros(k, dtype=np.int64)), None, k, n + 1, cfg, table)

    def test_data_rich_uniform_poissonized(self, phi_approx):
        # k=1e4, n=1e6: the plug-in branch dominates and the 1/(2n) term
        # corrects the (k-1)/(2n) bias, leaving the mean within 0.01 nats
        cfg = EstimatorConfig()
        k, n = 10_000, 1_000_000
        d = make_distribution(SyntheticSpec("uniform", k))
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        estimates = []
        for trial in range(50):
            h = sample_poissonized(d, float(n), Seed(base=40, stream=trial))
            estimates.append(poly_entropy(h, None, k, n, cfg, table))
        assert abs(float(np.mean(estimates)) - math.log(k)) <= 0.01

    def test_split_pipeline_runs(self, phi_approx):
        cfg = EstimatorConfig(split=True)
        k, n = 500, 200
        d = make_distribution(SyntheticSpec("zipf", k, alpha=1.0))
        doubled = sample_poissonized(d, 2.0 * n, Seed(base=8, stream=0))
        est, sel = split_histogram(doubled, Seed(base=8, stream=1))
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        v = poly_entropy(est, sel, k, n, cfg, table)
        assert 0.0 <= v <= math.log(k)

    def test_split_expectation_exact_oracle(self, phi_approx):
        # under Poissonized splitting the selection and estimation counts
        # are independent, so the unclamped expectation decomposes per
        # symbol into P(sel <= tau) * surrogate(p) plus the plug-in branch
        # weighted by P(sel > tau); both sides computed independently
        from scipy import stats

        cfg = EstimatorConfig(split=True)
        k, n = 50, 400
        d = make_distribution(SyntheticSpec("zipf", k, alpha=1.0))
        table = build_poly_table(k, n, cfg, phi_approx(cfg.degree(k, n)))
        tau = cfg.threshold(k, n)

        expected = 0.0
        for p in d.probs:
            lam = n * p
            jmax = int(stats.poisson.isf(1e-13, lam)) + 10
            js = np.arange(jmax + 1)
            pmf = stats.poisson.pmf(js, lam)
            p_small = float(stats.poisson.cdf(int(tau), lam))
            plug_mean = float(np.sum((entr(js / n) + 0.5 / n) * pmf))
            expected += p_small * table.implied_poly(p) + (1 - p_small) * plug_mean

        trials = 3000
        values = np.empty(trials)
        for t in range(trials):
            doubled = sample_poissonized(d, 2.0 * n, Seed(base=90, stream=2 * t))
            est, sel = split_histogram(doubled, Seed(base=90, stream=2 * t + 1))
            values[t] = poly_entropy(est, sel, k, n, cfg, table)
        # the clamp must never have fired, or linearity breaks
        assert values.min() > 0.0 and values.max() < math.log(k)
        se = float(np.std(values, ddof=1)) / math.sqrt(trials)
        assert abs(float(np.mean(values)) - expected) <= 5 * se


class TestPluginBiasProbe:
    def test_point_mass_unbiased(self):
        d = Distribution(np.array([1.0, 0.0]))
        assert plugin_bias_probe(d, 100, 200, Seed(base=1, stream=0)) == 0.0

    def test_binary_uniform_large_n(self):
        # leading bias term -(k-1)/(2n) = -5e-7; delta-method variance of
        # the plug-in at p = 1/2 gives se ~ sqrt(3)/n per trial
        n, trials = 1_000_000, 400
        d = Distribution(np.array([0.5, 0.5]))
        bias = plugin_bias_probe(d, n, trials, Seed(base=2, stream=0))
        tol = 1e-6 + 5 * (math.sqrt(3.0) / n) / math.sqrt(trials)
        assert abs(bias) <= tol

    def test_trials_floor(self):
        d = Distribution(np.array([0.5, 0.5]))
        with pytest.raises(DomainError):
            plugin_bias_probe(d, 10, 99, Seed())
