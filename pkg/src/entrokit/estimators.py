"""Entropy estimators: plug-in, Miller-Madow, and the polynomial estimator.

The polynomial estimator routes each symbol by its (selection) count: rare
symbols get an unbiased estimate of a best-polynomial surrogate of the
entropy integrand on [0, c1*log(k)/n], frequent symbols get the
bias-corrected plug-in term entr(N/n) + 1/(2n).  The sum is clamped to the
a-priori entropy range.

All estimators aggregate per distinct count value (the fingerprint view),
so permuting symbol labels leaves every estimate bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Distribution, DomainError, Histogram, entr, entropy
from .polyapprox import ChebApprox, _two_prod, _two_sum, zero_constant_term
from .sampling import Seed, generator

ADAPTIVE_MODES = ("drop_constant", "pin_origin")


@dataclass(frozen=True)
class EstimatorConfig:
    """Tuning constants of the polynomial estimator.

    c0 sets the polynomial degree L = floor(c0 * log k), c1 the right end
    c1 * log(k) / n of the approximation interval, c2 the count threshold
    c2 * log(k) that routes a symbol to the polynomial branch.  adaptive
    replaces every log k by log n (for unknown alphabet size), forces the
    polynomial to vanish at zero counts, and clamps only below.  The two
    adaptive routes differ in how g(0) = 0 is achieved: "drop_constant"
    zeroes the constant coefficient of the approximant, "pin_origin" keeps
    the original coefficients but pins the zero-count term to 0.
    """

    c0: float = 1.6
    c1: float = 3.5
    c2: float = 1.6
    clamp_upper: bool = True
    adaptive: bool = False
    adaptive_mode: str = "drop_constant"
    split: bool = False

    def __post_init__(self):
        if not (self.c0 > 0 and self.c1 > 0 and self.c2 > 0):
            raise DomainError("c0, c1, c2 must be positive")
        if self.adaptive_mode not in ADAPTIVE_MODES:
            raise DomainError(f"adaptive_mode must be one of {ADAPTIVE_MODES}")

    def k_eff(self, k: int, n: int) -> int:
        return n if self.adaptive else k

    def degree(self, k: int, n: int) -> int:
        k_eff = self.k_eff(k, n)
        if k_eff < 2:
            raise DomainError("effective alphabet size must be at least 2")
        return int(math.floor(self.c0 * math.log(k_eff)))

    def threshold(self, k: int, n: int) -> float:
        return self.c2 * math.log(self.k_eff(k, n))


@dataclass(frozen=True)
class PolyEstimatorTable:
    """Precomputed per-count terms of the polynomial branch for one (k, n).

    coeffs are the monomial coefficients a_m of the unit-interval
    approximant (constant dropped in adaptive drop_constant mode),
    scaled_coeffs the rescaled b_m = a_m / (c1 log k_eff)^(m-1), and
    linear_term the log(n / (c1 log k_eff)) correction.  The implied
    surrogate polynomial satisfies value_at(0) = b_0 / n, which is what a
    zero-count symbol contributes.
    """

    degree: int
    k_eff: int
    n: int
    interval_scale: float  # c1 * log k_eff
    coeffs: np.ndarray
    scaled_coeffs: np.ndarray
    linear_term: float
    pin_origin: bool
    source: ChebApprox

    def __post_init__(self):
        for name in ("coeffs", "scaled_coeffs"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def implied_poly(self, p: float) -> float:
        """The degree-L surrogate this table estimates without bias under Poisson counts."""
        t = self.n * p / self.interval_scale
        acc = 0.0
        for am in self.coeffs[::-1]:
            acc = acc * t + am
        return acc * self.interval_scale / self.n + self.linear_term * p


def build_poly_table(k: int, n: int, cfg: EstimatorConfig, approx: ChebApprox) -> PolyEstimatorTable:
    """Rescale a unit-interval approximant of the entropy integrand for (k, n)."""
    if k < 2:
        raise DomainError("alphabet size must be at least 2")
    if n < 1:
        raise DomainError("sample size must be at least 1")
    expected = cfg.degree(k, n)
    if approx.degree != expected:
        raise DomainError(f"approximation degree {approx.degree} != floor(c0 log k_eff) = {expected}")
    if approx.interval != (0.0, 1.0):
        raise DomainError("approximation must live on [0, 1]")
    if cfg.adaptive and cfg.adaptive_mode == "drop_constant":
        coeffs, _ = zero_constant_term(approx)
    else:
        coeffs = approx.coeffs
    scale = cfg.c1 * math.log(cfg.k_eff(k, n))
    powers = scale ** (np.arange(coeffs.size) - 1.0)
    return PolyEstimatorTable(
        degree=approx.degree,
        k_eff=cfg.k_eff(k, n),
        n=n,
        interval_scale=scale,
        coeffs=coeffs,
        scaled_coeffs=coeffs / powers,
        linear_term=math.log(n / scale),
        pin_origin=cfg.adaptive and cfg.adaptive_mode == "pin_origin",
        source=approx,
    )


def _dd_renorm(hi, lo):
    s, e = _two_sum(hi, lo)
    return s, e


def _dd_mul_d(hi, lo, c):
    p, e = _two_prod(hi, c)
    return _dd_renorm(p, e + lo * c)


def _dd_div_d(hi, lo, c):
    q1 = hi / c
    p, e = _two_prod(q1, c)
    r = ((hi - p) - e + lo) / c
    return _dd_renorm(q1, r)


def _dd_add_dd(hi1, lo1, hi2, lo2):
    s, e = _two_sum(hi1, hi2)
    return _dd_renorm(s, e + lo1 + lo2)


def poly_terms(counts, table: PolyEstimatorTable) -> np.ndarray:
    """Per-count polynomial-branch values, vectorized over counts.

    Evaluated by the scaled recurrence u_0 = c1 log k_eff,
    u_{m+1} = u_m * (j - m) / (c1 log k_eff), so u_m = (j)_m / (c1 log
    k_eff)^(m-1) and no raw falling factorial is ever materialized;
    intermediate terms stay bounded by |a_m| * (j / (c1 log k_eff))^m * c1
    log k_eff even though coefficients can reach 2^(3L).  The recurrence
    and accumulation run in double-double arithmetic: for counts beyond
    the scale the series terms cancel catastrophically, and plain float64
    would surrender most digits of the result.
    """
    js = np.atleast_1d(np.asarray(counts, dtype=float))
    if np.any(js < 0):
        raise DomainError("counts must be nonnegative")
    a = table.coeffs
    scale = table.interval_scale
    u_hi = np.full_like(js, scale)
    u_lo = np.zeros_like(js)
    acc_hi = a[0] * u_hi
    acc_lo = np.zeros_like(js)
    for m in range(1, a.size):
        u_hi, u_lo = _dd_mul_d(u_hi, u_lo, js - (m - 1))
        u_hi, u_lo = _dd_div_d(u_hi, u_lo, scale)
        t_hi, t_lo = _dd_mul_d(u_hi, u_lo, float(a[m]))
        acc_hi, acc_lo = _dd_add_dd(acc_hi, acc_lo, t_hi, t_lo)
    lin_hi, lin_lo = _two_prod(np.full_like(js, table.linear_term), js)
    acc_hi, acc_lo = _dd_add_dd(acc_hi, acc_lo, lin_hi, lin_lo)
    out = (acc_hi + acc_lo) / table.n
    if table.pin_origin:
        out = np.where(js == 0, 0.0, out)
    return out


def poly_term(count: int, table: PolyEstimatorTable) -> float:
    return float(poly_terms(np.array([count]), table)[0])


def plugin_entropy(h: Histogram) -> float:
    """Entropy of the empirical distribution, sum_j entr(N_j / n)."""
    n = h.n
    if n < 1:
        raise DomainError("plug-in entropy needs at least one observation")
    values, mult = np.unique(h.counts, return_counts=True)
    return float(np.sum(mult * entr(values / n)))


def miller_madow(h: Histogram) -> float:
    """Plug-in entropy plus the (observed support - 1) / (2n) bias correction."""
    n = h.n
    if n < 1:
        raise DomainError("Miller-Madow needs at least one observation")
    observed = int(np.count_nonzero(h.counts))
    return plugin_entropy(h) + (observed - 1) / (2.0 * n)


def poly_entropy(
    counts: Histogram,
    counts_select: Histogram | None,
    k: int,
    n: int,
    cfg: EstimatorConfig,
    table: PolyEstimatorTable,
) -> float:
    """Polynomial-approximation entropy estimate with plug-in fallback.

    counts is the estimation histogram; counts_select drives the branch
    choice (the same histogram when cfg.split is off).  Symbols whose
    selection count is <= c2 * log k_eff take the polynomial branch,
    the rest take entr(N/n) + 1/(2n).  The sum is clamped to [0, log k]
    (lower-only in adaptive mode, or when clamp_upper is off).
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    if counts.k != k:
        raise DomainError(f"histogram has {counts.k} symbols, expected {k}")
    if cfg.split:
        if counts_select is None:
            raise DomainError("split mode requires a selection histogram")
        if counts_select.k != k:
            raise DomainError(f"selection histogram has {counts_select.k} symbols, expected {k}")
    else:
        counts_select = counts
    if table.n != n or table.k_eff != cfg.k_eff(k, n):
        raise DomainError("table was built for a different (k, n, config)")

    tau = cfg.threshold(k, n)
    # aggregate over distinct (estimation, selection) pairs: permutation
    # invariant bit-for-bit and linear in the number of distinct pairs
    pairs = np.stack([counts.counts, counts_select.counts], axis=1)
    uniq, mult = np.unique(pairs, axis=0, return_counts=True)
    est_counts = uniq[:, 0]
    sel_counts = uniq[:, 1]
    small = sel_counts <= tau
    values = np.empty(uniq.shape[0])
    values[small] = poly_terms(est_counts[small], table)
    big = ~small
    values[big] = entr(est_counts[big] / n) + 0.5 / n
    total = float(np.sum(mult * values))

    total = max(total, 0.0)
    if cfg.clamp_upper and not cfg.adaptive:
        total = min(total, math.log(k))
    return total


def plugin_bias_probe(d: Distribution, n: int, trials: int, seed: Seed) -> float:
    """Empirical bias of the plug-in estimator over multinomial samples.

    Diagnostic for the classical -(support - 1) / (2n) leading bias term.
    """
    if trials < 100:
        raise DomainError("need at least 100 trials for a stable probe")
    if n < 1:
        raise DomainError("sample size must be at least 1")
    rng = generator(seed)
    counts = rng.multinomial(n, d.probs, size=trials)
    estimates = np.sum(entr(counts / n), axis=1)
    return float(np.mean(estimates) - entropy(d))
