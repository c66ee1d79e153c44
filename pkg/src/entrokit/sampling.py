"""Synthetic distributions and reproducible samplers.

Randomness comes from numpy's Philox counter-based generator keyed by a
(base, stream) pair, so every trial owns an independent stream and draws
are reproducible on any thread schedule.  Poisson variates use inversion
for small means and transformed rejection for large ones, and multinomial
sampling runs a conditional binomial chain over symbols; both are the
generator's native algorithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Distribution, DomainError, Histogram

_UINT64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Seed:
    """Key of a counter-based random stream; (base, stream) fully determines draws."""

    base: int = 0
    stream: int = 0

    def __post_init__(self):
        for name in ("base", "stream"):
            v = getattr(self, name)
            if not (0 <= v <= _UINT64_MAX):
                raise DomainError(f"{name} must fit in 64 unsigned bits")


def generator(seed: Seed) -> np.random.Generator:
    key = np.array([seed.base, seed.stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a synthetic distribution over k symbols.

    kind is one of "uniform", "zipf" (mass proportional to i^-alpha), or
    "geo_zipf_mix" (first half proportional to 1/i, second half geometric
    with ratio 1 - 2/k, each half carrying total mass 1/2).
    """

    kind: str
    k: int
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "zipf", "geo_zipf_mix"):
            raise DomainError(f"unknown distribution kind {self.kind!r}")
        if self.k < 1:
            raise DomainError("alphabet size must be positive")
        if self.kind == "zipf":
            if self.alpha is None or not self.alpha > 0:
                raise DomainError("zipf requires alpha > 0")
        if self.kind == "geo_zipf_mix" and self.k % 2 != 0:
            raise DomainError("geo_zipf_mix requires even k")

    @property
    def label(self) -> str:
        if self.kind == "uniform":
            return "uniform"
        if self.kind == "zipf":
            return f"zipf:{self.alpha:g}"
        return "mix"

    @classmethod
    def parse(cls, text: str, k: int) -> "SyntheticSpec":
        """Parse the CLI grammar: `uniform`, `zipf:<alpha>`, `mix`."""
        text = text.strip()
        if text == "uniform":
            return cls("uniform", k)
        if text == "mix":
            return cls("geo_zipf_mix", k)
        if text.startswith("zipf:"):
            try:
                alpha = float(text.split(":", 1)[1])
            except ValueError as exc:
                raise DomainError(f"bad zipf alpha in {text!r}") from exc
            return cls("zipf", k, alpha)
        raise DomainError(f"unknown distribution spec {text!r}")


def make_distribution(spec: SyntheticSpec) -> Distribution:
    k = spec.k
    if spec.kind == "uniform":
        probs = np.full(k, 1.0 / k)
    elif spec.kind == "zipf":
        # direct summation of the normalizer; exact to ~1e-12 relative for k <= 1e7
        weights = np.arange(1, k + 1, dtype=float) ** -spec.alpha
        probs = weights / weights.sum()
    else:
        half = k // 2
        i = np.arange(1, half + 1, dtype=float)
        zipf_half = 1.0 / i
        zipf_half *= 0.5 / zipf_half.sum()
        geo_half = (1.0 - 2.0 / k) ** (i - 1.0)
        geo_half *= 0.5 / geo_half.sum()
        probs = np.concatenate([zipf_half, geo_half])
    return Distribution(probs)


def sample_multinomial(d: Distribution, n: int, seed: Seed) -> Histogram:
    """Histogram of n draws with replacement; marginals Binomial(n, p_j)."""
    if n < 0:
        raise DomainError("sample size must be nonnegative")
    if n == 0:
        return Histogram(np.zeros(d.k, dtype=np.int64))
    rng = generator(seed)
    return Histogram(rng.multinomial(n, d.probs))


def sample_poissonized(d: Distribution, n: float, seed: Seed) -> Histogram:
    """Independent Poisson(n * p_j) count per symbol; total has mean n."""
    if n < 0:
        raise DomainError("sample budget must be nonnegative")
    rng = generator(seed)
    return Histogram(rng.poisson(n * d.probs))


def split_histogram(m: Histogram, seed: Seed) -> tuple[Histogram, Histogram]:
    """Bernoulli(1/2) thinning into two histograms that sum back to the input.

    When the input counts are Poisson(2 * lambda_j), the two halves are
    independent Poisson(lambda_j) each, which is what downstream selection
    and estimation rely on.
    """
    rng = generator(seed)
    first = rng.binomial(m.counts, 0.5)
    return Histogram(first), Histogram(m.counts - first)
