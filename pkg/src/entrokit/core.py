"""Core domain types and elementary functionals for discrete entropy work.

Everything here is a pure function of its inputs.  All logarithms are
natural; entropy is measured in nats.  Values are immutable after
construction and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Per-symbol tolerance on the total probability mass: a vector of length k
# must sum to 1 within SUM_TOL_PER_SYMBOL * k.  Inputs outside are rejected,
# never renormalized (silent renormalization hides generator bugs).
SUM_TOL_PER_SYMBOL = 1e-12


class DomainError(ValueError):
    """An input violates a documented precondition."""


def entr(x):
    """Entropy integrand x * log(1/x), extended continuously with entr(0) = 0.

    Accepts scalars or numpy arrays and evaluates elementwise.  Negative
    inputs raise DomainError.  The zero branch is explicit; we never rely
    on 0 * (-inf) conventions.
    """
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        raise DomainError("entr requires finite nonnegative input")
    out = np.zeros_like(arr)
    pos = arr > 0
    np.negative(arr, where=pos, out=out)
    out[pos] *= np.log(arr[pos])
    if arr.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class Distribution:
    """Probability vector over k symbols."""

    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise DomainError("probs must be a nonempty 1-d vector")
        if np.any(np.isnan(probs)) or np.any(probs < 0):
            raise DomainError("probabilities must be nonnegative")
        k = probs.size
        if abs(float(probs.sum()) - 1.0) > SUM_TOL_PER_SYMBOL * k:
            raise DomainError(
                f"probabilities sum to {probs.sum()!r}, outside 1 +/- {SUM_TOL_PER_SYMBOL * k:g}"
            )
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return int(self.probs.size)


@dataclass(frozen=True)
class Histogram:
    """Per-symbol occurrence counts from a sample."""

    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 1 or counts.size == 0:
            raise DomainError("counts must be a nonempty 1-d vector")
        if not np.issubdtype(counts.dtype, np.integer):
            as_int = counts.astype(np.int64)
            if np.any(as_int != counts):
                raise DomainError("counts must be integers")
            counts = as_int
        else:
            counts = counts.astype(np.int64)
        if np.any(counts < 0):
            raise DomainError("counts must be nonnegative")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)

    @property
    def k(self) -> int:
        return int(self.counts.size)

    @property
    def n(self) -> int:
        """Total observed sample size (sum of counts)."""
        return int(self.counts.sum())


@dataclass(frozen=True)
class Fingerprint:
    """Profile of a histogram: h[i] = number of symbols appearing exactly i times."""

    h: dict[int, int]

    def __post_init__(self):
        for i, c in self.h.items():
            if i < 1 or c < 0:
                raise DomainError("fingerprint keys must be >= 1 with nonnegative counts")

    @property
    def n(self) -> int:
        return sum(i * c for i, c in self.h.items())

    @property
    def observed_symbols(self) -> int:
        return sum(self.h.values())


def entropy(d: Distribution) -> float:
    """Shannon entropy sum_i p_i log(1/p_i) in nats; zero-mass entries contribute 0."""
    return float(np.sum(entr(d.probs)))


def fingerprint(h: Histogram) -> Fingerprint:
    """Count how many symbols appear exactly i times, for each i >= 1."""
    values, counts = np.unique(h.counts, return_counts=True)
    return Fingerprint({int(v): int(c) for v, c in zip(values, counts) if v > 0})


def falling_factorial(x: int, m: int) -> int:
    """Exact x * (x-1) * ... * (x-m+1); 0 when m > x, 1 when m = 0.

    Python integers are exact at any width, so there is no overflow path.
    The estimator modules never form this raw product for float work; they
    use a scaled recurrence instead.
    """
    if x < 0 or m < 0:
        raise DomainError("falling_factorial requires nonnegative arguments")
    if m > x:
        return 0
    out = 1
    for i in range(m):
        out *= x - i
    return out


# ---------------------------------------------------------------------------
# File formats: one line per symbol, `symbol_id,count` (or `symbol_id,prob`),
# optional header line.  Missing symbol ids read as zero.
# ---------------------------------------------------------------------------


def _read_rows(path) -> list[tuple[int, str]]:
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected 'id,value', got {line!r}")
            if lineno == 1 and not parts[0].strip().lstrip("-").isdigit():
                continue  # header line
            try:
                sym = int(parts[0])
            except ValueError as exc:
                raise DomainError(f"{path}:{lineno}: bad symbol id {parts[0]!r}") from exc
            rows.append((sym, parts[1]))
    return rows


def read_histogram(path, k: int | None = None) -> Histogram:
    """Read `symbol_id,count` lines; ids index the count vector of length k."""
    rows = _read_rows(path)
    max_id = max((sym for sym, _ in rows), default=-1)
    size = k if k is not None else max_id + 1
    if size <= 0:
        raise DomainError(f"{path}: no symbols and no explicit k")
    counts = np.zeros(size, dtype=np.int64)
    for sym, value in rows:
        if sym < 0 or sym >= size:
            raise DomainError(f"{path}: symbol id {sym} outside [0, {size})")
        counts[sym] = int(value)
    return Histogram(counts)


def write_histogram(h: Histogram, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("symbol,count\n")
        for sym, c in enumerate(h.counts):
            fh.write(f"{sym},{int(c)}\n")


def read_distribution(path, k: int | None = None) -> Distribution:
    """Read `symbol_id,prob` lines; ids index the probability vector."""
    rows = _read_rows(path)
    max_id = max((sym for sym, _ in rows), default=-1)
    size = k if k is not None else max_id + 1
    if size <= 0:
        raise DomainError(f"{path}: no symbols and no explicit k")
    probs = np.zeros(size, dtype=float)
    for sym, value in rows:
        if sym < 0 or sym >= size:
            raise DomainError(f"{path}: symbol id {sym} outside [0, {size})")
        probs[sym] = float(value)
    return Distribution(probs)


def write_distribution(d: Distribution, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write("symbol,prob\n")
        for sym, p in enumerate(d.probs):
            fh.write(f"{sym},{p:.17g}\n")


def nats_to_bits(x: float) -> float:
    """Output-only unit conversion; all internal computation stays in nats."""
    return x / math.log(2.0)
