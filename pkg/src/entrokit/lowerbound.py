"""Constructive lower-bound laboratory.

Builds pairs of discrete measures whose moments match up to a chosen order
yet whose log-functional values are maximally separated, maps them to
unit-scale priors by a change of measure that gains one extra matched
moment, and verifies indistinguishability numerically via exact Poisson
mixture total variation.  Also houses the two-point construction and the
closed-form factorial-moment variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Distribution, DomainError, entr, entropy
from .polyapprox import ChebApprox, remez
from .sampling import Seed, generator

WEIGHT_SUM_TOL = 1e-12
TV_TAIL = 1e-15


class ConstructionError(RuntimeError):
    """Alternation geometry too degenerate to produce well-conditioned weights."""


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported probability measure on the real line."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float).copy()
        weights = np.asarray(self.weights, dtype=float).copy()
        if atoms.shape != weights.shape or atoms.ndim != 1 or atoms.size == 0:
            raise DomainError("atoms and weights must be matching nonempty vectors")
        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        if abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {weights.sum()!r}, not 1")
        atoms.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    def moment(self, j: int) -> float:
        return float(np.sum(self.weights * self.atoms**j))

    def expect(self, fn) -> float:
        return float(np.sum(self.weights * fn(self.atoms)))


@dataclass(frozen=True)
class MomentMatchedPair:
    """Measures X, Xprime on [eta, 1] matching moments 1..order, log-separated."""

    X: DiscreteMeasure
    Xprime: DiscreteMeasure
    order: int
    eta: float
    separation: float  # E[log 1/X] - E[log 1/X'] = twice the approximation error
    source: ChebApprox


@dataclass(frozen=True)
class PriorPair:
    """Unit-scale prior pair with matched moments 1..order+1 and common mean alpha."""

    U: DiscreteMeasure
    Uprime: DiscreteMeasure
    alpha: float
    lambda_max: float  # support bound alpha / eta
    order: int


@dataclass(frozen=True)
class TwoPoint:
    """Two distributions with tiny KL divergence but separated entropy."""

    P: Distribution
    Q: Distribution
    eps: float
    kl: float
    gap: float


def build_moment_matched_pair(order: int, eta: float) -> MomentMatchedPair:
    """Moment-matched pair from the alternation set of the best log approximant.

    The L+2 equioscillation points x_i of the degree-L best approximation
    of log on [eta, 1] carry Lagrange-type weights b_i = 1 / prod_{v != i}
    (x_i - x_v) which alternate in sign, sum to zero, and annihilate all
    polynomials of degree <= L.  Normalizing w_i = 2 b_i / sum|b_j| and
    splitting by sign gives two probability measures matching moments
    1..L and separated in E[log 1/X] by exactly twice the uniform error.

    Weights are computed in log magnitude: alternation gaps shrink like
    1/L^2, so the raw products underflow long before the normalized
    weights become ill-conditioned.
    """
    if order < 1:
        raise DomainError("order must be at least 1")
    if not 0.0 < eta < 1.0:
        raise DomainError("eta must lie in (0, 1)")
    approx = remez(np.log, order, (eta, 1.0))
    xs = approx.alternation
    m = xs.size
    gaps = np.diff(xs)
    if np.min(gaps) < 1e-10 * (1.0 - eta):
        raise ConstructionError(
            f"alternation points nearly collide (min gap {np.min(gaps):.3e}); "
            "weights would be ill-conditioned"
        )
    log_mag = np.empty(m)
    sign = np.empty(m)
    for i in range(m):
        diff = xs[i] - np.delete(xs, i)
        log_mag[i] = -float(np.sum(np.log(np.abs(diff))))
        sign[i] = float(np.prod(np.sign(diff)))
    rel = np.exp(log_mag - np.max(log_mag))
    w = 2.0 * sign * rel / float(np.sum(rel))

    pos = w > 0
    first = DiscreteMeasure(xs[pos], w[pos])
    second = DiscreteMeasure(xs[~pos], -w[~pos])
    log_gap = first.expect(lambda x: -np.log(x)) - second.expect(lambda x: -np.log(x))
    if log_gap >= 0:
        X, Xp, separation = first, second, log_gap
    else:
        X, Xp, separation = second, first, -log_gap
    return MomentMatchedPair(X=X, Xprime=Xp, order=order, eta=eta, separation=separation, source=approx)


def change_of_measure(pair: MomentMatchedPair, alpha: float) -> PriorPair:
    """Map measures on [eta, 1] to priors on [0, alpha/eta].

    Each atom x maps to alpha * x / eta with weight (eta / x) times its
    original weight; the deficit 1 - E[eta / X] sits at zero.  The images
    gain one extra matched moment, share mean alpha, and separate the
    entropy functional by alpha times the log separation.
    """
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    eta = pair.eta

    def transform(meas: DiscreteMeasure) -> DiscreteMeasure:
        head = 1.0 - float(np.sum(meas.weights * (eta / meas.atoms)))
        atoms = np.concatenate([[0.0], alpha * meas.atoms / eta])
        weights = np.concatenate([[head], meas.weights * (eta / meas.atoms)])
        return DiscreteMeasure(atoms, weights)

    return PriorPair(
        U=transform(pair.X),
        Uprime=transform(pair.Xprime),
        alpha=alpha,
        lambda_max=alpha / eta,
        order=pair.order,
    )


def _poisson_pmf(lam: np.ndarray, j: int) -> np.ndarray:
    """poi(lam, j) elementwise, stable for any lam >= 0 including lam = 0."""
    out = np.zeros_like(lam)
    zero = lam == 0
    out[zero] = 1.0 if j == 0 else 0.0
    pos = ~zero
    if np.any(pos):
        lp = lam[pos]
        out[pos] = np.exp(j * np.log(lp) - lp - math.lgamma(j + 1))
    return out


def poisson_mixture_tv(U: DiscreteMeasure, Uprime: DiscreteMeasure, scale: float) -> float:
    """Exact total variation between the Poisson mixtures of scale*U and scale*U'.

    Sums (1/2) sum_j |E poi(s U, j) - E poi(s U', j)| until both mixture
    tails fall below 1e-15; half the remaining tail mass is added to the
    reported value so truncation can only make the result conservative.
    """
    if scale < 0:
        raise DomainError("scale must be nonnegative")
    lam_u = scale * U.atoms
    lam_v = scale * Uprime.atoms
    total = 0.0
    mass_u = 0.0
    mass_v = 0.0
    j = 0
    max_lam = max(float(np.max(lam_u)), float(np.max(lam_v)))
    hard_cap = int(10 * max_lam + 200)
    while j <= hard_cap:
        pu = float(np.sum(U.weights * _poisson_pmf(lam_u, j)))
        pv = float(np.sum(Uprime.weights * _poisson_pmf(lam_v, j)))
        total += 0.5 * abs(pu - pv)
        mass_u += pu
        mass_v += pv
        if 1.0 - mass_u < TV_TAIL and 1.0 - mass_v < TV_TAIL:
            break
        j += 1
    tail = max(1.0 - mass_u, 0.0) + max(1.0 - mass_v, 0.0)
    return total + 0.5 * tail


def two_point_pair(k: int, n: int) -> TwoPoint:
    """The k-symbol pair with eps = 1/sqrt(n): one heavy symbol at 2/3 vs (2-eps)/3.

    KL divergence evaluates in closed form to (2/3) log(2/(2-eps)) +
    (1/3) log(1/(1+eps)) <= eps^2, while the entropies stay separated by
    at least (1/3) log(2(k-1)) eps - eps^2.
    """
    if k < 2:
        raise DomainError("need at least two symbols")
    if n < 1:
        raise DomainError("sample size must be at least 1")
    eps = 1.0 / math.sqrt(n)
    if not eps < 1.0:
        raise DomainError("requires 1/sqrt(n) < 1, i.e. n >= 2")
    small_p = np.full(k - 1, 1.0 / (3.0 * (k - 1)))
    small_q = np.full(k - 1, (1.0 + eps) / (3.0 * (k - 1)))
    P = Distribution(np.concatenate([small_p, [2.0 / 3.0]]))
    Q = Distribution(np.concatenate([small_q, [(2.0 - eps) / 3.0]]))
    kl = (2.0 / 3.0) * math.log(2.0 / (2.0 - eps)) + (1.0 / 3.0) * math.log(1.0 / (1.0 + eps))
    if kl > eps * eps:
        raise ConstructionError(f"KL {kl} exceeded eps^2 = {eps * eps}")
    return TwoPoint(P=P, Q=Q, eps=eps, kl=kl, gap=entropy(Q) - entropy(P))


def factorial_moment_variance(lam: float, m: int) -> float:
    """Closed-form var (X)_m for X ~ Poisson(lam): lam^m m! sum_{k<m} C(m,k) lam^k / k!."""
    if m < 1:
        raise DomainError("m must be at least 1")
    if not math.isfinite(lam) or lam < 0:
        raise DomainError("lam must be finite and nonnegative")
    total = 0.0
    for kk in range(m):
        total += math.comb(m, kk) * lam**kk / math.factorial(kk)
    return lam**m * math.factorial(m) * total


@dataclass(frozen=True)
class PriorSample:
    """One draw of the near-distribution built from k iid prior copies."""

    vector: np.ndarray
    total_mass: float
    h_value: float

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=float).copy()
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)


def sample_prior_vector(pp: PriorPair, k: int, seed: Seed) -> PriorSample:
    """Draw (U_1/k, ..., U_k/k, 1 - alpha) with U_i iid from the first prior.

    The result is only approximately a probability vector; total mass
    concentrates at 1 and the entropy functional concentrates at its mean,
    which is what makes the pair usable as priors.
    """
    if k < 2:
        raise DomainError("need at least two coordinates")
    rng = generator(seed)
    idx = rng.choice(pp.U.atoms.size, size=k, p=pp.U.weights)
    vector = np.concatenate([pp.U.atoms[idx] / k, [1.0 - pp.alpha]])
    return PriorSample(
        vector=vector,
        total_mass=float(np.sum(vector)),
        h_value=float(np.sum(entr(vector))),
    )


def log_error_scan(L_values, c: float) -> list[dict]:
    """Best-approximation errors E_floor(cL)(log, [1/L^2, 1]) across L values.

    Used to check that the error stays bounded away from zero and roughly
    constant in L once the left endpoint shrinks like 1/L^2.
    """
    if not 0.0 <= c <= 1.0:
        raise DomainError("c must lie in [0, 1]")
    rows = []
    for L in L_values:
        if L < 1:
            raise DomainError("L values must be positive")
        degree = int(math.floor(c * L))
        eta = 1.0 / (L * L)
        approx = remez(np.log, degree, (eta, 1.0))
        rows.append({"L": int(L), "degree": degree, "eta": eta, "error": approx.error})
    return rows
