"""Best uniform polynomial approximation via the Remez exchange algorithm.

The returned approximant is certified by equioscillation: the residual
attains +/- the uniform error on degree+2 alternating points, which by the
Chebyshev alternating theorem characterizes the (unique) best approximant,
and by de la Vallee Poussin gives a rigorous lower bound on the optimal
error from any alternating residual.

Numerical layout
----------------
Iterations run in the Chebyshev basis of the working interval, which keeps
the per-iteration linear systems well conditioned at any practical degree.
The external coefficient contract is the monomial basis of the stated
interval; the basis change is carried out in exact rational arithmetic so
each monomial coefficient is individually correctly rounded.  Evaluating a
high-degree monomial expansion in plain float64 suffers catastrophic
cancellation (coefficients grow like 8^degree while values stay O(1)), so
`sup_error` and residual certification evaluate monomial coefficients with
a compensated Horner scheme, accurate as if run in twice the working
precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .core import DomainError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
ABSCISSA_TOL = 1e-12


class RemezError(RuntimeError):
    """Remez did not converge; carries the last iterate and certified bounds.

    `last` is the final ChebApprox candidate, `upper` the observed sup-norm
    of its residual, and `lower` the de la Vallee Poussin bound from the
    last alternating reference set, so callers still get two-sided error
    bounds on failure.
    """

    def __init__(self, message: str, last: "ChebApprox", upper: float, lower: float):
        super().__init__(message)
        self.last = last
        self.upper = upper
        self.lower = lower


@dataclass(frozen=True)
class ChebApprox:
    """Degree-L best uniform approximation of a function on [a, b].

    coeffs are monomial-basis coefficients on the stated interval;
    cheb_coeffs are the same polynomial in the Chebyshev basis of the
    interval and are the stable evaluation path.  error is the certified
    uniform error and alternation holds L+2 ordered equioscillation
    abscissae.
    """

    degree: int
    interval: tuple[float, float]
    coeffs: np.ndarray
    error: float
    alternation: np.ndarray
    cheb_coeffs: np.ndarray
    iterations: int

    def __post_init__(self):
        for name in ("coeffs", "alternation", "cheb_coeffs"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __call__(self, x):
        """Evaluate through the Chebyshev representation (well conditioned)."""
        a, b = self.interval
        t = (2.0 * np.asarray(x, dtype=float) - (a + b)) / (b - a)
        return npcheb.chebval(t, self.cheb_coeffs)


def chebyshev_points(n: int, a: float, b: float) -> np.ndarray:
    """n Chebyshev extremum points of [a, b], ascending, endpoints included."""
    if n < 2:
        raise DomainError("need at least two points")
    t = -np.cos(np.pi * np.arange(n) / (n - 1))
    pts = (a + b) / 2.0 + (b - a) / 2.0 * t
    pts[0], pts[-1] = a, b
    return pts


def _eval_cheb(c: np.ndarray, x: np.ndarray, a: float, b: float) -> np.ndarray:
    t = (2.0 * x - (a + b)) / (b - a)
    return npcheb.chebval(t, c)


def _solve_reference(f: Callable, refs: np.ndarray, degree: int, a: float, b: float):
    """Solve for Chebyshev coefficients and the levelled error h on L+2 references."""
    t = (2.0 * refs - (a + b)) / (b - a)
    design = npcheb.chebvander(t, degree)
    signs = np.where(np.arange(refs.size) % 2 == 0, 1.0, -1.0)
    system = np.column_stack([design, signs])
    fx = np.asarray(f(refs), dtype=float)
    if np.any(np.isnan(fx)):
        raise DomainError("function returned NaN on the reference set")
    sol = np.linalg.solve(system, fx)
    return sol[:-1], float(sol[-1])


def _golden_refine(g: Callable, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized golden-section maximization of g over brackets [lo, hi]."""
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(200):
        if np.max(hi - lo) <= ABSCISSA_TOL:
            break
        gap = hi - lo
        x1 = hi - GOLDEN * gap
        x2 = lo + GOLDEN * gap
        move_lo = g(x1) < g(x2)
        lo = np.where(move_lo, x1, lo)
        hi = np.where(move_lo, hi, x2)
    return 0.5 * (lo + hi)


def _residual_extrema(f, c, degree: int, a: float, b: float):
    """All local extrema of the residual f - p, refined to ABSCISSA_TOL."""
    n_scan = 32 * (degree + 2)
    grid = chebyshev_points(n_scan, a, b)
    fg = np.asarray(f(grid), dtype=float)
    if np.any(np.isnan(fg)):
        raise DomainError("function returned NaN on the scan grid")
    res = fg - _eval_cheb(c, grid, a, b)

    d = np.diff(res)
    interior = np.flatnonzero((d[:-1] > 0) != (d[1:] > 0)) + 1
    idx = np.concatenate(([0], interior, [n_scan - 1]))

    lo = grid[np.maximum(idx - 1, 0)]
    hi = grid[np.minimum(idx + 1, n_scan - 1)]
    sign = np.where(res[idx] >= 0, 1.0, -1.0)

    def directed(x):
        return sign * (np.asarray(f(x), dtype=float) - _eval_cheb(c, x, a, b))

    xs = _golden_refine(directed, lo, hi)
    rs = np.asarray(f(xs), dtype=float) - _eval_cheb(c, xs, a, b)

    # collapse refinements that landed on the same extremum
    order = np.argsort(xs)
    xs, rs = xs[order], rs[order]
    keep = np.concatenate(([True], np.diff(xs) > 10 * ABSCISSA_TOL))
    return xs[keep], rs[keep], float(np.max(np.abs(fg)))


def _alternating_subset(xs: np.ndarray, rs: np.ndarray, m: int):
    """Collapse same-sign runs (keep max |r|), then the best length-m window."""
    alt_x: list[float] = []
    alt_r: list[float] = []
    for x, r in zip(xs, rs):
        if alt_r and (r >= 0) == (alt_r[-1] >= 0):
            if abs(r) > abs(alt_r[-1]):
                alt_x[-1], alt_r[-1] = x, r
        else:
            alt_x.append(x)
            alt_r.append(r)
    if len(alt_r) < m:
        return None
    best_i, best_score = 0, -1.0
    for i in range(len(alt_r) - m + 1):
        score = min(abs(r) for r in alt_r[i : i + m])
        if score > best_score:
            best_i, best_score = i, score
    sel = slice(best_i, best_i + m)
    return np.array(alt_x[sel]), np.array(alt_r[sel])


def _single_exchange(refs: np.ndarray, ref_res: np.ndarray, x_new: float, r_new: float):
    """Classic one-point exchange preserving sign alternation.

    The new point replaces the neighboring reference whose residual shares
    its sign; a point beyond either end with the opposite sign to the
    outermost reference shifts the whole set toward it instead.
    """
    refs = list(refs)
    res = list(ref_res)
    sign_new = r_new >= 0
    pos = int(np.searchsorted(refs, x_new))
    if pos < len(refs) and (res[pos] >= 0) == sign_new:
        refs[pos], res[pos] = x_new, r_new
    elif pos > 0 and (res[pos - 1] >= 0) == sign_new:
        refs[pos - 1], res[pos - 1] = x_new, r_new
    elif pos == 0:
        refs = [x_new] + refs[:-1]
        res = [r_new] + res[:-1]
    else:
        refs = refs[1:] + [x_new]
        res = res[1:] + [r_new]
    return np.array(refs), np.array(res)


def remez(
    f: Callable,
    degree: int,
    interval: tuple[float, float] = (0.0, 1.0),
    tol: float = 1e-10,
    max_iters: int = 100,
) -> ChebApprox:
    """Best degree-L uniform approximation of f on [a, b] by Remez exchange.

    f must be continuous on the interval and accept numpy arrays.  Stops
    when the levelled error of the reference solve and the observed
    residual sup-norm agree within `tol` relative, plus an absolute floor
    of a few ulps of max|f| (the agreement attainable in float64 once the
    uniform error is tiny against the function scale, as happens for
    degrees in the hundreds).  Convergence is linear, so the default cap
    of 100 iterations is ample for degrees up to several hundred.  Raises
    RemezError (carrying the last iterate and its certified two-sided
    bounds) if the cap is hit.
    """
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise DomainError("interval must satisfy a < b")
    if degree < 0:
        raise DomainError("degree must be nonnegative")
    if tol <= 0:
        raise DomainError("tol must be positive")
    m = degree + 2
    refs = chebyshev_points(m, a, b)

    last_candidate = None
    levelled = 0.0
    observed = math.inf
    lower = 0.0
    for iteration in range(1, max_iters + 1):
        c, h = _solve_reference(f, refs, degree, a, b)
        levelled = abs(h)
        xs, rs, f_scale = _residual_extrema(f, c, degree, a, b)
        selected = _alternating_subset(xs, rs, m)
        if selected is None:
            # deficient extremum count: single-point exchange with the worst point
            worst = int(np.argmax(np.abs(rs)))
            ref_res = np.asarray(f(refs), dtype=float) - _eval_cheb(c, refs, a, b)
            refs, _ = _single_exchange(refs, ref_res, float(xs[worst]), float(rs[worst]))
            observed = float(np.max(np.abs(rs)))
            lower = levelled
            last_candidate = (c, refs.copy())
            continue
        sel_x, sel_r = selected
        observed = float(np.max(np.abs(rs)))
        lower = float(np.min(np.abs(sel_r)))
        last_candidate = (c, sel_x)
        noise_floor = 16.0 * np.finfo(float).eps * max(f_scale, observed)
        if observed - levelled <= tol * observed + noise_floor:
            return ChebApprox(
                degree=degree,
                interval=(a, b),
                coeffs=_cheb_to_monomial_exact(c, a, b),
                error=observed,
                alternation=sel_x,
                cheb_coeffs=c,
                iterations=iteration,
            )
        refs = sel_x

    c, alt = last_candidate
    failed = ChebApprox(
        degree=degree,
        interval=(a, b),
        coeffs=_cheb_to_monomial_exact(c, a, b),
        error=observed,
        alternation=alt,
        cheb_coeffs=c,
        iterations=max_iters,
    )
    raise RemezError(
        f"no convergence in {max_iters} iterations: "
        f"levelled {levelled:.3e}, observed {observed:.3e}",
        last=failed,
        upper=observed,
        lower=lower,
    )


# ---------------------------------------------------------------------------
# Basis conversion and stable monomial evaluation
# ---------------------------------------------------------------------------


def _cheb_to_monomial_exact(cheb_coeffs: np.ndarray, a: float, b: float) -> np.ndarray:
    """Monomial coefficients on [a, b], each individually correctly rounded.

    Floats are dyadic rationals, so expanding T_j((2x - a - b)/(b - a)) over
    Fraction arithmetic is exact; only the final cast rounds.
    """
    alpha = Fraction(2) / (Fraction(b) - Fraction(a))
    beta = -(Fraction(a) + Fraction(b)) / (Fraction(b) - Fraction(a))
    degree = len(cheb_coeffs) - 1
    acc = [Fraction(0)] * (degree + 1)

    t_prev = [Fraction(1)]  # T_0 in x-coordinates
    t_cur = [beta, alpha]  # T_1
    for j, cj in enumerate(cheb_coeffs):
        cj_frac = Fraction(float(cj))
        poly = t_prev if j == 0 else t_cur
        for mth, coef in enumerate(poly):
            acc[mth] += cj_frac * coef
        if 1 <= j <= degree - 1:
            # T_{j+1} = 2 (alpha x + beta) T_j - T_{j-1}
            t_next = [Fraction(0)] * (j + 2)
            for mth, coef in enumerate(t_cur):
                t_next[mth] += 2 * beta * coef
                t_next[mth + 1] += 2 * alpha * coef
            for mth, coef in enumerate(t_prev):
                t_next[mth] -= coef
            t_prev, t_cur = t_cur, t_next
    return np.array([float(v) for v in acc])


def _two_sum(x, y):
    s = x + y
    bb = s - x
    err = (x - (s - bb)) + (y - bb)
    return s, err


_SPLITTER = 134217729.0  # 2**27 + 1, Dekker splitting constant


def _two_prod(x, y):
    p = x * y
    cx = _SPLITTER * x
    hx = cx - (cx - x)
    lx = x - hx
    cy = _SPLITTER * y
    hy = cy - (cy - y)
    ly = y - hy
    err = ((hx * hy - p) + hx * ly + lx * hy) + lx * ly
    return p, err


def eval_monomial(coeffs: np.ndarray, x) -> np.ndarray:
    """Plain Horner evaluation of sum_m coeffs[m] x^m."""
    x = np.asarray(x, dtype=float)
    acc = np.full_like(x, float(coeffs[-1]))
    for c in coeffs[-2::-1]:
        acc = acc * x + c
    return acc


def eval_monomial_compensated(coeffs: np.ndarray, x) -> np.ndarray:
    """Compensated Horner evaluation: result as if computed in doubled precision.

    Error-free transformations (Dekker/Knuth) track the rounding residue of
    every product and sum, so severe coefficient cancellation (condition
    numbers up to ~1e15) still yields results accurate to a few ulps.
    """
    x = np.asarray(x, dtype=float)
    acc = np.full_like(x, float(coeffs[-1]))
    comp = np.zeros_like(x)
    for c in coeffs[-2::-1]:
        p, ep = _two_prod(acc, x)
        acc, es = _two_sum(p, np.full_like(x, float(c)))
        comp = comp * x + (ep + es)
    return acc + comp


def sup_error(coeffs: np.ndarray, f: Callable, interval: tuple[float, float], grid_size: int = 100_000) -> float:
    """Max of |f - p| over a Chebyshev-spaced grid; independent certification oracle.

    Uses compensated Horner so the certificate is limited by the grid, not
    by monomial-basis cancellation.
    """
    if grid_size < 1000:
        raise DomainError("grid_size must be at least 1000")
    a, b = float(interval[0]), float(interval[1])
    grid = chebyshev_points(grid_size, a, b)
    fg = np.asarray(f(grid), dtype=float)
    if np.any(np.isnan(fg)):
        raise DomainError("function returned NaN on the certification grid")
    return float(np.max(np.abs(fg - eval_monomial_compensated(np.asarray(coeffs, dtype=float), grid))))


def rescale(p: ChebApprox, target_right: float) -> np.ndarray:
    """Coefficients b_m = a_m / s^(m-1) of q(x) = s * p(x/s) on [0, s].

    q approximates the scaled target s * f(x/s) with uniform error exactly
    s * p.error.  For the entropy integrand the scaled target differs from
    f itself by the linear term x*log(1/s), which downstream estimators add
    back explicitly.
    """
    s = float(target_right)
    if s <= 0:
        raise DomainError("target_right must be positive")
    if p.interval != (0.0, 1.0):
        raise DomainError("rescale expects an approximation on [0, 1]")
    powers = s ** (np.arange(p.coeffs.size) - 1.0)
    return p.coeffs / powers


def zero_constant_term(p: ChebApprox) -> tuple[np.ndarray, float]:
    """Drop the constant term; returns (coefficients, certified error bound).

    Removing a_0 shifts the residual by |a_0| everywhere, so the uniform
    error against the original target is at most p.error + |a_0| (at most
    double when |f(0)| <= p.error, as for the entropy integrand).
    """
    coeffs = p.coeffs.copy()
    a0 = float(coeffs[0])
    coeffs[0] = 0.0
    return coeffs, p.error + abs(a0)


# ---------------------------------------------------------------------------
# Coefficient table format: header `degree,interval_a,interval_b,error`, one
# row of those values, then `m,a_m` lines with 17-significant-digit floats.
# ---------------------------------------------------------------------------


def format_coeff_table_values(degree: int, a: float, b: float, error: float, coeffs) -> str:
    lines = ["degree,interval_a,interval_b,error"]
    lines.append(f"{degree},{a:.17g},{b:.17g},{error:.17g}")
    for m, am in enumerate(coeffs):
        lines.append(f"{m},{am:.17g}")
    return "\n".join(lines) + "\n"


def format_coeff_table(p: ChebApprox) -> str:
    a, b = p.interval
    return format_coeff_table_values(p.degree, a, b, p.error, p.coeffs)


def parse_coeff_table(text: str) -> dict:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "degree,interval_a,interval_b,error":
        raise DomainError("missing coefficient table header")
    degree_s, a_s, b_s, err_s = lines[1].split(",")
    coeffs = np.zeros(int(degree_s) + 1)
    for ln in lines[2:]:
        m_s, v_s = ln.split(",")
        coeffs[int(m_s)] = float(v_s)
    return {
        "degree": int(degree_s),
        "interval": (float(a_s), float(b_s)),
        "error": float(err_s),
        "coeffs": coeffs,
    }
