"""Experiment harness: RMSE sweeps across estimators, distributions, sample sizes.

Trials are embarrassingly parallel; each owns a stream derived injectively
from (distribution, sample size, trial) indices, and aggregation always
reduces in trial order, so results are byte-identical for any worker
count.  Estimator failures mark their row with NaNs instead of aborting
the sweep.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import DomainError, Histogram, entr, entropy
from .estimators import EstimatorConfig, build_poly_table, miller_madow, plugin_entropy, poly_entropy
from .polyapprox import remez
from .sampling import Seed, SyntheticSpec, make_distribution, sample_multinomial, sample_poissonized, split_histogram

METHODS = ("poly", "plugin", "mm")
SAMPLING_MODES = ("multinomial", "poissonized")

_INDEX_BITS = 20
_INDEX_CAP = 1 << _INDEX_BITS


@dataclass(frozen=True)
class ExperimentSpec:
    """One full sweep: every (distribution, sample size, method) cell."""

    dists: tuple[SyntheticSpec, ...]
    k: int
    n_grid: tuple[int, ...]
    trials: int = 50
    methods: tuple[str, ...] = ("poly", "plugin", "mm")
    sampling: str = "multinomial"
    seed: int = 0
    config: EstimatorConfig = field(default_factory=EstimatorConfig)
    measure_wall_time: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dists", tuple(self.dists))
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.trials < 1:
            raise DomainError("trials must be at least 1")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise DomainError("n_grid must be nonempty and positive")
        if not self.dists:
            raise DomainError("need at least one distribution")
        for m in self.methods:
            if m not in METHODS:
                raise DomainError(f"unknown method {m!r}")
        if self.sampling not in SAMPLING_MODES:
            raise DomainError(f"sampling must be one of {SAMPLING_MODES}")


@dataclass(frozen=True)
class ResultRow:
    """Aggregate of one (distribution, n, method) cell over all trials.

    rmse uses the population convention sqrt(mean squared error); std is
    the sample standard deviation (ddof = 1), so rmse^2 = bias^2 +
    std^2 * (trials - 1) / trials.
    """

    dist: str
    n: int
    method: str
    rmse: float
    bias: float
    std: float
    wall_time: float


def derive_seed(base: int, dist_index: int, n_index: int, trial: int) -> Seed:
    """Injective (dist, n, trial) -> stream packing; each index gets 20 bits."""
    for name, v in (("dist_index", dist_index), ("n_index", n_index), ("trial", trial)):
        if not 0 <= v < _INDEX_CAP:
            raise DomainError(f"{name} must lie in [0, {_INDEX_CAP})")
    stream = (dist_index << (2 * _INDEX_BITS)) | (n_index << _INDEX_BITS) | trial
    return Seed(base=base, stream=stream)


def _estimate_cell(method: str, h: Histogram, h_select, k: int, n: int, cfg: EstimatorConfig, table) -> float:
    if method == "poly":
        return poly_entropy(h, h_select, k, n, cfg, table)
    if method == "plugin":
        return plugin_entropy(h)
    if method == "mm":
        return miller_madow(h)
    raise DomainError(f"unknown method {method!r}")


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[ResultRow]:
    """Run every cell of the sweep; rows sorted by (dist, n, method).

    Identical specs produce identical rows for any `workers` value: trials
    map onto derived streams and reduce in trial order.
    """
    if workers < 1:
        raise DomainError("workers must be at least 1")
    cfg = spec.config
    needs_poly = "poly" in spec.methods
    approx_cache: dict[int, object] = {}

    rows: list[ResultRow] = []
    for dist_index, dist_spec in enumerate(spec.dists):
        if dist_spec.k != spec.k:
            raise DomainError(f"distribution {dist_spec.label} has k={dist_spec.k}, sweep has k={spec.k}")
        d = make_distribution(dist_spec)
        truth = entropy(d)
        for n_index, n in enumerate(spec.n_grid):
            table = None
            if needs_poly:
                # a failed table build leaves table None; poly trials then
                # record NaN instead of aborting the sweep
                try:
                    degree = cfg.degree(spec.k, n)
                    if degree not in approx_cache:
                        approx_cache[degree] = remez(entr, degree, (0.0, 1.0))
                    table = build_poly_table(spec.k, n, cfg, approx_cache[degree])
                except Exception:
                    table = None

            started = time.perf_counter()

            def one_trial(trial: int) -> dict[str, float]:
                seed = derive_seed(spec.seed, dist_index, n_index, trial)
                if spec.sampling == "multinomial":
                    h = sample_multinomial(d, n, seed)
                else:
                    h = sample_poissonized(d, float(n), seed)
                h_select = None
                if cfg.split:
                    split_seed = Seed(base=seed.base ^ 0x5343535343535343, stream=seed.stream)
                    h, h_select = split_histogram(h, split_seed)
                out = {}
                for method in spec.methods:
                    try:
                        out[method] = _estimate_cell(method, h, h_select, spec.k, n, cfg, table)
                    except Exception:
                        out[method] = math.nan
                return out

            trial_ids = range(spec.trials)
            if workers == 1:
                estimates = [one_trial(t) for t in trial_ids]
            else:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    estimates = list(pool.map(one_trial, trial_ids))
            elapsed = time.perf_counter() - started if spec.measure_wall_time else 0.0

            for method in spec.methods:
                errs = np.array([est[method] for est in estimates]) - truth
                rmse = float(np.sqrt(np.mean(np.square(errs))))
                bias = float(np.mean(errs))
                std = float(np.std(errs, ddof=1)) if spec.trials > 1 else 0.0
                rows.append(
                    ResultRow(
                        dist=dist_spec.label,
                        n=n,
                        method=method,
                        rmse=rmse,
                        bias=bias,
                        std=std,
                        wall_time=elapsed,
                    )
                )
    rows.sort(key=lambda r: (r.dist, r.n, r.method))
    return rows


RESULT_HEADER = "dist,n,method,rmse,bias,std,wall_time"


def format_results(rows) -> str:
    lines = [RESULT_HEADER]
    for r in rows:
        lines.append(
            f"{r.dist},{r.n},{r.method},{r.rmse:.17g},{r.bias:.17g},{r.std:.17g},{r.wall_time:.17g}"
        )
    return "\n".join(lines) + "\n"


def write_results(rows, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(format_results(rows))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def parse_n_grid(text: str) -> tuple[int, ...]:
    """Parse `100,300,500` or a geometric spec `lo:hi:points`."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError("geometric grid spec must be lo:hi:points")
        lo, hi, points = float(parts[0]), float(parts[1]), int(parts[2])
        if lo <= 0 or hi < lo or points < 1:
            raise DomainError("geometric grid needs 0 < lo <= hi and points >= 1")
        if points == 1:
            values = [lo]
        else:
            values = np.geomspace(lo, hi, points)
        grid = sorted({int(round(v)) for v in values})
        return tuple(grid)
    return tuple(int(part) for part in text.split(",") if part.strip())
