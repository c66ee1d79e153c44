"""Service operations: the logic behind each endpoint, callable in process.

The CLI dispatches to these functions directly when no server is given,
and over HTTP otherwise; both paths share the same request/response
models.  Best-approximation results are cached per process keyed by
(function, degree, interval, tolerance), so a warm service answers table
lookups without re-running the exchange algorithm.
"""

from __future__ import annotations

import threading

import numpy as np

from ..bench import ExperimentSpec, run_experiment
from ..core import DomainError, Histogram, entr
from ..estimators import EstimatorConfig, build_poly_table, miller_madow, plugin_entropy, poly_entropy
from ..lowerbound import (
    build_moment_matched_pair,
    change_of_measure,
    log_error_scan,
    poisson_mixture_tv,
)
from ..polyapprox import ChebApprox, remez
from ..sampling import SyntheticSpec
from . import schemas

FUNCS = {"phi": entr, "log": np.log}

_cache: dict[tuple, ChebApprox] = {}
_cache_lock = threading.Lock()


def cached_remez(
    func_name: str,
    degree: int,
    interval: tuple[float, float],
    tol: float = 1e-10,
    max_iters: int = 100,
) -> ChebApprox:
    key = (func_name, degree, interval, tol)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None:
        return hit
    approx = remez(FUNCS[func_name], degree, interval, tol=tol, max_iters=max_iters)
    with _cache_lock:
        _cache[key] = approx
    return approx


def config_from(options: schemas.EstimatorOptions) -> EstimatorConfig:
    return EstimatorConfig(
        c0=options.c0,
        c1=options.c1,
        c2=options.c2,
        clamp_upper=options.clamp_upper,
        adaptive=options.adaptive,
        adaptive_mode=options.adaptive_mode,
        split=options.split,
    )


def _measure_model(measure) -> schemas.MeasureModel:
    return schemas.MeasureModel(atoms=list(measure.atoms), weights=list(measure.weights))


def estimate(req: schemas.EstimateRequest) -> schemas.EstimateResponse:
    h = Histogram(np.asarray(req.counts, dtype=np.int64))
    k = req.k if req.k is not None else h.k
    n = req.n if req.n is not None else h.n
    cfg = config_from(req.options)
    if req.method == "plugin":
        value = plugin_entropy(h)
    elif req.method == "mm":
        value = miller_madow(h)
    else:
        h_select = None
        if cfg.split:
            if req.counts_select is None:
                raise DomainError("split mode requires counts_select")
            h_select = Histogram(np.asarray(req.counts_select, dtype=np.int64))
        approx = cached_remez("phi", cfg.degree(k, n), (0.0, 1.0))
        table = build_poly_table(k, n, cfg, approx)
        value = poly_entropy(h, h_select, k, n, cfg, table)
    return schemas.EstimateResponse(method=req.method, estimate_nats=value, k=k, n=n)


def remez_op(req: schemas.RemezRequest) -> schemas.RemezResponse:
    approx = cached_remez(
        req.func, req.degree, (req.interval_a, req.interval_b), req.tol, req.max_iters
    )
    return schemas.RemezResponse(
        func=req.func,
        degree=approx.degree,
        interval_a=approx.interval[0],
        interval_b=approx.interval[1],
        error=approx.error,
        coeffs=list(approx.coeffs),
        alternation=list(approx.alternation),
        iterations=approx.iterations,
    )


def lowerbound_pair(req: schemas.PairRequest) -> schemas.PairResponse:
    pair = build_moment_matched_pair(req.order, req.eta)
    return schemas.PairResponse(
        order=pair.order,
        eta=pair.eta,
        X=_measure_model(pair.X),
        Xprime=_measure_model(pair.Xprime),
        separation=pair.separation,
        approx_error=pair.source.error,
    )


def lowerbound_prior(req: schemas.PriorRequest) -> schemas.PriorResponse:
    pair = build_moment_matched_pair(req.order, req.eta)
    prior = change_of_measure(pair, req.alpha)
    return schemas.PriorResponse(
        order=prior.order,
        eta=pair.eta,
        alpha=prior.alpha,
        lambda_max=prior.lambda_max,
        U=_measure_model(prior.U),
        Uprime=_measure_model(prior.Uprime),
    )


def lowerbound_tv(req: schemas.TvRequest) -> schemas.TvResponse:
    pair = build_moment_matched_pair(req.order, req.eta)
    prior = change_of_measure(pair, req.alpha)
    tv = poisson_mixture_tv(prior.U, prior.Uprime, req.scale)
    return schemas.TvResponse(tv=tv, scale=req.scale, mean_bound=req.scale * prior.lambda_max)


def lowerbound_scan(req: schemas.ScanRequest) -> schemas.ScanResponse:
    rows = log_error_scan(req.L_values, req.c)
    return schemas.ScanResponse(rows=[schemas.ScanRow(**row) for row in rows])


def simulate(req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    spec = ExperimentSpec(
        dists=tuple(SyntheticSpec.parse(text, req.k) for text in req.dists),
        k=req.k,
        n_grid=tuple(req.n_grid),
        trials=req.trials,
        methods=tuple(req.methods),
        sampling=req.sampling,
        seed=req.seed,
        config=config_from(req.options),
        measure_wall_time=req.measure_wall_time,
    )
    rows = run_experiment(spec, workers=req.workers)
    return schemas.SimulateResponse(
        rows=[
            schemas.ResultRowModel(
                dist=r.dist, n=r.n, method=r.method, rmse=r.rmse, bias=r.bias, std=r.std, wall_time=r.wall_time
            )
            for r in rows
        ]
    )
