"""Request/response models of the estimation service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"


class EstimatorOptions(BaseModel):
    c0: float = Field(default=1.6, gt=0)
    c1: float = Field(default=3.5, gt=0)
    c2: float = Field(default=1.6, gt=0)
    clamp_upper: bool = True
    adaptive: bool = False
    adaptive_mode: Literal["drop_constant", "pin_origin"] = "drop_constant"
    split: bool = False


class EstimateRequest(BaseModel):
    counts: list[int]
    counts_select: Optional[list[int]] = None
    k: Optional[int] = Field(default=None, ge=2)
    n: Optional[int] = Field(default=None, ge=1)
    method: Literal["poly", "plugin", "mm"] = "poly"
    options: EstimatorOptions = Field(default_factory=EstimatorOptions)


class EstimateResponse(BaseModel):
    method: str
    estimate_nats: float
    k: int
    n: int


class RemezRequest(BaseModel):
    func: Literal["phi", "log"] = "phi"
    degree: int = Field(ge=0)
    interval_a: float = 0.0
    interval_b: float = 1.0
    tol: float = Field(default=1e-10, gt=0)
    max_iters: int = Field(default=100, ge=1)


class RemezResponse(BaseModel):
    func: str
    degree: int
    interval_a: float
    interval_b: float
    error: float
    coeffs: list[float]
    alternation: list[float]
    iterations: int


class MeasureModel(BaseModel):
    atoms: list[float]
    weights: list[float]


class PairRequest(BaseModel):
    order: int = Field(ge=1, le=200)
    eta: float = Field(gt=0, lt=1)


class PairResponse(BaseModel):
    order: int
    eta: float
    X: MeasureModel
    Xprime: MeasureModel
    separation: float
    approx_error: float


class PriorRequest(PairRequest):
    alpha: float = Field(default=0.5, gt=0, le=1)


class PriorResponse(BaseModel):
    order: int
    eta: float
    alpha: float
    lambda_max: float
    U: MeasureModel
    Uprime: MeasureModel


class TvRequest(PriorRequest):
    scale: float = Field(ge=0)


class TvResponse(BaseModel):
    tv: float
    scale: float
    mean_bound: float  # scale * lambda_max, the M in the moment-matching bound


class ScanRequest(BaseModel):
    L_values: list[int]
    c: float = Field(ge=0, lt=1)


class ScanRow(BaseModel):
    L: int
    degree: int
    eta: float
    error: float


class ScanResponse(BaseModel):
    rows: list[ScanRow]


class SimulateRequest(BaseModel):
    k: int = Field(ge=2)
    dists: list[str] = ["uniform", "zipf:1", "zipf:0.5", "mix"]
    n_grid: list[int]
    trials: int = Field(default=50, ge=1)
    methods: list[Literal["poly", "plugin", "mm"]] = ["poly", "plugin", "mm"]
    sampling: Literal["multinomial", "poissonized"] = "multinomial"
    seed: int = Field(default=0, ge=0)
    options: EstimatorOptions = Field(default_factory=EstimatorOptions)
    measure_wall_time: bool = True
    workers: int = Field(default=1, ge=1)


class ResultRowModel(BaseModel):
    dist: str
    n: int
    method: str
    rmse: float
    bias: float
    std: float
    wall_time: float


class SimulateResponse(BaseModel):
    rows: list[ResultRowModel]
