"""FastAPI wiring: routes delegate to the operations module."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..core import DomainError
from ..lowerbound import ConstructionError
from ..polyapprox import RemezError
from . import operations, schemas

_CLIENT_ERRORS = (DomainError, ConstructionError)


def create_app() -> FastAPI:
    app = FastAPI(title="entrokit", version="0.1.0")

    def run(op, req):
        try:
            return op(req)
        except _CLIENT_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except RemezError as exc:
            raise HTTPException(status_code=500, detail=str(exc))

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse()

    @app.post("/estimate", response_model=schemas.EstimateResponse)
    def estimate(req: schemas.EstimateRequest):
        return run(operations.estimate, req)

    @app.post("/remez", response_model=schemas.RemezResponse)
    def remez(req: schemas.RemezRequest):
        return run(operations.remez_op, req)

    @app.post("/lowerbound/pair", response_model=schemas.PairResponse)
    def lowerbound_pair(req: schemas.PairRequest):
        return run(operations.lowerbound_pair, req)

    @app.post("/lowerbound/prior", response_model=schemas.PriorResponse)
    def lowerbound_prior(req: schemas.PriorRequest):
        return run(operations.lowerbound_prior, req)

    @app.post("/lowerbound/tv", response_model=schemas.TvResponse)
    def lowerbound_tv(req: schemas.TvRequest):
        return run(operations.lowerbound_tv, req)

    @app.post("/lowerbound/scan", response_model=schemas.ScanResponse)
    def lowerbound_scan(req: schemas.ScanRequest):
        return run(operations.lowerbound_scan, req)

    @app.post("/simulate", response_model=schemas.SimulateResponse)
    def simulate(req: schemas.SimulateRequest):
        return run(operations.simulate, req)

    return app


app = create_app()
