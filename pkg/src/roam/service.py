"""HTTP front end.

Run with ``uvicorn roam.service:app``.  The endpoints mirror the command
line and share its handlers; scenarios travel as JSON bodies and nothing
is written to disk.
"""

from __future__ import annotations

import math
from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import handlers
from .errors import ScenarioInvalid
from .scenario import ScenarioSpec

app = FastAPI(title="roam", version="0.1.0")


class ValidateResponse(BaseModel):
    valid: bool
    name: str
    dimension: int
    obstacles: int
    trees: int
    boundaries: int
    start_points: int
    free_start_points: int


class SimulateResponse(BaseModel):
    outcomes: dict[str, Any]
    metrics: dict[str, Any]


class FieldRequest(BaseModel):
    scenario: ScenarioSpec
    grid: tuple[int, int] = Field(description="nodes along the first two axes")
    lower: Optional[list[float]] = None
    upper: Optional[list[float]] = None
    t: float = 0.0


class FieldRow(BaseModel):
    position: list[float]
    velocity: Optional[list[float]]
    gamma_min: Optional[float] = Field(description="null when no obstacle bounds the point")
    speed_factor: Optional[float]


class FieldResponse(BaseModel):
    dimension: int
    rows: list[FieldRow]


def _finite(value: Any) -> Any:
    # JSON has no infinity; unbounded distances go out as null.
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _finite(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_finite(v) for v in value]
    return value


def _invalid(exc: ScenarioInvalid) -> HTTPException:
    return HTTPException(status_code=422, detail={"violations": exc.violations})


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.post("/validate", response_model=ValidateResponse)
def validate(scenario: ScenarioSpec) -> dict:
    try:
        return handlers.validate(scenario)
    except ScenarioInvalid as exc:
        raise _invalid(exc) from None


@app.post("/simulate", response_model=SimulateResponse)
def simulate(scenario: ScenarioSpec) -> dict:
    try:
        return _finite(handlers.simulate(scenario))
    except ScenarioInvalid as exc:
        raise _invalid(exc) from None


@app.post("/field", response_model=FieldResponse)
def field(request: FieldRequest) -> dict:
    if min(request.grid) < 1:
        raise HTTPException(status_code=422, detail={"violations": ["grid: counts must be positive"]})
    try:
        doc = handlers.field(request.scenario, request.grid, request.lower, request.upper, request.t)
    except ScenarioInvalid as exc:
        raise _invalid(exc) from None
    return _finite(doc)
