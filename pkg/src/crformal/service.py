"""HTTP service exposing the analysis runner.

POST /analyze runs a scenario document, POST /fixtures runs the built-in
corpus; both return the same deterministic report the CLI prints.  Run
with: uvicorn crformal.service:app
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .errors import CrformalError, ScenarioError
from .scenario import Scenario, run_fixtures, run_scenario

app = FastAPI(
    title="crformal",
    version=__version__,
    description="Certified invariants of formal generic submanifolds and "
    "the holomorphic map germs between them, with exact arithmetic.",
)


class AnalyzeRequest(BaseModel):
    scenario: Scenario
    audit: bool = False


class FixturesRequest(BaseModel):
    truncation: int = 8
    cutoff: int = 12
    seed: int = 0
    audit: bool = True


class Report(BaseModel):
    header: dict
    manifolds: dict = Field(default_factory=dict)
    maps: dict = Field(default_factory=dict)
    fixtures: Optional[dict] = None
    summary: dict


class Health(BaseModel):
    status: str
    version: str


@app.get("/health", response_model=Health)
def health() -> Health:
    return Health(status="ok", version=__version__)


@app.post("/analyze", response_model=Report, response_model_exclude_none=True)
def analyze(request: AnalyzeRequest) -> Report:
    try:
        return Report(**run_scenario(request.scenario, audit=request.audit))
    except ScenarioError as exc:
        raise HTTPException(
            status_code=400, detail={"path": exc.path, "error": exc.message}
        ) from exc
    except CrformalError as exc:
        raise HTTPException(status_code=400, detail={"error": str(exc)}) from exc


@app.post("/fixtures", response_model=Report, response_model_exclude_none=True)
def fixtures(request: FixturesRequest) -> Report:
    return Report(
        **run_fixtures(
            truncation=request.truncation,
            cutoff=request.cutoff,
            seed=request.seed,
            audit=request.audit,
        )
    )
