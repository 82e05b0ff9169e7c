"""HTTP facade over the benchmark harness.

Clients submit a workload config and get one metrics record per run back;
the CLI is a thin client of this API (in-process via ASGI or over the wire).
"""

from __future__ import annotations

from typing import List, Literal, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .bench import (
    ConfigError,
    EMIT_FIELDS,
    RunMetrics,
    WorkloadConfig,
    run_many,
)
from .bench import SCHEMES, STRUCTURES


class WorkloadConfigModel(BaseModel):
    structure: Literal["hash", "bst"] = "hash"
    scheme: Literal["ebr", "steam", "dlrt", "slrt"] = "slrt"
    size: int = 10_000
    update_threads: int = 8
    small_rtx_threads: int = 0
    large_rtx_threads: int = 0
    mixed: bool = False
    rtx_size: int = 256
    dist: Literal["uniform", "zipf"] = "uniform"
    zipf_theta: float = 0.99
    duration_s: float = 2.0
    warmup_s: float = 0.5
    seed: int = 1
    ops_per_worker: Optional[int] = None

    def to_config(self) -> WorkloadConfig:
        return WorkloadConfig(
            structure=self.structure,
            scheme=self.scheme,
            n=self.size,
            update_threads=self.update_threads,
            small_rtx_threads=self.small_rtx_threads,
            large_rtx_threads=self.large_rtx_threads,
            mixed=self.mixed,
            rtx_size=self.rtx_size,
            dist=self.dist,
            zipf_theta=self.zipf_theta,
            duration_s=self.duration_s,
            warmup_s=self.warmup_s,
            seed=self.seed,
            ops_per_worker=self.ops_per_worker,
        )


class RunMetricsModel(BaseModel):
    structure: str
    scheme: str
    n: int
    threads_u: int
    threads_rs: int
    threads_rl: int
    rtx_size: int
    dist: str
    seed: int
    dur_s: float
    upd_ops_s: float
    rtx_ops_s: float
    lkp_ops_s: float
    reach_nodes: int
    avg_list_len: float
    avg_chain_c: float
    avg_compact_trav: float
    retained_items: int

    @classmethod
    def from_metrics(cls, metrics: RunMetrics) -> "RunMetricsModel":
        return cls(**metrics.as_row())


class RunRequest(BaseModel):
    config: WorkloadConfigModel
    runs: int = Field(default=1, ge=1, le=100)


class RunResponse(BaseModel):
    runs: List[RunMetricsModel]


def create_app() -> FastAPI:
    app = FastAPI(title="mvgc workbench", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/capabilities")
    def capabilities() -> dict:
        return {
            "structures": list(STRUCTURES),
            "schemes": list(SCHEMES),
            "metrics_fields": list(EMIT_FIELDS),
        }

    @app.post("/bench/run", response_model=RunResponse)
    def bench_run(request: RunRequest) -> RunResponse:
        config = request.config.to_config()
        try:
            config.validate()
            results = run_many(config, request.runs)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return RunResponse(runs=[RunMetricsModel.from_metrics(m) for m in results])

    return app


app = create_app()
