"""Pydantic request/response schemas for the HTTP service.

Big integers (tau, det, det_star) travel as decimal strings; floats are left
at full precision here and rounded for display by clients.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class TreesRequest(BaseModel):
    matrix: str = Field(description="rows ';', entries ',' — e.g. '2,1;0,2'")
    mode: Literal["auto", "exact", "float"] = "auto"


class TreesResponse(BaseModel):
    det: str
    tau: Optional[str] = None
    det_star: Optional[str] = None
    log_det_star: float
    method: str


class SpectrumRequest(BaseModel):
    matrix: str


class SpectrumResponse(BaseModel):
    det: str
    zero_multiplicity: int
    eigenvalues: list[float]


class ThetaRequest(BaseModel):
    matrix: str
    t: float = Field(gt=0)


class ThetaResponse(BaseModel):
    t: float
    spectral: float
    bessel: float
    gap: float


class LatticeSelector(BaseModel):
    lattice: Optional[str] = None
    matrix: Optional[str] = None
    r: Optional[int] = None


class HeightRequest(LatticeSelector):
    cross_check: bool = True


class HeightResponse(BaseModel):
    r: int
    log_det_star: float
    height: float
    small_t_integral: float
    large_t_integral: float
    constant_terms: float
    zeta_log_det_star: Optional[float] = None
    cross_check_gap: Optional[float] = None
    ss_bound: float
    ss_bound_holds: bool
    ss_margin: float


class CConstRequest(BaseModel):
    r: int = Field(ge=1, le=8)


class CConstResponse(BaseModel):
    r: int
    value: float
    err: float


class IdentityRequest(BaseModel):
    matrix: str
    s: float = Field(ge=0)


class IdentityResponse(BaseModel):
    s: float
    lhs: float
    rhs: float
    residual: float


class SequenceModel(BaseModel):
    kind: Literal["scale", "hexagonal_pq", "rect_match"] = "scale"
    base: Optional[str] = None
    n_min: int = Field(ge=1)
    n_max: int = Field(ge=1)


class Theorem1Request(BaseModel):
    sequence: SequenceModel
    exact_cap: Optional[int] = None
    float_cap: Optional[int] = None


class RecordModel(BaseModel):
    n: int
    det: str
    log_det_star: Optional[float] = None
    method: str
    predicted: Optional[float] = None
    residual: Optional[float] = None
    wall_ms: int


class Theorem1Response(BaseModel):
    c_r: float
    height_limit: float
    records: list[RecordModel]
    max_residual_top_quartile: float
    residual_at_largest: float
    fraction_decreasing_last_half: float


class BoundRequest(BaseModel):
    matrix: str


class BoundResponse(BaseModel):
    holds: bool
    log_slack: float
    log_tau: float
    log_bound: float


class CompareRequest(BaseModel):
    sequence_a: SequenceModel
    sequence_b: SequenceModel
    det_matching: Literal["exact", "near"] = "exact"


class CompareRowModel(BaseModel):
    det: str
    n_a: int
    n_b: int
    log_det_star_a: float
    log_det_star_b: float
    winner: str


class CompareResponse(BaseModel):
    rows: list[CompareRowModel]
    diagnostic: Optional[str] = None
    advisory: Optional[str] = None
    dominant_at_largest: Optional[str] = None


class ShortestVectorRequest(LatticeSelector):
    pass


class ShortestVectorResponse(BaseModel):
    length: float
    length_squared: float


class ExperimentRequest(BaseModel):
    config: str = Field(description="experiment file contents (INI-style)")
    output_dir: Optional[str] = None


class ExperimentResponse(BaseModel):
    run_dir: str
    rows: int
    task: Literal["theorem1", "compare"]
