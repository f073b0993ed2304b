"""FastAPI service exposing the torus computations.

Run with `uvicorn toruslab.service.app:app`; the bundled CLI talks to this
app in-process unless TORUS_SERVER_URL points at a deployed instance.
"""

from __future__ import annotations

import math

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import CapExceededError, TorusError
from ..experiments import (
    SequenceSpec,
    check_tree_bound,
    compare_sequences,
    run_experiment_file,
    verify_theorem1,
)
from ..heights import (
    EULER_GAMMA,
    c_constant,
    height,
    spectral_log_identity_check,
)
from ..lattices import (
    IntegerLattice,
    RealLattice,
    named_lattice,
    parse_matrix,
    parse_real_matrix,
    shortest_vector,
)
from ..spectral import (
    EXACT_DET_CAP,
    count_spanning_trees,
    eigenvalues,
    log_det_star_float,
)
from ..theta import theta_discrete_bessel, theta_discrete_spectral
from . import models

app = FastAPI(
    title="toruslab",
    description="Spanning-tree counts of discrete tori, heights of real tori, "
    "and the asymptotics connecting them.",
    version=__version__,
)


@app.exception_handler(TorusError)
async def torus_error_handler(request: Request, exc: TorusError):
    return JSONResponse(status_code=400, content={"error": str(exc), "kind": exc.kind})


def _sequence(model: models.SequenceModel) -> SequenceSpec:
    base = parse_matrix(model.base) if model.base else None
    return SequenceSpec(n_min=model.n_min, n_max=model.n_max, kind=model.kind, base=base)


def _real_lattice(sel: models.LatticeSelector) -> RealLattice:
    if (sel.lattice is None) == (sel.matrix is None):
        raise TorusError("provide exactly one of 'lattice' or 'matrix'")
    if sel.lattice is not None:
        return named_lattice(sel.lattice, sel.r)
    return parse_real_matrix(sel.matrix)


@app.get("/health", response_model=models.HealthResponse)
def health_check() -> models.HealthResponse:
    return models.HealthResponse(version=__version__)


@app.post("/trees", response_model=models.TreesResponse)
def trees(req: models.TreesRequest) -> models.TreesResponse:
    L = parse_matrix(req.matrix)
    mode = req.mode
    if mode == "auto":
        mode = "exact" if L.det_abs <= EXACT_DET_CAP else "float"
    if mode == "exact":
        tc = count_spanning_trees(L)
        return models.TreesResponse(
            det=str(L.det_abs), tau=str(tc.tau), det_star=str(tc.det_star),
            log_det_star=math.log(tc.det_star), method="exact",
        )
    return models.TreesResponse(
        det=str(L.det_abs), log_det_star=log_det_star_float(L), method="float",
    )


@app.post("/spectrum", response_model=models.SpectrumResponse)
def spectrum(req: models.SpectrumRequest) -> models.SpectrumResponse:
    L = parse_matrix(req.matrix)
    spec = eigenvalues(L)
    return models.SpectrumResponse(
        det=str(L.det_abs),
        zero_multiplicity=spec.zero_multiplicity,
        eigenvalues=sorted(spec.values),
    )


@app.post("/theta", response_model=models.ThetaResponse)
def theta(req: models.ThetaRequest) -> models.ThetaResponse:
    L = parse_matrix(req.matrix)
    s = theta_discrete_spectral(L, req.t)
    b = theta_discrete_bessel(L, req.t)
    return models.ThetaResponse(t=req.t, spectral=s, bessel=b, gap=abs(s - b))


@app.post("/height", response_model=models.HeightResponse)
def height_endpoint(req: models.HeightRequest) -> models.HeightResponse:
    A = _real_lattice(req)
    if abs(A.volume - 1.0) > 1e-9:
        A = A.rescaled_to_volume()
    res = height(A, cross_check=req.cross_check)
    bound = EULER_GAMMA - math.log(4.0 * math.pi) + 2.0 / A.r
    return models.HeightResponse(
        r=A.r,
        log_det_star=res.log_det_star,
        height=res.height,
        small_t_integral=res.small_t_integral,
        large_t_integral=res.large_t_integral,
        constant_terms=res.constant_terms,
        zeta_log_det_star=res.zeta_log_det_star,
        cross_check_gap=res.cross_check_gap,
        ss_bound=bound,
        ss_bound_holds=res.log_det_star < bound,
        ss_margin=bound - res.log_det_star,
    )


@app.post("/c-const", response_model=models.CConstResponse)
def c_const(req: models.CConstRequest) -> models.CConstResponse:
    c = c_constant(req.r)
    return models.CConstResponse(r=c.r, value=c.value, err=c.quadrature_error)


@app.post("/identity", response_model=models.IdentityResponse)
def identity(req: models.IdentityRequest) -> models.IdentityResponse:
    L = parse_matrix(req.matrix)
    chk = spectral_log_identity_check(L, req.s)
    return models.IdentityResponse(s=req.s, lhs=chk.lhs, rhs=chk.rhs, residual=chk.residual)


@app.post("/verify-theorem1", response_model=models.Theorem1Response)
def verify_theorem1_endpoint(req: models.Theorem1Request) -> models.Theorem1Response:
    kwargs = {}
    if req.exact_cap is not None:
        kwargs["exact_cap"] = req.exact_cap
    if req.float_cap is not None:
        kwargs["float_cap"] = req.float_cap
    report = verify_theorem1(_sequence(req.sequence), **kwargs)
    return models.Theorem1Response(
        c_r=report.c_r.value,
        height_limit=report.height_limit,
        records=[
            models.RecordModel(
                n=rec.n, det=str(rec.det), log_det_star=rec.log_det_star,
                method=rec.method, predicted=rec.predicted, residual=rec.residual,
                wall_ms=rec.wall_ms,
            )
            for rec in report.records
        ],
        max_residual_top_quartile=report.max_residual_top_quartile,
        residual_at_largest=report.residual_at_largest,
        fraction_decreasing_last_half=report.fraction_decreasing_last_half,
    )


@app.post("/bound", response_model=models.BoundResponse)
def bound(req: models.BoundRequest) -> models.BoundResponse:
    L = parse_matrix(req.matrix)
    tb = check_tree_bound(L)
    return models.BoundResponse(
        holds=tb.holds, log_slack=tb.log_slack, log_tau=tb.log_tau, log_bound=tb.log_bound,
    )


@app.post("/compare", response_model=models.CompareResponse)
def compare(req: models.CompareRequest) -> models.CompareResponse:
    table = compare_sequences(
        _sequence(req.sequence_a), _sequence(req.sequence_b), det_matching=req.det_matching
    )
    return models.CompareResponse(
        rows=[
            models.CompareRowModel(
                det=str(row.det), n_a=row.n_a, n_b=row.n_b,
                log_det_star_a=row.log_det_star_a, log_det_star_b=row.log_det_star_b,
                winner=row.winner,
            )
            for row in table.rows
        ],
        diagnostic=table.diagnostic,
        advisory=table.advisory,
        dominant_at_largest=table.dominant_at_largest,
    )


@app.post("/shortest-vector", response_model=models.ShortestVectorResponse)
def shortest(req: models.ShortestVectorRequest) -> models.ShortestVectorResponse:
    A = _real_lattice(req)
    m = shortest_vector(A)
    return models.ShortestVectorResponse(length=m, length_squared=m * m)


@app.post("/experiment", response_model=models.ExperimentResponse)
def experiment(req: models.ExperimentRequest) -> models.ExperimentResponse:
    result = run_experiment_file(req.config, base_dir=req.output_dir)
    if result.comparison is not None:
        return models.ExperimentResponse(
            run_dir=str(result.run_dir), rows=len(result.comparison.rows), task="compare"
        )
    return models.ExperimentResponse(
        run_dir=str(result.run_dir), rows=len(result.report.records), task="theorem1"
    )
