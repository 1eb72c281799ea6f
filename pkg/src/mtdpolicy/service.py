"""HTTP service exposing the solver, sweep, and oracle operations.

All endpoints are stateless POSTs over pydantic models. Parameter/config
problems map to 400, solver non-convergence to 409, both with a structured
error body the CLI translates into exit codes.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__
from .mdp import MdpError, value_iteration
from .mtd import STATES, build_mtd_model
from .oracle import enumerate_policies, monte_carlo_eval
from .schemas import (
    CaseStudyRequest,
    EnumerateRequest,
    EnumerateResponse,
    McEvalRequest,
    McEvalResponse,
    PhaseRequest,
    PhaseResponse,
    PolicyValueModel,
    SolveRequest,
    SolveResponse,
    SweepPointModel,
    SweepRequest,
    SweepResponse,
    TurningPointRequest,
    TurningPointResponse,
)
from .sweeps import (
    SolveFailedError,
    calibrate_scale_base,
    case_study,
    find_turning_point,
    phase_diagram,
    sweep_cost,
)

app = FastAPI(title="mtdpolicy", version=__version__)


@app.exception_handler(SolveFailedError)
async def _non_convergence(request: Request, exc: SolveFailedError) -> JSONResponse:
    return JSONResponse(status_code=409,
                        content={"kind": "non_convergence", "message": str(exc)})


@app.exception_handler(MdpError)
async def _bad_request(request: Request, exc: MdpError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"kind": "config", "message": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/solve", response_model=SolveResponse)
def solve(req: SolveRequest) -> SolveResponse:
    params = req.params.to_params()
    model = build_mtd_model(params)
    report = value_iteration(model, params.gamma, params.epsilon)
    if not report.converged:
        raise SolveFailedError(
            f"value iteration stopped after {report.iterations} iterations "
            f"with delta {report.final_delta}")
    q_nested = {
        s: {a: q for (s2, a), q in report.q_table.items() if s2 == s}
        for s in STATES
    }
    return SolveResponse(
        values=report.value,
        policy=report.policy,
        q_table=q_nested,
        iterations=report.iterations,
        final_delta=report.final_delta,
        converged=report.converged,
        contraction_violation=report.contraction_violation,
    )


def _sweep_fractions(req: SweepRequest) -> list[float]:
    if req.fractions is not None:
        return req.fractions
    out = []
    f = req.start
    while f <= req.stop + 1e-12:
        out.append(round(f, 9))
        f += req.step
    return out


@app.post("/sweep", response_model=SweepResponse)
def sweep(req: SweepRequest) -> SweepResponse:
    params = req.params.to_params()
    scale_base = req.scale_base
    if scale_base is None and req.calibrate:
        scale_base = calibrate_scale_base(params)
    result = sweep_cost(params, req.parameter, _sweep_fractions(req), scale_base)
    return SweepResponse(
        parameter=result.parameter,
        scale_base=result.scale_base,
        points=[SweepPointModel(fraction=pt.fraction, cost=pt.cost,
                                optimal=pt.optimal, q_values=pt.q_values)
                for pt in result.points],
        worst_contraction_violation=result.worst_contraction_violation,
    )


@app.post("/turning-point", response_model=TurningPointResponse)
def turning_point(req: TurningPointRequest) -> TurningPointResponse:
    tp = find_turning_point(req.params.to_params(), req.parameter, req.state,
                            req.lo, req.hi, req.tol, req.scale_base)
    return TurningPointResponse(
        state=tp.state, from_action=tp.from_action, to_action=tp.to_action,
        bracket_low=tp.bracket_low, bracket_high=tp.bracket_high,
    )


def _phase_response(diagram) -> PhaseResponse:
    return PhaseResponse(
        x_parameter=diagram.x_parameter,
        y_parameter=diagram.y_parameter,
        state=diagram.state,
        scale_base=diagram.scale_base,
        x_fractions=diagram.x_fractions,
        y_fractions=diagram.y_fractions,
        actions=diagram.actions,
        worst_contraction_violation=diagram.worst_contraction_violation,
    )


@app.post("/phase", response_model=PhaseResponse)
def phase(req: PhaseRequest) -> PhaseResponse:
    grid = [round(float(f), 6) for f in np.linspace(0.0, 1.0, req.resolution)]
    xs = req.x_fractions if req.x_fractions is not None else grid
    ys = req.y_fractions if req.y_fractions is not None else grid
    diagram = phase_diagram(req.params.to_params(), req.x_parameter, req.y_parameter,
                            xs, ys, state=req.state, scale_base=req.scale_base)
    return _phase_response(diagram)


@app.post("/case-study", response_model=PhaseResponse)
def run_case_study(req: CaseStudyRequest) -> PhaseResponse:
    diagram = case_study(req.preset, req.overrides or None,
                         resolution=req.resolution, state=req.state)
    return _phase_response(diagram)


@app.post("/mc-eval", response_model=McEvalResponse)
def mc_eval(req: McEvalRequest) -> McEvalResponse:
    params = req.params.to_params()
    model = build_mtd_model(params)
    policy = dict(req.policy) if req.policy else None
    if policy is None:
        report = value_iteration(model, params.gamma, params.epsilon)
        if not report.converged:
            raise SolveFailedError("could not derive the optimal policy: non-convergence")
        policy = report.policy
    est = monte_carlo_eval(model, policy, params.gamma, req.state,
                           episodes=req.episodes, horizon=req.horizon, seed=req.seed)
    return McEvalResponse(
        state=est.state, policy=est.policy, episodes=est.episodes,
        horizon=est.horizon, seed=est.seed, mean_return=est.mean_return,
        standard_error=est.standard_error,
    )


@app.post("/enumerate", response_model=EnumerateResponse)
def enumerate_(req: EnumerateRequest) -> EnumerateResponse:
    params = req.params.to_params()
    model = build_mtd_model(params)
    result = enumerate_policies(model, params.gamma)
    return EnumerateResponse(
        envelope=result.envelope,
        best_policy=result.best_policy,
        simultaneously_optimal=result.simultaneously_optimal,
        n_policies=len(result.table),
        ties=result.ties,
        table=[PolicyValueModel(policy=p, values=v) for p, v in result.table],
    )
