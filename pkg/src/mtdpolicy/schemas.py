"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from .mtd import MtdParams

StateName = Literal["N", "T", "E", "B"]
ActionName = Literal["Wait", "Defend", "Reset"]
CostName = Literal["cost_defend", "cost_reset", "cost_exploit", "cost_targeted", "cost_breach"]


class ParamsModel(BaseModel):
    p_target: float = Field(default=0.2, ge=0.0, le=1.0)
    p_exploit: float = Field(default=0.2, ge=0.0, le=1.0)
    p_defend: float = Field(default=0.6, ge=0.0, le=1.0)
    p_breach: float = Field(default=0.4, ge=0.0, le=1.0)
    reward_base: float = 10.0
    reward_defend: float = 5.0
    cost_targeted: float = Field(default=0.1, ge=0.0)
    cost_exploit: float = Field(default=3.0, ge=0.0)
    cost_breach: float = Field(default=4.0, ge=0.0)
    cost_reset: float = Field(default=4.0, ge=0.0)
    cost_defend: float = Field(default=4.0, ge=0.0)
    gamma: float = Field(default=0.9, gt=0.0, lt=1.0)
    epsilon: float = Field(default=0.001, gt=0.0)

    def to_params(self) -> MtdParams:
        return MtdParams(**self.model_dump())

    @classmethod
    def from_params(cls, params: MtdParams) -> "ParamsModel":
        return cls(**{name: getattr(params, name) for name in cls.model_fields})


class SolveRequest(BaseModel):
    params: ParamsModel = ParamsModel()


class SolveResponse(BaseModel):
    values: dict[StateName, float]
    policy: dict[StateName, ActionName]
    q_table: dict[StateName, dict[ActionName, float]]
    iterations: int
    final_delta: float
    converged: bool
    contraction_violation: float


class SweepRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    parameter: CostName = "cost_defend"
    start: float = Field(default=0.05, ge=0.0, le=1.5)
    stop: float = Field(default=1.0, ge=0.0, le=1.5)
    step: float = Field(default=0.025, gt=0.0)
    fractions: list[float] | None = None  # overrides start/stop/step when given
    scale_base: float | None = Field(default=None, gt=0.0)
    calibrate: bool = False


class SweepPointModel(BaseModel):
    fraction: float
    cost: float
    optimal: dict[StateName, ActionName]
    q_values: dict[StateName, dict[ActionName, float]]


class SweepResponse(BaseModel):
    parameter: CostName
    scale_base: float
    points: list[SweepPointModel]
    worst_contraction_violation: float


class TurningPointRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    parameter: CostName = "cost_defend"
    state: StateName = "E"
    lo: float = 0.05
    hi: float = 1.0
    tol: float = Field(default=0.005, gt=0.0)
    scale_base: float | None = Field(default=None, gt=0.0)


class TurningPointResponse(BaseModel):
    state: StateName
    from_action: ActionName
    to_action: ActionName
    bracket_low: float
    bracket_high: float


class PhaseRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    x_parameter: CostName = "cost_defend"
    y_parameter: CostName = "cost_exploit"
    state: StateName = "E"
    resolution: int = Field(default=41, ge=2, le=201)
    x_fractions: list[float] | None = None  # overrides resolution when given
    y_fractions: list[float] | None = None
    scale_base: float | None = Field(default=None, gt=0.0)


class PhaseResponse(BaseModel):
    x_parameter: CostName
    y_parameter: CostName
    state: StateName
    scale_base: float
    x_fractions: list[float]
    y_fractions: list[float]
    actions: list[list[ActionName]]
    worst_contraction_violation: float


class CaseStudyRequest(BaseModel):
    preset: Literal["decoy", "scit"]
    overrides: dict[str, float] = {}
    resolution: int = Field(default=41, ge=2, le=201)
    state: StateName = "E"


class McEvalRequest(BaseModel):
    params: ParamsModel = ParamsModel()
    state: StateName = "E"
    episodes: int = Field(default=100_000, ge=1)
    horizon: int | None = Field(default=None, ge=1)
    seed: int = 0
    policy: dict[StateName, ActionName] | None = None  # defaults to the optimal policy


class McEvalResponse(BaseModel):
    state: StateName
    policy: dict[StateName, ActionName]
    episodes: int
    horizon: int
    seed: int
    mean_return: float
    standard_error: float


class EnumerateRequest(BaseModel):
    params: ParamsModel = ParamsModel()


class PolicyValueModel(BaseModel):
    policy: dict[StateName, ActionName]
    values: dict[StateName, float]


class EnumerateResponse(BaseModel):
    envelope: dict[StateName, float]
    best_policy: dict[StateName, ActionName] | None
    simultaneously_optimal: bool
    n_policies: int
    ties: list[dict[StateName, ActionName]]
    table: list[PolicyValueModel]


class ErrorBody(BaseModel):
    kind: Literal["config", "non_convergence", "internal"]
    message: str
