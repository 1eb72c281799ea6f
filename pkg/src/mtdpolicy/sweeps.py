"""Cost-sweep experiments: 1D sweeps with turning-point detection,
piecewise-linear fits of the value-vs-cost curves, 2D policy phase diagrams,
and the decoy / SCIT case-study presets.

Costs are swept as fractions of a reward scale (scale_base); the calibrated
default is reward_base + reward_defend.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mdp import MdpError, SolveReport, value_iteration
from .mtd import ACTIONS, STATES, MtdParams, build_mtd_model

COST_PARAMETERS = ("cost_defend", "cost_reset", "cost_exploit", "cost_targeted", "cost_breach")

DEFAULT_FRACTIONS = [round(f, 4) for f in np.arange(0.05, 1.0001, 0.025)]

# The turning point the scale-base calibration must reproduce: the optimal
# action at E flips Defend -> Reset between 27.5% and 30% of total rewards.
_CALIBRATION_BRACKET = (0.275, 0.30)


class SolveFailedError(MdpError):
    """Value iteration did not converge at a sweep/diagram point."""


class NoCrossingError(MdpError):
    """Bisection endpoints have the same optimal action."""


@dataclass
class SweepPoint:
    fraction: float
    cost: float
    optimal: dict[str, str]                 # state -> action
    q_values: dict[str, dict[str, float]]   # state -> action -> value


@dataclass
class SweepResult:
    parameter: str
    scale_base: float
    points: list[SweepPoint]
    worst_contraction_violation: float = 0.0


@dataclass
class TurningPoint:
    state: str
    from_action: str
    to_action: str
    bracket_low: float
    bracket_high: float


@dataclass
class Segment:
    lo: float
    hi: float
    slope: float
    intercept: float
    max_residual: float


@dataclass
class PiecewiseLinearFit:
    state: str
    action: str
    segments: list[Segment]
    max_residual: float

    @property
    def breakpoint(self) -> float | None:
        return self.segments[1].lo if len(self.segments) == 2 else None


@dataclass
class PhaseDiagram:
    x_parameter: str
    y_parameter: str
    state: str
    scale_base: float
    x_fractions: list[float]
    y_fractions: list[float]
    actions: list[list[str]]  # actions[iy][ix]
    base: MtdParams = field(repr=False, default=None)
    worst_contraction_violation: float = 0.0


def default_scale_base(params: MtdParams) -> float:
    return params.reward_base + params.reward_defend


def calibrate_scale_base(params: MtdParams) -> float:
    """Pick the reward total that cost fractions multiply.

    Tries both candidate bases (the baseline reward alone, and baseline plus
    defense reward) and keeps the one that places the Defend->Reset turning
    point at state E inside the published bracket. Falls back to the combined
    total when neither candidate lands inside it.
    """
    lo, hi = _CALIBRATION_BRACKET
    for base in (params.reward_base + params.reward_defend, params.reward_base):
        try:
            tp = find_turning_point(params, "cost_defend", "E", 0.05, 1.0,
                                    tol=0.005, scale_base=base)
        except MdpError:
            continue
        if tp.from_action == "Defend" and tp.to_action == "Reset" \
                and lo <= tp.bracket_low and tp.bracket_high <= hi:
            return base
    return params.reward_base + params.reward_defend


def _check_parameter(parameter: str) -> None:
    if parameter not in COST_PARAMETERS:
        raise MdpError(f"unknown sweep parameter {parameter!r}; expected one of {COST_PARAMETERS}")


def solve_at(params: MtdParams, parameter: str, fraction: float, scale_base: float) -> SolveReport:
    """Solve the model with one cost pinned to fraction * scale_base."""
    _check_parameter(parameter)
    adjusted = params.replace(**{parameter: fraction * scale_base})
    model = build_mtd_model(adjusted)
    report = value_iteration(model, adjusted.gamma, adjusted.epsilon)
    if not report.converged:
        raise SolveFailedError(
            f"value iteration did not converge at {parameter}={fraction * scale_base}"
            f" (fraction {fraction})")
    return report


def sweep_cost(
    base: MtdParams,
    parameter: str,
    fractions: list[float] | None = None,
    scale_base: float | None = None,
) -> SweepResult:
    """Solve the model across a grid of cost fractions and record, per grid
    point, the optimal action and all action values at every state."""
    _check_parameter(parameter)
    if fractions is None:
        fractions = DEFAULT_FRACTIONS
    fractions = list(fractions)
    if any(not 0.0 <= f <= 1.5 for f in fractions):
        raise MdpError("sweep fractions must lie in [0, 1.5]")
    if sorted(fractions) != fractions or len(set(fractions)) != len(fractions):
        raise MdpError("sweep fractions must be strictly increasing")
    if scale_base is None:
        scale_base = default_scale_base(base)
    if scale_base <= 0:
        raise MdpError(f"scale_base must be positive, got {scale_base}")

    points = []
    worst = 0.0
    for f in fractions:
        report = solve_at(base, parameter, f, scale_base)
        worst = max(worst, report.contraction_violation)
        q_values = {
            s: {a: report.q_table[(s, a)] for a in ACTIONS if (s, a) in report.q_table}
            for s in STATES
        }
        points.append(SweepPoint(
            fraction=f,
            cost=f * scale_base,
            optimal=dict(report.policy),
            q_values=q_values,
        ))
    return SweepResult(parameter=parameter, scale_base=scale_base, points=points,
                       worst_contraction_violation=worst)


def find_turning_point(
    base: MtdParams,
    parameter: str,
    state: str,
    lo: float,
    hi: float,
    tol: float,
    scale_base: float | None = None,
) -> TurningPoint:
    """Bisect the cost-fraction axis for the policy switch at `state`.

    Requires different optimal actions at the endpoints; narrows the bracket
    until its width is at most tol. Multiple crossings inside (lo, hi) are
    not detected: bisection homes in on one of them.
    """
    if not lo < hi:
        raise MdpError(f"need lo < hi, got [{lo}, {hi}]")
    if tol <= 0:
        raise MdpError(f"tol must be positive, got {tol}")
    if scale_base is None:
        scale_base = default_scale_base(base)

    def action_at(fraction: float) -> str:
        return solve_at(base, parameter, fraction, scale_base).policy[state]

    a_lo = action_at(lo)
    a_hi = action_at(hi)
    if a_lo == a_hi:
        raise NoCrossingError(
            f"optimal action at {state} is {a_lo!r} at both endpoints [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if action_at(mid) == a_lo:
            lo = mid
        else:
            hi = mid
            a_hi = action_at(mid)
    return TurningPoint(state=state, from_action=a_lo, to_action=a_hi,
                        bracket_low=lo, bracket_high=hi)


def fit_piecewise(sweep: SweepResult, state: str, action: str) -> PiecewiseLinearFit:
    """Fit a 1- or 2-segment piecewise-linear model to an action-value curve.

    The breakpoint is placed at the start of the longest suffix of the curve
    that is itself linear (within a tight absolute residual); this pins the
    second segment to the regime the curve settles into, so a flat tail is
    reported with slope exactly 0. The head segment is a least-squares line.
    With no linear suffix longer than the minimum, or when the whole curve is
    linear, a single segment is fitted.
    """
    if len(sweep.points) < 8:
        raise MdpError(f"piecewise fit needs >= 8 grid points, got {len(sweep.points)}")
    x = np.array([pt.cost for pt in sweep.points])
    y = np.array([pt.q_values[state][action] for pt in sweep.points])
    n = len(x)
    tail_tol = 1e-7 * max(1.0, float(np.abs(y).max()))

    def line_fit(xs: np.ndarray, ys: np.ndarray) -> tuple[float, float, float]:
        if len(xs) == 1:
            return 0.0, float(ys[0]), 0.0
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = float(np.abs(ys - (slope * xs + intercept)).max())
        return float(slope), float(intercept), resid

    # Longest linear suffix, but leave at least 2 points for the head.
    split = n  # index where the tail starts
    for k in range(n - 2, 1, -1):
        _, _, resid = line_fit(x[k:], y[k:])
        if resid <= tail_tol:
            split = k
        else:
            break
    whole = line_fit(x, y)
    if whole[2] <= tail_tol or split >= n - 1:
        slope, intercept, resid = whole
        segments = [Segment(float(x[0]), float(x[-1]), slope, intercept, resid)]
        return PiecewiseLinearFit(state=state, action=action, segments=segments,
                                  max_residual=resid)
    s1, i1, r1 = line_fit(x[:split], y[:split])
    s2, i2, r2 = line_fit(x[split:], y[split:])
    segments = [
        Segment(float(x[0]), float(x[split - 1]), s1, i1, r1),
        Segment(float(x[split]), float(x[-1]), s2, i2, r2),
    ]
    return PiecewiseLinearFit(state=state, action=action, segments=segments,
                              max_residual=max(r1, r2))


def phase_diagram(
    base: MtdParams,
    x_parameter: str,
    y_parameter: str,
    x_fractions: list[float],
    y_fractions: list[float],
    state: str = "E",
    scale_base: float | None = None,
) -> PhaseDiagram:
    """Optimal action at `state` over a 2D grid of cost fractions."""
    _check_parameter(x_parameter)
    _check_parameter(y_parameter)
    if x_parameter == y_parameter:
        raise MdpError("x and y parameters must differ")
    if not x_fractions or not y_fractions:
        raise MdpError("phase diagram grids must be non-empty")
    if state not in STATES:
        raise MdpError(f"unknown state {state!r}")
    if scale_base is None:
        scale_base = default_scale_base(base)

    actions: list[list[str]] = []
    worst = 0.0
    for fy in y_fractions:
        row = []
        for fx in x_fractions:
            params = base.replace(**{
                x_parameter: fx * scale_base,
                y_parameter: fy * scale_base,
            })
            model = build_mtd_model(params)
            report = value_iteration(model, params.gamma, params.epsilon)
            if not report.converged:
                raise SolveFailedError(
                    f"non-convergence at cell ({x_parameter}={fx}, {y_parameter}={fy})")
            worst = max(worst, report.contraction_violation)
            row.append(report.policy[state])
        actions.append(row)
    return PhaseDiagram(
        x_parameter=x_parameter, y_parameter=y_parameter, state=state,
        scale_base=scale_base, x_fractions=list(x_fractions),
        y_fractions=list(y_fractions), actions=actions, base=base,
        worst_contraction_violation=worst,
    )


CASE_STUDY_PRESETS = ("decoy", "scit")

# Qualitative cost regimes behind the presets. Decoy fleets make breach and
# exploitation nearly free (fake data) while defense and reset are the swept,
# potentially very expensive axes. SCIT sweeps the per-rotation reset cost
# against the exploitation damage it is meant to avert.
_DECOY_OVERRIDES = {"cost_exploit": 0.5, "cost_breach": 0.5}


def case_study(
    preset: str,
    overrides: dict[str, float] | None = None,
    resolution: int = 41,
    state: str = "E",
) -> PhaseDiagram:
    """Run a case-study phase diagram.

    decoy: defense cost x reset cost, with exploitation and breach costs low.
    scit: reset cost x exploitation cost at the baseline operating point.
    Overrides adjust the fixed parameters underneath either preset.
    """
    if preset not in CASE_STUDY_PRESETS:
        raise MdpError(f"unknown case-study preset {preset!r}; expected one of {CASE_STUDY_PRESETS}")
    if resolution < 2:
        raise MdpError(f"resolution must be >= 2, got {resolution}")
    changes: dict[str, float] = {}
    if preset == "decoy":
        changes.update(_DECOY_OVERRIDES)
        axes = ("cost_defend", "cost_reset")
    else:
        axes = ("cost_reset", "cost_exploit")
    if overrides:
        changes.update(overrides)
    params = MtdParams().replace(**changes)
    grid = [round(f, 6) for f in np.linspace(0.0, 1.0, resolution)]
    return phase_diagram(params, axes[0], axes[1], grid, grid, state=state)
