"""Generic finite-MDP representation and tabular dynamic-programming solvers.

States and actions are opaque string labels. Transitions are stored per
(state, action) pair; a pair that is absent from the transition table means
the action is unavailable in that state. Rewards are attached to individual
(state, action, next_state) transitions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ValueFunction = dict[str, float]
Policy = dict[str, str]

# Absolute tolerance for a transition row to count as a probability distribution.
PROB_SUM_TOL = 1e-9


class MdpError(ValueError):
    """Raised on model/query mismatches and precondition violations."""


@dataclass(frozen=True)
class MdpModel:
    """A finite MDP: ordered states/actions, transition kernel, rewards.

    transitions maps (state, action) -> {next_state: probability}.
    rewards maps (state, action, next_state) -> immediate reward.
    """

    states: tuple[str, ...]
    actions: tuple[str, ...]
    transitions: dict[tuple[str, str], dict[str, float]]
    rewards: dict[tuple[str, str, str], float]

    def available_actions(self, state: str) -> list[str]:
        return [a for a in self.actions if (state, a) in self.transitions]

    def require_state(self, state: str) -> None:
        if state not in self.states:
            raise MdpError(f"unknown state {state!r}; model states are {list(self.states)}")


@dataclass
class SolveReport:
    """Converged output of value iteration.

    q_table holds, for each available (state, action), the one-step backup of
    the final value function; value and policy are its exact max/argmax.
    deltas records the max-norm change of every sweep, in order.
    """

    value: ValueFunction
    policy: Policy
    q_table: dict[tuple[str, str], float]
    iterations: int
    final_delta: float
    converged: bool
    deltas: list[float] = field(default_factory=list)

    @property
    def contraction_violation(self) -> float:
        """Worst positive excess of delta_{i+1} over gamma-contracted delta_i.

        Populated by value_iteration; 0.0 means every consecutive pair of
        sweep deltas obeyed the Bellman-operator contraction.
        """
        return self._contraction_violation

    _contraction_violation: float = 0.0


def validate(model: MdpModel) -> list[str]:
    """Check model invariants, returning one message per violation.

    An empty list means the model is a well-formed MDP: every transition row
    is a probability distribution, every state has at least one action, and
    rewards line up one-to-one with positive-probability transitions.
    """
    violations: list[str] = []
    states = set(model.states)
    for (s, a), row in model.transitions.items():
        if s not in states:
            violations.append(f"({s}, {a}): transition row for unknown state {s!r}")
            continue
        if a not in model.actions:
            violations.append(f"({s}, {a}): unknown action {a!r}")
            continue
        total = 0.0
        for sp, p in row.items():
            if sp not in states:
                violations.append(f"({s}, {a}): successor {sp!r} is not a model state")
            if not 0.0 <= p <= 1.0:
                violations.append(f"({s}, {a}): probability {p} for successor {sp} outside [0, 1]")
            total += p
        if abs(total - 1.0) > PROB_SUM_TOL:
            violations.append(f"({s}, {a}): probabilities sum to {total} != 1")
        for sp, p in row.items():
            if p > 0.0 and (s, a, sp) not in model.rewards:
                violations.append(f"({s}, {a}): missing reward for successor {sp}")
    for s in model.states:
        if not model.available_actions(s):
            violations.append(f"({s}): state has no available action")
    for (s, a, sp) in model.rewards:
        p = model.transitions.get((s, a), {}).get(sp, 0.0)
        if p <= 0.0:
            violations.append(f"({s}, {a}): reward entry for {sp} has no positive-probability transition")
    return violations


def bellman_backup(model: MdpModel, v: ValueFunction, gamma: float, state: str) -> dict[str, float]:
    """One-step action values at `state`: sum_s' P(s,a,s') [R(s,a,s') + gamma v(s')]."""
    _check_gamma(gamma)
    model.require_state(state)
    for s in model.states:
        if s not in v:
            raise MdpError(f"value function missing state {s!r}")
    backups: dict[str, float] = {}
    for a in model.available_actions(state):
        total = 0.0
        for sp, p in model.transitions[(state, a)].items():
            if p == 0.0:
                continue
            total += p * (model.rewards[(state, a, sp)] + gamma * v[sp])
        backups[a] = total
    return backups


class _Tabular:
    """Dense array view of an MdpModel for vectorized sweeps."""

    def __init__(self, model: MdpModel):
        self.model = model
        n_s, n_a = len(model.states), len(model.actions)
        self.s_index = {s: i for i, s in enumerate(model.states)}
        self.a_index = {a: j for j, a in enumerate(model.actions)}
        self.prob = np.zeros((n_s, n_a, n_s))
        self.exp_reward = np.zeros((n_s, n_a))
        self.available = np.zeros((n_s, n_a), dtype=bool)
        for (s, a), row in model.transitions.items():
            i, j = self.s_index[s], self.a_index[a]
            self.available[i, j] = True
            for sp, p in row.items():
                if p == 0.0:
                    continue
                k = self.s_index[sp]
                self.prob[i, j, k] = p
                self.exp_reward[i, j] += p * model.rewards[(s, a, sp)]

    def q_values(self, v: np.ndarray, gamma: float) -> np.ndarray:
        q = self.exp_reward + gamma * self.prob @ v
        return np.where(self.available, q, -np.inf)


def value_iteration(
    model: MdpModel,
    gamma: float,
    epsilon: float,
    max_iterations: int = 100_000,
) -> SolveReport:
    """Iterate the Bellman optimality operator from V=0 until the max-norm
    sweep change drops below epsilon, then extract the greedy policy.

    Ties in the argmax go to the action earliest in the model's action order.
    If max_iterations is exhausted first, the report is returned with
    converged=False and carries the partial results; it is never raised.
    """
    _check_gamma(gamma)
    if epsilon <= 0:
        raise MdpError(f"epsilon must be positive, got {epsilon}")
    if max_iterations < 1:
        raise MdpError(f"max_iterations must be >= 1, got {max_iterations}")
    tab = _Tabular(model)
    v = np.zeros(len(model.states))
    deltas: list[float] = []
    converged = False
    iterations = 0
    delta = np.inf
    for iterations in range(1, max_iterations + 1):
        v_next = tab.q_values(v, gamma).max(axis=1)
        delta = float(np.abs(v_next - v).max())
        deltas.append(delta)
        v = v_next
        if delta < epsilon:
            converged = True
            break

    # One final backup so that value/policy/q_table are exactly consistent.
    q = tab.q_values(v, gamma)
    value = {s: float(q[i].max()) for s, i in tab.s_index.items()}
    policy = _greedy_from_q(model, tab, q)
    q_table = {
        (s, a): float(q[tab.s_index[s], tab.a_index[a]])
        for (s, a) in model.transitions
    }
    report = SolveReport(
        value=value,
        policy=policy,
        q_table=q_table,
        iterations=iterations,
        final_delta=delta,
        converged=converged,
        deltas=deltas,
    )
    report._contraction_violation = max(
        (deltas[i + 1] - gamma * deltas[i] for i in range(len(deltas) - 1)),
        default=0.0,
    )
    report._contraction_violation = max(report._contraction_violation, 0.0)
    return report


def policy_evaluation(
    model: MdpModel,
    policy: Policy,
    gamma: float,
    epsilon: float = 1e-10,
    method: str = "linear",
) -> ValueFunction:
    """Value of a fixed deterministic policy.

    method="linear" solves (I - gamma P_pi) v = r_pi directly;
    method="iterative" sweeps until the max-norm change is below epsilon.
    """
    _check_gamma(gamma)
    for s in model.states:
        a = policy.get(s)
        if a is None:
            raise MdpError(f"policy does not cover state {s!r}")
        if (s, a) not in model.transitions:
            raise MdpError(f"policy action {a!r} unavailable in state {s!r}")
    tab = _Tabular(model)
    n = len(model.states)
    p_pi = np.zeros((n, n))
    r_pi = np.zeros(n)
    for s in model.states:
        i, j = tab.s_index[s], tab.a_index[policy[s]]
        p_pi[i] = tab.prob[i, j]
        r_pi[i] = tab.exp_reward[i, j]
    if method == "linear":
        v = np.linalg.solve(np.eye(n) - gamma * p_pi, r_pi)
    elif method == "iterative":
        v = np.zeros(n)
        for _ in range(1_000_000):
            v_next = r_pi + gamma * p_pi @ v
            if np.abs(v_next - v).max() < epsilon:
                v = v_next
                break
            v = v_next
    else:
        raise MdpError(f"unknown policy evaluation method {method!r}")
    return {s: float(v[tab.s_index[s]]) for s in model.states}


def extract_policy(model: MdpModel, v: ValueFunction, gamma: float) -> Policy:
    """Greedy policy from one Bellman backup of v; ties break by action order."""
    _check_gamma(gamma)
    tab = _Tabular(model)
    varr = np.array([v[s] for s in model.states])
    q = tab.q_values(varr, gamma)
    return _greedy_from_q(model, tab, q)


def _greedy_from_q(model: MdpModel, tab: _Tabular, q: np.ndarray) -> Policy:
    policy: Policy = {}
    for s in model.states:
        i = tab.s_index[s]
        best = None
        best_q = -np.inf
        for a in model.actions:
            j = tab.a_index[a]
            if tab.available[i, j] and q[i, j] > best_q:
                best, best_q = a, q[i, j]
        assert best is not None  # validate() guarantees an available action
        policy[s] = best
    return policy


def _check_gamma(gamma: float) -> None:
    if not 0.0 < gamma < 1.0:
        raise MdpError(f"gamma must lie strictly inside (0, 1), got {gamma}")
