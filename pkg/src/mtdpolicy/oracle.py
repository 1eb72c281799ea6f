"""Independent correctness oracles for the dynamic-programming solvers.

Two routes that do not share code with value iteration: exhaustive
enumeration of all deterministic policies (each evaluated by a direct linear
solve), and seeded Monte Carlo rollout estimation of discounted returns.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .mdp import MdpError, MdpModel, Policy, ValueFunction, policy_evaluation

ENUMERATION_LIMIT = 10_000


@dataclass
class PolicyEnumeration:
    """Every deterministic policy with its exact value function.

    envelope is the per-state maximum over all policies. best_policy is a
    policy attaining the envelope at every state simultaneously, if one
    exists (simultaneously_optimal says whether it does). ties lists the
    policies whose value functions equal the envelope everywhere.
    """

    table: list[tuple[Policy, ValueFunction]]
    envelope: ValueFunction
    best_policy: Policy | None
    simultaneously_optimal: bool
    ties: list[Policy]


@dataclass
class McEstimate:
    state: str
    policy: Policy
    episodes: int
    horizon: int
    seed: int
    mean_return: float
    standard_error: float


def enumerate_policies(model: MdpModel, gamma: float, tol: float = 1e-9) -> PolicyEnumeration:
    """Evaluate every deterministic policy and take the upper envelope.

    Guarded to small models: the policy count |A_s1| x |A_s2| x ... must not
    exceed ENUMERATION_LIMIT.
    """
    per_state = [model.available_actions(s) for s in model.states]
    count = math.prod(len(acts) for acts in per_state)
    if count > ENUMERATION_LIMIT:
        raise MdpError(
            f"{count} deterministic policies exceed the enumeration guard ({ENUMERATION_LIMIT})")
    table: list[tuple[Policy, ValueFunction]] = []
    for combo in itertools.product(*per_state):
        policy = dict(zip(model.states, combo))
        table.append((policy, policy_evaluation(model, policy, gamma)))
    envelope = {s: max(v[s] for _, v in table) for s in model.states}
    best_policy = None
    ties = []
    for policy, v in table:
        if all(v[s] >= envelope[s] - tol for s in model.states):
            ties.append(policy)
            if best_policy is None:
                best_policy = policy
    return PolicyEnumeration(
        table=table,
        envelope=envelope,
        best_policy=best_policy,
        simultaneously_optimal=best_policy is not None,
        ties=ties,
    )


def required_horizon(model: MdpModel, gamma: float, bias_bound: float = 0.01) -> int:
    """Smallest horizon keeping the truncation bias below bias_bound."""
    r_max = max((abs(r) for r in model.rewards.values()), default=0.0)
    if r_max == 0.0:
        return 1
    # gamma^H * r_max / (1 - gamma) < bias_bound
    h = math.log(bias_bound * (1.0 - gamma) / r_max) / math.log(gamma)
    return max(1, math.ceil(h))


def monte_carlo_eval(
    model: MdpModel,
    policy: Policy,
    gamma: float,
    state: str,
    episodes: int,
    horizon: int | None = None,
    seed: int = 0,
) -> McEstimate:
    """Sample mean of truncated discounted returns under a fixed policy.

    All episodes start from `state`; the generator is seeded, so identical
    arguments give bit-identical estimates. Raises if the horizon is too
    short for the truncation-bias bound.
    """
    model.require_state(state)
    if episodes < 1:
        raise MdpError(f"episodes must be >= 1, got {episodes}")
    needed = required_horizon(model, gamma)
    if horizon is None:
        horizon = needed
    elif horizon < needed:
        raise MdpError(
            f"horizon {horizon} too small for the truncation bound; need >= {needed}")
    for s in model.states:
        if (s, policy.get(s)) not in model.transitions:
            raise MdpError(f"policy action {policy.get(s)!r} unavailable in state {s!r}")

    s_index = {s: i for i, s in enumerate(model.states)}
    n = len(model.states)
    # Per state, under the policy: successor indices, cumulative probabilities,
    # and per-successor rewards.
    successors = []
    cumprobs = []
    step_rewards = []
    for s in model.states:
        a = policy[s]
        row = [(sp, p) for sp, p in model.transitions[(s, a)].items() if p > 0.0]
        successors.append(np.array([s_index[sp] for sp, _ in row]))
        cumprobs.append(np.cumsum([p for _, p in row]))
        step_rewards.append(np.array([model.rewards[(s, a, sp)] for sp, _ in row]))

    rng = np.random.default_rng(seed)
    current = np.full(episodes, s_index[state], dtype=np.int64)
    returns = np.zeros(episodes)
    discount = 1.0
    for _ in range(horizon):
        draws = rng.random(episodes)
        rewards = np.empty(episodes)
        nxt = np.empty(episodes, dtype=np.int64)
        for i in range(n):
            mask = current == i
            if not mask.any():
                continue
            choice = np.searchsorted(cumprobs[i], draws[mask], side="right")
            choice = np.minimum(choice, len(cumprobs[i]) - 1)
            rewards[mask] = step_rewards[i][choice]
            nxt[mask] = successors[i][choice]
        returns += discount * rewards
        current = nxt
        discount *= gamma
    mean = float(returns.mean())
    if episodes > 1:
        se = float(returns.std(ddof=1) / math.sqrt(episodes))
    else:
        se = 0.0
    return McEstimate(state=state, policy=dict(policy), episodes=episodes,
                      horizon=horizon, seed=seed, mean_return=mean, standard_error=se)
