"""The four-state moving-target-defense decision process.

Builds the MDP over states N (normal), T (targeted), E (exploited),
B (breached) with actions Wait / Defend / Reset from named probabilities,
rewards, and costs. Rewards are cost-adjusted: the baseline reward minus the
damage cost of the source state minus the cost of the chosen action.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .mdp import MdpError, MdpModel, ValueFunction

STATES: tuple[str, ...] = ("N", "T", "E", "B")
ACTIONS: tuple[str, ...] = ("Wait", "Defend", "Reset")

WAIT, DEFEND, RESET = ACTIONS


@dataclass(frozen=True)
class MtdParams:
    """Model parameters; defaults are the baseline operating point used
    throughout the cost-sweep experiments."""

    p_target: float = 0.2    # N -> T under adversary pressure
    p_exploit: float = 0.2   # T -> E
    p_defend: float = 0.6    # Defend succeeds and restores N
    p_breach: float = 0.4    # E -> B
    reward_base: float = 10.0
    reward_defend: float = 5.0
    cost_targeted: float = 0.1
    cost_exploit: float = 3.0
    cost_breach: float = 4.0
    cost_reset: float = 4.0
    cost_defend: float = 4.0
    gamma: float = 0.9
    epsilon: float = 0.001

    def __post_init__(self) -> None:
        problems = self.check()
        if problems:
            raise MdpError("invalid parameters: " + "; ".join(problems))

    def check(self) -> list[str]:
        problems = []
        for name in ("p_target", "p_exploit", "p_defend", "p_breach"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                problems.append(f"{name}={value} outside [0, 1]")
        for name in ("cost_targeted", "cost_exploit", "cost_breach", "cost_reset", "cost_defend"):
            value = getattr(self, name)
            if value < 0.0:
                problems.append(f"{name}={value} is negative")
        if not 0.0 < self.gamma < 1.0:
            problems.append(f"gamma={self.gamma} outside (0, 1)")
        if self.epsilon <= 0.0:
            problems.append(f"epsilon={self.epsilon} not positive")
        return problems

    def replace(self, **changes) -> "MtdParams":
        return dataclasses.replace(self, **changes)


BASELINE = MtdParams()


def build_mtd_model(params: MtdParams) -> MdpModel:
    """Assemble the 4x3 decision process.

    Wait lets the attack chain progress one step (N->T, T->E, E->B, each with
    its named probability, otherwise a self-loop; B is absorbing). Defend
    restores N with probability p_defend and otherwise leaves the Wait
    dynamics in place, except from B: a breached system cannot be recovered
    by the defense action, only by Reset. Reset returns to N from anywhere
    with certainty.
    """
    p = params
    damage = {"N": 0.0, "T": p.cost_targeted, "E": p.cost_exploit, "B": p.cost_breach}
    wait_rows = {
        "N": {"T": p.p_target, "N": 1.0 - p.p_target},
        "T": {"E": p.p_exploit, "T": 1.0 - p.p_exploit},
        "E": {"B": p.p_breach, "E": 1.0 - p.p_breach},
        "B": {"B": 1.0},
    }
    transitions: dict[tuple[str, str], dict[str, float]] = {}
    rewards: dict[tuple[str, str, str], float] = {}

    def put(state: str, action: str, row: dict[str, float], reward: float) -> None:
        pruned = {sp: prob for sp, prob in row.items() if prob > 0.0}
        transitions[(state, action)] = pruned
        for sp in pruned:
            rewards[(state, action, sp)] = reward

    for s in STATES:
        put(s, WAIT, wait_rows[s], p.reward_base - damage[s])
        if s == "B":
            defend_row = {"B": 1.0}
        else:
            defend_row = {"N": p.p_defend}
            for sp, prob in wait_rows[s].items():
                defend_row[sp] = defend_row.get(sp, 0.0) + (1.0 - p.p_defend) * prob
        put(s, DEFEND, defend_row,
            p.reward_base + p.reward_defend - damage[s] - p.cost_defend)
        put(s, RESET, {"N": 1.0}, p.reward_base - p.cost_reset)
    return MdpModel(states=STATES, actions=ACTIONS, transitions=transitions, rewards=rewards)


def exploited_state_backup(params: MtdParams, v: ValueFunction) -> dict[str, float]:
    """The three action values at state E, written out branch by branch.

    This duplicates the generic backup on purpose: it is the hand-expanded
    form used as a transcription-fidelity check against build_mtd_model, and
    the two must agree to within 1e-12 for any value function.
    """
    for s in STATES:
        if s not in v:
            raise MdpError(f"value function missing state {s!r}")
    p = params
    g = p.gamma
    r_wait = p.reward_base - p.cost_exploit
    r_defend = p.reward_base + p.reward_defend - p.cost_exploit - p.cost_defend
    return {
        WAIT: (1.0 - p.p_breach) * (r_wait + g * v["E"])
        + p.p_breach * (r_wait + g * v["B"]),
        DEFEND: p.p_defend * (r_defend + g * v["N"])
        + (1.0 - p.p_defend) * (1.0 - p.p_breach) * (r_defend + g * v["E"])
        + (1.0 - p.p_defend) * p.p_breach * (r_defend + g * v["B"]),
        RESET: (p.reward_base - p.cost_reset) + g * v["N"],
    }
