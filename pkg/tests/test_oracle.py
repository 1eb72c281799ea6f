import math

import numpy as np
import pytest

from mtdpolicy import (
    BASELINE,
    MdpError,
    MdpModel,
    build_mtd_model,
    enumerate_policies,
    monte_carlo_eval,
    policy_evaluation,
    required_horizon,
    value_iteration,
)
from mtdpolicy.oracle import ENUMERATION_LIMIT


def chain(reward=5.0):
    return MdpModel(
        states=("s",),
        actions=("a",),
        transitions={("s", "a"): {"s": 1.0}},
        rewards={("s", "a", "s"): reward},
    )


class TestEnumeration:
    def test_single_policy_model(self):
        enum = enumerate_policies(chain(), 0.9)
        assert len(enum.table) == 1
        assert enum.simultaneously_optimal
        assert enum.best_policy == {"s": "a"}
        assert enum.envelope["s"] == pytest.approx(50.0, abs=1e-9)

    def test_baseline_model_has_81_policies(self, baseline_model):
        enum = enumerate_policies(baseline_model, BASELINE.gamma)
        assert len(enum.table) == 81

    def test_envelope_matches_value_iteration(self, baseline_model, baseline_report):
        enum = enumerate_policies(baseline_model, BASELINE.gamma)
        assert enum.simultaneously_optimal
        for s in ("N", "T", "E", "B"):
            # epsilon-accuracy bound for value iteration at gamma = 0.9
            assert abs(enum.envelope[s] - baseline_report.value[s]) <= 0.9 * 0.001 / 0.1
        assert enum.best_policy == baseline_report.policy

    def test_tied_actions_all_listed(self):
        model = MdpModel(
            states=("s",),
            actions=("a1", "a2"),
            transitions={("s", "a1"): {"s": 1.0}, ("s", "a2"): {"s": 1.0}},
            rewards={("s", "a1", "s"): 2.0, ("s", "a2", "s"): 2.0},
        )
        enum = enumerate_policies(model, 0.9)
        assert len(enum.ties) == 2
        assert enum.best_policy == {"s": "a1"}

    def test_enumeration_guard(self):
        n_states = 9
        states = tuple(f"s{i}" for i in range(n_states))
        actions = tuple(f"a{j}" for j in range(3))
        transitions = {(s, a): {s: 1.0} for s in states for a in actions}
        rewards = {(s, a, s): 0.0 for s in states for a in actions}
        model = MdpModel(states=states, actions=actions,
                         transitions=transitions, rewards=rewards)
        assert 3**n_states > ENUMERATION_LIMIT
        with pytest.raises(MdpError, match="enumeration guard"):
            enumerate_policies(model, 0.9)

    def test_table_entries_exact(self, baseline_model):
        enum = enumerate_policies(baseline_model, BASELINE.gamma)
        rng = np.random.default_rng(1)
        for idx in rng.integers(0, len(enum.table), size=5):
            policy, v = enum.table[int(idx)]
            direct = policy_evaluation(baseline_model, policy, BASELINE.gamma)
            for s in v:
                assert v[s] == pytest.approx(direct[s], abs=1e-12)


class TestRequiredHorizon:
    def test_analytic_bound(self):
        model = chain(reward=5.0)
        h = required_horizon(model, 0.9, bias_bound=0.01)
        # gamma^h * r_max / (1 - gamma) must be below the bound, and the
        # horizon must be minimal for that property.
        assert 0.9**h * 5.0 / 0.1 < 0.01
        assert 0.9 ** (h - 1) * 5.0 / 0.1 >= 0.01

    def test_zero_reward_model(self):
        assert required_horizon(chain(reward=0.0), 0.9) == 1

    def test_baseline_horizon(self, baseline_model):
        h = required_horizon(baseline_model, 0.9)
        assert 0.9**h * 11.0 / 0.1 < 0.01


class TestMonteCarlo:
    def test_deterministic_chain_zero_variance(self):
        model = chain(reward=5.0)
        est = monte_carlo_eval(model, {"s": "a"}, 0.9, "s", episodes=50, seed=7)
        expected = 5.0 * (1.0 - 0.9**est.horizon) / 0.1
        assert est.mean_return == pytest.approx(expected, abs=1e-9)
        assert est.standard_error <= 1e-12

    def test_same_seed_bit_identical(self, baseline_model, baseline_report):
        kwargs = dict(gamma=0.9, state="E", episodes=2000, seed=123)
        a = monte_carlo_eval(baseline_model, baseline_report.policy, **kwargs)
        b = monte_carlo_eval(baseline_model, baseline_report.policy, **kwargs)
        assert a.mean_return == b.mean_return
        assert a.standard_error == b.standard_error

    def test_different_seeds_differ(self, baseline_model, baseline_report):
        a = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                             episodes=2000, seed=1)
        b = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                             episodes=2000, seed=2)
        assert a.mean_return != b.mean_return

    def test_matches_exact_policy_value(self, baseline_model, baseline_report):
        exact = policy_evaluation(baseline_model, baseline_report.policy, 0.9)
        est = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                               episodes=100_000, seed=0)
        # three standard errors plus the truncation bias allowance
        assert abs(est.mean_return - exact["E"]) <= 3.0 * est.standard_error + 0.01

    def test_stderr_scales_with_sample_size(self, baseline_model, baseline_report):
        small = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                                 episodes=1000, seed=4)
        large = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                                 episodes=10_000, seed=4)
        ratio = small.standard_error / large.standard_error
        assert ratio == pytest.approx(math.sqrt(10.0), rel=0.2)

    def test_horizon_too_small_rejected(self, baseline_model, baseline_report):
        with pytest.raises(MdpError, match="horizon"):
            monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                             episodes=10, horizon=5)

    def test_bad_episode_count_rejected(self, baseline_model, baseline_report):
        with pytest.raises(MdpError, match="episodes"):
            monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                             episodes=0)

    def test_unknown_start_state_rejected(self, baseline_model, baseline_report):
        with pytest.raises(MdpError, match="unknown state"):
            monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "X",
                             episodes=10)

    def test_incomplete_policy_rejected(self, baseline_model):
        with pytest.raises(MdpError, match="unavailable"):
            monte_carlo_eval(baseline_model, {"N": "Wait"}, 0.9, "N", episodes=10)

    def test_single_episode_has_zero_stderr(self, baseline_model, baseline_report):
        est = monte_carlo_eval(baseline_model, baseline_report.policy, 0.9, "E",
                               episodes=1, seed=0)
        assert est.standard_error == 0.0


class TestCrossValidation:
    def test_three_routes_agree_on_random_parameters(self):
        from mtdpolicy import MtdParams

        rng = np.random.default_rng(31)
        for _ in range(3):
            params = MtdParams(
                p_target=rng.uniform(0.1, 0.9),
                p_exploit=rng.uniform(0.1, 0.9),
                p_defend=rng.uniform(0.1, 0.9),
                p_breach=rng.uniform(0.1, 0.9),
                cost_defend=rng.uniform(0.0, 10.0),
                cost_reset=rng.uniform(0.0, 10.0),
            )
            model = build_mtd_model(params)
            report = value_iteration(model, params.gamma, 1e-9)
            enum = enumerate_policies(model, params.gamma)
            for s in ("N", "T", "E", "B"):
                assert abs(report.value[s] - enum.envelope[s]) <= 1e-6
            est = monte_carlo_eval(model, report.policy, params.gamma, "N",
                                   episodes=40_000, seed=11)
            assert abs(est.mean_return - report.value["N"]) \
                <= 3.0 * est.standard_error + 0.011
