import itertools

import numpy as np
import pytest

from mtdpolicy import (
    ACTIONS,
    STATES,
    MdpError,
    MtdParams,
    bellman_backup,
    build_mtd_model,
    exploited_state_backup,
    validate,
    value_iteration,
)

ZERO_V = {s: 0.0 for s in STATES}


class TestParams:
    def test_baseline_defaults(self):
        p = MtdParams()
        assert (p.p_target, p.p_exploit, p.p_defend, p.p_breach) == (0.2, 0.2, 0.6, 0.4)
        assert (p.reward_base, p.reward_defend) == (10.0, 5.0)
        assert (p.cost_targeted, p.cost_exploit, p.cost_breach, p.cost_reset, p.cost_defend) \
            == (0.1, 3.0, 4.0, 4.0, 4.0)
        assert (p.gamma, p.epsilon) == (0.9, 0.001)

    @pytest.mark.parametrize("bad", [
        {"p_target": -0.1},
        {"p_breach": 1.2},
        {"gamma": 0.0},
        {"gamma": 1.0},
        {"epsilon": 0.0},
        {"cost_reset": -1.0},
    ])
    def test_bounds_enforced(self, bad):
        with pytest.raises(MdpError, match="invalid parameters"):
            MtdParams(**bad)

    def test_error_lists_every_violation(self):
        with pytest.raises(MdpError) as err:
            MtdParams(gamma=2.0, p_defend=-1.0)
        assert "gamma" in str(err.value) and "p_defend" in str(err.value)


class TestKernel:
    def test_wait_row_at_exploited(self, baseline_model):
        assert baseline_model.transitions[("E", "Wait")] == {"E": 0.6, "B": 0.4}
        assert baseline_model.rewards[("E", "Wait", "E")] == 7.0
        assert baseline_model.rewards[("E", "Wait", "B")] == 7.0

    def test_wait_rows_follow_attack_chain(self, baseline_model):
        t = baseline_model.transitions
        assert t[("N", "Wait")] == {"T": 0.2, "N": 0.8}
        assert t[("T", "Wait")] == {"E": 0.2, "T": 0.8}
        assert t[("B", "Wait")] == {"B": 1.0}

    def test_wait_rewards_charge_source_state_damage(self, baseline_model):
        r = baseline_model.rewards
        assert r[("N", "Wait", "N")] == 10.0
        assert r[("T", "Wait", "T")] == pytest.approx(9.9)
        assert r[("B", "Wait", "B")] == 6.0

    def test_reset_row_uniform(self, baseline_model):
        for s in STATES:
            assert baseline_model.transitions[(s, "Reset")] == {"N": 1.0}
            assert baseline_model.rewards[(s, "Reset", "N")] == 6.0

    def test_defend_row_at_exploited(self, baseline_model):
        row = baseline_model.transitions[("E", "Defend")]
        assert row["N"] == pytest.approx(0.6)
        assert row["E"] == pytest.approx(0.4 * 0.6)
        assert row["B"] == pytest.approx(0.4 * 0.4)
        assert baseline_model.rewards[("E", "Defend", "N")] == pytest.approx(10 + 5 - 3 - 4)

    def test_defend_cannot_recover_breach(self, baseline_model):
        # Reset is the only way out of B; the defense action self-loops there.
        assert baseline_model.transitions[("B", "Defend")] == {"B": 1.0}
        assert baseline_model.rewards[("B", "Defend", "B")] == pytest.approx(10 + 5 - 4 - 4)

    def test_perfect_defense_collapses_failure_branch(self):
        model = build_mtd_model(MtdParams(p_defend=1.0))
        assert model.transitions[("E", "Defend")] == {"N": 1.0}
        assert model.transitions[("T", "Defend")] == {"N": 1.0}

    def test_no_breach_possible(self):
        model = build_mtd_model(MtdParams(p_breach=0.0))
        assert model.transitions[("E", "Wait")] == {"E": 1.0}

    def test_failed_defense_mirrors_wait_dynamics(self):
        model = build_mtd_model(MtdParams(p_defend=0.0))
        for s in STATES:
            assert model.transitions[(s, "Defend")] == model.transitions[(s, "Wait")]
            for sp in model.transitions[(s, "Defend")]:
                gap = model.rewards[(s, "Defend", sp)] - model.rewards[(s, "Wait", sp)]
                assert gap == pytest.approx(5.0 - 4.0)  # reward_defend - cost_defend

    def test_all_probability_corners_validate(self):
        for pt, pe, pd, pb in itertools.product((0.0, 0.5, 1.0), repeat=4):
            params = MtdParams(p_target=pt, p_exploit=pe, p_defend=pd, p_breach=pb)
            assert validate(build_mtd_model(params)) == []

    def test_baseline_model_validates(self, baseline_model):
        assert validate(baseline_model) == []


class TestExploitedStateBackup:
    def test_zero_value_function(self):
        backups = exploited_state_backup(MtdParams(), ZERO_V)
        assert backups["Wait"] == pytest.approx(7.0)
        assert backups["Defend"] == pytest.approx(12.0 - 4.0)
        assert backups["Reset"] == pytest.approx(6.0)

    def test_defend_branch_tracks_cost(self):
        for cost in (0.0, 2.5, 7.25):
            backups = exploited_state_backup(MtdParams(cost_defend=cost), ZERO_V)
            assert backups["Defend"] == pytest.approx(12.0 - cost)

    def test_reset_single_successor(self):
        v = dict(ZERO_V, N=100.0)
        backups = exploited_state_backup(MtdParams(), v)
        assert backups["Reset"] == pytest.approx(6.0 + 0.9 * 100.0)

    def test_agrees_with_generic_backup(self, baseline_model):
        rng = np.random.default_rng(17)
        for _ in range(100):
            v = {s: float(rng.uniform(-100, 100)) for s in STATES}
            expanded = exploited_state_backup(MtdParams(), v)
            generic = bellman_backup(baseline_model, v, 0.9, "E")
            for a in ACTIONS:
                assert abs(expanded[a] - generic[a]) <= 1e-12

    def test_agreement_across_random_parameters(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            params = MtdParams(
                p_target=rng.uniform(0.05, 0.95),
                p_exploit=rng.uniform(0.05, 0.95),
                p_defend=rng.uniform(0.05, 0.95),
                p_breach=rng.uniform(0.05, 0.95),
                cost_targeted=rng.uniform(0, 15),
                cost_exploit=rng.uniform(0, 15),
                cost_breach=rng.uniform(0, 15),
                cost_reset=rng.uniform(0, 15),
                cost_defend=rng.uniform(0, 15),
            )
            model = build_mtd_model(params)
            v = {s: float(rng.uniform(-100, 100)) for s in STATES}
            expanded = exploited_state_backup(params, v)
            generic = bellman_backup(model, v, 0.9, "E")
            for a in ACTIONS:
                assert abs(expanded[a] - generic[a]) <= 1e-12


class TestCostMonotonicity:
    @pytest.mark.parametrize("cost_name", [
        "cost_targeted", "cost_exploit", "cost_breach", "cost_reset", "cost_defend",
    ])
    def test_raising_any_cost_never_raises_values(self, cost_name):
        previous = None
        for cost in np.linspace(0.0, 12.0, 5):
            params = MtdParams(**{cost_name: float(cost)})
            report = value_iteration(build_mtd_model(params), 0.9, 1e-6)
            if previous is not None:
                for s in STATES:
                    assert report.value[s] <= previous[s] + 1e-6
            previous = report.value
