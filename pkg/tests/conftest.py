import pytest

from mtdpolicy import BASELINE, build_mtd_model, value_iteration


@pytest.fixture(scope="session")
def baseline_model():
    return build_mtd_model(BASELINE)


@pytest.fixture(scope="session")
def baseline_report(baseline_model):
    return value_iteration(baseline_model, BASELINE.gamma, BASELINE.epsilon)
