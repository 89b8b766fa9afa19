import numpy as np
import pytest

from kfsecgame import (
    AllocationRule,
    build_dwna_example,
    build_payoff_matrix,
    enumerate_subsets,
)


@pytest.fixture(scope="session")
def dwna():
    return build_dwna_example()


@pytest.fixture(scope="session")
def subsets3():
    return enumerate_subsets(3)


@pytest.fixture(scope="session")
def payoff_independent(dwna):
    model, suite = dwna
    return build_payoff_matrix(model, suite, 100.0, AllocationRule.INDEPENDENT, 100)


@pytest.fixture(scope="session")
def payoff_table2(dwna):
    model, suite = dwna
    return build_payoff_matrix(model, suite, 100.0, AllocationRule.DEPENDENT_TABLE2, 100)


@pytest.fixture(scope="session")
def payoff_prop3(dwna):
    model, suite = dwna
    return build_payoff_matrix(model, suite, 100.0, AllocationRule.DEPENDENT_PROP3, 100)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
