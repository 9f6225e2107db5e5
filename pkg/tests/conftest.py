import os

import numpy as np
import pytest

from poolrate.instance import (
    build_selection_problem,
    identity_algorithm_instance,
    t1_asymmetric_instance,
    t1_iid_instance,
    t1_instance,
)
from poolrate.dispersion import dispersion_at
from poolrate.rd import sweep_lambda

INSTANCE_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "instances")
LAMBDA_GRID = np.concatenate([[0.0], np.logspace(-2, 3, 41)])


@pytest.fixture
def t1():
    return t1_instance()


@pytest.fixture
def t1_any():
    return t1_instance(selection_mode="any-subset")


@pytest.fixture
def t1_asym():
    return t1_asymmetric_instance()


@pytest.fixture
def t1_iid():
    return t1_iid_instance()


@pytest.fixture
def identity_inst():
    return identity_algorithm_instance()


@pytest.fixture(scope="session")
def t1_any_problem():
    return build_selection_problem(t1_instance(selection_mode="any-subset"))


@pytest.fixture(scope="session")
def t1_any_curve(t1_any_problem):
    return sweep_lambda(t1_any_problem, LAMBDA_GRID)


@pytest.fixture(scope="session")
def t1_asym_problem():
    return build_selection_problem(t1_asymmetric_instance())


@pytest.fixture(scope="session")
def t1_asym_curve(t1_asym_problem):
    return sweep_lambda(t1_asym_problem, LAMBDA_GRID)


@pytest.fixture
def t1_path():
    return os.path.join(INSTANCE_DIR, "t1.json")


@pytest.fixture
def t1_asym_path():
    return os.path.join(INSTANCE_DIR, "t1_asymmetric.json")


@pytest.fixture(scope="session")
def t1_asym_dispersion(t1_asym_problem, t1_asym_curve):
    d = 0.5 * (t1_asym_curve.d_min + t1_asym_curve.d_max)
    return dispersion_at(t1_asym_problem, t1_asym_curve, d)
