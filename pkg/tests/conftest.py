import numpy as np
import pytest

import ksplit

SEED = 20240817


@pytest.fixture(scope="session", autouse=True)
def _kernel_warm():
    """Pay JIT compilation once, outside any timed test region."""
    for make in (ksplit.make_model1, lambda: ksplit.make_ablowitz_ladik(4),
                 ksplit.make_gyrocenter):
        model = make()
        spec = ksplit.make_extension(model)
        for method in ("ksym1", "ksym2", "ksym4", "rk3", "rk5"):
            ksplit.integrate_method(model, spec, method, model.default_initial,
                                    0.01, 0.02, record_every=1)
        flows = ksplit.build_subflows(model, spec)
        ext = ksplit.extend(model.default_initial, spec.m)
        ksplit.subflow_oracle_check(flows[0], ext, 0.001, substeps=100)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture(scope="session")
def model1():
    return ksplit.make_model1()


@pytest.fixture(scope="session")
def al4():
    return ksplit.make_ablowitz_ladik(4)


@pytest.fixture(scope="session")
def gyro():
    return ksplit.make_gyrocenter()


@pytest.fixture(scope="session")
def all_models(model1, al4, gyro):
    return (model1, al4, gyro)
