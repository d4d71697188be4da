import numpy as np
import pytest

from lambda_kerr import ModelParams, NonlinearityFn

FAMILIES = {
    "a": dict(chi=0.0, delta2=0.0, delta3=0.0),
    "b": dict(chi=0.4, delta2=0.0, delta3=0.0),
    "c": dict(chi=0.0, delta2=7.0, delta3=15.0),
}
NONLINEARITIES = {
    "constant": NonlinearityFn.constant(),
    "inverse-sqrt": NonlinearityFn.inverse_sqrt(),
}


def family_params(name, lam=1.0):
    v = FAMILIES[name]
    return ModelParams.from_detunings(
        delta2=v["delta2"] * lam, delta3=v["delta3"] * lam, chi=v["chi"] * lam, lambda1=lam
    )


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return request.param


@pytest.fixture(params=sorted(NONLINEARITIES))
def nonlinearity(request):
    return NONLINEARITIES[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
