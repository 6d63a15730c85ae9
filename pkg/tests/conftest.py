import math

import pytest

from kerr_twin.dynamics import CoherentProduct
from kerr_twin.fock import ModelParams

LAMBDA_FIG = 4.0


def fig3_params(R: float) -> ModelParams:
    """omega0 = 1, lambda = 0.2, g = 0.1 held fixed; hbar = R * Lambda."""
    return ModelParams(omega0=1.0, lam=0.2, g=0.1, hbar=R * LAMBDA_FIG)


def fig1_params() -> ModelParams:
    # omega0 / omega_g = 20, lambda / omega_g = 2, hbar = 1
    return ModelParams(omega0=20.0, lam=2.0, g=1.0, hbar=1.0)


@pytest.fixture
def qp1():
    """q = p = 1 in both modes (Lambda = 4)."""
    return CoherentProduct.from_quadratures(1.0, 1.0, 1.0, 1.0)


@pytest.fixture
def fig5():
    return fig3_params(0.025)


@pytest.fixture
def T1_fig5(fig5):
    return math.pi / fig5.omega_g


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
