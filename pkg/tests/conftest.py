import math

import pytest

from fanolab import lattice
from fanolab.model import ModelParams

FIG4 = ModelParams(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.15)
FIG5 = ModelParams(kappa0=1.0, kappaa=0.2, n0=12, omega_a=0.0)
M4 = ModelParams(kappa0=1.0, kappaa=0.2, n0=12, omega_a=-2.0 * math.cos(4 * math.pi / 12))


@pytest.fixture(scope="session")
def fig4():
    return FIG4


@pytest.fixture(scope="session")
def fig5():
    return FIG5


@pytest.fixture(scope="session")
def fig4_trace():
    return lattice.integrate(FIG4, lattice.default_config(FIG4, 200.0))


@pytest.fixture(scope="session")
def fig5_trace():
    return lattice.integrate(FIG5, lattice.default_config(FIG5, 200.0))


@pytest.fixture(scope="session")
def fig5_short_trace():
    """The fig5 parameters on a 200-site chain: escaped flux reaches the absorber (sites >= 150) by t ~ 70."""
    cfg = lattice.SimConfig(N=200, t_max=200.0, absorber=lattice.Absorber(start=150, strength=1.0, power=3))
    return lattice.integrate(FIG5, cfg)


@pytest.fixture(scope="session")
def m4_trace():
    return lattice.integrate(M4, lattice.default_config(M4, 200.0))


_ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """``record(n, passed, detail)`` stores one acceptance line and echoes it."""

    def _record(number: int, passed: bool, detail: str) -> bool:
        passed = bool(passed)
        _ACCEPTANCE[number] = (passed, detail)
        print(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        passed, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
