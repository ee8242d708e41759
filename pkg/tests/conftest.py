import numpy as np
import pytest

from releq.lie import build_algebra
from releq.solver import multistart, solve_re
from releq.systems import rigid_body, rigid_body_rotors, torus_system

ALGEBRAS = ["so(3)", "su(3)", "so(4)", "so(3)+torus(3)"]


@pytest.fixture(scope="session", params=ALGEBRAS)
def algebra(request):
    return build_algebra(request.param)


@pytest.fixture(scope="session")
def so3():
    return build_algebra("so(3)")


@pytest.fixture(scope="session")
def body():
    return rigid_body((1.0, 2.0, 3.0))


@pytest.fixture(scope="session")
def rotors():
    return rigid_body_rotors()


@pytest.fixture(scope="session")
def torus():
    return torus_system()


@pytest.fixture(scope="session")
def axis_res(body):
    """One RE per principal axis, solved from nearby guesses."""
    out = []
    for i in range(3):
        mu = np.full(3, 0.05)
        mu[i] = 1.0
        out.append(solve_re(body, body.point(mu), body.Minv @ mu))
    return out


@pytest.fixture(scope="session")
def body_origin(body):
    return solve_re(body, body.point(np.zeros(3)), np.zeros(3))


@pytest.fixture(scope="session")
def rotor_origin(rotors):
    return solve_re(rotors, rotors.point(np.zeros(6)), np.zeros(6))


@pytest.fixture(scope="session")
def rotor_generic(rotors):
    found, _ = multistart(rotors, 3, seed=5)
    return found


ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
