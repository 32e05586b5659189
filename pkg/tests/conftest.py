import numpy as np
import pytest
from scipy.integrate import solve_ivp

from relaxprc import build_orbit, find_limit_cycle, fitzhugh_nagumo, fold_points


def cubic_roots(z, current=1.0, u_bar=0.0):
    """Real roots of x - x^3/3 + I + u = z, ascending. Independent oracle."""
    r = np.roots([-1.0 / 3.0, 0.0, 1.0, current + u_bar - z])
    return np.sort(r[np.abs(r.imag) < 1e-9].real)


def reduced_travel_time(z0, z1, branch_index, u_bar=0.0):
    """Slow time to slide from z0 to z1 along an outer FHN branch, by
    integrating the reduced ODE z' = g(b(z), z) with b taken from numpy.roots.
    branch_index 0 is the lower branch, anything else the upper one."""
    def rhs(t, y):
        # near a fold the double root picks up a tiny imaginary part, so
        # select the outer branch by real part without filtering
        r = np.roots([-1.0 / 3.0, 0.0, 1.0, 1.0 + u_bar - y[0]]).real
        x = r.min() if branch_index == 0 else r.max()
        return [x + 0.7 - 0.8 * y[0]]

    def hit(t, y):
        return y[0] - z1
    hit.terminal = True
    sol = solve_ivp(rhs, (0, 50), [z0], events=hit, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.t_events[0][0]


# lines recorded by the acceptance suite, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fhn():
    return fitzhugh_nagumo()


@pytest.fixture(scope="session")
def geom(fhn):
    return fold_points(fhn)


@pytest.fixture(scope="session")
def orbit(geom):
    return build_orbit(geom)


@pytest.fixture(scope="session")
def cycle_01(fhn):
    return find_limit_cycle(fhn.with_epsilon(0.1))


@pytest.fixture(scope="session")
def cycle_005(fhn):
    return find_limit_cycle(fhn.with_epsilon(0.05))
