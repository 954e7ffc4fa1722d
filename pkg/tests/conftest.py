import numpy as np
import pytest
import scipy.sparse as sp

from ssnpmm.generators import random_l1qp
from ssnpmm.problem import Problem
from ssnpmm.ssn import build_active_sets, natural_map
from ssnpmm.subproblem import PenaltyState, PmmState


def make_problem(Q, A, c, b, d, l, u, name="toy"):
    Q = sp.csr_matrix(np.atleast_2d(np.asarray(Q, dtype=float)))
    n = Q.shape[0]
    A = np.asarray(A, dtype=float).reshape(-1, n)
    return Problem(Q, sp.csr_matrix(A), c, b, d, l, u, name=name)


def random_state(rng, p, beta=1e2, rho=5e2, zeta=1.0, scale=1.0):
    pen = PenaltyState(beta=beta, rho=rho, zeta=zeta)
    return PmmState(
        0,
        scale * rng.standard_normal(p.n),
        scale * rng.standard_normal(p.m),
        scale * rng.standard_normal(p.n),
        pen,
    )


def sets_at(x, y, s, p):
    _, u = natural_map(x, y, s, p)
    return build_active_sets(x, s.z_k, u, s, p)


def kink_free_point(rng, p, s, h=1e-4):
    """Random point and unit direction along which no selection changes up to step ``h``."""
    for _ in range(1000):
        x, y = rng.standard_normal(p.n), rng.standard_normal(p.m)
        d = rng.standard_normal(p.n + p.m)
        d /= np.linalg.norm(d)
        a = sets_at(x, y, s, p)
        b = sets_at(x + h * d[: p.n], y + h * d[p.n :], s, p)
        if np.array_equal(a.b_mask, b.b_mask) and np.array_equal(a.bhat_mask, b.bhat_mask):
            return x, y, d
    raise RuntimeError("no kink-free point found")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def scalar_qp():
    """min 1/2 x^2 - x, unconstrained; optimum x = 1."""
    return make_problem([[1.0]], np.zeros((0, 1)), [-1.0], [], [0.0], [-np.inf], [np.inf])


@pytest.fixture
def two_var_qp():
    """min x1 + 1/2||x||^2 + |x1| s.t. x1 + x2 = 1, box [-10, 10]^2."""
    return make_problem(
        np.eye(2), [[1.0, 1.0]], [1.0, 0.0], [1.0], [1.0, 0.0], [-10.0, -10.0], [10.0, 10.0]
    )


@pytest.fixture
def small_random(rng):
    return random_l1qp(rng, 8, 3)
