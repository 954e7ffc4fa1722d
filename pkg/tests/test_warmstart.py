import numpy as np

import oracles
from conftest import make_problem
from ssnpmm import pmm, warmstart
from ssnpmm.config import SolverConfig
from ssnpmm.generators import ControlInstanceSpec, generate, random_l1qp
from ssnpmm.problem import kkt_residuals
from ssnpmm.prox import project_subdiff_g
from ssnpmm.warmstart import (
    admm_w_update,
    admm_xy_update,
    choose_sigma_hat,
    init_state,
    warmstart_run,
)


def test_sigma_hat_diagonal_q():
    assert choose_sigma_hat(np.diag([1.0, 5.0, 2.0])) == 1e-8


def test_sigma_hat_row_sums():
    assert choose_sigma_hat(np.array([[2.0, 1.0], [1.0, 2.0]])) == 1.0 + 1e-8


def test_w_update_identity_when_unconstrained(rng):
    n = 4
    p = make_problem(np.eye(n), np.zeros((0, n)), np.zeros(n), [], np.zeros(n),
                     np.full(n, -np.inf), np.full(n, np.inf))
    x, y2 = rng.standard_normal(n), rng.standard_normal(n)
    np.testing.assert_allclose(admm_w_update(x, y2, 2.0, p), x + y2 / 2.0)


def test_w_update_scalar_example():
    p = make_problem([[1.0]], np.zeros((0, 1)), [0.0], [], [0.5], [-2.0], [1.5])
    assert admm_w_update(np.array([2.0]), np.zeros(1), 1.0, p)[0] == 1.5


def test_w_update_dead_zone():
    p = make_problem([[1.0]], np.zeros((0, 1)), [0.0], [], [1.0], [0.5], [1.5])
    assert admm_w_update(np.array([0.3]), np.zeros(1), 1.0, p)[0] == 0.5


def test_merged_solve_matches_sequential(rng):
    for _ in range(20):
        p = random_l1qp(rng, int(rng.integers(2, 8)), int(rng.integers(1, 3)))
        state = init_state(p)
        state.x = rng.standard_normal(p.n)
        state.y1 = rng.standard_normal(p.m)
        state.y2 = rng.standard_normal(p.n)
        w = admm_w_update(state.x, state.y2, state.sigma, p)
        got = admm_xy_update(state, w, p)
        want = oracles.padmm_sequential(p, state.x, state.y1, state.y2, w, state.sigma,
                                        state.gamma, state.sigma_hat)
        for a, b in zip(got, want):
            np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10)


def test_one_factorization_per_run(rng, monkeypatch):
    calls = []
    real = warmstart.factorize_quasidef

    def counting(M, *args, **kwargs):
        calls.append(M.shape)
        return real(M, *args, **kwargs)

    monkeypatch.setattr(warmstart, "factorize_quasidef", counting)
    p = generate(ControlInstanceSpec("poisson", 6))
    _, _, _, st = warmstart_run(p, tol_ws=1e-12, max_iters=400)
    assert st.iterations == 400
    assert len(calls) == 1 and st.factorizations == 1


def converged_admm_point(p, iters=5000):
    state = init_state(p)
    for _ in range(iters):
        w = admm_w_update(state.x, state.y2, state.sigma, p)
        state.x, state.y1, state.y2 = admm_xy_update(state, w, p)
        state.w = w
    return state


def test_start_at_optimum_stops_immediately(two_var_qp):
    state = converged_admm_point(two_var_qp)
    _, _, _, st = warmstart_run(two_var_qp, tol_ws=1e-3, start=(state.x, state.y1, state.y2))
    assert st.iterations <= 1


def test_recovered_z_is_box_multiplier(rng):
    p = random_l1qp(rng, 10, 3)
    x, y, z, st = warmstart_run(p, tol_ws=1e-9, max_iters=20000)
    assert st.converged
    r = kkt_residuals(p, x, y, z)
    assert max(r) <= 1e-6


def test_subdiff_membership_of_dual_split(rng):
    p = random_l1qp(rng, 10, 3)
    state = converged_admm_point(p, iters=50)
    z = state.y2 - project_subdiff_g(state.y2, state.w, p.d)
    g = state.y2 - z
    zero = state.w == 0.0
    assert np.all(np.abs(g[zero]) <= p.d[zero] + 1e-15)
    np.testing.assert_array_equal(g[~zero], p.d[~zero] * np.sign(state.w[~zero]))


def test_warm_start_saves_outer_iterations(rng):
    warm = cold = 0
    for _ in range(30):
        p = random_l1qp(rng, 8, 3)
        w = pmm.solve(p, SolverConfig(tol=1e-8))
        assert w.report.warmstart_iters > 0
        warm += w.report.pmm_iters
        cold += pmm.solve(p, SolverConfig(tol=1e-8, warmstart=False)).report.pmm_iters
    assert warm < cold
