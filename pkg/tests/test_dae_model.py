import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgdae.benchmarks import PendulumConfig, circuit_exact, make_circuit, make_heat, make_pendulum
from cgdae.dae_model import SemiExplicitDae, check_consistency, continuous_residual, fd_jacobian
from cgdae.errors import EvaluationError


def test_fd_jacobian_linear_map():
    A = np.array([[1.0, -2.0, 0.5], [3.0, 0.0, 4.0]])
    assert np.allclose(fd_jacobian(lambda x: A @ x, np.array([0.3, -1.0, 2.0])), A, rtol=1e-7)


def test_fd_jacobian_square():
    jac = fd_jacobian(lambda x: np.array([x[0] ** 2]), np.array([3.0]))
    assert jac[0, 0] == pytest.approx(6.0, rel=1e-7)


def test_fd_jacobian_constant():
    assert np.array_equal(fd_jacobian(lambda x: np.ones(2), np.zeros(3)), np.zeros((2, 3)))


def test_fd_jacobian_non_finite():
    with pytest.raises(EvaluationError):
        fd_jacobian(lambda x: np.array([1.0 / x[0] if x[0] > 0 else np.nan]), np.array([0.0]))


def test_construction_validation():
    f = lambda x, t: np.zeros(2)
    g = lambda x, t: np.zeros(1)
    gx = lambda x, t: np.zeros((1, 2))
    with pytest.raises(ValueError):
        SemiExplicitDae(n=2, m=1, f=f, g=g, g_x=gx, x0=np.zeros(3), T=1.0)
    with pytest.raises(ValueError):
        SemiExplicitDae(n=2, m=2, f=f, g=g, g_x=gx, x0=np.zeros(2), T=1.0)
    with pytest.raises(ValueError):
        SemiExplicitDae(n=2, m=1, f=f, g=g, g_x=gx, x0=np.zeros(2), T=0.0)
    with pytest.raises(ValueError):
        SemiExplicitDae(n=2, m=1, f=f, g=g, g_x=gx, x0=np.zeros(2), T=1.0, J=np.ones((2, 2)))


def test_mass_defaults_to_identity():
    dae = SemiExplicitDae.ode(3, lambda x, t: -x, np.ones(3), 1.0)
    assert np.array_equal(dae.mass, np.eye(3))
    assert dae.m == 0 and dae.t_span == (0.0, 1.0)


def test_non_finite_callback_reported():
    dae = SemiExplicitDae.ode(1, lambda x, t: np.array([np.inf]), np.ones(1), 1.0)
    with pytest.raises(EvaluationError):
        dae.eval_f(dae.x0, 0.0)


def test_consistency_circuit():
    rep = check_consistency(make_circuit())
    assert rep.consistent and rep.rank_ok and rep.residual_norm == 0.0


def test_inconsistent_circuit():
    rep = check_consistency(make_circuit(x0=(1.0, 0.0)))
    assert rep.residual_norm == pytest.approx(1.0)
    assert not rep.consistent


def test_consistency_heat():
    rep = check_consistency(make_heat())
    assert rep.consistent and rep.rank_ok


def test_rank_deficiency_detected():
    dae = SemiExplicitDae(n=3, m=2, f=lambda x, t: np.zeros(3),
                          g=lambda x, t: np.array([x[0], 2 * x[0]]),
                          g_x=lambda x, t: np.array([[1.0, 0, 0], [2.0, 0, 0]]),
                          x0=np.zeros(3), T=1.0)
    assert not check_consistency(dae).rank_ok


@pytest.mark.parametrize("t", [0.0, 0.3, 0.7, 1.0])
def test_circuit_exact_solution_residual(t):
    dae = make_circuit()
    q1, q2, iv = circuit_exact(t)
    dyn, con = continuous_residual(dae, [q1, q2], _circuit_xdot(t), [iv], t)
    assert np.linalg.norm(dyn) < 1e-10 and np.linalg.norm(con) < 1e-10


def _circuit_xdot(t):
    # analytic derivative of the exact solution
    from cgdae.benchmarks import OMEGA, _CA, _CB
    s, c, e = np.sin(OMEGA * t), np.cos(OMEGA * t), np.exp(-0.5 * t)
    dq2 = _CA * (-OMEGA * s + 0.5 * e) + _CB * OMEGA * c
    return np.array([OMEGA * c - dq2, dq2])


@settings(max_examples=100, deadline=None)
@given(t=st.floats(0.0, 1.0))
def test_circuit_exact_residual_random_times(t):
    dae = make_circuit()
    q1, q2, iv = circuit_exact(t)
    dyn, con = continuous_residual(dae, [q1, q2], _circuit_xdot(t), [iv], t)
    assert np.abs(dyn).max() < 1e-10 and np.abs(con).max() < 1e-10


def test_zero_dynamics_residual():
    dae = SemiExplicitDae.ode(2, lambda x, t: np.zeros(2), np.ones(2), 1.0)
    dyn, con = continuous_residual(dae, np.ones(2), np.zeros(2), np.zeros(0), 0.5)
    assert np.array_equal(dyn, np.zeros(2)) and con.size == 0


def test_pendulum_equilibrium_residual():
    cfg = PendulumConfig(ell=2.0, gamma=3.0, x_init=(2.0, 0.0, 0.0, 0.0))
    dae = make_pendulum(cfg)
    x = np.array([0.0, -cfg.ell, 0.0, 0.0])
    # hanging at rest the rod force balances gravity
    lam = cfg.gamma / (2 * cfg.ell)
    dyn, con = continuous_residual(dae, x, np.zeros(4), [lam], 0.0)
    assert np.abs(dyn).max() < 1e-15 and np.abs(con).max() < 1e-15


def test_continuous_residual_dimension_check():
    dae = make_circuit()
    with pytest.raises(ValueError):
        continuous_residual(dae, np.zeros(3), np.zeros(2), [0.0], 0.0)
    with pytest.raises(ValueError):
        continuous_residual(dae, np.zeros(2), np.zeros(2), [0.0, 1.0], 0.0)


def _random_states(rng, dae, count, positive=False):
    for _ in range(count):
        x = rng.uniform(0.05, 1.0, dae.n) if positive else rng.normal(size=dae.n)
        yield x, float(rng.uniform(0, dae.T))


@pytest.mark.parametrize("make", [make_circuit, make_heat, make_pendulum])
def test_analytic_jacobians_match_fd(make):
    dae = make()
    rng = np.random.default_rng(0)
    for x, t in _random_states(rng, dae, 20, positive=True):
        fx = dae.eval_fx(x, t)
        fd = fd_jacobian(lambda y: dae.eval_f(y, t), x)
        assert np.allclose(fx, fd, rtol=1e-6, atol=1e-6 * np.abs(fx).max())
        gx = dae.eval_gx(x, t)
        fdg = fd_jacobian(lambda y: dae.eval_g(y, t), x)
        assert np.allclose(gx, fdg, rtol=1e-6, atol=1e-6 * max(np.abs(gx).max(), 1.0))


def test_fd_fallback_used_without_fx():
    dae = SemiExplicitDae.ode(2, lambda x, t: np.array([x[0] * x[1], np.sin(x[0])]), np.ones(2), 1.0)
    x = np.array([0.4, -1.2])
    assert np.allclose(dae.eval_fx(x, 0.0), [[x[1], x[0]], [np.cos(x[0]), 0.0]], rtol=1e-7)


def test_gxx_lam_matches_fd_of_transposed_jacobian():
    dae = make_pendulum()
    x, lam = np.array([0.6, -0.8, 0.3, 0.2]), np.array([1.7])
    fd = fd_jacobian(lambda y: dae.eval_gx(y, 0.0).T @ lam, x)
    assert np.allclose(dae.eval_gxx_lam(x, 0.0, lam), fd, atol=1e-7)
