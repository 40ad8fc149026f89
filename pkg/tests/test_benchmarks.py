import numpy as np
import pytest

from cgdae.benchmarks import (PENDULUM_J, HeatConfig, PendulumConfig, make_circuit, make_heat,
                              make_pendulum, neumann_stiffness, pendulum_energy)
from cgdae.dae_model import fd_jacobian
from cgdae.errors import EvaluationError


def test_circuit_shape_and_flags():
    dae = make_circuit()
    assert (dae.n, dae.m, dae.T) == (2, 1, 1.0)
    assert dae.f_linear and dae.g_linear
    assert np.allclose(dae.x_ref(0.0), 0.0, atol=1e-15)
    assert make_circuit(T=0.2).T == 0.2


def test_circuit_reference_only_for_zero_start():
    assert make_circuit(x0=(1.0, 0.0)).x_ref is None


def test_heat_dimensions():
    cfg = HeatConfig()
    dae = make_heat(cfg)
    assert cfg.nodes_per_side == 41 and dae.n == 82 and dae.m == 3
    assert dae.f_linear and dae.g_linear
    assert not make_heat(HeatConfig(c1=3)).g_linear


def test_heat_config_validation():
    with pytest.raises(ValueError):
        HeatConfig(c1=0.5)
    with pytest.raises(ValueError):
        HeatConfig(h=0.3)


def test_heat_initial_profile_consistent():
    dae = make_heat()
    u0 = dae.x0
    assert u0[0] == 1.0 and u0[40] == 0.0 and u0[41] == 0.0
    assert np.abs(dae.eval_g(u0, 0.0)).max() == 0.0


def test_neumann_stiffness_rows():
    K = neumann_stiffness(5, 0.5)
    assert np.allclose(K.sum(axis=1), 0.0)
    assert np.allclose(K * 0.25, K.T * 0.25)
    assert K[0, 0] == K[-1, -1] == 4.0 and K[2, 2] == 8.0


def test_heat_linear_rhs_matches_matrix():
    dae = make_heat()
    K = neumann_stiffness(41, 1 / 40)
    u = np.random.default_rng(1).uniform(size=82)
    assert np.allclose(dae.eval_f(u, 0.0), -np.concatenate([K @ u[:41], K @ u[41:]]))


def test_heat_transmission_constraints():
    dae = make_heat(HeatConfig(c1=3, c2=1))
    u = np.linspace(1, 0, 82)
    g = dae.eval_g(u, 0.0)
    a, b, p, q = 39, 40, 41, 42
    assert g[0] == pytest.approx(u[0] - 1)
    assert g[1] == pytest.approx((u[b] ** 3 - u[a] ** 3) * 40 + 10 * (u[b] - u[p]))
    assert g[2] == pytest.approx((u[p] - u[q]) * 40 + 10 * (u[p] - u[b]))


def test_heat_jacobians_at_random_positive_states():
    dae = make_heat(HeatConfig(c1=3, c2=2))
    rng = np.random.default_rng(7)
    for _ in range(10):
        u = rng.uniform(0.1, 1.0, dae.n)
        for exact, fun in ((dae.eval_fx(u, 0.0), lambda y: dae.eval_f(y, 0.0)),
                           (dae.eval_gx(u, 0.0), lambda y: dae.eval_g(y, 0.0))):
            fd = fd_jacobian(fun, u)
            assert np.abs(exact - fd).max() <= 1e-6 * np.abs(exact).max()
        lam = rng.normal(size=3)
        fd = fd_jacobian(lambda y: dae.eval_gx(y, 0.0).T @ lam, u)
        assert np.abs(dae.eval_gxx_lam(u, 0.0, lam) - fd).max() <= 1e-6 * max(np.abs(fd).max(), 1.0)


def test_fractional_exponent_rejects_negative_state():
    dae = make_heat(HeatConfig(c1=1.5))
    u = dae.x0.copy()
    u[5] = -0.1
    with pytest.raises(EvaluationError):
        dae.eval_f(u, 0.0)


def test_pendulum_structure():
    dae = make_pendulum()
    assert np.allclose(PENDULUM_J, -PENDULUM_J.T)
    x0 = dae.x0
    assert dae.eval_g(x0, 0.0)[0] == 0.0
    assert np.array_equal(dae.eval_gx(x0, 0.0), [[2.0, 0.0, 0.0, 0.0]])
    assert np.linalg.matrix_rank(dae.eval_gx(x0, 0.0)) == 1
    assert pendulum_energy(x0) == 0.0
    x = np.array([0.3, 0.4, 1.5, -2.0])
    assert np.allclose(dae.eval_f(x, 0.0), [0.0, -1.0, -1.5, 2.0])


def test_pendulum_energy_kinetic():
    assert pendulum_energy(np.array([0, 0, 1.0, 0]), PendulumConfig(gamma=7.0, x_init=(1, 0, 0, 0))) == 0.5


def test_pendulum_config_validation():
    with pytest.raises(ValueError):
        PendulumConfig(x_init=(0.5, 0.0, 0.0, 0.0))
    with pytest.raises(ValueError):
        PendulumConfig(x_init=(1.0, 0.0, 1.0, 0.0))
    PendulumConfig(x_init=(1.0, 0.0, 0.0, 2.0))
