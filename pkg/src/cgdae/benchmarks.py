"""Ready-made test problems: a linear circuit, coupled quasilinear heat
conduction with a thermal resistance, and the planar pendulum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dae_model import SemiExplicitDae
from .errors import EvaluationError

OMEGA = 100.0


# -- circuit ---------------------------------------------------------------

def _circuit_coefficients():
    # particular solution A cos(wt) + B sin(wt) of q2' = -q2/2 + (w/2) cos(wt)
    mat = np.array([[0.5, OMEGA], [-OMEGA, 0.5]])
    return np.linalg.solve(mat, [0.5 * OMEGA, 0.0])


_CA, _CB = _circuit_coefficients()


def circuit_exact(t):
    """Exact ``(q1, q2, i_V)`` of the reduced circuit with ``q(0) = 0``."""
    s, c, e = np.sin(OMEGA * t), np.cos(OMEGA * t), np.exp(-0.5 * t)
    q2 = _CA * (c - e) + _CB * s
    dq2 = _CA * (-OMEGA * s + 0.5 * e) + _CB * OMEGA * c
    q1 = s - q2
    iv = -dq2 - q2 - s
    return q1, q2, iv


def make_circuit(x0=(0.0, 0.0), T: float = 1.0) -> SemiExplicitDae:
    """Circuit after eliminating trivial variables; ``i_V`` is the multiplier.

    ``x0`` other than zeros gives an inconsistent or at least different
    problem; the attached reference solution belongs to ``x0 = 0`` only.
    """
    def f(q, t):
        s = np.sin(OMEGA * t)
        return np.array([-s, -q[1] - s])

    def f_x(q, t):
        return np.array([[0.0, 0.0], [0.0, -1.0]])

    def g(q, t):
        return np.array([q[0] + q[1] - np.sin(OMEGA * t)])

    def g_x(q, t):
        return np.array([[1.0, 1.0]])

    zero_start = tuple(x0) == (0.0, 0.0)
    return SemiExplicitDae(
        n=2, m=1, f=f, g=g, g_x=g_x, f_x=f_x, x0=np.array(x0, dtype=float), T=T,
        x_ref=(lambda t: np.array(circuit_exact(t)[:2])) if zero_start else None,
        lam_ref=(lambda t: np.array([circuit_exact(t)[2]])) if zero_start else None,
        f_linear=True, g_linear=True, name="circuit",
    )


# -- quasilinear heat --------------------------------------------------------

@dataclass(frozen=True)
class HeatConfig:
    c1: float = 1.0
    c2: float = 1.0
    h: float = 1.0 / 40.0
    alpha: float = 10.0
    T: float = 0.5

    def __post_init__(self):
        if self.c1 < 1 or self.c2 < 1:
            raise ValueError("exponents must be at least 1")
        cells = round(1.0 / self.h)
        if abs(cells * self.h - 1.0) > 1e-12:
            raise ValueError("1/h must be an integer")

    @property
    def nodes_per_side(self) -> int:
        return round(1.0 / self.h) + 1

    @property
    def n(self) -> int:
        return 2 * self.nodes_per_side


def neumann_stiffness(k, h):
    """Finite-difference Laplacian with natural boundary rows, scaled by ``1/h^2``."""
    K = 2.0 * np.eye(k) - np.eye(k, k=1) - np.eye(k, k=-1)
    K[0, 0] = K[-1, -1] = 1.0
    return K / h**2


def _power(u, c):
    if float(c).is_integer():
        return u ** int(c), int(c) * u ** (int(c) - 1)
    if np.any(u < 0):
        raise EvaluationError(f"negative state under fractional exponent {c}")
    return u**c, c * u ** (c - 1)


def make_heat(cfg: HeatConfig = HeatConfig()) -> SemiExplicitDae:
    """Two 1D quasilinear heat equations on (0,1) and (1,2) coupled at z = 1.

    The first half of the state holds the nodes of the left subdomain
    ``z = 0, h, .., 1`` and the second half those of the right one
    ``z = 1, .., 2``. Constraints: Dirichlet value 1 at ``z = 0`` and one
    transmission condition on each side of the interface.
    """
    k = cfg.nodes_per_side
    n = 2 * k
    h, alpha, c1, c2 = cfg.h, cfg.alpha, cfg.c1, cfg.c2
    K = neumann_stiffness(k, h)
    a, b = k - 2, k - 1          # u_-(1-h), u_-(1)
    p, q = k, k + 1              # u_+(1), u_+(1+h)

    def f(u, t):
        left, _ = _power(u[:k], c1)
        right, _ = _power(u[k:], c2)
        return -np.concatenate([K @ left, K @ right])

    def f_x(u, t):
        _, dl = _power(u[:k], c1)
        _, dr = _power(u[k:], c2)
        jac = np.zeros((n, n))
        jac[:k, :k] = -K * dl[None, :]
        jac[k:, k:] = -K * dr[None, :]
        return jac

    def g(u, t):
        pa, _ = _power(u[[a, b]], c1)
        pp, _ = _power(u[[p, q]], c2)
        return np.array([
            u[0] - 1.0,
            (pa[1] - pa[0]) / h + alpha * (u[b] - u[p]),
            (pp[0] - pp[1]) / h + alpha * (u[p] - u[b]),
        ])

    def g_x(u, t):
        _, da = _power(u[[a, b]], c1)
        _, dp = _power(u[[p, q]], c2)
        jac = np.zeros((3, n))
        jac[0, 0] = 1.0
        jac[1, a] = -da[0] / h
        jac[1, b] = da[1] / h + alpha
        jac[1, p] = -alpha
        jac[2, p] = dp[0] / h + alpha
        jac[2, q] = -dp[1] / h
        jac[2, b] = -alpha
        return jac

    def gxx_lam(u, t, lam):
        hess = np.zeros((n, n))
        for idx, c, w in ((a, c1, -lam[1] / h), (b, c1, lam[1] / h),
                          (p, c2, lam[2] / h), (q, c2, -lam[2] / h)):
            if c != 1:
                hess[idx, idx] += w * c * (c - 1) * u[idx] ** (c - 2)
        return hess

    z = np.linspace(0.0, 1.0, k)
    u0 = np.concatenate([np.where(z < 0.25, 1.0 - 4.0 * z, 0.0), np.zeros(k)])
    linear = c1 == 1 and c2 == 1
    return SemiExplicitDae(
        n=n, m=3, f=f, g=g, g_x=g_x, f_x=f_x, gxx_lam=gxx_lam, x0=u0, T=cfg.T,
        f_linear=linear, g_linear=linear, name="heat",
    )


# -- pendulum ----------------------------------------------------------------

@dataclass(frozen=True)
class PendulumConfig:
    ell: float = 1.0
    gamma: float = 1.0
    x_init: tuple = (1.0, 0.0, 0.0, 0.0)
    T: float = 3.0

    def __post_init__(self):
        x1, x2, y1, y2 = self.x_init
        if abs(x1**2 + x2**2 - self.ell**2) > 1e-12 * max(1.0, self.ell**2):
            raise ValueError("initial position is off the circle of radius ell")
        if abs(x1 * y1 + x2 * y2) > 1e-12:
            raise ValueError("initial velocity is not tangential")


PENDULUM_J = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def pendulum_energy(x, cfg: PendulumConfig = PendulumConfig()) -> float:
    return 0.5 * x[2] ** 2 + 0.5 * x[3] ** 2 + cfg.gamma * x[1]


def make_pendulum(cfg: PendulumConfig = PendulumConfig()) -> SemiExplicitDae:
    """First-order pendulum ``J x' = -grad E - g_x^T lam`` with state ``(x1, x2, y1, y2)``."""
    ell2, gamma = cfg.ell**2, cfg.gamma

    def f(x, t):
        return -np.array([0.0, gamma, x[2], x[3]])

    def f_x(x, t):
        return -np.diag([0.0, 0.0, 1.0, 1.0])

    def g(x, t):
        return np.array([x[0] ** 2 + x[1] ** 2 - ell2])

    def g_x(x, t):
        return np.array([[2.0 * x[0], 2.0 * x[1], 0.0, 0.0]])

    def gxx_lam(x, t, lam):
        return 2.0 * lam[0] * np.diag([1.0, 1.0, 0.0, 0.0])

    return SemiExplicitDae(
        n=4, m=1, f=f, g=g, g_x=g_x, f_x=f_x, gxx_lam=gxx_lam, J=PENDULUM_J,
        x0=np.array(cfg.x_init, dtype=float), T=cfg.T, f_linear=True, g_linear=False,
        name="pendulum",
    )
