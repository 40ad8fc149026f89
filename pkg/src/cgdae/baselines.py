"""Radau IIA collocation applied directly to the index-2 problem.

The stage equations are::

    X_i = x_0 + dt * sum_j a_ij (f(X_j, t_j) - g_x(X_j, t_j)^T Lam_j)
    0   = g(X_i, t_i)

for all stages, and the step ends on the last stage. Internally the stage
multipliers are carried as ``dt * Lam_j`` which keeps the Newton matrix
well scaled for small steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import Polynomial, legendre

from .dae_model import SemiExplicitDae
from .errors import IntegrationError, NoConvergence, SingularNewtonMatrix
from .stepper import NewtonReport, NewtonSettings, _factor, _step_count
from scipy.linalg import lu_solve


@dataclass(frozen=True)
class ButcherTableau:
    s: int
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    @property
    def stiffly_accurate(self) -> bool:
        return np.allclose(self.b, self.A[-1]) and self.c[-1] == 1.0


def radau_nodes(s: int) -> np.ndarray:
    """Right Radau points on [0, 1]: zeros of ``P_s - P_{s-1}`` mapped from [-1, 1]."""
    coef = np.zeros(s + 1)
    coef[s] = 1.0
    coef[s - 1] = -1.0
    x = np.sort(legendre.legroots(coef).real)
    c = 0.5 * (x + 1.0)
    c[-1] = 1.0
    return c


def radau_tableau(s: int) -> ButcherTableau:
    """Radau IIA collocation tableau with ``s`` stages (2 or 3)."""
    if s not in (2, 3):
        raise ValueError(f"only 2- and 3-stage Radau IIA are provided, got s={s}")
    c = radau_nodes(s)
    A = np.empty((s, s))
    for j in range(s):
        others = np.delete(c, j)
        lj = Polynomial.fromroots(others) / np.prod(c[j] - others)
        integral = lj.integ()
        A[:, j] = integral(c) - integral(0.0)
    A.setflags(write=False)
    b = A[-1].copy()
    b.setflags(write=False)
    c.setflags(write=False)
    return ButcherTableau(s, A, b, c)


def _stage_residual(dae, tab, t_start, dt, x0, X, Mu):
    s, n, m = tab.s, dae.n, dae.m
    t = t_start + dt * tab.c
    rhs = np.empty((s, n))
    con = np.empty((s, m))
    for j in range(s):
        rhs[j] = dt * dae.eval_f(X[j], t[j])
        if m:
            rhs[j] -= dae.eval_gx(X[j], t[j]).T @ Mu[j]
        con[j] = dae.eval_g(X[j], t[j])
    dyn = X - x0[None, :] - tab.A @ rhs
    return np.concatenate([dyn.ravel(), con.ravel()])


def _stage_jacobian(dae, tab, t_start, dt, X, Mu):
    s, n, m = tab.s, dae.n, dae.m
    t = t_start + dt * tab.c
    N = s * (n + m)
    off = s * n
    jac = np.zeros((N, N))
    for j in range(s):
        cols = slice(j * n, (j + 1) * n)
        local = dt * dae.eval_fx(X[j], t[j])
        if m:
            gx = dae.eval_gx(X[j], t[j])
            local = local - dae.eval_gxx_lam(X[j], t[j], Mu[j])
        for i in range(s):
            rows = slice(i * n, (i + 1) * n)
            jac[rows, cols] = -tab.A[i, j] * local
            if m:
                jac[rows, off + j * m:off + (j + 1) * m] = tab.A[i, j] * gx.T
        jac[cols, cols] += np.eye(n)
        if m:
            jac[off + j * m:off + (j + 1) * m, cols] = gx
    return jac


def radau_step(dae: SemiExplicitDae, tab: ButcherTableau, t_start, dt, x0,
               settings: NewtonSettings = NewtonSettings(), guess=None):
    """One Radau IIA step; returns ``(x_end, X, Lam, report)``.

    ``X`` holds the stage values and ``Lam`` the stage multipliers.
    """
    if dae.J is not None and not np.array_equal(dae.J, np.eye(dae.n)):
        raise ValueError("Radau IIA baseline is only set up for J = identity")
    x0 = np.asarray(x0, dtype=float)
    s, n, m = tab.s, dae.n, dae.m
    if guess is None:
        X, Mu = np.tile(x0, (s, 1)), np.zeros((s, m))
    else:
        X, Mu = guess[0].copy(), guess[1] * dt
    res = _stage_residual(dae, tab, t_start, dt, x0, X, Mu)
    norm = float(np.abs(res).max())
    history = [norm]
    it = 0
    while norm > settings.tol_residual:
        if it >= settings.max_iter:
            raise NoConvergence(f"Radau Newton stopped after {it} iterations with residual {norm:.3e}")
        step = lu_solve(_factor(_stage_jacobian(dae, tab, t_start, dt, X, Mu)), -res, check_finite=False)
        X = X + step[:s * n].reshape(s, n)
        Mu = Mu + step[s * n:].reshape(s, m)
        it += 1
        res = _stage_residual(dae, tab, t_start, dt, x0, X, Mu)
        norm = float(np.abs(res).max())
        history.append(norm)
    return X[-1].copy(), X, Mu / dt, NewtonReport(it, norm, True, history)


@dataclass
class RadauSolution:
    tableau: ButcherTableau
    dt: float
    times: np.ndarray
    states: np.ndarray
    stage_multipliers: list = field(default_factory=list)
    reports: list = field(default_factory=list)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def radau_integrate(dae: SemiExplicitDae, s: int, dt: float,
                    settings: Optional[NewtonSettings] = None) -> RadauSolution:
    settings = settings or NewtonSettings.from_env()
    tab = radau_tableau(s)
    N = _step_count(dae.T, dt)
    states = np.empty((N + 1, dae.n))
    states[0] = dae.x0
    sol = RadauSolution(tab, dt, dt * np.arange(N + 1), states)
    guess = None
    for ell in range(N):
        try:
            x_end, X, Lam, rep = radau_step(dae, tab, ell * dt, dt, states[ell], settings, guess)
        except (NoConvergence, SingularNewtonMatrix, ArithmeticError, ValueError) as exc:
            raise IntegrationError(f"Radau step {ell} of {N} failed: {exc}", ell, sol, exc) from exc
        states[ell + 1] = x_end
        sol.stage_multipliers.append(Lam)
        sol.reports.append(rep)
        guess = (np.tile(x_end, (s, 1)), Lam)
    return sol
