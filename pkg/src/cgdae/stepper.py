"""Continuous Galerkin time stepping for semi-explicit DAEs.

On each step ``[t_s, t_s + dt]`` the unknowns are the state values
``x_1..x_r`` at the nodes ``t_k = t_s + dt * tau_k`` and the multiplier
coefficients ``lam_1..lam_r``. They solve::

    sum_j J x_j D[i, j] - dt sum_j f(x_j, t_j) Mhat[i, j] + g_x(x_i, t_i)^T lam_i = 0
    g(x_k, t_k) = 0

for ``i, k = 1..r``. The discrete multiplier is a combination of point
evaluations at ``t_1..t_r``; only its action on test functions is defined.
"""
from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .dae_model import SemiExplicitDae, check_consistency
from .errors import IntegrationError, NoConvergence, SingularNewtonMatrix
from .polybasis import CgTableau, assemble_tableau, make_grid


TOL_ENV = "CGDAE_NEWTON_TOL"
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class NewtonSettings:
    tol_residual: float = 1e-12
    max_iter: int = 25
    predictor: str = "extrapolate"

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.predictor not in ("constant", "extrapolate"):
            raise ValueError(f"unknown predictor {self.predictor!r}")

    @classmethod
    def from_env(cls, **kwargs) -> "NewtonSettings":
        """Defaults, with the tolerance taken from ``CGDAE_NEWTON_TOL`` if set."""
        value = os.environ.get(TOL_ENV)
        if value and "tol_residual" not in kwargs:
            kwargs["tol_residual"] = float(value)
        return cls(**kwargs)


@dataclass
class NewtonReport:
    iterations: int
    final_residual_norm: float
    converged: bool
    history: list = field(default_factory=list)


@dataclass
class IntervalSolution:
    t_start: float
    dt: float
    coeffs: np.ndarray        # (r+1, n): x_0..x_r
    multipliers: np.ndarray   # (r, m): lam_1..lam_r
    newton: NewtonReport

    @property
    def t_end(self) -> float:
        return self.t_start + self.dt


@dataclass
class Trajectory:
    dae: SemiExplicitDae
    tableau: CgTableau
    intervals: list = field(default_factory=list)

    @property
    def grid(self):
        return self.tableau.grid

    @property
    def final_state(self) -> np.ndarray:
        return self.intervals[-1].coeffs[-1]

    def node_times(self, ell: int) -> np.ndarray:
        iv = self.intervals[ell]
        return iv.t_start + iv.dt * self.grid.nodes


def _as_rows(vec, r, width):
    return np.asarray(vec, dtype=float).reshape(r, width)


def _node_times(tableau, t_start, dt):
    return t_start + dt * tableau.grid.nodes


def assemble_residual(dae: SemiExplicitDae, tableau: CgTableau, t_start, dt, x0, xvec, lvec):
    """Residual of the step equations, flattened to length ``r * (n + m)``.

    ``xvec`` holds ``x_1..x_r`` and ``lvec`` holds ``lam_1..lam_r``, either
    flat or with one row per node.
    """
    r, n, m = tableau.r, dae.n, dae.m
    X = np.vstack([np.asarray(x0, dtype=float).reshape(1, n), _as_rows(xvec, r, n)])
    L = _as_rows(lvec, r, m)
    t = _node_times(tableau, t_start, dt)
    F = np.array([dae.eval_f(X[j], t[j]) for j in range(r + 1)])
    return _residual(dae, tableau, dt, X, L, t, F)


def _residual(dae, tableau, dt, X, L, t, F):
    r = tableau.r
    dyn = tableau.D @ (X @ dae.mass.T) - dt * (tableau.Mhat @ F)
    con = np.empty((r, dae.m))
    for k in range(1, r + 1):
        if dae.m:
            dyn[k - 1] += dae.eval_gx(X[k], t[k]).T @ L[k - 1]
        con[k - 1] = dae.eval_g(X[k], t[k])
    return np.concatenate([dyn.ravel(), con.ravel()])


def assemble_newton_matrix(dae: SemiExplicitDae, tableau: CgTableau, t_start, dt, xvec, lvec=None):
    """Saddle-point Jacobian of :func:`assemble_residual` w.r.t. ``(xvec, lvec)``.

    The (1,1) block is ``Dbar (x) J - dt (Mbarhat (x) I) blkdiag(f_x)`` plus,
    for constraints that are nonlinear in ``x``, the block diagonal of
    derivatives of ``g_x^T lam_i``. The off-diagonal blocks are
    ``blkdiag(g_x)`` and its transpose.
    """
    r, n, m = tableau.r, dae.n, dae.m
    X = _as_rows(xvec, r, n)
    L = np.zeros((r, m)) if lvec is None else _as_rows(lvec, r, m)
    t = _node_times(tableau, t_start, dt)[1:]
    J = dae.mass
    Dbar, Mbar = tableau.Dbar, tableau.Mbarhat
    N = r * (n + m)
    A = np.zeros((N, N))
    off = r * n
    for j in range(r):
        fx = dae.eval_fx(X[j], t[j])
        cols = slice(j * n, (j + 1) * n)
        for i in range(r):
            A[i * n:(i + 1) * n, cols] = Dbar[i, j] * J - dt * Mbar[i, j] * fx
        if m:
            gx = dae.eval_gx(X[j], t[j])
            A[cols, cols] += dae.eval_gxx_lam(X[j], t[j], L[j])
            A[cols, off + j * m:off + (j + 1) * m] = gx.T
            A[off + j * m:off + (j + 1) * m, cols] = gx
    return A


def _factor(A):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(A, check_finite=False)
    scale = np.linalg.norm(A, np.inf)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(pivots)) or pivots.min() <= PIVOT_RTOL * scale:
        raise SingularNewtonMatrix(
            f"smallest pivot {pivots.min():.3e} below {PIVOT_RTOL:g} * |A| = {PIVOT_RTOL * scale:.3e}; "
            "check the rank of g_x or reduce the step size"
        )
    return lu, piv


def _predict(tableau, x0, previous, settings, r, n, m):
    if previous is None:
        return np.tile(x0, (r, 1)), np.zeros((r, m))
    L = previous.multipliers.copy()
    if settings.predictor == "constant":
        return np.tile(x0, (r, 1)), L
    grid = tableau.grid
    # next nodes in the previous step's reference coordinate
    X = grid.phi(1.0 + grid.nodes[1:]) @ previous.coeffs
    return X, L


def newton_solve(dae: SemiExplicitDae, tableau: CgTableau, t_start, dt, x0,
                 settings: NewtonSettings = NewtonSettings(), previous: Optional[IntervalSolution] = None):
    """Solve one step with plain Newton on the saddle-point system.

    Returns ``(X, L, report)`` with ``X`` of shape ``(r, n)`` holding
    ``x_1..x_r`` and ``L`` of shape ``(r, m)``. ``previous`` feeds the
    predictor.

    Raises
    ------
    SingularNewtonMatrix
        A pivot of the dense LU factorization falls below ``1e-14 * |A|``.
    NoConvergence
        The residual infinity norm is above ``settings.tol_residual`` after
        ``settings.max_iter`` corrections.
    """
    if not dt > 0:
        raise ValueError("step size must be positive")
    x0 = np.asarray(x0, dtype=float)
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial value is not finite")
    r, n, m = tableau.r, dae.n, dae.m
    t = _node_times(tableau, t_start, dt)
    f0 = dae.eval_f(x0, t[0])

    X, L = _predict(tableau, x0, previous, settings, r, n, m)

    def residual(X, L):
        Xf = np.vstack([x0, X])
        F = np.vstack([f0] + [dae.eval_f(Xf[j], t[j]) for j in range(1, r + 1)])
        return _residual(dae, tableau, dt, Xf, L, t, F)

    res = residual(X, L)
    norm = float(np.abs(res).max())
    history = [norm]
    it = 0
    while norm > settings.tol_residual:
        if it >= settings.max_iter:
            raise NoConvergence(
                f"Newton stopped after {it} iterations with residual {norm:.3e} "
                f"(tol {settings.tol_residual:g}) on [{t_start:g}, {t_start + dt:g}]"
            )
        A = assemble_newton_matrix(dae, tableau, t_start, dt, X, L)
        step = lu_solve(_factor(A), -res, check_finite=False)
        X = X + step[:r * n].reshape(r, n)
        L = L + step[r * n:].reshape(r, m)
        it += 1
        res = residual(X, L)
        norm = float(np.abs(res).max())
        history.append(norm)
    return X, L, NewtonReport(it, norm, True, history)


def _step_count(T, dt):
    q = T / dt
    N = round(q)
    if N < 1 or abs(q - N) > 0.5 * math.ulp(q):
        raise ValueError(f"T/dt = {q!r} is not an integer; only uniform steps that tile [0, T] are supported")
    return int(N)


def integrate(dae: SemiExplicitDae, r: int, dt: float, family: str = "equispaced",
              settings: Optional[NewtonSettings] = None, tableau: Optional[CgTableau] = None) -> Trajectory:
    """Run the cG scheme of degree ``r`` with uniform steps ``dt`` over ``[0, T]``.

    A failure on any step raises :class:`IntegrationError` with the partial
    trajectory and the step index attached.
    """
    settings = settings or NewtonSettings.from_env()
    if tableau is None:
        tableau = assemble_tableau(make_grid(family, r))
    if not tableau.grid.ends_at_one:
        raise ValueError("time stepping needs the last Lagrange node at the interval end")
    N = _step_count(dae.T, dt)
    report = check_consistency(dae)
    if not report.consistent:
        warnings.warn(f"inconsistent initial data for {dae.name}: |g(x0, 0)| = {report.residual_norm:.3e}",
                      stacklevel=2)
    traj = Trajectory(dae, tableau)
    x0 = dae.x0.copy()
    prev = None
    for ell in range(N):
        t_start = ell * dt
        try:
            X, L, rep = newton_solve(dae, tableau, t_start, dt, x0, settings, prev)
        except (NoConvergence, SingularNewtonMatrix, ArithmeticError, ValueError) as exc:
            raise IntegrationError(f"step {ell} of {N} failed: {exc}", ell, traj, exc) from exc
        prev = IntervalSolution(t_start, dt, np.vstack([x0, X]), L, rep)
        traj.intervals.append(prev)
        x0 = X[-1]
    return traj


def _locate(traj: Trajectory, t: float) -> int:
    T = traj.intervals[-1].t_end
    if t < 0.0 or t > T * (1 + 1e-14):
        raise ValueError(f"t = {t} outside [0, {T}]")
    if t == 0.0:
        return 0
    dt = traj.intervals[0].dt
    ell = math.ceil(t / dt) - 1
    ell = min(max(ell, 0), len(traj.intervals) - 1)
    # guard against rounding in t / dt
    while ell > 0 and t <= traj.intervals[ell].t_start:
        ell -= 1
    while ell < len(traj.intervals) - 1 and t > traj.intervals[ell].t_end:
        ell += 1
    return ell


def eval_state(traj: Trajectory, t: float) -> np.ndarray:
    """Value of the piecewise-polynomial state at time ``t``.

    Intervals are half-open on the left, so a boundary time uses the
    interval that ends there.
    """
    iv = traj.intervals[_locate(traj, t)]
    tau = (t - iv.t_start) / iv.dt
    return (traj.grid.phi(tau) @ iv.coeffs)[0]


def multiplier_action(traj: Trajectory, ell: int, v: Callable[[float], float]) -> np.ndarray:
    """Pairing of the discrete multiplier on step ``ell`` with a scalar function ``v``."""
    iv = traj.intervals[ell]
    times = traj.node_times(ell)[1:]
    weights = np.array([float(v(s)) for s in times])
    return weights @ iv.multipliers


GAUSS_POINTS = 20


def integrate_interval(fun, a, b, npts=GAUSS_POINTS):
    x, w = legendre.leggauss(npts)
    s = 0.5 * (b - a) * x + 0.5 * (a + b)
    vals = np.array([np.atleast_1d(fun(si)) for si in s])
    return 0.5 * (b - a) * (w @ vals)


def multiplier_dual_error(traj: Trajectory, ell: int, lam_ref: Callable[[float], np.ndarray]) -> float:
    """``|int_I lam_ref - <Lambda, 1_I>|`` on step ``ell`` (20-point Gauss-Legendre)."""
    iv = traj.intervals[ell]
    exact = integrate_interval(lam_ref, iv.t_start, iv.t_end)
    return float(np.linalg.norm(exact - iv.multipliers.sum(axis=0)))


def constraint_violation(traj: Trajectory) -> float:
    """Largest ``|g(x_k, t_k)|_inf`` over all steps and constraint nodes."""
    dae = traj.dae
    if dae.m == 0:
        return 0.0
    worst = 0.0
    for ell, iv in enumerate(traj.intervals):
        t = traj.node_times(ell)
        for k in range(1, traj.tableau.r + 1):
            worst = max(worst, float(np.abs(dae.eval_g(iv.coeffs[k], t[k])).max()))
    return worst
