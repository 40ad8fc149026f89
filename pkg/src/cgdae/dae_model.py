"""Semi-explicit DAE problem description.

A problem has the form::

    J x' = f(x, t) - g_x(x, t)^T lam
       0 = g(x, t)

with ``J`` the identity for the index-2 Hessenberg class and a constant
skew-symmetric matrix for the first-order mechanical systems.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import EvaluationError

CONSISTENCY_TOL = 1e-10
RANK_RTOL = 1e-10

Vector = np.ndarray
Matrix = np.ndarray


def fd_jacobian(h: Callable[[Vector], Vector], x) -> Matrix:
    """Central-difference Jacobian of ``h`` at ``x``.

    Column ``i`` uses the step ``sqrt(eps) * (1 + |x_i|)``.
    """
    x = np.asarray(x, dtype=float)
    h0 = np.atleast_1d(np.asarray(h(x), dtype=float))
    jac = np.empty((h0.size, x.size))
    base = np.sqrt(np.finfo(float).eps)
    for i in range(x.size):
        step = base * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        hp = np.atleast_1d(np.asarray(h(xp), dtype=float))
        hm = np.atleast_1d(np.asarray(h(xm), dtype=float))
        if not (np.all(np.isfinite(hp)) and np.all(np.isfinite(hm))):
            raise EvaluationError(f"non-finite value while differencing column {i}")
        jac[:, i] = (hp - hm) / (xp[i] - xm[i])
    return jac


def _no_constraint(x, t):
    return np.zeros(0)


@dataclass(frozen=True)
class SemiExplicitDae:
    """Callbacks and data of one problem instance.

    ``f_x`` and ``gxx_lam`` are optional; missing derivatives are replaced by
    central differences. ``gxx_lam(x, t, lam)`` returns the ``n x n``
    Jacobian of ``x -> g_x(x, t)^T lam`` and vanishes for constraints that
    are affine in ``x``. ``J=None`` stands for the identity.
    """

    n: int
    m: int
    f: Callable[[Vector, float], Vector]
    g: Callable[[Vector, float], Vector]
    g_x: Callable[[Vector, float], Matrix]
    x0: Vector
    T: float
    f_x: Optional[Callable[[Vector, float], Matrix]] = None
    gxx_lam: Optional[Callable[[Vector, float, Vector], Matrix]] = None
    J: Optional[Matrix] = None
    x_ref: Optional[Callable[[float], Vector]] = None
    lam_ref: Optional[Callable[[float], Vector]] = None
    f_linear: bool = False
    g_linear: bool = False
    name: str = "dae"

    def __post_init__(self):
        x0 = np.array(self.x0, dtype=float)
        if x0.shape != (self.n,):
            raise ValueError(f"x0 has shape {x0.shape}, expected ({self.n},)")
        if not 0 <= self.m < self.n:
            raise ValueError(f"need 0 <= m < n, got m={self.m}, n={self.n}")
        if self.T <= 0:
            raise ValueError("time horizon T must be positive")
        x0.setflags(write=False)
        object.__setattr__(self, "x0", x0)
        if self.J is not None:
            J = np.array(self.J, dtype=float)
            if J.shape != (self.n, self.n):
                raise ValueError(f"J has shape {J.shape}, expected ({self.n}, {self.n})")
            if not np.array_equal(J, np.eye(self.n)) and not np.allclose(J, -J.T):
                raise ValueError("a non-identity J must be skew-symmetric")
            J.setflags(write=False)
            object.__setattr__(self, "J", J)

    @classmethod
    def ode(cls, n, f, x0, T, **kwargs) -> "SemiExplicitDae":
        """Unconstrained problem (``m = 0``)."""
        return cls(n=n, m=0, f=f, g=_no_constraint,
                   g_x=lambda x, t: np.zeros((0, n)), x0=x0, T=T,
                   g_linear=True, **kwargs)

    @property
    def mass(self) -> Matrix:
        return np.eye(self.n) if self.J is None else self.J

    @property
    def t_span(self) -> tuple[float, float]:
        return 0.0, float(self.T)

    def eval_f(self, x, t) -> Vector:
        return _checked(self.f(x, t), (self.n,), "f")

    def eval_g(self, x, t) -> Vector:
        return _checked(self.g(x, t), (self.m,), "g")

    def eval_gx(self, x, t) -> Matrix:
        return _checked(self.g_x(x, t), (self.m, self.n), "g_x")

    def eval_fx(self, x, t) -> Matrix:
        if self.f_x is not None:
            return _checked(self.f_x(x, t), (self.n, self.n), "f_x")
        return fd_jacobian(lambda y: self.eval_f(y, t), x)

    def eval_gxx_lam(self, x, t, lam) -> Matrix:
        if self.m == 0 or self.g_linear:
            return np.zeros((self.n, self.n))
        if self.gxx_lam is not None:
            return _checked(self.gxx_lam(x, t, lam), (self.n, self.n), "gxx_lam")
        return fd_jacobian(lambda y: self.eval_gx(y, t).T @ lam, x)


def _checked(value, shape, what):
    arr = np.asarray(value, dtype=float)
    if arr.shape != shape:
        arr = arr.reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"{what} returned non-finite values")
    return arr


@dataclass(frozen=True)
class ConsistencyReport:
    residual_norm: float
    consistent: bool
    rank_ok: bool


def check_consistency(dae: SemiExplicitDae) -> ConsistencyReport:
    """Constraint residual and row rank of ``g_x`` at the initial state."""
    t0 = dae.t_span[0]
    res = float(np.linalg.norm(dae.eval_g(dae.x0, t0)))
    if dae.m == 0:
        return ConsistencyReport(res, res <= CONSISTENCY_TOL, True)
    sv = np.linalg.svd(dae.eval_gx(dae.x0, t0), compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv.max())) if sv.max() > 0 else 0
    return ConsistencyReport(res, res <= CONSISTENCY_TOL, rank == dae.m)


def continuous_residual(dae: SemiExplicitDae, x, xdot, lam, t) -> tuple[Vector, Vector]:
    """Residual ``(J x' - f + g_x^T lam, g)`` of a candidate solution at time ``t``."""
    x = np.asarray(x, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if x.shape != (dae.n,) or xdot.shape != (dae.n,):
        raise ValueError("state and derivative must have length n")
    if lam.shape != (dae.m,):
        raise ValueError(f"multiplier must have length m={dae.m}")
    dyn = dae.mass @ xdot - dae.eval_f(x, t) + dae.eval_gx(x, t).T @ lam
    return dyn, dae.eval_g(x, t)
