"""Lagrange point families, cardinal bases and the cG coupling matrices.

Everything here lives on the reference interval [0, 1]. A physical step of
length ``dt`` uses nodes ``t_start + dt * tau`` and the mass-type matrix
``dt * Mhat``; the derivative coupling ``D`` does not depend on ``dt``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre
from scipy.linalg import lu_factor

FAMILIES = ("equispaced", "gauss-lobatto", "chebyshev-lobatto")
MAX_DEGREE = 8
LEBESGUE_SAMPLES = 2001
NODE_HIT = 1e-100


def _barycentric_weights(nodes):
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def _differentiation_matrix(nodes, weights):
    # Dmat[k, j] = phi_j'(nodes[k])
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    dmat = (weights[None, :] / weights[:, None]) / diff
    np.fill_diagonal(dmat, 0.0)
    np.fill_diagonal(dmat, -dmat.sum(axis=1))
    return dmat


def cardinal_values(nodes, weights, tau):
    """Values of all cardinal polynomials on ``nodes`` at the points ``tau``.

    Uses the second (true) barycentric formula. Returns an array of shape
    ``(len(tau), len(nodes))``.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    diff = tau[:, None] - nodes[None, :]
    # closer than this the quotient overflows; the node value is exact to roundoff
    hit = np.abs(diff) < NODE_HIT
    rows = hit.any(axis=1)
    hit &= rows[:, None] & (np.abs(diff) == np.abs(diff).min(axis=1, keepdims=True))
    diff[hit] = 1.0
    vals = hit.astype(float)
    terms = weights[None, :] / diff[~rows]
    vals[~rows] = terms / terms.sum(axis=1, keepdims=True)
    return vals


def cardinal_derivatives(nodes, weights, tau):
    """First derivatives of all cardinal polynomials at the points ``tau``.

    Each derivative has degree below ``len(nodes)``, so it equals the
    interpolant of its nodal values taken from the differentiation matrix.
    This avoids the cancellation of the differentiated quotient near nodes.
    """
    if len(nodes) == 1:
        return np.zeros((np.size(tau), 1))
    return cardinal_values(nodes, weights, tau) @ _differentiation_matrix(nodes, weights)


@dataclass(frozen=True)
class LagrangeGrid:
    """Nodes ``tau_0 < ... < tau_r`` of the state basis on [0, 1].

    The test basis uses the subset ``tau_1 .. tau_r``.
    """

    r: int
    nodes: np.ndarray
    family: str
    state_weights: np.ndarray = field(init=False, repr=False, compare=False)
    test_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if self.r < 1:
            raise ValueError("degree r must be at least 1 (the test space is P_{r-1})")
        if nodes.shape != (self.r + 1,):
            raise ValueError(f"expected {self.r + 1} nodes, got shape {nodes.shape}")
        if nodes[0] != 0.0:
            raise ValueError("first node must be 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if nodes[-1] > 1.0:
            raise ValueError("nodes must lie in [0, 1]")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        sw = _barycentric_weights(nodes)
        tw = _barycentric_weights(nodes[1:])
        sw.setflags(write=False)
        tw.setflags(write=False)
        object.__setattr__(self, "state_weights", sw)
        object.__setattr__(self, "test_weights", tw)

    @property
    def ends_at_one(self) -> bool:
        return self.nodes[-1] == 1.0

    def phi(self, tau):
        """All state cardinal functions at ``tau``, shape ``(len(tau), r+1)``."""
        return cardinal_values(self.nodes, self.state_weights, tau)

    def dphi(self, tau):
        return cardinal_derivatives(self.nodes, self.state_weights, tau)

    def psi(self, tau):
        """All test cardinal functions at ``tau``, shape ``(len(tau), r)``."""
        return cardinal_values(self.nodes[1:], self.test_weights, tau)


def make_grid(family: str, r: int) -> LagrangeGrid:
    """Build the reference grid of degree ``r`` for a named point family.

    ``chebyshev-lobatto`` means the extrema of the Chebyshev polynomial
    ``T_r`` mapped to [0, 1], so both interval ends are nodes.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown point family {family!r}; expected one of {FAMILIES}")
    r = int(r)
    if r < 1:
        raise ValueError("degree r must be at least 1")
    if r > MAX_DEGREE:
        raise ValueError(f"degree r={r} exceeds the supported maximum {MAX_DEGREE}")
    if family == "equispaced":
        nodes = np.arange(r + 1) / r
    elif family == "gauss-lobatto":
        # interior nodes: roots of P_r'
        coef = np.zeros(r + 1)
        coef[-1] = 1.0
        interior = np.sort(legendre.legroots(legendre.legder(coef))) if r > 1 else np.empty(0)
        nodes = np.concatenate(([0.0], 0.5 * (1.0 + interior), [1.0]))
    else:
        nodes = 0.5 * (1.0 - np.cos(np.pi * np.arange(r + 1) / r))
    nodes = 0.5 * (nodes + (1.0 - nodes[::-1]))
    nodes[0], nodes[-1] = 0.0, 1.0
    return LagrangeGrid(r, nodes, family)


def custom_grid(nodes) -> LagrangeGrid:
    """Grid from explicit nodes; the last node may lie strictly inside (0, 1].

    Only the tableau routines accept such grids. Time stepping requires the
    last node to sit at the interval end.
    """
    nodes = np.asarray(nodes, dtype=float)
    return LagrangeGrid(len(nodes) - 1, nodes, "custom")


def eval_state_basis(grid: LagrangeGrid, j: int, tau: float) -> tuple[float, float]:
    """Return ``(phi_j(tau), phi_j'(tau))``."""
    if not 0 <= j <= grid.r:
        raise IndexError(f"state basis index {j} outside 0..{grid.r}")
    return float(grid.phi(tau)[0, j]), float(grid.dphi(tau)[0, j])


def eval_test_basis(grid: LagrangeGrid, i: int, tau: float) -> float:
    """Return ``psi_i(tau)`` for ``1 <= i <= r``."""
    if not 1 <= i <= grid.r:
        raise IndexError(f"test basis index {i} outside 1..{grid.r}")
    return float(grid.psi(tau)[0, i - 1])


def lebesgue_constants(grid: LagrangeGrid) -> tuple[float, float]:
    """Lebesgue constants of the state basis and of the test basis.

    The maximum is taken over 2001 equispaced samples of [0, 1] together
    with the nodes; it is a reporting quantity only.
    """
    tau = np.union1d(np.linspace(0.0, 1.0, LEBESGUE_SAMPLES), grid.nodes)
    l_phi = np.abs(grid.phi(tau)).sum(axis=1).max()
    l_psi = np.abs(grid.psi(tau)).sum(axis=1).max()
    return float(l_phi), float(l_psi)


@dataclass(frozen=True)
class CgTableau:
    """Coupling matrices of the cG scheme of degree ``r`` on [0, 1].

    ``D[i, j] = int phi_j' psi_i`` and ``Mhat[i, j] = int phi_j psi_i`` with
    rows ``i = 1..r`` and columns ``j = 0..r``. The first column couples to
    the known left-end value; ``Dbar``/``Mbarhat`` act on the unknowns.
    """

    grid: LagrangeGrid
    D: np.ndarray
    Mhat: np.ndarray
    lebesgue_phi: float
    lebesgue_psi: float

    @property
    def r(self) -> int:
        return self.grid.r

    @property
    def D1(self) -> np.ndarray:
        return self.D[:, 0]

    @property
    def Dbar(self) -> np.ndarray:
        return self.D[:, 1:]

    @property
    def M1hat(self) -> np.ndarray:
        return self.Mhat[:, 0]

    @property
    def Mbarhat(self) -> np.ndarray:
        return self.Mhat[:, 1:]


def assemble_tableau(grid: LagrangeGrid) -> CgTableau:
    # r+1 Gauss-Legendre points integrate degree 2r+1 exactly; the
    # integrands have degree at most 2r-1.
    npts = grid.r + 1
    x, w = legendre.leggauss(npts)
    tau = 0.5 * (x + 1.0)
    w = 0.5 * w
    phi = grid.phi(tau)
    dphi = grid.dphi(tau)
    psi = grid.psi(tau)
    D = (psi * w[:, None]).T @ dphi
    Mhat = (psi * w[:, None]).T @ phi
    D.setflags(write=False)
    Mhat.setflags(write=False)
    l_phi, l_psi = lebesgue_constants(grid)
    return CgTableau(grid, D, Mhat, l_phi, l_psi)


def dbar_inertia(tableau: CgTableau, tol: float = 1e-10) -> tuple[int, int, int]:
    """Counts of positive, negative and zero eigenvalues of sym(Dbar)."""
    dbar = tableau.Dbar
    eig = np.linalg.eigvalsh(0.5 * (dbar + dbar.T))
    zero = np.abs(eig) < tol
    return int(np.sum((eig > 0) & ~zero)), int(np.sum((eig < 0) & ~zero)), int(np.sum(zero))


def dbar_pivots(tableau: CgTableau) -> np.ndarray:
    """Pivots of the partial-pivoting LU factorization of ``Dbar``."""
    lu, _ = lu_factor(tableau.Dbar)
    return np.diag(lu).copy()
