"""Convergence studies over (degree, step size) ladders with CSV output."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baselines import radau_integrate
from .benchmarks import (HeatConfig, PendulumConfig, make_circuit, make_heat,
                         make_pendulum, pendulum_energy)
from .errors import CgDaeError
from .polybasis import FAMILIES
from .stepper import (NewtonSettings, Trajectory, constraint_violation, integrate,
                      multiplier_dual_error)

PROBLEMS = ("circuit", "heat", "pendulum")
BASELINES = {"radau2": 2, "radau3": 3}
FAILED = "failed"
HEADER = ("problem", "r", "family", "dt", "err_state", "err_mult", "err_energy",
          "newton_iters_mean", "order_state", "order_mult")

# default final times of the convergence studies
DEFAULT_T = {"circuit": 0.2, "heat": 0.5, "pendulum": 3.0}
DEFAULT_LADDER = {"circuit": (0.05, 7), "heat": (0.5 / 80, 4), "pendulum": (3.0 / 32, 6)}
HEAT_REF_STEPS = 2560
# finer self-references drift from rounding accumulated over many steps
REF_FACTOR = 16


@dataclass(frozen=True)
class StudyConfig:
    problem: str
    degrees: tuple = (1, 2, 3)
    dt0: Optional[float] = None
    levels: Optional[int] = None
    family: str = "equispaced"
    c1: float = 1.0
    c2: float = 1.0
    baselines: tuple = ()
    T: Optional[float] = None
    ref_steps: Optional[int] = None
    out: Optional[str] = None

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}; expected one of {PROBLEMS}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        dt0, levels = DEFAULT_LADDER[self.problem]
        if self.dt0 is None:
            object.__setattr__(self, "dt0", dt0)
        if self.levels is None:
            object.__setattr__(self, "levels", levels)
        if self.T is None:
            object.__setattr__(self, "T", DEFAULT_T[self.problem])
        object.__setattr__(self, "degrees", tuple(int(r) for r in self.degrees))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        if not self.dt0 > 0:
            raise ValueError("dt0 must be positive")
        if self.levels < 1:
            raise ValueError("levels must be at least 1")
        if self.T <= 0:
            raise ValueError("T must be positive")
        for name in self.baselines:
            if name not in BASELINES:
                raise ValueError(f"unknown baseline {name!r}; expected one of {tuple(BASELINES)}")
        if self.baselines and self.problem == "pendulum":
            raise ValueError("the Radau baselines need J = identity and do not apply to the pendulum")
        self.step_counts  # validates the ladder against T
        if self.needs_reference:
            for N in self.step_counts:
                if self.reference_steps % N:
                    raise ValueError(f"reference grid ({self.reference_steps} steps) does not refine {N} steps")

    @property
    def dts(self) -> list[float]:
        return [self.dt0 / 2**k for k in range(self.levels)]

    @property
    def step_counts(self) -> list[int]:
        counts = []
        for dt in self.dts:
            N = round(self.T / dt)
            if N < 1 or abs(N * dt - self.T) > 1e-12 * self.T:
                raise ValueError(f"T = {self.T} is not a multiple of dt = {dt}")
            counts.append(N)
        return counts

    @property
    def needs_reference(self) -> bool:
        return self.problem != "circuit"

    @property
    def reference_steps(self) -> int:
        if self.ref_steps is not None:
            return int(self.ref_steps)
        if self.problem == "heat":
            return HEAT_REF_STEPS
        return REF_FACTOR * self.step_counts[-1]

    def make_problem(self):
        if self.problem == "circuit":
            return make_circuit(T=self.T)
        if self.problem == "heat":
            return make_heat(HeatConfig(c1=self.c1, c2=self.c2, T=self.T))
        return make_pendulum(PendulumConfig(T=self.T))


@dataclass
class ConvergenceRow:
    problem: str
    r: int
    family: str
    dt: float
    err_state: Optional[float] = None
    err_mult: Optional[float] = None
    err_energy: Optional[float] = None
    newton_iters_mean: Optional[float] = None
    order_state: Optional[float] = None
    order_mult: Optional[float] = None
    failed: bool = False
    # diagnostics kept out of the CSV
    newton_iters_max: Optional[int] = None
    constraint_violation: Optional[float] = None


@dataclass
class ConvergenceTable:
    rows: list = field(default_factory=list)

    def select(self, r: int, family: Optional[str] = None) -> list:
        return [row for row in self.rows
                if row.r == r and (family is None or row.family == family)]

    def errors(self, r: int, column: str = "err_state", family: Optional[str] = None) -> np.ndarray:
        vals = [getattr(row, column) for row in self.select(r, family)]
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    def tail_order(self, r: int, column: str = "err_state", family: Optional[str] = None,
                   floor: float = 0.0) -> Optional[float]:
        rows = self.select(r, family)
        dts = np.array([row.dt for row in rows])
        errs = self.errors(r, column, family)
        keep = np.isfinite(errs) & (errs > floor)
        return estimate_orders(errs[keep], dts[keep])[1]

    @property
    def any_failed(self) -> bool:
        return any(row.failed for row in self.rows)


def estimate_orders(errors: Sequence[float], dts: Optional[Sequence[float]] = None):
    """Successive log2 error ratios and a least-squares slope over the last 3 rows.

    Rows are ordered by decreasing step size. ``dts`` defaults to halving.
    Ratios involving a zero, negative or non-finite error are ``None``.
    """
    errs = np.asarray(errors, dtype=float)
    if dts is None:
        dts = 0.5 ** np.arange(errs.size)
    dts = np.asarray(dts, dtype=float)
    good = np.isfinite(errs) & (errs > 0)
    orders: list = [None]
    for k in range(1, errs.size):
        if good[k] and good[k - 1]:
            orders.append(float(math.log(errs[k - 1] / errs[k]) / math.log(dts[k - 1] / dts[k])))
        else:
            orders.append(None)
    tail = None
    idx = np.flatnonzero(good)[-3:]
    if idx.size >= 2:
        tail = float(np.polyfit(np.log2(dts[idx]), np.log2(errs[idx]), 1)[0])
    return orders[:errs.size], tail


def _fill_orders(rows):
    for name, col in (("order_state", "err_state"), ("order_mult", "err_mult")):
        errs = [np.nan if getattr(row, col) is None else getattr(row, col) for row in rows]
        orders, _ = estimate_orders(errs, [row.dt for row in rows])
        for row, order in zip(rows, orders):
            setattr(row, name, order)


def _tail_multiplier_sum(traj: Trajectory, t_from: float) -> np.ndarray:
    # pairing of the multiplier with the indicator of [t_from, T]
    total = np.zeros(traj.dae.m)
    for iv in traj.intervals:
        if iv.t_start >= t_from - 1e-12 * max(1.0, abs(t_from)):
            total += iv.multipliers.sum(axis=0)
    return total


def _newton_mean(traj: Trajectory) -> float:
    return float(np.mean([iv.newton.iterations for iv in traj.intervals]))


def _cg_rows(cfg: StudyConfig, dae, r: int, settings: NewtonSettings) -> list:
    rows = [ConvergenceRow(cfg.problem, r, cfg.family, dt) for dt in cfg.dts]
    ref = None
    if cfg.needs_reference:
        try:
            ref = integrate(dae, r, cfg.T / cfg.reference_steps, cfg.family, settings)
        except CgDaeError:
            for row in rows:
                row.failed = True
            return rows
    for row in rows:
        try:
            traj = integrate(dae, r, row.dt, cfg.family, settings)
        except CgDaeError:
            row.failed = True
            continue
        last = traj.intervals[-1]
        row.newton_iters_mean = _newton_mean(traj)
        row.newton_iters_max = max(iv.newton.iterations for iv in traj.intervals)
        row.constraint_violation = constraint_violation(traj)
        if ref is None:
            row.err_state = float(np.linalg.norm(traj.final_state - dae.x_ref(cfg.T)))
            row.err_mult = multiplier_dual_error(traj, len(traj.intervals) - 1, dae.lam_ref)
        else:
            row.err_state = float(np.linalg.norm(traj.final_state - ref.final_state))
            row.err_mult = float(np.linalg.norm(
                last.multipliers.sum(axis=0) - _tail_multiplier_sum(ref, last.t_start)))
        if cfg.problem == "pendulum":
            pcfg = PendulumConfig(T=cfg.T)
            row.err_energy = abs(pendulum_energy(traj.final_state, pcfg) - pendulum_energy(dae.x0, pcfg))
    return rows


def _radau_rows(cfg: StudyConfig, dae, name: str, settings: NewtonSettings) -> list:
    s = BASELINES[name]
    rows = [ConvergenceRow(cfg.problem, s, name, dt) for dt in cfg.dts]
    ref_state = None
    if cfg.needs_reference:
        try:
            ref_state = radau_integrate(dae, s, cfg.T / cfg.reference_steps, settings).final_state
        except CgDaeError:
            for row in rows:
                row.failed = True
            return rows
    for row in rows:
        try:
            sol = radau_integrate(dae, s, row.dt, settings)
        except CgDaeError:
            row.failed = True
            continue
        target = dae.x_ref(cfg.T) if ref_state is None else ref_state
        row.err_state = float(np.linalg.norm(sol.final_state - target))
        row.newton_iters_mean = float(np.mean([rep.iterations for rep in sol.reports]))
        row.newton_iters_max = max(rep.iterations for rep in sol.reports)
    return rows


def run_study(cfg: StudyConfig, settings: Optional[NewtonSettings] = None) -> ConvergenceTable:
    """Run every (degree, step size) pair of ``cfg`` and collect the error rows.

    Rows are ordered by degree, then by decreasing step size, followed by
    the baseline rows. A run that fails is kept as a row flagged ``failed``.
    """
    settings = settings or NewtonSettings.from_env()
    dae = cfg.make_problem()
    table = ConvergenceTable()
    for r in cfg.degrees:
        rows = _cg_rows(cfg, dae, r, settings)
        _fill_orders(rows)
        table.rows.extend(rows)
    for name in cfg.baselines:
        rows = _radau_rows(cfg, dae, name, settings)
        _fill_orders(rows)
        table.rows.extend(rows)
    return table


def _fmt(value, failed=False) -> str:
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return FAILED if failed else ""
    return f"{value:.5e}"


def format_row(row: ConvergenceRow) -> list:
    return [row.problem, str(row.r), row.family, _fmt(row.dt),
            _fmt(row.err_state, row.failed), _fmt(row.err_mult, row.failed),
            _fmt(row.err_energy), _fmt(row.newton_iters_mean),
            _fmt(row.order_state), _fmt(row.order_mult)]


def write_csv(table: ConvergenceTable, path) -> None:
    """Write the table with a fixed header, 6 significant digits and LF endings."""
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(HEADER)
            for row in table.rows:
                writer.writerow(format_row(row))
    except OSError as exc:
        raise OSError(f"cannot write study table to {path}: {exc}") from exc


def read_csv(path) -> list[dict]:
    """Parse a study CSV back into dictionaries; blank fields become ``None``."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            parsed = {}
            for key, val in rec.items():
                if key in ("problem", "family"):
                    parsed[key] = val
                elif key == "r":
                    parsed[key] = int(val)
                elif val in ("", FAILED):
                    parsed[key] = None
                else:
                    parsed[key] = float(val)
            out.append(parsed)
    return out
