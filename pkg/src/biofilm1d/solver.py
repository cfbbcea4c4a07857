"""Explicit finite-volume solver for small perturbations of the equilibrium.

Rusanov (local Lax-Friedrichs) interface fluxes, the source evaluated
cell-wise inside each stage, and two-stage SSP Runge-Kutta (Heun) in time.
The whole-line Cauchy problem is truncated to an interval whose ghost cells
are either frozen at the equilibrium or periodically wrapped.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .analysis import NormTrace, discrete_norms
from .dissipativity import EquilibriumPoint, dissipation_matrix, equilibrium, is_totally_dissipative
from .errors import (
    ComplexEigenvalues,
    DomainError,
    InvalidParameter,
    LeftHyperbolicDomain,
    NonFiniteValue,
    PerturbationTooLarge,
)
from .model import ModelParams, PhaseState, as_state, flux, hyperbolic_bound, reaction, spectral_radius

BOUNDARY_CONDITIONS = ("equilibrium-dirichlet", "periodic")
PROFILES = ("gaussian", "sine", "uniform")
COMPONENT_FLOOR = 1e-6


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    nx: int

    def __post_init__(self):
        if int(self.nx) != self.nx or self.nx < 16:
            raise InvalidParameter(f"nx must be an integer >= 16, got {self.nx}")
        if not self.x_max > self.x_min:
            raise InvalidParameter(f"need x_max > x_min, got [{self.x_min}, {self.x_max}]")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.nx) + 0.5) * self.dx


@dataclass(frozen=True)
class Perturbation:
    """Initial deviation ``amplitude[k] * profile(x)`` added to component k.

    ``width`` is the Gaussian width for ``gaussian`` and the wavenumber for
    ``sine``; ``uniform`` is a constant unit profile.
    """

    profile: str = "gaussian"
    amplitude: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    width: float = 0.1
    center: float = 0.0

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise InvalidParameter(f"unknown profile {self.profile!r}, expected one of {PROFILES}")
        object.__setattr__(self, "amplitude", tuple(float(a) for a in self.amplitude))
        if len(self.amplitude) != 4:
            raise InvalidParameter("amplitude needs one value per component (B, E, D, v)")
        if not self.width > 0:
            raise InvalidParameter(f"width/wavenumber must be > 0, got {self.width}")

    def shape(self, grid: Grid1D) -> np.ndarray:
        x = grid.centers
        if self.profile == "gaussian":
            return np.exp(-((x - self.center) ** 2) / self.width**2)
        if self.profile == "sine":
            return np.sin(2 * np.pi * self.width * (x - grid.x_min) / (grid.x_max - grid.x_min))
        return np.ones_like(x)


@dataclass(frozen=True)
class SimConfig:
    grid: Grid1D
    params: ModelParams
    t_end: float
    cfl: float = 0.9
    bc: str = "equilibrium-dirichlet"
    perturbation: Perturbation = field(default_factory=Perturbation)
    snapshot_every: int = 0
    preset: str = "custom"
    omega_radius: float = 0.1
    floor: float = COMPONENT_FLOOR
    dt_max: float | None = None

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise InvalidParameter(f"cfl must lie in (0, 1], got {self.cfl}")
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise InvalidParameter(f"t_end must be finite and >= 0, got {self.t_end}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise InvalidParameter(f"unknown bc {self.bc!r}, expected one of {BOUNDARY_CONDITIONS}")
        if self.snapshot_every < 0:
            raise InvalidParameter("snapshot_every must be >= 0")
        if self.dt_max is not None and not self.dt_max > 0:
            raise InvalidParameter("dt_max must be > 0")


@dataclass
class FieldState:
    U: np.ndarray  # (4, nx): rows B, E, D, v
    t: float = 0.0
    step: int = 0

    @property
    def cells(self) -> PhaseState:
        return PhaseState(*self.U)

    def copy(self) -> "FieldState":
        return FieldState(self.U.copy(), self.t, self.step)


@lru_cache(maxsize=64)
def _equilibrium_data(p: ModelParams) -> tuple[EquilibriumPoint, float]:
    ubar = equilibrium(p)
    rho = float(np.max(np.abs(np.linalg.eigvals(dissipation_matrix(ubar.state, ubar, p)))))
    return ubar, rho


def source_dt_cap(p: ModelParams) -> float:
    """0.5 / spectral radius of D(ubar, ubar): keeps the explicit source stable."""
    return 0.5 / _equilibrium_data(p)[1]


def check_field(U: np.ndarray, p: ModelParams, floor: float = COMPONENT_FLOOR, field=None):
    """Raise LeftHyperbolicDomain/NonFiniteValue for the first bad cell."""
    finite = np.all(np.isfinite(U), axis=0)
    if not finite.all():
        i = int(np.argmin(finite))
        raise NonFiniteValue(f"non-finite value in cell {i}: {U[:, i]}", i, tuple(U[:, i]), field)
    B, E, D, v = U
    L = 1.0 - (B + E + D)
    ok = (B >= floor) & (E >= floor) & (D >= floor) & (L > 0) & (L < 1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ok &= np.abs(v) < hyperbolic_bound(np.where(ok, L, 0.5), p.gamma)
    if not ok.all():
        i = int(np.argmin(ok))
        bound = hyperbolic_bound(L[i], p.gamma) if 0 < L[i] < 1 else float("nan")
        raise LeftHyperbolicDomain(
            f"cell {i} left the hyperbolic domain: (B, E, D, v) = {tuple(U[:, i])}, "
            f"L = {L[i]}, |v| bound = {bound}, floor = {floor}",
            i, tuple(U[:, i]), field,
        )


def init_perturbation(cfg: SimConfig) -> FieldState:
    ubar, _ = _equilibrium_data(cfg.params)
    amp = np.asarray(cfg.perturbation.amplitude)[:, None]
    U = ubar.as_array()[:, None] + amp * cfg.perturbation.shape(cfg.grid)[None, :]
    state = FieldState(U, 0.0, 0)
    try:
        check_field(U, cfg.params, cfg.floor)
    except LeftHyperbolicDomain as exc:
        raise PerturbationTooLarge(f"initial data rejected: {exc}", exc.cell, exc.state, state) from None
    high = U[:3] > 1 - cfg.floor
    if high.any():
        i = int(np.argmax(high.any(axis=0)))
        raise PerturbationTooLarge("initial volume fraction above 1 - floor", i, tuple(U[:, i]), state)
    return state


def max_wave_speed(state, p: ModelParams) -> float:
    U = np.asarray(getattr(state, "U", state), dtype=float)
    return float(np.max(spectral_radius(as_state(U), p)))


def numerical_flux(uL, uR, p: ModelParams) -> np.ndarray:
    """Rusanov flux 0.5 (F(uL) + F(uR)) - 0.5 s (uR - uL), s the local max |lambda|."""
    uL = as_state(uL)
    uR = as_state(uR)
    s = np.maximum(spectral_radius(uL, p), spectral_radius(uR, p))
    aL = uL.as_array()
    aR = uR.as_array()
    return 0.5 * (flux(uL, p) + flux(uR, p)) - 0.5 * s * (aR - aL)


def _with_ghosts(U: np.ndarray, bc: str, ubar: EquilibriumPoint) -> np.ndarray:
    if bc == "periodic":
        return np.concatenate([U[:, -1:], U, U[:, :1]], axis=1)
    g = ubar.as_array()[:, None]
    return np.concatenate([g, U, g], axis=1)


def rhs(U: np.ndarray, cfg: SimConfig) -> np.ndarray:
    """Semi-discrete right-hand side -(f_{i+1/2} - f_{i-1/2})/dx + G(u_i)."""
    ubar, _ = _equilibrium_data(cfg.params)
    ext = _with_ghosts(U, cfg.bc, ubar)
    f = numerical_flux(ext[:, :-1], ext[:, 1:], cfg.params)
    return -(f[:, 1:] - f[:, :-1]) / cfg.grid.dx + reaction(U, cfg.params).as_array()


def stable_dt(state: FieldState, cfg: SimConfig) -> float:
    """Time step from the acoustic CFL, the source cap and their combination.

    The combined bound dt (s/dx + rho/2) <= cfl keeps the grid-scale mode,
    damped both by Rusanov diffusion (2 s/dx) and by the source (rho),
    inside the real stability interval [-2, 0] of Heun's method.
    """
    s = max_wave_speed(state, cfg.params)
    rho = _equilibrium_data(cfg.params)[1]
    dx = cfg.grid.dx
    dt = min(cfg.cfl * dx / s, source_dt_cap(cfg.params), cfg.cfl / (s / dx + 0.5 * rho))
    if cfg.dt_max is not None:
        dt = min(dt, cfg.dt_max)
    return dt


def _stage(U, cfg, field):
    try:
        return rhs(U, cfg)
    except (DomainError, FloatingPointError) as exc:
        if isinstance(exc, ComplexEigenvalues):
            raise
        check_field(U, cfg.params, cfg.floor, field)
        raise LeftHyperbolicDomain(str(exc), field=field) from exc


def step(state: FieldState, cfg: SimConfig, dt: float | None = None) -> FieldState:
    """One Heun (SSP-RK2) step; the result is validated cell by cell."""
    if dt is None:
        dt = stable_dt(state, cfg)
    U0 = state.U
    k0 = _stage(U0, cfg, state)
    U1 = U0 + dt * k0
    check_field(U1, cfg.params, cfg.floor, state)
    k1 = _stage(U1, cfg, state)
    U2 = 0.5 * U0 + 0.5 * (U1 + dt * k1)
    check_field(U2, cfg.params, cfg.floor, state)
    return FieldState(U2, state.t + dt, state.step + 1)


@dataclass
class SimulationResult:
    final: FieldState
    snapshots: list[FieldState]
    trace: NormTrace
    steps: int
    max_wave_speed: float
    stayed_in_omega: bool
    dissipative: bool


class _TraceRecorder:
    def __init__(self, ubar, dx, bc):
        self.ubar, self.dx, self.bc = ubar, dx, bc
        self.rows = []

    def add(self, state: FieldState):
        self.rows.append((state.t,) + discrete_norms(state, self.ubar, self.dx, self.bc))

    def trace(self) -> NormTrace:
        cols = np.array(self.rows).reshape(-1, 4).T
        return NormTrace(cols[0], cols[1], cols[2], cols[3], self.dx)


def simulate(cfg: SimConfig) -> SimulationResult:
    """Advance the perturbed equilibrium to ``cfg.t_end``.

    Norms are recorded every step; snapshots at step 0, every
    ``snapshot_every`` steps and at the end.  On LeftHyperbolicDomain the
    exception carries the last valid field and the partial trace in
    ``exc.field`` and ``exc.trace``.
    """
    p = cfg.params
    ubar, _ = _equilibrium_data(p)
    dissipative = is_totally_dissipative(p).verdict
    if not dissipative:
        warnings.warn("parameters are not totally dissipative at equilibrium; decay is not guaranteed",
                      RuntimeWarning, stacklevel=2)
    state = init_perturbation(cfg)
    rec = _TraceRecorder(ubar, cfg.grid.dx, cfg.bc)
    rec.add(state)
    snapshots = [state.copy()]
    smax = max_wave_speed(state, p)
    in_omega = bool(np.max(np.abs(state.U - ubar.as_array()[:, None])) <= cfg.omega_radius)

    while state.t < cfg.t_end:
        dt = stable_dt(state, cfg)
        remaining = cfg.t_end - state.t
        if dt >= remaining or remaining - dt < 1e-12 * cfg.t_end:
            dt = remaining
        try:
            new = step(state, cfg, dt)
        except LeftHyperbolicDomain as exc:
            exc.field = state
            exc.trace = rec.trace()
            raise
        if cfg.t_end - new.t < 1e-12 * cfg.t_end:
            new.t = cfg.t_end
        state = new
        rec.add(state)
        smax = max(smax, max_wave_speed(state, p))
        in_omega &= bool(np.max(np.abs(state.U - ubar.as_array()[:, None])) <= cfg.omega_radius)
        if cfg.snapshot_every and state.step % cfg.snapshot_every == 0:
            snapshots.append(state.copy())

    if snapshots[-1].step != state.step:
        snapshots.append(state.copy())
    return SimulationResult(
        final=state,
        snapshots=snapshots,
        trace=rec.trace(),
        steps=state.step,
        max_wave_speed=smax,
        stayed_in_omega=in_omega,
        dissipative=dissipative,
    )
