"""Reduced four-equation biofilm mixture model.

The unknowns are the volume fractions of active bacteria ``B``, EPS ``E``,
dead cells ``D`` and the solid-phase velocity ``v``.  The liquid fraction is
slaved to them through saturation, ``L = 1 - (B + E + D)``, and the liquid
velocity through the divergence-free mixture velocity, so the system reads

    d_t u + d_x F(u) = G(u),   u = (B, E, D, v).

Every function here is pure and accepts either scalars or numpy arrays in
the fields of :class:`PhaseState` (arrays are broadcast cell-wise, which is
how the solver uses them).
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import NamedTuple

import numpy as np

from .errors import ComplexEigenvalues, DomainError, InvalidParameter, NotSymmetrizable

RATE_FIELDS = ("kB", "kE", "kD", "kN", "eps")


class PhaseState(NamedTuple):
    B: float | np.ndarray
    E: float | np.ndarray
    D: float | np.ndarray
    v: float | np.ndarray

    @property
    def L(self):
        return liquid_fraction(self)

    def as_array(self) -> np.ndarray:
        return np.asarray(np.stack(np.broadcast_arrays(*self)), dtype=float)


@dataclass(frozen=True)
class ModelParams:
    """Physical coefficients of the model.

    Rates are in 1/time, ``gamma`` is a squared velocity (it sets the sound
    speed), ``M`` is the interphase friction and ``alpha`` is dimensionless.
    """

    kB: float
    kE: float
    kD: float
    kN: float
    eps: float
    alpha: float
    gamma: float = 1.0
    M: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not np.isfinite(val) or val <= 0:
                raise InvalidParameter(f"{f.name} must be finite and > 0, got {val!r}")

    def scaled(self, factor: float) -> "ModelParams":
        """All rate constants and M multiplied by ``factor``; alpha, gamma kept."""
        changes = {name: getattr(self, name) * factor for name in RATE_FIELDS + ("M",)}
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# rates of the reference parameter table; gamma and M are not tabulated
TABLE1 = ModelParams(kB=8e-6, kE=12e-6, kD=2e-7, kN=1e-6, eps=1.25e-7, alpha=0.25, gamma=1.0, M=1e-6)
FAST_SCALE = 1e6
FAST = TABLE1.scaled(FAST_SCALE)


class ReactionVector(NamedTuple):
    gB: float | np.ndarray
    gE: float | np.ndarray
    gD: float | np.ndarray
    gv: float | np.ndarray

    @property
    def gL(self):
        return -(self.gB + self.gE + self.gD)

    def as_array(self) -> np.ndarray:
        return np.asarray(np.stack(np.broadcast_arrays(*self)), dtype=float)


def as_state(u) -> PhaseState:
    if isinstance(u, PhaseState):
        return u
    arr = np.asarray(u, dtype=float)
    if arr.shape[0] != 4:
        raise ValueError(f"expected 4 components in the leading axis, got shape {arr.shape}")
    return PhaseState(*arr)


def liquid_fraction(u) -> float | np.ndarray:
    u = as_state(u)
    return 1.0 - (u.B + u.E + u.D)


def _interior_L(u: PhaseState):
    L = liquid_fraction(u)
    ok = (L > 0.0) & (L < 1.0)
    if not np.all(ok):
        raise DomainError(f"liquid fraction must satisfy 0 < L < 1, got L={L}")
    return L


def liquid_velocity(u) -> float | np.ndarray:
    """Liquid velocity recovered from a divergence-free mixture velocity."""
    u = as_state(u)
    L = _interior_L(u)
    return (L - 1.0) / L * u.v


def reaction(u, p: ModelParams) -> ReactionVector:
    u = as_state(u)
    L = _interior_L(u)
    gB = p.kB * u.B * L - p.kD * u.B
    gE = p.kE * u.B * L - p.eps * u.E
    gD = p.alpha * p.kD * u.B - p.kN * u.D
    gL = -(gB + gE + gD)
    gv = (gL - p.M) * u.v / (L * (1.0 - L))
    return ReactionVector(gB, gE, gD, gv)


def flux(u, p: ModelParams) -> np.ndarray:
    u = as_state(u)
    L = _interior_L(u)
    v = u.v
    momentum = (3.0 * L - 2.0) * v**2 / (2.0 * L) + p.gamma * (L + np.log(1.0 - L))
    return np.stack(np.broadcast_arrays(u.B * v, u.E * v, u.D * v, momentum)).astype(float)


def eta(u, p: ModelParams):
    u = as_state(u)
    L = _interior_L(u)
    return L * p.gamma / (1.0 - L) - u.v**2 / L**2


def delta(u, p: ModelParams):
    u = as_state(u)
    L = _interior_L(u)
    return L * p.gamma / (1.0 - L) - u.v**2 / L


def jacobian(u, p: ModelParams) -> np.ndarray:
    """Flux Jacobian at a single state (4x4)."""
    u = as_state(u)
    L = _interior_L(u)
    n = eta(u, p)
    B, E, D, v = (float(c) for c in u)
    return np.array(
        [
            [v, 0.0, 0.0, B],
            [0.0, v, 0.0, E],
            [0.0, 0.0, v, D],
            [n, n, n, (3.0 * L - 2.0) * v / L],
        ]
    )


def symmetrizer(u, p: ModelParams) -> np.ndarray:
    """Diagonal A0 with A0 @ jacobian(u) symmetric."""
    u = as_state(u)
    _interior_L(u)
    B, E, D, _ = (float(c) for c in u)
    if E == 0.0 or D == 0.0:
        raise DomainError("symmetrizer is singular for E = 0 or D = 0")
    n = float(eta(u, p))
    if n <= 0.0:
        raise NotSymmetrizable(f"eta = {n} <= 0")
    return np.diag([n, B * n / E, B * n / D, B])


def eigenvalues(u, p: ModelParams) -> np.ndarray:
    """Characteristic speeds in ascending order.

    For a single state returns shape (4,); for array-valued fields returns
    shape (4, ...) sorted along the first axis.
    """
    u = as_state(u)
    L = _interior_L(u)
    d = delta(u, p)
    if np.any(d < 0):
        raise ComplexEigenvalues(f"Delta < 0 (min {np.min(d)}): eigenvalues are complex")
    v = np.asarray(u.v, dtype=float)
    centre = (2.0 * L - 1.0) * v / L
    root = np.sqrt((1.0 - L) * d)
    lam = np.stack(np.broadcast_arrays(v, v, centre - root, centre + root)).astype(float)
    return np.sort(lam, axis=0)


def spectral_radius(u, p: ModelParams):
    """max |lambda| per state, using the closed-form eigenvalues."""
    return np.max(np.abs(eigenvalues(u, p)), axis=0)


def hyperbolic_bound(L, gamma):
    """Velocity bound |v| < L^{3/2} gamma^{1/2} / (1-L)^{1/2} defining W."""
    return L**1.5 * np.sqrt(gamma) / np.sqrt(1.0 - L)


def in_hyperbolic_domain(u, p: ModelParams):
    u = as_state(u)
    L = liquid_fraction(u)
    inside = (L > 0.0) & (L < 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = hyperbolic_bound(np.where(inside, L, 0.5), p.gamma)
    result = inside & (np.abs(u.v) < bound)
    return bool(result) if np.ndim(result) == 0 else result
