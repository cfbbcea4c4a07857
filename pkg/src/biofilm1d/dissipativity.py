"""Equilibrium, dissipation matrix and the total-dissipativity test.

The source is written as ``G(u) = D(u, ubar) (u - ubar)`` and the system is
totally dissipative near ``ubar`` when the symmetric part of
``A0(ubar) D(ubar, ubar)`` is negative definite.  That matrix splits into a
3x3 block for (B, E, D) and a decoupled friction entry for ``v``; the block
is tested with the Routh-Hurwitz conditions on its characteristic cubic and
cross-checked against a symmetric eigensolve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, NoPositiveEquilibrium
from .model import ModelParams, PhaseState, as_state, liquid_fraction, reaction, symmetrizer

# max eigenvalue must be below -MARGIN * ||S||_max to count as definite
DEFINITE_MARGIN = 1e-14
FAMILY_EPS = 1.25e-7


@dataclass(frozen=True)
class EquilibriumPoint:
    Bbar: float
    Ebar: float
    Dbar: float
    vbar: float
    Lbar: float

    @property
    def state(self) -> PhaseState:
        return PhaseState(self.Bbar, self.Ebar, self.Dbar, self.vbar)

    def as_array(self) -> np.ndarray:
        return np.array([self.Bbar, self.Ebar, self.Dbar, self.vbar])


@dataclass(frozen=True)
class DissipativityReport:
    a1: float
    a2: float
    a3: float
    rh_ok: tuple[bool, bool, bool]
    block44: float
    block44_negative: bool
    max_eigenvalue: float
    marginal: bool
    verdict: bool
    equilibrium: EquilibriumPoint = field(repr=False)


def equilibrium(p: ModelParams) -> EquilibriumPoint:
    """The unique interior zero of the reaction terms (v = 0, L = kD/kB)."""
    if p.kB <= p.kD:
        raise NoPositiveEquilibrium(
            f"positive volume fractions at equilibrium require kB > kD (kB={p.kB}, kD={p.kD})"
        )
    e_ratio = p.kE * p.kD / (p.eps * p.kB)
    d_ratio = p.alpha * p.kD / p.kN
    B = (1.0 - p.kD / p.kB) / (1.0 + d_ratio + e_ratio)
    E = B * e_ratio
    D = B * d_ratio
    # analytic L avoids the cancellation in 1 - (B + E + D)
    return EquilibriumPoint(B, E, D, 0.0, p.kD / p.kB)


def dissipation_matrix(u, ubar: EquilibriumPoint, p: ModelParams) -> np.ndarray:
    """4x4 matrix D(u, ubar) with G(u) = D(u, ubar) @ (u - ubar) exactly.

    Reduces at ``u = ubar`` to the equilibrium matrix with rows
    (-Bb kB, -Bb kB, -Bb kB, 0), (kE (Lb - Bb), -eps - Bb kE, -Bb kE, 0),
    (alpha kD, 0, -kN, 0) and friction entry -kB^2 M / (kD (kB - kD)).
    """
    u = as_state(u)
    B, E, D, _ = (float(c) for c in u)
    g = reaction(u, p)
    L = float(liquid_fraction(u))
    Bb, Eb, Lb = ubar.Bbar, ubar.Ebar, ubar.Lbar
    c = p.eps / (Bb * Lb)
    return np.array(
        [
            [-B * p.kB, -B * p.kB, -B * p.kB, 0.0],
            [c * Eb * (L - Bb), -p.eps * (Eb + Lb) / Lb, -p.eps * Eb / Lb, 0.0],
            [p.kN * D / Bb, 0.0, -p.kN * B / Bb, 0.0],
            [0.0, 0.0, 0.0, (float(g.gL) - p.M) / (L * (1.0 - L))],
        ]
    )


def symmetrized_A0D(p: ModelParams) -> np.ndarray:
    """Symmetric part of A0(ubar) @ D(ubar, ubar)."""
    ubar = equilibrium(p)
    prod = symmetrizer(ubar.state, p) @ dissipation_matrix(ubar.state, ubar, p)
    return 0.5 * (prod + prod.T)


def _block_scale(p: ModelParams) -> float:
    # eta(ubar) = kD gamma / (kB - kD); dividing it out of the first three
    # rows gives the rate^2 normalization used by the closed-form coefficients
    return (p.kB - p.kD) / p.gamma


def rh_coefficients(p: ModelParams) -> tuple[float, float, float]:
    """Coefficients of lambda^3 + a1 lambda^2 + a2 lambda + a3 for the 3x3 block.

    The block is rescaled by the positive factor (kB - kD)/gamma so the
    coefficients carry units rate^2, rate^4, rate^6; signs are unaffected.
    """
    S = symmetrized_A0D(p)[:3, :3] * _block_scale(p)
    a1 = -np.trace(S)
    a2 = (
        S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]
        + S[0, 0] * S[2, 2] - S[0, 2] * S[2, 0]
        + S[1, 1] * S[2, 2] - S[1, 2] * S[2, 1]
    )
    a3 = -np.linalg.det(S)
    return float(a1), float(a2), float(a3)


def closed_form_coefficients(p: ModelParams) -> tuple[float, float, float]:
    """Published closed-form expressions for (a1, a2, a3), kept as a diagnostic.

    Transcribed as printed; they are known to disagree with the exact
    coefficients in some terms, see :func:`coefficient_crosscheck`.
    """
    Bb = equilibrium(p).Bbar
    kB, kE, kD, kN, e, al = p.kB, p.kE, p.kD, p.kN, p.eps, p.alpha
    a1 = Bb * kB * kD + e**2 * kB / kE + e * Bb + kN**2 / al
    a2 = (
        e**2 * Bb * kB**2 * kD / kE
        + e * Bb * kB * kN**2 / al
        + e * kB * kD * kN**2 / al
        + Bb * kB * kD * (e * Bb * kB + e * kD + kD * kN + e**2) / 2
        - Bb**2 * kB**2 * (kD**2 + e**2) / 2
        - kD**2 * (kN**2 + e**2) / 4
    )
    a3 = (
        e**2 * Bb * kB**2 * kD**2 * kN / (2 * kE)
        + e**2 * Bb * kB**2 * kD * kN**2 / (al * kE)
        + e * Bb * kB * kD * kN**2 * (Bb * kB + e + kD) / (2 * al)
        + e * Bb * kB * kD**2 * kN * (e + Bb * kB) / 4
        - e * Bb * kB * kD * (e * Bb * kB * kN + e * Bb * kB * kD + kD * kN**2) / 4
        - e**2 * kB * kD**2 * (kN**2 + Bb**2 * kB**2) / (4 * kE)
        - kN**2 * (e**2 * kD**2 + e**2 * Bb**2 * kB**2 + Bb**2 * kB**2 * kD**2) / (4 * al)
    )
    return a1, a2, a3


def coefficient_crosscheck(p: ModelParams) -> dict:
    """Relative mismatch between closed-form and exact coefficients."""
    exact = rh_coefficients(p)
    printed = closed_form_coefficients(p)
    out = {}
    for name, x, y in zip(("a1", "a2", "a3"), exact, printed):
        out[name] = {
            "exact": x,
            "closed_form": y,
            "rel_diff": abs(x - y) / abs(x) if x != 0 else float("inf"),
        }
    return out


def rh_check(a1: float, a2: float, a3: float) -> tuple[bool, bool, bool]:
    return (a1 > 0, a3 > 0, a1 * a2 - a3 > 0)


def is_totally_dissipative(p: ModelParams) -> DissipativityReport:
    ubar = equilibrium(p)
    S = symmetrized_A0D(p)
    a1, a2, a3 = rh_coefficients(p)
    rh = rh_check(a1, a2, a3)
    block44 = float(S[3, 3])
    lam_max = float(np.linalg.eigvalsh(S).max())
    scale = float(np.abs(S).max())
    marginal = abs(lam_max) <= DEFINITE_MARGIN * scale
    verdict = all(rh) and block44 < 0 and not marginal
    return DissipativityReport(
        a1=a1,
        a2=a2,
        a3=a3,
        rh_ok=rh,
        block44=block44,
        block44_negative=block44 < 0,
        max_eigenvalue=lam_max,
        marginal=marginal,
        verdict=verdict,
        equilibrium=ubar,
    )


def param_family(a: float, gamma: float = 1.0, M: float = 1e-6) -> ModelParams:
    """One-parameter family eps fixed, kN = 10a eps, kE = 100a eps, kD = 2a eps, kB = 70a eps."""
    if not a > 0:
        raise InvalidParameter(f"family parameter a must be > 0, got {a!r}")
    e = FAMILY_EPS
    return ModelParams(
        kB=70 * a * e, kE=100 * a * e, kD=2 * a * e, kN=10 * a * e, eps=e,
        alpha=0.25, gamma=gamma, M=M,
    )


@dataclass(frozen=True)
class SweepRow:
    a: float
    a1: float
    a2: float
    a3: float
    rh1: bool
    rh2: bool
    rh3: bool
    verdict: bool


@dataclass
class SweepResult:
    rows: list[SweepRow]
    # refined (a_lo, a_hi) brackets around each verdict change
    transitions: list[tuple[float, float]]

    @property
    def a_star(self) -> list[float]:
        return [0.5 * (lo + hi) for lo, hi in self.transitions]


def _row(a: float, defaults: dict) -> SweepRow:
    r = is_totally_dissipative(param_family(a, **defaults))
    return SweepRow(a, r.a1, r.a2, r.a3, *r.rh_ok, r.verdict)


def sweep(a_min: float, a_max: float, step: float, defaults: dict | None = None,
          tol: float = 1e-4) -> SweepResult:
    """Dissipativity verdict over the parameter family on a uniform grid in a.

    Each sign change of the verdict between neighbouring grid points is
    refined by bisection until the bracket is narrower than ``tol``.
    ``defaults`` supplies ``gamma`` and ``M`` for the family.
    """
    defaults = dict(defaults or {})
    if not (np.isfinite(a_min) and np.isfinite(a_max) and np.isfinite(step)):
        raise InvalidParameter("sweep range must be finite")
    if a_min <= 0 or a_max < a_min or step <= 0:
        raise InvalidParameter(f"malformed sweep range a_min={a_min}, a_max={a_max}, step={step}")
    n = int(round((a_max - a_min) / step)) + 1
    grid = [round(a_min + i * step, 12) for i in range(n)]
    rows = [_row(a, defaults) for a in grid]

    transitions = []
    for left, right in zip(rows, rows[1:]):
        if left.verdict == right.verdict:
            continue
        lo, hi = left.a, right.a
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if is_totally_dissipative(param_family(mid, **defaults)).verdict == left.verdict:
                lo = mid
            else:
                hi = mid
        transitions.append((lo, hi))
    return SweepResult(rows, transitions)


def omega_radius_check(u, ubar: EquilibriumPoint, r: float) -> bool:
    """True if every state lies in the closed max-norm ball of radius r around ubar."""
    arr = np.asarray(as_state(u).as_array() if isinstance(u, PhaseState) else u, dtype=float)
    dev = arr - ubar.as_array().reshape((4,) + (1,) * (arr.ndim - 1))
    return bool(np.max(np.abs(dev)) <= r)


__all__ = [
    "EquilibriumPoint",
    "DissipativityReport",
    "SweepRow",
    "SweepResult",
    "equilibrium",
    "dissipation_matrix",
    "symmetrized_A0D",
    "rh_coefficients",
    "closed_form_coefficients",
    "coefficient_crosscheck",
    "rh_check",
    "is_totally_dissipative",
    "param_family",
    "sweep",
    "omega_radius_check",
]
