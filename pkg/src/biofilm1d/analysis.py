"""Discrete Sobolev norms of the deviation from equilibrium and decay fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooSmall, InsufficientData, NonPositiveNorm, OutOfRange

MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class NormTrace:
    t: np.ndarray
    l2: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    dx: float

    def __post_init__(self):
        for name in ("t", "l2", "h1", "h2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = len(self.t)
        if not all(len(getattr(self, k)) == n for k in ("l2", "h1", "h2")):
            raise ValueError("trace columns must have equal length")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("trace times must be strictly increasing")
        if np.any(self.l2 < 0) or np.any(self.h1 < 0) or np.any(self.h2 < 0):
            raise ValueError("norms must be nonnegative")

    @property
    def energy(self) -> np.ndarray:
        return 0.5 * self.h2**2

    def __len__(self):
        return len(self.t)

    def norm(self, l: int) -> np.ndarray:
        try:
            return {0: self.l2, 1: self.h1, 2: self.h2}[l]
        except KeyError:
            raise ValueError(f"Sobolev index must be 0, 1 or 2, got {l!r}") from None


def _d1(w, dx, periodic):
    if periodic:
        return (np.roll(w, -1, axis=-1) - np.roll(w, 1, axis=-1)) / (2 * dx)
    return np.gradient(w, dx, axis=-1, edge_order=2)


def _d2(w, dx, periodic):
    if periodic:
        return (np.roll(w, -1, axis=-1) - 2 * w + np.roll(w, 1, axis=-1)) / dx**2
    out = np.empty_like(w)
    out[..., 1:-1] = (w[..., 2:] - 2 * w[..., 1:-1] + w[..., :-2]) / dx**2
    # second-order one-sided closures
    out[..., 0] = (2 * w[..., 0] - 5 * w[..., 1] + 4 * w[..., 2] - w[..., 3]) / dx**2
    out[..., -1] = (2 * w[..., -1] - 5 * w[..., -2] + 4 * w[..., -3] - w[..., -4]) / dx**2
    return out


def discrete_norms(field, ubar, dx: float, bc: str = "equilibrium-dirichlet"):
    """(l2, h1, h2) of w = u - ubar on a uniform grid.

    ``field`` is a FieldState or a (4, nx) array; ``ubar`` an
    EquilibriumPoint or length-4 array.  Derivatives use second-order
    central differences, wrapped for periodic grids and closed with
    one-sided stencils otherwise.
    """
    U = np.asarray(getattr(field, "U", field), dtype=float)
    if U.shape[-1] < 5:
        raise GridTooSmall(f"need at least 5 cells, got {U.shape[-1]}")
    ub = np.asarray(ubar.as_array() if hasattr(ubar, "as_array") else ubar, dtype=float)
    w = U - ub.reshape((-1,) + (1,) * (U.ndim - 1))
    periodic = bc == "periodic"
    l2_sq = np.sum(w**2) * dx
    d1_sq = np.sum(_d1(w, dx, periodic) ** 2) * dx
    d2_sq = np.sum(_d2(w, dx, periodic) ** 2) * dx
    return float(np.sqrt(l2_sq)), float(np.sqrt(l2_sq + d1_sq)), float(np.sqrt(l2_sq + d1_sq + d2_sq))


def functional_N(trace: NormTrace, l: int, t: float) -> float:
    """sqrt( sup_{tau<=t} ||w||_l^2 + int_0^t ||w||_l^2 dtau ), trapezoidal in time."""
    ts = trace.t
    if len(ts) == 0 or t < ts[0] or t > ts[-1]:
        raise OutOfRange(f"t={t} outside trace [{ts[0] if len(ts) else None}, {ts[-1] if len(ts) else None}]")
    sq = trace.norm(l) ** 2
    k = np.searchsorted(ts, t, side="right")
    tt = ts[:k]
    yy = sq[:k]
    if tt[-1] < t:
        tt = np.append(tt, t)
        yy = np.append(yy, np.interp(t, ts, sq))
    integral = np.trapezoid(yy, tt) if len(tt) > 1 else 0.0
    return float(np.sqrt(yy.max() + integral))


@dataclass(frozen=True)
class DecayFit:
    beta: float
    C1: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int
    shrunk: bool = False


def fit_decay(trace: NormTrace, window: tuple[float, float] | None = None,
              start_fraction: float = 0.5) -> DecayFit:
    """Least-squares fit of ln h2(t) = ln(C1 h2(0)) - beta t over a window.

    Without an explicit ``window`` the fit covers the trace from
    ``start_fraction`` of its duration to the end.  If h2 reaches zero
    inside the window the window is cut just before it (``shrunk``).
    """
    t = trace.t
    h2 = trace.h2
    if len(t) == 0:
        raise InsufficientData("empty trace")
    if window is None:
        t0 = t[0] + start_fraction * (t[-1] - t[0])
        window = (t0, t[-1])
    lo, hi = window
    if lo < t[0] or hi > t[-1] or lo >= hi:
        raise OutOfRange(f"window {window} not inside trace [{t[0]}, {t[-1]}]")
    idx = np.flatnonzero((t >= lo) & (t <= hi))
    if len(idx) < MIN_FIT_SAMPLES:
        raise InsufficientData(f"window holds {len(idx)} samples, need {MIN_FIT_SAMPLES}")

    shrunk = False
    bad = np.flatnonzero(h2[idx] <= 0)
    if len(bad):
        idx = idx[: bad[0]]
        shrunk = True
        if len(idx) < MIN_FIT_SAMPLES:
            raise NonPositiveNorm(
                f"h2 vanishes at t={t[idx[-1] + 1] if len(idx) else lo}; "
                f"only {len(idx)} positive samples left in window"
            )
    ts = t[idx]
    ys = np.log(h2[idx])
    slope, intercept = np.polyfit(ts, ys, 1)
    resid = ys - (slope * ts + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    C1 = float(np.exp(intercept) / h2[0]) if h2[0] > 0 else float("nan")
    return DecayFit(
        beta=float(-slope), C1=C1, r_squared=r2,
        window=(float(ts[0]), float(ts[-1])), n_samples=len(idx), shrunk=shrunk,
    )
