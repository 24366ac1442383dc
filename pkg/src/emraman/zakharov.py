"""Split-step spectral solver for the envelope (Zakharov) system

    i (d_t + c d_x) E + (1/(2 omega)) Lap_Y E - (1/(2 omega theta_e^2)) E = (1/(2 omega)) n E,
    (d_t^2 - (alpha_ie + 1)^2 Lap_Y) n = -(2/omega^2) Lap_Y |E|^2,

with c = k / omega, on a periodic box in (x, Y), Y of dimension 1 or 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from .spectral import PlasmaParams


class ZakharovError(RuntimeError):
    """Solver breakdown: blow-up guard or per-step mass drift."""


@dataclass(frozen=True)
class ZakharovGrid:
    """Periodic grid: axis 0 is x, the remaining ``dim_y`` axes are Y."""

    n_points: int = 128
    length: float = 40.0
    dim_y: int = 1
    dt: float = 1e-3

    def __post_init__(self) -> None:
        if self.dim_y not in (1, 2):
            raise ValueError("dim_y must be 1 or 2")
        if self.n_points < 4 or self.n_points % 2:
            raise ValueError("n_points must be an even integer >= 4")
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def ndim(self) -> int:
        return 1 + self.dim_y

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.ndim

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def cell_volume(self) -> float:
        return self.dx**self.ndim

    def coords(self) -> List[np.ndarray]:
        x = (np.arange(self.n_points) - self.n_points // 2) * self.dx
        return list(np.meshgrid(*([x] * self.ndim), indexing="ij"))

    def _freqs(self, real_last: bool) -> List[np.ndarray]:
        full = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)
        last = 2.0 * np.pi * np.fft.rfftfreq(self.n_points, d=self.dx) if real_last else full
        axes = [full] * (self.ndim - 1) + [last]
        return list(np.meshgrid(*axes, indexing="ij"))

    def wavenumbers(self) -> List[np.ndarray]:
        return self._freqs(False)

    def real_wavenumbers(self) -> List[np.ndarray]:
        return self._freqs(True)


@dataclass
class ZakharovState:
    E: np.ndarray
    n: np.ndarray
    n_t: np.ndarray
    time: float
    params: PlasmaParams
    grid: ZakharovGrid
    nonlinear: bool = True

    def mass(self) -> float:
        return float((np.abs(self.E) ** 2).sum() * self.grid.cell_volume)

    def amplitude(self) -> float:
        """max |E| / omega, i.e. max |g|."""
        return float(np.abs(self.E).max() / self.params.omega)

    def copy(self) -> "ZakharovState":
        return replace(self, E=self.E.copy(), n=self.n.copy(), n_t=self.n_t.copy())


def _outer_shell(grid: ZakharovGrid, fraction: float = 0.1) -> np.ndarray:
    half = grid.length / 2
    mask = np.zeros(grid.shape, dtype=bool)
    for c in grid.coords():
        mask |= np.abs(c) >= half * (1.0 - 2 * fraction)
    return mask


def init_from_wkb(
    a_envelope: Callable[..., np.ndarray] | np.ndarray,
    params: PlasmaParams,
    grid: ZakharovGrid,
    nonlinear: bool = True,
    support_level: float = 1e-3,
) -> ZakharovState:
    """E = i omega a, n = n_t = 0.

    ``a_envelope`` is an array on the grid or a callable of the coordinates.
    Raises ValueError if |a| exceeds ``support_level * max|a|`` in the outer
    tenth of the box.
    """
    a = a_envelope(*grid.coords()) if callable(a_envelope) else np.asarray(a_envelope)
    a = np.broadcast_to(np.asarray(a, dtype=complex), grid.shape).copy()
    amax = float(np.abs(a).max())
    if amax > 0 and float(np.abs(a[_outer_shell(grid)]).max()) > support_level * amax:
        raise ValueError("envelope is not localized: |a| too large in the outer 10% of the box")
    E = 1j * params.omega * a
    zero = np.zeros(grid.shape)
    return ZakharovState(E=E, n=zero.copy(), n_t=zero.copy(), time=0.0, params=params, grid=grid, nonlinear=nonlinear)


def gaussian_envelope(amplitude: float = 1.0, width: float = 2.0) -> Callable[..., np.ndarray]:
    def g(*coords: np.ndarray) -> np.ndarray:
        r2 = sum(c**2 for c in coords)
        return amplitude * np.exp(-r2 / width**2)

    return g


class _Operators:
    """Cached Fourier multipliers for one (params, grid, dt)."""

    def __init__(self, params: PlasmaParams, grid: ZakharovGrid, dt: float) -> None:
        om = params.omega
        c = params.k / om
        ks = grid.wavenumbers()
        eta2 = sum(kk**2 for kk in ks[1:])
        sym = -1j * c * ks[0] - 1j * eta2 / (2 * om) - 1j / (2 * om * params.theta_e**2)
        self.half_linear = np.exp(0.5 * dt * sym)
        rk = grid.real_wavenumbers()
        reta = np.sqrt(sum(kk**2 for kk in rk[1:]))
        self.Omega = (params.alpha_ie + 1.0) * reta
        self.cos = np.cos(self.Omega * dt)
        self.zero = self.Omega == 0.0
        safe = np.where(self.zero, 1.0, self.Omega)
        self.sin_over = np.where(self.zero, dt, np.sin(self.Omega * dt) / safe)
        self.Omega_sin = self.Omega * np.sin(self.Omega * dt)
        self.source_gain = np.where(self.zero, 0.0, 2.0 / (om**2 * (params.alpha_ie + 1.0) ** 2))
        self.dt = dt
        self.omega = om


def _linear_half(E: np.ndarray, ops: _Operators) -> np.ndarray:
    return np.fft.ifftn(np.fft.fftn(E) * ops.half_linear)


def _wave_step(n: np.ndarray, n_t: np.ndarray, F: np.ndarray, ops: _Operators) -> Tuple[np.ndarray, np.ndarray]:
    """Exact driven-oscillator update per mode with the source frozen."""
    shape = n.shape
    nh = np.fft.rfftn(n)
    vh = np.fft.rfftn(n_t)
    ph = ops.source_gain * np.fft.rfftn(F)
    dev = nh - ph
    nh_new = ph + dev * ops.cos + vh * ops.sin_over
    vh_new = -dev * ops.Omega_sin + vh * ops.cos
    axes = tuple(range(len(shape)))
    return np.fft.irfftn(nh_new, s=shape, axes=axes), np.fft.irfftn(vh_new, s=shape, axes=axes)


def step(state: ZakharovState, dt: Optional[float] = None, _ops: Optional[_Operators] = None) -> ZakharovState:
    """One Strang step: linear(dt/2), phase(dt/2), wave(dt), phase(dt/2), linear(dt/2)."""
    h = state.grid.dt if dt is None else dt
    ops = _ops or _Operators(state.params, state.grid, h)
    om = ops.omega
    E = _linear_half(state.E, ops)
    n, n_t = state.n, state.n_t
    if state.nonlinear:
        E = E * np.exp(-0.5j * h * n / (2 * om))
        n, n_t = _wave_step(n, n_t, np.abs(E) ** 2, ops)
        E = E * np.exp(-0.5j * h * n / (2 * om))
    else:
        n, n_t = _wave_step(n, n_t, np.zeros_like(n), ops)
    E = _linear_half(E, ops)
    return replace(state, E=E, n=n, n_t=n_t, time=state.time + h)


@dataclass
class ZakharovReport:
    final: ZakharovState
    mass_drift: float
    amplitude_max: float
    steps: int
    max_step_drift: float
    amplitude_history: List[float] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "t_final": self.final.time,
            "mass_drift": self.mass_drift,
            "amplitude_max": self.amplitude_max,
            "steps": self.steps,
        }


def run_and_report(
    state: ZakharovState,
    t_final: float,
    dt: Optional[float] = None,
    blowup_factor: float = 1e3,
    step_drift_tol: float = 1e-6,
) -> ZakharovReport:
    """Integrate to ``t_final``; amplitude_max is max over the run of max|E|/omega."""
    if t_final < 0:
        raise ValueError("t_final must be >= 0")
    h = state.grid.dt if dt is None else dt
    n_steps = int(round(t_final / h)) if t_final > 0 else 0
    if n_steps and abs(n_steps * h - t_final) > 1e-9 * max(1.0, t_final):
        n_steps = int(math.ceil(t_final / h))
        h = t_final / n_steps
    ops = _Operators(state.params, state.grid, h) if n_steps else None
    m0 = state.mass()
    e0 = float(np.abs(state.E).max())
    amp = state.amplitude()
    hist = [amp]
    worst = 0.0
    cur = state
    for _ in range(n_steps):
        prev = cur.mass()
        cur = step(cur, h, ops)
        m = cur.mass()
        d = abs(m - prev) / prev if prev > 0 else 0.0
        worst = max(worst, d)
        if d > step_drift_tol:
            raise ZakharovError(f"mass drift {d:.3g} in one step at t = {cur.time:.6g}")
        emax = float(np.abs(cur.E).max())
        if e0 > 0 and emax > blowup_factor * e0:
            raise ZakharovError(f"max|E| grew beyond {blowup_factor:g} x initial at t = {cur.time:.6g}")
        a = emax / cur.params.omega
        amp = max(amp, a)
        hist.append(a)
    drift = abs(cur.mass() - m0) / m0 if m0 > 0 else 0.0
    return ZakharovReport(final=cur, mass_drift=drift, amplitude_max=amp, steps=n_steps, max_step_drift=worst,
                          amplitude_history=hist)


def free_gaussian_solution(
    params: PlasmaParams, grid: ZakharovGrid, t: float, amplitude: float = 1.0, width: float = 2.0
) -> np.ndarray:
    """Exact E(t) for the linear equation from E(0) = i omega a exp(-|.|^2/w^2) on the line."""
    om = params.omega
    c = params.k / om
    coords = grid.coords()
    a0 = width**2 / 4.0
    D = 1j / (2 * om)
    aY = a0 + D * t
    x = coords[0] - c * t
    # unwrap the transported x coordinate into the box
    x = (x + grid.length / 2) % grid.length - grid.length / 2
    out = np.exp(-(x**2) / width**2).astype(complex)
    for Y in coords[1:]:
        out = out * np.sqrt(a0 / aY) * np.exp(-(Y**2) / (4 * aY))
    return 1j * om * amplitude * np.exp(-1j * t / (2 * om * params.theta_e**2)) * out


def free_wave_mode(params: PlasmaParams, grid: ZakharovGrid, t: float, mode: int = 1) -> Tuple[np.ndarray, np.ndarray]:
    """n(0) = cos(eta Y), n_t(0) = 0 on the first Y axis, and its exact value at t."""
    Y = grid.coords()[1]
    eta = 2.0 * np.pi * mode / grid.length
    n0 = np.cos(eta * Y)
    return n0, np.cos((params.alpha_ie + 1.0) * eta * t) * n0
