"""Symbolic-flow transport systems in (t, y) and their analytic oracles.

Component i obeys

    d_t S_i + (i mu_i / eps) S_i + (dmu_i / sqrt(eps)) . grad_y S_i
        = (1 / sqrt(eps)) sum_j b_ij(y) S_j .

The fast phase and the transport are factored out exactly (the "breve"
variables); the remaining coupling system is integrated with RK4, with
relative shifts applied as Fourier phases on the periodic grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import spectral as sp
from .interaction import scalarized_coupling
from .resonance import check_pair, find_axis_resonances, resonant_xi_at_r
from .spectral import PlasmaParams

Envelope = Callable[[np.ndarray], np.ndarray]


class FlowError(ValueError):
    """Grid or time-step configuration unsuitable for a flow run."""


# ------------------------------------------------------------------ envelopes


@dataclass(frozen=True)
class EnvelopeSpec:
    """Scalar WKB amplitude g(y): ``const`` or ``gauss`` (amp * exp(-|y|^2/w^2))."""

    kind: str = "const"
    amplitude: float = 1.0
    width: float = 2.0

    def __call__(self, *coords: np.ndarray) -> np.ndarray:
        shape = np.broadcast(*coords).shape
        if self.kind == "const":
            return np.full(shape, self.amplitude, dtype=complex)
        if self.kind == "gauss":
            r2 = sum(np.asarray(c, dtype=float) ** 2 for c in coords)
            return self.amplitude * np.exp(-r2 / self.width**2).astype(complex)
        raise ValueError(f"unknown envelope kind {self.kind!r}")

    @property
    def sup(self) -> float:
        return abs(self.amplitude)

    @property
    def is_uniform(self) -> bool:
        return self.kind == "const"

    def support_radius(self, level: float = 1e-3) -> float:
        if self.kind == "const":
            return math.inf
        return self.width * math.sqrt(math.log(1.0 / level))

    @staticmethod
    def parse(text: str) -> "EnvelopeSpec":
        """``const:A`` or ``gauss:A,w``."""
        kind, _, rest = text.partition(":")
        vals = [float(v) for v in rest.split(",") if v.strip()] if rest else []
        if kind == "const":
            return EnvelopeSpec("const", vals[0] if vals else 1.0)
        if kind == "gauss":
            amp = vals[0] if vals else 1.0
            width = vals[1] if len(vals) > 1 else 2.0
            return EnvelopeSpec("gauss", amp, width)
        raise ValueError(f"unknown envelope {text!r}; use const:A or gauss:A,w")


# ------------------------------------------------------------------ specs


@dataclass
class FlowGrid:
    """Periodic transverse grid; ``dt`` defaults to a fraction of sqrt(eps)."""

    length: float = 40.0
    n_points: int = 256
    epsilon: float = 1e-4
    dim_y: int = 1
    dt: Optional[float] = None

    def __post_init__(self) -> None:
        if self.n_points < 4 or self.n_points & (self.n_points - 1):
            raise FlowError("n_points must be a power of two >= 4")
        if self.dim_y not in (1, 2):
            raise FlowError("dim_y must be 1 or 2")
        if not (0 < self.epsilon <= 1):
            raise FlowError("epsilon must lie in (0, 1]")

    @property
    def dy(self) -> float:
        return self.length / self.n_points

    def coords(self) -> List[np.ndarray]:
        y = (np.arange(self.n_points) - self.n_points // 2) * self.dy
        if self.dim_y == 1:
            return [y]
        Y1, Y2 = np.meshgrid(y, y, indexing="ij")
        return [Y1, Y2]

    def wavenumbers(self) -> List[np.ndarray]:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dy)
        if self.dim_y == 1:
            return [k]
        K1, K2 = np.meshgrid(k, k, indexing="ij")
        return [K1, K2]

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.dim_y


@dataclass
class Coupling:
    """Edge i <- j with coefficient c * envelope(y)."""

    target: int
    source: int
    coefficient: complex
    envelope: EnvelopeSpec


@dataclass
class BlockSpec:
    """Frozen-frequency block: per-component mu_i, dmu_i (vector) and couplings."""

    labels: Tuple[int, ...]
    mu: Tuple[float, ...]
    dmu: Tuple[Tuple[float, ...], ...]
    couplings: List[Coupling] = field(default_factory=list)
    frozen: Dict[str, float] = field(default_factory=dict)
    kind: str = "pair"

    @property
    def size(self) -> int:
        return len(self.labels)

    def without_coupling(self) -> "BlockSpec":
        return BlockSpec(self.labels, self.mu, self.dmu, [], dict(self.frozen), self.kind)

    def sup_envelope(self) -> float:
        return max((c.envelope.sup for c in self.couplings), default=0.0)


def _mu_and_gradient(params: PlasmaParams, label: int, xi: float, eta: Tuple[float, float]) -> Tuple[float, np.ndarray]:
    f = sp.Frequency(xi, eta)
    mu = sp.eigenvalues(params, f, with_epsilon=False)[label]
    grad = sp.eigenvalue_gradient(params, label, f)[1:]
    return float(mu), grad


def pair_block_spec(
    params: PlasmaParams,
    pair: Sequence[int],
    xi: float,
    eta: Tuple[float, float] = (0.0, 0.0),
    envelope: Optional[EnvelopeSpec] = None,
    dim_y: int = 1,
    coupled: bool = True,
) -> BlockSpec:
    """2-block spec: mu_j = lambda_j(xi+k) - omega, mu_j' = lambda_j'(xi).

    Couplings are g(y) c12 and conj(g(y)) c21 from the scalarized
    interaction coefficients.
    """
    j, jj = check_pair(pair)
    env = envelope or EnvelopeSpec()
    mu_a, ga = _mu_and_gradient(params, j, xi + params.k, eta)
    mu_b, gb = _mu_and_gradient(params, jj, xi, eta)
    mu_a -= params.omega
    couplings: List[Coupling] = []
    if coupled:
        sc = scalarized_coupling(params, (j, jj), (xi, eta[0], eta[1]))
        couplings = [Coupling(0, 1, sc.c12, env), Coupling(1, 0, sc.c21, env)]
    dmu = (tuple(ga[:dim_y]), tuple(gb[:dim_y]))
    return BlockSpec(
        labels=(j, jj),
        mu=(mu_a, mu_b),
        dmu=dmu,
        couplings=couplings,
        frozen={"xi": xi, "eta1": eta[0], "eta2": eta[1]},
    )


def triplet_block_spec(
    params: PlasmaParams,
    triplet: Sequence[int],
    xi: float,
    eta: Tuple[float, float] = (0.0, 0.0),
    envelope: Optional[EnvelopeSpec] = None,
    dim_y: int = 1,
) -> BlockSpec:
    """3-block spec (a, b, c) at xi + k, xi, xi - k.

    mu_a = lambda_a(xi+k) - omega, mu_b = lambda_b(xi), mu_c = lambda_c(xi-k) + omega.
    Edge coefficients are the rank-one scalars of the pairs (a, b) at xi and
    (b, c) at xi - k.
    """
    from .interaction import rank_one_coupling

    a, b, c = (int(v) for v in triplet)
    env = envelope or EnvelopeSpec()
    k = params.k
    mu_a, ga = _mu_and_gradient(params, a, xi + k, eta)
    mu_b, gb = _mu_and_gradient(params, b, xi, eta)
    mu_c, gc = _mu_and_gradient(params, c, xi - k, eta)
    ab, ba = rank_one_coupling(params, (a, b), (xi, eta[0], eta[1]))
    bc, cb = rank_one_coupling(params, (b, c), (xi - k, eta[0], eta[1]))
    couplings = [
        Coupling(0, 1, ab, env),
        Coupling(1, 0, ba, env),
        Coupling(1, 2, bc, env),
        Coupling(2, 1, cb, env),
    ]
    return BlockSpec(
        labels=(a, b, c),
        mu=(mu_a - params.omega, mu_b, mu_c + params.omega),
        dmu=(tuple(ga[:dim_y]), tuple(gb[:dim_y]), tuple(gc[:dim_y])),
        couplings=[cp for cp in couplings if cp.coefficient != 0],
        frozen={"xi": xi, "eta1": eta[0], "eta2": eta[1]},
        kind="triplet",
    )


def manual_pair_spec(b_plus: complex, b_minus: complex, envelope: Optional[EnvelopeSpec] = None,
                     mu: Tuple[float, float] = (0.0, 0.0), dmu: Tuple[float, float] = (0.0, 0.0)) -> BlockSpec:
    """2-block spec with prescribed scalar couplings (1-D transverse)."""
    env = envelope or EnvelopeSpec()
    return BlockSpec(
        labels=(1, 2),
        mu=mu,
        dmu=((dmu[0],), (dmu[1],)),
        couplings=[Coupling(0, 1, b_plus, env), Coupling(1, 0, b_minus, env)],
    )


def off_axis_resonance(params: PlasmaParams, pair: Sequence[int], r: float, branch_index: int = 0) -> Tuple[float, np.ndarray]:
    """A resonant frequency (xi, r) with eta = (r, 0) and its mismatch nu."""
    roots = resonant_xi_at_r(params, pair, r)
    if not roots:
        raise FlowError(f"no resonance of {pair} at r = {r}")
    xi = roots[branch_index]
    j, jj = check_pair(pair)
    _, ga = _mu_and_gradient(params, j, xi + params.k, (r, 0.0))
    _, gb = _mu_and_gradient(params, jj, xi, (r, 0.0))
    return xi, ga - gb


def backward_root(params: PlasmaParams, pair: Sequence[int] = (1, 4)) -> float:
    """The axis root of largest |xi + k|-trace, i.e. the backward Raman root."""
    from .interaction import raman_direction

    recs = find_axis_resonances(params, pair)
    if not recs:
        raise FlowError(f"no axis resonance for {pair}")
    for rec in recs:
        if raman_direction(params, check_pair(pair), rec.xi) == "backward":
            return rec.xi
    return recs[0].xi


# ------------------------------------------------------------------ trajectories


@dataclass
class FlowTrajectory:
    times: np.ndarray
    snapshots: List[np.ndarray]
    sup_norms: np.ndarray
    l2_norms: np.ndarray
    component_sup: np.ndarray
    epsilon: float
    fitted_rate: Optional[float] = None
    fit_window: Optional[Tuple[float, float]] = None
    r_squared: Optional[float] = None

    def recompute_norms(self, dy: float, dim_y: int) -> Tuple[np.ndarray, np.ndarray]:
        sup = np.array([_sup_norm(s) for s in self.snapshots])
        l2 = np.array([_l2_norm(s, dy, dim_y) for s in self.snapshots])
        return sup, l2

    def rows(self) -> List[List[float]]:
        out = []
        for i, t in enumerate(self.times):
            out.append([float(t), float(self.sup_norms[i]), float(self.l2_norms[i])] + [float(v) for v in self.component_sup[i]])
        return out


def _sup_norm(S: np.ndarray) -> float:
    if S.ndim >= 3 and S.shape[0] == S.shape[1]:
        # matrix datum (n, n, *grid): operator 2-norm per point
        mats = np.moveaxis(S.reshape(S.shape[0], S.shape[1], -1), -1, 0)
        return float(np.linalg.norm(mats, ord=2, axis=(1, 2)).max())
    return float(np.sqrt((np.abs(S) ** 2).sum(axis=0)).max())


def _l2_norm(S: np.ndarray, dy: float, dim_y: int) -> float:
    return float(math.sqrt((np.abs(S) ** 2).sum() * dy**dim_y))


def _component_sup(S: np.ndarray) -> List[float]:
    if S.ndim >= 3 and S.shape[0] == S.shape[1]:
        return [float(np.abs(S[i]).max()) for i in range(S.shape[0])]
    return [float(np.abs(S[i]).max()) for i in range(S.shape[0])]


def _shift(field_: np.ndarray, disp: Sequence[float], kgrid: List[np.ndarray], dim_y: int) -> np.ndarray:
    """f(y + disp) by Fourier phase on the periodic grid (last dim_y axes)."""
    if all(d == 0.0 for d in disp):
        return field_
    axes = tuple(range(-dim_y, 0))
    phase = np.exp(1j * sum(k * d for k, d in zip(kgrid, disp)))
    return np.fft.ifftn(np.fft.fftn(field_, axes=axes) * phase, axes=axes)


def max_transport_speed(spec: BlockSpec) -> float:
    return max((float(np.linalg.norm(d)) for d in spec.dmu), default=0.0)


def cfl_dt(spec: BlockSpec, grid: FlowGrid) -> float:
    """dt bound 0.25 dy sqrt(eps) / max|dmu|."""
    v = max_transport_speed(spec)
    return math.inf if v == 0 else 0.25 * grid.dy * math.sqrt(grid.epsilon) / v


def _default_datum(spec: BlockSpec, grid: FlowGrid) -> np.ndarray:
    n = spec.size
    D = np.zeros((n, n) + grid.shape, dtype=complex)
    for i in range(n):
        D[i, i] = 1.0
    return D


def run_flow(
    spec: BlockSpec,
    grid: FlowGrid,
    t_final: float,
    datum: Optional[np.ndarray] = None,
    n_snapshots: int = 101,
    dt: Optional[float] = None,
    keep_snapshots: bool = True,
    t_start: float = 0.0,
) -> FlowTrajectory:
    """Integrate the oscillation-factored system from tau = 0 to t_final.

    ``datum`` has shape (n, *grid) for a vector datum or (n, n, *grid) for a
    matrix datum (default: identity), given at ``t_start``; the run ends at
    ``t_start + t_final`` (negative ``t_final`` integrates backward).
    """
    eps = grid.epsilon
    se = math.sqrt(eps)
    dim = grid.dim_y
    if any(len(d) != dim for d in spec.dmu):
        raise FlowError("dmu vectors must match the grid dimension")
    for c in spec.couplings:
        if not c.envelope.is_uniform and c.envelope.support_radius() > grid.length / 4:
            raise FlowError(
                f"envelope support radius {c.envelope.support_radius():.3g} exceeds L/4 = {grid.length / 4:.3g}"
            )
    step = dt if dt is not None else grid.dt
    bound = cfl_dt(spec, grid)
    if step is None:
        step = min(se / 64.0, bound)
    if step > bound * (1 + 1e-12):
        raise FlowError(f"dt = {step:.3g} violates the bound {bound:.3g}")
    S0 = _default_datum(spec, grid) if datum is None else np.asarray(datum, dtype=complex)
    matrix_datum = S0.ndim == 2 + dim
    n = spec.size
    coords = grid.coords()
    kgrid = grid.wavenumbers()
    mu = np.array(spec.mu)
    dmu = [np.array(d, dtype=float) for d in spec.dmu]

    n_steps = max(int(math.ceil(abs(t_final) / step - 1e-9)), 1)
    h = t_final / n_steps

    def env_at(c: Coupling, s: float) -> np.ndarray:
        disp = dmu[c.target] * s / se
        return c.coefficient * c.envelope(*[y + d for y, d in zip(coords, disp)])

    def rhs(s: float, U: np.ndarray) -> np.ndarray:
        out = np.zeros_like(U)
        for c in spec.couplings:
            i, j = c.target, c.source
            ph = np.exp(1j * (mu[i] - mu[j]) * s / eps)
            rel = (dmu[i] - dmu[j]) * s / se
            shifted = _shift(U[j], rel, kgrid, dim)
            b = env_at(c, s)
            out[i] += ph * b * shifted / se
        return out

    def to_physical(s: float, U: np.ndarray) -> np.ndarray:
        S = np.empty_like(U)
        for i in range(n):
            S[i] = np.exp(-1j * mu[i] * s / eps) * _shift(U[i], -dmu[i] * s / se, kgrid, dim)
        return S

    def to_breve(s: float, S: np.ndarray) -> np.ndarray:
        U = np.empty_like(S)
        for i in range(n):
            U[i] = np.exp(1j * mu[i] * s / eps) * _shift(S[i], dmu[i] * s / se, kgrid, dim)
        return U

    snap_every = max(n_steps // max(n_snapshots - 1, 1), 1)
    U = to_breve(t_start, S0) if t_start else S0.copy()
    times: List[float] = []
    snaps: List[np.ndarray] = []
    sups: List[float] = []
    l2s: List[float] = []
    comps: List[List[float]] = []

    def record(s: float, U: np.ndarray) -> None:
        S = to_physical(s, U)
        times.append(s)
        if keep_snapshots:
            snaps.append(S)
        sups.append(_sup_norm(S) if matrix_datum or S.ndim > 1 else float(np.abs(S).max()))
        l2s.append(_l2_norm(S, grid.dy, dim))
        comps.append(_component_sup(S))

    s = t_start
    record(s, U)
    for it in range(1, n_steps + 1):
        if spec.couplings:
            k1 = rhs(s, U)
            k2 = rhs(s + h / 2, U + h / 2 * k1)
            k3 = rhs(s + h / 2, U + h / 2 * k2)
            k4 = rhs(s + h, U + h * k3)
            U = U + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s = t_start + it * h
        if it % snap_every == 0 or it == n_steps:
            record(s, U)
    return FlowTrajectory(
        times=np.array(times),
        snapshots=snaps,
        sup_norms=np.array(sups),
        l2_norms=np.array(l2s),
        component_sup=np.array(comps),
        epsilon=eps,
    )


# ------------------------------------------------------------------ oracles


def far_field_oracle(
    spec: BlockSpec,
    grid: FlowGrid,
    t: float,
    datum: np.ndarray,
    source: Optional[Sequence[Callable[..., np.ndarray]]] = None,
    quad_nodes: int = 200,
) -> np.ndarray:
    """Closed-form solution of the uncoupled transport with a source.

    S_i(t, y) = e^{-i t mu_i/eps} d_i(y - dmu_i t/sqrt(eps))
              + int_0^t e^{-i (t-s) mu_i/eps} f_i(s, y - dmu_i (t-s)/sqrt(eps)) ds.

    The datum is evaluated by Fourier shift; a source given as callables
    f_i(s, *y) is integrated with Gauss-Legendre nodes.
    """
    if spec.couplings:
        raise ValueError("far_field_oracle requires zero coupling")
    eps = grid.epsilon
    se = math.sqrt(eps)
    dim = grid.dim_y
    kgrid = grid.wavenumbers()
    coords = grid.coords()
    datum = np.asarray(datum, dtype=complex)
    out = np.empty_like(datum)
    nodes, weights = np.polynomial.legendre.leggauss(quad_nodes)
    for i in range(spec.size):
        d = np.array(spec.dmu[i], dtype=float)
        out[i] = np.exp(-1j * spec.mu[i] * t / eps) * _shift(datum[i], -d * t / se, kgrid, dim)
        if source is not None and source[i] is not None and t != 0:
            acc = np.zeros(grid.shape, dtype=complex)
            for x, w in zip(nodes, weights):
                s = 0.5 * t * (x + 1.0)
                lag = t - s
                pts = [y - dd * lag / se for y, dd in zip(coords, d)]
                acc += w * np.exp(-1j * spec.mu[i] * lag / eps) * np.asarray(source[i](s, *pts), dtype=complex)
            out[i] = out[i] + 0.5 * t * acc
    return out


def constant_source_response(mu: float, epsilon: float, t: float, c: complex) -> complex:
    """c * int_0^t e^{-i (t-s) mu / eps} ds in closed form."""
    if mu == 0.0:
        return c * t
    a = mu / epsilon
    return c * (1.0 - np.exp(-1j * a * t)) / (1j * a)


def resonant_ode_oracle(b_plus: complex, b_minus: complex, epsilon: float, t: float) -> np.ndarray:
    """Fundamental matrix of dS/dt = (1/sqrt(eps)) [[0, b+], [b-, 0]] S."""
    se = math.sqrt(epsilon)
    prod = complex(b_plus) * complex(b_minus)
    if prod == 0:
        return np.array([[1.0, b_plus * t / se], [b_minus * t / se, 1.0]], dtype=complex)
    root = np.sqrt(prod + 0j)
    x = root * t / se
    ch = np.cosh(x)
    sh_over = np.sinh(x) / root
    return np.array([[ch, b_plus * sh_over], [b_minus * sh_over, ch]], dtype=complex)


# ------------------------------------------------------------------ growth fits


@dataclass
class GrowthFit:
    rate: float
    r_squared: float
    reliable: bool
    window: Tuple[float, float]


def estimate_growth(
    traj: FlowTrajectory, window: Optional[Tuple[float, float]] = None, min_samples: int = 10
) -> GrowthFit:
    """Least-squares slope of log sup-norm vs t, times sqrt(eps)."""
    t = traj.times
    if window is None:
        window = (t[0] + 0.5 * (t[-1] - t[0]), t[-1])
    mask = (t >= window[0] - 1e-15) & (t <= window[1] + 1e-15)
    if mask.sum() < min_samples:
        raise ValueError(f"fit window holds {int(mask.sum())} samples; need {min_samples}")
    y = traj.sup_norms[mask]
    if np.any(y <= 0):
        raise ValueError("non-positive norms in fit window")
    ly = np.log(y)
    tt = t[mask]
    A = np.vstack([tt, np.ones_like(tt)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    rate = float(coef[0]) * math.sqrt(traj.epsilon)
    traj.fitted_rate = rate
    traj.fit_window = (float(window[0]), float(window[1]))
    traj.r_squared = r2
    return GrowthFit(rate=rate, r_squared=r2, reliable=r2 >= 0.9, window=traj.fit_window)


def trajectory_from_oracle(b_plus: complex, b_minus: complex, epsilon: float, times: np.ndarray) -> FlowTrajectory:
    """Trajectory of the constant-coefficient resonant ODE (sup = spectral norm)."""
    mats = [resonant_ode_oracle(b_plus, b_minus, epsilon, float(t)) for t in times]
    sups = np.array([np.linalg.norm(M, 2) for M in mats])
    comps = np.array([[abs(M[0, 0]), abs(M[1, 1])] for M in mats])
    return FlowTrajectory(
        times=np.asarray(times, dtype=float),
        snapshots=[M for M in mats],
        sup_norms=sups,
        l2_norms=np.array([np.linalg.norm(M) for M in mats]),
        component_sup=comps,
        epsilon=epsilon,
    )


# ------------------------------------------------------------------ delta_M


def delta_m(phi: float, dphi_deta: Sequence[float], b_plus: complex, b_minus: complex, epsilon: float,
            yhat: Sequence[float]) -> float:
    """-Phi^2 - sqrt(eps) yhat.d(Phi^2) + eps (4 b+ b- - (yhat.dPhi)^2)."""
    g = np.asarray(dphi_deta, dtype=float)
    yh = np.asarray(yhat, dtype=float)
    proj = float(yh @ g)
    bb = (complex(b_plus) * complex(b_minus)).real
    return -phi * phi - math.sqrt(epsilon) * 2.0 * phi * proj + epsilon * (4.0 * bb - proj * proj)


def classify_delta_m(phi: float, dphi_deta: Sequence[float], b_plus: complex, b_minus: complex, epsilon: float,
                     yhat: Sequence[float]) -> str:
    """'elliptic' if delta_M > tol, 'hyperbolic' if < -tol, else 'marginal'."""
    d = delta_m(phi, dphi_deta, b_plus, b_minus, epsilon, yhat)
    g = np.asarray(dphi_deta, dtype=float)
    scale = max(phi * phi, epsilon * float(g @ g), epsilon * 4.0 * abs(complex(b_plus) * complex(b_minus)), 1e-300)
    tol = 1e-12 * scale
    if d > tol:
        return "elliptic"
    if d < -tol:
        return "hyperbolic"
    return "marginal"
