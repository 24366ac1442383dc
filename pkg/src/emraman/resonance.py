"""Phase functions, resonances, space-time resonances and resonance cut-offs.

All computations use the epsilon = 0 branches with the acoustic branch
taken identically zero.  Frequencies on the half-plane (xi, r = |eta|)
suffice because every branch is rotation invariant in eta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize
from skimage import measure

from .spectral import Frequency, FrequencyLike, PlasmaParams, as_frequency, branch, branch_gradient

Pair = Tuple[int, int]

ALL_PAIRS: Tuple[Pair, ...] = tuple((j, jj) for j in range(1, 6) for jj in range(j + 1, 6))
ROOT_TOL = 1e-10
SCAN_STEP = 1e-3
CUTOFF_CONSTANTS = {"flat": 4.0, "base": 2.0, "sharp": 1.0, "tilde": 0.5}


class RegimeError(ValueError):
    """Parameters outside the regime where an operation is meaningful."""


@dataclass
class ResonanceRecord:
    pair: Pair
    zeta: Frequency
    phase_residual: float
    nu: Tuple[float, float]
    is_space_time: bool

    @property
    def xi(self) -> float:
        return self.zeta.xi


@dataclass
class Thresholds:
    k_c: float
    k_min: float
    cond_k_thetae: bool


def check_pair(pair: Sequence[int]) -> Pair:
    j, jj = int(pair[0]), int(pair[1])
    if not (1 <= j < jj <= 5):
        raise ValueError(f"pair must satisfy 1 <= j < j' <= 5, got {pair!r}")
    return (j, jj)


# ------------------------------------------------------------------ phases


def phase(params: PlasmaParams, pair: Pair, xi, r=0.0):
    """Phi_{jj'}(xi, r) = mu_j(xi + k, r) - mu_j'(xi, r) - omega (vectorized)."""
    j, jj = pair
    xi = np.asarray(xi, dtype=float)
    th = params.theta_e
    return branch(j, xi + params.k, r, th) - branch(jj, xi, r, th) - params.omega


def phase_gradient_half_plane(params: PlasmaParams, pair: Pair, xi, r) -> Tuple[np.ndarray, np.ndarray]:
    """(dPhi/dxi, dPhi/dr) on the (xi, r) half-plane."""
    j, jj = pair
    th = params.theta_e
    gx1, gr1 = branch_gradient(j, np.asarray(xi) + params.k, r, th)
    gx2, gr2 = branch_gradient(jj, xi, r, th)
    return gx1 - gx2, gr1 - gr2


def phase_and_gradient(params: PlasmaParams, pair: Sequence[int], zeta: FrequencyLike) -> Tuple[float, np.ndarray]:
    """Phi_{jj'}(zeta) and its exact eta-gradient (the group-velocity mismatch nu)."""
    pr = check_pair(pair)
    f = as_frequency(zeta)
    r = f.r
    phi = float(phase(params, pr, f.xi, r))
    _, dr = phase_gradient_half_plane(params, pr, f.xi, r)
    if r > 0:
        grad = float(dr) * np.array(f.eta) / r
    else:
        grad = np.zeros(2)
    return phi, grad


# ------------------------------------------------------------------ windows


def default_xi_window(params: PlasmaParams, pair: Pair) -> Tuple[float, float]:
    """Interval in xi containing every axis root of the pair."""
    k = abs(params.k)
    om = params.omega
    half = k + 3.0 * math.sqrt(om * om + 2.0 * om)
    slow_only = set(pair) <= {2, 3, 4}
    if slow_only:
        # slow branches reach omega only at |zeta| ~ omega / theta_e
        half = max(half, k + 1.5 * (om + 1.0) / params.theta_e)
    return (-half, half)


def default_r_max(params: PlasmaParams, pair: Pair) -> float:
    return 2.0 * max(abs(params.k), 1.0) / params.theta_e if set(pair) <= {2, 3, 4} else (
        abs(params.k) + 3.0 * math.sqrt(params.omega**2 + 2.0 * params.omega)
    )


# ------------------------------------------------------------------ axis roots


def _make_record(params: PlasmaParams, pair: Pair, xi: float, st_tol: float = 1e-10) -> ResonanceRecord:
    phi, nu = phase_and_gradient(params, pair, (xi, 0.0, 0.0))
    return ResonanceRecord(
        pair=pair,
        zeta=Frequency(xi),
        phase_residual=abs(phi),
        nu=(float(nu[0]), float(nu[1])),
        is_space_time=bool(np.linalg.norm(nu) <= st_tol),
    )


def find_axis_resonances(
    params: PlasmaParams,
    pair: Sequence[int],
    xi_range: Optional[Tuple[float, float]] = None,
    tol: float = 1e-12,
    step: float = SCAN_STEP,
) -> List[ResonanceRecord]:
    """All roots of xi -> Phi(xi, 0) in the window (sign-change scan + Brent)."""
    pr = check_pair(pair)
    lo, hi = xi_range if xi_range is not None else default_xi_window(params, pr)
    n = max(int(math.ceil((hi - lo) / step)), 2)
    roots: List[float] = []
    chunk = 2_000_000
    prev_x = prev_f = None
    for start in range(0, n + 1, chunk):
        idx = np.arange(start, min(start + chunk, n + 1))
        xs = lo + (hi - lo) * idx / n
        fs = phase(params, pr, xs)
        if prev_x is not None:
            xs = np.concatenate(([prev_x], xs))
            fs = np.concatenate(([prev_f], fs))
        exact = np.nonzero(fs == 0.0)[0]
        roots.extend(float(xs[i]) for i in exact)
        change = np.nonzero(fs[:-1] * fs[1:] < 0.0)[0]
        for i in change:
            a, b = float(xs[i]), float(xs[i + 1])
            roots.append(brentq(lambda x: float(phase(params, pr, x)), a, b, xtol=tol, rtol=4 * np.finfo(float).eps))
        prev_x, prev_f = float(xs[-1]), float(fs[-1])
    roots = sorted(set(roots))
    return [_make_record(params, pr, x) for x in roots]


def thresholds(params: PlasmaParams) -> Thresholds:
    """Closed-form thresholds k_c, k_min and the localization condition."""
    th = params.theta_e
    th2 = th * th
    k_c = math.sqrt(2.0 * (1.0 + th2) + 4.0 * math.sqrt(1.0 - th2 + th2 * th2)) / (math.sqrt(2.0) * (1.0 - th2))
    denom = (1.0 / th - 1.0) ** 2 - 4.0
    k_min = math.sqrt(3.0) / math.sqrt(denom) if denom > 0 else math.inf
    cond = params.omega <= (1.0 - th2) / th2
    return Thresholds(k_c=k_c, k_min=k_min, cond_k_thetae=bool(cond))


def space_time_resonances(params: PlasmaParams, pair: Sequence[int]) -> List[ResonanceRecord]:
    """Space-time resonances: the eta = 0 resonances under the localization condition."""
    pr = check_pair(pair)
    th = thresholds(params)
    if not th.cond_k_thetae:
        raise RegimeError(
            f"space-time localization needs sqrt(1+k^2) <= (1-theta_e^2)/theta_e^2; "
            f"got sqrt(1+k^2)={params.omega:.6g}, bound={(1 - params.theta_e**2) / params.theta_e**2:.6g}"
        )
    out = find_axis_resonances(params, pr)
    for rec in out:
        if np.linalg.norm(rec.nu) > 1e-10:
            raise RuntimeError(f"eta-gradient {rec.nu} does not vanish on the axis")
        rec.is_space_time = True
    return out


# ------------------------------------------------------------------ curves


def _newton_project(params: PlasmaParams, pair: Pair, xi: float, r: float, iters: int = 30) -> Tuple[float, float]:
    for _ in range(iters):
        f = float(phase(params, pair, xi, r))
        if abs(f) < 1e-13:
            break
        gx, gr = phase_gradient_half_plane(params, pair, xi, r)
        g2 = float(gx) ** 2 + float(gr) ** 2
        if g2 == 0.0:
            break
        xi -= f * float(gx) / g2
        r -= f * float(gr) / g2
    return xi, abs(r)


def resonance_curve(
    params: PlasmaParams,
    pair: Sequence[int],
    xi_range: Optional[Tuple[float, float]] = None,
    r_max: Optional[float] = None,
    n: int = 400,
    refine: bool = True,
) -> List[np.ndarray]:
    """Level set {Phi = 0} in the (xi, r >= 0) half-plane via marching squares.

    Returns a list of polylines, each an (m, 2) array of (xi, r) points;
    with ``refine`` every vertex is Newton-projected onto the exact zero set.
    """
    pr = check_pair(pair)
    lo, hi = xi_range if xi_range is not None else default_xi_window(params, pr)
    rmax = r_max if r_max is not None else default_r_max(params, pr)
    xs = np.linspace(lo, hi, n)
    rs = np.linspace(0.0, rmax, n)
    X, R = np.meshgrid(xs, rs, indexing="ij")
    F = phase(params, pr, X, R)
    if F.min() > 0 or F.max() < 0:
        return []
    curves = []
    for c in measure.find_contours(F, 0.0):
        pts = np.column_stack(
            (np.interp(c[:, 0], np.arange(n), xs), np.interp(c[:, 1], np.arange(n), rs))
        )
        if refine:
            pts = np.array([_newton_project(params, pr, x, r) for x, r in pts])
        curves.append(pts)
    return curves


def resonant_xi_at_r(params: PlasmaParams, pair: Sequence[int], r: float) -> List[float]:
    """All xi with Phi(xi, r) = 0 at fixed transverse radius r."""
    pr = check_pair(pair)
    lo, hi = default_xi_window(params, pr)
    xs = np.linspace(lo, hi, int((hi - lo) / 1e-2) + 2)
    fs = phase(params, pr, xs, r)
    out = []
    for i in np.nonzero(fs[:-1] * fs[1:] < 0)[0]:
        out.append(brentq(lambda x: float(phase(params, pr, x, r)), xs[i], xs[i + 1], xtol=1e-14))
    return out


@lru_cache(maxsize=256)
def _phase_range(params: PlasmaParams, pair: Pair) -> Tuple[float, float]:
    lo, hi = default_xi_window(params, pair)
    xs = np.linspace(lo, hi, 1201)
    rs = np.linspace(0.0, default_r_max(params, pair), 601)
    X, R = np.meshgrid(xs, rs, indexing="ij")
    F = phase(params, pair, X, R)
    ax = phase(params, pair, np.linspace(lo, hi, 200001))
    return float(min(F.min(), ax.min())), float(max(F.max(), ax.max()))


def is_resonant_pair(params: PlasmaParams, pair: Sequence[int]) -> bool:
    """True when Phi_{jj'} vanishes somewhere (sign change on a fine grid)."""
    pr = check_pair(pair)
    if pr == (1, 5):
        return False
    fmin, fmax = _phase_range(params, pr)
    return fmin <= 0.0 <= fmax


# ------------------------------------------------------------------ cut-offs


def _smooth_step(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def plateau(x):
    """chi_0: equal to 1 on [0, 1], 0 on [2, inf), smooth and monotone between."""
    x = np.abs(np.asarray(x, dtype=float))
    a = _smooth_step(2.0 - x)
    b = _smooth_step(x - 1.0)
    return a / (a + b)


def cutoff_chi(
    params: PlasmaParams,
    pair: Sequence[int],
    delta_res: float,
    variant: str,
    zeta: FrequencyLike,
) -> float:
    """chi_0(C sqrt(Phi^2 + (delta/6)^2) / delta) with the variant's constant C."""
    if delta_res <= 0:
        raise ValueError("delta_res must be positive")
    if variant not in CUTOFF_CONSTANTS:
        raise ValueError(f"variant must be one of {sorted(CUTOFF_CONSTANTS)}")
    pr = check_pair(pair)
    if not is_resonant_pair(params, pr):
        return 0.0
    f = as_frequency(zeta)
    phi = float(phase(params, pr, f.xi, f.r))
    c = CUTOFF_CONSTANTS[variant]
    return float(plateau(c * math.hypot(phi, delta_res / 6.0) / delta_res))


# ------------------------------------------------------------------ separation


@dataclass
class IntersectionCheck:
    name: str
    first: Pair
    second: Pair
    second_shift: float  # multiple of k: zeta in (R_second + shift*k)
    expect: str  # "empty", "nonempty", "origin"
    min_joint_residual: float = math.nan
    argmin: Tuple[float, float] = (math.nan, math.nan)
    verdict: str = ""
    matches_expectation: bool = False
    detail: Dict[str, float] = field(default_factory=dict)


SEPARATION_CHECKS: Tuple[Tuple[str, Pair, Pair, float, str], ...] = (
    ("R12 & (R23+k)", (1, 2), (2, 3), 1.0, "empty"),
    ("R12 & (R24+k)", (1, 2), (2, 4), 1.0, "empty"),
    ("R23 & R24", (2, 3), (2, 4), 0.0, "empty"),
    ("R25 & R23", (2, 5), (2, 3), 0.0, "empty"),
    ("R25 & R24", (2, 5), (2, 4), 0.0, "empty"),
    ("R14 & R34", (1, 4), (3, 4), 0.0, "empty"),
    ("R24 & R34", (2, 4), (3, 4), 0.0, "empty"),
    ("R34 & (R45+k)", (3, 4), (4, 5), 1.0, "empty"),
    ("R12 & R13", (1, 2), (1, 3), 0.0, "empty"),
    ("R12 & R14", (1, 2), (1, 4), 0.0, "empty"),
    ("R13 & R14", (1, 3), (1, 4), 0.0, "empty"),
    ("R12 & (R25+k)", (1, 2), (2, 5), 1.0, "empty"),
    ("R13 & R23", (1, 3), (2, 3), 0.0, "empty"),
    ("R13 & (R34+k)", (1, 3), (3, 4), 1.0, "empty"),
    ("R13 & (R35+k)", (1, 3), (3, 5), 1.0, "origin"),
    ("R23 & (R34+k)", (2, 3), (3, 4), 1.0, "nonempty"),
    ("R23 & (R35+k)", (2, 3), (3, 5), 1.0, "empty"),
    ("R34 & R35", (3, 4), (3, 5), 0.0, "empty"),
    ("R14 & R24", (1, 4), (2, 4), 0.0, "empty"),
    ("R14 & (R45+k)", (1, 4), (4, 5), 1.0, "empty"),
    ("R24 & (R45+k)", (2, 4), (4, 5), 1.0, "empty"),
    ("R25 & R35", (2, 5), (3, 5), 0.0, "empty"),
    ("R25 & R45", (2, 5), (4, 5), 0.0, "empty"),
    ("R35 & R45", (3, 5), (4, 5), 0.0, "empty"),
)


def _joint(params: PlasmaParams, a: Pair, b: Pair, shift: float, xi, r):
    fa = np.abs(phase(params, a, xi, r))
    fb = np.abs(phase(params, b, np.asarray(xi) - shift * params.k, r))
    return np.maximum(fa, fb)


def joint_residual_minimum(
    params: PlasmaParams, a: Pair, b: Pair, shift: float, n_xi: int = 801, n_r: int = 401
) -> Tuple[float, Tuple[float, float]]:
    """min over the half-plane window of max(|Phi_a(zeta)|, |Phi_b(zeta - shift k)|)."""
    wa = default_xi_window(params, a)
    wb = default_xi_window(params, b)
    lo = min(wa[0], wb[0] + shift * params.k)
    hi = max(wa[1], wb[1] + shift * params.k)
    rmax = max(default_r_max(params, a), default_r_max(params, b))
    xs = np.linspace(lo, hi, n_xi)
    rs = np.linspace(0.0, rmax, n_r)
    X, R = np.meshgrid(xs, rs, indexing="ij")
    J = _joint(params, a, b, shift, X, R)
    best = float(J.min())
    best_pt = (float(X.flat[J.argmin()]), float(R.flat[J.argmin()]))
    # refine from the few best grid points
    order = np.argsort(J, axis=None)[:8]
    for flat in order:
        x0 = np.array([X.flat[flat], R.flat[flat]])
        res = minimize(
            lambda p: float(_joint(params, a, b, shift, p[0], abs(p[1]))),
            x0,
            method="Nelder-Mead",
            options=dict(xatol=1e-12, fatol=1e-14, maxiter=4000),
        )
        if res.fun < best:
            best = float(res.fun)
            best_pt = (float(res.x[0]), float(abs(res.x[1])))
    return best, best_pt


def separation_report(params: PlasmaParams, delta_res: float) -> List[IntersectionCheck]:
    """Numerical emptiness verdicts for the separation properties.

    "empty" means the minimal joint residual exceeds 4*delta_res, the
    half-width in Phi of the widest cut-off; "intersecting" means it is
    below 1e-8; anything else is reported as a delta_res violation.
    """
    if delta_res <= 0:
        raise ValueError("delta_res must be positive")
    margin = 4.0 * delta_res
    out: List[IntersectionCheck] = []
    for name, a, b, shift, expect in SEPARATION_CHECKS:
        chk = IntersectionCheck(name=name, first=a, second=b, second_shift=shift, expect=expect)
        best, pt = joint_residual_minimum(params, a, b, shift)
        chk.min_joint_residual = best
        chk.argmin = pt
        if best > margin:
            chk.verdict = "empty"
        elif best <= 1e-8:
            chk.verdict = "intersecting"
        else:
            chk.verdict = "delta_res-violation"
        if expect == "empty":
            chk.matches_expectation = chk.verdict == "empty"
        elif expect == "origin":
            chk.matches_expectation = chk.verdict == "intersecting" and math.hypot(*pt) < 1e-3
        else:
            chk.matches_expectation = chk.verdict == "intersecting"
        if name == "R23 & (R34+k)":
            chk.detail = _slow_circle(params)
        out.append(chk)
    return out


def _slow_circle(params: PlasmaParams) -> Dict[str, float]:
    """The R23 & (R34+k) set: xi = 0 and theta^2 (k^2 + r^2) = omega^2 - 1."""
    k = params.k
    th = params.theta_e
    radius2 = k * k / (th * th) - k * k
    if radius2 <= 0:
        return {"radius": math.nan}
    rad = math.sqrt(radius2)
    res_a = abs(float(phase(params, (2, 3), 0.0, rad)))
    res_b = abs(float(phase(params, (3, 4), -k, rad)))
    return {"radius": rad, "residual": max(res_a, res_b)}


def slow_circle_radius(params: PlasmaParams) -> float:
    return _slow_circle(params)["radius"]
