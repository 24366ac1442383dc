"""Leading source term, interaction coefficients, traces and Raman growth rates."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import spectral as sp
from .resonance import (
    Pair,
    RegimeError,
    check_pair,
    find_axis_resonances,
    space_time_resonances,
    thresholds,
)
from .spectral import FrequencyLike, PlasmaParams, as_frequency

CLOSED_FORM_PAIRS = ((1, 2), (4, 5), (1, 4), (2, 5), (2, 4), (2, 3), (3, 4))
ACOUSTIC_PAIRS = ((1, 3), (3, 5))
RATE_PAIRS = ((1, 2), (1, 4), (2, 3), (2, 4), (2, 5), (3, 4), (4, 5))


# ------------------------------------------------------------------ B_p


def source_action(
    params: PlasmaParams, p: int, u: np.ndarray, zeta: Optional[FrequencyLike] = None
) -> np.ndarray:
    """B_p u for p = +1 or -1.

    E-row n_e v, v_e-row -theta_e (v x B + i p k v_e x v' + (v_e . i p k) v),
    ionic rows zero.  When ``zeta`` has eta != 0 the convective term
    -theta_e (v . i zeta) (v_e, n_e) is added (approximate off the axis).
    """
    if p not in (-1, 1):
        raise ValueError("p must be +1 or -1")
    u = np.asarray(u, dtype=complex)
    th = params.theta_e
    kvec = np.array([params.k, 0.0, 0.0])
    B = u[sp.B_SL]
    v = u[sp.VE_SL]
    n = u[sp.NE]
    out = np.zeros(sp.DIM, dtype=complex)
    out[sp.E_SL] = n * sp.V_HAT
    out[sp.VE_SL] = -th * (
        np.cross(sp.V_HAT, B) + 1j * p * params.k * np.cross(v, sp.V_HAT_P) + (v @ (1j * p * kvec)) * sp.V_HAT
    )
    if zeta is not None:
        z = as_frequency(zeta).as_array()
        conv = -th * (sp.V_HAT @ (1j * z))
        if conv != 0:
            out[sp.VE_SL] += conv * v
            out[sp.NE] += conv * n
    return out


def source_matrix(params: PlasmaParams, p: int, zeta: Optional[FrequencyLike] = None) -> np.ndarray:
    """Matrix of u -> B_p u."""
    eye = np.eye(sp.DIM, dtype=complex)
    return np.column_stack([source_action(params, p, eye[:, c], zeta) for c in range(sp.DIM)])


def wkb_profile(params: PlasmaParams, p: int = 1, g: complex = 1.0) -> np.ndarray:
    """Leading WKB vector g (B, E, v_e) = g (i p k v', i p omega v, v)."""
    e = np.zeros(sp.DIM, dtype=complex)
    e[sp.B_SL] = 1j * p * params.k * sp.V_HAT_P
    e[sp.E_SL] = 1j * p * params.omega * sp.V_HAT
    e[sp.VE_SL] = sp.V_HAT
    return g * e


# ------------------------------------------------------------------ B_{pjj'}


def interaction_matrix(params: PlasmaParams, p: int, j: int, jj: int, zeta: FrequencyLike) -> np.ndarray:
    """Pi_j(xi + p k, eta) B_p Pi_j'(xi, eta) with epsilon = 0 projectors."""
    f = as_frequency(zeta)
    out_proj = sp.projectors(params, f.shifted(p * params.k))[j]
    in_proj = sp.projectors(params, f)[jj]
    return out_proj @ source_matrix(params, p, f) @ in_proj


def resonance_trace(params: PlasmaParams, pair: Sequence[int], zeta: FrequencyLike) -> complex:
    """tr B_{1jj'}(zeta) B_{-1j'j}(xi + k, eta) via projector products."""
    j, jj = check_pair(pair)
    f = as_frequency(zeta)
    C12 = interaction_matrix(params, 1, j, jj, f)
    C21 = interaction_matrix(params, -1, jj, j, f.shifted(params.k))
    return complex(np.trace(C12 @ C21))


def trace_closed_form(params: PlasmaParams, pair: Sequence[int], xi: float) -> Optional[complex]:
    """Closed-form traces on the axis; None for the acoustic pairs (1,3), (3,5).

    The denominators carry lambda_2 to the first power; this is what the
    matrix oracle produces with |e_par|^2 = 2 and |e_perp|^2 = 2 lambda_1^2.
    """
    pr = check_pair(pair)
    th2 = params.theta_e**2
    k = params.k
    l1 = lambda x: float(sp.lambda1(x, 0.0))
    l2 = lambda x: float(sp.lambda2(x, 0.0, params.theta_e))
    if pr == (1, 2):
        return complex(-th2 * xi * xi / (4.0 * l1(xi + k) * l2(xi)))
    if pr == (1, 4):
        return complex(th2 * xi * xi / (4.0 * l2(xi) * l1(xi + k)))
    if pr == (4, 5):
        # lambda_4 = -lambda_2, lambda_5 = -lambda_1
        return complex(-th2 * (xi + k) ** 2 / (4.0 * (-l2(xi + k)) * (-l1(xi))))
    if pr == (2, 5):
        return complex(th2 * (xi + k) ** 2 / (4.0 * l2(xi + k) * l1(xi)))
    if pr in ((2, 4), (2, 3), (3, 4)):
        return 0j
    return None


# ------------------------------------------------------------------ leading order


def _s_minus(k: float) -> float:
    om = math.sqrt(1.0 + k * k)
    return math.sqrt(max(om * om - 2.0 * om, 0.0))


def _s_plus(k: float) -> float:
    om = math.sqrt(1.0 + k * k)
    return math.sqrt(om * om + 2.0 * om)


def leading_roots(k: float) -> Dict[Pair, Tuple[float, ...]]:
    """Small-theta_e axis resonances (closed forms)."""
    sm = _s_minus(k)
    spl = _s_plus(k)
    return {
        (1, 4): (-k - sm, -k + sm),
        (2, 5): (-sm, sm),
        (1, 2): (-k - spl, -k + spl),
        (4, 5): (-spl, spl),
        (1, 3): (-2.0 * k, 0.0),
        (3, 5): (-abs(k), abs(k)),
    }


def leading_traces(k: float, theta_e: float) -> Dict[str, float]:
    """Leading-order traces at the resonances; theta_e = 1 is the figure scaling.

    Keys: tr14_minus, tr14_plus, tr12_plus, tr12_minus.
    """
    om = math.sqrt(1.0 + k * k)
    sm = _s_minus(k)
    spl = _s_plus(k)
    th2 = theta_e**2
    if om > 2.0:
        tr14m = th2 * (-k - sm) ** 2 / (4.0 * (om - 1.0))
        tr14p = th2 * (-k + sm) ** 2 / (4.0 * (om - 1.0))
    else:
        tr14m = tr14p = math.nan
    return {
        "tr14_minus": tr14m,
        "tr14_plus": tr14p,
        "tr12_plus": -th2 * (-k + spl) ** 2 / (4.0 * (om + 1.0)),
        "tr12_minus": -th2 * (-k - spl) ** 2 / (4.0 * (om + 1.0)),
    }


def leading_rates(k: float, theta_e: float, amplitude: float = 1.0) -> Tuple[float, float]:
    """(backward, forward) leading-order Raman rates amplitude * sqrt(tr14)."""
    tr = leading_traces(k, theta_e)
    if math.isnan(tr["tr14_minus"]):
        return 0.0, 0.0
    back, fwd = (tr["tr14_minus"], tr["tr14_plus"]) if k > 0 else (tr["tr14_plus"], tr["tr14_minus"])
    return amplitude * math.sqrt(back), amplitude * math.sqrt(fwd)


# ------------------------------------------------------------------ scalarization


@dataclass
class Scalarization:
    c12: complex
    c21: complex
    P: np.ndarray
    residual: float


def _rank1_factors(C: np.ndarray, tol: float) -> Tuple[float, np.ndarray, np.ndarray]:
    U, s, Vh = np.linalg.svd(C)
    if s[0] == 0.0 or (len(s) > 1 and s[1] > tol * s[0]):
        raise ValueError(f"matrix is not rank one (singular values {s[:3]})")
    return float(s[0]), U[:, 0], Vh[0, :].conj()


def _complement_basis(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """[u, K e_i (i != i*)] with K the projector onto ker(w^H) along u."""
    n = u.size
    K = np.eye(n, dtype=complex) - np.outer(u, w.conj()) / np.vdot(w, u)
    drop = int(np.argmax(np.abs(u)))
    cols = [u] + [K[:, i] for i in range(n) if i != drop]
    return np.column_stack(cols)


def scalarize(C12: np.ndarray, C21: np.ndarray, rank_tol: float = 1e-8) -> Scalarization:
    """Reduce a rank-one coupling pair to scalars with c12 c21 = tr(C12 C21).

    Convention: c12 = +sqrt|tr| (so |c12| = |c21|, which makes the coupling
    anti-Hermitian when the trace is negative).
    """
    C12 = np.asarray(C12, dtype=complex)
    C21 = np.asarray(C21, dtype=complex)
    s1, u1, v1 = _rank1_factors(C12, rank_tol)
    s2, u2, v2 = _rank1_factors(C21, rank_tol)
    tr = complex(np.trace(C12 @ C21))
    if abs(tr) <= 1e-14 * s1 * s2:
        raise ValueError("trace of C12 C21 vanishes; scalarization undefined")
    c12_raw = s1 * np.vdot(v1, u2)
    c21_raw = s2 * np.vdot(v2, u1)
    f = c12_raw / math.sqrt(abs(tr))
    e = f * u1  # generator of range(C12)
    P1 = _complement_basis(e, v2)
    P2 = _complement_basis(u2, v1)
    c12 = complex(c12_raw / f)
    c21 = complex(c21_raw * f)
    M12 = np.linalg.solve(P1, C12 @ P2)
    M21 = np.linalg.solve(P2, C21 @ P1)
    E12 = np.zeros_like(M12)
    E12[0, 0] = c12
    E21 = np.zeros_like(M21)
    E21[0, 0] = c21
    resid = max(
        float(np.abs(M12 - E12).max()),
        float(np.abs(M21 - E21).max()),
        abs(c12 * c21 - tr),
    )
    n1, n2 = P1.shape[0], P2.shape[0]
    P = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    P[:n1, :n1] = P1
    P[n1:, n1:] = P2
    return Scalarization(c12=c12, c21=c21, P=P, residual=resid)


def scalarized_coupling(params: PlasmaParams, pair: Sequence[int], zeta: FrequencyLike) -> Scalarization:
    j, jj = check_pair(pair)
    f = as_frequency(zeta)
    C12 = interaction_matrix(params, 1, j, jj, f)
    C21 = interaction_matrix(params, -1, jj, j, f.shifted(params.k))
    return scalarize(C12, C21)


def rank_one_coupling(params: PlasmaParams, pair: Sequence[int], zeta: FrequencyLike, tol: float = 1e-8) -> Tuple[complex, complex]:
    """Unbalanced scalars (s1 <v1,u2>, s2 <v2,u1>) with product tr(C12 C21).

    Defined also when the trace vanishes; a zero block gives 0.
    """
    j, jj = check_pair(pair)
    f = as_frequency(zeta)
    C12 = interaction_matrix(params, 1, j, jj, f)
    C21 = interaction_matrix(params, -1, jj, j, f.shifted(params.k))
    if not np.any(np.abs(C12) > 1e-14) or not np.any(np.abs(C21) > 1e-14):
        return 0j, 0j
    s1, u1, v1 = _rank1_factors(C12, tol)
    s2, u2, v2 = _rank1_factors(C21, tol)
    return complex(s1 * np.vdot(v1, u2)), complex(s2 * np.vdot(v2, u1))


# ------------------------------------------------------------------ acoustic pairs


def acoustic_coupling(params: PlasmaParams, pair: Sequence[int], xi: float, sign: int = 1) -> float:
    """|<B_p e_transverse, e_acoustic>| / (|e_transverse| |e_acoustic|) at epsilon > 0.

    For (1,3) the transverse wave is mode 1 at xi + k seen through B_{-1},
    for (3,5) it is mode 5 at xi seen through B_{+1}.
    """
    pr = check_pair(pair)
    if pr not in ACOUSTIC_PAIRS:
        raise ValueError("acoustic_coupling applies to (1,3) and (3,5)")
    if params.epsilon <= 0:
        return 0.0
    if pr == (1, 3):
        zt = sp.Frequency(xi + params.k)
        za = sp.Frequency(xi)
        p = -1
        mu = sp.eigenvalues(params, zt)[1]
    else:
        zt = sp.Frequency(xi)
        za = sp.Frequency(xi + params.k)
        p = 1
        mu = sp.eigenvalues(params, zt)[5]
    _, t1, _, _ = sp._directions(zt.as_array())
    et = sp.transverse_vector(params, zt, mu, t1)
    ea = sp.acoustic_vector(params, za, sign)
    val = np.vdot(ea, source_action(params, p, et))
    return float(abs(val) / (np.linalg.norm(et) * np.linalg.norm(ea)))


# ------------------------------------------------------------------ rates


@dataclass
class InteractionReport:
    pair: Pair
    xi: float
    trace_matrix: complex
    trace_closed: Optional[complex]
    classification: str
    raman_direction: str


@dataclass
class GrowthRateReport:
    gamma_per_pair: Dict[Pair, float]
    gamma: float
    argmax_pair: Optional[Pair]
    argmax_xi: Optional[float]
    amplitude_max: float
    regime: str
    acoustic_bound: float = 0.0
    details: List[InteractionReport] = field(default_factory=list)


def _rate_from_trace(tr: complex) -> float:
    return max(cmath.sqrt(tr).real, 0.0)


def transverse_velocity_sign(params: PlasmaParams, pair: Pair, xi: float) -> float:
    """Sign of the group velocity of the electromagnetic wave in the pair."""
    j, jj = pair
    if j in (1, 5):
        return math.copysign(1.0, xi + params.k) if j == 1 else -math.copysign(1.0, xi + params.k)
    if jj in (1, 5):
        return math.copysign(1.0, xi) if jj == 1 else -math.copysign(1.0, xi)
    return 0.0


def raman_direction(params: PlasmaParams, pair: Pair, xi: float) -> str:
    s = transverse_velocity_sign(params, pair, xi)
    if s == 0.0:
        return "n/a"
    return "backward" if s != math.copysign(1.0, params.k) else "forward"


def _classify(tr: complex, tol: float = 1e-12) -> str:
    if abs(tr) <= tol:
        return "transparent"
    return "unstable" if tr.real > 0 else "stable"


def interaction_report(params: PlasmaParams, pair: Sequence[int], xi: float) -> InteractionReport:
    pr = check_pair(pair)
    tm = resonance_trace(params, pr, (xi, 0.0, 0.0))
    tc = trace_closed_form(params, pr, xi)
    cls = _classify(tm)
    direction = raman_direction(params, pr, xi) if cls == "unstable" else "n/a"
    return InteractionReport(pr, xi, tm, tc, cls, direction)


def growth_rates(params: PlasmaParams, amplitude_max: float = 1.0, pairs: Sequence[Pair] = RATE_PAIRS) -> GrowthRateReport:
    """gamma_{jj'} = amplitude * max Re sqrt(tr) over the pair's space-time resonances."""
    if amplitude_max < 0:
        raise ValueError("amplitude_max must be >= 0")
    th = thresholds(params)
    per: Dict[Pair, float] = {}
    details: List[InteractionReport] = []
    best = (0.0, None, None)
    for pr in pairs:
        g = 0.0
        for rec in space_time_resonances(params, pr):
            rep = interaction_report(params, pr, rec.xi)
            details.append(rep)
            rate = amplitude_max * _rate_from_trace(rep.trace_matrix)
            if rate > g:
                g = rate
            if rate > best[0]:
                best = (rate, pr, rec.xi)
        per[pr] = g
    bound = 0.0
    if params.epsilon > 0:
        for pr in ACOUSTIC_PAIRS:
            for rec in find_axis_resonances(params, pr):
                if abs(rec.xi) < 1e-12 and pr == (1, 3):
                    continue
                for sign in (-1, 1):
                    bound = max(bound, amplitude_max * acoustic_coupling(params, pr, rec.xi, sign))
    regime = "unstable" if abs(params.k) > th.k_c and best[0] > 0 else "stable"
    return GrowthRateReport(
        gamma_per_pair=per,
        gamma=best[0],
        argmax_pair=best[1],
        argmax_xi=best[2],
        amplitude_max=amplitude_max,
        regime=regime,
        acoustic_bound=bound,
        details=details,
    )


def raman_rates(params: PlasmaParams, amplitude: float = 1.0) -> Tuple[float, float]:
    """(backward, forward) (1,4) rates from the matrix pipeline at exact roots."""
    back = fwd = 0.0
    for rec in find_axis_resonances(params, (1, 4)):
        rate = amplitude * _rate_from_trace(resonance_trace(params, (1, 4), (rec.xi, 0.0, 0.0)))
        if raman_direction(params, (1, 4), rec.xi) == "backward":
            back = max(back, rate)
        else:
            fwd = max(fwd, rate)
    return back, fwd


def classify_raman(params: PlasmaParams) -> List[Dict[str, object]]:
    """Per-pair, per-root labels: stable, transparent, unstable-backward, unstable-forward."""
    th = thresholds(params)
    if abs(params.k) <= th.k_c:
        raise RegimeError(f"|k| = {abs(params.k):.6g} <= k_c = {th.k_c:.6g}: no Raman instability")
    rows: List[Dict[str, object]] = []
    for pr in RATE_PAIRS:
        for rec in space_time_resonances(params, pr):
            rep = interaction_report(params, pr, rec.xi)
            label = rep.classification
            if label == "unstable":
                label = f"unstable-{rep.raman_direction}"
            rows.append(
                {
                    "pair": pr,
                    "xi": rec.xi,
                    "trace": rep.trace_matrix.real,
                    "label": label,
                }
            )
    return rows
