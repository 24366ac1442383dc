"""Tabular data behind the standard plots (columns + rows of floats/strings)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import spectral as sp
from .interaction import leading_rates, leading_traces, raman_rates, resonance_trace
from .resonance import RegimeError, find_axis_resonances, resonance_curve, thresholds
from .spectral import PlasmaParams

FIGURE_IDS = ("variety", "stable-resonances", "unstable-resonances", "trace-vs-k", "rate-vs-k")
STABLE_PAIRS = ((1, 2), (4, 5))
UNSTABLE_PAIRS = ((1, 4), (2, 5))
SQRT3 = math.sqrt(3.0)


@dataclass
class Table:
    columns: List[str]
    rows: List[List[object]]

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def variety_table(theta_e: float, xi_min: float = -5.0, xi_max: float = 5.0, samples: int = 201, r: float = 0.0) -> Table:
    """lambda_1..lambda_5 (epsilon = 0) along xi at transverse radius r."""
    xs = np.linspace(xi_min, xi_max, samples)
    cols = ["xi"] + [f"lambda{j}" for j in range(1, 6)]
    vals = [np.broadcast_to(sp.branch(j, xs, r, theta_e), xs.shape) for j in range(1, 6)]
    rows = [[float(x)] + [float(v[i]) for v in vals] for i, x in enumerate(xs)]
    return Table(cols, rows)


def resonance_curves_table(params: PlasmaParams, pairs: Sequence[Tuple[int, int]], n: int = 300) -> Table:
    """Zero sets of the phases in the (xi, r) half-plane, one polyline per curve id."""
    rows: List[List[object]] = []
    for pr in pairs:
        for cid, curve in enumerate(resonance_curve(params, pr, n=n)):
            for x, r in curve:
                rows.append([f"{pr[0]}{pr[1]}", cid, float(x), float(r)])
    return Table(["pair", "curve", "xi", "r"], rows)


def k_grid(k_min: float, k_max: float, samples: int) -> np.ndarray:
    if samples < 2 or not (k_max > k_min):
        raise ValueError("need k_max > k_min and samples >= 2")
    return np.linspace(k_min, k_max, samples)


def trace_table(ks: np.ndarray, theta_e: float, method: str = "closed") -> Table:
    """tr14 and tr12 at the two roots of each pair as functions of k."""
    cols = ["k", "tr14_minus", "tr14_plus", "tr12_plus", "tr12_minus"]
    rows = []
    for k in ks:
        if method == "closed":
            t = leading_traces(float(k), theta_e)
            rows.append([float(k)] + [t[c] for c in cols[1:]])
            continue
        p = PlasmaParams(epsilon=0.0, theta_e=theta_e, k=float(k))
        r14 = [rec.xi for rec in find_axis_resonances(p, (1, 4))]
        r12 = [rec.xi for rec in find_axis_resonances(p, (1, 2))]
        t14 = [resonance_trace(p, (1, 4), (x, 0.0, 0.0)).real for x in r14]
        t12 = [resonance_trace(p, (1, 2), (x, 0.0, 0.0)).real for x in r12]
        row = [float(k)]
        row += [t14[0], t14[1]] if len(t14) == 2 else [math.nan, math.nan]
        row += [t12[1], t12[0]] if len(t12) == 2 else [math.nan, math.nan]
        rows.append(row)
    return Table(cols, rows)


def rate_threshold(theta_e: float, method: str) -> float:
    """Lowest |k| with real (1,4) resonances: sqrt(3) for the leading forms, k_c otherwise."""
    if method == "closed":
        return SQRT3
    return thresholds(PlasmaParams(theta_e=theta_e, k=1.0)).k_c


def rate_table(ks: np.ndarray, theta_e: float, method: str = "closed", amplitude: float = 1.0) -> Table:
    """Backward and forward (1,4) Raman rates as functions of k."""
    kc = rate_threshold(theta_e, method)
    bad = [float(k) for k in ks if abs(k) <= kc]
    if bad:
        raise RegimeError(f"rate-scan needs |k| > {kc:.6g} (no Raman instability below); got k = {bad[0]:.6g}")
    rows = []
    for k in ks:
        if method == "closed":
            back, fwd = leading_rates(float(k), theta_e, amplitude)
        else:
            back, fwd = raman_rates(PlasmaParams(epsilon=0.0, theta_e=theta_e, k=float(k)), amplitude)
        rows.append([float(k), back, fwd])
    return Table(["k", "gamma_backward", "gamma_forward"], rows)


def figure_table(figure_id: str, params: PlasmaParams, k_min: float = 1.8, k_max: float = 5.0,
                 samples: int = 50, method: str = "closed", theta_override: float | None = None) -> Table:
    """Data for one of FIGURE_IDS; ``theta_override`` allows theta_e = 1 for the k-scans."""
    th = params.theta_e if theta_override is None else theta_override
    if figure_id == "variety":
        return variety_table(th)
    if figure_id == "stable-resonances":
        return resonance_curves_table(params, STABLE_PAIRS)
    if figure_id == "unstable-resonances":
        return resonance_curves_table(params, UNSTABLE_PAIRS)
    if figure_id == "trace-vs-k":
        return trace_table(k_grid(k_min, k_max, samples), th, method)
    if figure_id == "rate-vs-k":
        return rate_table(k_grid(k_min, k_max, samples), th, method)
    raise ValueError(f"unknown figure id {figure_id!r}; choose from {', '.join(FIGURE_IDS)}")
