"""Hyperbolic symbol of the linearized two-fluid Euler-Maxwell system.

State layout (14 complex entries)::

    B[0:3]  E[3:6]  v_e[6:9]  n_e[9]  v_i[10:13]  n_i[13]

Eigenvalues of the symbol are written ``i*mu`` with ``mu`` real; every
function here returns the real frequencies ``mu``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

# index blocks
B_SL = slice(0, 3)
E_SL = slice(3, 6)
VE_SL = slice(6, 9)
NE = 9
VI_SL = slice(10, 13)
NI = 13
DIM = 14

V_HAT = np.array([0.0, 1.0, 0.0])  # polarization of the WKB electric field
V_HAT_P = np.array([0.0, 0.0, 1.0])
V_HAT_PP = np.array([1.0, 0.0, 0.0])  # propagation direction

# ε=0 labels are ints; ε>0 splits the acoustic sector into "3-", 3, "3+"
ModeLabel = Union[int, str]
EPS_LABELS: Tuple[ModeLabel, ...] = (1, 2, "3-", 3, "3+", 4, 5)
LABELS: Tuple[int, ...] = (1, 2, 3, 4, 5)


class SpectralDegeneracyError(ValueError):
    """The longitudinal quadratic in mu^2 has a (near) repeated root."""


@dataclass(frozen=True)
class PlasmaParams:
    """Non-dimensional parameters; ``omega`` is always sqrt(1 + k^2)."""

    epsilon: float = 0.0
    theta_e: float = 0.1
    alpha_ie: float = 0.0
    k: float = 3.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not (0.0 < self.theta_e < 1.0):
            raise ValueError(f"theta_e must lie in (0, 1), got {self.theta_e}")
        if self.alpha_ie < 0.0:
            raise ValueError(f"alpha_ie must be >= 0, got {self.alpha_ie}")
        if self.k == 0.0 or not math.isfinite(self.k):
            raise ValueError(f"k must be finite and nonzero, got {self.k}")

    @property
    def omega(self) -> float:
        return math.sqrt(1.0 + self.k * self.k)

    def replace(self, **changes: float) -> "PlasmaParams":
        fields = dict(epsilon=self.epsilon, theta_e=self.theta_e, alpha_ie=self.alpha_ie, k=self.k)
        fields.update(changes)
        return PlasmaParams(**fields)


@dataclass(frozen=True)
class Frequency:
    """Frequency (xi, eta) with eta a transverse 2-vector."""

    xi: float
    eta: Tuple[float, float] = (0.0, 0.0)

    @property
    def r(self) -> float:
        return math.hypot(self.eta[0], self.eta[1])

    def as_array(self) -> np.ndarray:
        return np.array([self.xi, self.eta[0], self.eta[1]], dtype=float)

    def shifted(self, dxi: float) -> "Frequency":
        return Frequency(self.xi + dxi, self.eta)


FrequencyLike = Union[Frequency, float, Sequence[float], np.ndarray]


def as_frequency(zeta: FrequencyLike) -> Frequency:
    """Accept a Frequency, a scalar xi, (xi, r) or (xi, eta1, eta2)."""
    if isinstance(zeta, Frequency):
        return zeta
    arr = np.atleast_1d(np.asarray(zeta, dtype=float))
    if arr.size == 1:
        return Frequency(float(arr[0]))
    if arr.size == 2:
        return Frequency(float(arr[0]), (float(arr[1]), 0.0))
    if arr.size == 3:
        return Frequency(float(arr[0]), (float(arr[1]), float(arr[2])))
    raise ValueError(f"cannot interpret {zeta!r} as a frequency")


def _cross_matrix(z: np.ndarray) -> np.ndarray:
    """Matrix C with C @ x = z x x."""
    return np.array(
        [[0.0, -z[2], z[1]], [z[2], 0.0, -z[0]], [-z[1], z[0], 0.0]], dtype=complex
    )


def symbol_matrix(params: PlasmaParams, zeta: FrequencyLike, with_epsilon: bool = True) -> np.ndarray:
    """The symbol A(i zeta) as a 14x14 complex matrix."""
    z = as_frequency(zeta).as_array()
    th = params.theta_e
    se = math.sqrt(params.epsilon) if with_epsilon else 0.0
    a2 = params.alpha_ie**2
    C = _cross_matrix(z)
    eye = np.eye(3)
    A = np.zeros((DIM, DIM), dtype=complex)
    A[B_SL, E_SL] = 1j * C
    A[E_SL, B_SL] = -1j * C
    A[E_SL, VE_SL] = -eye
    A[E_SL, VI_SL] = (se / th) * eye
    A[VE_SL, E_SL] = eye
    A[VE_SL, NE] = 1j * th * z
    A[NE, VE_SL] = 1j * th * z
    A[VI_SL, E_SL] = -(se / th) * eye
    A[VI_SL, NI] = 1j * a2 * se * z
    A[NI, VI_SL] = 1j * se * z
    return A


def epsilon_remainder(params: PlasmaParams, zeta: FrequencyLike) -> np.ndarray:
    """R_A = (A(i zeta) - A_0(i zeta)) / sqrt(epsilon); independent of epsilon."""
    unit = params.replace(epsilon=1.0)
    return symbol_matrix(unit, zeta, True) - symbol_matrix(unit, zeta, False)


# ---------------------------------------------------------------- eigenvalues


def lambda1(xi, r, k_shift: float = 0.0):
    """Fast Klein-Gordon branch sqrt(1 + |zeta|^2) (vectorized)."""
    xi = np.asarray(xi, dtype=float) + k_shift
    return np.sqrt(1.0 + xi * xi + np.asarray(r, dtype=float) ** 2)


def lambda2(xi, r, theta_e: float, k_shift: float = 0.0):
    """Slow Klein-Gordon branch sqrt(1 + theta_e^2 |zeta|^2) (vectorized)."""
    xi = np.asarray(xi, dtype=float) + k_shift
    return np.sqrt(1.0 + theta_e**2 * (xi * xi + np.asarray(r, dtype=float) ** 2))


def branch(label: int, xi, r, theta_e: float):
    """mu_j at epsilon = 0 for j in 1..5, vectorized over (xi, r)."""
    if label == 1:
        return lambda1(xi, r)
    if label == 5:
        return -lambda1(xi, r)
    if label == 2:
        return lambda2(xi, r, theta_e)
    if label == 4:
        return -lambda2(xi, r, theta_e)
    if label == 3:
        return np.zeros(np.broadcast(np.asarray(xi), np.asarray(r)).shape)
    raise ValueError(f"unknown mode label {label!r}")


def branch_gradient(label: int, xi, r, theta_e: float) -> Tuple[np.ndarray, np.ndarray]:
    """(d mu/d xi, d mu/d r) of the epsilon = 0 branch, closed form."""
    xi = np.asarray(xi, dtype=float)
    r = np.asarray(r, dtype=float)
    if label in (1, 5):
        s = 1.0 if label == 1 else -1.0
        lam = lambda1(xi, r)
        return s * xi / lam, s * r / lam
    if label in (2, 4):
        s = 1.0 if label == 2 else -1.0
        lam = lambda2(xi, r, theta_e)
        return s * theta_e**2 * xi / lam, s * theta_e**2 * r / lam
    if label == 3:
        z = np.zeros(np.broadcast(xi, r).shape)
        return z, z.copy()
    raise ValueError(f"unknown mode label {label!r}")


def eigenvalue_gradient(params: PlasmaParams, label: int, zeta: FrequencyLike) -> np.ndarray:
    """Closed-form gradient of mu_j (epsilon = 0) with respect to (xi, eta1, eta2)."""
    z = as_frequency(zeta).as_array()
    if label in (1, 5):
        g = z / lambda1(z[0], np.hypot(z[1], z[2]))
        return g if label == 1 else -g
    if label in (2, 4):
        g = params.theta_e**2 * z / lambda2(z[0], np.hypot(z[1], z[2]), params.theta_e)
        return g if label == 2 else -g
    if label == 3:
        return np.zeros(3)
    raise ValueError(f"unknown mode label {label!r}")


def longitudinal_roots(params: PlasmaParams, s2: float) -> Tuple[float, float]:
    """(mu_2^2, mu_3^2) for the longitudinal quartic at |zeta|^2 = s2.

    With eigenvalue i*mu the quartic reads mu^4 - P mu^2 + Q = 0.  The large
    root uses the stable branch of the quadratic formula and the small one
    the product of roots.
    """
    th2 = params.theta_e**2
    eps = params.epsilon
    a2 = params.alpha_ie**2
    P = 1.0 + th2 * s2 + eps * a2 * s2 + eps / th2
    Q = eps * s2 * (a2 + a2 * th2 * s2 + 1.0)
    disc = P * P - 4.0 * Q
    if disc <= 1e-14 * P * P:
        raise SpectralDegeneracyError(
            f"longitudinal quadratic has a repeated root (P={P}, Q={Q}); epsilon too large"
        )
    big = 0.5 * (P + math.sqrt(disc))
    return big, Q / big


def _acoustic_scaled_speed2(params: PlasmaParams, s2: float) -> float:
    """c~^2 = mu_3^2 / (epsilon |zeta|^2), finite at epsilon = 0 and zeta = 0."""
    big, _ = longitudinal_roots(params, s2) if params.epsilon > 0 else (1.0 + params.theta_e**2 * s2, 0.0)
    a2 = params.alpha_ie**2
    return (a2 + a2 * params.theta_e**2 * s2 + 1.0) / big


def eigenvalues(params: PlasmaParams, zeta: FrequencyLike, with_epsilon: bool = True) -> Dict[ModeLabel, float]:
    """Real frequencies mu_j keyed by mode label.

    epsilon = 0 (or ``with_epsilon=False``): labels 1..5.  Otherwise the
    exact transverse closed form, both longitudinal root pairs, and the
    kernel 3 together with the acoustic pair "3-"/"3+".
    """
    f = as_frequency(zeta)
    s2 = f.xi**2 + f.r**2
    th = params.theta_e
    if params.epsilon == 0.0 or not with_epsilon:
        l1 = math.sqrt(1.0 + s2)
        l2 = math.sqrt(1.0 + th * th * s2)
        return {1: l1, 2: l2, 3: 0.0, 4: -l2, 5: -l1}
    eps = params.epsilon
    l1 = math.sqrt(1.0 + eps / (th * th) + s2)
    big, small = longitudinal_roots(params, s2)
    l2 = math.sqrt(big)
    l3 = math.sqrt(small)
    return {1: l1, 2: l2, "3-": -l3, 3: 0.0, "3+": l3, 4: -l2, 5: -l1}


def acoustic_asymptotic(params: PlasmaParams, zeta: FrequencyLike) -> float:
    """Leading sqrt(epsilon) term of the acoustic frequency mu_3."""
    f = as_frequency(zeta)
    s2 = f.xi**2 + f.r**2
    th2 = params.theta_e**2
    inner = params.alpha_ie**2 * s2 + 1.0 / th2 - 1.0 / (th2 * (1.0 + th2 * s2))
    return math.sqrt(params.epsilon * inner)


def acoustic_low_frequency(params: PlasmaParams, zeta: FrequencyLike) -> float:
    """Small-|zeta| law mu_3 ~ sqrt(eps (alpha^2 + 1/(1+theta^2|zeta|^2))) |zeta|."""
    f = as_frequency(zeta)
    s2 = f.xi**2 + f.r**2
    th2 = params.theta_e**2
    return math.sqrt(params.epsilon * (params.alpha_ie**2 + 1.0 / (1.0 + th2 * s2)) * s2)


# ---------------------------------------------------------------- eigenvectors


def _directions(z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """Unit longitudinal direction d and transverse pair (t1, t2).

    d is zeta/|zeta| oriented to have nonnegative overlap with (1,0,0); at
    zeta = 0 it is (1,0,0).  t1, t2 come from Gram-Schmidt on (v, v', v'')
    projected off d, so that at eta = 0 they equal (0,1,0) and (0,0,1).
    """
    s = float(np.linalg.norm(z))
    if s == 0.0:
        d = V_HAT_PP.copy()
    else:
        d = z / s
        if d @ V_HAT_PP < 0:
            d = -d
    basis: List[np.ndarray] = []
    for cand in (V_HAT, V_HAT_P, V_HAT_PP):
        w = cand - (cand @ d) * d
        for b in basis:
            w = w - (w @ b) * b
        n = np.linalg.norm(w)
        if n > 1e-6:
            basis.append(w / n)
        if len(basis) == 2:
            break
    return d, basis[0], basis[1], s


def transverse_vector(params: PlasmaParams, zeta: FrequencyLike, mu: float, t: np.ndarray) -> np.ndarray:
    """Transverse eigenvector (B = i zeta x v_e, E = i mu v_e, v_e = t)."""
    z = as_frequency(zeta).as_array()
    lam = 1j * mu
    se = math.sqrt(params.epsilon)
    e = np.zeros(DIM, dtype=complex)
    e[B_SL] = 1j * np.cross(z, t)
    e[E_SL] = lam * t
    e[VE_SL] = t
    e[VI_SL] = -(se / params.theta_e) * t
    return e


def longitudinal_vector(params: PlasmaParams, zeta: FrequencyLike, mu: float) -> np.ndarray:
    """Slow Klein-Gordon longitudinal eigenvector, normalized so that v_e = d."""
    z = as_frequency(zeta).as_array()
    d, _, _, s = _directions(z)
    lam = 1j * mu
    th = params.theta_e
    eps = params.epsilon
    se = math.sqrt(eps)
    s2 = s * s
    e = np.zeros(DIM, dtype=complex)
    e[E_SL] = (lam + th * th * s2 / lam) * d
    e[VE_SL] = d
    e[NE] = (1j * th / lam) * (z @ d)
    vi_scal = -(se / th) * lam / (lam * lam + params.alpha_ie**2 * eps * s2)
    e[VI_SL] = vi_scal * e[E_SL]
    e[NI] = (1j * se / lam) * (z @ e[VI_SL])
    return e


def acoustic_vector(params: PlasmaParams, zeta: FrequencyLike, sign: int) -> np.ndarray:
    """Unit acoustic eigenvector for mu = sign * mu_3.

    Written in terms of c~ = mu_3 / (sqrt(eps) |zeta|), which stays finite at
    epsilon = 0 and at zeta = 0, so the same expression yields the limiting
    vectors in both cases.
    """
    z = as_frequency(zeta).as_array()
    d, _, _, s = _directions(z)
    if s > 0:
        d = z / s  # the formulas below assume zeta . d = |zeta|
    th = params.theta_e
    eps = params.epsilon
    se = math.sqrt(eps)
    a2 = params.alpha_ie**2
    c = math.sqrt(_acoustic_scaled_speed2(params, s * s))
    sg = 1.0 if sign > 0 else -1.0
    e = np.zeros(DIM, dtype=complex)
    e[E_SL] = s * d
    e[VE_SL] = (sg * 1j * se * c / (th * th - eps * c * c)) * d
    e[NE] = 1j * th / (th * th - eps * c * c)
    e[VI_SL] = (-sg * 1j * c / (th * (a2 - c * c))) * d
    e[NI] = -1j / (th * (a2 - c * c))
    return e / np.linalg.norm(e)


def kernel_basis(params: PlasmaParams, zeta: FrequencyLike) -> List[np.ndarray]:
    """Six independent kernel vectors for zeta != 0.

    The density vector uses n_e = -alpha_ie^2 n_i, the sign for which the
    ionic momentum row vanishes when epsilon > 0.
    """
    f = as_frequency(zeta)
    z = f.as_array()
    d, t1, t2, s = _directions(z)
    if s == 0.0:
        raise ValueError("kernel basis requires zeta != 0")
    se = math.sqrt(params.epsilon)
    th = params.theta_e
    out: List[np.ndarray] = []
    e = np.zeros(DIM, dtype=complex)
    e[B_SL] = d
    out.append(e)
    for ve, vi in ((t1, 0 * t1), (t2, 0 * t2), (0 * t1, t1), (0 * t2, t2)):
        w = ve - (se / th) * vi
        e = np.zeros(DIM, dtype=complex)
        e[B_SL] = -1j * np.cross(z, w) / (s * s)
        e[VE_SL] = ve
        e[VI_SL] = vi
        out.append(e)
    e = np.zeros(DIM, dtype=complex)
    e[NI] = 1.0
    e[NE] = -params.alpha_ie**2
    e[E_SL] = -1j * th * z * e[NE]
    out.append(e)
    return out


def kernel_basis_eps0(params: PlasmaParams, zeta: FrequencyLike) -> List[np.ndarray]:
    """Eight vectors spanning the epsilon = 0 kernel (valid at zeta = 0 too)."""
    z = as_frequency(zeta).as_array()
    d, t1, t2, s = _directions(z)
    out: List[np.ndarray] = []
    e = np.zeros(DIM, dtype=complex)
    e[B_SL] = d
    out.append(e)
    for t in (t1, t2):
        e = np.zeros(DIM, dtype=complex)
        e[VE_SL] = t
        if s > 0:
            e[B_SL] = -1j * np.cross(z, t) / (s * s)
        else:
            # at zeta = 0 the transverse velocity alone is not in the kernel
            e[VE_SL] = 0.0
            e[B_SL] = t
        out.append(e)
    for t in (d, t1, t2):
        e = np.zeros(DIM, dtype=complex)
        e[VI_SL] = t
        out.append(e)
    e = np.zeros(DIM, dtype=complex)
    e[NI] = 1.0
    out.append(e)
    e = np.zeros(DIM, dtype=complex)
    e[NE] = 1.0
    e[E_SL] = -1j * params.theta_e * z
    out.append(e)
    return out


@dataclass
class Eigenbasis:
    """Explicit eigenvectors at one frequency, each paired with its mu."""

    e_perp: np.ndarray
    e_perp_prime: np.ndarray
    e_perp5: np.ndarray
    e_perp5_prime: np.ndarray
    e_par_plus: np.ndarray
    e_par_minus: np.ndarray
    acoustic_pair: Tuple[np.ndarray, np.ndarray]
    kernel: List[np.ndarray]
    mu: Dict[ModeLabel, float]

    def labelled(self) -> List[Tuple[ModeLabel, float, np.ndarray]]:
        """(label, mu, vector) for all 14 vectors."""
        m = self.mu
        a_minus, a_plus = self.acoustic_pair
        rows: List[Tuple[ModeLabel, float, np.ndarray]] = [
            (1, m[1], self.e_perp),
            (1, m[1], self.e_perp_prime),
            (2, m[2], self.e_par_plus),
            ("3-", m.get("3-", 0.0), a_minus),
        ]
        rows += [(3, 0.0, v) for v in self.kernel]
        rows += [
            ("3+", m.get("3+", 0.0), a_plus),
            (4, m[4], self.e_par_minus),
            (5, m[5], self.e_perp5),
            (5, m[5], self.e_perp5_prime),
        ]
        return rows


def eigenbasis(params: PlasmaParams, zeta: FrequencyLike) -> Eigenbasis:
    """Explicit eigenvectors of A(i zeta); requires zeta != 0 for the kernel."""
    f = as_frequency(zeta)
    z = f.as_array()
    _, t1, t2, _ = _directions(z)
    mu = eigenvalues(params, f)
    return Eigenbasis(
        e_perp=transverse_vector(params, f, mu[1], t1),
        e_perp_prime=transverse_vector(params, f, mu[1], t2),
        e_perp5=transverse_vector(params, f, mu[5], t1),
        e_perp5_prime=transverse_vector(params, f, mu[5], t2),
        e_par_plus=longitudinal_vector(params, f, mu[2]),
        e_par_minus=longitudinal_vector(params, f, mu[4]),
        acoustic_pair=(acoustic_vector(params, f, -1), acoustic_vector(params, f, +1)),
        kernel=kernel_basis(params, f),
        mu=mu,
    )


# ---------------------------------------------------------------- projectors


def _orth_projector(vectors: Iterable[np.ndarray]) -> np.ndarray:
    M = np.column_stack(list(vectors))
    q, rr = np.linalg.qr(M)
    diag = np.abs(np.diag(rr))
    keep = diag > 1e-12 * max(diag.max(), 1.0)
    q = q[:, keep]
    return q @ q.conj().T


def _rank1(e: np.ndarray) -> np.ndarray:
    return np.outer(e, e.conj()) / np.vdot(e, e).real


def projectors(params: PlasmaParams, zeta: FrequencyLike) -> Dict[int, np.ndarray]:
    """Orthogonal eigenprojectors Pi_1..Pi_5 of the epsilon = 0 symbol."""
    p0 = params.replace(epsilon=0.0)
    f = as_frequency(zeta)
    z = f.as_array()
    _, t1, t2, _ = _directions(z)
    mu = eigenvalues(p0, f)
    e1a = transverse_vector(p0, f, mu[1], t1)
    e1b = transverse_vector(p0, f, mu[1], t2)
    e5a = transverse_vector(p0, f, mu[5], t1)
    e5b = transverse_vector(p0, f, mu[5], t2)
    P1 = _rank1(e1a) + _rank1(e1b)
    P5 = _rank1(e5a) + _rank1(e5b)
    P2 = _rank1(longitudinal_vector(p0, f, mu[2]))
    P4 = _rank1(longitudinal_vector(p0, f, mu[4]))
    P3 = _orth_projector(kernel_basis_eps0(p0, f))
    return {1: P1, 2: P2, 3: P3, 4: P4, 5: P5}


@dataclass
class SpectralDecomposition:
    """epsilon = 0 eigenvalues and projectors plus the sqrt(eps) remainder."""

    frequency: Frequency
    entries: List[Tuple[int, float, np.ndarray]]
    remainder: np.ndarray

    def projector(self, label: int) -> np.ndarray:
        for lab, _, P in self.entries:
            if lab == label:
                return P
        raise KeyError(label)

    def reconstruct(self) -> np.ndarray:
        """Sum of i mu_j Pi_j."""
        return sum(1j * mu * P for _, mu, P in self.entries)


def spectral_decomposition(params: PlasmaParams, zeta: FrequencyLike) -> SpectralDecomposition:
    """A(i zeta) = sum_j i mu_j Pi_j + sqrt(eps) R_A with epsilon = 0 data."""
    f = as_frequency(zeta)
    mu = eigenvalues(params, f, with_epsilon=False)
    P = projectors(params, f)
    entries = [(j, mu[j], P[j]) for j in LABELS]
    return SpectralDecomposition(frequency=f, entries=entries, remainder=epsilon_remainder(params, f))


def exact_projectors(params: PlasmaParams, zeta: FrequencyLike) -> Dict[ModeLabel, np.ndarray]:
    """Exact (oblique) eigenprojectors of A(i zeta) for epsilon > 0.

    Built from the explicit right eigenvectors V and the rows of V^{-1}.
    """
    if params.epsilon <= 0.0:
        raise ValueError("exact_projectors needs epsilon > 0; use projectors() at epsilon = 0")
    basis = eigenbasis(params, zeta)
    rows = basis.labelled()
    V = np.column_stack([v for _, _, v in rows])
    W = np.linalg.inv(V)
    out: Dict[ModeLabel, np.ndarray] = {}
    for idx, (lab, _, _) in enumerate(rows):
        out[lab] = out.get(lab, 0) + np.outer(V[:, idx], W[idx, :])
    return out


def mode_multiplicities() -> Mapping[int, int]:
    return {1: 2, 2: 1, 3: 8, 4: 1, 5: 2}
