"""Correlation measures for the end pair of the chain.

The reduced state of spins 1 and N in the one-flip sector is an X-form
4x4 matrix fixed by three numbers: the flip probabilities p1 = |A_1|^2 and
pN = |A_N|^2 and the coherence A_1 conj(A_N).  In the product basis
(both flipped, 1 flipped, N flipped, none flipped) it reads

    diag(0, p1, pN, 1 - p1 - pN)   with rho[1, 2] = coherence.

All entropies use base-2 logarithms, so the mutual information of a Bell
pair is 2.  The convention 0 log 0 = 0 is enforced, and density-matrix
eigenvalues are clipped to [0, 1] (tolerance 1e-12) before taking logs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, ModeTable, build_mode_table, end_amplitude_series

__all__ = [
    "EndPairState",
    "CorrelationSample",
    "MEASURE_NAMES",
    "end_pair_state",
    "cf_zz",
    "cf_xx",
    "mutual_information",
    "classical_correlation",
    "holevo_information",
    "quantum_discord",
    "concurrence",
    "entanglement_of_formation",
    "sample_all",
    "end_pair_series",
    "series_for_measure",
    "binary_entropy",
]

_NORM_TOL = 1e-12

MEASURE_NAMES = ("cfzz", "cfxx", "mi", "cc", "qd", "eof")

# classical-correlation optimizer defaults; the measurement is a projector
# pair on spin N parameterized by Bloch angles theta in [0, pi/2] (a
# hemisphere covers every pair) and phi in [0, 2 pi)
CC_THETA_GRID = 64
CC_PHI_GRID = 128
CC_REFINE_STEPS = 30


@dataclass(frozen=True)
class EndPairState:
    """The three independent parameters of the end-pair reduced state."""

    p1: float
    pN: float
    coherence: complex

    def __post_init__(self):
        if not (-_NORM_TOL <= self.p1 <= 1 + _NORM_TOL):
            raise ValueError(f"p1 out of range: {self.p1}")
        if not (-_NORM_TOL <= self.pN <= 1 + _NORM_TOL):
            raise ValueError(f"pN out of range: {self.pN}")
        if self.p1 + self.pN > 1 + _NORM_TOL:
            raise ValueError(f"p1 + pN exceeds 1: {self.p1 + self.pN}")
        if abs(self.coherence) ** 2 > self.p1 * self.pN + _NORM_TOL:
            raise ValueError("coherence exceeds the positivity bound")

    def density_matrix(self) -> np.ndarray:
        """4x4 matrix in the (both, first, last, none)-flipped basis."""
        rho = np.zeros((4, 4), dtype=complex)
        rho[1, 1] = self.p1
        rho[2, 2] = self.pN
        rho[3, 3] = 1.0 - self.p1 - self.pN
        rho[1, 2] = self.coherence
        rho[2, 1] = np.conj(self.coherence)
        return rho


@dataclass(frozen=True)
class CorrelationSample:
    """All six correlation measures at one time point."""

    time: float
    cf_zz: float
    cf_xx: float
    mi: float
    cc: float
    qd: float
    eof: float


def end_pair_state(a1: complex, aN: complex) -> EndPairState:
    """Build the end-pair state from the two end amplitudes."""
    p1 = abs(a1) ** 2
    pN = abs(aN) ** 2
    if p1 + pN > 1 + _NORM_TOL:
        raise ValueError(f"|a1|^2 + |aN|^2 = {p1 + pN} exceeds 1")
    return EndPairState(p1=p1, pN=pN, coherence=a1 * np.conj(aN))


def cf_zz(state: EndPairState) -> float:
    """zz correlation function of the end pair: -4 p1 pN (never positive)."""
    return -4.0 * state.p1 * state.pN


def cf_xx(state: EndPairState) -> float:
    """xx correlation function: twice the real part of the coherence.

    Vanishes identically for chains with an even number of sites (the mode
    sum maps onto itself with an overall sign (-1)^(N+1) under reflection).
    """
    return 2.0 * float(np.real(state.coherence))


def binary_entropy(p):
    """H(p) = -p log2 p - (1-p) log2 (1-p), elementwise, with 0 log 0 = 0."""
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    out = np.zeros_like(p)
    inside = (p > 0.0) & (p < 1.0)
    pi = p[inside]
    out[inside] = -pi * np.log2(pi) - (1.0 - pi) * np.log2(1.0 - pi)
    if out.ndim == 0:
        return float(out)
    return out


def _entropy_from_eigs(eigs: np.ndarray) -> float:
    lam = np.clip(eigs, 0.0, 1.0)
    lam = lam[lam > 0.0]
    return float(-(lam * np.log2(lam)).sum())


def _joint_eigenvalues(p1, pN, coh_abs):
    """Eigenvalues of the X-form matrix: 0, 1-p1-pN and the 2x2 block pair."""
    half = 0.5 * (p1 - pN)
    rad = np.sqrt(half * half + coh_abs * coh_abs)
    mid = 0.5 * (p1 + pN)
    return np.array([0.0, 1.0 - p1 - pN, mid + rad, mid - rad])


def mutual_information(state: EndPairState) -> float:
    """Total correlation S(rho_1) + S(rho_N) - S(rho_1N), base 2."""
    s1 = binary_entropy(state.p1)
    sn = binary_entropy(state.pN)
    s1n = _entropy_from_eigs(
        _joint_eigenvalues(state.p1, state.pN, abs(state.coherence)))
    return s1 + sn - s1n


def _chi_grid(p1, pN, coh: complex, theta, phi):
    """Holevo quantity for projector pairs along (theta, phi), vectorized.

    The measured spin is N; the conditional states of spin 1 after the two
    outcomes are 2x2 matrices whose eigenvalues are closed-form in the
    angles, so the whole angle grid is evaluated with array arithmetic.
    """
    q = 1.0 - p1 - pN
    ct = np.cos(theta)
    st = np.sin(theta)
    ephi = np.exp(-1j * phi)
    s_a = binary_entropy(p1)
    chi = np.broadcast_to(s_a, np.broadcast(ct, ephi).shape).copy()
    for sgn in (1.0, -1.0):
        u00 = 0.5 * p1 * (1.0 - sgn * ct)
        u11 = 0.5 * (pN * (1.0 + sgn * ct) + q * (1.0 - sgn * ct))
        off = 0.5 * sgn * coh * st * ephi
        p_out = u00 + u11
        rad = np.sqrt(0.25 * (u00 - u11) ** 2 + np.abs(off) ** 2)
        safe = np.where(p_out > 0.0, p_out, 1.0)
        lam = (0.5 * p_out + rad) / safe
        chi = chi - np.where(p_out > 0.0, p_out * binary_entropy(lam), 0.0)
    return chi


def holevo_information(state: EndPairState, theta, phi):
    """Holevo bound for projective measurements on spin N, elementwise."""
    chi = _chi_grid(state.p1, state.pN, state.coherence,
                    np.asarray(theta, dtype=float),
                    np.asarray(phi, dtype=float))
    if np.ndim(chi) == 0:
        return float(chi)
    return chi


def classical_correlation(
    state: EndPairState,
    n_theta: int = CC_THETA_GRID,
    n_phi: int = CC_PHI_GRID,
    refine_steps: int = CC_REFINE_STEPS,
) -> float:
    """Maximal Holevo information over projective measurements on spin N.

    Coarse (theta, phi) grid followed by local coordinate refinement with a
    shrinking step; deterministic for a given floating-point environment.
    The grid includes theta = 0 and theta = pi/2, so the result is never
    below the value at either pole.
    """
    theta = np.linspace(0.0, 0.5 * np.pi, n_theta)[:, None]
    phi = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)[None, :]
    grid = _chi_grid(state.p1, state.pN, state.coherence, theta, phi)
    flat = int(np.argmax(grid))
    it, ip = np.unravel_index(flat, grid.shape)
    best = float(grid[it, ip])
    t0 = float(theta[it, 0])
    f0 = float(phi[0, ip])
    dt = float(theta[1, 0] - theta[0, 0])
    df = float(phi[0, 1] - phi[0, 0])
    for _ in range(refine_steps):
        cand_t = np.array([t0 - dt, t0 + dt, t0, t0])
        cand_f = np.array([f0, f0, f0 - df, f0 + df])
        cand_t = np.clip(cand_t, 0.0, 0.5 * np.pi)
        cand_f = np.mod(cand_f, 2.0 * np.pi)
        vals = _chi_grid(state.p1, state.pN, state.coherence, cand_t, cand_f)
        j = int(np.argmax(vals))
        if vals[j] > best:
            best = float(vals[j])
            t0 = float(cand_t[j])
            f0 = float(cand_f[j])
        else:
            dt *= 0.5
            df *= 0.5
    return best


def quantum_discord(state: EndPairState) -> float:
    """Mutual information minus classical correlation.

    Small negative values (within 1e-9, optimizer noise) are clamped to 0.
    """
    qd = mutual_information(state) - classical_correlation(state)
    if -1e-9 < qd < 0.0:
        return 0.0
    return qd


def concurrence(state: EndPairState) -> float:
    """Two-qubit concurrence; for this X form it is 2 |coherence|."""
    return 2.0 * abs(state.coherence)


def entanglement_of_formation(state: EndPairState) -> float:
    """Entanglement of formation from the concurrence, base-2 entropy."""
    c = min(concurrence(state), 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(1.0 - c * c)))


# ---------------------------------------------------------------------------
# vectorized trajectories
# ---------------------------------------------------------------------------

def end_pair_series(table: ModeTable, times: np.ndarray):
    """(p1, pN, coherence) arrays over a time grid.

    Evaluated from the field-independent band phases; every measure below
    is invariant under the dropped global phase.
    """
    a1, an = end_amplitude_series(table, times, include_offset_phase=False)
    return np.abs(a1) ** 2, np.abs(an) ** 2, a1 * np.conj(an)


def _mi_series(p1, pN, coh):
    cabs = np.abs(coh)
    half = 0.5 * (p1 - pN)
    rad = np.sqrt(half * half + cabs * cabs)
    mid = 0.5 * (p1 + pN)
    joint = np.stack([1.0 - p1 - pN, mid + rad, mid - rad])
    joint = np.clip(joint, 0.0, 1.0)
    s12 = np.zeros_like(p1)
    for row in joint:
        pos = row > 0.0
        s12[pos] -= row[pos] * np.log2(row[pos])
    return binary_entropy(p1) + binary_entropy(pN) - s12


def _eof_series(p1, pN, coh):
    c = np.minimum(2.0 * np.abs(coh), 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(1.0 - c * c)))


def _cc_values(p1, pN, coh, indices):
    out = np.zeros_like(p1)
    for i in indices:
        out[i] = classical_correlation(
            EndPairState(float(p1[i]), float(pN[i]), complex(coh[i])))
    return out


def series_for_measure(measure: str, p1, pN, coh, mi_floor: float = 1e-15):
    """Trajectory of one measure from the end-pair parameter arrays.

    ``cc`` and ``qd`` require the measurement optimizer per point; both are
    bounded above by the mutual information, so points where mi is below
    ``mi_floor`` are returned as zero without running it.
    """
    if measure == "cfzz":
        return -4.0 * p1 * pN
    if measure == "cfxx":
        return 2.0 * np.real(coh)
    if measure == "mi":
        return _mi_series(p1, pN, coh)
    if measure == "eof":
        return _eof_series(p1, pN, coh)
    if measure in ("cc", "qd"):
        mi = _mi_series(p1, pN, coh)
        idx = np.where(mi >= mi_floor)[0]
        cc = _cc_values(p1, pN, coh, idx)
        return cc if measure == "cc" else mi - cc
    raise ValueError(f"unknown measure: {measure}")


def sample_all(spec: ChainSpec, times) -> list[CorrelationSample]:
    """All six measures along a strictly increasing time grid."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        return []
    if times[0] < 0:
        raise ValueError("times must be >= 0")
    if np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    table = build_mode_table(spec)
    p1, pN, coh = end_pair_series(table, times)
    mi = _mi_series(p1, pN, coh)
    eof = _eof_series(p1, pN, coh)
    out = []
    for i, t in enumerate(times):
        state = EndPairState(float(p1[i]), float(pN[i]), complex(coh[i]))
        cc = classical_correlation(state)
        qd = mi[i] - cc
        if -1e-9 < qd < 0.0:
            qd = 0.0
        out.append(CorrelationSample(
            time=float(t),
            cf_zz=cf_zz(state),
            cf_xx=cf_xx(state),
            mi=float(mi[i]),
            cc=cc,
            qd=float(qd),
            eof=float(eof[i]),
        ))
    return out
