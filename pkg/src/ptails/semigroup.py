"""Exact evaluation of the coupled linear semigroup and its decoupled limit.

The Fourier symbol of the linearized system is the 2x2 matrix generator
``L(k) = [[0, ik], [ik, -2k^2]]`` whose exponential has the closed form

    e^{Lt} = e^{-k^2 t} [[C + k S, i S], [i S, C - k S]]

with ``C = cos(k t D)``, ``S = sin(k t D)/D`` and ``D = sqrt(1 - k^2)``.
For |k| > 1 the trigonometric functions turn hyperbolic; the exponentials
are combined analytically so no intermediate overflows occur.  In the
branch window |1 - k^2| < 1e-4 an even Taylor series in (k t D)^2 through
order 8 is used instead of the direct form, which loses about four digits
to cancellation there.

The decoupled comparison semigroup is diagonal,
``e^{L0 t} = diag(e^{-k^2 t + i k t}, e^{-k^2 t - i k t})``, and the mixing
matrix is ``S_mix = [[1, 1], [1, -1]]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralField, StateVector

__all__ = [
    "BRANCH_THRESHOLD",
    "propagator_cs",
    "eval_eLt",
    "eval_eL0t",
    "mix_S",
    "apply_eLt",
    "apply_eL0t",
    "kernel_bound_check",
    "intertwining_defect",
    "KernelBoundReport",
    "IntertwiningReport",
]

BRANCH_THRESHOLD = 1e-4
_SERIES_ORDER = 8

_COS_COEF = np.array([(-1.0) ** m / math.factorial(2 * m) for m in range(_SERIES_ORDER + 1)])
_SINC_COEF = np.array([(-1.0) ** m / math.factorial(2 * m + 1) for m in range(_SERIES_ORDER + 1)])


def _cs_series(k: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(C, S) including the e^{-k^2 t} damping, by the even series in (ktD)^2."""
    y = (k * t) ** 2 * (1.0 - k * k)
    c = np.full_like(y, _COS_COEF[-1])
    s = np.full_like(y, _SINC_COEF[-1])
    for m in range(_SERIES_ORDER - 1, -1, -1):
        c = c * y + _COS_COEF[m]
        s = s * y + _SINC_COEF[m]
    ek = np.exp(-k * k * t)
    return ek * c, ek * (k * t) * s


def _cs_direct(k: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """(C, S) including the damping, trig for |k|<1 and hyperbolic for |k|>1."""
    d2 = 1.0 - k * k
    C = np.empty_like(k)
    S = np.empty_like(k)
    trig = d2 > 0
    if np.any(trig):
        d = np.sqrt(d2[trig])
        x = k[trig] * t * d
        ek = np.exp(-k[trig] ** 2 * t)
        C[trig] = ek * np.cos(x)
        S[trig] = ek * np.sin(x) / d
    hyp = ~trig
    if np.any(hyp):
        dp = np.sqrt(-d2[hyp])
        x = k[hyp] * t * dp
        a = -k[hyp] ** 2 * t
        # a +- x <= 0 always, so both exponentials stay bounded
        e1 = np.exp(a + x)
        e2 = np.exp(a - x)
        C[hyp] = 0.5 * (e1 + e2)
        S[hyp] = 0.5 * (e1 - e2) / dp
    return C, S


def propagator_cs(k: np.ndarray, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Damped symbol pair (C, S) such that
    e^{Lt}(k) = [[C + kS, iS], [iS, C - kS]]."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    k = np.asarray(k, dtype=float)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    near = np.abs(1.0 - k * k) < BRANCH_THRESHOLD
    C = np.empty_like(k)
    S = np.empty_like(k)
    if np.any(near):
        C[near], S[near] = _cs_series(k[near], t)
    if np.any(~near):
        C[~near], S[~near] = _cs_direct(k[~near], t)
    if scalar:
        return C[0], S[0]
    return C, S


def _entries_from_cs(k, C, S):
    return np.array([[C + k * S, 1j * S], [1j * S, C - k * S]])


def eval_eLt(k: float, t: float) -> np.ndarray:
    """2x2 complex matrix e^{L(k) t}."""
    C, S = propagator_cs(np.array([float(k)]), t)
    return _entries_from_cs(float(k), C[0], S[0])


def eval_eLt_direct(k: float, t: float) -> np.ndarray:
    """Direct (trig/hyperbolic) form regardless of the branch window; used
    to test continuity across the series seam."""
    C, S = _cs_direct(np.array([float(k)]), float(t))
    return _entries_from_cs(float(k), C[0], S[0])


def eval_eLt_series(k: float, t: float) -> np.ndarray:
    """Series form regardless of the branch window."""
    C, S = _cs_series(np.array([float(k)]), float(t))
    return _entries_from_cs(float(k), C[0], S[0])


def eval_eL0t(k: float, t: float) -> np.ndarray:
    """Diagonal decoupled semigroup diag(e^{-k^2 t + ikt}, e^{-k^2 t - ikt})."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    damp = np.exp(-k * k * t)
    return np.array([[damp * np.exp(1j * k * t), 0.0], [0.0, damp * np.exp(-1j * k * t)]])


def mix_S() -> np.ndarray:
    return np.array([[1.0, 1.0], [1.0, -1.0]])


def apply_eLt(state: StateVector, t: float) -> StateVector:
    """Apply the coupled propagator mode-wise to a physical-frame state."""
    if state.frame != "physical":
        raise ValueError("apply_eLt acts on physical-frame states")
    k = state.grid.k
    C, S = propagator_cs(k, t)
    a, b = state.first.coeffs, state.second.coeffs
    na = (C + k * S) * a + 1j * S * b
    nb = 1j * S * a + (C - k * S) * b
    return StateVector(
        SpectralField(state.grid, na), SpectralField(state.grid, nb), "physical"
    ).symmetrized()


def apply_eL0t(state: StateVector, t: float) -> StateVector:
    """Apply the decoupled propagator to a characteristic-frame state."""
    if state.frame != "characteristic":
        raise ValueError("apply_eL0t acts on characteristic-frame states")
    k = state.grid.k
    damp = np.exp(-k * k * t)
    nu = damp * np.exp(1j * k * t) * state.first.coeffs
    nv = damp * np.exp(-1j * k * t) * state.second.coeffs
    return StateVector(
        SpectralField(state.grid, nu), SpectralField(state.grid, nv), "characteristic"
    )


@dataclass(frozen=True)
class KernelBoundReport:
    """Smallest constants realizing the parabolic-like envelope bounds on grids."""

    C_matrix: float          # entry-wise bound with the (1+k^2)^{-1/2} off-diagonal weight
    C_derivative: float      # bound on e^{Lt} (0, ik)^T with the sqrt(t) loss
    violation: bool
    k_grid: np.ndarray
    t_grid: np.ndarray

    def rows(self):
        yield ("matrix", self.C_matrix)
        yield ("derivative_column", self.C_derivative)


def kernel_bound_check(k_grid: np.ndarray, t_grid: np.ndarray,
                       c_cap: float = 1e6) -> KernelBoundReport:
    """Measure the smallest C for the entry-wise envelope

    |e^{Lt}|_ij <= C e^{-min(k^2,1) t/4} [[1, w],[w, 1]],  w = (1+k^2)^{-1/2}

    and for the derivative column |e^{Lt} (0, ik)^T| with an extra 1/sqrt(t).
    """
    k_grid = np.asarray(k_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if k_grid.size == 0 or t_grid.size == 0:
        raise ValueError("empty grid")
    w = 1.0 / np.sqrt(1.0 + k_grid ** 2)
    decay = lambda t: np.exp(-np.minimum(k_grid ** 2, 1.0) * t / 4.0)
    c_mat = 0.0
    c_der = 0.0
    for t in t_grid:
        C, S = propagator_cs(k_grid, t)
        env = decay(t)
        e00 = np.abs(C + k_grid * S)
        e01 = np.abs(S)
        e11 = np.abs(C - k_grid * S)
        c_mat = max(c_mat, (e00 / env).max(), (e11 / env).max(), (e01 / (env * w)).max())
        if t > 0:
            dcol0 = np.abs(k_grid * S)                    # first component of e^{Lt}(0, ik)^T
            dcol1 = np.abs(k_grid * (C - k_grid * S))     # second component
            scale = env / np.sqrt(t)
            c_der = max(c_der, (dcol0 / scale).max(), (dcol1 / (scale * w)).max())
    return KernelBoundReport(
        C_matrix=float(c_mat),
        C_derivative=float(c_der),
        violation=bool(max(c_mat, c_der) > c_cap),
        k_grid=k_grid,
        t_grid=t_grid,
    )


@dataclass(frozen=True)
class IntertwiningReport:
    """sup over a (k, t) grid of sqrt(1+t) e^{k^2 t / 2} |(P S e^{Lt} - e^{L0 t} S)_ij|."""

    sup_entries: np.ndarray   # 2x2 array of measured sups
    k_grid: np.ndarray
    t_grid: np.ndarray

    @property
    def sup(self) -> float:
        return float(self.sup_entries.max())


def weighted_defect_entries(k: np.ndarray, t: float) -> np.ndarray:
    """|sqrt(1+t) e^{k^2 t/2} (P S e^{Lt} - e^{L0 t} S)_ij|, shape (2, 2, len(k)).

    Outside |k| <= 1 the projector kills S e^{Lt} and the weighted magnitude is
    sqrt(1+t) e^{-k^2 t/2} for every entry; exponents are combined so no
    intermediate overflow occurs.
    """
    k = np.asarray(k, dtype=float)
    inside = np.abs(k) <= 1.0
    root = np.sqrt(1.0 + t)
    out = np.empty((2, 2, k.size))
    out[:, :] = root * np.exp(-k * k * t / 2.0)   # the pure e^{L0 t} S part
    if np.any(inside):
        ki = k[inside]
        C, S = propagator_cs(ki, t)
        damp = np.exp(-ki * ki * t)
        ep = damp * np.exp(1j * ki * t)
        em = damp * np.exp(-1j * ki * t)
        # S e^{Lt} rows: row1 = (e00+e10, e01+e11), row2 = (e00-e10, e01-e11)
        r11 = (C + ki * S) + 1j * S
        r12 = 1j * S + (C - ki * S)
        r21 = (C + ki * S) - 1j * S
        r22 = 1j * S - (C - ki * S)
        weight = root * np.exp(ki * ki * t / 2.0)
        out[0, 0, inside] = np.abs(r11 - ep) * weight
        out[0, 1, inside] = np.abs(r12 - ep) * weight
        out[1, 0, inside] = np.abs(r21 - em) * weight
        out[1, 1, inside] = np.abs(r22 + em) * weight
    return out


def intertwining_defect(k_grid: np.ndarray, t_grid: np.ndarray) -> IntertwiningReport:
    k_grid = np.asarray(k_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    sups = np.zeros((2, 2))
    for t in t_grid:
        sups = np.maximum(sups, weighted_defect_entries(k_grid, t).max(axis=2))
    return IntertwiningReport(sup_entries=sups, k_grid=k_grid, t_grid=t_grid)
