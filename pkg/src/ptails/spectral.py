"""Periodic spectral substrate: grids, transforms, Fourier multipliers, norms.

Conventions used throughout the package:

* the domain is ``[-L, L)`` sampled at ``n_points`` equispaced points,
* wavenumbers are ``k_j = pi j / L`` in FFT ordering,
* a field stores complex Fourier coefficients ``c_k = FFT(samples) / n_points``,
  so the continuum transform is ``fhat(k) = 2 L c_k`` and the zeroth
  coefficient carries the mean; ``mass = 2 L c_0`` equals the physical
  integral of the field.

Real-valued fields are stored as full complex spectra with Hermitian
symmetry re-enforced after multiplier applications.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Grid",
    "SpectralField",
    "StateVector",
    "NormReport",
    "transform_forward",
    "transform_inverse",
    "derivative",
    "translate",
    "project_low",
    "project_high",
    "mass",
    "norms",
]


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L, L)`` with a power-of-two point count."""

    n_points: int
    half_length: float

    def __post_init__(self):
        if not _is_power_of_two(self.n_points):
            raise ValueError(f"n_points must be a power of two, got {self.n_points}")
        if self.half_length <= 0:
            raise ValueError("half_length must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return -self.half_length + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Wavenumbers ``pi j / L`` in FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)

    @property
    def nyquist_index(self) -> int:
        return self.n_points // 2


@dataclass(frozen=True)
class SpectralField:
    """Complex Fourier coefficients of a (usually real) function on a Grid."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.n_points,):
            raise ValueError(
                f"coefficient array has length {self.coeffs.shape}, "
                f"grid has {self.grid.n_points} points"
            )

    def samples(self) -> np.ndarray:
        """Real physical samples (imaginary residue discarded)."""
        return np.fft.ifft(self.coeffs * self.grid.n_points).real

    def samples_complex(self) -> np.ndarray:
        return np.fft.ifft(self.coeffs * self.grid.n_points)

    def fhat(self) -> np.ndarray:
        """Continuum Fourier transform values ``fhat(k_j)``.

        The grid origin sits at x = -L, so coefficient m carries an extra
        (-1)^m relative to the continuum transform (e^{i k_m L} with
        k_m = pi m / L); the parity factor is applied exactly.
        """
        return 2.0 * self.grid.half_length * self.coeffs * _mode_parity(self.grid)

    def symmetrized(self) -> "SpectralField":
        """Enforce Hermitian symmetry c(-k) = conj(c(k)); zero Nyquist imag."""
        c = self.coeffs
        n = self.grid.n_points
        sym = np.empty_like(c)
        sym[0] = c[0].real
        sym[1:] = 0.5 * (c[1:] + np.conj(c[1:][::-1]))
        sym[n // 2] = sym[n // 2].real
        return SpectralField(self.grid, sym)

    def hermitian_defect(self) -> float:
        c = self.coeffs
        return float(np.abs(c[1:] - np.conj(c[1:][::-1])).max(initial=0.0))


def _mode_parity(grid: Grid) -> np.ndarray:
    """(-1)^m per FFT mode index: the exact value of e^{+- i k_m L}."""
    return 1.0 - 2.0 * (np.arange(grid.n_points) % 2)


def field_from_continuum_fhat(grid: Grid, fhat_values: np.ndarray) -> SpectralField:
    """Field whose continuum transform takes the given values on grid.k."""
    coeffs = np.asarray(fhat_values, dtype=complex) * _mode_parity(grid) \
        / (2.0 * grid.half_length)
    return SpectralField(grid, coeffs)


def transform_forward(samples: np.ndarray, grid: Grid) -> SpectralField:
    samples = np.asarray(samples)
    if samples.shape != (grid.n_points,):
        raise ValueError(
            f"sample array has length {samples.shape}, grid has {grid.n_points} points"
        )
    return SpectralField(grid, np.fft.fft(samples) / grid.n_points)


def transform_inverse(fld: SpectralField) -> np.ndarray:
    return fld.samples()


def field_from_function(grid: Grid, fn: Callable[[np.ndarray], np.ndarray]) -> SpectralField:
    return transform_forward(np.asarray(fn(grid.x), dtype=float), grid)


def derivative(fld: SpectralField, order: int = 1) -> SpectralField:
    """Spectral derivative: multiply by (ik)^order, Nyquist zeroed for odd orders."""
    if order < 0:
        raise ValueError("derivative order must be nonnegative")
    if order == 0:
        return fld
    k = fld.grid.k
    mult = (1j * k) ** order
    if order % 2 == 1:
        mult = mult.copy()
        mult[fld.grid.nyquist_index] = 0.0
    return SpectralField(fld.grid, fld.coeffs * mult)


def translate(fld: SpectralField, shift: float) -> SpectralField:
    """Translate: samples of the result at x equal the input at x + shift.

    Pure phase multiplier exp(i k shift); |c_k| are preserved exactly and the
    mass (k = 0 mode) is unchanged.
    """
    return SpectralField(fld.grid, fld.coeffs * np.exp(1j * fld.grid.k * shift)).symmetrized()


def project_low(fld: SpectralField) -> SpectralField:
    """Fourier multiplier with the characteristic function of |k| <= 1."""
    mask = np.abs(fld.grid.k) <= 1.0
    return SpectralField(fld.grid, np.where(mask, fld.coeffs, 0.0))


def project_high(fld: SpectralField) -> SpectralField:
    """Complement of project_low: zero all modes with |k| <= 1."""
    mask = np.abs(fld.grid.k) > 1.0
    return SpectralField(fld.grid, np.where(mask, fld.coeffs, 0.0))


def mass(fld: SpectralField) -> float:
    """Integral over the periodic domain, i.e. 2L c_0."""
    return float((2.0 * fld.grid.half_length * fld.coeffs[0]).real)


def l2_norm(fld: SpectralField) -> float:
    """Spectral L2 norm: sqrt(2L sum |c_k|^2) (Parseval)."""
    return float(np.sqrt(2.0 * fld.grid.half_length * np.sum(np.abs(fld.coeffs) ** 2)))


@dataclass(frozen=True)
class NormReport:
    """Instantaneous norms of a field: Lp of the field and derivatives,
    the sup of the continuum Fourier transform, and the x^2-weighted L2."""

    t: float
    lp: dict            # order m -> {1: L1, 2: L2, inf: Linf}
    sup_fourier: float
    weighted_l2: float  # || x^2 f ||_2 on the truncated domain

    def l2(self, order: int = 0) -> float:
        return self.lp[order][2]


def norms(fld: SpectralField, t: float = 0.0, max_order: int = 2) -> NormReport:
    g = fld.grid
    dx = g.dx
    lp = {}
    for m in range(max_order + 1):
        s = derivative(fld, m).samples() if m else fld.samples()
        lp[m] = {
            1: float(np.sum(np.abs(s)) * dx),
            2: float(np.sqrt(np.sum(s * s) * dx)),
            "inf": float(np.abs(s).max()),
        }
    s0 = fld.samples()
    w = g.x ** 2 * s0
    return NormReport(
        t=float(t),
        lp=lp,
        sup_fourier=float(np.abs(fld.fhat()).max()),
        weighted_l2=float(np.sqrt(np.sum(w * w) * dx)),
    )


@dataclass(frozen=True)
class StateVector:
    """Two-component state (a, b) in the physical frame or (u, v) in the
    characteristic frame; both components share one grid."""

    first: SpectralField
    second: SpectralField
    frame: str = "physical"   # "physical" -> (a, b); "characteristic" -> (u, v)

    def __post_init__(self):
        if self.first.grid != self.second.grid:
            raise ValueError("components must share one grid")
        if self.frame not in ("physical", "characteristic"):
            raise ValueError(f"unknown frame {self.frame!r}")

    @property
    def grid(self) -> Grid:
        return self.first.grid

    def symmetrized(self) -> "StateVector":
        return StateVector(self.first.symmetrized(), self.second.symmetrized(), self.frame)


def state_from_samples(grid: Grid, a: np.ndarray, b: np.ndarray,
                       frame: str = "physical") -> StateVector:
    return StateVector(transform_forward(a, grid), transform_forward(b, grid), frame)
