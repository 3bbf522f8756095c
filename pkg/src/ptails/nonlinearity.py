"""Pluggable nonlinearities f(a,b), g(a,b) with admissibility checks.

A nonlinearity is admissible when g vanishes quadratically at the origin
(with quadratic part g0 and cubically small difference), and f vanishes
linearly, each with the matching Lipschitz bounds.  The checks here sample
those inequalities at small points rather than proving them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "Nonlinearity",
    "AdmissibilityReport",
    "default_nonlinearity",
    "zero_nonlinearity",
    "quadratic_nonlinearity",
]

_FD_STEP = 1e-5


@dataclass
class Nonlinearity:
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    name: str = "custom"
    hessian: np.ndarray | None = None   # Hessian of g at the origin, 2x2

    def __post_init__(self):
        if self.hessian is None:
            self.hessian = self._fd_hessian()
        self.hessian = np.asarray(self.hessian, dtype=float)

    def _fd_hessian(self) -> np.ndarray:
        h = _FD_STEP
        g = lambda a, b: float(self.g(np.asarray(a, float), np.asarray(b, float)))
        gaa = (g(h, 0) - 2 * g(0, 0) + g(-h, 0)) / h ** 2
        gbb = (g(0, h) - 2 * g(0, 0) + g(0, -h)) / h ** 2
        gab = (g(h, h) - g(h, -h) - g(-h, h) + g(-h, -h)) / (4 * h ** 2)
        return np.array([[gaa, gab], [gab, gbb]])

    def quadratic_part(self, a, b):
        """g0(a, b) = (1/2) (a, b) H (a, b)^T."""
        H = self.hessian
        return 0.5 * (H[0, 0] * a * a + 2 * H[0, 1] * a * b + H[1, 1] * b * b)

    def source(self, a, b, bx):
        """h(a, b) = g(a, b) + f(a, b) * db/dx, the Duhamel source density."""
        return self.g(a, b) + self.f(a, b) * bx

    def admissibility(self, scale: float = 1e-2, n_samples: int = 64,
                      seed: int = 7) -> "AdmissibilityReport":
        rng = np.random.default_rng(seed)
        pts = scale * rng.uniform(-1.0, 1.0, size=(n_samples, 2))
        r = np.linalg.norm(pts, axis=1)
        gv = self.g(pts[:, 0], pts[:, 1])
        fv = self.f(pts[:, 0], pts[:, 1])
        dg = gv - self.quadratic_part(pts[:, 0], pts[:, 1])
        g00 = float(np.atleast_1d(self.g(np.zeros(1), np.zeros(1)))[0])
        f00 = float(np.atleast_1d(self.f(np.zeros(1), np.zeros(1)))[0])
        h = _FD_STEP
        grad = np.array([
            (float(np.atleast_1d(self.g(np.array([h]), np.array([0.0])))[0])
             - float(np.atleast_1d(self.g(np.array([-h]), np.array([0.0])))[0])) / (2 * h),
            (float(np.atleast_1d(self.g(np.array([0.0]), np.array([h])))[0])
             - float(np.atleast_1d(self.g(np.array([0.0]), np.array([-h])))[0])) / (2 * h),
        ])
        return AdmissibilityReport(
            origin_value=abs(g00),
            origin_gradient=float(np.abs(grad).max()),
            f_origin_value=abs(f00),
            C_quadratic=float(np.max(np.abs(gv) / r ** 2)),
            C_cubic=float(np.max(np.abs(dg) / r ** 3)),
            C_linear=float(np.max(np.abs(fv) / r)),
        )


@dataclass(frozen=True)
class AdmissibilityReport:
    origin_value: float
    origin_gradient: float
    f_origin_value: float
    C_quadratic: float
    C_cubic: float
    C_linear: float

    @property
    def admissible(self) -> bool:
        return (self.origin_value <= 1e-10 and self.origin_gradient <= 1e-6
                and self.f_origin_value <= 1e-10 and np.isfinite(self.C_quadratic)
                and np.isfinite(self.C_cubic) and np.isfinite(self.C_linear))


def default_nonlinearity() -> Nonlinearity:
    """g(a,b) = a^2, f(a,b) = a: passes the admissibility checks with
    g0 = g, and yields Hessian constants (1/4, -1/4, 1/2) so both the
    Burgers self-interaction and the cross-characteristic driving act."""
    return Nonlinearity(
        g=lambda a, b: a * a,
        f=lambda a, b: a,
        name="default",
        hessian=np.array([[2.0, 0.0], [0.0, 0.0]]),
    )


def zero_nonlinearity() -> Nonlinearity:
    return Nonlinearity(
        g=lambda a, b: np.zeros_like(np.asarray(a, dtype=float)),
        f=lambda a, b: np.zeros_like(np.asarray(a, dtype=float)),
        name="zero",
        hessian=np.zeros((2, 2)),
    )


def quadratic_nonlinearity(gaa: float = 0.0, gab: float = 0.0, gbb: float = 0.0,
                           fa: float = 0.0, fb: float = 0.0,
                           name: str = "quadratic") -> Nonlinearity:
    """General quadratic g = gaa a^2 + gab a b + gbb b^2 with linear f."""
    return Nonlinearity(
        g=lambda a, b: gaa * a * a + gab * a * b + gbb * b * b,
        f=lambda a, b: fa * a + fb * b,
        name=name,
        hessian=np.array([[2 * gaa, gab], [gab, 2 * gbb]]),
    )
