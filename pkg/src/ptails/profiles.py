"""Self-similar Burgers profiles, long-tailed correction profiles, and the
expansion coefficients attached to one initial condition.

The leading profile solves g'' + (z/2) g' + g/2 + gamma (g^2)' = 0 with
prescribed mass alpha and has the closed form

    g_0(z) = tanh(alpha gamma / 2) e^{-z^2/4}
             / (gamma sqrt(pi) (1 + tanh(alpha gamma / 2) erf(z/2))),

equivalently g_0 = (ln phi)' / gamma with phi = 1 + tanh(alpha gamma/2) erf(z/2);
derivatives follow from the logarithmic-derivative recursion.  The order-n
corrections g_n solve the linearized equation L g + 2 gamma (g_0 g)' = 0 and
are built as the fixed point g = f_n(-/+ z) + R[g] where R is a pair of
Wronskian-weighted integrals against the two homogeneous solutions
f_n(z), f_n(-z); the map contracts in the algebraically weighted sup norm
for |alpha gamma| small.

Sign conventions: variation of parameters for L g = S with Wronskian
W(z) = f_n(z) d/dz f_n(-z) - f_n(-z) d/dz f_n(z) = W(0) e^{-z^2/4},
W(0) = -2 f_n(0) f_n'(0), gives

    R[g](z) = -(gamma / W(0)) [ f_n(z)  int_{-inf}^z  e^{s^2/4} h_-(s) g_0 g ds
                              + f_n(-z) int_z^{+inf} e^{s^2/4} h_+(s) g_0 g ds ],

with h_-(s) = s f_n(-s) - 2 f_n'(-s) and h_+(s) = s f_n(s) + 2 f_n'(s) (the
derivative combinations whose Gaussian leading order cancels).  The overall
sign is fixed by requiring L R = -2 gamma (g_0 g)', which the residual tests
verify directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import erf

from . import special
from .nonlinearity import Nonlinearity
from .special import EnvelopeDescriptor, ProfileSample

__all__ = [
    "ExpansionCoefficients",
    "BurgersProfile",
    "ExpansionModel",
    "graded_grid",
    "corrected_trapezoid",
    "cumulative_corrected_trapezoid",
    "g0_profile",
    "hessian_constants",
    "gn_fixed_point",
    "build_expansion_terms",
    "d_coefficients_analytic",
    "ProfileInterpolant",
]

POLE_GUARD = 0.1
CONTRACTION_LIMIT = 0.1


def graded_grid(z_max: float = 60.0, h0: float = 1e-3, h_max: float = 0.1,
                ratio: float = 1.03) -> np.ndarray:
    """Symmetric grid on [-z_max, z_max], spacing h0 at the origin growing
    geometrically to h_max; resolves the Gaussian core and the algebraic
    tail windows simultaneously."""
    pts = [0.0]
    h = h0
    while pts[-1] < z_max:
        pts.append(pts[-1] + h)
        h = min(h * ratio, h_max)
    zp = np.array(pts)
    zp[-1] = z_max
    return np.concatenate([-zp[::-1], zp[1:]])


def corrected_trapezoid(w: np.ndarray, wp: np.ndarray, z: np.ndarray) -> float:
    """Trapezoid with the Euler-Maclaurin endpoint-derivative correction;
    fourth order on non-uniform grids given exact derivative samples."""
    h = np.diff(z)
    seg = h / 2 * (w[:-1] + w[1:]) - h ** 2 / 12 * (wp[1:] - wp[:-1])
    return float(seg.sum())


def cumulative_corrected_trapezoid(w: np.ndarray, wp: np.ndarray,
                                   z: np.ndarray) -> np.ndarray:
    h = np.diff(z)
    seg = h / 2 * (w[:-1] + w[1:]) - h ** 2 / 12 * (wp[1:] - wp[:-1])
    return np.concatenate([[0.0], np.cumsum(seg)])


@dataclass
class ExpansionCoefficients:
    """Everything the expansion attaches to one initial condition."""

    alpha_plus: float
    alpha_minus: float
    c_plus: float
    c_minus: float
    c3: float
    d: list = field(default_factory=list)   # [(d_n^+, d_n^-)] for n = 1..N
    N: int = 1

    @property
    def epsilon(self) -> float:
        return 0.5 ** (self.N + 2)

    def contraction_ok(self) -> bool:
        return (abs(self.alpha_plus * self.c_plus) <= CONTRACTION_LIMIT
                and abs(self.alpha_minus * self.c_minus) <= CONTRACTION_LIMIT)


@dataclass
class BurgersProfile:
    sample: ProfileSample
    alpha: float
    gamma: float

    @property
    def mass_error(self) -> float:
        s = self.sample
        return abs(corrected_trapezoid(s.values, s.derivs[1], s.z_grid) - self.alpha)


def _g0_scaled_parts(z, alpha, gamma):
    """e^{z^2/4} g_0 and its derivative, overflow-free closed forms."""
    if gamma == 0.0:
        g0e = np.full_like(z, alpha / np.sqrt(4 * np.pi))
        return g0e, np.zeros_like(z)
    tau = np.tanh(alpha * gamma / 2.0)
    phi = 1.0 + tau * erf(z / 2.0)
    g0e = (tau / (gamma * np.sqrt(np.pi))) / phi
    g0e_p = -g0e * (tau * np.exp(-z * z / 4.0) / np.sqrt(np.pi)) / phi
    return g0e, g0e_p


def g0_function(alpha: float, gamma: float):
    """The leading profile as a plain callable (closed form, any argument)."""
    if gamma == 0.0:
        return lambda z: alpha * np.exp(-np.asarray(z) ** 2 / 4.0) / np.sqrt(4.0 * np.pi)
    tau = np.tanh(alpha * gamma / 2.0)

    def g0(z):
        z = np.asarray(z, dtype=float)
        return (tau * np.exp(-z * z / 4.0)
                / (gamma * np.sqrt(np.pi) * (1.0 + tau * erf(z / 2.0))))

    return g0


def g0_profile(alpha: float, gamma: float, z_grid: np.ndarray) -> BurgersProfile:
    """Closed-form mass-alpha self-similar Burgers profile with derivatives
    to order 3; gamma = 0 falls back to the heat-kernel Gaussian."""
    z = np.asarray(z_grid, dtype=float)
    if gamma == 0.0:
        E = np.exp(-z * z / 4.0) / np.sqrt(4.0 * np.pi)
        Q = {0: np.polynomial.Polynomial([1.0])}
        for m in range(3):
            Q[m + 1] = Q[m].deriv() - np.polynomial.Polynomial([0.0, 0.5]) * Q[m]
        vals = [alpha * Q[m](z) * E for m in range(4)]
    else:
        tau = np.tanh(alpha * gamma / 2.0)
        phi = 1.0 + tau * erf(z / 2.0)
        if np.any(phi < POLE_GUARD):
            raise ValueError(
                f"denominator 1 + tanh(alpha gamma/2) erf(z/2) drops below "
                f"{POLE_GUARD}; profile too close to its pole"
            )
        E = np.exp(-z * z / 4.0) / np.sqrt(np.pi)
        psi = tau * E / phi
        dpsi = -(z / 2.0) * psi - psi ** 2
        d2psi = -0.5 * psi - (z / 2.0) * dpsi - 2.0 * psi * dpsi
        d3psi = -dpsi - (z / 2.0) * d2psi - 2.0 * dpsi ** 2 - 2.0 * psi * d2psi
        vals = [psi / gamma, dpsi / gamma, d2psi / gamma, d3psi / gamma]
    sample = ProfileSample(
        z_grid=z,
        values=vals[0],
        derivs={1: vals[1], 2: vals[2], 3: vals[3]},
        envelope=EnvelopeDescriptor(0.0, 0.0),
        metadata={"kind": "g0", "alpha": alpha, "gamma": gamma},
    )
    return BurgersProfile(sample=sample, alpha=alpha, gamma=gamma)


def burgers_residual(profile: BurgersProfile) -> float:
    """sup |g'' + (z/2) g' + g/2 + gamma (g^2)'| over the profile grid."""
    s = profile.sample
    z = s.z_grid
    g, gp, gpp = s.values, s.derivs[1], s.derivs[2]
    res = gpp + z / 2.0 * gp + g / 2.0 + profile.gamma * 2.0 * g * gp
    return float(np.abs(res).max())


def hessian_constants(nl: Nonlinearity, check_admissible: bool = True
                      ) -> tuple[float, float, float]:
    """(c_+, c_-, c_3) from the Hessian H of g at the origin:
    c_+- = +-(1/8) (1, +-1) H (1, +-1)^T, and the mixed coefficient
    c_3 = (H_11 - H_22) / 4 from matching the (a+b)(a-b) term."""
    if check_admissible:
        rep = nl.admissibility()
        if not rep.admissible:
            raise ValueError(f"nonlinearity fails the admissibility checks: {rep}")
    H = nl.hessian
    vp = np.array([1.0, 1.0])
    vm = np.array([1.0, -1.0])
    c_plus = float(vp @ H @ vp) / 8.0
    c_minus = -float(vm @ H @ vm) / 8.0
    c3 = float(H[0, 0] - H[1, 1]) / 4.0
    return c_plus, c_minus, c3


@dataclass
class FixedPointInfo:
    iterations: int
    final_delta: float
    contraction_factor: float
    converged: bool


def gn_fixed_point(n: int, alpha: float, gamma: float, z_grid: np.ndarray,
                   tol: float = 1e-10, max_iter: int = 50, sign: str = "+",
                   ) -> tuple[ProfileSample, ProfileSample, FixedPointInfo]:
    """Correction profile g_n = f_n(-/+z) + R and its remainder R by Picard
    iteration of the Wronskian-integral map; sign '+' gives the profile with
    the algebraic tail ahead (z -> +inf), '-' the mirrored one.

    Cumulative integrals use the derivative-corrected trapezoid on the graded
    grid; all e^{z^2/4}-weighted factors are combined analytically so nothing
    overflows.  Derivative samples to order 3 are propagated through the map.
    """
    if abs(alpha * gamma) > CONTRACTION_LIMIT:
        raise ValueError(
            f"|alpha*gamma| = {abs(alpha * gamma):.3f} outside the contraction "
            f"regime (limit {CONTRACTION_LIMIT})"
        )
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    z = np.asarray(z_grid, dtype=float)
    if not np.allclose(z, -z[::-1], atol=1e-12):
        raise ValueError("z_grid must be symmetric about 0 (f_n(-z) by reversal)")
    beta = 0.5 ** n
    lam = 1.0 - 0.5 ** (n + 1)
    F = np.array([special.fn_value(n, z, m) for m in range(4)])
    Fm = F[:, ::-1].copy()   # f_n^{(m)}(-z); chain-rule signs handled per use
    f0, f1, f2, f3 = F
    f0m, f1m, f2m, f3m = Fm
    i0 = int(np.searchsorted(z, 0.0))
    W0 = -2.0 * f0[i0] * f1[i0]
    g0e, g0e_p = _g0_scaled_parts(z, alpha, gamma)
    g0s = g0_profile(alpha, gamma, z).sample
    hm = z * f0m - 2.0 * f1m
    hp = z * f0 + 2.0 * f1
    hm_p = f0m - z * f1m + 2.0 * f2m
    hp_p = f0 + z * f1 + 2.0 * f2
    if sign == "+":
        base = (f0m, -f1m, f2m, -f3m)
    else:
        base = (f0, f1, f2, f3)
    g, gp, gpp, gppp = (b.copy() for b in base)
    weight = (1.0 + z * z) ** ((2.0 - beta) / 2.0)
    R = np.zeros_like(z)
    Rp = np.zeros_like(z)
    Rpp = np.zeros_like(z)
    Rppp = np.zeros_like(z)
    deltas = []
    converged = gamma == 0.0
    for _ in range(max_iter):
        if gamma == 0.0:
            break
        q = g0e * g
        qp = g0e_p * g + g0e * gp
        wm = hm * q
        wpl = hp * q
        I1 = cumulative_corrected_trapezoid(wm, hm_p * q + hm * qp, z)
        I2f = cumulative_corrected_trapezoid(wpl, hp_p * q + hp * qp, z)
        I2 = I2f[-1] - I2f
        c = -gamma / W0
        g0g = g0s.values * g
        g0g_p = g0s.derivs[1] * g + g0s.values * gp
        g0g_pp = g0s.derivs[2] * g + 2.0 * g0s.derivs[1] * gp + g0s.values * gpp
        R = c * (f0 * I1 + f0m * I2)
        Rp = c * (f1 * I1 - f1m * I2) - 2.0 * gamma * g0g
        Rpp = c * (f2 * I1 + f2m * I2) + gamma * z * g0g - 2.0 * gamma * g0g_p
        Rppp = (c * (f3 * I1 - f3m * I2)
                + gamma * (2.0 * lam - z * z / 2.0 + 1.0) * g0g
                + gamma * z * g0g_p - 2.0 * gamma * g0g_pp)
        gnew = base[0] + R
        delta = float(np.abs((gnew - g) * weight).max())
        deltas.append(delta)
        g = gnew
        gp = base[1] + Rp
        gpp = base[2] + Rpp
        gppp = base[3] + Rppp
        if delta < tol:
            converged = True
            break
    contraction = deltas[-1] / deltas[-2] if len(deltas) >= 2 and deltas[-2] > 0 else 0.0
    info = FixedPointInfo(
        iterations=len(deltas),
        final_delta=deltas[-1] if deltas else 0.0,
        contraction_factor=float(contraction),
        converged=converged,
    )
    if not converged:
        raise RuntimeError(
            f"fixed point did not converge in {max_iter} iterations "
            f"(last delta {info.final_delta:.3e}, contraction ~{contraction:.3f})"
        )
    gn = ProfileSample(
        z_grid=z, values=g, derivs={1: gp, 2: gpp, 3: gppp},
        envelope=EnvelopeDescriptor(beta - 1.0, 2.0 - beta, mirrored=(sign == "-")),
        metadata={"n": n, "sign": sign, "alpha": alpha, "gamma": gamma,
                  "tol": tol, "W0": W0},
    )
    rn = ProfileSample(
        z_grid=z, values=R, derivs={1: Rp, 2: Rpp, 3: Rppp},
        envelope=None,
        metadata={"n": n, "sign": sign, "kind": "remainder"},
    )
    return gn, rn, info


def rn_envelope_constant(rn: ProfileSample, n: int, order: int = 0,
                         z_cap: float = 40.0) -> float:
    """Measured sup of e^{z^2/4} (1+z^2)^{-(1+m-2^{-n})/2} |d^m R_n| (the
    two-sided Gaussian weight of the remainder estimate), in log space so the
    weight cannot overflow; restricted to |z| <= z_cap where the product is
    resolvable in double precision."""
    beta = 0.5 ** n
    z = rn.z_grid
    msk = np.abs(z) <= z_cap
    v = np.abs(rn.deriv(order)[msk])
    logw = z[msk] ** 2 / 4.0 - (1.0 + order - beta) / 2.0 * np.log1p(z[msk] ** 2)
    logv = np.where(v > 0, np.log(np.maximum(v, 1e-300)), -np.inf)
    return float(np.exp((logw + logv).max()))


def gn_equation_residual(gn: ProfileSample, g0: BurgersProfile, n: int,
                         gamma: float) -> float:
    """sup |L g_n + 2 gamma (g_0 g_n)'| over the grid."""
    z = gn.z_grid
    res = special.lcal_apply(gn.values, gn.derivs[1], gn.derivs[2], z, n)
    res = res + 2.0 * gamma * (g0.sample.derivs[1] * gn.values
                               + g0.sample.values * gn.derivs[1])
    return float(np.abs(res).max())


class ProfileInterpolant:
    """Cubic-spline evaluation of a profile with envelope-based extrapolation
    beyond the sampled range: algebraic-tail side continues as C |z|^p, the
    Gaussian side as zero."""

    def __init__(self, sample: ProfileSample, algebraic_side: str | None,
                 tail_exponent: float | None = None):
        self.z_lo = float(sample.z_grid[0])
        self.z_hi = float(sample.z_grid[-1])
        self.spline = CubicSpline(sample.z_grid, sample.values)
        self.algebraic_side = algebraic_side
        self.tail_exponent = tail_exponent
        self.c_hi = sample.values[-1] * self.z_hi ** (-tail_exponent) \
            if algebraic_side == "right" else 0.0
        self.c_lo = sample.values[0] * abs(self.z_lo) ** (-tail_exponent) \
            if algebraic_side == "left" else 0.0

    def __call__(self, zz: np.ndarray) -> np.ndarray:
        zz = np.asarray(zz, dtype=float)
        out = self.spline(np.clip(zz, self.z_lo, self.z_hi))
        out = np.where((zz >= self.z_lo) & (zz <= self.z_hi), out, 0.0)
        if self.algebraic_side == "right":
            hi = zz > self.z_hi
            out = np.where(hi, self.c_hi * np.abs(np.where(hi, zz, 1.0)) ** self.tail_exponent, out)
        elif self.algebraic_side == "left":
            lo = zz < self.z_lo
            out = np.where(lo, self.c_lo * np.abs(np.where(lo, zz, 1.0)) ** self.tail_exponent, out)
        return out


@dataclass
class ExpansionModel:
    """Constructed profiles plus coefficients: the full asymptotic model for
    one initial condition."""

    coeffs: ExpansionCoefficients
    g0_plus: BurgersProfile
    g0_minus: BurgersProfile
    gn_plus: dict = field(default_factory=dict)    # n -> ProfileSample
    gn_minus: dict = field(default_factory=dict)
    rn_plus: dict = field(default_factory=dict)
    rn_minus: dict = field(default_factory=dict)

    def interpolants(self):
        interp = {
            "g0+": ProfileInterpolant(self.g0_plus.sample, None),
            "g0-": ProfileInterpolant(self.g0_minus.sample, None),
        }
        for n, s in self.gn_plus.items():
            interp[f"g{n}+"] = ProfileInterpolant(s, "right", -2.0 + 0.5 ** n)
        for n, s in self.gn_minus.items():
            interp[f"g{n}-"] = ProfileInterpolant(s, "left", -2.0 + 0.5 ** n)
        return interp


def build_expansion_model(coeffs: ExpansionCoefficients, z_grid: np.ndarray,
                          tol: float = 1e-10, max_iter: int = 50) -> ExpansionModel:
    """Construct g_0 and g_n profiles for both characteristic families."""
    g0p = g0_profile(coeffs.alpha_plus, coeffs.c_plus, z_grid)
    g0m = g0_profile(coeffs.alpha_minus, coeffs.c_minus, z_grid)
    model = ExpansionModel(coeffs=coeffs, g0_plus=g0p, g0_minus=g0m)
    for n in range(1, coeffs.N + 1):
        gp, rp, _ = gn_fixed_point(n, coeffs.alpha_plus, coeffs.c_plus, z_grid,
                                   tol=tol, max_iter=max_iter, sign="+")
        gm, rm, _ = gn_fixed_point(n, coeffs.alpha_minus, coeffs.c_minus, z_grid,
                                   tol=tol, max_iter=max_iter, sign="-")
        model.gn_plus[n] = gp
        model.gn_minus[n] = gm
        model.rn_plus[n] = rp
        model.rn_minus[n] = rm
    return model


def build_expansion_terms(model: ExpansionModel, t: float, x: np.ndarray):
    """Sample (u0, u1, v0, v1) on physical points x at time t by rescaled
    cubic interpolation with envelope-based tail extrapolation."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    interp = model.interpolants()
    root = np.sqrt(1.0 + t)
    zz = np.asarray(x, dtype=float) / root
    u0 = interp["g0+"](zz) / root
    v0 = interp["g0-"](zz) / root
    u1 = np.zeros_like(zz)
    v1 = np.zeros_like(zz)
    for idx, (dp, dm) in enumerate(model.coeffs.d, start=1):
        pref = (1.0 + t) ** (-(1.0 - 0.5 ** (idx + 1)))
        if idx in model.gn_plus:
            u1 = u1 + dp * pref * interp[f"g{idx}+"](zz)
        if idx in model.gn_minus:
            v1 = v1 + dm * pref * interp[f"g{idx}-"](zz)
    return u0, u1, v0, v1


def profile_mass(sample: ProfileSample) -> float:
    return corrected_trapezoid(sample.values, sample.derivs[1], sample.z_grid)


def gn_total_mass(gn: ProfileSample, n: int) -> float:
    """Mass of g_n over the whole line: grid part plus the exact algebraic
    and Gaussian tail integrals of the f_n(-/+z) component (the remainder
    part has Gaussian tails and needs no correction).  Zero analytically."""
    z_max = float(gn.z_grid[-1])
    grid_part = profile_mass(gn)
    # total tail of f_n (or its mirror) beyond |z| = z_max: F(-Z) - F(Z)
    corr = float(special.fn_value(n, -z_max, order=-1)
                 - special.fn_value(n, z_max, order=-1))
    return grid_part + corr


def d_coefficients_analytic(model: ExpansionModel) -> list[tuple[float, float]]:
    """Recursive d_n from the source masses and the limit-profile prefactor
    kappa_n = 2^{-1-2^{-n}} / sqrt(4 pi):

        d_1^+ = -c_- M((g_0^-)^2) kappa_1,
        d_{m+1}^+ = -2 c_- d_m^- M(g_0^- g_m^-) kappa_{m+1},

    and the mirrored formulas with +c_+ and the g^+ family for d^-.  The
    prefactor and signs are cross-validated against fit mode, never trusted
    alone.
    """
    co = model.coeffs
    kappa = lambda n: 2.0 ** (-1.0 - 0.5 ** n) / np.sqrt(4.0 * np.pi)
    g0p, g0m = model.g0_plus.sample, model.g0_minus.sample
    out = []
    d_prev_p = d_prev_m = None
    for n in range(1, co.N + 1):
        if n == 1:
            Mm = corrected_trapezoid(g0m.values ** 2, 2 * g0m.values * g0m.derivs[1],
                                     g0m.z_grid)
            Mp = corrected_trapezoid(g0p.values ** 2, 2 * g0p.values * g0p.derivs[1],
                                     g0p.z_grid)
            dp = -co.c_minus * Mm * kappa(1)
            dm = co.c_plus * Mp * kappa(1)
        else:
            gm_prev = model.gn_minus[n - 1]
            gp_prev = model.gn_plus[n - 1]
            Mm = corrected_trapezoid(
                g0m.values * gm_prev.values,
                g0m.derivs[1] * gm_prev.values + g0m.values * gm_prev.derivs[1],
                g0m.z_grid)
            Mp = corrected_trapezoid(
                g0p.values * gp_prev.values,
                g0p.derivs[1] * gp_prev.values + g0p.values * gp_prev.derivs[1],
                g0p.z_grid)
            dp = -2.0 * co.c_minus * d_prev_m * Mm * kappa(n)
            dm = 2.0 * co.c_plus * d_prev_p * Mp * kappa(n)
        out.append((float(dp), float(dm)))
        d_prev_p, d_prev_m = dp, dm
    return out
