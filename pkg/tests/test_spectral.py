import numpy as np
import pytest
from scipy.integrate import quad

from conftest import random_real_field
from ptails.spectral import (Grid, NormReport, SpectralField, derivative,
                             field_from_continuum_fhat, mass, norms,
                             project_high, project_low, transform_forward,
                             transform_inverse, translate)


def test_grid_invariants():
    g = Grid(2 ** 12, 50.0)
    assert g.dx * g.n_points == pytest.approx(2 * g.half_length)
    k = g.k
    # antisymmetric about zero away from the Nyquist mode
    assert np.allclose(np.sort(k[1:g.n_points // 2]),
                       np.sort(-k[g.n_points // 2 + 1:]))


def test_grid_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        Grid(1000, 50.0)


def test_constant_function_is_dc_mode():
    g = Grid(2 ** 8, 10.0)
    f = transform_forward(np.ones(g.n_points), g)
    assert abs(f.coeffs[0] - 1.0) < 1e-14
    assert np.abs(f.coeffs[1:]).max() < 1e-14


def test_round_trip():
    g = Grid(2 ** 10, 30.0)
    x = np.exp(-g.x ** 2 / 3.0) * np.cos(g.x)
    rec = transform_inverse(transform_forward(x, g))
    assert np.abs(rec - x).max() < 1e-12 * np.abs(x).max()


@pytest.mark.parametrize("log2n", [10, 14, 18])
def test_round_trip_many_sizes(log2n, rng):
    g = Grid(2 ** log2n, 100.0)
    f = random_real_field(g, rng)
    s = f.samples()
    rec = transform_inverse(transform_forward(s, g))
    assert np.abs(rec - s).max() < 1e-12 * max(np.abs(s).max(), 1e-30)


def test_length_mismatch_raises():
    g = Grid(2 ** 8, 10.0)
    with pytest.raises(ValueError):
        transform_forward(np.ones(17), g)


def test_parseval_direct_summation_oracle(grid_small, rng):
    f = random_real_field(grid_small, rng)
    s = f.samples()
    phys = np.sqrt(np.sum(s * s) * grid_small.dx)      # direct summation
    spec = np.sqrt(2 * grid_small.half_length * np.sum(np.abs(f.coeffs) ** 2))
    assert abs(phys - spec) < 1e-10 * phys


def test_derivative_eigenfunction():
    g = Grid(2 ** 10, 20.0)
    f = transform_forward(np.sin(np.pi * g.x / g.half_length), g)
    d = derivative(f, 1).samples()
    expect = (np.pi / g.half_length) * np.cos(np.pi * g.x / g.half_length)
    assert np.abs(d - expect).max() < 1e-10


def test_derivative_of_constant_is_zero():
    g = Grid(2 ** 8, 10.0)
    d = derivative(transform_forward(np.ones(g.n_points), g), 1)
    assert np.abs(d.samples()).max() < 1e-14


def test_second_derivative_vs_central_differences():
    g = Grid(2 ** 12, 40.0)
    gauss = np.exp(-g.x ** 2 / 4.0)
    d2 = derivative(transform_forward(gauss, g), 2).samples()

    def stencil(m):
        h = m * g.dx
        return (np.roll(gauss, -m) - 2 * gauss + np.roll(gauss, m)) / h ** 2

    fd = (4.0 * stencil(1) - stencil(2)) / 3.0    # Richardson-refined central FD
    assert np.abs(d2 - fd).max() < 1e-6


def test_mass_of_derivative_vanishes(grid_small, rng):
    f = random_real_field(grid_small, rng)
    assert abs(mass(derivative(f, 1))) < 1e-14


def test_translate_identity_and_group(grid_small, rng):
    f = random_real_field(grid_small, rng)
    assert np.abs(translate(f, 0.0).coeffs - f.coeffs).max() < 1e-15
    round_trip = translate(translate(f, 3.7), -3.7)
    assert np.abs(round_trip.samples() - f.samples()).max() < 1e-12


def test_translate_moves_argmax_by_shift():
    g = Grid(2 ** 12, 60.0)
    f = transform_forward(np.exp(-(g.x ** 2)), g)
    shifted = translate(f, 5.0)
    # translate(f, s)(x) = f(x + s): peak moves from 0 to -5
    argmax = g.x[np.argmax(shifted.samples())]
    assert abs(abs(argmax) - 5.0) <= g.dx + 1e-12


def test_translate_preserves_coefficient_moduli(grid_small, rng):
    f = random_real_field(grid_small, rng)
    t = translate(f, 1.234)
    assert np.abs(np.abs(t.coeffs) - np.abs(f.coeffs)).max() < 1e-13
    assert abs(mass(t) - mass(f)) < 1e-14


def test_projector_low_identity_on_low_modes(grid_small):
    g = grid_small
    coeffs = np.zeros(g.n_points, dtype=complex)
    sel = np.abs(g.k) <= 1.0
    coeffs[sel] = 1.0 / (1 + np.arange(sel.sum()))
    f = SpectralField(g, coeffs).symmetrized()
    assert np.abs(project_low(f).coeffs - f.coeffs).max() < 1e-15


def test_projector_orthogonality_and_parseval(grid_small, rng):
    f = random_real_field(grid_small, rng)
    lo = project_low(f)
    hi = project_high(f)
    assert np.abs(project_low(hi).coeffs).max() == 0.0
    assert np.abs((lo.coeffs + hi.coeffs) - f.coeffs).max() < 1e-15
    n2 = lambda v: 2 * grid_small.half_length * np.sum(np.abs(v.coeffs) ** 2)
    assert abs(n2(lo) + n2(hi) - n2(f)) < 1e-10 * n2(f)


def test_mass_odd_function_zero():
    g = Grid(2 ** 10, 30.0)
    f = transform_forward(g.x * np.exp(-g.x ** 2), g)
    assert abs(mass(f)) < 1e-12


def test_mass_unit_gaussian():
    g = Grid(2 ** 12, 40.0)
    f = transform_forward(np.exp(-g.x ** 2 / 4.0) / np.sqrt(4 * np.pi), g)
    assert mass(f) == pytest.approx(1.0, abs=1e-8)


def test_weighted_norm_against_quadrature_oracle():
    g = Grid(2 ** 13, 40.0)
    f = transform_forward(np.exp(-g.x ** 2 / 4.0), g)
    rep = norms(f)
    oracle = np.sqrt(quad(lambda x: (x ** 2 * np.exp(-x ** 2 / 4.0)) ** 2,
                          -40, 40, epsabs=1e-13)[0])
    assert rep.weighted_l2 == pytest.approx(oracle, rel=1e-6)


def test_norm_report_contents(grid_small, rng):
    f = random_real_field(grid_small, rng)
    rep = norms(f, t=2.5)
    assert isinstance(rep, NormReport)
    assert rep.t == 2.5
    for m in (0, 1, 2):
        assert rep.lp[m][1] >= 0 and rep.lp[m][2] >= 0 and rep.lp[m]["inf"] >= 0
    assert rep.sup_fourier >= 0


def test_hermitian_symmetrization(grid_small, rng):
    coeffs = rng.standard_normal(grid_small.n_points) \
        + 1j * rng.standard_normal(grid_small.n_points)
    f = SpectralField(grid_small, coeffs).symmetrized()
    assert f.hermitian_defect() < 1e-14
    assert np.abs(f.samples_complex().imag).max() < 1e-12


def test_fhat_matches_continuum_transform():
    g = Grid(2 ** 12, 50.0)
    f = transform_forward(np.exp(-g.x ** 2 / 4.0), g)
    # continuum transform of exp(-x^2/4) is 2 sqrt(pi) exp(-k^2)
    expected = 2 * np.sqrt(np.pi) * np.exp(-g.k ** 2)
    assert np.abs(f.fhat() - expected).max() < 1e-8
    back = field_from_continuum_fhat(g, expected)
    assert np.abs(back.samples() - np.exp(-g.x ** 2 / 4.0)).max() < 1e-10
