import numpy as np
import pytest

from ptails import heat, special
from ptails.heat import (HeatSourceSpec, convergence_check, make_source,
                         solve_inhom, solve_inhom_modes, un_reference,
                         un_reference_hat, un_reference_by_inverse_quadrature)
from ptails.solver import Stepper
from ptails.spectral import Grid, norms


@pytest.fixture(scope="module")
def gauss_spec():
    return make_source(1, 1, "gaussian")


def test_source_validation():
    with pytest.raises(ValueError):
        make_source(1, 3, "gaussian")
    with pytest.raises(ValueError):
        HeatSourceSpec(0, 1, heat.gaussian_shape())


def test_gaussian_weight_certificate(gauss_spec):
    sups = gauss_spec.gaussian_weight_certificate()
    assert all(np.isfinite(s) and s < 10.0 for s in sups)


def test_mass_of_shapes():
    assert make_source(1, 1, "gaussian").mass == pytest.approx(1.0)
    assert abs(make_source(1, 1, "dgaussian").mass) < 1e-14


def test_zero_at_t0(gauss_spec):
    g = Grid(2 ** 10, 100.0)
    f = solve_inhom(gauss_spec, g, [0.0])[0]
    assert np.abs(f.coeffs).max() == 0.0


def test_zero_mode_is_zero(gauss_spec):
    uh = solve_inhom_modes(gauss_spec, np.array([0.0, 0.5]), 3.0)
    assert uh[0] == 0.0
    assert uh[1] != 0.0


def test_quadrature_matches_time_stepping(gauss_spec):
    # cross-module oracle: diffusion-only stepping with the prescribed source
    g = Grid(2 ** 10, 60.0)
    shape = gauss_spec.shape

    def forcing(x, t):
        return (1.0 + t) ** (0.5 - 1.5) * shape((x - 2 * t) / np.sqrt(1 + t))

    st = Stepper(g, 1e-3, None, linear="heat", forcing=forcing)
    pair = (np.zeros(g.n_points, complex), np.zeros(g.n_points, complex))
    for i in range(1000):
        pair = st.step_ifrk4(pair, i * 1e-3)
    u_stepped = np.fft.ifft(pair[1]).real * g.n_points
    u_quad = solve_inhom(gauss_spec, g, [1.0])[0].samples()
    assert np.abs(u_stepped - u_quad).max() < 1e-8


def test_un_reference_physical_vs_fourier_form():
    # the two routes to the limit profile agree: f_n sampling vs continuum
    # inverse transform of the closed Fourier form
    x = np.linspace(-60.0, 60.0, 241)
    t = 4.0
    by_quad = un_reference_by_inverse_quadrature(1, 1, x, t)
    pref = (1 + t) ** -0.75 * 2.0 ** -1.5 / np.sqrt(4 * np.pi)
    by_fn = pref * special.fn_value(1, -x / np.sqrt(1 + t))
    assert np.abs(by_quad - by_fn).max() < 1e-6


def test_un_reference_rejects_sigma():
    g = Grid(2 ** 8, 50.0)
    with pytest.raises(ValueError):
        un_reference(1, 2, g, 1.0)


def test_un_rescaling_norm_exponent():
    g = Grid(2 ** 12, 400.0)
    n1 = norms(un_reference(1, 1, g, 3.0)).l2(0)
    n2 = norms(un_reference(1, 1, g, 15.0)).l2(0)
    # || u_n ||_2 scales as (1+t)^{-(3/4 - 2^{-(n+1)})} = (1+t)^{-1/2}
    assert n2 / n1 == pytest.approx((16.0 / 4.0) ** -0.5, rel=1e-4)


def test_un_odd_symmetry():
    g = Grid(2 ** 11, 200.0)
    u1 = un_reference(1, 1, g, 4.0).samples()
    u2 = un_reference(1, -1, g, 4.0).samples()
    mirror = np.concatenate([[0], np.arange(g.n_points - 1, 0, -1)])
    interior = slice(1, None)          # x = -L and +L coincide on the torus
    assert np.abs(u1[interior] + u2[mirror][interior]).max() < 1e-12


def test_convergence_check_gaussian(gauss_spec):
    rep = convergence_check(gauss_spec, np.geomspace(10, 300, 10))
    assert rep.stabilized
    assert np.isfinite(rep.weighted_sup) and np.isfinite(rep.weighted_sup_d)
    assert rep.measured_C < 100.0


def test_convergence_check_zero_mass_source():
    spec = make_source(1, 1, "dgaussian")
    rep = convergence_check(spec, np.geomspace(1, 300, 12))
    # M(f) = 0: the solution itself carries the starred-weight bound
    assert rep.stabilized
    assert np.isfinite(rep.weighted_sup)


def test_pointwise_bound_constant_grid_stable(gauss_spec):
    k1 = np.linspace(0.01, 3.0, 120)
    t1 = np.geomspace(1.0, 100.0, 12)
    c1 = heat.pointwise_bound_constant(gauss_spec, k1, t1)
    c2 = heat.pointwise_bound_constant(gauss_spec, np.linspace(0.005, 3.0, 240),
                                       np.geomspace(1.0, 100.0, 24))
    assert np.isfinite(c1) and c1 > 0
    assert c2 == pytest.approx(c1, rel=0.15)


def test_solve_inhom_other_sigmas_bounded():
    # sigma outside +-1 has no reference profile but must still solve cleanly
    g = Grid(2 ** 10, 150.0)
    for sigma in (-2, 0, 2):
        spec = make_source(1, sigma, "gaussian")
        f = solve_inhom(spec, g, [5.0])[0]
        assert np.isfinite(f.samples()).all()
        assert norms(f).l2(0) < 10.0


def test_numeric_fhat_matches_analytic():
    fh = heat._numeric_fhat(heat.gaussian_shape())
    k = np.linspace(-4, 4, 101)
    assert np.abs(fh(k) - np.exp(-k * k)).max() < 1e-9
