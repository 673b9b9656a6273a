import numpy as np
import pytest
from scipy.integrate import solve_ivp

from dipsqueeze.lattice import LatticeSpec, build_couplings
from dipsqueeze.oat import OatParams, oat_squeezing
from dipsqueeze.spinwave import (
    boson_population,
    instability_threshold,
    mode_population,
    mode_table,
    rotor_tmin,
    rsw_squeezing,
    sw_coefficients,
    sw_omega2,
)


@pytest.mark.parametrize("convention", ["pairwise", "doubled"])
@pytest.mark.parametrize("S,B_q", [(0.5, 0.0), (3, 2.0), (8, -0.5), (6, 40.0)])
def test_goldstone_mode(S, B_q, convention):
    J0 = 8.79
    A, B = sw_coefficients(S, J0, J0, B_q, convention)
    assert abs(A**2 - B**2) < 1e-12 * max(1.0, A**2)
    assert sw_omega2(S, J0, J0, B_q, convention) == 0.0


def test_factored_frequency_matches_coefficients():
    Jk = np.linspace(-2.6, 8.0, 7)
    for conv in ("pairwise", "doubled"):
        A, B = sw_coefficients(3.0, 8.79, Jk, 1.3, conv)
        assert np.allclose(sw_omega2(3.0, 8.79, Jk, 1.3, conv), A**2 - B**2, rtol=1e-12, atol=1e-10)


def test_convention_formulas():
    A1, B1 = sw_coefficients(2.0, 8.0, 1.5, 0.3, "pairwise")
    A2, B2 = sw_coefficients(2.0, 16.0, 3.0, 0.3, "doubled")
    assert np.isclose(A1, 2.0 * (4 + 0.375 + 0.3))
    assert np.isclose(A2, 2.0 * (16 + 1.5 + 0.3))
    assert np.isclose(B1, -2.0 * (1.125 + 0.3)) and np.isclose(B2, -2.0 * (4.5 + 0.3))
    with pytest.raises(ValueError):
        sw_coefficients(1, 1, 1, 0, "other")


def test_mode_table_excludes_zero_momentum():
    spec = LatticeSpec(L=6, S=2.0, B_q=1.0)
    modes = mode_table(spec)
    assert len(modes) == 35
    assert not np.any((modes.kx == 0) & (modes.ky == 0))
    with pytest.raises(ValueError):
        mode_table(LatticeSpec(L=3, S=1, boundary="open"))


@pytest.mark.parametrize("convention", ["pairwise", "doubled"])
def test_threshold_closed_form(convention):
    spec = LatticeSpec(L=16, S=3.0)
    Jk = build_couplings(spec, dense=False).Jk
    J0, Jmin = Jk[0, 0], Jk.min()
    expect = -(J0 / 2 + Jmin) / 2 if convention == "pairwise" else -(J0 + 2 * Jmin) / 2
    th = instability_threshold(spec, convention=convention)
    assert th.found
    assert abs(th.B_q - expect) < 1e-10
    assert np.allclose(th.mode, (np.pi, np.pi))


def test_threshold_window_without_root():
    th = instability_threshold(LatticeSpec(L=8, S=1.0), window=(1.0, 5.0))
    assert not th.found and th.B_q is None


def bogoliubov_ode(A, B, t_end):
    """``b_k(t) = u b_k + v b_-k^dag`` with ``du/dt = -i(A u + B v*)``, ``dv/dt = -i(A v + B u*)``."""

    def f(_, y):
        u, v = y[0] + 1j * y[1], y[2] + 1j * y[3]
        du = -1j * (A * u + B * np.conj(v))
        dv = -1j * (A * v + B * np.conj(u))
        return [du.real, du.imag, dv.real, dv.imag]

    sol = solve_ivp(f, (0, t_end), [1.0, 0.0, 0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14)
    u, v = sol.y[0, -1] + 1j * sol.y[1, -1], sol.y[2, -1] + 1j * sol.y[3, -1]
    return abs(v) ** 2, abs(u) ** 2 - abs(v) ** 2


@pytest.mark.parametrize("A,B", [(3.0, -1.0), (1.0, -2.0), (2.0, 2.0), (0.5, 0.1)])
def test_mode_population_matches_heisenberg_ode(A, B):
    t = 1.7
    n_ode, bosonic = bogoliubov_ode(A, B, t)
    assert abs(bosonic - 1) < 1e-10
    n = float(mode_population(A, B, t))
    assert abs(n - n_ode) < 1e-10 * max(1.0, n_ode)


def test_mode_population_small_time():
    t = np.array([0.0, 1e-3])
    n = mode_population(np.array([2.0]), np.array([-0.7]), t)
    assert n[0, 0] == 0
    assert np.isclose(n[1, 0], 0.49e-6, rtol=1e-5)


def test_boson_population_sums_modes():
    spec = LatticeSpec(L=4, S=3.0, B_q=2.0)
    modes = mode_table(spec)
    tot, nk = boson_population(modes, [0.1, 0.2])
    assert nk.shape == (2, len(modes))
    assert np.allclose(tot, nk.sum(axis=1))


def test_rsw_without_bosons_is_oat():
    spec = LatticeSpec(L=6, S=3.0, B_q=2.0)
    t = np.linspace(0, 0.1, 11)
    r = rsw_squeezing(spec, t, include_bosons=False)
    ref = oat_squeezing(OatParams(spec.N * spec.S, r.chi), t)
    assert np.allclose(r.xi2, ref.xi2)


def test_rsw_starts_coherent_and_squeezes():
    spec = LatticeSpec(L=8, S=3.0, B_q=2.0)
    tmin = rotor_tmin(spec)
    r = rsw_squeezing(spec, np.linspace(0, tmin, 41))
    assert np.isclose(r.xi2[0], 1.0) and np.isclose(r.R[0], 1.0)
    assert r.xi2.min() < 0.1
    assert np.all(r.N_bos >= 0)


def test_rsw_refuses_unstable_spectrum():
    spec = LatticeSpec(L=8, S=3.0, B_q=-3.0)
    with pytest.raises(ValueError):
        rsw_squeezing(spec, [0.1])
    r = rsw_squeezing(spec, np.linspace(0, 3, 31), allow_unstable=True)
    assert r.unstable
    assert r.truncated_at is not None and len(r.t) < 31
