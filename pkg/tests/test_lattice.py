import numpy as np
import pytest

from dipsqueeze.lattice import (
    LatticeSpec,
    build_couplings,
    check_spin,
    css_energy,
    inverse_moment_of_inertia,
    minimum_image,
)


def test_spin_validation():
    assert check_spin(1.5) == 1.5
    with pytest.raises(ValueError):
        check_spin(0.3)
    with pytest.raises(ValueError):
        check_spin(0)


def test_spec_validation():
    with pytest.raises(ValueError):
        LatticeSpec(L=0, S=1)
    with pytest.raises(ValueError):
        LatticeSpec(L=4, S=1, boundary="helical")
    with pytest.raises(ValueError):
        LatticeSpec(L=1, S=1)  # periodic single site
    with pytest.raises(ValueError):
        LatticeSpec(L=4, S=1, Ly=2)  # rectangles only with open boundary
    s = LatticeSpec(L=2, S=1, boundary="open", Ly=1)
    assert s.N == 2 and s.dim == 3


def test_minimum_image():
    d = minimum_image(np.arange(-6, 7), 6)
    assert np.all(d > -3) and np.all(d <= 3)


def test_nearest_neighbour_factor():
    t = build_couplings(LatticeSpec(L=3, S=1, boundary="open"))
    # (0,0)-(0,1) unit distance, (0,0)-(1,1) distance sqrt 2
    assert t.D[0, 1] == 1.0
    assert np.isclose(t.D[0, 4], 2**-1.5)
    assert np.all(np.diag(t.D) == 0)


def test_periodic_sum_rules():
    spec = LatticeSpec(L=6, S=1)
    t = build_couplings(spec)
    assert np.allclose(t.row_sum, t.row_sum[0])
    assert np.isclose(t.sumD, t.D.sum())
    # J_{k=0} equals the row sum
    assert np.isclose(t.Jk[0, 0], t.row_sum[0])
    # dense transform against the table
    pos = spec.positions()
    k = 2 * np.pi * np.array([1, 4]) / 6
    ph = np.cos((pos[:, None, :] - pos[None, :, :]) @ k)
    assert np.isclose((ph * t.D).sum() / spec.N, t.Jk[1, 4])


def test_open_transform_matches_dense():
    spec = LatticeSpec(L=4, S=1, boundary="open", Ly=3)
    t = build_couplings(spec)
    pos = spec.positions()
    for nx, ny in [(0, 0), (1, 2), (3, 1)]:
        k = 2 * np.pi * np.array([nx / 4, ny / 3])
        ph = np.cos((pos[:, None, :] - pos[None, :, :]) @ k)
        assert np.isclose((ph * t.D).sum() / spec.N, t.Jk[nx, ny])
    assert np.isclose(build_couplings(spec, dense=False).sumD, t.sumD)


def test_lattice_sums_converge():
    # minimum-image sums approach the infinite-lattice value 9.0317 from below
    d0 = [build_couplings(LatticeSpec(L=L, S=1), dense=False).Jk[0, 0] for L in (16, 32, 64)]
    assert d0[0] < d0[1] < d0[2] < 9.0318
    assert np.isclose(d0[2], 8.85681, atol=1e-5)


def test_inertia_conventions():
    spec = LatticeSpec(L=4, S=1, J=2.0, B_q=0.5)
    t = build_couplings(spec)
    N = spec.N
    assert np.isclose(inverse_moment_of_inertia(spec, t), 3 * 2.0 * t.sumD / (4 * N**2) + 0.5 / N)
    assert np.isclose(inverse_moment_of_inertia(spec, t, "compact"), 2.0 * t.sumD / (2 * N**2) + 0.5 / N)
    with pytest.raises(ValueError):
        inverse_moment_of_inertia(spec, t, "other")


def test_css_energy_matches_ed():
    from dipsqueeze.ed import build_hamiltonian, css_product

    spec = LatticeSpec(L=2, S=1, J=1.3, B_q=0.7, boundary="open")
    H = build_hamiltonian(spec)
    psi = css_product(spec.S, spec.N)
    assert np.isclose(np.vdot(psi, H @ psi).real, css_energy(spec, build_couplings(spec)))
