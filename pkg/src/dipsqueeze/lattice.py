"""Square-lattice geometry and dipolar couplings.

Sites sit on an ``L x L`` square lattice with unit spacing and the
quantization field normal to the plane, so every pair has
``D_ij = 1 / r_ij**3`` (no angular factor).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

BOUNDARIES = ("open", "periodic")


def check_spin(S: float) -> float:
    twoS = 2 * S
    if S < 0.5 or abs(twoS - round(twoS)) > 1e-12:
        raise ValueError(f"spin length must be a positive half-integer, got {S!r}")
    return round(twoS) / 2


@dataclass(frozen=True)
class LatticeSpec:
    """Model parameters: geometry, spin length and couplings."""

    L: int
    S: float
    J: float = 1.0
    B_q: float = 0.0
    boundary: str = "periodic"
    Ly: int | None = None

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"L must be a positive integer, got {self.L!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.boundary == "periodic" and self.L == 1:
            raise ValueError("periodic boundary needs L >= 2 (a site would be its own image)")
        if self.Ly is not None:
            if int(self.Ly) != self.Ly or self.Ly < 1:
                raise ValueError(f"Ly must be a positive integer, got {self.Ly!r}")
            if self.periodic and self.Ly != self.L:
                raise ValueError("rectangular clusters are supported with open boundaries only")
            if self.Ly == self.L:
                object.__setattr__(self, "Ly", None)
        object.__setattr__(self, "S", check_spin(self.S))

    @property
    def N(self) -> int:
        return self.L * self.width

    @property
    def width(self) -> int:
        """Extent along ``y`` (equal to ``L`` except for open rectangular clusters)."""
        return self.L if self.Ly is None else self.Ly

    @property
    def dim(self) -> int:
        return int(round(2 * self.S)) + 1

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def positions(self) -> np.ndarray:
        """Site coordinates, row-major: site ``x * width + y`` sits at ``(x, y)``."""
        x, y = np.divmod(np.arange(self.N), self.width)
        return np.stack([x, y], axis=1).astype(float)

    def replace(self, **kw) -> "LatticeSpec":
        d = dict(L=self.L, S=self.S, J=self.J, B_q=self.B_q, boundary=self.boundary, Ly=self.Ly)
        d.update(kw)
        return LatticeSpec(**d)


def minimum_image(d: np.ndarray, L: int) -> np.ndarray:
    """Fold integer displacements into ``(-L/2, L/2]``.

    A displacement of exactly ``L/2`` has two equidistant images; both give
    the same ``1/r**3`` and the same phase on the allowed momentum grid, so
    the average over them equals either one.
    """
    d = np.mod(d, L)
    return np.where(d > L / 2, d - L, d)


@dataclass(frozen=True)
class CouplingTable:
    """Dipolar factors in real space and their lattice Fourier transform.

    ``D`` is the dense ``N x N`` matrix of dimensionless factors (zero on the
    diagonal).  For periodic lattices ``Ddisp[dx, dy]`` holds the factor for
    displacement ``(dx, dy) mod L``.  ``Jk[nx, ny]`` is the coupling at
    ``k = 2 pi (nx, ny) / L`` in energy units.
    """

    spec: LatticeSpec
    D: np.ndarray
    Ddisp: np.ndarray | None
    Jk: np.ndarray
    sumD: float

    @property
    def kgrid(self) -> tuple[np.ndarray, np.ndarray]:
        Lx, Ly = self.spec.L, self.spec.width
        kx, ky = np.meshgrid(2 * np.pi * np.arange(Lx) / Lx, 2 * np.pi * np.arange(Ly) / Ly, indexing="ij")
        return kx, ky

    @cached_property
    def row_sum(self) -> np.ndarray:
        """``sum_j D_ij`` per site."""
        return self.D.sum(axis=1)


def _displacement_table(L: int) -> np.ndarray:
    d = minimum_image(np.arange(L), L).astype(float)
    dx, dy = np.meshgrid(d, d, indexing="ij")
    r = np.hypot(dx, dy)
    out = np.zeros_like(r)
    out[r > 0] = r[r > 0] ** -3
    return out


def build_couplings(spec: LatticeSpec, dense: bool = True) -> CouplingTable:
    """Dipolar factors and momentum couplings for ``spec``.

    ``dense=False`` skips the ``N x N`` matrix (useful for the large periodic
    lattices used in the spin-wave and mean-field sums).
    """
    L, N = spec.L, spec.N
    if spec.periodic:
        Ddisp = _displacement_table(L)
        # D(r) = D(-r), so the transform is real
        Jk = spec.J * np.real(np.fft.fft2(Ddisp))
        sumD = N * Ddisp.sum()
        if dense:
            pos = spec.positions().astype(int)
            dx = np.mod(pos[None, :, 0] - pos[:, None, 0], L)
            dy = np.mod(pos[None, :, 1] - pos[:, None, 1], L)
            D = Ddisp[dx, dy]
        else:
            D = np.zeros((0, 0))
    else:
        Ddisp = None
        if dense:
            pos = spec.positions()
            diff = pos[:, None, :] - pos[None, :, :]
            r = np.hypot(diff[..., 0], diff[..., 1])
            D = np.zeros_like(r)
            D[r > 0] = r[r > 0] ** -3
        else:
            D = np.zeros((0, 0))
        # (1/N) sum_{i != j} e^{ik.(r_i - r_j)} D_ij through displacement multiplicities
        Ly = spec.width
        sx, sy = np.meshgrid(np.arange(-(L - 1), L), np.arange(-(Ly - 1), Ly), indexing="ij")
        rr = np.hypot(sx, sy)
        w = np.zeros_like(rr)
        w[rr > 0] = rr[rr > 0] ** -3 * ((L - np.abs(sx)) * (Ly - np.abs(sy)))[rr > 0] / N
        sumD = N * w.sum()
        # on the k grid only s mod (L, Ly) matters: fold, then transform
        folded = np.zeros((L, Ly))
        np.add.at(folded, (np.mod(sx, L), np.mod(sy, Ly)), w)
        Jk = spec.J * np.real(np.fft.fft2(folded))
    return CouplingTable(spec=spec, D=D, Ddisp=Ddisp, Jk=Jk, sumD=float(sumD))


INERTIA_CONVENTIONS = ("pairwise", "compact")


def inverse_moment_of_inertia(spec: LatticeSpec, table: CouplingTable, convention: str = "pairwise") -> float:
    """Rotor coupling ``1/(2I)`` multiplying ``(K^z)**2``.

    ``"pairwise"`` projects the Hamiltonian (each pair counted once) onto the
    symmetric sector: ``1/(2I) = 3 J sum_ij D_ij / (4 N**2) + B_q / N``.
    ``"compact"`` uses the prefactor ``J / (2 N**2)`` instead.
    """
    if convention == "pairwise":
        c = 3 / (4 * spec.N**2)
    elif convention == "compact":
        c = 1 / (2 * spec.N**2)
    else:
        raise ValueError(f"convention must be one of {INERTIA_CONVENTIONS}, got {convention!r}")
    return spec.J * table.sumD * c + spec.B_q / spec.N


def rotor_zero_point_energy(spec: LatticeSpec, table: CouplingTable) -> float:
    return -spec.S * (spec.N * spec.S + 1) / (2 * spec.N) * spec.J * table.sumD


def css_energy(spec: LatticeSpec, table: CouplingTable) -> float:
    """``<CSS_x| H |CSS_x>``: each pair gives ``-J D S**2 / 2``, each site ``B_q S / 2``."""
    return -spec.J * spec.S**2 / 2 * (table.sumD / 2) + spec.B_q * spec.N * spec.S / 2
