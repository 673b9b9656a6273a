"""Local spin-S algebra in the (2S+1)-dimensional site space.

Basis states are ordered by decreasing magnetic quantum number
(``m = S, S-1, ..., -S``).  The transition operator ``T^{ab} = |a><b|``
has flat index ``a * (2S+1) + b``; serialized moments use this convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import check_spin
from .moments import CollectiveMoments, squeezing_from_moments


@dataclass(frozen=True)
class SpinMatrices:
    S: float
    Sx: np.ndarray
    Sy: np.ndarray
    Sz: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.Sz.shape[0]

    @property
    def m(self) -> np.ndarray:
        return np.real(np.diag(self.Sz))

    def xyz(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.Sx, self.Sy, self.Sz


@lru_cache(maxsize=None)
def spin_operators(S: float) -> SpinMatrices:
    S = check_spin(S)
    m = np.arange(S, -S - 1, -1.0)
    d = len(m)
    sp = np.zeros((d, d), dtype=complex)
    # <m+1| S+ |m> = sqrt(S(S+1) - m(m+1)); row m+1 precedes row m
    idx = np.arange(1, d)
    sp[idx - 1, idx] = np.sqrt(S * (S + 1) - m[idx] * (m[idx] + 1))
    sm = sp.conj().T
    Sx = (sp + sm) / 2
    Sy = (sp - sm) / 2j
    Sz = np.diag(m).astype(complex)
    for a in (sp, sm, Sx, Sy, Sz):
        a.setflags(write=False)
    return SpinMatrices(S, Sx, Sy, Sz, sp, sm)


def flat_index(a: int, b: int, dim: int) -> int:
    return a * dim + b


def unflat_index(k: int, dim: int) -> tuple[int, int]:
    return divmod(k, dim)


def transition_operator(a: int, b: int, dim: int) -> np.ndarray:
    T = np.zeros((dim, dim), dtype=complex)
    T[a, b] = 1.0
    return T


def from_transition_moments(coeffs: np.ndarray, moments: np.ndarray) -> complex:
    """``<A>`` from matrix elements ``<a|A|b>`` and moments ``<T^{ab}>``."""
    return np.sum(coeffs * moments)


def rotation(S: float, axis) -> np.ndarray:
    """Unitary taking the ``+z`` direction onto unit vector ``axis``."""
    n = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise ValueError("axis must be nonzero")
    n = n / norm
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    sm = spin_operators(S)
    # R = exp(-i phi Sz) exp(-i theta Sy)
    w, v = np.linalg.eigh(sm.Sy)
    Ry = (v * np.exp(-1j * theta * w)) @ v.conj().T
    Rz = np.diag(np.exp(-1j * phi * sm.m))
    return Rz @ Ry


def coherent_state(S: float, axis) -> np.ndarray:
    """Eigenvector of ``axis . S`` with eigenvalue ``S``.

    The global phase makes the largest-magnitude amplitude real positive.
    """
    R = rotation(S, axis)
    psi = R[:, 0].copy()
    k = np.argmax(np.abs(psi))
    psi *= np.exp(-1j * np.angle(psi[k]))
    return psi


def expect(psi: np.ndarray, A: np.ndarray) -> complex:
    return np.vdot(psi, A @ psi)


@dataclass
class SingleSpinSeries:
    t: np.ndarray
    mean_x: np.ndarray
    cov: np.ndarray  # (T, 2, 2) over (Sy, Sz)
    xi2: np.ndarray
    Sz2: np.ndarray
    norm: np.ndarray


def single_spin_evolution(S: float, B_q: float, t) -> SingleSpinSeries:
    """Exact evolution of ``|S; x>`` under ``B_q (S^z)**2``.

    The Hamiltonian is diagonal, so the state at time ``t`` is obtained by
    the phases ``exp(-i B_q m**2 t)``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    sm = spin_operators(S)
    psi0 = coherent_state(S, (1.0, 0.0, 0.0))
    psi = psi0[None, :] * np.exp(-1j * B_q * sm.m[None, :] ** 2 * t[:, None])

    def ev(A):
        return np.real(np.einsum("ta,ab,tb->t", psi.conj(), A, psi))

    Sx, Sy, Sz = sm.xyz()
    my, mz = ev(Sy), ev(Sz)
    cyy = ev(Sy @ Sy) - my**2
    czz = ev(Sz @ Sz) - mz**2
    cyz = ev((Sy @ Sz + Sz @ Sy) / 2) - my * mz
    cov = np.stack([np.stack([cyy, cyz], -1), np.stack([cyz, czz], -1)], -2)
    mx = ev(Sx)
    xi2 = squeezing_from_moments(CollectiveMoments(mx, cov), N=1, S=S).xi2
    return SingleSpinSeries(t, mx, cov, xi2, ev(Sz @ Sz), np.sum(np.abs(psi) ** 2, axis=1))
