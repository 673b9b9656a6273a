"""Exact dense evolution of the dipolar Hamiltonian on tiny clusters.

This is the reference against which the cumulant and rotor/spin-wave
approximations are checked; clusters stay small by construction.
"""
from __future__ import annotations

from functools import reduce

import numpy as np

from .lattice import CouplingTable, LatticeSpec, build_couplings
from .moments import Series
from .spin import coherent_state, spin_operators

DEFAULT_CAP = 4096

# anisotropy of the pair interaction: -1/2 (xx + yy) + zz
XXZ = (-0.5, -0.5, 1.0)


class DimensionError(ValueError):
    pass


def _site_op(op: np.ndarray, i: int, N: int) -> np.ndarray:
    d = op.shape[0]
    return np.kron(np.kron(np.eye(d ** i), op), np.eye(d ** (N - i - 1)))


def collective_ops(S: float, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sm = spin_operators(S)
    return tuple(sum(_site_op(s, i, N) for i in range(N)) for s in sm.xyz())


def build_hamiltonian(spec: LatticeSpec, table: CouplingTable | None = None, cap: int = DEFAULT_CAP) -> np.ndarray:
    table = table or build_couplings(spec)
    N, d = spec.N, spec.dim
    if d**N > cap:
        raise DimensionError(f"Hilbert space {d}^{N} = {d**N} exceeds cap {cap}")
    sm = spin_operators(spec.S)
    ops = [[_site_op(s, i, N) for s in sm.xyz()] for i in range(N)]
    H = np.zeros((d**N, d**N), dtype=complex)
    for i in range(N):
        H += spec.B_q * ops[i][2] @ ops[i][2]
        for j in range(i + 1, N):
            Dij = table.D[i, j]
            if Dij == 0:
                continue
            for c, a, b in zip(XXZ, ops[i], ops[j]):
                H += spec.J * Dij * c * (a @ b)
    return H


def css_product(S: float, N: int) -> np.ndarray:
    psi = coherent_state(S, (1.0, 0.0, 0.0))
    return reduce(np.kron, [psi] * N)


def evolve_exact(spec: LatticeSpec, t, cap: int = DEFAULT_CAP, table: CouplingTable | None = None) -> Series:
    """Observables of ``|CSS_x>`` evolved by eigendecomposition of ``H``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    H = build_hamiltonian(spec, table, cap)
    w, v = np.linalg.eigh(H)
    c0 = v.conj().T @ css_product(spec.S, spec.N)
    psi = (c0[None, :] * np.exp(-1j * w[None, :] * t[:, None])) @ v.T
    Jx, Jy, Jz = collective_ops(spec.S, spec.N)

    def ev(A):
        return np.real(np.einsum("ta,ab,tb->t", psi.conj(), A, psi))

    my, mz = ev(Jy), ev(Jz)
    vyy = ev(Jy @ Jy) - my**2
    vzz = ev(Jz @ Jz) - mz**2
    cyz = ev((Jy @ Jz + Jz @ Jy) / 2) - my * mz
    cov = np.stack([np.stack([vyy, cyz], -1), np.stack([cyz, vzz], -1)], -2)
    J2 = ev(Jx @ Jx) + ev(Jy @ Jy) + ev(Jz @ Jz)
    return Series(t, ev(Jx), cov, ev(H), J2, spec.N, spec.S)


def evolve_states(spec: LatticeSpec, t, cap: int = DEFAULT_CAP) -> np.ndarray:
    """State vectors at times ``t`` (rows)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    H = build_hamiltonian(spec, cap=cap)
    w, v = np.linalg.eigh(H)
    c0 = v.conj().T @ css_product(spec.S, spec.N)
    return (c0[None, :] * np.exp(-1j * w[None, :] * t[:, None])) @ v.T
