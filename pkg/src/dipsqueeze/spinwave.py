"""Rotor/spin-wave (RSW) theory.

The collective ``k = 0`` spin is treated as a rotor with one-axis-twisting
dynamics; the finite-momentum fluctuations are linear Holstein-Primakoff
bosons about the ``x``-polarized state,

    H_sw = sum_{k != 0} A_k b_k^dag b_k + (B_k / 2) (b_k b_-k + h.c.),

whose quench from the boson vacuum depletes the rotor length.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .lattice import CouplingTable, LatticeSpec, build_couplings, inverse_moment_of_inertia
from .moments import CollectiveMoments, squeezing_from_moments, validity_ratio
from .oat import OatParams, oat_moments, optimal_time

# "pairwise": harmonic expansion with each pair counted once;
# "doubled": exchange coefficients doubled (sum over ordered pairs).
SW_CONVENTIONS = ("pairwise", "doubled")


@dataclass
class ModeTable:
    """Bogoliubov coefficients on the allowed momenta, ``k = 0`` excluded."""

    kx: np.ndarray
    ky: np.ndarray
    A: np.ndarray
    B: np.ndarray
    omega2: np.ndarray

    @property
    def stable(self) -> np.ndarray:
        return self.omega2 > 0

    def __len__(self) -> int:
        return len(self.A)

    def rows(self):
        """``(kx, ky, omega2, stable)`` per mode, for tabular export."""
        return zip(self.kx, self.ky, self.omega2, self.stable)


def sw_coefficients(S: float, J0: float, Jk, B_q: float, convention: str = "pairwise"):
    """``(A_k, B_k)`` for couplings ``J_k = J sum_r D(r) exp(i k.r)``."""
    Jk = np.asarray(Jk, dtype=float)
    if convention == "pairwise":
        return S * (J0 / 2 + Jk / 4 + B_q), -S * (3 * Jk / 4 + B_q)
    if convention == "doubled":
        return S * (J0 + Jk / 2 + B_q), -S * (3 * Jk / 2 + B_q)
    raise ValueError(f"convention must be one of {SW_CONVENTIONS}, got {convention!r}")


def sw_omega2(S: float, J0: float, Jk, B_q: float, convention: str = "pairwise") -> np.ndarray:
    """``A_k**2 - B_k**2`` in factored form, exactly zero at ``J_k = J_0``."""
    Jk = np.asarray(Jk, dtype=float)
    if convention == "pairwise":
        return (S * (J0 - Jk) / 2) * (S * (J0 / 2 + Jk + 2 * B_q))
    if convention == "doubled":
        return (S * (J0 - Jk)) * (S * (J0 + 2 * Jk + 2 * B_q))
    raise ValueError(f"convention must be one of {SW_CONVENTIONS}, got {convention!r}")


def mode_table(spec: LatticeSpec, table: CouplingTable | None = None, convention: str = "pairwise") -> ModeTable:
    if not spec.periodic:
        raise ValueError("spin-wave modes need a periodic lattice")
    table = table or build_couplings(spec, dense=False)
    kx, ky = table.kgrid
    Jk = table.Jk
    keep = np.ones(Jk.shape, dtype=bool)
    keep[0, 0] = False
    args = (spec.S, Jk[0, 0], Jk[keep], spec.B_q, convention)
    A, B = sw_coefficients(*args)
    return ModeTable(kx[keep], ky[keep], A, B, sw_omega2(*args))


@dataclass
class Threshold:
    B_q: float | None
    mode: tuple[float, float] | None
    found: bool


def instability_threshold(
    spec: LatticeSpec,
    window: tuple[float, float] = (-10.0, 10.0),
    convention: str = "pairwise",
    xtol: float = 1e-13,
) -> Threshold:
    """Largest ``B_q`` in ``window`` below which some mode has ``omega2 < 0``.

    Root of ``min_k omega2(B_q)`` by Brent's method; the first mode to go
    unstable is the minimizer just below the threshold.
    """
    table = build_couplings(spec, dense=False)

    def worst(bq):
        return float(mode_table(spec.replace(B_q=bq), table, convention).omega2.min())

    lo, hi = window
    flo, fhi = worst(lo), worst(hi)
    if flo >= 0 or fhi <= 0:
        return Threshold(None, None, False)
    bq = brentq(worst, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)
    below = mode_table(spec.replace(B_q=bq - 1e-6 * max(1.0, abs(bq))), table, convention)
    k = int(np.argmin(below.omega2))
    return Threshold(float(bq), (float(below.kx[k]), float(below.ky[k])), True)


def mode_population(A, B, t) -> np.ndarray:
    """``<b_k^dag b_k>(t)`` after a quench from the vacuum.

    ``B**2 sin(w t)**2 / w**2`` with ``w**2 = A**2 - B**2``; the analytic
    continuation (``sinh``) for unstable modes and ``B**2 t**2`` at ``w = 0``.
    Broadcasts ``t`` (leading axis) against the modes.
    """
    A, B = np.asarray(A, dtype=float), np.asarray(B, dtype=float)
    t = np.asarray(t, dtype=float)[..., None] if np.ndim(A) else np.asarray(t, dtype=float)
    w2 = A**2 - B**2
    w = np.sqrt(np.abs(w2))
    with np.errstate(invalid="ignore", divide="ignore"):
        osc = np.where(w2 > 0, np.sin(w * t), np.sinh(w * t))
        small = w * np.abs(t) < 1e-8
        ratio = np.where(small, t, osc / np.where(w > 0, w, 1.0))
    return B**2 * ratio**2


def boson_population(modes: ModeTable, t) -> tuple[np.ndarray, np.ndarray]:
    """``(N_bos(t), n_k(t))`` summed over all finite-momentum modes."""
    nk = mode_population(modes.A, modes.B, np.atleast_1d(t))
    return nk.sum(axis=-1), nk


@dataclass
class RswSeries:
    t: np.ndarray
    xi2: np.ndarray
    mean_x_eff: np.ndarray
    N_bos: np.ndarray
    rotor: CollectiveMoments
    chi: float
    unstable: bool
    truncated_at: float | None

    @property
    def R(self) -> np.ndarray:
        return validity_ratio(CollectiveMoments(self.mean_x_eff, self.rotor.cov))


def rsw_squeezing(
    spec: LatticeSpec,
    t,
    convention: str = "pairwise",
    inertia: str = "pairwise",
    allow_unstable: bool = False,
    include_bosons: bool = True,
) -> RswSeries:
    """RSW estimate ``xi2 = 2NS Var(K^min) / (<K^x> - N_bos)**2``.

    The series stops before the first time ``N_bos >= <K^x>`` (depletion
    exceeds the rotor polarization); ``truncated_at`` records that time.
    """
    table = build_couplings(spec, dense=False)
    modes = mode_table(spec, table, convention)
    unstable = not bool(np.all(modes.stable))
    if unstable and not allow_unstable:
        raise ValueError("spin-wave spectrum has unstable modes; pass allow_unstable=True to proceed")
    chi = inverse_moment_of_inertia(spec, table, inertia)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    N, S = spec.N, spec.S
    rotor = oat_moments(OatParams(N * S, chi), t)
    nb = boson_population(modes, t)[0] if include_bosons else np.zeros_like(t)
    eff = rotor.mean_x - nb
    bad = np.nonzero(nb >= rotor.mean_x)[0]
    cut = None
    if bad.size:
        k = bad[0]
        cut = float(t[k])
        t, eff, nb = t[:k], eff[:k], nb[:k]
        rotor = CollectiveMoments(rotor.mean_x[:k], rotor.cov[:k], rotor.total_J2[:k])
    sq = squeezing_from_moments(CollectiveMoments(eff, rotor.cov), N, S)
    return RswSeries(t, sq.xi2, eff, nb, rotor, chi, unstable, cut)


def rotor_tmin(spec: LatticeSpec, convention: str = "pairwise") -> float:
    """Optimal OAT time of the rotor ``K = NS`` with ``chi = 1/(2I)``."""
    table = build_couplings(spec, dense=False)
    chi = inverse_moment_of_inertia(spec, table, convention)
    return optimal_time(OatParams(spec.N * spec.S, chi)).t_min
