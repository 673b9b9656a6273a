"""Exact one-axis-twisting (OAT) dynamics of a collective spin ``K``.

``H = chi (K^z)**2`` starting from the coherent state along ``x``.  Moments
use the closed forms for a spin ``K`` written as ``n = 2K`` spin-1/2
constituents; :func:`oat_moments_dicke` sums over Dicke states instead and
serves as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .analysis import fit_power_law
from .lattice import check_spin
from .moments import CollectiveMoments, Squeezing, squeezing_from_moments

# Fitted optimal-time law chi * t_min = A / (2K)**sigma.
TMIN_AMPLITUDE = 1.0142
TMIN_EXPONENT = 0.648


@dataclass(frozen=True)
class OatParams:
    Ktot: float
    chi: float

    def __post_init__(self):
        object.__setattr__(self, "Ktot", check_spin(self.Ktot))


def oat_moments(p: OatParams, t) -> CollectiveMoments:
    t = np.asarray(t, dtype=float)
    K = p.Ktot
    n = 2 * K
    mu = p.chi * t
    c1 = np.cos(mu)
    a = 1 - np.cos(2 * mu) ** (n - 2)
    b = 4 * np.sin(mu) * c1 ** (n - 2)
    vyy = n / 4 + n * (n - 1) * a / 8
    vzz = np.full_like(vyy, n / 4)
    cyz = n * (n - 1) * b / 16
    mean_x = K * c1 ** (n - 1)
    cov = np.stack([np.stack([vyy, cyz], -1), np.stack([cyz, vzz], -1)], -2)
    return CollectiveMoments(mean_x, cov, total_J2=np.full_like(vyy, K * (K + 1)))


def _dicke_ops(K: float):
    m = np.arange(K, -K - 1, -1.0)
    d = len(m)
    sp = np.zeros((d, d))
    i = np.arange(1, d)
    sp[i - 1, i] = np.sqrt(K * (K + 1) - m[i] * (m[i] + 1))
    return (sp + sp.T) / 2, (sp - sp.T) / 2j, m


def oat_moments_dicke(p: OatParams, t) -> CollectiveMoments:
    """Same moments by explicit evolution in the ``2K+1`` Dicke states."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    Kx, Ky, m = _dicke_ops(p.Ktot)
    Kz = np.diag(m)
    w, v = np.linalg.eigh(Kx)
    psi0 = v[:, -1]
    psi = psi0[None, :] * np.exp(-1j * p.chi * m[None, :] ** 2 * t[:, None])

    def ev(A):
        return np.real(np.einsum("ta,ab,tb->t", psi.conj(), A, psi))

    my, mz = ev(Ky), ev(Kz)
    vyy = ev(Ky @ Ky) - my**2
    vzz = ev(Kz @ Kz) - mz**2
    cyz = ev((Ky @ Kz + Kz @ Ky) / 2) - my * mz
    cov = np.stack([np.stack([vyy, cyz], -1), np.stack([cyz, vzz], -1)], -2)
    J2 = ev(Kx @ Kx) + ev(Ky @ Ky) + ev(Kz @ Kz)
    return CollectiveMoments(ev(Kx), cov, total_J2=J2)


def oat_squeezing(p: OatParams, t) -> Squeezing:
    # the rotor of length K = N S is normalized like N spins of length S: 2NS = 2K
    return squeezing_from_moments(oat_moments(p, t), N=1, S=p.Ktot)


def fitted_tmin(p: OatParams) -> float:
    return TMIN_AMPLITUDE / (p.chi * (2 * p.Ktot) ** TMIN_EXPONENT)


@dataclass
class OptimalTime:
    t_min: float
    xi2_min: float
    seed: float
    trivial: bool


def optimal_time(p: OatParams, grid: int = 400) -> OptimalTime:
    """Time of minimal ``xi2`` for OAT from the coherent state.

    A coarse scan on ``[0, 3 * seed]`` (capped at the quarter revival) picks
    the basin of the first minimum, then golden-section search refines it.
    ``Ktot = 1/2`` never squeezes and is flagged ``trivial``.
    """
    if p.Ktot < 1 or p.chi == 0:
        return OptimalTime(t_min=float("nan"), xi2_min=1.0, seed=float("nan"), trivial=True)
    chi = abs(p.chi)
    q = OatParams(p.Ktot, chi)
    seed = fitted_tmin(q)
    hi = min(3 * seed, np.pi / (2 * chi))
    ts = np.linspace(0, hi, grid + 1)[1:]
    xi = oat_squeezing(q, ts).xi2
    k = int(np.argmin(xi))
    lo_t = ts[k - 1] if k > 0 else ts[0] / 2
    hi_t = ts[k + 1] if k + 1 < len(ts) else ts[k]
    f = lambda s: float(oat_squeezing(q, s).xi2)
    if k + 1 < len(ts) and f(ts[k]) < min(f(lo_t), f(hi_t)):
        res = minimize_scalar(f, bracket=(lo_t, ts[k], hi_t), method="golden", tol=1e-10)
    else:
        res = minimize_scalar(f, bounds=(lo_t, hi_t), method="bounded", options={"xatol": 1e-12 * hi})
    return OptimalTime(t_min=float(res.x), xi2_min=float(res.fun), seed=seed, trivial=False)


@dataclass
class TminFit:
    amplitude: float
    exponent: float
    xi2_exponent: float
    Ktot: np.ndarray
    t_min: np.ndarray
    xi2_min: np.ndarray


def fit_optimal_scaling(Ktot, chi: float = 1.0) -> TminFit:
    """Fit ``chi t_min = A / (2K)**sigma`` and ``xi2_min ~ (2K)**e`` over ``Ktot``."""
    Ks = np.asarray(Ktot, dtype=float)
    res = [optimal_time(OatParams(K, chi)) for K in Ks]
    tmin = np.array([r.t_min for r in res])
    xmin = np.array([r.xi2_min for r in res])
    ft = fit_power_law(2 * Ks, chi * tmin)
    fx = fit_power_law(2 * Ks, xmin)
    return TminFit(ft.amplitude, -ft.exponent, fx.exponent, Ks, tmin, xmin)


def early_time_scaling(Ktot, alphas, chi: float = 1.0) -> dict[float, float]:
    """Exponents ``rho_alpha`` of ``xi2(alpha t_min) ~ K**(-rho_alpha)``.

    For fixed spin length ``S`` the family ``Ktot = N S`` gives the same
    exponent against ``N``.
    """
    Ks = np.asarray(Ktot, dtype=float)
    if len(Ks) < 3:
        raise ValueError("need at least 3 sizes to fit an exponent")
    tmin = np.array([optimal_time(OatParams(K, chi)).t_min for K in Ks])
    out = {}
    for a in alphas:
        if not 0 < a <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {a}")
        xi = np.array([float(oat_squeezing(OatParams(K, chi), a * t).xi2) for K, t in zip(Ks, tmin)])
        out[a] = -fit_power_law(Ks, xi).exponent
    return out
