"""Collective-spin moments and the squeezing parameter derived from them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CollectiveMoments:
    """``<J^x>`` and the symmetrized covariance of ``(J^y, J^z)``.

    Fields may carry a leading time axis: ``mean_x`` shape ``(T,)`` and
    ``cov`` shape ``(T, 2, 2)``.
    """

    mean_x: np.ndarray
    cov: np.ndarray
    total_J2: np.ndarray | None = None

    def __post_init__(self):
        self.mean_x = np.asarray(self.mean_x, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)

    def eigvals(self) -> tuple[np.ndarray, np.ndarray]:
        """``(var_min, var_max)`` of the transverse covariance."""
        a, b, c = self.cov[..., 0, 0], self.cov[..., 1, 1], self.cov[..., 0, 1]
        half_tr = (a + b) / 2
        rad = np.hypot((a - b) / 2, c)
        return half_tr - rad, half_tr + rad


@dataclass
class Squeezing:
    xi2: np.ndarray
    angle: np.ndarray
    var_min: np.ndarray
    var_max: np.ndarray
    degenerate: np.ndarray


def squeezing_from_moments(m: CollectiveMoments, N: int, S: float) -> Squeezing:
    """``xi2 = 2 N S var_min / <J^x>**2`` and the squeezed-axis angle.

    The angle is measured from the ``y`` axis towards ``z`` and lies in
    ``[0, pi)``.  Where ``<J^x> = 0`` the parameter is undefined and ``inf``
    is returned; callers decide how to present it.
    """
    vmin, vmax = m.eigvals()
    a, b, c = m.cov[..., 0, 0], m.cov[..., 1, 1], m.cov[..., 0, 1]
    # eigenvector of the smaller eigenvalue: angle of (c, vmin - a) or (vmin - b, c)
    ang = np.where(np.abs(a - vmin) > np.abs(b - vmin), np.arctan2(vmin - a, c), np.arctan2(c, vmin - b))
    ang = np.mod(ang, np.pi)
    scale = max(abs(a).max() if np.size(a) else 1.0, 1e-300)
    degenerate = np.abs(vmax - vmin) <= 1e-12 * scale
    mx2 = m.mean_x**2
    with np.errstate(divide="ignore", invalid="ignore"):
        xi2 = np.where(mx2 > 0, 2 * N * S * vmin / np.where(mx2 > 0, mx2, 1.0), np.inf)
    return Squeezing(xi2=xi2, angle=ang, var_min=vmin, var_max=vmax, degenerate=degenerate)


def validity_ratio(m: CollectiveMoments) -> np.ndarray:
    """Heisenberg ratio ``4 var_min var_max / <J^x>**2`` (``>= 1`` for physical states).

    ``nan`` where ``<J^x> = 0``.
    """
    vmin, vmax = m.eigvals()
    mx2 = m.mean_x**2
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(mx2 > 0, 4 * vmin * vmax / np.where(mx2 > 0, mx2, 1.0), np.nan)


@dataclass
class Series:
    """Time series in the shared output schema."""

    t: np.ndarray
    mean_x: np.ndarray
    cov: np.ndarray
    energy: np.ndarray
    total_J2: np.ndarray
    N: int
    S: float

    @property
    def moments(self) -> CollectiveMoments:
        return CollectiveMoments(self.mean_x, self.cov, self.total_J2)

    @property
    def squeezing(self) -> Squeezing:
        return squeezing_from_moments(self.moments, self.N, self.S)

    @property
    def R(self) -> np.ndarray:
        return validity_ratio(self.moments)

    def columns(self) -> dict[str, np.ndarray]:
        sq = self.squeezing
        return {
            "t": self.t,
            "mean_x": self.mean_x,
            "var_min": sq.var_min,
            "var_max": sq.var_max,
            "angle": sq.angle,
            "xi2": sq.xi2,
            "R": self.R,
            "energy": self.energy,
            "J2": self.total_J2,
        }

    def truncate(self, n: int) -> "Series":
        return Series(self.t[:n], self.mean_x[:n], self.cov[:n], self.energy[:n], self.total_J2[:n], self.N, self.S)
