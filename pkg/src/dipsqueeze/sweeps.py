"""Parameter sweeps shared by the command line and the experiment scripts."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeSpec
from .spinwave import rotor_tmin, rsw_squeezing
from .tce import MonitorOptions, TceModel, default_dt, integrate


@dataclass
class FractionPoint:
    """``xi2`` of TCE and RSW at ``alpha * t_min`` for one lattice."""

    L: int
    N: int
    B_q: float
    t_min: float
    t: float
    xi2_tce: float | None
    xi2_rsw: float | None
    stop_reason: str
    energy_drift: float

    @property
    def rel_dev(self) -> float | None:
        if self.xi2_tce is None or self.xi2_rsw is None:
            return None
        return abs(self.xi2_tce - self.xi2_rsw) / self.xi2_rsw


def squeezing_at_fraction(
    spec: LatticeSpec,
    alpha: float = 0.3,
    dt: float | None = None,
    monitor: MonitorOptions | None = None,
    run_tce: bool = True,
) -> FractionPoint:
    """Evaluate both theories at ``alpha`` times the rotor optimal time.

    The TCE step is shrunk so the grid lands exactly on the target time.  If
    the validity monitor stops the run earlier, the TCE value is ``None``.
    """
    tmin = rotor_tmin(spec)
    T = alpha * tmin
    rsw = rsw_squeezing(spec, [T], allow_unstable=True)
    x_rsw = float(rsw.xi2[0]) if rsw.xi2.size else None
    x_tce, reason, drift = None, "skipped", 0.0
    if run_tce:
        model = TceModel(spec)
        h = dt or default_dt(spec, model.table)
        n = max(1, math.ceil(T / h))
        rep = integrate(model, T, dt=T / n, monitor=monitor, record_every=max(1, n // 50))
        reason, drift = rep.stop_reason, rep.energy_drift
        if rep.stop_reason == "end-of-grid" and np.isclose(rep.series.t[-1], T):
            x_tce = float(rep.series.squeezing.xi2[-1])
    return FractionPoint(spec.L, spec.N, spec.B_q, tmin, T, x_tce, x_rsw, reason, drift)
