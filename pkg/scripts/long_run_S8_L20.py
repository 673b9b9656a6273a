"""Long TCE run: S = 8 on a 20 x 20 torus, checkpointed in segments.

Each segment integrates ``--segment`` time units and writes a checkpoint; an
interrupted run resumes from the latest one, and its CSV then holds only the
segments run in that invocation.  Expect hours on one core.

    python scripts/long_run_S8_L20.py --bq 2 --t-max 1.0 --segment 0.05
"""
import math

import numpy as np
from _common import parser, save, setup

from dipsqueeze.lattice import LatticeSpec
from dipsqueeze.spinwave import rotor_tmin
from dipsqueeze.tce import MonitorOptions, TceModel, default_dt, integrate, load_checkpoint, save_checkpoint


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--S", type=float, default=8.0)
    ap.add_argument("--L", type=int, default=20)
    ap.add_argument("--bq", type=float, default=2.0)
    ap.add_argument("--t-max", type=float, default=None, help="default: rotor t_min")
    ap.add_argument("--segment", type=float, default=0.05)
    ap.add_argument("--dt", type=float, default=None)
    args = ap.parse_args()
    out = setup(args)
    spec = LatticeSpec(L=args.L, S=args.S, B_q=args.bq)
    model = TceModel(spec)
    t_end = args.t_max or rotor_tmin(spec)
    dt = args.dt or default_dt(spec, model.table)
    ck = out / f"long_S{args.S:g}_L{args.L}_Bq{args.bq:g}.npz"
    state = load_checkpoint(ck)[1] if ck.exists() else None
    mon = MonitorOptions(stop_on_r_max=False)
    parts = []
    t = state.time if state else 0.0
    while t < t_end - 1e-12:
        stop = min(t_end, t + args.segment)
        n = max(1, math.ceil((stop - t) / dt))
        rep = integrate(model, stop, (stop - t) / n, state=state, monitor=mon, record_every=max(1, n // 20))
        state = rep.final_state
        save_checkpoint(ck, model, state)
        parts.append(rep.series.columns())
        t = state.time
        print(f"t={t:.4f} xi2={rep.xi2[-1]:.5f} R={rep.R[-1]:.4f} drift={rep.energy_drift:.1e}")
        if rep.stop_reason != "end-of-grid":
            print(f"stopped: {rep.stop_reason} {rep.message}")
            break
    if parts:
        cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
        save(out, ck.stem, cols, vars(args), {"t_end": t_end, "dt": dt})


if __name__ == "__main__":
    main()
