"""Time at which <J^x> first crosses zero in TCE dynamics, versus lattice size.

Runs with the validity stops disabled, since the crossing lies beyond them.

    python scripts/crossing_times.py --S 3 --bq 10 --L 6 8 10
"""
from _common import parser, save, setup

from dipsqueeze.analysis import crossing_time, second_minimum
from dipsqueeze.lattice import LatticeSpec
from dipsqueeze.tce import MonitorOptions, TceModel, integrate


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--S", type=float, default=3.0)
    ap.add_argument("--bq", type=float, default=10.0)
    ap.add_argument("--L", type=int, nargs="+", default=[6, 8, 10])
    ap.add_argument("--t-max", type=float, default=0.6)
    ap.add_argument("--dt", type=float, default=5e-4)
    args = ap.parse_args()
    out = setup(args)
    free = MonitorOptions(stop_on_r_max=False, stop_on_negative_variance=False)
    cols = {k: [] for k in ("L", "N", "t0", "var_min_2nd", "t_var_min_2nd", "energy_drift")}
    for L in args.L:
        spec = LatticeSpec(L=L, S=args.S, B_q=args.bq)
        rep = integrate(TceModel(spec), args.t_max, args.dt, monitor=free, record_every=4)
        s = rep.series
        t0 = crossing_time(s.t, s.mean_x)
        m2 = second_minimum(s.t, s.squeezing.var_min / spec.N)
        row = (L, spec.N, t0, m2.value if m2 else None, m2.time if m2 else None, rep.energy_drift)
        for k, v in zip(cols, row):
            cols[k].append(v)
        print(f"L={L:3d} t0={t0}")
    save(out, f"crossing_S{args.S:g}_Bq{args.bq:g}", cols, vars(args))


if __name__ == "__main__":
    main()
