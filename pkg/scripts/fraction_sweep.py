"""Squeezing at a fixed fraction of the rotor optimal time: TCE vs RSW.

Sweeps B_q for several lattice sizes and records both estimates of xi2 at
alpha * t_min, together with the TCE stop reason.

    python scripts/fraction_sweep.py --S 3 --L 6 8 10 --bq -0.5 0 1 2 4 7 10
"""
from _common import parser, save, setup

from dipsqueeze.lattice import LatticeSpec
from dipsqueeze.sweeps import squeezing_at_fraction


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--S", type=float, default=3.0)
    ap.add_argument("--L", type=int, nargs="+", default=[6, 8, 10])
    ap.add_argument("--bq", type=float, nargs="+", default=[0.0, 1.0, 2.0, 4.0, 7.0, 10.0])
    ap.add_argument("--alpha", type=float, default=0.3)
    ap.add_argument("--no-tce", action="store_true", help="RSW only")
    args = ap.parse_args()
    out = setup(args)
    cols = {k: [] for k in ("B_q", "L", "N", "t_min", "t", "xi2_tce", "xi2_rsw", "rel_dev", "stop_reason", "energy_drift")}
    for bq in args.bq:
        for L in args.L:
            p = squeezing_at_fraction(LatticeSpec(L=L, S=args.S, B_q=bq), args.alpha, run_tce=not args.no_tce)
            row = (bq, L, p.N, p.t_min, p.t, p.xi2_tce, p.xi2_rsw, p.rel_dev, p.stop_reason, p.energy_drift)
            for k, v in zip(cols, row):
                cols[k].append(v)
            print(f"B_q={bq:6.2f} L={L:3d} xi2 TCE={p.xi2_tce} RSW={p.xi2_rsw:.5f} ({p.stop_reason})")
    save(out, f"fraction_S{args.S:g}", cols, vars(args))


if __name__ == "__main__":
    main()
