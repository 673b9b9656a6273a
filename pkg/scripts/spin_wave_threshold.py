"""Linear spin-wave instability threshold versus lattice size and convention.

    python scripts/spin_wave_threshold.py --L 16 32 64 128
"""
from _common import parser, save, setup

from dipsqueeze.lattice import LatticeSpec, build_couplings
from dipsqueeze.spinwave import SW_CONVENTIONS, instability_threshold


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--S", type=float, default=3.0)
    args = ap.parse_args()
    out = setup(args)
    cols = {k: [] for k in ("L", "convention", "J0", "J_pipi", "B_qm", "kx", "ky")}
    for L in args.L:
        Jk = build_couplings(LatticeSpec(L=L, S=args.S), dense=False).Jk
        for conv in SW_CONVENTIONS:
            th = instability_threshold(LatticeSpec(L=L, S=args.S), convention=conv)
            row = (L, conv, Jk[0, 0], Jk[L // 2, L // 2], th.B_q, th.mode[0], th.mode[1])
            for k, v in zip(cols, row):
                cols[k].append(v)
            print(f"L={L:4d} {conv:9s} B_qm={th.B_q:.5f} at k=({th.mode[0]:.3f}, {th.mode[1]:.3f})")
    save(out, "sw_threshold", cols, vars(args))


if __name__ == "__main__":
    main()
