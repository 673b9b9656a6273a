"""Mean-field phase diagram: ordering temperatures, T_CSS and phase boundaries.

    python scripts/phase_diagram.py --S 3 6 8 --bq-max 60 --points 40
"""
import numpy as np
from _common import parser, save, setup

from dipsqueeze.meanfield import DEFAULT_L, phase_boundaries, phase_diagram


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--S", type=float, nargs="+", default=[3.0])
    ap.add_argument("--bq-min", type=float, default=-2.0)
    ap.add_argument("--bq-max", type=float, default=60.0)
    ap.add_argument("--points", type=int, default=32)
    ap.add_argument("--L", type=int, default=DEFAULT_L, help="lattice used for the dipolar sums")
    args = ap.parse_args()
    out = setup(args)
    summary = {k: [] for k in ("S", "B_qm", "B_qc", "B_qp")}
    for S in args.S:
        rows = phase_diagram(S, np.linspace(args.bq_min, args.bq_max, args.points), L=args.L)
        cols = {k: [getattr(r, k) for r in rows] for k in ("B_q", "T_c_xy", "T_c_neel", "T_css", "m_xy", "m_stag")}
        save(out, f"phase_S{S:g}", cols, vars(args))
        pb = phase_boundaries(S, L=args.L)
        for k in summary:
            summary[k].append(getattr(pb, k))
        print(f"S={S:g}: B_qm={pb.B_qm:.4f} B_qc={pb.B_qc:.3f} B_qp={pb.B_qp:.3f}")
    save(out, "phase_boundaries", summary, vars(args))


if __name__ == "__main__":
    main()
