"""Optimal one-axis-twisting time and squeezing versus total spin, with fits.

    python scripts/oat_scaling.py --kmin 10 --kmax 1000 --points 13
"""
import numpy as np
from _common import parser, save, setup

from dipsqueeze.oat import early_time_scaling, fit_optimal_scaling


def main():
    ap = parser(__doc__.splitlines()[0])
    ap.add_argument("--kmin", type=float, default=10)
    ap.add_argument("--kmax", type=float, default=1000)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.3, 0.5, 0.7, 1.0])
    args = ap.parse_args()
    out = setup(args)
    Ks = np.unique(np.round(2 * np.geomspace(args.kmin, args.kmax, args.points)) / 2)
    fit = fit_optimal_scaling(Ks)
    rho = early_time_scaling(Ks, args.alphas)
    print(f"chi t_min = {fit.amplitude:.4f} / (2K)^{fit.exponent:.4f};  xi2_min ~ (2K)^{fit.xi2_exponent:.4f}")
    print("rho_alpha: " + ", ".join(f"{a:g}: {r:.4f}" for a, r in rho.items()))
    extra = {"A": fit.amplitude, "sigma": fit.exponent, "xi2_exponent": fit.xi2_exponent}
    extra.update({f"rho_{a:g}": r for a, r in rho.items()})
    save(out, "oat_scaling", {"Ktot": fit.Ktot, "t_min": fit.t_min, "xi2_min": fit.xi2_min}, vars(args), extra)


if __name__ == "__main__":
    main()
