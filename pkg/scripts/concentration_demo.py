"""Empirical tail of |M_c| around S_c/2 against the 2 exp(-delta^2 S_c / 28) bound, by instance size."""

import argparse

from fairmatch.fairness import color_mass, empirical_concentration
from fairmatch.graph import FairnessSpec, generate_erdos_renyi
from fairmatch.lp import solve_lp_fair


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="100,300,800")
    ap.add_argument("--ell", type=int, default=2)
    ap.add_argument("--delta", type=float, default=0.5)
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = FairnessSpec(0.9 / args.ell, 1.1 / args.ell)
    print(f"{'n':>6} {'color':>5} {'S_c':>8} {'freq':>8} {'+-3se':>8} {'bound':>8}")
    for n in (int(s) for s in args.sizes.split(",")):
        g = generate_erdos_renyi(n, 10 / n, args.ell, seed=args.seed)
        x = solve_lp_fair(g, spec).x
        est = empirical_concentration(g, x, delta=args.delta, trials=args.trials, base_seed=args.seed)
        s_c = color_mass(g, x)
        for c in est.colors:
            print(f"{n:>6} {c + 1:>5} {s_c[c]:>8.1f} {est.frequency[c]:>8.4f} "
                  f"{est.radius[c]:>8.4f} {est.bound[c]:>8.4f}")


if __name__ == "__main__":
    main()
