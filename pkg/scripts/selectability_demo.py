"""Per-edge match frequency of the rounding on the star fixture, next to x_e / 2."""

import argparse

from fairmatch.graph import generate_star_fixture
from fairmatch.rounding import estimate_selectability


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--epsilon", type=float, default=0.5)
    ap.add_argument("--trials", type=int, default=20000)
    args = ap.parse_args()

    g, x = generate_star_fixture(args.n, args.epsilon)
    est = estimate_selectability(g, x, args.trials)
    for e, edge in enumerate(g.edges):
        cond = est.matched_given_proposed[e] / max(1, est.proposed[e])
        print(f"({edge.u},{edge.v}) color {edge.color + 1}: x/2 {x[e] / 2:.4f}  "
              f"freq {est.frequency[e]:.4f} +- {est.radius[e]:.4f}  matched|proposed {cond:.3f}")


if __name__ == "__main__":
    main()
