"""Credit-card experiment: baseline detector vs. bat-selected features.

Needs the public credit-card fraud CSV (Time, V1..V28, Amount, Class).
"""

import argparse
import json

from fraudbat.batopt import BatConfig
from fraudbat.experiments import REFERENCE_DROPPED, kaggle_reproduction


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--bats", type=int, default=10)
    ap.add_argument("--iters", type=int, default=10)
    ap.add_argument("--fitness-epochs", type=int, default=10)
    args = ap.parse_args()
    res = kaggle_reproduction(
        args.csv, args.seed, BatConfig(n_bats=args.bats, max_iter=args.iters, seed=args.seed), args.fitness_epochs
    )
    out = vars(res) | {"reference_dropped": REFERENCE_DROPPED}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
