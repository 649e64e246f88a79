"""Binary bat search on OneMax: how often the all-ones optimum is reached."""

import argparse

from fraudbat.experiments import onemax_run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dim", type=int, default=16)
    ap.add_argument("--runs", type=int, default=100)
    args = ap.parse_args()
    hits, first = 0, []
    for seed in range(args.runs):
        res = onemax_run(seed, args.dim)
        hits += res.best_fitness == args.dim
        if res.best_fitness == args.dim:
            first.append(res.history.index(args.dim))
    print(f"optimum reached in {hits}/{args.runs} runs")
    if first:
        print(f"iterations to optimum: mean {sum(first) / len(first):.1f}, max {max(first)}")


if __name__ == "__main__":
    main()
