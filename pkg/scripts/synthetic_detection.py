"""Detector AUC on Gaussian data with far outliers, across several seeds."""

import argparse

import numpy as np

from fraudbat.experiments import synthetic_detection_auc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    aucs = [synthetic_detection_auc(s) for s in range(args.seeds)]
    for s, a in enumerate(aucs):
        print(f"seed {s:2d}  auc {a:.4f}")
    print(f"mean {np.mean(aucs):.4f}  min {np.min(aucs):.4f}")


if __name__ == "__main__":
    main()
