"""Run every shipped config and write the artifacts under one directory."""

import argparse
import sys

from wsetlab.cli import reproduce_all


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="reproduce-out")
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args()
    return reproduce_all(out_dir=args.out_dir, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
