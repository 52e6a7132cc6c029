"""Samples (n, 0, ..., 0) approach delta_0 weakly while their mean stays at 1."""

from wsetlab.robustness import breakdown_demo_mean


def main():
    rep = breakdown_demo_mean()
    print(f"{'n':>8}  {'levy':>10}  {'mean':>6}")
    for n, d, m in zip(rep.ns, rep.levy, rep.means):
        print(f"{n:>8}  {d:>10.6f}  {m:>6.3f}")
    print(f"max |mean - 1| over n <= 10000: {rep.max_mean_deviation:.3g}")


if __name__ == "__main__":
    main()
