"""Shrink all cuts of the g=2 surface by xi and watch |f| flatten while Im tau blows up like |ln xi| / pi."""
import argparse

from fgnls import focusing_surface
from fgnls.analysis import degeneration_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    xis = [1.0, 1e-1, 1e-2, 1e-3, 1e-4]
    curve = degeneration_sweep(focusing_surface([0.1 + 2j, 0.5j, -0.1 + 1j]), xis, args.samples, args.seed)
    print(f"{'xi':>8} {'sup|f-1|':>12} {'lambda_min':>12}")
    for xi, dev, lam in zip(curve.xi, curve.sup_dev, curve.lambda_min):
        print(f"{xi:8.0e} {dev:12.6f} {lam:12.6f}")
    print(f"slope of lambda_min against |ln xi|: {curve.slope():.4f} (predicted {curve.predicted_slope:.4f})")
    print(f"ratio sup|f-1| / xi at the smallest xi: {curve.sup_dev[-1] / xis[-1]:.3f}")
    print("sup |f - 1| strictly decreasing:", curve.strictly_decreasing())


if __name__ == "__main__":
    main()
