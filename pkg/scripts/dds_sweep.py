"""DDS delta over a range of energies, printed as a two-column table."""
import argparse

import numpy as np

from skinlab import ModelParams, dds_metric
from skinlab.greens import OffContourError


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--emin", type=float, default=-4.5)
    ap.add_argument("--emax", type=float, default=4.5)
    ap.add_argument("--steps", type=int, default=37)
    ap.add_argument("--grid-n", type=int, default=201)
    args = ap.parse_args()

    params = ModelParams()
    for E in np.linspace(args.emin, args.emax, args.steps):
        try:
            r = dds_metric(params, float(E), args.grid_n)
        except OffContourError:
            print(f"{E:+7.3f}       -")
            continue
        print(f"{E:+7.3f} {r.delta:9.4f} {'DDS' if r.verdict else ''}")


if __name__ == "__main__":
    main()
