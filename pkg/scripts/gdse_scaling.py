"""Oblique-edge to bulk W ratio of the triangle as a function of size L."""
import argparse

from skinlab import ModelParams, assemble_obc, build_geometry, gdse_report, obc_spectrum, w_distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 12, 16, 20, 24])
    ap.add_argument("--gamma", type=float, default=2.0)
    ap.add_argument("--window", type=float, nargs=2, default=None, metavar=("LO", "HI"))
    args = ap.parse_args()

    params = ModelParams(gamma=args.gamma)
    print(f"{'L':>4} {'sites':>6} {'oblique':>9} {'bottom':>9} {'left':>9}")
    for L in args.sizes:
        geo = build_geometry("triangle", L)
        spec = obc_spectrum(assemble_obc(params, geo))
        r = gdse_report(w_distribution(spec, geo, energy_window=args.window)).ratios
        print(f"{L:>4} {geo.n_sites:>6} {r['edge_oblique']:>9.4f} {r['edge_bottom']:>9.4f} {r['edge_left']:>9.4f}")


if __name__ == "__main__":
    main()
