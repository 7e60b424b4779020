"""Run every CLI command with the default parameters and write results to one directory."""
import argparse
import time

from skinlab.cli import COMMANDS, run
from skinlab.config import load_config, parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=None, help="JSON config; defaults are used when omitted")
    ap.add_argument("--out", default="out/figures")
    ap.add_argument("--commands", nargs="+", default=list(COMMANDS), choices=COMMANDS)
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else parse_config({})
    for command in args.commands:
        t0 = time.perf_counter()
        run(command, cfg, args.out)
        print(f"{command:<9} {time.perf_counter() - t0:7.1f} s")


if __name__ == "__main__":
    main()
