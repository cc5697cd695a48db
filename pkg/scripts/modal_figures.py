#!/usr/bin/env python3
"""Eigenvalue scatter and the rate-vs-sigma curve as SVG figures.

    python3 scripts/modal_figures.py --sigma 5 --kmax 15 --out figures
"""

import argparse
from pathlib import Path

from gtlab.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma", type=float, default=5.0)
    ap.add_argument("--kmax", type=int, default=15)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    out = Path(args.out)
    rc = cli_main(
        ["modal-report", "--sigma", f"const:{args.sigma}", "--kmax", str(args.kmax),
         "--out", str(out / "modal"), "--plot"]
    )
    rc |= cli_main(["rate-curve", "--grid", "0.05:10:400", "--out", str(out / "curve"), "--plot"])
    raise SystemExit(rc)


if __name__ == "__main__":
    main()
