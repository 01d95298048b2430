"""Recalibrate the shipped motion thresholds.

Thirty synthetic 20-minute traces per technology, each with one short
burst every five minutes, are scored at every tick. Each detector's
threshold is set so it flags 11% of the pooled ticks, and the result is
written over the package defaults. The acceptance suite checks these
thresholds on a different set of seeds.

    python demos/calibrate_motion.py [--seeds 100:130] [--out PATH]
"""

import argparse
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from rfresp.calibration import TARGET_RATE, collect, thresholds_for, write_defaults

DEFAULT_OUT = Path(__file__).resolve().parents[1] / "src" / "rfresp" / "data" / "motion_defaults.json"


def calibrate(args):
    tech, seeds = args
    ts = collect(tech, seeds)
    return tech, thresholds_for(ts, TARGET_RATE), float(ts.burst.mean())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", default="100:130")
    ap.add_argument("--out", default=str(DEFAULT_OUT))
    a = ap.parse_args()
    lo, hi = map(int, a.seeds.split(":"))
    seeds = list(range(lo, hi))
    table = {}
    with ProcessPoolExecutor() as pool:
        for tech, th, frac in pool.map(calibrate, [(t, seeds) for t in ("cir", "csi", "rss", "sub")]):
            print(f"{tech}: burst ticks {frac:.3f}  " + "  ".join(f"{k}={v:.5g}" for k, v in th.items()))
            table[tech] = {"short_window": 2.0, "long_window": 30.0, "ave_window": 30.0, "thresholds": th}
    write_defaults(table, a.out)
    print(f"wrote {a.out}")


if __name__ == "__main__":
    main()
