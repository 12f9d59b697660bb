"""Recompute published relative deltas and MixR from their component metrics."""

import argparse
import json

from srcbias.metrics import mixr, relative_delta

# mixed-REAL and mixed-AI (R@1, MedR, MeanR) as printed in the published retrieval tables
ROWS = {
    "alpro/cogvideox": ((10.10, 14.00, 82.94), (22.60, 10.00, 101.16)),
    "alpro/opensora-text": ((10.80, 13.50, 83.72), (24.50, 6.00, 69.39)),
    "alpro/opensora-image": ((8.0, 15.5, 94.31), (22.4, 7.0, 70.33)),
}
NAMES = ("R@1", "MedR", "MeanR")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args()
    out = {}
    for name, (real, ai) in ROWS.items():
        d = relative_delta(dict(zip(NAMES, real)), dict(zip(NAMES, ai)))
        out[name] = {**{m: round(d[m], 2) for m in NAMES}, "MixR": round(mixr(d), 2)}
    if args.json:
        print(json.dumps(out, indent=2))
        return
    print(f"{'row':24s}" + "".join(f"{m:>9s}" for m in (*NAMES, "MixR")))
    for name, vals in out.items():
        print(f"{name:24s}" + "".join(f"{v:9.2f}" for v in vals.values()))


if __name__ == "__main__":
    main()
