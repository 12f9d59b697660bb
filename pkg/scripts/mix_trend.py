"""Held-out Normalized delta R@1 after training on real/AI mixes of increasing AI share."""

import argparse

import numpy as np

from srcbias.synth import SynthConfig, generate_synthetic
from srcbias.trainer import TrainConfig, train

RHOS = (0.0, 0.2, 0.4, 0.6, 0.8)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[42, 0, 1, 2, 3])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--lambda", dest="lam", type=float, default=0.0)
    ap.add_argument("--epochs", type=int, default=50)
    ap.add_argument("--eval-seeds", type=int, default=10)
    args = ap.parse_args()
    rows = []
    for seed in args.seeds:
        d = generate_synthetic(SynthConfig(seed=seed, n_items=args.n))
        vals = []
        for rho in RHOS:
            cfg = TrainConfig(seed=seed, mix_ratio=rho, debias_weight=args.lam, epochs=args.epochs, eval_seeds=args.eval_seeds)
            params, hist = train(cfg, d.real, d.ai, d.queries, d.rel)
            b = d.bias_direction
            wb = params.w @ b
            vals.append((hist.normalized_delta_r1[-1], float(b @ wb / np.linalg.norm(wb))))
        rows.append([v[0] for v in vals])
        print(f"seed {seed:3d}  ND R@1 " + " ".join(f"{v[0]:8.1f}" for v in vals) + "   cos(Wb,b) " + " ".join(f"{v[1]:.3f}" for v in vals), flush=True)
    m = np.array(rows)
    print("rho         " + " ".join(f"{r:8.1f}" for r in RHOS))
    print("mean        " + " ".join(f"{v:8.1f}" for v in m.mean(0)))
    print("std.err     " + " ".join(f"{v:8.1f}" for v in m.std(0) / np.sqrt(len(rows))))


if __name__ == "__main__":
    main()
