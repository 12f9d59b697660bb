"""Frame-order and single-frame ablations on synthetic corpora across several seeds."""

import argparse

from srcbias.pipeline import evaluate_corpora
from srcbias.ranking import shuffle_corpus
from srcbias.synth import SynthConfig, generate_synthetic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=[42, 1, 2, 3, 4])
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--interleave-seeds", type=int, default=10)
    args = ap.parse_args()
    print("seed  base-MixR  shuffle-ai  shuffle-all  reverse | MedR base/single  MeanR base/single  R@1 base/single")
    for seed in args.seeds:
        d = generate_synthetic(SynthConfig(seed=seed, n_items=args.n))

        def run(real, ai, pooling="positional-ramp"):
            return evaluate_corpora(real, ai, d.queries, d.rel, seed, pooling, n_seeds=args.interleave_seeds).report

        base = run(d.real, d.ai)
        sai = run(d.real, shuffle_corpus(d.ai, "random", seed))
        sall = run(shuffle_corpus(d.real, "random", seed), shuffle_corpus(d.ai, "random", seed))
        rev = run(shuffle_corpus(d.real, "reverse", seed), shuffle_corpus(d.ai, "reverse", seed))
        single = run(d.real, d.ai, "single-frame")
        b, s = base.normalized, single.normalized
        print(
            f"{seed:4d} {base.mixr['normalized']:10.2f} {sai.mixr['normalized']:11.2f} {sall.mixr['normalized']:12.2f} "
            f"{rev.mixr['normalized']:8.2f} | {b['MedR']:7.1f}/{s['MedR']:<7.1f} {b['MeanR']:8.1f}/{s['MeanR']:<8.1f} "
            f"{b['R@1']:7.1f}/{s['R@1']:<7.1f}"
        )


if __name__ == "__main__":
    main()
