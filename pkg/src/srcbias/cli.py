"""Command-line entry point: ``srcbias <subcommand> [options]``.

Exit codes: 0 success, 1 runtime failure, 2 invalid input or configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, read_config_file
from .metrics import (
    BiasEvaluation,
    DeltaReport,
    bundles_csv,
    location_delta,
    mixr,
    simulate_interleaved,
)
from .pipeline import evaluate_corpora, project
from .pvector import (
    cluster_stats,
    extract_p,
    extract_p_random,
    p_debias,
    pca_project_2d,
    read_pvectors,
    write_pvectors,
)
from .ranking import Pooling, RankTable, pool_corpus, shuffle_corpus
from .stats import flow_entropy, flow_summary, paired_t_test
from .store import (
    StoreError,
    load_corpus,
    load_queries,
    load_relevance,
    save_corpus,
    save_queries,
    save_relevance,
    validate_relevance,
)
from .svg import bar_chart, scatter_plot
from .synth import SynthConfig, generate_synthetic, synthetic_flows
from .trainer import ScorerParams, TrainConfig, train

log = logging.getLogger("srcbias")

ABLATIONS = ("shuffle-all", "shuffle-ai", "reverse", "single-frame")


class UsageError(ValueError):
    """Invalid input or configuration (exit code 2)."""


class Outputs:
    """Collects written files so the manifest can list them."""

    def __init__(self, root: Path):
        self.root = root
        self.files: list[str] = []
        root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.root / name

    def text(self, name: str, content: str) -> None:
        self.path(name).write_text(content, encoding="utf-8")

    def json(self, name: str, obj) -> None:
        self.text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- helpers


def _load_inputs(cfg: RunConfig):
    cfg.require("real", "ai", "queries", "rel")
    real, ai = load_corpus(cfg.real), load_corpus(cfg.ai)
    queries, rel = load_queries(cfg.queries), load_relevance(cfg.rel)
    validate_relevance(queries, rel, real, ai)
    return real, ai, queries, rel


def _load_params(path) -> ScorerParams:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read params {path}: {exc.strerror}") from None
    try:
        return ScorerParams.from_json(text)
    except (KeyError, json.JSONDecodeError, TypeError) as exc:
        raise UsageError(f"{path}: malformed scorer params ({exc})") from None


def _ranks_csv(table: RankTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query_id", "rank"])
    for q, r in table.ranks.items():
        w.writerow([q, r])
    return buf.getvalue()


def _read_ranks(path) -> dict[str, int]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise UsageError(f"{path}: no rank rows")
    out = {}
    for i, row in enumerate(rows, 2):
        try:
            rank = int(row["rank"])
            qid = row["query_id"]
        except (KeyError, TypeError, ValueError):
            raise UsageError(f"{path}:{i}: expected columns query_id,rank") from None
        if rank < 1:
            raise UsageError(f"{path}:{i}: rank must be >= 1")
        out[qid] = rank
    return out


def _delta_svg(report: DeltaReport, title: str) -> str:
    groups = [*report.metrics, "MixR"]
    series = {
        "Relative": [*report.relative.values(), report.mixr["relative"]],
        "Location": [*report.location.values(), report.mixr["location"]],
        "Normalized": [*report.normalized.values(), report.mixr["normalized"]],
    }
    return bar_chart(groups, series, title)


def _write_evaluation(out: Outputs, ev: BiasEvaluation, title: str, prefix: str = "") -> None:
    out.text(f"{prefix}bundles.csv", bundles_csv(ev.bundles))
    out.text(f"{prefix}deltas.csv", ev.report.to_csv())
    out.text(f"{prefix}deltas.json", ev.report.to_json() + "\n")
    out.text(f"{prefix}deltas.svg", _delta_svg(ev.report, title))
    for label, table in ev.tables.items():
        out.text(f"{prefix}ranks_{label.lower()}.csv", _ranks_csv(table))


def _projection_csv(ids, projection) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "label", "x", "y"])
    for vid, (x, y, label) in zip(ids, projection.points):
        w.writerow([vid, label, repr(x), repr(y)])
    return buf.getvalue()


# ---------------------------------------------------------------- commands


def cmd_metrics(cfg: RunConfig, args, out: Outputs) -> dict:
    real, ai, queries, rel = _load_inputs(cfg)
    w = _load_params(args.params).w if getattr(args, "params", None) else None
    ev = evaluate_corpora(
        real, ai, queries, rel, cfg.derived_seed("metrics"), cfg.pooling, cfg.frames, w, cfg.ks, cfg.seeds, cfg.workers
    )
    _write_evaluation(out, ev, f"source-bias deltas ({cfg.pooling})")
    return {"normalized_mixr": ev.report.mixr["normalized"]}


def cmd_interleave(cfg: RunConfig, args, out: Outputs) -> dict:
    real = _read_ranks(args.real_ranks)
    ai = _read_ranks(args.ai_ranks)
    if real.keys() != ai.keys():
        raise UsageError("real and AI rank files cover different queries")
    size = args.size or max(max(real.values()), max(ai.values()))
    if max(max(real.values()), max(ai.values())) > size:
        raise UsageError("a rank exceeds the corpus size")
    rt, at = RankTable(real, size), RankTable(ai, size)
    seed = cfg.derived_seed("interleave")
    mr, ma = simulate_interleaved(rt, at, seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["query_id", "mixed_real", "mixed_ai"])
    for q in mr.ranks:
        w.writerow([q, mr.ranks[q], ma.ranks[q]])
    out.text("interleaved.csv", buf.getvalue())
    loc = location_delta(rt, at, seed, cfg.ks, cfg.seeds)
    out.json("location.json", {"location": loc, "mixr": mixr(loc)})
    return {"location_mixr": mixr(loc)}


def _parse_ablation(mode: str | None) -> tuple[str, int | None]:
    if not mode:
        raise UsageError(f"--mode is required; one of {', '.join(ABLATIONS)}[:k]")
    kind, _, k = mode.partition(":")
    if kind not in ABLATIONS or (k and kind != "single-frame"):
        raise UsageError(f"unknown ablation {mode!r}; expected one of {', '.join(ABLATIONS)}")
    try:
        return kind, int(k) if k else None
    except ValueError:
        raise UsageError(f"bad frame index in {mode!r}") from None


def cmd_ablate(cfg: RunConfig, args, out: Outputs) -> dict:
    kind, k = _parse_ablation(args.mode or cfg.get("mode"))
    real, ai, queries, rel = _load_inputs(cfg)
    seed = cfg.derived_seed("ablate")
    pooling = Pooling.parse(cfg.pooling)
    if kind != "single-frame" and pooling.kind == "uniform-mean":
        print(
            f"warning: {kind} under uniform-mean pooling is a no-op (pooling ignores frame order)",
            file=sys.stderr,
        )
    base = evaluate_corpora(real, ai, queries, rel, seed, pooling, cfg.frames, None, cfg.ks, cfg.seeds, cfg.workers)
    abl_real, abl_ai, abl_pool = real, ai, pooling
    if kind == "shuffle-all":
        abl_real = shuffle_corpus(real, "random", seed)
        abl_ai = shuffle_corpus(ai, "random", seed)
    elif kind == "shuffle-ai":
        abl_ai = shuffle_corpus(ai, "random", seed)
    elif kind == "reverse":
        abl_real = shuffle_corpus(real, "reverse", seed)
        abl_ai = shuffle_corpus(ai, "reverse", seed)
    else:
        abl_pool = Pooling("single-frame", k)
    ev = evaluate_corpora(abl_real, abl_ai, queries, rel, seed, abl_pool, cfg.frames, None, cfg.ks, cfg.seeds, cfg.workers)
    _write_evaluation(out, ev, f"source-bias deltas ({kind})")
    _write_evaluation(out, base, f"source-bias deltas (baseline, {pooling})", prefix="baseline_")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "baseline_normalized", "ablated_normalized"])
    for m in base.report.metrics:
        w.writerow([m, repr(base.report.normalized[m]), repr(ev.report.normalized[m])])
    w.writerow(["MixR", repr(base.report.mixr["normalized"]), repr(ev.report.mixr["normalized"])])
    out.text("comparison.csv", buf.getvalue())
    return {"baseline_mixr": base.report.mixr["normalized"], "ablated_mixr": ev.report.mixr["normalized"]}


def _train_config(cfg: RunConfig, args) -> TrainConfig:
    rho = args.rho if args.rho is not None else cfg.get("rho", 0.0, float)
    lam = args.lam if args.lam is not None else cfg.get("lambda", 1.0, float)
    return TrainConfig(
        learning_rate=args.lr if args.lr is not None else cfg.get("learning_rate", 1e-3, float),
        epochs=args.epochs if args.epochs is not None else cfg.get("epochs", 50, int),
        batch_size=args.batch_size if args.batch_size is not None else cfg.get("batch_size", 32, int),
        seed=cfg.derived_seed("train-debias"),
        mix_ratio=rho,
        debias_weight=lam,
        pooling=cfg.pooling,
        frames=cfg.frames,
        tau=cfg.get("tau", 0.05, float),
        holdout=cfg.get("holdout", 0.2, float),
        eval_seeds=cfg.seeds,
        ks=cfg.ks,
    )


def cmd_train(cfg: RunConfig, args, out: Outputs) -> dict:
    real, ai, queries, rel = _load_inputs(cfg)
    tcfg = _train_config(cfg, args)
    params, history = train(tcfg, real, ai, queries, rel)
    out.text("params.json", params.to_json() + "\n")
    out.text("history.csv", history.to_csv())
    summary = {
        "initial_normalized_delta_r1": history.initial_normalized_delta_r1,
        "final_normalized_delta_r1": history.normalized_delta_r1[-1] if len(history) else history.initial_normalized_delta_r1,
        "initial_objective": history.initial_objective,
        "final_objective": history.final_objective,
        "train_config": tcfg.as_dict(),
    }
    out.json("summary.json", summary)
    epochs = list(range(1, len(history) + 1))
    if epochs:
        out.text(
            "history.svg",
            bar_chart([str(e) for e in epochs], {"Normalized R@1": history.normalized_delta_r1}, "held-out Normalized R@1 per epoch"),
        )
    return {k: v for k, v in summary.items() if k != "train_config"}


def _identity_for(params: ScorerParams) -> ScorerParams:
    return ScorerParams.identity(params.dim, params.tau)


def cmd_pvector(cfg: RunConfig, args, out: Outputs) -> dict:
    action = args.action
    if action == "extract":
        if not args.debiased:
            raise UsageError("pvector extract needs --debiased PARAMS")
        debiased = _load_params(args.debiased)
        original = _load_params(args.original) if args.original else _identity_for(debiased)
        corpus_path = args.corpus or cfg.ai
        if corpus_path is None:
            raise UsageError("pvector extract needs --corpus (or an 'ai' path in the config)")
        corpus = load_corpus(corpus_path)
        if args.variant == "random":
            p_set = extract_p_random(
                original, debiased, corpus, cfg.derived_seed("pvector"), cfg.pooling, cfg.frames, args.space
            )
        else:
            p_set = extract_p(original, debiased, corpus, cfg.pooling, cfg.frames, args.space)
        write_pvectors(out.path("pvectors.jsonl"), p_set)
        _pvector_stats(out, p_set, pool_corpus(corpus, cfg.pooling, cfg.frames))
        return {"p_avg_norm": float(np.linalg.norm(p_set.p_avg)), "variant": p_set.variant}
    if not args.pvectors:
        raise UsageError(f"pvector {action} needs --pvectors FILE")
    try:
        p_set = read_pvectors(args.pvectors)
    except OSError as exc:
        raise UsageError(f"cannot read {args.pvectors}: {exc.strerror}") from None
    if action == "stats":
        corpus_path = args.corpus or cfg.ai
        if corpus_path is None:
            raise UsageError("pvector stats needs --corpus")
        return _pvector_stats(out, p_set, pool_corpus(load_corpus(corpus_path), cfg.pooling, cfg.frames))
    # apply
    real, ai, queries, rel = _load_inputs(cfg)
    params = _load_params(args.original) if args.original else ScorerParams.identity(real.dim)
    result = p_debias(
        params,
        p_set.p_avg,
        real,
        ai,
        queries,
        rel,
        cfg.derived_seed("pvector"),
        cfg.pooling,
        cfg.frames,
        target=args.target,
        sign=args.sign,
        ks=cfg.ks,
        n_seeds=cfg.seeds,
    )
    _write_evaluation(out, result.before, "before shift", prefix="before_")
    _write_evaluation(out, result.after, f"after shifting {args.target} embeddings", prefix="after_")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["metric", "before_normalized", "after_normalized", "delta"])
    for m in result.before.report.metrics:
        w.writerow([m, repr(result.before.report.normalized[m]), repr(result.after.report.normalized[m]), repr(result.delta[m])])
    w.writerow(
        ["MixR", repr(result.before.report.mixr["normalized"]), repr(result.after.report.mixr["normalized"]), repr(result.delta["MixR"])]
    )
    out.text("shift.csv", buf.getvalue())
    out.json("shift.json", {"target": args.target, "sign": args.sign, "delta": result.delta})
    return {"delta_mixr": result.delta["MixR"]}


def _pvector_stats(out: Outputs, p_set, raw) -> dict:
    stats = cluster_stats(p_set, raw)
    out.json("cluster.json", {"mean_pairwise_cos_p": stats.mean_pairwise_cos_p, "mean_pairwise_cos_h": stats.mean_pairwise_cos_h, "silhouette": stats.silhouette})
    vectors = np.vstack([p_set.p, [e.vector for e in raw]])
    labels = ["p"] * len(p_set) + ["h"] * len(raw)
    ids = [*p_set.ids, *(e.video_id for e in raw)]
    proj = pca_project_2d(vectors, labels)
    out.text("projection.csv", _projection_csv(ids, proj))
    out.text("projection.svg", scatter_plot(proj.points, "p vectors vs embeddings (PCA)"))
    return {"silhouette": stats.silhouette, "projection_warnings": proj.warnings}


def cmd_synth(cfg: RunConfig, args, out: Outputs) -> dict:
    scfg = SynthConfig(
        n_items=args.n if args.n is not None else cfg.get("n_items", 200, int),
        dim=args.dim if args.dim is not None else cfg.get("dim", 32, int),
        frames=cfg.get("synth_frames", 10, int),
        alpha=cfg.get("alpha", 0.5, float),
        beta=args.beta if args.beta is not None else cfg.get("beta", 0.5, float),
        gamma=cfg.get("gamma", 0.2, float),
        noise_sigma=cfg.get("noise_sigma", 6.0, float),
        seed=cfg.seed if args.raw_seed else cfg.derived_seed("synth"),
        drift=cfg.get("drift", 0.1, float),
        temporal_bias=cfg.get("temporal_bias", 0.7, float),
    )
    data = generate_synthetic(scfg)
    save_corpus(data.real, out.path("real.jsonl"))
    save_corpus(data.ai, out.path("ai.jsonl"))
    save_queries(data.queries, out.path("queries.jsonl"))
    save_relevance(data.rel, out.path("rel.jsonl"))
    out.json("bias_direction.json", {"b": data.bias_direction.tolist()})
    out.json("synth_config.json", scfg.as_dict())
    return {"n_items": scfg.n_items, "synth_seed": scfg.seed}


def _read_numbers(path) -> list[float]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_ttest(cfg: RunConfig, args, out: Outputs) -> dict:
    if args.a or args.b:
        if not (args.a and args.b):
            raise UsageError("ttest needs both --a and --b")
        a, b = _read_numbers(args.a), _read_numbers(args.b)
        source = "files"
    else:
        real, ai, queries, rel = _load_inputs(cfg)
        w = _load_params(args.params).w if args.params else None
        real_v = {e.video_id: e.vector for e in project(pool_corpus(real, cfg.pooling, cfg.frames), w)}
        ai_v = {e.video_id: e.vector for e in project(pool_corpus(ai, cfg.pooling, cfg.frames), w)}
        t_hat = [q.embedding / np.linalg.norm(q.embedding) for q in queries]
        a = [float(real_v[rel[q.id]] @ t) for q, t in zip(queries, t_hat)]
        b = [float(ai_v[rel[q.id]] @ t) for q, t in zip(queries, t_hat)]
        source = "text-real vs text-ai similarities"
    res = paired_t_test(a, b)
    out.json(
        "ttest.json",
        {
            "groups": source,
            "n": len(a),
            "t_statistic": res.t_statistic if np.isfinite(res.t_statistic) else str(res.t_statistic),
            "degrees_of_freedom": res.degrees_of_freedom,
            "p_value": res.p_value,
            "mean_a": float(np.mean(a)),
            "mean_b": float(np.mean(b)),
        },
    )
    return {"p_value": res.p_value}


def _read_grid(path: Path) -> np.ndarray:
    try:
        grid = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"{path}: cannot read flow grid ({exc})") from None
    return grid


def cmd_flow(cfg: RunConfig, args, out: Outputs) -> dict:
    bins = args.bins if args.bins is not None else cfg.get("bins", 16, int)
    if args.real_flows or args.ai_flows:
        if not (args.real_flows and args.ai_flows):
            raise UsageError("flow needs both --real-flows and --ai-flows directories")
        real_files = sorted(Path(args.real_flows).glob("*.csv"))
        ai_files = sorted(Path(args.ai_flows).glob("*.csv"))
        if [f.name for f in real_files] != [f.name for f in ai_files]:
            raise UsageError("real and AI flow directories must hold the same file names")
        names = [f.stem for f in real_files]
        real = [_read_grid(f) for f in real_files]
        ai = [_read_grid(f) for f in ai_files]
    else:
        n = args.pairs if args.pairs is not None else cfg.get("pairs", 100, int)
        real, ai = synthetic_flows(n, cfg.get("spread_ratio", 4.0, float), seed=cfg.derived_seed("flow"))
        names = [f"pair{i:04d}" for i in range(n)]
    summary = flow_summary(real, ai, bins)
    out.json("flow.json", summary.__dict__ | {"bins": bins})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pair", "entropy_real", "entropy_ai"])
    for name, r, a in zip(names, real, ai):
        w.writerow([name, repr(flow_entropy(r, bins)), repr(flow_entropy(a, bins))])
    out.text("flow_entropies.csv", buf.getvalue())
    return {"higher_count_real": summary.higher_count_real, "higher_count_ai": summary.higher_count_ai}


def cmd_report(cfg: RunConfig, args, out: Outputs) -> dict:
    if not args.inputs:
        raise UsageError("report needs one or more deltas.json files")
    reports = {}
    for path in args.inputs:
        try:
            reports[str(path)] = DeltaReport.from_json(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
        except (KeyError, json.JSONDecodeError) as exc:
            raise UsageError(f"{path}: not a delta report ({exc})") from None
    metrics = next(iter(reports.values())).metrics
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", *(f"normalized_{m}" for m in metrics), "normalized_MixR"])
    md = ["| run | " + " | ".join(metrics) + " | MixR |", "|---" * (len(metrics) + 2) + "|"]
    for name, r in reports.items():
        w.writerow([name, *(repr(r.normalized[m]) for m in metrics), repr(r.mixr["normalized"])])
        md.append(f"| {name} | " + " | ".join(f"{r.normalized[m]:.2f}" for m in metrics) + f" | {r.mixr['normalized']:.2f} |")
    out.text("report.csv", buf.getvalue())
    out.text("report.md", "\n".join(md) + "\n")
    series = {name: [*(r.normalized[m] for m in metrics), r.mixr["normalized"]] for name, r in reports.items()}
    out.text("report.svg", bar_chart([*metrics, "MixR"], series, "Normalized deltas"))
    return {"runs": len(reports)}


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value config file; flags override it")
    p.add_argument("--seed", type=int, help="base seed (default 42)")
    p.add_argument("--pool", dest="pooling", help="uniform-mean | positional-ramp | single-frame[:k]")
    p.add_argument("--frames", type=int, help="resample every video to this many frames")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seeds", type=int, help="interleaving draws averaged for Location delta")
    p.add_argument("--ks", help="comma-separated recall cutoffs, e.g. 1,5,10")
    p.add_argument("--workers", type=int, help="threads for ranking")
    p.add_argument("--real", help="real corpus JSONL")
    p.add_argument("--ai", help="AI corpus JSONL")
    p.add_argument("--queries", help="queries JSONL")
    p.add_argument("--rel", help="relevance JSONL")


def _train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float, help="share of training videos swapped for AI counterparts")
    p.add_argument("--lambda", dest="lam", type=float, help="debias hinge weight")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="srcbias", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="bias deltas for a real/AI corpus pair")
    _common(p)
    p.add_argument("--params", help="scorer params JSON to project embeddings with")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("interleave", help="simulate interleaving of two standalone rank files")
    _common(p)
    p.add_argument("--real-ranks", required=True)
    p.add_argument("--ai-ranks", required=True)
    p.add_argument("--size", type=int, help="per-corpus size N (default: largest rank)")
    p.set_defaults(func=cmd_interleave)

    p = sub.add_parser("ablate", help="temporal / frame ablations")
    _common(p)
    p.add_argument("--mode", help="shuffle-all | shuffle-ai | reverse | single-frame[:k]")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("train-debias", help="train the linear scorer with the debias objective")
    _common(p)
    _train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("pvector", help="extract, apply or summarize debiasing shift vectors")
    p.add_argument("action", choices=("extract", "apply", "stats"))
    _common(p)
    p.add_argument("--original", help="original scorer params (default: identity)")
    p.add_argument("--debiased", help="debiased scorer params")
    p.add_argument("--corpus", help="corpus to extract from (default: the AI corpus)")
    p.add_argument("--pvectors", help="pvectors.jsonl for apply/stats")
    p.add_argument("--space", choices=("projected", "raw"), default="projected")
    p.add_argument("--variant", choices=("standard", "random"), default="standard")
    p.add_argument("--target", choices=("real", "ai"), default="real")
    p.add_argument("--sign", type=float, default=1.0)
    p.set_defaults(func=cmd_pvector)

    p = sub.add_parser("synth", help="synthetic corpora")
    p.add_argument("action", choices=("gen",))
    _common(p)
    p.add_argument("--n", type=int, help="items per corpus")
    p.add_argument("--dim", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--raw-seed", action="store_true", help="use --seed directly instead of the derived seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ttest", help="paired t-test (files or text-real vs text-AI similarities)")
    _common(p)
    p.add_argument("--a", help="file of numbers (group A)")
    p.add_argument("--b", help="file of numbers (group B)")
    p.add_argument("--params", help="scorer params JSON to project embeddings with")
    p.set_defaults(func=cmd_ttest)

    p = sub.add_parser("flow", help="optical-flow entropy comparison")
    _common(p)
    p.add_argument("--real-flows", help="directory of real flow-magnitude CSV grids")
    p.add_argument("--ai-flows", help="directory of AI flow-magnitude CSV grids (same names)")
    p.add_argument("--pairs", type=int, help="synthetic pairs when no directories are given")
    p.add_argument("--bins", type=int)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("report", help="tabulate several deltas.json files")
    _common(p)
    p.add_argument("inputs", nargs="*")
    p.set_defaults(func=cmd_report)
    return parser


_CONFIG_FLAGS = ("real", "ai", "queries", "rel", "pooling", "frames", "seed", "ks", "out", "seeds", "workers")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    command = args.command + (f" {args.action}" if hasattr(args, "action") else "")
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = RunConfig.build(file_values, {k: getattr(args, k, None) for k in _CONFIG_FLAGS})
        out = Outputs(Path(cfg.out))
        summary = args.func(cfg, args, out)
        manifest = {
            "command": command,
            "version": __version__,
            "seed": cfg.seed,
            "derived_seed": cfg.derived_seed(args.command),
            "config": cfg.as_dict(),
            "outputs": sorted(out.files),
            "summary": summary,
        }
        out.json("manifest.json", manifest)
    except (ConfigError, StoreError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
