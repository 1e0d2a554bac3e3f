"""Command-line surface: one subcommand per pipeline.

Subcommands: ``mauve``, ``stats``, ``ppl``, ``frechet``, ``bt-fit``,
``correlate``.  Every run emits a JSON report document (stdout, or the
``--out`` path written atomically).  Exit codes: 0 success, 1 data
error, 2 usage error; failures print a one-line JSON error to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__, formats, frontier, ranking, textstats
from .errors import Error
from .formats import ReportDocument
from .quantize import EmbeddingSet

USAGE_EXIT = 2
DATA_EXIT = 1


class _UsageError(Exception):
    """Bad flag values; reported like argparse errors with exit code 2."""


def _check_usage(condition: bool, message: str) -> None:
    if not condition:
        raise _UsageError(message)


def _load_embeddings(path: str) -> EmbeddingSet:
    return formats.read_embeddings(path, formats.guess_embedding_format(path))


def _curve_rows(curve: frontier.DivergenceCurve) -> list[list[float]]:
    return [
        [float(lam), float(x), float(y)]
        for lam, x, y in zip(curve.grid, curve.xs, curve.ys)
    ]


def _emit(report: ReportDocument, out: str | None, summary: str) -> None:
    if out:
        formats.write_report(report, out)
        print(summary)
    else:
        sys.stdout.write(formats.report_to_json(report))


def _add_quantizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--num-buckets", type=int, default=500,
                        help="quantization buckets k (default 500)")
    parser.add_argument("--scaling-c", type=float, default=5.0,
                        help="divergence scaling constant (default 5)")
    parser.add_argument("--grid-size", type=int, default=25,
                        help="interior mixture-grid points (default 25)")
    parser.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    parser.add_argument("--pca-variance", type=float, default=0.9,
                        help="explained-variance fraction kept by PCA (default 0.9)")
    parser.add_argument("--no-anchors", action="store_true",
                        help="integrate over interior grid points only")
    parser.add_argument("--kmeans-restarts", type=int, default=5,
                        help="independent k-means restarts (default 5)")
    parser.add_argument("--kmeans-max-iters", type=int, default=500,
                        help="Lloyd iteration cap per restart (default 500)")


def _validate_quantizer_flags(args: argparse.Namespace) -> None:
    _check_usage(args.num_buckets >= 1, "--num-buckets must be at least 1")
    _check_usage(args.scaling_c > 0, "--scaling-c must be positive")
    _check_usage(args.grid_size >= 2, "--grid-size must be at least 2")
    _check_usage(0 < args.pca_variance <= 1, "--pca-variance must be in (0, 1]")
    _check_usage(args.kmeans_restarts >= 1, "--kmeans-restarts must be at least 1")
    _check_usage(args.kmeans_max_iters >= 1, "--kmeans-max-iters must be at least 1")


def _cmd_mauve(args: argparse.Namespace) -> int:
    _validate_quantizer_flags(args)
    started = time.perf_counter()
    p_embeds = _load_embeddings(args.p)
    q_embeds = _load_embeddings(args.q)
    report = frontier.mauve(
        p_embeds,
        q_embeds,
        k=args.num_buckets,
        c=args.scaling_c,
        n_grid=args.grid_size,
        seed=args.seed,
        anchors=not args.no_anchors,
        pca_variance=args.pca_variance,
        kmeans_max_iters=args.kmeans_max_iters,
        kmeans_restarts=args.kmeans_restarts,
    )
    if args.curve_csv:
        formats.write_curve_csv(report.curve, args.curve_csv)
    if args.curve_svg:
        formats.write_curve_svg(report.curve, args.curve_svg)
    document = ReportDocument(
        kind="mauve",
        config={
            "p": args.p,
            "q": args.q,
            "num_buckets": args.num_buckets,
            "scaling_c": float(args.scaling_c),
            "grid_size": args.grid_size,
            "seed": args.seed,
            "pca_variance": float(args.pca_variance),
            "anchors": not args.no_anchors,
            "kmeans_restarts": args.kmeans_restarts,
            "kmeans_max_iters": args.kmeans_max_iters,
        },
        results={
            "mauve": float(report.mauve),
            "kl_p_q": float(report.kl_p_q),
            "kl_q_p": float(report.kl_q_p),
            "js": float(report.js),
            "k": report.k,
            "n_p": report.n_p,
            "n_q": report.n_q,
            "pca_dim": int(report.model.centroids.shape[1]),
            "kmeans_inertia": float(report.model.inertia),
            "degenerate_projection": bool(report.model.degenerate),
            "curve": _curve_rows(report.curve),
        },
        timing={"seconds": time.perf_counter() - started},
    )
    _emit(document, args.out, f"mauve {report.mauve:.6f} (k={report.k}, c={args.scaling_c})")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    _check_usage(args.distinct_n >= 1, "--distinct-n must be at least 1")
    _check_usage(args.bleu_max_n >= 1, "--bleu-max-n must be at least 1")
    _check_usage(args.bleu_sample_size >= 1, "--bleu-sample-size must be at least 1")
    started = time.perf_counter()
    corpus = formats.read_token_corpus(args.corpus)
    results = {
        "n_sequences": len(corpus),
        "zipf_coefficient": float(textstats.zipf_coefficient(corpus)),
        "repetition_frequency": float(textstats.repetition_frequency(corpus)),
        "distinct_n": float(textstats.distinct_n(corpus, args.distinct_n)),
    }
    if len(corpus) >= 2:
        results["self_bleu"] = float(
            textstats.self_bleu(
                corpus,
                n_max=args.bleu_max_n,
                sample_size=min(args.bleu_sample_size, len(corpus)),
                seed=args.seed,
            )
        )
    document = ReportDocument(
        kind="stats",
        config={
            "corpus": args.corpus,
            "distinct_n": args.distinct_n,
            "bleu_max_n": args.bleu_max_n,
            "bleu_sample_size": args.bleu_sample_size,
            "seed": args.seed,
        },
        results=results,
        timing={"seconds": time.perf_counter() - started},
    )
    _emit(document, args.out, f"stats over {len(corpus)} sequences")
    return 0


def _cmd_ppl(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    model_records = formats.read_logprob_csv(args.model)
    human_records = formats.read_logprob_csv(args.human)
    model_ppl = textstats.perplexity(model_records)
    human_ppl = textstats.perplexity(human_records)
    document = ReportDocument(
        kind="ppl",
        config={"model": args.model, "human": args.human},
        results={
            "model_perplexity": float(model_ppl),
            "human_perplexity": float(human_ppl),
            "gap": float(abs(model_ppl - human_ppl)),
        },
        timing={"seconds": time.perf_counter() - started},
    )
    _emit(document, args.out, f"perplexity gap {abs(model_ppl - human_ppl):.6f}")
    return 0


def _cmd_frechet(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    p_embeds = _load_embeddings(args.p)
    q_embeds = _load_embeddings(args.q)
    value = frontier.frechet_distance(p_embeds, q_embeds)
    document = ReportDocument(
        kind="frechet",
        config={"p": args.p, "q": args.q},
        results={
            "frechet_distance": float(value),
            "n_p": p_embeds.n,
            "n_q": q_embeds.n,
        },
        timing={"seconds": time.perf_counter() - started},
    )
    _emit(document, args.out, f"frechet {value:.6f}")
    return 0


def _cmd_bt_fit(args: argparse.Namespace) -> int:
    _check_usage(args.max_iters >= 1, "--max-iters must be at least 1")
    _check_usage(args.tol > 0, "--tol must be positive")
    started = time.perf_counter()
    rows = formats.read_ratings_csv(args.ratings)
    dataset = ranking.preprocess_ratings(rows, seed=args.seed)
    scores = ranking.bt_fit(dataset, max_iters=args.max_iters, tol=args.tol)
    n = dataset.n_players
    win_prob = [
        [float(ranking.bt_win_prob(scores, i, j)) if i != j else 0.5 for j in range(n)]
        for i in range(n)
    ]
    document = ReportDocument(
        kind="bt-fit",
        config={
            "ratings": args.ratings,
            "seed": args.seed,
            "max_iters": args.max_iters,
            "tol": float(args.tol),
        },
        results={
            "players": list(dataset.player_names),
            "scores": [float(w) for w in scores.w],
            "win_prob": win_prob,
            "wins": dataset.wins.tolist(),
            "n_iters": scores.n_iters,
            "converged": bool(scores.converged),
            "nll": float(scores.nll_history[-1]),
        },
        timing={"seconds": time.perf_counter() - started},
    )
    ordered = np.argsort(-scores.w)
    top = ", ".join(f"{dataset.player_names[i]}={scores.w[i]:.2f}" for i in ordered)
    _emit(document, args.out, f"bt scores: {top}")
    return 0


def _cmd_correlate(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    names, column_a, column_b = formats.read_metric_columns(args.metrics)
    value = ranking.spearman(column_a, column_b)
    document = ReportDocument(
        kind="correlate",
        config={"metrics": args.metrics},
        results={
            "columns": list(names),
            "spearman": float(value),
            "n": int(column_a.size),
        },
        timing={"seconds": time.perf_counter() - started},
    )
    _emit(document, args.out, f"spearman {value:.6f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mauvelib",
        description="Compare text distributions via quantized divergence curves.",
    )
    parser.add_argument("--version", action="version", version=f"mauvelib {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    mauve_parser = subparsers.add_parser(
        "mauve", help="score two embedding files against each other"
    )
    mauve_parser.add_argument("--p", required=True, help="embedding file for side P")
    mauve_parser.add_argument("--q", required=True, help="embedding file for side Q")
    mauve_parser.add_argument("--out", help="write the JSON report here")
    mauve_parser.add_argument("--curve-csv", help="also export the curve as CSV")
    mauve_parser.add_argument("--curve-svg", help="also export the curve as SVG")
    _add_quantizer_flags(mauve_parser)
    mauve_parser.set_defaults(handler=_cmd_mauve)

    stats_parser = subparsers.add_parser(
        "stats", help="corpus statistics over a JSONL token corpus"
    )
    stats_parser.add_argument("corpus", help="JSONL file, one token-id array per line")
    stats_parser.add_argument("--out", help="write the JSON report here")
    stats_parser.add_argument("--distinct-n", type=int, default=4)
    stats_parser.add_argument("--bleu-max-n", type=int, default=4)
    stats_parser.add_argument("--bleu-sample-size", type=int, default=1000)
    stats_parser.add_argument("--seed", type=int, default=0)
    stats_parser.set_defaults(handler=_cmd_stats)

    ppl_parser = subparsers.add_parser(
        "ppl", help="perplexity gap between two log-prob CSV files"
    )
    ppl_parser.add_argument("--model", required=True, help="log-prob CSV for the model")
    ppl_parser.add_argument("--human", required=True, help="log-prob CSV for humans")
    ppl_parser.add_argument("--out", help="write the JSON report here")
    ppl_parser.set_defaults(handler=_cmd_ppl)

    frechet_parser = subparsers.add_parser(
        "frechet", help="Gaussian Fréchet distance between two embedding files"
    )
    frechet_parser.add_argument("--p", required=True)
    frechet_parser.add_argument("--q", required=True)
    frechet_parser.add_argument("--out", help="write the JSON report here")
    frechet_parser.set_defaults(handler=_cmd_frechet)

    bt_parser = subparsers.add_parser(
        "bt-fit", help="fit Bradley-Terry scores to a ratings CSV"
    )
    bt_parser.add_argument("ratings", help="CSV with player_a,player_b,rating rows")
    bt_parser.add_argument("--out", help="write the JSON report here")
    bt_parser.add_argument("--seed", type=int, default=0, help="tie-resolution seed")
    bt_parser.add_argument("--max-iters", type=int, default=10_000)
    bt_parser.add_argument("--tol", type=float, default=1e-10)
    bt_parser.set_defaults(handler=_cmd_bt_fit)

    correlate_parser = subparsers.add_parser(
        "correlate", help="Spearman correlation of two metric columns"
    )
    correlate_parser.add_argument("metrics", help="CSV with two numeric columns")
    correlate_parser.add_argument("--out", help="write the JSON report here")
    correlate_parser.set_defaults(handler=_cmd_correlate)
    return parser


def _print_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed its own usage message
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except _UsageError as exc:
        _print_error("UsageError", str(exc))
        return USAGE_EXIT
    except Error as exc:
        _print_error(type(exc).__name__, str(exc))
        return DATA_EXIT
    except OSError as exc:
        _print_error("OSError", str(exc))
        return DATA_EXIT


def entrypoint() -> None:
    raise SystemExit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
