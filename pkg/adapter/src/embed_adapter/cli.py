"""Command-line front end: ``extract`` and ``logprobs`` subcommands.

Both read a JSONL file with one ``{"text": ...}`` object per line and
write one of the portable output files.  Exit codes: 0 success, 1 bad
input data or model failure, 2 usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .config import ExtractionConfig
from .errors import AdapterError, ConfigError
from .extraction import dump_logprobs, extract
from .files import read_texts_jsonl

USAGE_EXIT = 2
DATA_EXIT = 1


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("texts", help="JSONL file with a {'text': ...} object per line")
    parser.add_argument("--model", required=True, help="model name or local path")
    parser.add_argument("--out", required=True, help="output file path")
    parser.add_argument("--max-length", type=int, default=1024,
                        help="token cap per text (default 1024)")
    parser.add_argument("--batch-size", type=int, default=8,
                        help="texts per forward pass (default 8)")
    parser.add_argument("--device", default="cpu",
                        help="torch device selector (default cpu)")


def _config_from(args: argparse.Namespace, pooling: str = "last") -> ExtractionConfig:
    return ExtractionConfig(
        model_name=args.model,
        max_length=args.max_length,
        batch_size=args.batch_size,
        device=args.device,
        pooling=pooling,
    )


def _cmd_extract(args: argparse.Namespace) -> int:
    texts = read_texts_jsonl(args.texts)
    rows = extract(texts, _config_from(args, args.pool), args.out)
    print(f"wrote {rows.shape[0]} x {rows.shape[1]} embeddings to {args.out}")
    return 0


def _cmd_logprobs(args: argparse.Namespace) -> int:
    texts = read_texts_jsonl(args.texts)
    records = dump_logprobs(texts, _config_from(args), args.out)
    print(f"wrote {len(records)} log-prob rows to {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="embed-adapter",
        description="Turn raw text into embedding and log-prob files.",
    )
    parser.add_argument("--version", action="version",
                        version=f"embed-adapter {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    extract_parser = subparsers.add_parser(
        "extract", help="write one hidden-state embedding per text"
    )
    _add_common_flags(extract_parser)
    extract_parser.add_argument("--pool", choices=("last", "mean"), default="last",
                                help="vector taken from the final layer (default last)")
    extract_parser.set_defaults(handler=_cmd_extract)

    logprob_parser = subparsers.add_parser(
        "logprobs", help="write total log-likelihood and token count per text"
    )
    _add_common_flags(logprob_parser)
    logprob_parser.set_defaults(handler=_cmd_logprobs)
    return parser


def cli_main(argv: list[str] | None = None) -> int:
    logging.basicConfig(format="%(name)s: %(levelname)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return USAGE_EXIT
    except (AdapterError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return DATA_EXIT


def entrypoint() -> None:
    raise SystemExit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
