"""Command line front end.

Exit codes: 0 on success, 1 when the toolkit rejects the inputs, 2 when
the arguments themselves are malformed (argparse's own convention).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path
from random import Random

import yaml

from .alignment import align, to_alignment_json
from .audio import load_wav, save_wav
from .campaign import (
    TRIAGE_LABELS,
    CampaignConfig,
    load_corpus,
    relabel_failure,
    run_campaign,
    score_corpus,
    write_report_files,
)
from .errors import (
    ConfigError,
    InvalidChainError,
    NotApplicableError,
    StutterfuzzError,
)
from .lexicon import load_dictionary
from .mutation import (
    MutationChain,
    MutatorKind,
    build_test_case,
    chain_from_json,
    chain_to_json,
    plan_mutation,
    render,
)
from .sut import GroundTruthRegistry

log = logging.getLogger(__name__)

_KIND_CHOICES = [k.value for k in MutatorKind]


def _kind_arg(value: str) -> str:
    # lets users type sound-repetition as well as sound_repetition
    return value.replace("-", "_")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stutterfuzz",
        description="Metamorphic robustness testing of speech recognizers "
        "against synthetic dysfluencies.",
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (-v, -vv)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_align = sub.add_parser("align", help="segment audio and time its transcript")
    p_align.add_argument("--audio", required=True, type=Path)
    p_align.add_argument("--transcript", help="transcript text")
    p_align.add_argument("--transcript-file", type=Path, help="file holding the transcript")
    p_align.add_argument("--dict", required=True, type=Path, dest="dict_path")
    p_align.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    p_align.set_defaults(func=_cmd_align)

    p_mut = sub.add_parser("mutate", help="extend a mutation chain and render it")
    p_mut.add_argument("--audio", required=True, type=Path, help="benign recording")
    p_mut.add_argument("--transcript", help="transcript text")
    p_mut.add_argument("--transcript-file", type=Path)
    p_mut.add_argument("--dict", required=True, type=Path, dest="dict_path")
    p_mut.add_argument("--kind", required=True, type=_kind_arg, choices=_KIND_CHOICES)
    p_mut.add_argument("--seed", type=int, default=0, help="sampling seed")
    p_mut.add_argument(
        "--chain-in", type=Path, help="existing chain JSON to extend by one record"
    )
    p_mut.add_argument("--out", required=True, type=Path, help="rendered WAV path")
    p_mut.add_argument("--chain-out", type=Path, help="chain JSON path")
    p_mut.set_defaults(func=_cmd_mutate)

    p_run = sub.add_parser("run", help="run a full campaign over a benign corpus")
    p_run.add_argument("--config", required=True, type=Path)
    p_run.add_argument(
        "--corpus", type=Path, help="benign corpus dir (default: corpus_dir from config)"
    )
    p_run.add_argument(
        "--dict",
        type=Path,
        dest="dict_path",
        help="pronunciation dictionary (default: dictionary_path from config)",
    )
    p_run.add_argument(
        "--out", type=Path, help="artifact dir (default: output_dir from config)"
    )
    p_run.add_argument("--workers", type=int, help="override worker count")
    p_run.set_defaults(func=_cmd_run)

    p_score = sub.add_parser("score", help="pooled error rates over a labeled corpus")
    p_score.add_argument("--config", required=True, type=Path)
    p_score.add_argument("--corpus", required=True, type=Path)
    p_score.add_argument("--dict", type=Path, dest="dict_path")
    p_score.add_argument(
        "--register",
        type=Path,
        help="benign corpus the mocks treat as ground truth (default: --corpus)",
    )
    p_score.add_argument("--out", type=Path, help="also write the rates as CSV here")
    p_score.set_defaults(func=_cmd_score)

    p_label = sub.add_parser("label", help="triage a suspicious failure in a report")
    p_label.add_argument(
        "--report", required=True, type=Path, help="report.json or the dir holding it"
    )
    p_label.add_argument("--case", required=True, help="test_case_id to label")
    p_label.add_argument("--label", required=True, type=_kind_arg, choices=TRIAGE_LABELS)
    p_label.add_argument("--sut", help="only rows for this recognizer")
    p_label.set_defaults(func=_cmd_label)

    p_replay = sub.add_parser("replay", help="re-render a chain from its JSON")
    p_replay.add_argument("--chain", required=True, type=Path)
    p_replay.add_argument("--benign", required=True, type=Path)
    p_replay.add_argument("--out", type=Path, help="write the rendered WAV here")
    p_replay.add_argument(
        "--verify", type=Path, help="compare against this WAV byte for byte"
    )
    p_replay.set_defaults(func=_cmd_replay)

    return parser


# ---------------------------------------------------------------- helpers

def _read_transcript(args) -> str:
    if args.transcript is not None and args.transcript_file is not None:
        raise ConfigError("give --transcript or --transcript-file, not both")
    if args.transcript is not None:
        return args.transcript
    if args.transcript_file is not None:
        return args.transcript_file.read_text(encoding="utf-8").strip()
    raise ConfigError("a transcript is required (--transcript or --transcript-file)")


def _load_config(path: Path) -> CampaignConfig:
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return CampaignConfig.from_dict(doc)


def _emit_json(doc: dict, out: Path | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _resolve(cli_value: Path | None, config_value: str | None, what: str) -> Path:
    if cli_value is not None:
        return cli_value
    if config_value is not None:
        return Path(config_value)
    raise ConfigError(f"{what} given neither on the command line nor in the config")


# ---------------------------------------------------------------- commands

def _cmd_align(args) -> int:
    w = load_wav(args.audio)
    dictionary = load_dictionary(args.dict_path)
    aligned = align(w, _read_transcript(args), dictionary, audio_ref=args.audio.stem)
    doc = {
        "audio_ref": aligned.audio_ref,
        "transcript": aligned.transcript_text,
        "alignment": to_alignment_json(aligned),
    }
    _emit_json(doc, args.out)
    return 0


def _cmd_mutate(args) -> int:
    w = load_wav(args.audio)
    dictionary = load_dictionary(args.dict_path)
    aligned = align(w, _read_transcript(args), dictionary, audio_ref=args.audio.stem)
    if args.chain_in is not None:
        doc = json.loads(args.chain_in.read_text(encoding="utf-8"))
        chain, _ = chain_from_json(doc)
        if chain.benign_ref != args.audio.stem:
            raise InvalidChainError(
                f"chain belongs to {chain.benign_ref!r}, audio is {args.audio.stem!r}"
            )
    else:
        chain = MutationChain(benign_ref=args.audio.stem)
    rng = Random(args.seed)
    try:
        record = plan_mutation(aligned, MutatorKind(args.kind), rng)
    except NotApplicableError as exc:
        raise NotApplicableError(
            f"{args.kind} does not apply to this recording: {exc}"
        ) from exc
    case = build_test_case(w, aligned, chain.extended(record))
    save_wav(case.rendered, args.out)
    if args.chain_out is not None:
        _emit_json(chain_to_json(case.chain, aligned), args.chain_out)
    print(f"test_case_id={case.test_case_id}")
    print(f"expected_text={case.expected_text}")
    return 0


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.workers is not None:
        config = dataclasses.replace(config, workers=args.workers)
    corpus = load_corpus(_resolve(args.corpus, config.corpus_dir, "corpus dir"))
    dictionary = load_dictionary(
        _resolve(args.dict_path, config.dictionary_path, "dictionary")
    )
    out_dir = _resolve(args.out, config.output_dir, "output dir")
    report = run_campaign(config, corpus, dictionary, out_dir)
    totals = report["totals"]
    print(
        f"seeds={totals['benign_seeds']} cases={totals['cases']} "
        f"skipped={totals['skipped']} suspicious={totals['suspicious']} "
        f"report={out_dir / 'report.json'}"
    )
    return 0


def _cmd_score(args) -> int:
    config = _load_config(args.config)
    corpus = load_corpus(args.corpus)
    dictionary = load_dictionary(args.dict_path) if args.dict_path else None
    register_from = load_corpus(args.register) if args.register else corpus
    registry = GroundTruthRegistry()
    for seed in register_from:
        w = load_wav(seed.wav_path)
        aligned = None
        if dictionary is not None:
            aligned = align(w, seed.transcript, dictionary, audio_ref=seed.ref)
        registry.register(
            seed.ref, w, seed.transcript, alignment=aligned, dictionary=dictionary
        )
    result = score_corpus(config, corpus, registry)
    _print_score_table(result["per_sut"])
    if args.out is not None:
        _write_score_csv(result["per_sut"], args.out)
    return 0


def _fmt_rate(value: float | None) -> str:
    return "-" if value is None else f"{value:.4f}"


def _print_score_table(per_sut: dict) -> None:
    width = max([len("sut")] + [len(name) for name in per_sut])
    print(f"{'sut':<{width}}  {'wer':>8}  {'mer':>8}  {'wil':>8}  {'errors':>6}")
    for name, row in per_sut.items():
        print(
            f"{name:<{width}}  {_fmt_rate(row['wer']):>8}  {_fmt_rate(row['mer']):>8}  "
            f"{_fmt_rate(row['wil']):>8}  {row['errors']:>6}"
        )


def _write_score_csv(per_sut: dict, out: Path) -> None:
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "sut",
                "wer",
                "mer",
                "wil",
                "errors",
                "hits",
                "substitutions",
                "deletions",
                "insertions",
            ]
        )
        for name, row in per_sut.items():
            c = row["counts"]
            writer.writerow(
                [
                    name,
                    "" if row["wer"] is None else f"{row['wer']:.6f}",
                    "" if row["mer"] is None else f"{row['mer']:.6f}",
                    "" if row["wil"] is None else f"{row['wil']:.6f}",
                    row["errors"],
                    c["hits"],
                    c["substitutions"],
                    c["deletions"],
                    c["insertions"],
                ]
            )


def _cmd_label(args) -> int:
    report_path = args.report
    if report_path.is_dir():
        report_path = report_path / "report.json"
    try:
        report = json.loads(report_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"cannot parse {report_path}: {exc}") from exc
    touched = relabel_failure(report, args.case, args.label, sut_name=args.sut)
    if touched == 0:
        raise ConfigError(
            f"no failure row for case {args.case!r}"
            + (f" and recognizer {args.sut!r}" if args.sut else "")
        )
    write_report_files(report_path.parent, report)
    print(f"labeled {touched} row(s) as {args.label}")
    return 0


def _cmd_replay(args) -> int:
    doc = json.loads(args.chain.read_text(encoding="utf-8"))
    chain, aligned = chain_from_json(doc)
    if aligned is None:
        raise InvalidChainError(
            "chain JSON carries no alignment; re-export it with one embedded"
        )
    benign = load_wav(args.benign)
    rendered = render(benign, aligned, chain)
    if args.out is not None:
        save_wav(rendered, args.out)
    if args.verify is not None:
        reference = load_wav(args.verify)
        if rendered == reference:
            print("verify: identical")
        else:
            raise InvalidChainError(
                f"replay of {args.chain} does not match {args.verify}"
            )
    if args.out is None and args.verify is None:
        print(f"rendered {rendered.duration_ms} ms at {rendered.sample_rate_hz} Hz")
    return 0


# ---------------------------------------------------------------- entry

def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except StutterfuzzError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
