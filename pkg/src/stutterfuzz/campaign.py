"""Campaign orchestration: corpus in, divergence report out.

For every benign recording the loop picks a seed from that recording's
pool, extends it with one sampled mutation, renders the result, runs all
recognizers, scores the transcripts, and feeds the scored seed back to
the pool. Recognized text that drifts too far from the benign ground
truth is recorded as a suspicious failure together with the chain that
produced it.

Report bytes are a pure function of config plus corpus when only mock
recognizers are involved; anything wall-clock flavored goes to a sidecar
file instead of the report.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from random import Random
from typing import Sequence

import numpy as np

from . import __version__
from ._kernels import backend as kernel_backend
from .alignment import AlignedTranscript, align
from .analysis import (
    AlignmentCounts,
    Embedder,
    HttpEmbedder,
    ResilientEmbedder,
    TrigramEmbedder,
    cosine_similarity,
    count_errors,
    mean_pairwise_cosine,
    mer,
    wer,
    wil,
)
from .audio import Waveform, load_wav, save_wav
from .errors import ConfigError, EmptyCorpusError, NotApplicableError, StutterfuzzError
from .lexicon import PronunciationDict
from .mutation import (
    ALL_KINDS,
    MAX_CHAIN_LEN,
    MutatorKind,
    TestCase,
    build_test_case,
    chain_to_json,
    plan_mutation,
)
from .selection import POOL_CAP, ScoredSeed, SeedPool
from .sut import (
    GroundTruthRegistry,
    SutDescriptor,
    SutExecutor,
    TranscriptionResult,
    build_adapter,
)
from .textnorm import normalize_text

log = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

DEFAULT_BUDGET = 50
DEFAULT_THRESHOLD = 0.8
MAX_REDRAWS = 10
DEFAULT_MAX_WORKERS = 8

TRIAGE_LABELS = (
    "unlabeled",
    "word_injection",
    "incorrect_word",
    "word_repetition",
    "word_omission",
    "syllable_repetition",
    "false_positive",
)


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class CampaignConfig:
    rng_seed: int
    suts: tuple[SutDescriptor, ...]
    budget_per_seed: int = DEFAULT_BUDGET
    similarity_threshold: float = DEFAULT_THRESHOLD
    pool_cap: int = POOL_CAP
    max_chain_len: int = MAX_CHAIN_LEN
    mutator_weights: dict[MutatorKind, float] = field(
        default_factory=lambda: {k: 1.0 for k in ALL_KINDS}
    )
    workers: int | None = None
    embedding: dict = field(default_factory=dict)
    # Optional path fields so one config file can drive the CLI end to
    # end. They never enter the report: reports stay path-free.
    corpus_dir: str | None = None
    dictionary_path: str | None = None
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if len(self.suts) < 2:
            raise ConfigError(
                f"need at least 2 recognizers to compare, got {len(self.suts)}"
            )
        names = [s.name for s in self.suts]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate recognizer names in {names}")
        if self.budget_per_seed < 1:
            raise ConfigError(f"budget_per_seed must be positive, got {self.budget_per_seed}")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ConfigError(
                f"similarity_threshold must lie in (0, 1], got {self.similarity_threshold}"
            )
        if self.pool_cap < 1:
            raise ConfigError(f"pool_cap must be positive, got {self.pool_cap}")
        if not 1 <= self.max_chain_len <= MAX_CHAIN_LEN:
            raise ConfigError(
                f"max_chain_len must lie in [1, {MAX_CHAIN_LEN}], got {self.max_chain_len}"
            )
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")
        weights = self.mutator_weights
        if set(weights) - set(ALL_KINDS):
            raise ConfigError(f"unknown mutator in weights: {sorted(weights)}")
        if any(v < 0 for v in weights.values()) or sum(weights.values()) <= 0:
            raise ConfigError("mutator weights must be non-negative and sum above zero")

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        if not isinstance(doc, dict):
            raise ConfigError(f"config must be a mapping, got {type(doc).__name__}")
        known = {
            "rng_seed",
            "suts",
            "budget_per_seed",
            "similarity_threshold",
            "theta",
            "pool_cap",
            "max_chain_len",
            "mutator_weights",
            "workers",
            "embedding",
            "corpus_dir",
            "dictionary_path",
            "output_dir",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "theta" in doc and "similarity_threshold" in doc:
            raise ConfigError("give either theta or similarity_threshold, not both")
        threshold = doc.get("theta", doc.get("similarity_threshold", DEFAULT_THRESHOLD))
        try:
            suts = tuple(_sut_from_dict(s) for s in doc["suts"])
            weights_doc = doc.get("mutator_weights")
            if weights_doc is None:
                weights = {k: 1.0 for k in ALL_KINDS}
            else:
                weights = {
                    MutatorKind(str(name).replace("-", "_")): float(v)
                    for name, v in weights_doc.items()
                }
            return cls(
                rng_seed=int(doc["rng_seed"]),
                suts=suts,
                budget_per_seed=int(doc.get("budget_per_seed", DEFAULT_BUDGET)),
                similarity_threshold=float(threshold),
                pool_cap=int(doc.get("pool_cap", POOL_CAP)),
                max_chain_len=int(doc.get("max_chain_len", MAX_CHAIN_LEN)),
                mutator_weights=weights,
                workers=None if doc.get("workers") is None else int(doc["workers"]),
                embedding=dict(doc.get("embedding", {})),
                corpus_dir=_opt_str(doc.get("corpus_dir")),
                dictionary_path=_opt_str(doc.get("dictionary_path")),
                output_dir=_opt_str(doc.get("output_dir")),
            )
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config: {exc}") from exc

    def echo(self) -> dict:
        """Config as it goes into the report; no paths, fully resolved."""
        return {
            "rng_seed": self.rng_seed,
            "budget_per_seed": self.budget_per_seed,
            "similarity_threshold": self.similarity_threshold,
            "pool_cap": self.pool_cap,
            "max_chain_len": self.max_chain_len,
            "mutator_weights": {k.value: v for k, v in sorted(self.mutator_weights.items())},
            "suts": [{"name": s.name, "kind": s.kind} for s in self.suts],
        }


def _opt_str(value: object) -> str | None:
    return None if value is None else str(value)


def _sut_from_dict(s: dict) -> SutDescriptor:
    known = {"name", "kind", "endpoint", "command", "options", "timeout_ms", "retries"}
    unknown = set(s) - known
    if unknown:
        raise ConfigError(f"unknown recognizer keys: {sorted(unknown)}")
    kwargs = {}
    if "timeout_ms" in s:
        kwargs["timeout_ms"] = int(s["timeout_ms"])
    if "retries" in s:
        kwargs["retries"] = int(s["retries"])
    return SutDescriptor(
        name=str(s["name"]),
        kind=str(s["kind"]).replace("-", "_"),
        endpoint=_opt_str(s.get("endpoint")),
        command=_opt_str(s.get("command")),
        options=dict(s.get("options", {})),
        **kwargs,
    )


def build_embedder(config: CampaignConfig) -> Embedder:
    provider = str(config.embedding.get("provider", "trigram")).replace("-", "_")
    if provider == "trigram":
        return TrigramEmbedder(int(config.embedding.get("dim", TrigramEmbedder().dim)))
    if provider == "http":
        try:
            endpoint = config.embedding["endpoint"]
        except KeyError:
            raise ConfigError("http embedding provider needs an endpoint") from None
        primary = HttpEmbedder(
            endpoint, timeout_s=float(config.embedding.get("timeout_s", 5.0))
        )
        return ResilientEmbedder(primary)
    raise ConfigError(f"unknown embedding provider {provider!r}")


# ---------------------------------------------------------------- corpus

@dataclass(frozen=True)
class BenignSeed:
    ref: str
    wav_path: Path
    transcript: str


def load_corpus(directory: Path | str) -> list[BenignSeed]:
    """Read `<name>.wav` plus `<name>.txt` pairs, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise EmptyCorpusError(f"corpus directory {directory} does not exist")
    seeds = []
    for wav_path in sorted(directory.glob("*.wav")):
        txt_path = wav_path.with_suffix(".txt")
        if not txt_path.is_file():
            raise ConfigError(f"{wav_path.name} has no matching transcript {txt_path.name}")
        transcript = txt_path.read_text(encoding="utf-8").strip()
        seeds.append(BenignSeed(ref=wav_path.stem, wav_path=wav_path, transcript=transcript))
    if not seeds:
        raise EmptyCorpusError(f"no .wav recordings under {directory}")
    return seeds


# ---------------------------------------------------------------- scoring

def result_similarity(
    result: TranscriptionResult, truth_vec: np.ndarray, embedder: Embedder
) -> float:
    """Similarity of one recognizer answer to ground truth; errors score 0."""
    if not result.ok:
        return 0.0
    return cosine_similarity(embedder.embed(result.text), truth_vec)


def derived_rng(rng_seed: int, benign_ref: str) -> Random:
    """Independent stream per benign recording, stable across runs."""
    digest = hashlib.sha256(f"{rng_seed}:{benign_ref}".encode("utf-8")).digest()
    return Random(int.from_bytes(digest, "big"))


# ---------------------------------------------------------------- failures

@dataclass(frozen=True)
class SuspiciousFailure:
    """One recognizer drifting past the threshold on one test case."""

    test_case_id: str
    benign_ref: str
    sut_name: str
    similarity: float
    recognized_text: str
    ground_truth_text: str
    expected_text: str
    chain: dict
    error_detail: str | None = None
    triage_label: str = "unlabeled"

    def __post_init__(self) -> None:
        if self.triage_label not in TRIAGE_LABELS:
            raise ConfigError(f"unknown triage label {self.triage_label!r}")

    def to_dict(self) -> dict:
        return {
            "test_case_id": self.test_case_id,
            "benign_ref": self.benign_ref,
            "sut_name": self.sut_name,
            "similarity": self.similarity,
            "recognized_text": self.recognized_text,
            "ground_truth_text": self.ground_truth_text,
            "expected_text": self.expected_text,
            "chain": self.chain,
            "error_detail": self.error_detail,
            "triage_label": self.triage_label,
        }


def detect_failure(
    case: TestCase,
    ground_truth_text: str,
    results: Sequence[TranscriptionResult],
    threshold: float,
    embedder: Embedder,
    similarities: Sequence[float] | None = None,
) -> list[SuspiciousFailure]:
    """Flag every recognizer whose answer fell below `threshold`.

    Similarity is cosine between recognized text and the benign ground
    truth; error results count as similarity zero, so a dead recognizer
    is always suspicious rather than silently ignored.
    """
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"threshold must lie in (0, 1], got {threshold}")
    if similarities is None:
        truth_vec = embedder.embed(ground_truth_text)
        similarities = [result_similarity(r, truth_vec, embedder) for r in results]
    failures = []
    for result, sim in zip(results, similarities):
        if sim < threshold:
            failures.append(
                SuspiciousFailure(
                    test_case_id=case.test_case_id,
                    benign_ref=case.chain.benign_ref,
                    sut_name=result.sut_name,
                    similarity=sim,
                    recognized_text=result.text,
                    ground_truth_text=ground_truth_text,
                    expected_text=case.expected_text,
                    chain=chain_to_json(case.chain),
                    error_detail=result.error_detail,
                )
            )
    return failures


# ---------------------------------------------------------------- outcomes

@dataclass(frozen=True)
class CaseOutcome:
    test_case_id: str
    benign_ref: str
    chain_json: dict
    chain_len: int
    expected_text: str
    admitted: bool
    f1: float
    f2: float
    results: tuple[TranscriptionResult, ...]
    similarities: tuple[float, ...]
    failures: tuple[SuspiciousFailure, ...]
    replay_doc: dict
    rendered: Waveform

    @property
    def failing_suts(self) -> tuple[str, ...]:
        return tuple(f.sut_name for f in self.failures)


@dataclass(frozen=True)
class SeedOutcome:
    benign_ref: str
    transcript: str
    executed: int
    skipped: int
    pool: SeedPool | None
    cases: tuple[CaseOutcome, ...]
    error: str | None = None


def run_benign_seed(
    config: CampaignConfig,
    benign: Waveform,
    aligned: AlignedTranscript,
    transcript: str,
    executor: SutExecutor,
    embedder: Embedder,
) -> SeedOutcome:
    """Drive the full budget for one benign recording."""
    ref = aligned.audio_ref
    rng = derived_rng(config.rng_seed, ref)
    truth_vec = embedder.embed(transcript)

    benign_results = executor.execute(benign)
    benign_texts = [r.text for r in benign_results]
    sentinel_f1 = mean_pairwise_cosine([embedder.embed(t) for t in benign_texts])
    pool = SeedPool.create(ref, sentinel_f1, cap=config.pool_cap)

    kinds = list(ALL_KINDS)
    weights = [config.mutator_weights.get(k, 0.0) for k in kinds]

    cases: list[CaseOutcome] = []
    skipped = 0
    for _ in range(config.budget_per_seed):
        planned = None
        for _ in range(MAX_REDRAWS):
            seed = pool.select(rng)
            kind = rng.choices(kinds, weights=weights)[0]
            if len(seed.chain) >= config.max_chain_len:
                continue
            try:
                record = plan_mutation(aligned, kind, rng)
            except NotApplicableError:
                continue
            planned = (seed, record)
            break
        if planned is None:
            skipped += 1
            continue
        seed, record = planned
        chain = seed.chain.extended(record)
        case = build_test_case(benign, aligned, chain)
        results = tuple(executor.execute(case.rendered))
        f1 = mean_pairwise_cosine([embedder.embed(r.text) for r in results])
        f2 = -cosine_similarity(embedder.embed(case.expected_text), truth_vec)
        admitted = pool.update(
            ScoredSeed(
                seed_id=case.test_case_id,
                benign_ref=ref,
                chain=chain,
                f1=f1,
                f2=f2,
            )
        )
        sims = tuple(result_similarity(r, truth_vec, embedder) for r in results)
        failures = tuple(
            detect_failure(
                case,
                transcript,
                results,
                config.similarity_threshold,
                embedder,
                similarities=sims,
            )
        )
        cases.append(
            CaseOutcome(
                test_case_id=case.test_case_id,
                benign_ref=ref,
                chain_json=chain_to_json(chain),
                chain_len=len(chain),
                expected_text=case.expected_text,
                admitted=admitted,
                f1=f1,
                f2=f2,
                results=results,
                similarities=sims,
                failures=failures,
                replay_doc=chain_to_json(chain, aligned),
                rendered=case.rendered,
            )
        )
    return SeedOutcome(
        benign_ref=ref,
        transcript=transcript,
        executed=len(cases),
        skipped=skipped,
        pool=pool,
        cases=tuple(cases),
    )


# ---------------------------------------------------------------- campaign

def run_campaign(
    config: CampaignConfig,
    corpus: Sequence[BenignSeed],
    dictionary: PronunciationDict,
    out_dir: Path | str,
) -> dict:
    """Run the whole corpus and write every artifact under `out_dir`.

    Returns the report document that was written to report.json. A
    recording that fails to load or align is skipped and annotated in
    the report rather than sinking the campaign.
    """
    if not corpus:
        raise EmptyCorpusError("corpus is empty")
    started = time.monotonic()
    started_at = datetime.now(timezone.utc).isoformat()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    registry = GroundTruthRegistry()
    prepared: list[tuple[BenignSeed, Waveform, AlignedTranscript]] = []
    broken: dict[str, SeedOutcome] = {}
    for seed in corpus:
        try:
            w = load_wav(seed.wav_path)
            aligned = align(w, seed.transcript, dictionary, audio_ref=seed.ref)
            registry.register(seed.ref, w, seed.transcript, alignment=aligned)
        except (StutterfuzzError, OSError) as exc:
            log.warning("skipping %s: %s", seed.ref, exc)
            broken[seed.ref] = SeedOutcome(
                benign_ref=seed.ref,
                transcript=normalize_text(seed.transcript),
                executed=0,
                skipped=0,
                pool=None,
                cases=(),
                error=str(exc),
            )
            continue
        prepared.append((seed, w, aligned))
    if not prepared:
        raise EmptyCorpusError("no corpus entry survived loading and alignment")

    executor = SutExecutor([build_adapter(d, registry) for d in config.suts])
    embedder = build_embedder(config)

    workers = config.workers or min(len(prepared), DEFAULT_MAX_WORKERS)
    outcomes: dict[str, SeedOutcome] = dict(broken)
    with ThreadPoolExecutor(max_workers=workers) as tp:
        futures = {
            tp.submit(
                run_benign_seed,
                config,
                w,
                aligned,
                normalize_text(seed.transcript),
                executor,
                embedder,
            ): seed.ref
            for seed, w, aligned in prepared
        }
        for future, ref in futures.items():
            outcomes[ref] = future.result()

    ordered = [outcomes[seed.ref] for seed in corpus]
    report = _build_report(config, ordered)
    _write_artifacts(out_dir, ordered, report)

    meta = {
        "started_at": started_at,
        "elapsed_s": round(time.monotonic() - started, 3),
        "kernel_backend": kernel_backend(),
        "package_version": __version__,
        "python": platform.python_version(),
    }
    _dump_json(out_dir / "run_meta.json", meta)
    return report


def _build_report(config: CampaignConfig, outcomes: Sequence[SeedOutcome]) -> dict:
    sut_names = [s.name for s in config.suts]
    per_seed = []
    failures = []
    counts = {name: AlignmentCounts() for name in sut_names}
    sims: dict[str, list[float]] = {name: [] for name in sut_names}
    latencies: dict[str, list[float]] = {name: [] for name in sut_names}
    errors = {name: 0 for name in sut_names}
    failure_totals = {name: 0 for name in sut_names}
    total_cases = 0

    for outcome in outcomes:
        seed_failures = 0
        for case in outcome.cases:
            total_cases += 1
            for result, sim in zip(case.results, case.similarities):
                name = result.sut_name
                counts[name] = counts[name] + count_errors(case.expected_text, result.text)
                sims[name].append(sim)
                latencies[name].append(result.latency_ms)
                if not result.ok:
                    errors[name] += 1
            for failure in case.failures:
                seed_failures += 1
                failure_totals[failure.sut_name] += 1
                failures.append(failure.to_dict())
        row = {
            "benign_ref": outcome.benign_ref,
            "transcript": outcome.transcript,
            "cases": outcome.executed,
            "skipped": outcome.skipped,
            "frontier_size": 0 if outcome.pool is None else len(outcome.pool),
            "suspicious": seed_failures,
        }
        if outcome.error is not None:
            row["error"] = outcome.error
        per_seed.append(row)

    metrics = {}
    for name in sut_names:
        c = counts[name]
        metrics[name] = {
            "cases": total_cases,
            "suspicious": failure_totals[name],
            "errors": errors[name],
            "mean_similarity": _mean(sims[name]),
            "mean_latency_ms": _mean(latencies[name]),
            "wer": wer(c) if c.n else None,
            "mer": mer(c) if (c.n or c.p) else None,
            "wil": wil(c) if c.n else None,
        }

    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "config": config.echo(),
        "per_seed": per_seed,
        "failures": failures,
        "metrics": metrics,
        "totals": {
            "benign_seeds": len(outcomes),
            "cases": total_cases,
            "skipped": sum(o.skipped for o in outcomes),
            "suspicious": len(failures),
        },
    }


def _mean(values: Sequence[float]) -> float | None:
    if not values:
        return None
    return sum(values) / len(values)


def relabel_failure(
    report: dict, test_case_id: str, label: str, sut_name: str | None = None
) -> int:
    """Set triage_label on matching failure rows; returns rows touched."""
    if label not in TRIAGE_LABELS:
        raise ConfigError(
            f"unknown triage label {label!r}; expected one of {', '.join(TRIAGE_LABELS)}"
        )
    touched = 0
    for row in report.get("failures", []):
        if row.get("test_case_id") != test_case_id:
            continue
        if sut_name is not None and row.get("sut_name") != sut_name:
            continue
        row["triage_label"] = label
        touched += 1
    return touched


def write_report_files(out_dir: Path | str, report: dict) -> None:
    """Write report.json plus the flat failures.csv beside it."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _dump_json(out_dir / "report.json", report)
    with open(out_dir / "failures.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["test_case_id", "sut", "similarity", "truth", "hypothesis", "label"])
        for row in report.get("failures", []):
            writer.writerow(
                [
                    row["test_case_id"],
                    row["sut_name"],
                    f"{row['similarity']:.6f}",
                    row["ground_truth_text"],
                    row["recognized_text"],
                    row["triage_label"],
                ]
            )


def _write_artifacts(
    out_dir: Path, outcomes: Sequence[SeedOutcome], report: dict
) -> None:
    write_report_files(out_dir, report)

    pools_dir = out_dir / "pools"
    pools_dir.mkdir(exist_ok=True)
    for outcome in outcomes:
        if outcome.pool is not None:
            outcome.pool.dump(pools_dir / f"{outcome.benign_ref}.json")

    failing_cases = {}
    for outcome in outcomes:
        for case in outcome.cases:
            if case.failures:
                failing_cases[case.test_case_id] = case
    if failing_cases:
        audio_dir = out_dir / "audio"
        chains_dir = out_dir / "chains"
        audio_dir.mkdir(exist_ok=True)
        chains_dir.mkdir(exist_ok=True)
        for case_id, case in sorted(failing_cases.items()):
            save_wav(case.rendered, audio_dir / f"{case_id}.wav")
            _dump_json(chains_dir / f"{case_id}.json", case.replay_doc)

    with open(out_dir / "cases.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            [
                "test_case_id",
                "benign_ref",
                "chain_len",
                "f1",
                "f2",
                "admitted",
                "failing_suts",
                "expected_text",
            ]
        )
        for outcome in outcomes:
            for case in outcome.cases:
                writer.writerow(
                    [
                        case.test_case_id,
                        case.benign_ref,
                        case.chain_len,
                        f"{case.f1:.6f}",
                        f"{case.f2:.6f}",
                        int(case.admitted),
                        " ".join(case.failing_suts),
                        case.expected_text,
                    ]
                )


def _dump_json(path: Path, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------- scoring runs

def score_corpus(
    config: CampaignConfig,
    corpus: Sequence[BenignSeed],
    registry: GroundTruthRegistry,
) -> dict:
    """Transcribe a labeled corpus with every recognizer and pool the rates.

    The corpus transcripts are the expected text; mock recognizers trace
    ancestry through `registry`, which the caller fills with the benign
    recordings the corpus was derived from.
    """
    if not corpus:
        raise EmptyCorpusError("corpus is empty")
    executor = SutExecutor([build_adapter(d, registry) for d in config.suts])
    counts = {name: AlignmentCounts() for name in executor.names}
    errors = {name: 0 for name in executor.names}
    rows = []
    for seed in corpus:
        w = load_wav(seed.wav_path)
        expected = normalize_text(seed.transcript)
        for result in executor.execute(w):
            counts[result.sut_name] = counts[result.sut_name] + count_errors(
                expected, result.text
            )
            if not result.ok:
                errors[result.sut_name] += 1
            rows.append(
                {
                    "ref": seed.ref,
                    "sut": result.sut_name,
                    "expected": expected,
                    "recognized": result.text,
                    "error_detail": result.error_detail,
                }
            )
    metrics = {}
    for name in executor.names:
        c = counts[name]
        metrics[name] = {
            "wer": wer(c) if c.n else None,
            "mer": mer(c) if (c.n or c.p) else None,
            "wil": wil(c) if c.n else None,
            "errors": errors[name],
            "counts": {
                "hits": c.hits,
                "substitutions": c.substitutions,
                "deletions": c.deletions,
                "insertions": c.insertions,
            },
        }
    return {"per_sut": metrics, "utterances": rows}
