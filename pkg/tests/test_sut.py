import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from fixtures_audio import RATE
from stutterfuzz.audio import Waveform, ms_to_samples
from stutterfuzz.errors import ConfigError, InvalidParamsError
from stutterfuzz.mutation import MutationChain, MutationRecord, MutatorKind, render
from stutterfuzz.sut import (
    FragileAdapter,
    GroundTruthRegistry,
    HttpAdapter,
    OracleAdapter,
    SubprocessAdapter,
    SutDescriptor,
    SutExecutor,
    TranscriptionResult,
    _emit,
    build_adapter,
    error_result,
    mock_fragile,
    mock_oracle,
    transcribe,
)


def _chain(ref, *records):
    return MutationChain(ref, tuple(records))


# ---------------------------------------------------------------- descriptors

def test_descriptor_defaults():
    d = SutDescriptor(name="x", kind="mock_oracle")
    assert (d.timeout_ms, d.retries, d.options, d.endpoint, d.command) == (
        30_000,
        2,
        {},
        None,
        None,
    )


def test_descriptor_validation():
    with pytest.raises(ConfigError):
        SutDescriptor(name="", kind="http")
    with pytest.raises(ConfigError):
        SutDescriptor(name="x", kind="http", timeout_ms=0)
    with pytest.raises(ConfigError):
        SutDescriptor(name="x", kind="http", retries=-1)


def test_result_status():
    ok = TranscriptionResult("x", "hello")
    assert ok.ok and ok.error_detail is None
    err = error_result("x", "boom", latency_ms=12.5)
    assert not err.ok and err.text == "" and err.error_detail == "boom"
    with pytest.raises(InvalidParamsError):
        TranscriptionResult("x", "hello", status="maybe")


def test_mock_descriptor_factories():
    assert mock_oracle().kind == "mock_oracle"
    assert mock_fragile("frag").name == "frag"


# ---------------------------------------------------------------- registry

def test_registry_normalizes_transcripts(fixture_waves):
    reg = GroundTruthRegistry()
    w, _ = fixture_waves["pisa"]
    reg.register("pisa", w, "He Plays,  FOR pisa!")
    assert reg.transcript_for("pisa") == "he plays for pisa"
    assert "pisa" in reg and reg.refs() == ("pisa",)


def test_registry_rejects_duplicates_and_empty(fixture_waves):
    reg = GroundTruthRegistry()
    w, text = fixture_waves["pisa"]
    reg.register("pisa", w, text)
    with pytest.raises(InvalidParamsError):
        reg.register("pisa", w, text)
    with pytest.raises(InvalidParamsError):
        reg.register("blank", fixture_waves["sons"][0], "!!!")


def test_registry_rejects_opening_window_twins(fixture_waves):
    reg = GroundTruthRegistry()
    w, text = fixture_waves["pisa"]
    reg.register("pisa", w, text)
    with pytest.raises(InvalidParamsError, match="identical"):
        reg.register("copy", w, "different words")


def test_identify_benign_and_mutants(registry, fixture_waves, alignments):
    w, _ = fixture_waves["convert"]
    assert registry.identify(w) == "convert"
    rec = MutationRecord(MutatorKind.WORD_REPETITION, 1, copies=2)
    mutated = render(w, alignments["convert"], _chain("convert", rec))
    assert registry.identify(mutated) == "convert"


def test_identify_unknown_audio(registry):
    stranger = Waveform(np.full(4000, 17, dtype=np.int16), RATE)
    assert registry.identify(stranger) is None


def test_identify_prefix_tie_is_ambiguous():
    base = (np.arange(1000) % 199).astype(np.int16) * 30
    left = base.copy()
    right = base.copy()
    right[100] += 5
    reg = GroundTruthRegistry()
    reg.register("left", Waveform(left, RATE), "left words")
    reg.register("right", Waveform(right, RATE), "right words")
    probe = base.copy()
    probe[100] += 9  # equally far from both
    assert reg.identify(Waveform(probe, RATE)) is None


def test_token_durations_from_alignment(registry, alignments):
    a = alignments["sons"]
    assert registry.token_durations_for("sons") == tuple(
        w.end_ms - w.start_ms for w in a.words
    )


def test_token_durations_fallback_by_syllable_weight(fixture_waves, dictionary):
    reg = GroundTruthRegistry()
    w, text = fixture_waves["sons"]
    reg.register("sons", w, text, dictionary=dictionary)
    durations = reg.token_durations_for("sons")
    assert len(durations) == 5 and all(d >= 1 for d in durations)
    # "together" carries three syllables, so it gets the longest share
    assert durations[0] > durations[1]


# ---------------------------------------------------------------- emission

def test_emit_clean_read():
    assert _emit(["a", "b"], [300, 300], [300, 300]) == ["a", "b"]


def test_emit_split_burst_repeats_token():
    assert _emit(["a", "b"], [300, 300], [150, 150, 300]) == ["a", "a", "b"]


def test_emit_long_burst_repeats_proportionally():
    assert _emit(["a", "b"], [300, 300], [880, 300]) == ["a", "a", "a", "b"]


def test_emit_trailing_bursts_stick_to_last_token():
    assert _emit(["a"], [300], [300, 300]) == ["a", "a"]


def test_emit_short_burst_still_emits():
    assert _emit(["a", "b"], [300, 300], [40, 260, 300]) == ["a", "a", "b"]


def test_emit_zero_duration_guard():
    assert _emit(["a"], [0], [10]) == ["a"] * 10


# ---------------------------------------------------------------- mock SUTs

def test_oracle_answers_ground_truth(registry, fixture_waves):
    oracle = OracleAdapter("oracle", registry)
    assert oracle.name == "oracle"
    res = oracle.transcribe(fixture_waves["pisa"][0])
    assert res.ok and res.text == "he plays for pisa"


def test_oracle_answers_ancestor_truth_for_mutants(registry, fixture_waves, alignments):
    rec = MutationRecord(MutatorKind.WORD_REPETITION, 0, copies=4)
    mutated = render(
        fixture_waves["sons"][0], alignments["sons"], _chain("sons", rec)
    )
    res = OracleAdapter("oracle", registry).transcribe(mutated)
    assert res.ok and res.text == "together they had five sons"


def test_oracle_errors_on_stranger(registry):
    res = OracleAdapter("oracle", registry).transcribe(
        Waveform(np.full(4000, 17, dtype=np.int16), RATE)
    )
    assert not res.ok and "ancestor" in res.error_detail


def test_fragile_reads_benign_cleanly(registry, fixture_waves):
    frag = FragileAdapter("frag", registry)
    for ref in ("pisa", "convert", "sons"):
        res = frag.transcribe(fixture_waves[ref][0])
        assert res.ok and res.text == registry.transcript_for(ref)


def test_fragile_hears_block_as_echo(registry, fixture_waves, alignments):
    rec = MutationRecord(MutatorKind.BLOCK, 3, boundary_index=0, pause_ms=120)
    mutated = render(fixture_waves["pisa"][0], alignments["pisa"], _chain("pisa", rec))
    res = FragileAdapter("frag", registry).transcribe(mutated)
    assert res.text == "he plays for pisa pisa"


def test_fragile_hears_interjection_as_doubled_word(registry, fixture_waves, alignments):
    rec = MutationRecord(
        MutatorKind.INTERJECTION, 3, syllable_index=0, slots=(2,), filler="uh"
    )
    mutated = render(
        fixture_waves["convert"][0], alignments["convert"], _chain("convert", rec)
    )
    res = FragileAdapter("frag", registry).transcribe(mutated)
    assert res.text == "we can convert convert a type"


def test_fragile_hears_word_repetition(registry, fixture_waves, alignments):
    rec = MutationRecord(MutatorKind.WORD_REPETITION, 1, copies=3)
    mutated = render(
        fixture_waves["convert"][0], alignments["convert"], _chain("convert", rec)
    )
    res = FragileAdapter("frag", registry).transcribe(mutated)
    assert res.text == "we can can can convert a type"


def test_fragile_hears_prolongation_as_stutter(registry, fixture_waves, alignments):
    rec = MutationRecord(MutatorKind.PROLONGATION, 3, syllable_index=0, factor=4)
    mutated = render(
        fixture_waves["convert"][0], alignments["convert"], _chain("convert", rec)
    )
    res = FragileAdapter("frag", registry).transcribe(mutated)
    assert res.text == "we can convert a a a a type"


def test_fragile_errors_without_ancestor_or_speech(registry, fixture_waves):
    frag = FragileAdapter("frag", registry)
    stranger = Waveform(np.full(4000, 17, dtype=np.int16), RATE)
    assert not frag.transcribe(stranger).ok
    # silence matching a known prefix: identify fails first, so still an error
    silent = Waveform(np.zeros(8000, dtype=np.int16), RATE)
    assert not frag.transcribe(silent).ok


# ---------------------------------------------------------------- http

class _AsrHandler(BaseHTTPRequestHandler):
    fail_first = 0
    status_code = 200
    text = "Hello There"
    seen: list = None  # set per subclass

    def do_POST(self):
        cls = type(self)
        length = int(self.headers.get("Content-Length", 0))
        body = self.rfile.read(length)
        cls.seen.append(body[:4])
        if len(cls.seen) <= cls.fail_first:
            self.send_error(500)
            return
        if cls.status_code != 200:
            self.send_error(cls.status_code)
            return
        payload = json.dumps({"text": cls.text}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


@pytest.fixture()
def asr_server():
    servers = []

    def start(**attrs):
        attrs.setdefault("seen", [])
        handler = type("Handler", (_AsrHandler,), attrs)
        srv = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        threading.Thread(target=srv.serve_forever, daemon=True).start()
        servers.append(srv)
        return handler, f"http://127.0.0.1:{srv.server_address[1]}"

    yield start
    for srv in servers:
        srv.shutdown()
        srv.server_close()


def test_http_adapter_posts_wav_and_normalizes(asr_server, fixture_waves):
    handler, url = asr_server()
    res = HttpAdapter("remote", url).transcribe(fixture_waves["pisa"][0])
    assert res.ok and res.text == "hello there"
    assert res.latency_ms > 0
    assert handler.seen == [b"RIFF"]


def test_http_adapter_retries_through_server_errors(asr_server, fixture_waves):
    handler, url = asr_server(fail_first=2)
    res = HttpAdapter("remote", url, attempts=3).transcribe(fixture_waves["pisa"][0])
    assert res.ok and len(handler.seen) == 3


def test_http_adapter_gives_up_after_all_attempts(asr_server, fixture_waves):
    handler, url = asr_server(fail_first=99)
    desc = SutDescriptor(name="remote", kind="http", endpoint=url, retries=1)
    adapter = build_adapter(desc, GroundTruthRegistry())
    res = adapter.transcribe(fixture_waves["pisa"][0])
    assert not res.ok and "server error 500" in res.error_detail
    assert len(handler.seen) == 2  # retries + 1


def test_http_adapter_dead_endpoint_is_an_error_result(fixture_waves):
    adapter = HttpAdapter("remote", "http://127.0.0.1:1", timeout_s=0.2, attempts=1)
    res = adapter.transcribe(fixture_waves["pisa"][0])
    assert not res.ok and res.error_detail


# ---------------------------------------------------------------- subprocess

@pytest.fixture(scope="module")
def echo_script(tmp_path_factory):
    path = tmp_path_factory.mktemp("bin") / "fake_asr.py"
    path.write_text(
        "import sys\n"
        "header = open(sys.argv[1], 'rb').read(4)\n"
        "print('Saw Real Audio' if header == b'RIFF' else 'saw junk')\n"
    )
    return path


def test_subprocess_adapter_happy_path(echo_script, fixture_waves):
    adapter = SubprocessAdapter("local", f"{sys.executable} {echo_script} {{audio}}")
    res = adapter.transcribe(fixture_waves["pisa"][0])
    assert res.ok and res.text == "saw real audio"
    assert res.latency_ms > 0


def test_subprocess_adapter_requires_audio_placeholder():
    with pytest.raises(ConfigError, match="audio"):
        SubprocessAdapter("local", f"{sys.executable} -c pass")


def test_subprocess_adapter_nonzero_exit(tmp_path, fixture_waves):
    script = tmp_path / "broken.py"
    script.write_text("import sys\nsys.stderr.write('boom')\nsys.exit(3)\n")
    adapter = SubprocessAdapter("local", f"{sys.executable} {script} {{audio}}")
    res = adapter.transcribe(fixture_waves["pisa"][0])
    assert not res.ok and res.error_detail == "boom"


def test_subprocess_adapter_timeout(tmp_path, fixture_waves):
    script = tmp_path / "slow.py"
    script.write_text("import time, sys\n_ = sys.argv[1]\ntime.sleep(5)\n")
    adapter = SubprocessAdapter(
        "local", f"{sys.executable} {script} {{audio}}", timeout_s=0.3
    )
    res = adapter.transcribe(fixture_waves["pisa"][0])
    assert not res.ok and "timed out" in res.error_detail


# ---------------------------------------------------------------- wiring

def test_build_adapter_covers_every_kind(registry):
    assert isinstance(build_adapter(mock_oracle(), registry), OracleAdapter)
    assert isinstance(build_adapter(mock_fragile(), registry), FragileAdapter)
    with pytest.raises(ConfigError, match="endpoint"):
        build_adapter(SutDescriptor(name="h", kind="http"), registry)
    with pytest.raises(ConfigError, match="command"):
        build_adapter(SutDescriptor(name="s", kind="subprocess"), registry)
    with pytest.raises(ConfigError, match="unknown"):
        build_adapter(SutDescriptor(name="x", kind="telepathy"), registry)


def test_transcribe_convenience(registry, fixture_waves):
    res = transcribe(mock_oracle(), fixture_waves["sons"][0], registry)
    assert res.ok and res.text == "together they had five sons"


def test_executor_preserves_adapter_order(registry, fixture_waves):
    ex = SutExecutor(
        [FragileAdapter("frag", registry), OracleAdapter("oracle", registry)]
    )
    assert ex.names == ("frag", "oracle")
    results = ex.execute(fixture_waves["pisa"][0])
    assert [r.sut_name for r in results] == ["frag", "oracle"]
    assert all(r.ok for r in results)


def test_executor_rejects_duplicate_names(registry):
    with pytest.raises(ConfigError, match="duplicate"):
        SutExecutor(
            [OracleAdapter("same", registry), FragileAdapter("same", registry)]
        )
