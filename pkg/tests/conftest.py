from pathlib import Path

import pytest

from fixtures_audio import FIXTURE_SENTENCES, build_fixture
from stutterfuzz.alignment import align
from stutterfuzz.analysis import TrigramEmbedder
from stutterfuzz.audio import save_wav
from stutterfuzz.lexicon import load_dictionary
from stutterfuzz.sut import GroundTruthRegistry

DICT_PATH = Path(__file__).parent / "data" / "fixture_dict.txt"


@pytest.fixture(scope="session")
def dictionary():
    return load_dictionary(DICT_PATH)


@pytest.fixture(scope="session")
def fixture_waves():
    """ref -> (Waveform, transcript) for every synthetic sentence."""
    return {ref: build_fixture(ref) for ref in FIXTURE_SENTENCES}


@pytest.fixture(scope="session")
def alignments(fixture_waves, dictionary):
    return {
        ref: align(w, text, dictionary, audio_ref=ref)
        for ref, (w, text) in fixture_waves.items()
    }


@pytest.fixture(scope="session")
def registry(fixture_waves, alignments):
    reg = GroundTruthRegistry()
    for ref, (w, text) in fixture_waves.items():
        reg.register(ref, w, text, alignment=alignments[ref])
    return reg


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory, fixture_waves):
    """On-disk benign corpus: <ref>.wav plus <ref>.txt per fixture."""
    directory = tmp_path_factory.mktemp("corpus")
    for ref, (w, text) in fixture_waves.items():
        save_wav(w, directory / f"{ref}.wav")
        (directory / f"{ref}.txt").write_text(text + "\n", encoding="utf-8")
    return directory


@pytest.fixture(scope="session")
def embedder():
    return TrigramEmbedder()
