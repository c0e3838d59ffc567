"""Exception types shared across the package."""


class StutterfuzzError(Exception):
    """Base class for all package-specific errors."""


# ---------------------------------------------------------------- audio

class UnsupportedFormatError(StutterfuzzError):
    """WAV file is valid but not PCM16 mono in the supported rate range."""


class CorruptFileError(StutterfuzzError):
    """File does not parse as a RIFF/WAVE container."""


class IoFailureError(StutterfuzzError):
    """Underlying OS-level read/write failure."""


class OutOfRangeError(StutterfuzzError):
    """A time index or segment lies outside the waveform."""


class InvalidParamsError(StutterfuzzError):
    """Operation parameters outside their documented domain."""


class RateMismatchError(StutterfuzzError):
    """Two waveforms with different sample rates were combined."""


class TooShortError(StutterfuzzError):
    """Waveform shorter than one analysis frame."""


# ---------------------------------------------------------------- lexicon

class EmptyDictionaryError(StutterfuzzError):
    """Parsed dictionary contains no valid entries."""


class OutOfVocabularyError(StutterfuzzError):
    """Word has no entry in the pronunciation dictionary."""


class NoVowelError(StutterfuzzError):
    """Pronunciation has no stressed-vowel nucleus to syllabify around."""


# ---------------------------------------------------------------- alignment

class NoSpeechError(StutterfuzzError):
    """No frame of the waveform exceeds the silence threshold."""


class UnsplittableAudioError(StutterfuzzError):
    """Voiced runs cannot be subdivided to reach the expected word count."""


class EmptyTranscriptError(StutterfuzzError):
    """Transcript normalizes to zero tokens."""


class InvalidAlignmentError(StutterfuzzError):
    """Alignment document violates timing or structure invariants."""


# ---------------------------------------------------------------- mutation

class NotApplicableError(StutterfuzzError):
    """The chosen mutator has no valid anchor in this transcript."""


class InvalidChainError(StutterfuzzError):
    """Mutation chain is malformed or inconsistent with its transcript."""


# ---------------------------------------------------------------- analysis

class TooFewResultsError(StutterfuzzError):
    """Pairwise agreement needs at least two transcription results."""


class DimensionMismatchError(StutterfuzzError):
    """Embedding vectors of different dimension or provider compared."""


class EmptyReferenceError(StutterfuzzError):
    """Word error rate is undefined against an empty reference."""


class ProviderUnavailableError(StutterfuzzError):
    """External embedding service did not answer."""


# ---------------------------------------------------------------- selection

class EmptyInputError(StutterfuzzError):
    """Frontier of an empty seed collection is undefined."""


class WrongPoolError(StutterfuzzError):
    """Seed offered to a pool built for a different benign recording."""


# ---------------------------------------------------------------- campaign

class ConfigError(StutterfuzzError):
    """Campaign configuration fails validation."""


class EmptyCorpusError(StutterfuzzError):
    """Benchmark corpus contains no items."""
