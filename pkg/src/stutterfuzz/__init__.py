"""Stutter-injection metamorphic testing for speech recognition systems.

Generates dysfluent variants of benign recordings by waveform mutation,
runs them through recognizers under test, and reports transcriptions that
drift from the benign ground truth.
"""

__version__ = "0.1.0"
