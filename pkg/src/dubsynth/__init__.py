"""Cross-lingual, noise-robust prosody transfer for speech synthesis."""

__version__ = "0.1.0"
