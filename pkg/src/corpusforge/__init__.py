"""corpusforge: speech corpus engineering and WER evaluation toolkit."""

__version__ = "0.1.0"
