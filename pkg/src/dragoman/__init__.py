"""Corpus cleaning, selection, evaluation and prompt toolkit for MT data work."""

__version__ = "0.1.0"
