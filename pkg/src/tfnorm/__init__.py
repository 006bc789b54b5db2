"""Verbosity- and topicality-aware term frequency normalization for language-model retrieval."""

__version__ = "0.1.0"
