"""Categorical data-mining pipeline for speech-therapy outcome records."""

__version__ = "0.1.0"
