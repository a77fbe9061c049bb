"""Extraction bridge: Hugging Face causal LMs -> mia-stats/v1 records."""

__version__ = "0.1.0"

from mia_extract.extract import (  # noqa: F401
    CausalLMScorer,
    ExtractOptions,
    ExtractReport,
    extract,
)
