"""Text analytics for software project artifacts.

Subpackages cover corpus ingestion, clone detection, n-gram models and
language categorization, LDA topic modelling, POS-based extraction,
qualitative-coding analytics, and deterministic report visualizations.
"""

__version__ = "0.1.0"
