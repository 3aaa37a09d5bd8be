"""Peak detection, edge similarity and Geary's C."""

from .geary import GearyReport, format_report, geary_c, geary_permutation_test, geary_report
from .peaks import PeakReport, find_peaks, snapshot
from .similarity import SimilarityMatrix, similarity_at

__all__ = [
    "GearyReport",
    "PeakReport",
    "SimilarityMatrix",
    "find_peaks",
    "format_report",
    "geary_c",
    "geary_permutation_test",
    "geary_report",
    "similarity_at",
    "snapshot",
]
