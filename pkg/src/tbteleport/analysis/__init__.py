from .fringe import FitError, FringeFit, FringeFitter, fit_sinusoid, visibility
from .hom import HomDipFitter, HomScan, hom_scan
from .rate import Rate, event_rate, fringe_max_rate
from .report import RunReport
from .tomography import (PartialDataError, StokesTomography, TomographyResult, pool_counts,
                         raw_counts, teleport_tomography)

__all__ = [
    "FitError", "FringeFit", "FringeFitter", "HomDipFitter", "HomScan", "PartialDataError",
    "Rate", "RunReport", "StokesTomography", "TomographyResult", "event_rate", "fit_sinusoid",
    "fringe_max_rate", "hom_scan", "pool_counts", "raw_counts", "teleport_tomography",
    "visibility",
]
