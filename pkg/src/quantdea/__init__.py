"""Efficiency scores for Kolm-Pollack quantized, tropical, convex and FDH technologies."""

from .dataset import PAPER_EXAMPLE, Dataset, Firm, PointSet, load_dataset, parse_csv, swap_negate, to_csv
from .distance import (
    Orientation,
    ScoreRecord,
    TropicalVariant,
    beta_tables,
    distance_convex,
    distance_fdh,
    distance_quantized_lp,
    distance_tropical,
    farrell,
    score_all,
)
from .errors import DataError, NumericalFailure, PreconditionError, QuantDEAError
from .kp_algebra import Alpha, kp_add, kp_combine, kp_mean, simplex_weights_valid
from .technology import Family, Point, Returns, TechSpec, contains

__all__ = [
    "PAPER_EXAMPLE",
    "Dataset",
    "Firm",
    "PointSet",
    "load_dataset",
    "parse_csv",
    "swap_negate",
    "to_csv",
    "Orientation",
    "ScoreRecord",
    "TropicalVariant",
    "beta_tables",
    "distance_convex",
    "distance_fdh",
    "distance_quantized_lp",
    "distance_tropical",
    "farrell",
    "score_all",
    "DataError",
    "NumericalFailure",
    "PreconditionError",
    "QuantDEAError",
    "Alpha",
    "kp_add",
    "kp_combine",
    "kp_mean",
    "simplex_weights_valid",
    "Family",
    "Point",
    "Returns",
    "TechSpec",
    "contains",
]

__version__ = "0.1.0"
