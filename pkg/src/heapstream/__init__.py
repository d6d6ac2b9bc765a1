"""Streaming heap sorting of random sequences, the matching interacting
particle system on strips of the half-plane, and Monte Carlo estimation of
the logarithmic growth constant of the tree count."""
from ._version import __version__
from .offspring import (
    OffspringDistribution, dirac, explicit, geometric, parse_spec, sample, sample_array,
)
from .poisson_field import (
    Atom, AtomField, dump_atoms_csv, field_from_sequence, load_atoms_csv,
    restrict, sample_field, scale,
)
from .heap_sorter import (
    AliveSet, HeapForest, HeapSorter, Placement, SortTrace,
    random_sequence, run, run_random, tree_count,
)
from .hammersley import GraphicalRep, HLine, VLine, WindowCounts, render_svg, simulate
from .oracle import ValidationReport, check_forest_valid, lds_length, min_heap_partition
from .estimator import (
    CEstimate, ConvergenceSeries, DecorrelationReport, DiscreteCEstimates,
    ScalingCheckReport, StationarityReport, StripEstimates,
    decorrelation_report, estimate_c_discrete, estimate_r_inf,
    scaling_check, stationarity_report, trajectory,
)

__all__ = [
    "__version__",
    "OffspringDistribution", "dirac", "geometric", "explicit", "parse_spec",
    "sample", "sample_array",
    "Atom", "AtomField", "sample_field", "restrict", "scale",
    "dump_atoms_csv", "load_atoms_csv", "field_from_sequence",
    "AliveSet", "HeapForest", "HeapSorter", "Placement", "SortTrace",
    "run", "run_random", "random_sequence", "tree_count",
    "GraphicalRep", "HLine", "VLine", "WindowCounts", "simulate", "render_svg",
    "ValidationReport", "check_forest_valid", "lds_length", "min_heap_partition",
    "CEstimate", "ConvergenceSeries", "DiscreteCEstimates", "StripEstimates",
    "StationarityReport", "DecorrelationReport", "ScalingCheckReport",
    "trajectory", "estimate_c_discrete", "estimate_r_inf",
    "stationarity_report", "decorrelation_report", "scaling_check",
]
