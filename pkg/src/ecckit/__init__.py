"""Exact and differentiable Euler characteristic curves on dense grids.

The exact path computes integer curves of 2D/3D scalar fields through
per-pixel coefficients and a single histogram sweep; a brute-force cell
counting oracle provides the ground truth it is tested against; the soft
path smooths the threshold indicator into a sigmoid with an optional
learnable direction and supplies analytic gradients for field values,
thresholds and direction.
"""

from .bench import (
    BenchReport,
    BenchRow,
    ChecksumMismatch,
    curve_checksum,
    run_benchmark,
    write_report_csv,
    write_report_json,
)
from .coefficients import (
    COEFF_RANGE,
    CoefficientGrid,
    compute_coefficients,
    read_coefficients,
    vertex_order,
    write_coefficients,
)
from .grid import (
    CorruptionError,
    EulerCurve,
    FormatError,
    ScalarGrid,
    ThresholdSet,
    flatten_index,
    read_curve,
    read_grid,
    unflatten_index,
    uniform_thresholds,
    write_curve,
    write_grid,
)
from .hard import (
    Chunked,
    FullSweep,
    HistogramBins,
    accumulate_histogram,
    bin_index,
    compute_ecc,
    merge_histograms,
    parse_strategy,
)
from .oracle import CellCounts, count_cells, oracle_ecc, sublevel_mask
from .soft import (
    SoftEccParams,
    SoftGradients,
    effective_field,
    gradient_check,
    pixel_coordinates,
    reparametrize_direction,
    reparametrize_direction_jvp,
    soft_ecc,
    soft_ecc_backward,
)
from .synthetic import SyntheticSpec, generate_grid

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "BenchRow",
    "CellCounts",
    "ChecksumMismatch",
    "Chunked",
    "COEFF_RANGE",
    "CoefficientGrid",
    "CorruptionError",
    "EulerCurve",
    "FormatError",
    "FullSweep",
    "HistogramBins",
    "ScalarGrid",
    "SoftEccParams",
    "SoftGradients",
    "SyntheticSpec",
    "ThresholdSet",
    "accumulate_histogram",
    "bin_index",
    "compute_coefficients",
    "compute_ecc",
    "count_cells",
    "curve_checksum",
    "effective_field",
    "flatten_index",
    "generate_grid",
    "gradient_check",
    "merge_histograms",
    "oracle_ecc",
    "parse_strategy",
    "pixel_coordinates",
    "read_coefficients",
    "read_curve",
    "read_grid",
    "reparametrize_direction",
    "reparametrize_direction_jvp",
    "run_benchmark",
    "soft_ecc",
    "soft_ecc_backward",
    "sublevel_mask",
    "unflatten_index",
    "uniform_thresholds",
    "vertex_order",
    "write_coefficients",
    "write_curve",
    "write_grid",
    "write_report_csv",
    "write_report_json",
]
