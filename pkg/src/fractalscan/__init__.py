"""Locality-preserving scan orders for 2D grids, plus a minimal
selective state-space scan engine and a four-direction scan block.

The public surface re-exports the main types and operations of each
module; see the module docstrings for details.
"""

from .block import (
    BlockConfig,
    PatchGrid,
    block_forward,
    block_opcount,
    deserialize,
    direction_orders,
    grid_from_json,
    grid_to_json,
    serialize,
)
from .curves import (
    BOUSTROPHEDON,
    CURVE_KINDS,
    DIRECTIONS,
    HILBERT,
    MAX_DEPTH,
    MORTON,
    RASTER,
    CurveSpec,
    GridShape,
    ScanOrder,
    adapt_to_shape,
    build_order,
    enclosing_side,
    export_order,
    generate_hilbert,
    generate_linear,
    self_similarity_reduce,
    shift_order,
)
from .errors import (
    DepthTooLarge,
    DimensionMismatch,
    EnclosingGridMismatch,
    FractalScanError,
    InvalidDirection,
    LengthMismatch,
    NonPositiveDelta,
    NotBlockContiguous,
    OffsetTooLarge,
    ShapeMismatch,
    ShapeNotSupported,
)
from .metrics import (
    LocalityReport,
    adjacent_index_gaps,
    analyze_order,
    compare_orders,
    continuity_fraction,
    locality_measure,
    reports_to_csv,
    reports_to_json,
)
from .ssm import (
    DiscreteSsmParams,
    SelectiveGradients,
    SelectiveInputs,
    SsmParams,
    build_kernel,
    conv_apply,
    discretize_zoh,
    grad_selective,
    random_stable_params,
    scan_lti,
    scan_selective,
    scan_selective_opcount,
)
from .verify import CheckResult, run_suite, summarize

__version__ = "0.1.0"

__all__ = [
    "BOUSTROPHEDON",
    "BlockConfig",
    "CURVE_KINDS",
    "CheckResult",
    "CurveSpec",
    "DIRECTIONS",
    "DepthTooLarge",
    "DimensionMismatch",
    "DiscreteSsmParams",
    "EnclosingGridMismatch",
    "FractalScanError",
    "GridShape",
    "HILBERT",
    "InvalidDirection",
    "LengthMismatch",
    "LocalityReport",
    "MAX_DEPTH",
    "MORTON",
    "NonPositiveDelta",
    "NotBlockContiguous",
    "OffsetTooLarge",
    "PatchGrid",
    "RASTER",
    "ScanOrder",
    "SelectiveGradients",
    "SelectiveInputs",
    "ShapeMismatch",
    "ShapeNotSupported",
    "SsmParams",
    "adapt_to_shape",
    "adjacent_index_gaps",
    "analyze_order",
    "block_forward",
    "block_opcount",
    "build_kernel",
    "build_order",
    "compare_orders",
    "continuity_fraction",
    "conv_apply",
    "deserialize",
    "direction_orders",
    "discretize_zoh",
    "enclosing_side",
    "export_order",
    "generate_hilbert",
    "generate_linear",
    "grad_selective",
    "grid_from_json",
    "grid_to_json",
    "locality_measure",
    "random_stable_params",
    "reports_to_csv",
    "reports_to_json",
    "run_suite",
    "scan_lti",
    "scan_selective",
    "scan_selective_opcount",
    "self_similarity_reduce",
    "serialize",
    "shift_order",
    "summarize",
    "__version__",
]
