"""Scan-order generation, transformation, and export for 2D grids.

A scan order is a bijection between the cells of a rows x cols grid and
sequence positions 0..L-1.  Cells are (row, col) pairs with the origin at
the top left.  Hilbert orders come from the classic frame recursion: a
square frame (an origin point plus two orthogonal spanning vectors) is
split into four half-size frames, with the vectors halved and swapped in
the first quadrant and halved, swapped, and negated in the last; at depth
zero the frame plots its midpoint, and each midpoint lands in exactly one
grid cell.  Four root frames give the four directional variants.  Raster,
boustrophedon, and Morton (Z-order) baselines, a toroidal vertical shift,
adaptation to non-power-of-two shapes, and JSON/CSV/SVG export round out
the module.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DepthTooLarge,
    EnclosingGridMismatch,
    InvalidDirection,
    NotBlockContiguous,
    OffsetTooLarge,
    ShapeNotSupported,
)

HILBERT = "hilbert"
RASTER = "raster"
BOUSTROPHEDON = "boustrophedon"
MORTON = "morton"
CURVE_KINDS = (HILBERT, RASTER, BOUSTROPHEDON, MORTON)
LINEAR_KINDS = (RASTER, BOUSTROPHEDON, MORTON)

DIRECTIONS = (1, 2, 3, 4)

# 4**12 cells; keeps forward + inverse storage in the hundreds-of-MB range
MAX_DEPTH = 12

EXPORT_FORMATS = ("json", "csv", "svg")


@dataclass(frozen=True)
class GridShape:
    """Dimensions of a grid: rows x cols, both at least 1."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(
                f"grid shape must be positive, got {self.rows}x{self.cols}"
            )

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols

    def transposed(self) -> "GridShape":
        return GridShape(self.cols, self.rows)


@dataclass(frozen=True)
class CurveSpec:
    """Recipe for a scan order: kind, shape, direction, vertical shift.

    Only Hilbert curves have directional variants; the other kinds must
    use direction 1.  The shift is a row offset with |shift| < rows.
    """

    kind: str
    shape: GridShape
    direction: int = 1
    shift: int = 0

    def __post_init__(self) -> None:
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"unknown curve kind {self.kind!r}")
        if self.direction not in DIRECTIONS:
            raise InvalidDirection(
                f"direction must be one of {DIRECTIONS}, got {self.direction}"
            )
        if self.kind != HILBERT and self.direction != 1:
            raise InvalidDirection(
                f"{self.kind} orders only support direction 1, got {self.direction}"
            )
        if abs(self.shift) >= self.shape.rows:
            raise OffsetTooLarge(
                f"|shift| must be below {self.shape.rows} rows, got {self.shift}"
            )


@dataclass(frozen=True, eq=False)
class ScanOrder:
    """A bijection between grid cells and sequence positions.

    forward[i] is the (row, col) of the i-th visited cell, stored as an
    (L, 2) integer array.  The inverse grid maps coordinates back to the
    sequence position.  Construction validates the bijection; instances
    are immutable and their arrays read-only.
    """

    spec: CurveSpec
    forward: np.ndarray

    def __post_init__(self) -> None:
        shape = self.spec.shape
        fwd = np.ascontiguousarray(self.forward, dtype=np.int64)
        if fwd.ndim != 2 or fwd.shape != (shape.cell_count, 2):
            raise ValueError(
                f"forward must be ({shape.cell_count}, 2), got {fwd.shape}"
            )
        rows, cols = fwd[:, 0], fwd[:, 1]
        if (
            rows.size
            and (
                rows.min() < 0
                or cols.min() < 0
                or rows.max() >= shape.rows
                or cols.max() >= shape.cols
            )
        ):
            raise ValueError("forward contains out-of-bounds cells")
        flat = rows * shape.cols + cols
        counts = np.bincount(flat, minlength=shape.cell_count)
        if (counts != 1).any():
            raise ValueError("forward is not a bijection over the grid cells")
        inverse = np.empty(shape.cell_count, dtype=np.int64)
        inverse[flat] = np.arange(shape.cell_count)
        inverse = inverse.reshape(shape.rows, shape.cols)
        fwd.setflags(write=False)
        inverse.setflags(write=False)
        object.__setattr__(self, "forward", fwd)
        object.__setattr__(self, "_inverse", inverse)

    @property
    def inverse(self) -> np.ndarray:
        """(rows, cols) array with inverse[r, c] = sequence position of (r, c)."""
        return self._inverse

    @property
    def length(self) -> int:
        return self.forward.shape[0]

    def index_of(self, row: int, col: int) -> int:
        return int(self._inverse[row, col])

    def cells(self) -> list[tuple[int, int]]:
        """forward as a list of (row, col) tuples."""
        return [(int(r), int(c)) for r, c in self.forward.tolist()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScanOrder):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.forward, other.forward)


def _subdivide(
    x0: float, y0: float, xi: float, xj: float, yi: float, yj: float
) -> tuple[tuple[float, ...], ...]:
    # One recursion step: four half-size frames; vectors halved and
    # swapped in the first child, halved/swapped/negated in the last.
    hxi, hxj, hyi, hyj = xi / 2.0, xj / 2.0, yi / 2.0, yj / 2.0
    return (
        (x0, y0, hyi, hyj, hxi, hxj),
        (x0 + hxi, y0 + hxj, hxi, hxj, hyi, hyj),
        (x0 + hxi + hyi, y0 + hxj + hyj, hxi, hxj, hyi, hyj),
        (x0 + hxi + yi, y0 + hxj + yj, -hyi, -hyj, -hxi, -hxj),
    )


@dataclass(frozen=True)
class HilbertFrame:
    """Square frame carried through the curve recursion.

    The origin is a corner point in continuous plot coordinates (x right,
    y down); x_vec and y_vec span the frame.  They remain orthogonal and
    equal in magnitude at every level.  A depth-0 frame plots its
    midpoint, which falls inside exactly one unit cell.
    """

    origin: tuple[float, float]
    x_vec: tuple[float, float]
    y_vec: tuple[float, float]
    depth: int

    def midpoint(self) -> tuple[float, float]:
        x0, y0 = self.origin
        return (
            x0 + (self.x_vec[0] + self.y_vec[0]) / 2.0,
            y0 + (self.x_vec[1] + self.y_vec[1]) / 2.0,
        )

    def subframes(self) -> tuple["HilbertFrame", ...]:
        if self.depth < 1:
            raise ValueError("a depth-0 frame has no subframes")
        x0, y0 = self.origin
        children = _subdivide(x0, y0, *self.x_vec, *self.y_vec)
        return tuple(
            HilbertFrame((cx, cy), (cxi, cxj), (cyi, cyj), self.depth - 1)
            for cx, cy, cxi, cxj, cyi, cyj in children
        )


def root_frame(depth: int, direction: int = 1) -> HilbertFrame:
    """Root frame whose recursion produces the requested direction.

    Direction 1 runs (0,0) -> (n-1,0); direction 2 is its transpose;
    direction 4 its 180-degree rotation; direction 3 the rotation of the
    transpose.  The variants are the same recursion started from a
    transformed frame.
    """
    if direction not in DIRECTIONS:
        raise InvalidDirection(
            f"direction must be one of {DIRECTIONS}, got {direction}"
        )
    n = float(1 << depth)
    if direction == 1:
        return HilbertFrame((0.0, 0.0), (n, 0.0), (0.0, n), depth)
    if direction == 2:
        return HilbertFrame((0.0, 0.0), (0.0, n), (n, 0.0), depth)
    if direction == 3:
        return HilbertFrame((n, n), (0.0, -n), (-n, 0.0), depth)
    return HilbertFrame((n, n), (-n, 0.0), (0.0, -n), depth)


def generate_hilbert(depth: int, direction: int = 1) -> ScanOrder:
    """Hilbert scan order on the 2^depth x 2^depth grid.

    Walks the frame recursion depth-first and maps each plotted midpoint
    (x, y) to the containing cell (row, col) = (floor(y), floor(x)).
    """
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    if depth > MAX_DEPTH:
        raise DepthTooLarge(f"depth {depth} exceeds the guard of {MAX_DEPTH}")
    frame = root_frame(depth, direction)
    n = 1 << depth
    fwd = np.empty((n * n, 2), dtype=np.int64)
    pos = 0

    def walk(x0: float, y0: float, xi: float, xj: float, yi: float, yj: float, d: int) -> None:
        nonlocal pos
        if d == 0:
            fwd[pos, 0] = int(y0 + (xj + yj) / 2.0)
            fwd[pos, 1] = int(x0 + (xi + yi) / 2.0)
            pos += 1
            return
        for child in _subdivide(x0, y0, xi, xj, yi, yj):
            walk(*child, d - 1)

    walk(*frame.origin, *frame.x_vec, *frame.y_vec, depth)
    spec = CurveSpec(HILBERT, GridShape(n, n), direction, 0)
    return ScanOrder(spec, fwd)


def generate_linear(kind: str, shape: GridShape) -> ScanOrder:
    """Raster, boustrophedon, or Morton (Z-order) scan order.

    Morton interleaves the bits of (row, col) with the row bit more
    significant and requires a square power-of-two grid.
    """
    if kind not in LINEAR_KINDS:
        raise ValueError(f"kind must be one of {LINEAR_KINDS}, got {kind!r}")
    rows, cols = shape.rows, shape.cols
    rr = np.repeat(np.arange(rows, dtype=np.int64), cols)
    cc = np.tile(np.arange(cols, dtype=np.int64), rows)
    if kind == RASTER:
        fwd = np.column_stack([rr, cc])
    elif kind == BOUSTROPHEDON:
        cgrid = np.tile(np.arange(cols, dtype=np.int64), (rows, 1))
        cgrid[1::2] = cgrid[1::2, ::-1]
        fwd = np.column_stack([rr, cgrid.ravel()])
    else:
        if rows != cols or rows & (rows - 1):
            raise ShapeNotSupported(
                f"morton needs a square power-of-two grid, got {rows}x{cols}"
            )
        key = np.zeros(rows * cols, dtype=np.int64)
        for bit in range(max(1, (rows - 1).bit_length())):
            key |= ((cc >> bit) & 1) << (2 * bit)
            key |= ((rr >> bit) & 1) << (2 * bit + 1)
        fwd = np.column_stack([rr, cc])[np.argsort(key, kind="stable")]
    return ScanOrder(CurveSpec(kind, shape, 1, 0), fwd)


def shift_order(order: ScanOrder, offset: int) -> ScanOrder:
    """Shift every visited cell down by `offset` rows, wrapping toroidally.

    The resulting spec records the accumulated shift, reduced modulo the
    row count when a composition leaves the (-rows, rows) window.
    """
    rows = order.spec.shape.rows
    if abs(offset) >= rows:
        raise OffsetTooLarge(f"|offset| must be below {rows} rows, got {offset}")
    if offset == 0:
        return order
    fwd = order.forward.copy()
    fwd[:, 0] = (fwd[:, 0] + offset) % rows
    total = order.spec.shift + offset
    if abs(total) >= rows:
        total %= rows
    return ScanOrder(replace(order.spec, shift=total), fwd)


def enclosing_side(shape: GridShape) -> int:
    """Side of the smallest 2^k x 2^k square covering the shape."""
    return 1 << (max(shape.rows, shape.cols) - 1).bit_length()


def adapt_to_shape(order: ScanOrder, shape: GridShape) -> ScanOrder:
    """Restrict an order on the smallest enclosing power-of-two square to
    a target shape by dropping out-of-bounds cells.

    Surviving cells keep their relative order, so the result is still a
    bijection on the target grid.
    """
    src = order.spec.shape
    side = enclosing_side(shape)
    if src.rows != src.cols or src.rows != side:
        raise EnclosingGridMismatch(
            f"order covers {src.rows}x{src.cols}, expected the {side}x{side} "
            f"square enclosing {shape.rows}x{shape.cols}"
        )
    if (src.rows, src.cols) == (shape.rows, shape.cols):
        return order
    fwd = order.forward
    mask = (fwd[:, 0] < shape.rows) & (fwd[:, 1] < shape.cols)
    return ScanOrder(replace(order.spec, shape=shape), fwd[mask])


def self_similarity_reduce(order: ScanOrder) -> ScanOrder:
    """Collapse an unshifted order on a 2^d square into its 2x2-block order.

    Positions 4k..4k+3 must all fall inside one aligned 2x2 block; the
    reduction maps that block to a single cell of the half-size grid.
    Hilbert orders always satisfy this; row-major orders split their
    blocks across rows and fail.
    """
    spec = order.spec
    shape = spec.shape
    if spec.shift != 0:
        raise ValueError("self-similarity reduction requires an unshifted order")
    if shape.rows != shape.cols or shape.rows < 2 or shape.rows & (shape.rows - 1):
        raise ValueError(
            f"reduction requires a square power-of-two grid of side >= 2, "
            f"got {shape.rows}x{shape.cols}"
        )
    quads = (order.forward >> 1).reshape(-1, 4, 2)
    scattered = (quads != quads[:, :1, :]).any(axis=(1, 2))
    if scattered.any():
        k = int(np.nonzero(scattered)[0][0])
        raise NotBlockContiguous(
            f"positions {4 * k}..{4 * k + 3} do not cover a single 2x2 block"
        )
    half = GridShape(shape.rows // 2, shape.cols // 2)
    return ScanOrder(replace(spec, shape=half), quads[:, 0, :].copy())


def build_order(spec: CurveSpec) -> ScanOrder:
    """Realize a CurveSpec: generate, adapt to the target shape, shift.

    Hilbert orders (and Morton orders on shapes that are not square
    powers of two) are generated on the smallest enclosing power-of-two
    square and subsampled down; the vertical shift is applied last, on
    the target grid.
    """
    shape = spec.shape
    if spec.kind == HILBERT:
        depth = enclosing_side(shape).bit_length() - 1
        order = adapt_to_shape(generate_hilbert(depth, spec.direction), shape)
    elif spec.kind == MORTON and (shape.rows != shape.cols or shape.rows & (shape.rows - 1)):
        side = enclosing_side(shape)
        square = generate_linear(MORTON, GridShape(side, side))
        order = adapt_to_shape(square, shape)
    else:
        order = generate_linear(spec.kind, shape)
    if spec.shift:
        order = shift_order(order, spec.shift)
    return order


def export_order(order: ScanOrder, format: str) -> bytes:
    """Serialize an order as JSON, CSV, or an SVG polyline.

    JSON: {"kind", "rows", "cols", "direction", "shift", "forward"}.
    CSV: an index,row,col header plus one line per cell.
    SVG: a single polyline through cell centers (col+0.5, row+0.5) on a
    viewBox of "0 0 cols rows".
    """
    spec = order.spec
    shape = spec.shape
    if format == "json":
        doc = {
            "kind": spec.kind,
            "rows": shape.rows,
            "cols": shape.cols,
            "direction": spec.direction,
            "shift": spec.shift,
            "forward": order.forward.tolist(),
        }
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode("utf-8")
    if format == "csv":
        lines = "\n".join(
            f"{i},{r},{c}" for i, (r, c) in enumerate(order.forward.tolist())
        )
        return f"index,row,col\n{lines}\n".encode("utf-8")
    if format == "svg":
        svg = ET.Element(
            "svg",
            {
                "xmlns": "http://www.w3.org/2000/svg",
                "viewBox": f"0 0 {shape.cols} {shape.rows}",
            },
        )
        points = " ".join(
            f"{c + 0.5:g},{r + 0.5:g}" for r, c in order.forward.tolist()
        )
        ET.SubElement(
            svg,
            "polyline",
            {"points": points, "fill": "none", "stroke": "black", "stroke-width": "0.1"},
        )
        return ET.tostring(svg, encoding="utf-8", xml_declaration=True) + b"\n"
    raise ValueError(f"unknown export format {format!r}")
