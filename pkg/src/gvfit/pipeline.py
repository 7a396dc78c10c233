"""Grid reconstruction pipeline: samples in, raster out.

Samples are read from CSV, snapped to cell centres of a grid, extended to a
gradually varied field and relaxed. Rasters are written as ASCII PGM or CSV.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .gvf import EnvelopePolicy
from .level_graph import DomainGraph, GuidingSet, ScalarField, build_grid
from .smoothing import SmoothConfig, multilevel_fit

__all__ = [
    "InputError",
    "PipelineError",
    "SamplePoint",
    "ElementSample",
    "GridSpec",
    "RunReport",
    "parse_samples_csv",
    "sample_bounds",
    "determine_resolution",
    "run_grid_pipeline",
    "write_pgm",
    "write_csv_raster",
    "read_csv_raster",
]

AUTO_SIZES = (8, 16, 32, 64, 128, 256, 512)


class InputError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class PipelineError(RuntimeError):
    """Failure inside one named step of :func:`run_grid_pipeline`."""

    def __init__(self, step: str, cause: Exception):
        super().__init__(f"{step}: {cause}")
        self.step = step
        self.cause = cause


@dataclass(frozen=True)
class SamplePoint:
    x: float
    y: float
    value: float


@dataclass(frozen=True)
class ElementSample:
    element_id: int
    value: float


@dataclass(frozen=True)
class GridSpec:
    width: int
    height: int
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InputError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        xmin, ymin, xmax, ymax = self.bounds
        if not (xmax > xmin and ymax > ymin):
            raise InputError(f"degenerate bounds {self.bounds}")

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        """``(row, col)`` of the cell whose centre is nearest to ``(x, y)``."""
        xmin, ymin, xmax, ymax = self.bounds
        col = math.floor((x - xmin) / (xmax - xmin) * self.width)
        row = math.floor((y - ymin) / (ymax - ymin) * self.height)
        return min(max(row, 0), self.height - 1), min(max(col, 0), self.width - 1)

    def contains(self, x: float, y: float) -> bool:
        xmin, ymin, xmax, ymax = self.bounds
        return xmin <= x <= xmax and ymin <= y <= ymax


_HEADERS = {("x", "y", "value"): 3, ("id", "value"): 2}


def parse_samples_csv(data: bytes | str) -> list:
    """Parse ``x,y,value`` (grid) or ``id,value`` (mesh) sample rows.

    A header row is optional; ``#`` lines and blank lines are skipped. Returns
    :class:`SamplePoint` or :class:`ElementSample` objects in file order.
    """
    if isinstance(data, (bytes, bytearray)):
        try:
            data = bytes(data).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"not UTF-8 text ({exc.reason})") from None
    arity = None
    out = []
    for num, row in enumerate(csv.reader(io.StringIO(data)), 1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        cells = [c.strip() for c in row]
        if arity is None and not out:
            key = tuple(c.lower() for c in cells)
            if key in _HEADERS:
                arity = _HEADERS[key]
                continue
        if arity is None:
            arity = len(cells)
            if arity not in (2, 3):
                raise InputError(f"expected 2 or 3 fields, got {len(cells)}", num)
        elif len(cells) != arity:
            raise InputError(f"expected {arity} fields, got {len(cells)}", num)
        nums = []
        for col, c in enumerate(cells, 1):
            try:
                v = float(c)
            except ValueError:
                raise InputError(f"non-numeric field {c!r}", num, col) from None
            if not math.isfinite(v):
                raise InputError(f"non-finite field {c!r}", num, col)
            nums.append(v)
        if arity == 3:
            out.append(SamplePoint(*nums))
        else:
            if nums[0] != int(nums[0]) or nums[0] < 0:
                raise InputError(f"element id {cells[0]!r} is not a non-negative integer", num, 1)
            out.append(ElementSample(int(nums[0]), nums[1]))
    if not out:
        raise InputError("no samples in input")
    return out


def sample_bounds(samples: Sequence[SamplePoint]):
    xs = [s.x for s in samples]
    ys = [s.y for s in samples]
    xmin, xmax, ymin, ymax = min(xs), max(xs), min(ys), max(ys)
    # a flat extent gets one unit of room so the box is never empty
    if xmax == xmin:
        xmin, xmax = xmin - 0.5, xmax + 0.5
    if ymax == ymin:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    return xmin, ymin, xmax, ymax


def _snap(samples, spec: GridSpec):
    """Map samples to cells; returns ``(guiding dict, first conflict or None)``."""
    cells: dict[int, float] = {}
    for s in samples:
        r, c = spec.cell_of(s.x, s.y)
        v = r * spec.width + c
        if v in cells and cells[v] != s.value:
            return None, (v, cells[v], s)
        cells.setdefault(v, s.value)
    return cells, None


def determine_resolution(samples: Sequence[SamplePoint], requested: GridSpec | None = None,
                         bounds: tuple[float, float, float, float] | None = None):
    """Choose a grid and snap samples to cell centres.

    With ``requested`` the grid is fixed and a cell holding two different
    values is an error. Otherwise the smallest square power-of-two grid
    (8 to 512) without such conflicts is used. Equal values in one cell merge.
    Returns ``(GridSpec, GuidingSet)``.
    """
    samples = list(samples)
    if not samples:
        raise InputError("no samples")
    if any(not isinstance(s, SamplePoint) for s in samples):
        raise InputError("grid fitting needs x,y,value samples")
    if requested is not None:
        for s in samples:
            if not requested.contains(s.x, s.y):
                raise InputError(f"sample ({s.x}, {s.y}) outside bounds {requested.bounds}")
        cells, clash = _snap(samples, requested)
        if clash:
            v, old, s = clash
            raise InputError(f"samples with values {old} and {s.value} both fall in cell {v} "
                             f"of the {requested.width}x{requested.height} grid")
        return requested, GuidingSet(tuple(cells.items()))
    box = bounds if bounds is not None else sample_bounds(samples)
    for size in AUTO_SIZES:
        spec = GridSpec(size, size, box)
        for s in samples:
            if not spec.contains(s.x, s.y):
                raise InputError(f"sample ({s.x}, {s.y}) outside bounds {box}")
        cells, clash = _snap(samples, spec)
        if not clash:
            return spec, GuidingSet(tuple(cells.items()))
    v, old, s = clash
    raise InputError(f"samples with values {old} and {s.value} still share a cell at "
                     f"{AUTO_SIZES[-1]}x{AUTO_SIZES[-1]}")


@dataclass(frozen=True)
class RunReport:
    width: int
    height: int
    samples: int
    delta: float
    levels: int
    inflation_steps: int
    sweeps: int
    residual: float

    def line(self) -> str:
        return (f"width={self.width} height={self.height} samples={self.samples} "
                f"delta={self.delta!r} levels={self.levels} inflation_steps={self.inflation_steps} "
                f"sweeps={self.sweeps} residual={self.residual!r}")


def run_grid_pipeline(samples: Sequence[SamplePoint], spec: GridSpec | None = None,
                      cfg: SmoothConfig = SmoothConfig(),
                      policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT,
                      levels: int = 1):
    """Samples to smoothed raster. Returns ``(graph, field, report)``.

    Errors from any step are re-raised as :class:`PipelineError` naming the
    step (``resolution`` or ``fit``).
    """
    try:
        spec, guiding = determine_resolution(samples, spec)
    except Exception as exc:
        raise PipelineError("resolution", exc) from exc
    g = build_grid(spec.width, spec.height)
    try:
        res = multilevel_fit(g, guiding, levels, cfg, policy)
    except Exception as exc:
        raise PipelineError("fit", exc) from exc
    report = RunReport(spec.width, spec.height, len(guiding), res.derivation.scale.delta,
                       res.derivation.scale.count, res.derivation.inflation_steps,
                       sum(res.sweeps_per_level), res.residual)
    return g, res.field, report


def _raster(g: DomainGraph, field) -> np.ndarray:
    if g.kind != "grid":
        raise ValueError("raster output needs a grid field")
    w, h = g.shape
    vals = field.real_values() if isinstance(field, ScalarField) else np.asarray(field, float)
    return np.asarray(vals, dtype=float).reshape(h, w)


def write_pgm(g: DomainGraph, field, path: str | Path) -> None:
    """ASCII (P2) greyscale image, min-max scaled to 0..255, one row per line.

    Values round half up; a constant field is written as 128 throughout.
    """
    u = _raster(g, field)
    lo, hi = float(u.min()), float(u.max())
    if hi > lo:
        pix = np.floor(255.0 * (u - lo) / (hi - lo) + 0.5).astype(int)
    else:
        pix = np.full(u.shape, 128, dtype=int)
    h, w = u.shape
    body = "\n".join(" ".join(str(p) for p in row) for row in pix)
    Path(path).write_text(f"P2\n{w} {h}\n255\n{body}\n")


def write_csv_raster(g: DomainGraph, field, path: str | Path) -> None:
    """Row-major CSV with shortest round-tripping decimals."""
    u = _raster(g, field)
    Path(path).write_text("".join(",".join(repr(float(x)) for x in row) + "\n" for row in u))


def read_csv_raster(path: str | Path) -> np.ndarray:
    rows = [line.split(",") for line in Path(path).read_text().splitlines() if line]
    return np.array([[float(x) for x in r] for r in rows])
