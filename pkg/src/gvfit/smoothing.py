"""Finite-difference derivatives and constrained relaxation on grid fields.

Grid fields are handled as ``(height, width)`` arrays; the Laplacian is the
graph Laplacian of the 4-neighbour grid (missing neighbours at the border are
simply left out), so relaxation is gradient descent on the Dirichlet energy
``sum over edges (F(a) - F(b))**2`` with the guiding cells held fixed.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .gvf import EnvelopePolicy
from .level_graph import DomainGraph, GraphError, GuidingSet, ScalarField, build_grid
from .real_fit import ScaleDerivation, fit_real_gvf

__all__ = [
    "SmoothConfig",
    "GradientRaster",
    "SmoothResult",
    "MultilevelResult",
    "partial_derivatives",
    "dirichlet_energy",
    "grid_laplacian",
    "smooth_constrained",
    "multilevel_fit",
]

log = logging.getLogger(__name__)

MAX_STEP = 0.25  # stability bound of the 5-point stencil


@dataclass(frozen=True)
class SmoothConfig:
    """Relaxation settings.

    ``order`` is the number of relaxation passes (0 disables smoothing);
    each pass runs up to ``iterations`` sweeps of ``F += step * Laplacian(F)``.
    Relaxation stops early once the largest per-sweep update drops below
    ``tolerance``.
    """

    order: int = 1
    iterations: int = 100
    step: float = 0.2
    tolerance: float = 1e-8

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"order must be >= 0, got {self.order}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not 0 < self.step <= MAX_STEP:
            raise ValueError(f"step must lie in (0, {MAX_STEP}], got {self.step}")


@dataclass(frozen=True)
class GradientRaster:
    dx: np.ndarray
    dy: np.ndarray


@dataclass(frozen=True)
class SmoothResult:
    field: ScalarField
    sweeps: int
    residual: float
    energies: list[float] = field(default_factory=list)


@dataclass(frozen=True)
class MultilevelResult:
    field: ScalarField
    derivation: ScaleDerivation
    fine_sweeps: int
    sweeps_per_level: tuple[int, ...]
    residual: float


def _grid_array(g: DomainGraph, f) -> np.ndarray:
    if g.kind != "grid":
        raise GraphError(f"expected a grid graph, got {g.kind!r}")
    w, h = g.shape
    vals = f.values if isinstance(f, ScalarField) else f
    return np.asarray(vals, dtype=float).reshape(h, w)


def partial_derivatives(g: DomainGraph, f: ScalarField) -> GradientRaster:
    """Central differences inside, one-sided first differences on the border.

    ``dx`` runs along columns, ``dy`` along rows, in value per cell. An axis
    of length 1 has zero derivative.
    """
    u = _grid_array(g, f)
    h, w = u.shape
    dx = np.gradient(u, axis=1, edge_order=1) if w > 1 else np.zeros_like(u)
    dy = np.gradient(u, axis=0, edge_order=1) if h > 1 else np.zeros_like(u)
    return GradientRaster(dx, dy)


def grid_laplacian(u: np.ndarray) -> np.ndarray:
    lap = np.zeros_like(u)
    dcol = u[:, 1:] - u[:, :-1]
    lap[:, :-1] += dcol
    lap[:, 1:] -= dcol
    drow = u[1:, :] - u[:-1, :]
    lap[:-1, :] += drow
    lap[1:, :] -= drow
    return lap


def dirichlet_energy(u: np.ndarray) -> float:
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[None, :]
    return float(np.sum((u[:, 1:] - u[:, :-1]) ** 2) + np.sum((u[1:, :] - u[:-1, :]) ** 2))


def _relax(u, fixed, step, max_sweeps, tolerance, energies=None):
    """In-place damped Jacobi; returns ``(sweeps, last max update)``."""
    free = ~fixed
    residual = 0.0
    sweeps = 0
    while sweeps < max_sweeps:
        du = step * grid_laplacian(u)
        du[fixed] = 0.0
        u[free] += du[free]
        sweeps += 1
        residual = float(np.max(np.abs(du))) if du.size else 0.0
        if energies is not None:
            energies.append(dirichlet_energy(u))
        if residual < tolerance:
            break
    return sweeps, residual


def _mask(shape, j: GuidingSet):
    fixed = np.zeros(shape, dtype=bool)
    fixed.flat[j.vertices] = True
    return fixed


def smooth_constrained(g: DomainGraph, f: ScalarField, j: GuidingSet,
                       cfg: SmoothConfig = SmoothConfig(), record_energy: bool = False) -> SmoothResult:
    """Relax ``f`` toward the discrete harmonic interpolant of ``j``.

    Guiding cells are set to their sample values and never touched again.
    With ``record_energy`` the Dirichlet energy after every sweep is kept in
    ``result.energies``.
    """
    j.validate(g)
    u = _grid_array(g, f).copy()
    u.flat[j.vertices] = j.values
    fixed = _mask(u.shape, j)
    energies = [dirichlet_energy(u)] if record_energy else None
    total, residual = 0, float("inf")
    for p in range(cfg.order):
        sweeps, residual = _relax(u, fixed, cfg.step, cfg.iterations, cfg.tolerance, energies)
        total += sweeps
        log.debug("pass %d: %d sweeps, max update %.3g", p + 1, sweeps, residual)
        if residual < cfg.tolerance:
            break
    if cfg.order == 0:
        residual = 0.0
    return SmoothResult(ScalarField(u.ravel(), f.scale), total, residual, energies or [])


def _coarsen(shape: tuple[int, int]) -> tuple[int, int]:
    w, h = shape
    return (w - 1) // 2 + 1, (h - 1) // 2 + 1


def _restrict_guiding(j: GuidingSet, fine: tuple[int, int], coarse: tuple[int, int]) -> GuidingSet:
    # injection: fine cell (r, c) lives on coarse cell (r // 2, c // 2)
    wf, wc = fine[0], coarse[0]
    kept: dict[int, float] = {}
    for v, x in j.entries:
        r, c = divmod(int(v), wf)
        cv = (r // 2) * wc + c // 2
        if cv in kept:
            if kept[cv] != x:
                warnings.warn(f"guiding vertex {v} collides on coarse cell {cv}; keeping the first",
                              stacklevel=3)
            continue
        kept[cv] = x
    return GuidingSet(tuple(kept.items()))


def _prolong(u: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Bilinear interpolation of coarse ``u`` onto a fine ``(width, height)`` grid."""
    w, h = shape
    hc, wc = u.shape

    def axis(nf, nc):
        pos = np.arange(nf) / 2.0
        i0 = np.minimum(np.floor(pos).astype(int), nc - 1)
        i1 = np.minimum(i0 + 1, nc - 1)
        return i0, i1, pos - i0

    r0, r1, fr = axis(h, hc)
    c0, c1, fc = axis(w, wc)
    rows = u[r0, :] * (1 - fr)[:, None] + u[r1, :] * fr[:, None]
    return rows[:, c0] * (1 - fc) + rows[:, c1] * fc


def multilevel_fit(g: DomainGraph, j: GuidingSet, levels: int = 1,
                   cfg: SmoothConfig = SmoothConfig(),
                   policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> MultilevelResult:
    """Coarse-to-fine fit: extend and relax on the coarsest grid, then
    prolong and relax again on each finer one.

    ``levels=1`` is exactly ``fit_real_gvf`` followed by ``smooth_constrained``.
    """
    if g.kind != "grid":
        raise GraphError(f"expected a grid graph, got {g.kind!r}")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    need = 2 ** (levels - 1)
    if min(g.shape) < need:
        raise ValueError(f"grid {g.shape[0]}x{g.shape[1]} too small for {levels} levels (need >= {need})")
    j.validate(g)

    shapes = [g.shape]
    guides = [j]
    for _ in range(levels - 1):
        shapes.append(_coarsen(shapes[-1]))
        guides.append(_restrict_guiding(guides[-1], shapes[-2], shapes[-1]))

    coarse = build_grid(*shapes[-1]) if levels > 1 else g
    init, deriv = fit_real_gvf(coarse, guides[-1], policy)
    res = smooth_constrained(coarse, init, guides[-1], cfg)
    sweeps = [res.sweeps]
    u = _grid_array(coarse, res.field)
    for lvl in range(levels - 2, -1, -1):
        grid = build_grid(*shapes[lvl]) if lvl else g
        u = _prolong(u, shapes[lvl])
        res = smooth_constrained(grid, ScalarField(u.ravel()), guides[lvl], cfg)
        sweeps.append(res.sweeps)
        u = _grid_array(grid, res.field)
    return MultilevelResult(res.field, deriv, sweeps[-1], tuple(sweeps), res.residual)
