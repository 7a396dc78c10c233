"""Real-valued fitting on top of integer extensions.

The level spacing comes from the steepest pair of samples, so that the
quantized samples satisfy the distance condition; the integer extension is
then mapped back to reals and the samples are restored exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gvf import EnvelopePolicy, check_feasible, gvf_extend
from .level_graph import DomainGraph, GuidingSet, LevelScale, ScalarField, multi_source_distances

__all__ = ["ScaleDerivation", "max_slope", "derive_scale", "quantize", "fit_real_gvf"]

INFLATION_FACTOR = 1.25
MAX_INFLATIONS = 64


@dataclass(frozen=True)
class ScaleDerivation:
    scale: LevelScale
    max_slope: float
    inflation_steps: int
    indices: GuidingSet  # the quantized guiding set


def max_slope(g: DomainGraph, j: GuidingSet) -> float:
    """Largest ``|f(x) - f(y)| / d(x, y)`` over guiding pairs (0 for one point)."""
    verts, vals = j.vertices, j.values
    best = 0.0
    for a in range(len(verts) - 1):
        d = multi_source_distances(g, [verts[a]])[verts[a + 1:]]
        best = max(best, float(np.max(np.abs(vals[a + 1:] - vals[a]) / d)))
    return best


def _scale_for(lo: float, hi: float, delta: float) -> LevelScale:
    ratio = (hi - lo) / delta
    # a ratio that is an integer up to rounding noise must not gain a level
    n = math.ceil(ratio - 1e-9 * max(1.0, ratio)) + 1
    return LevelScale(lo, delta, max(n, 1))


def quantize(j: GuidingSet, scale: LevelScale) -> GuidingSet:
    idx = scale.nearest_index(j.values)
    return GuidingSet(tuple((int(v), int(k)) for v, k in zip(j.vertices, idx)))


def derive_scale(g: DomainGraph, j: GuidingSet) -> ScaleDerivation:
    """Level scale whose spacing is the maximum sample slope.

    Inflates the spacing by 1.25 until the quantized samples are feasible;
    rounding can only break feasibility through floating-point noise, so this
    rarely triggers.
    """
    j.validate(g)
    slope = max_slope(g, j)
    vals = j.values
    lo, hi = float(vals.min()), float(vals.max())
    delta = slope if slope > 0 else 1.0
    for steps in range(MAX_INFLATIONS + 1):
        scale = _scale_for(lo, hi, delta)
        q = quantize(j, scale)
        if check_feasible(g, q).feasible:
            return ScaleDerivation(scale, slope, steps, q)
        delta *= INFLATION_FACTOR
    raise AssertionError("level spacing inflation did not restore feasibility")


def fit_real_gvf(g: DomainGraph, j: GuidingSet,
                 policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT):
    """Real field agreeing exactly with ``j``, gradually varied up to the snap seam.

    Returns ``(field, derivation)``. Per edge, ``|F(a) - F(b)| <= delta``
    away from samples and ``<= 1.5 * delta`` on edges touching a sample. The
    dequantized field is clipped to the sample range before snapping, so the
    output never leaves ``[min f, max f]``.
    """
    deriv = derive_scale(g, j)
    ext = gvf_extend(g, deriv.indices, deriv.scale.count, policy)
    vals = j.values
    out = np.clip(deriv.scale.value(ext.values), vals.min(), vals.max())
    out[j.vertices] = vals
    return ScalarField(out, deriv.scale), deriv
