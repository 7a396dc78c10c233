"""Gradually varied fitting and harmonic relaxation on triangle meshes.

Point-space algorithms work on the vertex graph (mesh edges); cell-space
algorithms work on the face graph (faces sharing an edge).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gvf import EnvelopePolicy, gvf_extend
from .level_graph import DomainGraph, GuidingSet, ScalarField
from .mesh import TriMesh
from .real_fit import fit_real_gvf

__all__ = [
    "MeshField",
    "HarmonicResult",
    "manifold_int_gvf",
    "manifold_real_gvf",
    "manifold_cell_int_gvf",
    "manifold_cell_real_gvf",
    "harmonic_fit",
    "face_display_values",
    "write_values_csv",
]

_KIND = {"vertex": "mesh-vertex", "cell": "mesh-cell"}


@dataclass(frozen=True, eq=False)
class MeshField(ScalarField):
    mode: str = "vertex"

    def __post_init__(self):
        if self.mode not in _KIND:
            raise ValueError(f"mode must be 'vertex' or 'cell', got {self.mode!r}")
        super().__post_init__()


def _wrap(f: ScalarField, mode: str) -> MeshField:
    return MeshField(f.values, f.scale, f.integer, mode)


def manifold_int_gvf(m: TriMesh, j: GuidingSet, n: int,
                     policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> MeshField:
    """Integer gradually varied extension over mesh vertices."""
    return _wrap(gvf_extend(m.vertex_graph, j, n, policy), "vertex")


def manifold_real_gvf(m: TriMesh, j: GuidingSet,
                      policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> MeshField:
    """Real-valued fit over mesh vertices; the level scale is derived from
    the samples and kept on ``result.scale``."""
    f, _ = fit_real_gvf(m.vertex_graph, j, policy)
    return _wrap(f, "vertex")


def manifold_cell_int_gvf(m: TriMesh, j: GuidingSet, n: int,
                          policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> MeshField:
    return _wrap(gvf_extend(m.cell_graph, j, n, policy), "cell")


def manifold_cell_real_gvf(m: TriMesh, j: GuidingSet,
                           policy: EnvelopePolicy | str = EnvelopePolicy.MIDPOINT) -> MeshField:
    f, _ = fit_real_gvf(m.cell_graph, j, policy)
    return _wrap(f, "cell")


@dataclass(frozen=True)
class HarmonicResult:
    field: ScalarField
    trace: np.ndarray  # max |update| of each sweep


def harmonic_fit(g: DomainGraph, init, j: GuidingSet, iterations: int = 100) -> HarmonicResult:
    """Jacobi sweeps of the umbrella operator with guiding elements fixed.

    Every free element is replaced, simultaneously, by the unweighted mean of
    its neighbours. ``init`` is a field or array on ``g`` (usually a real GVF
    fit); guiding entries are set from ``j`` before the first sweep.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    j.validate(g)
    if isinstance(init, MeshField) and _KIND[init.mode] != g.kind:
        raise ValueError(f"{init.mode} field does not live on a {g.kind} graph")
    u = np.array(init.values if isinstance(init, ScalarField) else init, dtype=float)
    if len(u) != g.vertex_count:
        raise ValueError(f"init has {len(u)} values, graph has {g.vertex_count} elements")
    u[j.vertices] = j.values
    free = np.ones(len(u), dtype=bool)
    free[j.vertices] = False

    deg = g.degrees
    indices = np.concatenate([np.asarray(nb, dtype=np.int64) for nb in g.adjacency])
    starts = np.concatenate([[0], np.cumsum(deg)[:-1]])
    trace = np.zeros(iterations)
    if free.any():
        for k in range(iterations):
            mean = np.add.reduceat(u[indices], starts) / deg
            du = mean[free] - u[free]
            u[free] = mean[free]
            trace[k] = np.max(np.abs(du))
    mode = init.mode if isinstance(init, MeshField) else None
    out = MeshField(u, mode=mode) if mode else ScalarField(u)
    return HarmonicResult(out, trace)


def face_display_values(m: TriMesh, field: MeshField) -> np.ndarray:
    """Mean of the three corner values of each face."""
    if not isinstance(field, MeshField) or field.mode != "vertex":
        raise ValueError("face display values need a vertex-mode field")
    vals = field.real_values()
    if len(vals) != m.n_vertices:
        raise ValueError("field length does not match vertex count")
    return vals[m.faces].mean(axis=1)


def write_values_csv(values, path: str | Path) -> None:
    """Sidecar ``id,value`` file, one element per line."""
    vals = np.asarray(values)
    fmt = (lambda x: str(int(x))) if vals.dtype.kind in "iu" else (lambda x: repr(float(x)))
    lines = ["id,value"] + [f"{k},{fmt(x)}" for k, x in enumerate(vals)]
    Path(path).write_text("\n".join(lines) + "\n")
