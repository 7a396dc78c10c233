"""Triangle meshes: OFF/OBJ readers and writers, vertex and cell graphs.

Two faces are adjacent in the cell graph when they share a full edge.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .level_graph import DomainGraph, component_count

__all__ = [
    "MeshError",
    "MeshFormatError",
    "MeshIndexError",
    "NonManifoldError",
    "DisconnectedMeshError",
    "TriMesh",
    "load_off",
    "load_obj",
    "load_mesh",
    "write_off",
    "write_obj",
    "tetrahedron",
    "octahedron",
    "icosphere",
]


class MeshError(ValueError):
    pass


class MeshFormatError(MeshError):
    pass


class MeshIndexError(MeshError):
    pass


class NonManifoldError(MeshError):
    pass


class DisconnectedMeshError(MeshError):
    pass


@dataclass(frozen=True, eq=False)
class TriMesh:
    vertices: np.ndarray  # (V, 3) float
    faces: np.ndarray  # (F, 3) int

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 3)
        f = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if len(f) == 0:
            raise MeshFormatError("mesh has no faces")
        for k, tri in enumerate(f):
            if tri.min() < 0 or tri.max() >= len(v):
                raise MeshIndexError(f"face {k} references a vertex outside 0..{len(v) - 1}")
            if len(set(tri.tolist())) != 3:
                raise MeshIndexError(f"face {k} repeats a vertex: {tri.tolist()}")
        for e, owners in self.edge_faces.items():
            if len(owners) > 2:
                raise NonManifoldError(f"edge {e} is shared by {len(owners)} faces {owners}")
        nv = component_count(len(v), self.edges)
        if nv != 1:
            raise DisconnectedMeshError(f"vertex graph has {nv} components")
        nc = component_count(len(f), self._cell_edges())
        if nc != 1:
            raise DisconnectedMeshError(f"cell graph has {nc} components")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        """Undirected edge ``(a, b)`` with ``a < b`` -> incident face ids."""
        table: dict[tuple[int, int], list[int]] = {}
        for k, (a, b, c) in enumerate(self.faces.tolist()):
            for p, q in ((a, b), (b, c), (c, a)):
                table.setdefault((min(p, q), max(p, q)), []).append(k)
        return table

    @property
    def edges(self) -> list[tuple[int, int]]:
        return sorted(self.edge_faces)

    def _cell_edges(self):
        return [tuple(o) for o in self.edge_faces.values() if len(o) == 2]

    @cached_property
    def vertex_graph(self) -> DomainGraph:
        return DomainGraph.from_edges(self.n_vertices, self.edges, kind="mesh-vertex")

    @cached_property
    def cell_graph(self) -> DomainGraph:
        return DomainGraph.from_edges(self.n_faces, self._cell_edges(), kind="mesh-cell")

    def graph(self, space: str) -> DomainGraph:
        if space == "vertex":
            return self.vertex_graph
        if space == "cell":
            return self.cell_graph
        raise ValueError(f"space must be 'vertex' or 'cell', got {space!r}")

    @property
    def boundary_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, o in self.edge_faces.items() if len(o) == 1)


def _text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return bytes(data).decode("utf-8")
    return data


def _content_lines(text: str):
    for num, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield num, line


def _floats(tokens, num, what):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise MeshFormatError(f"line {num}: bad {what} {' '.join(tokens)!r}") from None


def _ints(tokens, num, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise MeshFormatError(f"line {num}: bad {what} {' '.join(tokens)!r}") from None


def _fan(poly):
    return [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]


def load_off(data: bytes | str) -> TriMesh:
    """Parse an OFF file; polygons with more than three corners are fanned."""
    lines = _content_lines(_text(data))
    try:
        num, head = next(lines)
    except StopIteration:
        raise MeshFormatError("empty OFF input") from None
    tokens = head.split()
    if tokens[0] != "OFF":
        raise MeshFormatError(f"line {num}: expected 'OFF' header, got {tokens[0]!r}")
    tokens = tokens[1:]
    if not tokens:
        try:
            num, counts = next(lines)
        except StopIteration:
            raise MeshFormatError("missing counts line") from None
        tokens = counts.split()
    if len(tokens) < 2:
        raise MeshFormatError(f"line {num}: counts line needs vertex and face counts")
    nv, nf = _ints(tokens[:3] if len(tokens) >= 3 else tokens, num, "counts")[:2]
    verts, faces = [], []
    for _ in range(nv):
        try:
            num, line = next(lines)
        except StopIteration:
            raise MeshFormatError(f"expected {nv} vertices, found {len(verts)}") from None
        xyz = _floats(line.split()[:3], num, "vertex")
        if len(xyz) != 3:
            raise MeshFormatError(f"line {num}: vertex needs 3 coordinates")
        verts.append(xyz)
    for _ in range(nf):
        try:
            num, line = next(lines)
        except StopIteration:
            raise MeshFormatError(f"expected {nf} faces, found {len(faces)}") from None
        vals = _ints(line.split(), num, "face")
        k = vals[0] if vals else 0
        if k < 3 or len(vals) < k + 1:
            raise MeshFormatError(f"line {num}: malformed face record")
        poly = vals[1:k + 1]
        if any(not 0 <= p < nv for p in poly):
            raise MeshIndexError(f"line {num}: face index out of range 0..{nv - 1}")
        faces.extend(_fan(poly))
    return TriMesh(np.array(verts), np.array(faces))


def load_obj(data: bytes | str) -> TriMesh:
    """Parse ``v`` and ``f`` records of a Wavefront OBJ file.

    Face corners may be ``i``, ``i/t``, ``i//n`` or ``i/t/n``; negative
    indices count back from the latest vertex. Other records are ignored.
    """
    verts, faces = [], []
    for num, line in _content_lines(_text(data)):
        tokens = line.split()
        if tokens[0] == "v":
            xyz = _floats(tokens[1:4], num, "vertex")
            if len(xyz) != 3:
                raise MeshFormatError(f"line {num}: vertex needs 3 coordinates")
            verts.append(xyz)
        elif tokens[0] == "f":
            idx = _ints([t.split("/")[0] for t in tokens[1:]], num, "face")
            if len(idx) < 3:
                raise MeshFormatError(f"line {num}: face needs at least 3 vertices")
            poly = []
            for i in idx:
                p = i - 1 if i > 0 else len(verts) + i
                if i == 0 or not 0 <= p < len(verts):
                    raise MeshIndexError(f"line {num}: face index {i} out of range")
                poly.append(p)
            faces.extend(_fan(poly))
    if not verts:
        raise MeshFormatError("OBJ input has no vertices")
    return TriMesh(np.array(verts), np.array(faces))


def load_mesh(path: str | Path) -> TriMesh:
    path = Path(path)
    data = path.read_bytes()
    if path.suffix.lower() == ".obj":
        return load_obj(data)
    return load_off(data)


def write_off(mesh: TriMesh, path: str | Path) -> None:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {len(mesh.edge_faces)}"]
    lines += [" ".join(repr(float(c)) for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def write_obj(mesh: TriMesh, path: str | Path, vertex_values=None) -> None:
    """OBJ writer; ``vertex_values`` become grey vertex colours scaled to [0, 1]."""
    if vertex_values is None:
        grey = None
    else:
        vals = np.asarray(vertex_values, dtype=float)
        if len(vals) != mesh.n_vertices:
            raise ValueError("need one value per vertex")
        span = vals.max() - vals.min()
        grey = (vals - vals.min()) / span if span > 0 else np.full(len(vals), 0.5)
    lines = []
    for k, v in enumerate(mesh.vertices):
        rec = "v " + " ".join(repr(float(c)) for c in v)
        if grey is not None:
            g = repr(float(grey[k]))
            rec += f" {g} {g} {g}"
        lines.append(rec)
    lines += ["f " + " ".join(str(int(i) + 1) for i in f) for f in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def tetrahedron() -> TriMesh:
    v = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    f = [(0, 1, 2), (0, 3, 1), (0, 2, 3), (1, 3, 2)]
    return TriMesh(np.array(v, dtype=float), np.array(f))


def octahedron() -> TriMesh:
    v = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    f = [(0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
         (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5)]
    return TriMesh(np.array(v, dtype=float), np.array(f))


def icosphere(subdivisions: int = 2) -> TriMesh:
    """Unit icosphere with ``20 * 4**subdivisions`` faces."""
    t = (1 + 5 ** 0.5) / 2
    verts = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
             (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
             (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    verts = [np.array(p, dtype=float) / np.linalg.norm(p) for p in verts]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    for _ in range(subdivisions):
        mid: dict[tuple[int, int], int] = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in mid:
                p = verts[a] + verts[b]
                verts.append(p / np.linalg.norm(p))
                mid[key] = len(verts) - 1
            return mid[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new
    return TriMesh(np.array(verts), np.array(faces))
