import numpy as np
import pytest

from gvfit.mesh import (
    DisconnectedMeshError,
    MeshFormatError,
    MeshIndexError,
    NonManifoldError,
    TriMesh,
    icosphere,
    load_mesh,
    load_obj,
    load_off,
    octahedron,
    write_obj,
    write_off,
)

from conftest import TETRA_OFF


def complete(n):
    return {(a, b) for a in range(n) for b in range(a + 1, n)}


def edge_set(g):
    return {tuple(e) for e in g.edges.tolist()}


def test_tetra_graphs_complete():
    m = load_off(TETRA_OFF.encode())
    assert m.n_vertices == 4 and m.n_faces == 4
    assert edge_set(m.vertex_graph) == complete(4)
    assert edge_set(m.cell_graph) == complete(4)
    assert m.vertex_graph.kind == "mesh-vertex"
    assert m.cell_graph.kind == "mesh-cell"


def test_octahedron_cell_degree_three():
    m = octahedron()
    assert m.n_vertices == 6 and m.n_faces == 8
    assert m.cell_graph.degrees.tolist() == [3] * 8
    assert m.vertex_graph.degrees.tolist() == [4] * 6
    assert m.boundary_edges == []


def test_icosphere_counts():
    m = icosphere(2)
    assert (m.n_vertices, m.n_faces, len(m.edge_faces)) == (162, 320, 480)
    assert np.allclose(np.linalg.norm(m.vertices, axis=1), 1.0)
    assert set(m.cell_graph.degrees.tolist()) == {3}


def test_non_manifold_edge():
    off = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n"
    with pytest.raises(NonManifoldError):
        load_off(off)


def test_malformed_header():
    with pytest.raises(MeshFormatError, match="OFF"):
        load_off("COFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    with pytest.raises(MeshFormatError):
        load_off("")
    with pytest.raises(MeshFormatError):
        load_off("OFF\n3 1 0\n0 0 0\n1 0 0\n")


def test_index_out_of_range():
    with pytest.raises(MeshIndexError):
        load_off("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 5\n")
    with pytest.raises(MeshIndexError):
        load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n")


def test_disconnected_vertex_graph():
    # vertex 3 is not used by any face
    with pytest.raises(DisconnectedMeshError, match="vertex graph"):
        load_off("OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n5 5 5\n3 0 1 2\n")


def test_disconnected_cell_graph():
    # two triangles touching at a single vertex
    off = "OFF\n5 2 0\n0 0 0\n1 0 0\n0 1 0\n-1 0 0\n0 -1 0\n3 0 1 2\n3 0 3 4\n"
    with pytest.raises(DisconnectedMeshError, match="cell graph"):
        load_off(off)


def test_degenerate_face():
    with pytest.raises(MeshIndexError):
        TriMesh(np.zeros((3, 3)), [[0, 1, 1]])


def test_off_comments_blank_lines_and_quads():
    off = "# header comment\nOFF\n\n4 1 0\n0 0 0 # corner\n1 0 0\n1 1 0\n0 1 0\n\n4 0 1 2 3\n"
    m = load_off(off)
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]
    assert m.boundary_edges == [(0, 1), (0, 3), (1, 2), (2, 3)]


def test_obj_fan_and_slashes():
    obj = b"# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3//1 4\n"
    m = load_obj(obj)
    assert m.faces.tolist() == [[0, 1, 2], [0, 2, 3]]
    neg = load_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    assert neg.faces.tolist() == [[0, 1, 2]]


def test_off_round_trip(tmp_path):
    for m in (load_off(TETRA_OFF), octahedron(), icosphere(2)):
        path = tmp_path / "m.off"
        write_off(m, path)
        back = load_off(path.read_bytes())
        assert np.array_equal(back.faces, m.faces)
        assert np.array_equal(back.vertices, m.vertices)
        assert edge_set(back.cell_graph) == edge_set(m.cell_graph)


def test_obj_writer_colours(tmp_path):
    m = load_off(TETRA_OFF)
    path = tmp_path / "m.obj"
    write_obj(m, path, [0.0, 1.0, 2.0, 4.0])
    lines = path.read_text().splitlines()
    assert lines[0] == "v 1.0 1.0 1.0 0.0 0.0 0.0"
    assert lines[3] == "v -1.0 -1.0 1.0 1.0 1.0 1.0"
    assert lines[1].endswith(" 0.25 0.25 0.25")
    back = load_mesh(path)
    assert np.array_equal(back.faces, m.faces)
