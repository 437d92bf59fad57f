import numpy as np
import pytest

from dwillmore import (
    BoundaryEdgeError,
    FlipBlockedError,
    MeshError,
    NonManifoldError,
    TriMesh,
    flip_edge,
    icosahedron,
    refine,
    steinitz11,
    tetrahedron,
    torus,
)

SQUARE_VERTS = np.array(
    [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]]
)
SQUARE_FACES = np.array([[0, 2, 3], [2, 0, 1]])  # split along diagonal 0-2


def test_tetrahedron_combinatorics():
    mesh = tetrahedron()
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (4, 6, 4)
    assert mesh.closed and mesh.oriented
    assert mesh.euler_characteristic == 2
    assert mesh.genus == 0


def test_single_triangle_is_open():
    mesh = TriMesh(np.eye(3), [[0, 1, 2]])
    assert not mesh.closed
    assert len(mesh.boundary_edge_rows()) == 3


def test_nonmanifold_edge_rejected():
    verts = np.array(
        [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
    )
    faces = [[0, 1, 2], [0, 1, 3], [0, 1, 4]]  # edge (0,1) on three faces
    with pytest.raises(NonManifoldError):
        TriMesh(verts, faces)


def test_pinched_vertex_rejected():
    # two triangle fans meeting only at vertex 0
    verts = np.zeros((7, 3))
    verts[1:] = np.random.default_rng(0).standard_normal((6, 3))
    faces = [[0, 1, 2], [0, 2, 3], [0, 3, 1], [0, 4, 5], [0, 5, 6], [0, 6, 4]]
    with pytest.raises(NonManifoldError):
        TriMesh(verts, faces)


@pytest.mark.parametrize(
    "faces",
    [
        [[0, 1, 1]],  # repeated index
        [[0, 1, 7]],  # out of range
        [[0, 1, 2], [2, 1, 0]],  # duplicate face set
    ],
)
def test_invalid_faces_rejected(faces):
    with pytest.raises(MeshError):
        TriMesh(np.eye(3), faces)


def test_unreferenced_vertex_rejected():
    verts = np.vstack([np.eye(3), [5.0, 5.0, 5.0]])
    with pytest.raises(MeshError, match="unreferenced"):
        TriMesh(verts, [[0, 1, 2]])


def test_adjacency_symmetry():
    mesh = icosahedron()
    for e in range(mesh.n_edges):
        u, w = mesh.edges[e]
        for slot in range(2):
            f = mesh.edge_faces[e, slot]
            face = set(mesh.faces[f].tolist())
            assert {int(u), int(w)} <= face
            assert int(mesh.edge_opposite[e, slot]) == (face - {int(u), int(w)}).pop()


def test_edge_slots_follow_traversal_direction():
    mesh = tetrahedron()
    for e in range(mesh.n_edges):
        u, w = (int(x) for x in mesh.edges[e])
        f_uw = mesh.faces[mesh.edge_faces[e, 0]].tolist()
        i = f_uw.index(u)
        assert f_uw[(i + 1) % 3] == w  # slot 0 face traverses u -> w
        f_wu = mesh.faces[mesh.edge_faces[e, 1]].tolist()
        j = f_wu.index(w)
        assert f_wu[(j + 1) % 3] == u


def test_refine_counts_tetrahedron():
    fine = refine(tetrahedron())
    assert (fine.n_vertices, fine.n_edges, fine.n_faces) == (10, 24, 16)
    assert fine.euler_characteristic == 2
    assert fine.closed


def test_refine_counts_steinitz11():
    fine = refine(steinitz11())
    assert (fine.n_vertices, fine.n_edges, fine.n_faces) == (38, 108, 72)
    assert fine.euler_characteristic == 2


def test_refine_preserves_closedness_and_genus():
    donut = torus(8, 6)
    fine = refine(donut)
    assert fine.closed
    assert fine.euler_characteristic == 0
    assert fine.genus == 1
    open_mesh = TriMesh(np.eye(3), [[0, 1, 2]])
    assert not refine(open_mesh).closed


def test_flip_square_diagonal():
    mesh = TriMesh(SQUARE_VERTS, SQUARE_FACES)
    flipped = flip_edge(mesh, (0, 2))
    facesets = {frozenset(f.tolist()) for f in flipped.faces}
    assert facesets == {frozenset({0, 1, 3}), frozenset({1, 2, 3})}
    assert np.array_equal(flipped.vertices, mesh.vertices)


def test_flip_is_involution():
    mesh = TriMesh(SQUARE_VERTS, SQUARE_FACES)
    back = flip_edge(flip_edge(mesh, (0, 2)), (1, 3))
    assert {frozenset(f.tolist()) for f in back.faces} == {
        frozenset(f.tolist()) for f in mesh.faces
    }


def test_flip_blocked_on_duplicate_edge():
    mesh = tetrahedron()  # every pair of vertices is already an edge
    with pytest.raises(FlipBlockedError):
        flip_edge(mesh, 0)


def test_flip_boundary_edge_rejected():
    mesh = TriMesh(SQUARE_VERTS, SQUARE_FACES)
    with pytest.raises(BoundaryEdgeError):
        flip_edge(mesh, (0, 1))


def test_flip_preserves_euler_and_orientation():
    mesh = refine(icosahedron())
    e = mesh.edge_id((0, mesh.n_vertices - 1)) if (0, mesh.n_vertices - 1) in mesh._edge_index else 0
    flipped = flip_edge(mesh, e)
    assert flipped.euler_characteristic == mesh.euler_characteristic
    assert flipped.oriented
    assert flipped.closed


def test_vertices_are_immutable():
    mesh = tetrahedron()
    with pytest.raises(ValueError):
        mesh.vertices[0, 0] = 7.0


def test_with_vertices_shares_combinatorics():
    mesh = tetrahedron()
    moved = mesh.with_vertices(mesh.vertices * 2.0)
    assert moved.edges is mesh.edges
    assert np.allclose(moved.vertices, mesh.vertices * 2.0)
    with pytest.raises(MeshError):
        mesh.with_vertices(np.zeros((3, 3)))


def test_declared_genus_checked():
    with pytest.raises(MeshError):
        TriMesh(tetrahedron().vertices, tetrahedron().faces, genus=1)
