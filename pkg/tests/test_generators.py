import numpy as np
import pytest

from dwillmore import (
    bipyramid,
    generate,
    icosahedron,
    octahedron,
    random_inscribed,
    steinitz11,
    steinitz_from,
    subdivided_sphere,
    tetrahedron,
    torus,
)


@pytest.mark.parametrize(
    "factory,counts",
    [
        (tetrahedron, (4, 6, 4)),
        (octahedron, (6, 12, 8)),
        (icosahedron, (12, 30, 20)),
        (lambda: bipyramid(3), (5, 9, 6)),
        (lambda: subdivided_sphere(2), (162, 480, 320)),
    ],
)
def test_sphere_generator_counts(factory, counts):
    mesh = factory()
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == counts
    assert mesh.closed and mesh.oriented and mesh.genus == 0
    radii = np.linalg.norm(mesh.vertices, axis=1)
    assert np.abs(radii - 1.0).max() < 1e-12


def test_generators_are_outward_oriented():
    for mesh in (tetrahedron(), octahedron(), icosahedron()):
        normals = mesh.face_normals()
        centroids = mesh.vertices[mesh.faces].mean(axis=1)
        inner = mesh.vertices.mean(axis=0)
        assert ((normals * (centroids - inner)).sum(axis=1) > 0).all()


def test_torus_faces_point_away_from_tube():
    mesh = torus(10, 6, major_radius=1.0, minor_radius=0.4)
    normals = mesh.face_normals()
    centroids = mesh.vertices[mesh.faces].mean(axis=1)
    angles = np.arctan2(centroids[:, 1], centroids[:, 0])
    ring = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(len(angles))])
    assert ((normals * (centroids - ring)).sum(axis=1) > 0).all()


def test_steinitz11_structure():
    mesh = steinitz11()
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (11, 27, 18)
    assert mesh.euler_characteristic == 2
    black = set(range(5))
    white = set(range(5, 11))
    assert len(white) == 6 and len(black) == 5
    black_black = [
        e for e in mesh.edges.tolist() if e[0] in black and e[1] in black
    ]
    white_white = [
        e for e in mesh.edges.tolist() if e[0] in white and e[1] in white
    ]
    assert len(black_black) == 9  # all bipyramid edges retained
    assert not white_white
    assert np.abs(np.linalg.norm(mesh.vertices[5:], axis=1) - 1.05).max() < 1e-12


def test_steinitz_from_octahedron_counts():
    mesh = steinitz_from(octahedron())
    # 6 black + 8 white vertices, no white-white edges
    assert mesh.n_vertices == 14
    assert mesh.n_faces == 3 * 8
    white = set(range(6, 14))
    assert not [e for e in mesh.edges.tolist() if e[0] in white and e[1] in white]


def test_random_inscribed_on_unit_sphere():
    mesh = random_inscribed(100, seed=7)
    assert mesh.closed and mesh.n_vertices == 100
    assert np.abs(np.linalg.norm(mesh.vertices, axis=1) - 1.0).max() < 1e-12
    again = random_inscribed(100, seed=7)
    assert np.array_equal(mesh.vertices, again.vertices)
    assert np.array_equal(mesh.faces, again.faces)


def test_random_inscribed_needs_four_points():
    with pytest.raises(ValueError):
        random_inscribed(3, seed=0)


def test_torus_counts_and_genus():
    mesh = torus(9, 5)
    assert mesh.n_vertices == 45
    assert mesh.n_faces == 90
    assert mesh.n_edges == 135
    assert mesh.euler_characteristic == 0
    assert mesh.genus == 1
    assert mesh.closed and mesh.oriented


def test_generate_dispatcher():
    assert generate("tetrahedron").n_vertices == 4
    assert generate("subdivided_sphere", level=1).n_vertices == 42
    assert generate("random_inscribed", n=30, seed=1).n_vertices == 30
    assert generate("bipyramid", n=5).n_vertices == 7
    with pytest.raises(ValueError):
        generate("moebius_strip")
    with pytest.raises(ValueError):
        generate("random_inscribed")  # n required
    with pytest.raises(ValueError):
        generate("subdivided_sphere", level=-1)
