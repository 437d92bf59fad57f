import io

import numpy as np
import pytest

from dwillmore import (
    NonManifoldError,
    ParseError,
    dumps_mesh,
    load_mesh,
    perturb,
    save_mesh,
    subdivided_sphere,
    tetrahedron,
)

TETRA_OFF = """OFF
4 4 6
0 0 0
1 0 0
0 1 0
0 0 1
3 0 2 1
3 0 1 3
3 0 3 2
3 1 2 3
"""


def test_load_off_tetrahedron(tmp_path):
    path = tmp_path / "tet.off"
    path.write_text(TETRA_OFF)
    mesh = load_mesh(path)
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_faces) == (4, 6, 4)
    assert mesh.closed


def test_load_off_single_triangle_open(tmp_path):
    path = tmp_path / "tri.off"
    path.write_text("OFF\n3 1 3\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n")
    mesh = load_mesh(path)
    assert not mesh.closed
    assert len(mesh.boundary_edge_rows()) == 3


def test_load_nonmanifold_raises(tmp_path):
    path = tmp_path / "bad.off"
    path.write_text(
        "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n"
    )
    with pytest.raises(NonManifoldError):
        load_mesh(path)


@pytest.mark.parametrize(
    "text,line",
    [
        ("FOO\n1 0 0\n", 1),
        ("OFF\n4 4\n", 2),
        ("OFF\n1 1 0\n0 0 zz\n3 0 0 0\n", 3),
        ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1\n", 6),
    ],
)
def test_off_parse_errors_carry_line_numbers(text, line, tmp_path):
    path = tmp_path / "bad.off"
    path.write_text(text)
    with pytest.raises(ParseError) as err:
        load_mesh(path)
    assert err.value.line == line


def test_polygon_faces_need_triangulate_flag(tmp_path):
    quad = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    path = tmp_path / "quad.off"
    path.write_text(quad)
    with pytest.raises(ParseError):
        load_mesh(path)
    mesh = load_mesh(path, triangulate=True)
    assert mesh.n_faces == 2


def test_round_trip_off_bit_exact(tmp_path):
    mesh = perturb(subdivided_sphere(1), 0.07, seed=3)
    path = tmp_path / "mesh.off"
    save_mesh(mesh, path)
    again = load_mesh(path)
    assert np.array_equal(again.vertices, mesh.vertices)
    assert np.array_equal(again.faces, mesh.faces)
    save_mesh(again, tmp_path / "mesh2.off")
    assert (tmp_path / "mesh.off").read_bytes() == (tmp_path / "mesh2.off").read_bytes()


def test_round_trip_obj(tmp_path):
    mesh = perturb(tetrahedron(), 0.1, seed=1)
    path = tmp_path / "mesh.obj"
    save_mesh(mesh, path)
    again = load_mesh(path)
    assert np.array_equal(again.vertices, mesh.vertices)
    assert np.array_equal(again.faces, mesh.faces)


def test_obj_ignores_other_records_and_slashed_indices(tmp_path):
    path = tmp_path / "m.obj"
    path.write_text(
        "# comment\nmtllib foo.mtl\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\n"
        "vt 0 0\nf 1/1/1 2/2/1 3//1\n"
    )
    mesh = load_mesh(path)
    assert mesh.n_faces == 1


def test_obj_rejects_nonpositive_indices(tmp_path):
    path = tmp_path / "m.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n")
    with pytest.raises(ParseError):
        load_mesh(path)


def test_save_to_unwritable_path_raises():
    with pytest.raises(OSError):
        save_mesh(tetrahedron(), "/nonexistent-dir/mesh.off")


def test_stream_round_trip_requires_format():
    mesh = tetrahedron()
    text = dumps_mesh(mesh, "off")
    with pytest.raises(ValueError):
        load_mesh(io.StringIO(text))
    again = load_mesh(io.StringIO(text), format="off")
    assert np.array_equal(again.vertices, mesh.vertices)


def test_format_inference_rejects_unknown_extension(tmp_path):
    with pytest.raises(ValueError):
        load_mesh(tmp_path / "mesh.stl")
