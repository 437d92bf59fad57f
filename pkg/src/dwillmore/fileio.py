"""OFF and OBJ mesh file reading and writing.

OFF is the canonical format: an ``OFF`` header, a counts line, one line of
three coordinates per vertex, and one ``3 i j k`` line per face. OBJ support
covers ``v``/``f`` records only. Floats are serialized with 17 significant
digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import io
import os
from pathlib import Path

import numpy as np

from .mesh import ParseError, TriMesh

FLOAT_FMT = ".17g"


def _fmt(x):
    return format(float(x), FLOAT_FMT)


def _infer_format(path):
    ext = Path(path).suffix.lower()
    if ext == ".off":
        return "off"
    if ext == ".obj":
        return "obj"
    raise ValueError(f"cannot infer mesh format from {path!r}; pass format=")


def _fan_triangulate(indices, line, triangulate):
    if len(indices) == 3:
        return [tuple(indices)]
    if not triangulate:
        raise ParseError(
            f"face with {len(indices)} vertices (pass triangulate=True to fan)",
            line,
        )
    return [(indices[0], indices[i], indices[i + 1])
            for i in range(1, len(indices) - 1)]


def _parse_off(lines, triangulate):
    content = [
        (i + 1, ln.strip()) for i, ln in enumerate(lines)
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(content):
            raise ParseError(f"unexpected end of file, expected {what}",
                             content[-1][0] if content else 1)
        item = content[pos]
        pos += 1
        return item

    line_no, header = take("OFF header")
    if header != "OFF":
        raise ParseError(f"expected 'OFF' header, got {header!r}", line_no)
    line_no, counts = take("counts line")
    tokens = counts.split()
    if len(tokens) != 3:
        raise ParseError("counts line must be 'nv nf ne'", line_no)
    try:
        nv, nf = int(tokens[0]), int(tokens[1])
    except ValueError:
        raise ParseError("counts must be integers", line_no) from None

    vertices = np.empty((nv, 3), dtype=np.float64)
    for i in range(nv):
        line_no, text = take(f"vertex {i}")
        parts = text.split()
        if len(parts) != 3:
            raise ParseError(f"vertex line must have 3 coordinates, got {len(parts)}",
                             line_no)
        try:
            vertices[i] = [float(t) for t in parts]
        except ValueError:
            raise ParseError("invalid vertex coordinate", line_no) from None

    faces = []
    for i in range(nf):
        line_no, text = take(f"face {i}")
        parts = text.split()
        try:
            k = int(parts[0])
        except (ValueError, IndexError):
            raise ParseError("face line must start with a vertex count", line_no) from None
        if len(parts) != k + 1:
            raise ParseError(
                f"face line declares {k} vertices but has {len(parts) - 1}", line_no
            )
        try:
            idx = [int(t) for t in parts[1:]]
        except ValueError:
            raise ParseError("invalid face index", line_no) from None
        faces += _fan_triangulate(idx, line_no, triangulate)
    return vertices, faces


def _parse_obj(lines, triangulate):
    vertices = []
    faces = []
    for line_no, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        record, _, rest = text.partition(" ")
        if record == "v":
            parts = rest.split()
            if len(parts) != 3:
                raise ParseError(f"'v' record needs 3 coordinates, got {len(parts)}",
                                 line_no)
            try:
                vertices.append([float(t) for t in parts])
            except ValueError:
                raise ParseError("invalid vertex coordinate", line_no) from None
        elif record == "f":
            refs = rest.split()
            if len(refs) < 3:
                raise ParseError("'f' record needs at least 3 indices", line_no)
            idx = []
            for ref in refs:
                head = ref.split("/")[0]
                try:
                    value = int(head)
                except ValueError:
                    raise ParseError(f"invalid face index {ref!r}", line_no) from None
                if value <= 0:
                    raise ParseError("only positive 1-based indices are supported",
                                     line_no)
                idx.append(value - 1)
            faces += _fan_triangulate(idx, line_no, triangulate)
        # all other record types (vn, vt, s, g, o, usemtl, ...) are ignored
    if not vertices:
        raise ParseError("no 'v' records found", 1)
    return np.asarray(vertices, dtype=np.float64), faces


def load_mesh(source, format=None, triangulate=False):
    """Load a triangle mesh from an OFF or OBJ file.

    Parameters
    ----------
    source : str, Path, or text stream
        File path, or an open text stream (``format`` is then required).
    format : {"off", "obj"}, optional
        Inferred from the file extension when omitted.
    triangulate : bool
        Fan-triangulate polygonal faces instead of rejecting them.

    Returns
    -------
    TriMesh
        Validated mesh with adjacency built; closedness and orientability
        flags are set from inspection.
    """
    if isinstance(source, (str, os.PathLike)):
        fmt = format or _infer_format(source)
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    else:
        if format is None:
            raise ValueError("format= is required when loading from a stream")
        fmt = format
        lines = source.read().splitlines()
    fmt = fmt.lower()
    if fmt == "off":
        vertices, faces = _parse_off(lines, triangulate)
    elif fmt == "obj":
        vertices, faces = _parse_obj(lines, triangulate)
    else:
        raise ValueError(f"unknown mesh format {fmt!r}")
    if not faces:
        raise ParseError("mesh has no faces", 1)
    return TriMesh(vertices, np.asarray(faces, dtype=np.int64))


def dumps_mesh(mesh, format="off"):
    """Serialize a mesh to an OFF or OBJ string."""
    out = io.StringIO()
    fmt = format.lower()
    if fmt == "off":
        out.write("OFF\n")
        out.write(f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}\n")
        for v in mesh.vertices:
            out.write(f"{_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for f in mesh.faces:
            out.write(f"3 {f[0]} {f[1]} {f[2]}\n")
    elif fmt == "obj":
        for v in mesh.vertices:
            out.write(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}\n")
        for f in mesh.faces:
            out.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")
    else:
        raise ValueError(f"unknown mesh format {format!r}")
    return out.getvalue()


def save_mesh(mesh, target, format=None):
    """Write a mesh to a file path or text stream (OFF or OBJ)."""
    if isinstance(target, (str, os.PathLike)):
        fmt = format or _infer_format(target)
        with open(target, "w", encoding="utf-8") as fh:
            fh.write(dumps_mesh(mesh, fmt))
    else:
        if format is None:
            raise ValueError("format= is required when saving to a stream")
        target.write(dumps_mesh(mesh, format))
