"""Indexed triangle meshes: validation, edge adjacency, refinement, edge flips.

A :class:`TriMesh` is immutable after construction; operations that change
geometry or combinatorics (:func:`refine`, :func:`flip_edge`,
:meth:`TriMesh.with_vertices`) return new instances, so meshes can be shared
freely across threads.
"""

from __future__ import annotations

from collections import defaultdict

import numpy as np

# A face counts as degenerate when its area < factor * (longest edge)^2.
DEGENERATE_AREA_FACTOR = 1e-14


class MeshError(Exception):
    """Invalid mesh topology, geometry, or mesh file content."""


class ParseError(MeshError):
    """Mesh file could not be parsed; carries the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class NonManifoldError(MeshError):
    """An edge with more than two incident faces, or a pinched vertex star."""


class BoundaryEdgeError(MeshError):
    """Operation requires an interior edge or a closed mesh."""


class DegenerateFaceError(MeshError):
    """A face with (near-)zero area, or collinear input points."""


class FlipBlockedError(MeshError):
    """Edge flip refused: duplicate edge or degenerate (valence-3) endpoint."""


def face_normals(positions, faces, normalized=True):
    """Per-face normal vectors from the face vertex order.

    With ``normalized=False`` the cross products are returned as-is (their
    length is twice the face area).
    """
    p0 = positions[faces[:, 0]]
    p1 = positions[faces[:, 1]]
    p2 = positions[faces[:, 2]]
    n = np.cross(p1 - p0, p2 - p0)
    if normalized:
        norms = np.linalg.norm(n, axis=1)
        bad = norms <= 0.0
        if bad.any():
            raise DegenerateFaceError(
                f"cannot orient {int(bad.sum())} zero-area face(s)"
            )
        n = n / norms[:, None]
    return n


def face_areas(positions, faces):
    """Per-face triangle areas."""
    n = face_normals(positions, faces, normalized=False)
    return 0.5 * np.linalg.norm(n, axis=1)


def degenerate_face_mask(positions, faces, factor=DEGENERATE_AREA_FACTOR):
    """Boolean mask of faces whose area falls below ``factor * longest_edge**2``."""
    p0 = positions[faces[:, 0]]
    p1 = positions[faces[:, 1]]
    p2 = positions[faces[:, 2]]
    areas = 0.5 * np.linalg.norm(np.cross(p1 - p0, p2 - p0), axis=1)
    longest_sq = np.maximum(
        ((p1 - p0) ** 2).sum(axis=1),
        np.maximum(((p2 - p1) ** 2).sum(axis=1), ((p0 - p2) ** 2).sum(axis=1)),
    )
    return areas < factor * longest_sq


def bbox_diagonal(positions):
    """Length of the axis-aligned bounding-box diagonal of a point set."""
    return float(np.linalg.norm(np.ptp(positions, axis=0)))


class TriMesh:
    """Triangle mesh with per-edge adjacency.

    Parameters
    ----------
    vertices : (n, 3) array_like
        Euclidean vertex coordinates.
    faces : (m, 3) array_like
        Vertex-index triples. Consistent winding is detected, not required;
        the ``oriented`` flag records the outcome.
    genus : int, optional
        Declared genus; if given and the mesh is closed, the Euler relation
        ``V - E + F == 2 - 2 * genus`` is enforced.

    Attributes
    ----------
    vertices : (n, 3) float ndarray, read-only
    faces : (m, 3) int ndarray, read-only
    edges : (E, 2) int ndarray
        Undirected edges as canonically ordered pairs ``u < w``, sorted
        lexicographically.
    edge_faces : (E, 2) int ndarray
        Incident face indices per edge; slot 0 holds the face traversing
        ``u -> w``, slot 1 the face traversing ``w -> u``; -1 if absent.
    edge_opposite : (E, 2) int ndarray
        The vertex opposite the edge in the corresponding face slot; -1 if
        absent.
    closed : bool
        True when every edge has exactly two incident faces.
    oriented : bool
        True when the two faces of every interior edge traverse it in
        opposite directions.
    """

    def __init__(self, vertices, faces, genus=None):
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        faces = np.ascontiguousarray(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise MeshError(f"faces must be (m, 3), got {faces.shape}")
        if not np.isfinite(vertices).all():
            raise MeshError("vertex coordinates must be finite")
        self.vertices = vertices
        self.faces = faces
        self._validate_combinatorics()
        self._build_edge_adjacency()
        self._check_vertex_links()
        if genus is not None:
            expected = 2 - 2 * int(genus)
            if self.closed and self.euler_characteristic != expected:
                raise MeshError(
                    f"Euler characteristic {self.euler_characteristic} does not "
                    f"match declared genus {genus} (expected {expected})"
                )
        for arr in (self.vertices, self.faces, self.edges,
                    self.edge_faces, self.edge_opposite):
            arr.setflags(write=False)

    # -- construction helpers -------------------------------------------------

    def _validate_combinatorics(self):
        n, faces = len(self.vertices), self.faces
        if len(faces) == 0:
            raise MeshError("mesh has no faces")
        if faces.min(initial=0) < 0 or faces.max(initial=-1) >= n:
            raise MeshError("face vertex index out of range")
        same = (
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 2] == faces[:, 0])
        )
        if same.any():
            raise MeshError(
                f"face {int(np.flatnonzero(same)[0])} has repeated vertex indices"
            )
        referenced = np.zeros(n, dtype=bool)
        referenced[faces.ravel()] = True
        if not referenced.all():
            raise MeshError(
                f"unreferenced vertices: {np.flatnonzero(~referenced).tolist()[:8]}"
            )
        sorted_faces = np.sort(faces, axis=1)
        if len(np.unique(sorted_faces, axis=0)) != len(faces):
            raise MeshError("duplicate faces (same vertex set)")

    def _build_edge_adjacency(self):
        n, faces = len(self.vertices), self.faces
        m = len(faces)
        src = faces[:, [0, 1, 2]].reshape(-1)
        dst = faces[:, [1, 2, 0]].reshape(-1)
        opp = faces[:, [2, 0, 1]].reshape(-1)
        fid = np.repeat(np.arange(m, dtype=np.int64), 3)
        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        key = lo * np.int64(n) + hi
        order = np.argsort(key, kind="stable")
        uniq, start, counts = np.unique(key[order], return_index=True,
                                        return_counts=True)
        if counts.max(initial=0) > 2:
            bad = uniq[counts > 2][0]
            raise NonManifoldError(
                f"edge ({bad // n}, {bad % n}) has {counts.max()} incident faces"
            )
        ne = len(uniq)
        self.edges = np.column_stack((uniq // n, uniq % n))
        self.edge_faces = np.full((ne, 2), -1, dtype=np.int64)
        self.edge_opposite = np.full((ne, 2), -1, dtype=np.int64)

        rows = np.arange(ne)
        first = order[start]
        slot = np.where(src[first] < dst[first], 0, 1)
        self.edge_faces[rows, slot] = fid[first]
        self.edge_opposite[rows, slot] = opp[first]

        has2 = counts == 2
        second = order[start[has2] + 1]
        rows2 = rows[has2]
        slot2 = np.where(src[second] < dst[second], 0, 1)
        # Same traversal direction twice means inconsistent winding; park the
        # second face in the free slot and clear the oriented flag.
        collision = self.edge_faces[rows2, slot2] >= 0
        slot2 = np.where(collision, 1 - slot2, slot2)
        self.edge_faces[rows2, slot2] = fid[second]
        self.edge_opposite[rows2, slot2] = opp[second]

        self.closed = bool(has2.all())
        self.oriented = not bool(collision.any())
        self._edge_index = {
            (int(u), int(w)): i for i, (u, w) in enumerate(self.edges)
        }

    def _check_vertex_links(self):
        # The link of every vertex must be a single simple path or cycle;
        # anything else is a pinched (non-manifold) vertex.
        star = defaultdict(list)
        for f in self.faces:
            i, j, k = (int(f[0]), int(f[1]), int(f[2]))
            star[i].append((j, k))
            star[j].append((k, i))
            star[k].append((i, j))
        for v, link_edges in star.items():
            nbr = defaultdict(list)
            for a, b in link_edges:
                nbr[a].append(b)
                nbr[b].append(a)
            if any(len(t) > 2 for t in nbr.values()):
                raise NonManifoldError(f"vertex {v} has a non-manifold star")
            ends = [a for a, t in nbr.items() if len(t) == 1]
            if len(ends) not in (0, 2):
                raise NonManifoldError(f"vertex {v} has a non-manifold star")
            start = ends[0] if ends else next(iter(nbr))
            seen = {start}
            prev, cur = None, start
            while True:
                nxt = [t for t in nbr[cur] if t != prev]
                if not nxt or nxt[0] in seen and nxt[0] != start:
                    break
                prev, cur = cur, nxt[0]
                if cur == start:
                    break
                seen.add(cur)
            if len(seen) != len(nbr):
                raise NonManifoldError(f"vertex {v} has a disconnected star")

    # -- basic queries ---------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    @property
    def genus(self):
        """Genus of a closed oriented mesh, ``None`` otherwise."""
        if not (self.closed and self.oriented):
            return None
        return (2 - self.euler_characteristic) // 2

    def edge_id(self, edge):
        """Normalize an edge reference (row index or vertex pair) to a row index."""
        if isinstance(edge, (int, np.integer)):
            if not 0 <= edge < self.n_edges:
                raise MeshError(f"edge index {edge} out of range")
            return int(edge)
        u, w = int(edge[0]), int(edge[1])
        key = (u, w) if u < w else (w, u)
        try:
            return self._edge_index[key]
        except KeyError:
            raise MeshError(f"no edge {key} in mesh") from None

    def edge_is_interior(self, edge):
        e = self.edge_id(edge)
        return bool((self.edge_faces[e] >= 0).all())

    def boundary_edge_rows(self):
        return np.flatnonzero((self.edge_faces < 0).any(axis=1))

    def vertex_edge_rows(self, v):
        """Row indices of all edges incident to vertex ``v``."""
        if not 0 <= v < self.n_vertices:
            raise MeshError(f"vertex index {v} out of range")
        return np.flatnonzero((self.edges == v).any(axis=1))

    def vertex_valences(self):
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def bbox_diagonal(self):
        return bbox_diagonal(self.vertices)

    def face_normals(self, normalized=True):
        return face_normals(self.vertices, self.faces, normalized=normalized)

    def face_areas(self):
        return face_areas(self.vertices, self.faces)

    def degenerate_faces(self, factor=DEGENERATE_AREA_FACTOR):
        """Row indices of degenerate faces."""
        return np.flatnonzero(degenerate_face_mask(self.vertices, self.faces, factor))

    def with_vertices(self, vertices):
        """New mesh with the same combinatorics and different vertex positions."""
        vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        if vertices.shape != self.vertices.shape:
            raise MeshError(
                f"expected vertices of shape {self.vertices.shape}, "
                f"got {vertices.shape}"
            )
        if not np.isfinite(vertices).all():
            raise MeshError("vertex coordinates must be finite")
        clone = object.__new__(TriMesh)
        clone.vertices = vertices
        clone.faces = self.faces
        clone.edges = self.edges
        clone.edge_faces = self.edge_faces
        clone.edge_opposite = self.edge_opposite
        clone.closed = self.closed
        clone.oriented = self.oriented
        clone._edge_index = self._edge_index
        vertices.setflags(write=False)
        return clone

    def same_combinatorics(self, other):
        return np.array_equal(self.faces, other.faces)

    def __repr__(self):
        return (
            f"TriMesh(V={self.n_vertices}, E={self.n_edges}, F={self.n_faces}, "
            f"closed={self.closed}, oriented={self.oriented})"
        )


def refine(mesh):
    """One 1-to-4 refinement step: midpoint per edge, each face split into four.

    Counts transform as ``V' = V + E``, ``E' = 2E + 3F``, ``F' = 4F``; the
    Euler characteristic and closedness are preserved.
    """
    verts = [mesh.vertices[i] for i in range(mesh.n_vertices)]
    midpoint = {}

    def mid(i, j):
        key = (i, j) if i < j else (j, i)
        idx = midpoint.get(key)
        if idx is None:
            idx = len(verts)
            verts.append(0.5 * (mesh.vertices[i] + mesh.vertices[j]))
            midpoint[key] = idx
        return idx

    new_faces = []
    for i, j, k in mesh.faces.tolist():
        a, b, c = mid(i, j), mid(j, k), mid(k, i)
        new_faces += [(i, a, c), (j, b, a), (k, c, b), (a, b, c)]
    return TriMesh(np.asarray(verts), np.asarray(new_faces, dtype=np.int64))


def flip_edge(mesh, edge):
    """Flip an interior edge ``(u, w)`` to the opposite diagonal ``(p, q)``.

    Vertex positions are untouched. The flip is refused
    (:class:`FlipBlockedError`) when ``p`` and ``q`` are already joined by an
    edge or when an endpoint has valence 3, either of which would break the
    simplicial structure.
    """
    e = mesh.edge_id(edge)
    if not mesh.edge_is_interior(e):
        raise BoundaryEdgeError(f"edge {tuple(mesh.edges[e])} is a boundary edge")
    u, w = (int(x) for x in mesh.edges[e])
    p, q = (int(x) for x in mesh.edge_opposite[e])
    key = (p, q) if p < q else (q, p)
    if key in mesh._edge_index:
        # An interior valence-3 endpoint always lands here: its link is the
        # triangle (w, p, q), so p and q are already adjacent.
        raise FlipBlockedError(
            f"flip of ({u}, {w}) blocked: opposite vertices {key} already adjacent"
        )
    f1, f2 = (int(x) for x in mesh.edge_faces[e])
    faces = mesh.faces.copy()
    # Replacing w by q in face 1 and u by p in face 2 keeps every outer edge's
    # traversal direction, so winding consistency is preserved.
    faces[f1] = [q if v == w else v for v in faces[f1]]
    faces[f2] = [p if v == u else v for v in faces[f2]]
    try:
        return TriMesh(mesh.vertices, faces)
    except MeshError as exc:
        raise FlipBlockedError(f"flip of ({u}, {w}) would break the mesh: {exc}") from exc
