"""Circumcircle intersection angles and the conformal surface energy.

For an interior edge ``e = (u, w)`` with opposite vertices ``p`` (in the face
traversing ``u -> w``) and ``q`` (in the face traversing ``w -> u``), the four
oriented quadrilateral edges are::

    a = u - p,  b = q - u,  c = w - q,  d = p - w

and the external intersection angle of the two circumcircles is::

    beta = arccos( (<a,c><b,d> - <a,b><c,d> - <b,c><d,a>) / (|a||b||c||d|) )

The per-vertex energy is ``W(v) = sum_{e at v} beta(e) - 2*pi`` and the total
energy ``W = sum_e beta(e) - pi * |V| = (1/2) sum_v W(v)``. The total is
invariant under Moebius transformations, non-negative, and zero exactly for
convex polyhedra inscribed in a sphere.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .mesh import (
    BoundaryEdgeError,
    DegenerateFaceError,
    TriMesh,
    degenerate_face_mask,
)

REPORT_VERSION = 1


@dataclass(frozen=True, eq=False)
class EdgeQuad:
    """The four oriented edge vectors around an interior edge."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray


@dataclass(frozen=True, eq=False)
class CircleAngleOracleResult:
    """Geometric circumcircle-intersection answer, independent of the
    quadrilateral dot-product formula."""

    beta: float
    circumcenters: np.ndarray  # (2, 3)
    circumradii: np.ndarray  # (2,)


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """Per-edge angles, per-vertex energies, and the total energy.

    ``edges`` and ``per_edge_beta`` are aligned arrays; edges are canonical
    ``u < w`` pairs in lexicographic order.
    """

    edges: np.ndarray  # (E, 2) int
    per_edge_beta: np.ndarray  # (E,) float
    per_vertex_energy: np.ndarray  # (n,) float
    total: float
    vertex_count: int

    def edge_beta_map(self):
        return {
            (int(u), int(w)): float(b)
            for (u, w), b in zip(self.edges, self.per_edge_beta)
        }

    def to_json(self):
        doc = {
            "version": REPORT_VERSION,
            "total": self.total,
            "vertex_count": self.vertex_count,
            "per_vertex": [float(x) for x in self.per_vertex_energy],
            "per_edge": [
                {"edge": [int(u), int(w)], "beta": float(b)}
                for (u, w), b in zip(self.edges, self.per_edge_beta)
            ],
        }
        return json.dumps(doc, indent=2) + "\n"

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["u", "w", "beta"])
        for (u, w), b in zip(self.edges, self.per_edge_beta):
            writer.writerow([int(u), int(w), repr(float(b))])
        return out.getvalue()


def _check_nondegenerate(mesh, positions=None):
    positions = mesh.vertices if positions is None else positions
    mask = degenerate_face_mask(positions, mesh.faces)
    if mask.any():
        raise DegenerateFaceError(
            f"{int(mask.sum())} degenerate face(s), first at row "
            f"{int(np.flatnonzero(mask)[0])}"
        )


def _quad_vectors(positions, edges, opposites):
    u = positions[edges[:, 0]]
    w = positions[edges[:, 1]]
    p = positions[opposites[:, 0]]
    q = positions[opposites[:, 1]]
    return u - p, q - u, w - q, p - w


def _beta_arrays(a, b, c, d):
    """Vectorized intersection angle for stacked quadrilateral edge vectors."""
    ac = (a * c).sum(axis=-1)
    bd = (b * d).sum(axis=-1)
    ab = (a * b).sum(axis=-1)
    cd = (c * d).sum(axis=-1)
    bc = (b * c).sum(axis=-1)
    da = (d * a).sum(axis=-1)
    denom = np.sqrt(
        (a * a).sum(axis=-1)
        * (b * b).sum(axis=-1)
        * (c * c).sum(axis=-1)
        * (d * d).sum(axis=-1)
    )
    # clamp against floating-point drift just outside [-1, 1] near beta = 0, pi
    x = np.clip((ac * bd - ab * cd - bc * da) / denom, -1.0, 1.0)
    return np.arccos(x)


def _total_from_positions(positions, edges, opposites, n_vertices):
    """Total energy for a closed mesh given raw arrays (no degeneracy checks)."""
    a, b, c, d = _quad_vectors(positions, edges, opposites)
    return float(_beta_arrays(a, b, c, d).sum() - np.pi * n_vertices)


def edge_quad(mesh, edge):
    """The oriented quadrilateral edge vectors around an interior edge."""
    e = mesh.edge_id(edge)
    if not mesh.edge_is_interior(e):
        raise BoundaryEdgeError(f"edge {tuple(mesh.edges[e])} is a boundary edge")
    u, w = mesh.vertices[mesh.edges[e]]
    p, q = mesh.vertices[mesh.edge_opposite[e]]
    quad = EdgeQuad(a=u - p, b=q - u, c=w - q, d=p - w)
    for name in ("a", "b", "c", "d"):
        vec = getattr(quad, name)
        if np.dot(vec, vec) == 0.0:
            raise DegenerateFaceError(
                f"zero-length quadrilateral edge {name} at edge {tuple(mesh.edges[e])}"
            )
    return quad


def beta_edge(quad):
    """External circumcircle intersection angle, in [0, pi], from an EdgeQuad."""
    for name in ("a", "b", "c", "d"):
        vec = getattr(quad, name)
        if np.dot(vec, vec) == 0.0:
            raise DegenerateFaceError(f"zero-length quadrilateral edge {name}")
    return float(_beta_arrays(quad.a, quad.b, quad.c, quad.d))


def beta_oracle(mesh, edge):
    """Intersection angle computed from the two circumcircles themselves.

    Each circumcircle (center, radius, plane) is built explicitly; the angle
    is taken between the circles' tangent vectors at the shared endpoint,
    oriented by the traversal direction the faces induce. This path never
    touches the quadrilateral dot-product formula, so it serves as an
    independent check of :func:`beta_edge`.
    """
    from .bending import circumcenter  # deferred: bending imports energy

    if not mesh.oriented:
        raise BoundaryEdgeError("oracle requires a consistently oriented mesh")
    e = mesh.edge_id(edge)
    if not mesh.edge_is_interior(e):
        raise BoundaryEdgeError(f"edge {tuple(mesh.edges[e])} is a boundary edge")
    u, w = mesh.vertices[mesh.edges[e]]
    p, q = mesh.vertices[mesh.edge_opposite[e]]
    centers = np.empty((2, 3))
    radii = np.empty(2)
    tangents = np.empty((2, 3))
    for i, tri in enumerate(((u, w, p), (w, u, q))):
        center, radius = circumcenter(np.asarray(tri))
        normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        normal /= np.linalg.norm(normal)
        tangent = np.cross(normal, u - center)
        tangents[i] = tangent / np.linalg.norm(tangent)
        centers[i] = center
        radii[i] = radius
    beta = float(np.arccos(np.clip(tangents[0] @ tangents[1], -1.0, 1.0)))
    return CircleAngleOracleResult(beta=beta, circumcenters=centers, circumradii=radii)


def edge_betas(mesh, positions=None):
    """Angles for every edge of a closed mesh (aligned with ``mesh.edges``)."""
    if not mesh.closed:
        raise BoundaryEdgeError("mesh has boundary edges")
    positions = mesh.vertices if positions is None else positions
    _check_nondegenerate(mesh, positions)
    a, b, c, d = _quad_vectors(positions, mesh.edges, mesh.edge_opposite)
    return _beta_arrays(a, b, c, d)


def vertex_energy(mesh, v):
    """Angle sum minus 2*pi at an interior vertex."""
    rows = mesh.vertex_edge_rows(v)
    if len(rows) == 0:
        raise BoundaryEdgeError(f"vertex {v} has no incident edges")
    if (mesh.edge_faces[rows] < 0).any():
        raise BoundaryEdgeError(f"vertex {v} has incident boundary edges")
    _check_nondegenerate(mesh)
    a, b, c, d = _quad_vectors(mesh.vertices, mesh.edges[rows], mesh.edge_opposite[rows])
    return float(_beta_arrays(a, b, c, d).sum() - 2.0 * np.pi)


def total_energy(mesh):
    """Full energy report for a closed mesh.

    The total is accumulated edge-by-edge in canonical edge order, so repeated
    runs on the same mesh produce bit-identical results.
    """
    betas = edge_betas(mesh)
    n = mesh.n_vertices
    per_vertex = np.zeros(n)
    np.add.at(per_vertex, mesh.edges[:, 0], betas)
    np.add.at(per_vertex, mesh.edges[:, 1], betas)
    per_vertex -= 2.0 * np.pi
    total = float(betas.sum() - np.pi * n)
    return EnergyReport(
        edges=mesh.edges,
        per_edge_beta=betas,
        per_vertex_energy=per_vertex,
        total=total,
        vertex_count=n,
    )
