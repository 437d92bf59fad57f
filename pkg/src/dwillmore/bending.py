"""Thin-shell bending energy for rest/deformed mesh pairs.

Per interior edge the energy term is ``(l / L) * theta**2`` with ``l`` the
rest edge length, ``L`` the distance between the circumcenters of the two
rest faces, and ``theta`` the change of the signed dihedral angle between the
rest and the deformed configuration. For a rest mesh that is flat across an
edge this reduces to the plain angle between the deformed face normals.

The quadratic form is the small-angle limit of the circumcircle intersection
angle: rotating each face of a planar hinge by ``theta`` about the shared
edge (the face normals then tilt apart by ``2 * theta``) changes the
intersection angle by ``(l / L) * theta**2 + O(theta**4)``, which
:func:`beta_theta_profile` verifies numerically. Equivalently, in terms of
the angle ``T`` between the face normals the intersection angle grows by
``(l / (4 L)) * T**2``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .energy import EdgeQuad, beta_edge
from .mesh import (
    BoundaryEdgeError,
    DegenerateFaceError,
    MeshError,
    face_normals,
)

# Edges whose rest circumcenters are closer than this fraction of the rest
# bounding-box diagonal are excluded from the energy (the quadratic
# coefficient l/L diverges there).
CENTER_DISTANCE_EPS = 1e-9


def circumcenter(triangle):
    """Circumcenter and circumradius of a 3D triangle.

    Standard barycentric formula; the center lies in the triangle's plane and
    is equidistant from all three corners. Raises
    :class:`DegenerateFaceError` for collinear input.
    """
    pts = np.asarray(triangle, dtype=np.float64)
    if pts.shape != (3, 3):
        raise ValueError(f"triangle must be (3, 3), got {pts.shape}")
    p0, p1, p2 = pts
    a2 = float(((p1 - p2) ** 2).sum())
    b2 = float(((p0 - p2) ** 2).sum())
    c2 = float(((p0 - p1) ** 2).sum())
    wa = a2 * (b2 + c2 - a2)
    wb = b2 * (c2 + a2 - b2)
    wc = c2 * (a2 + b2 - c2)
    denom = wa + wb + wc  # equals 16 * area^2
    longest_sq = max(a2, b2, c2)
    if longest_sq == 0.0 or denom <= 16.0 * (1e-14 * longest_sq) ** 2:
        raise DegenerateFaceError("collinear points have no circumcircle")
    center = (wa * p0 + wb * p1 + wc * p2) / denom
    return center, float(np.linalg.norm(p0 - center))


def _edge_stencil(mesh, edge):
    e = mesh.edge_id(edge)
    if not mesh.edge_is_interior(e):
        raise BoundaryEdgeError(f"edge {tuple(mesh.edges[e])} is a boundary edge")
    u, w = (int(x) for x in mesh.edges[e])
    p, q = (int(x) for x in mesh.edge_opposite[e])
    return u, w, p, q


def _hinge_normals(pu, pw, pp, pq):
    n1 = np.cross(pw - pu, pp - pu)
    n2 = np.cross(pu - pw, pq - pw)
    l1, l2 = np.linalg.norm(n1), np.linalg.norm(n2)
    if l1 == 0.0 or l2 == 0.0:
        raise DegenerateFaceError("degenerate face at hinge")
    return n1 / l1, n2 / l2


def dihedral_theta(mesh, edge):
    """Angle in [0, pi] between the oriented normals of the two faces at an
    interior edge (zero for a coplanar, consistently wound pair)."""
    u, w, p, q = _edge_stencil(mesh, edge)
    v = mesh.vertices
    n1, n2 = _hinge_normals(v[u], v[w], v[p], v[q])
    return float(np.arccos(np.clip(n1 @ n2, -1.0, 1.0)))


def _signed_dihedral(pu, pw, pp, pq):
    """Dihedral angle in (-pi, pi], positive when the hinge folds toward the
    side the face normals point to."""
    n1, n2 = _hinge_normals(pu, pw, pp, pq)
    axis = pw - pu
    axis = axis / np.linalg.norm(axis)
    return float(np.arctan2(np.cross(n1, n2) @ axis, n1 @ n2))


def _signed_dihedrals(mesh, rows):
    v = mesh.vertices
    return np.array(
        [
            _signed_dihedral(
                v[mesh.edges[e, 0]], v[mesh.edges[e, 1]],
                v[mesh.edge_opposite[e, 0]], v[mesh.edge_opposite[e, 1]],
            )
            for e in rows
        ]
    )


def _wrap_angle(angle):
    return (angle + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True, eq=False)
class BendPair:
    """Rest/deformed mesh pair with per-edge bending terms.

    ``theta`` is the magnitude of the wrapped difference of signed dihedral
    angles between deformed and rest, so it vanishes for rigid motions and
    reduces to the plain normal angle when the rest hinge is flat. ``l`` and
    ``L`` are frozen from the rest configuration. Edges whose rest
    circumcenters (nearly) coincide are listed in ``excluded_edges`` and do
    not contribute.
    """

    rest: object
    deformed: object
    edges: np.ndarray  # (K, 2) int, included interior edges
    l: np.ndarray  # (K,) rest edge lengths
    L: np.ndarray  # (K,) rest circumcenter distances
    theta: np.ndarray  # (K,) relative fold angles in [0, pi]
    excluded_edges: tuple  # ((u, w), ...) with coincident rest circumcenters

    @classmethod
    def from_meshes(cls, rest, deformed, eps_factor=CENTER_DISTANCE_EPS):
        if rest.vertices.shape != deformed.vertices.shape or not rest.same_combinatorics(deformed):
            raise MeshError("rest and deformed meshes must share combinatorics")
        interior = np.flatnonzero((rest.edge_faces >= 0).all(axis=1))
        if len(interior) == 0:
            raise MeshError("mesh has no interior edges")
        eps_L = eps_factor * rest.bbox_diagonal()
        centers = {}

        def center_of(face_idx):
            if face_idx not in centers:
                centers[face_idx], _ = circumcenter(rest.vertices[rest.faces[face_idx]])
            return centers[face_idx]

        included = []
        lengths = []
        distances = []
        excluded = []
        for e in interior:
            u, w = rest.edges[e]
            f1, f2 = rest.edge_faces[e]
            span = float(np.linalg.norm(center_of(int(f1)) - center_of(int(f2))))
            if span <= eps_L:
                excluded.append((int(u), int(w)))
                continue
            included.append(e)
            lengths.append(float(np.linalg.norm(rest.vertices[w] - rest.vertices[u])))
            distances.append(span)
        included = np.asarray(included, dtype=np.int64)
        theta_rest = _signed_dihedrals(rest, included)
        theta_def = _signed_dihedrals(deformed, included)
        theta = np.abs(_wrap_angle(theta_def - theta_rest))
        return cls(
            rest=rest,
            deformed=deformed,
            edges=rest.edges[included].copy(),
            l=np.asarray(lengths),
            L=np.asarray(distances),
            theta=theta,
            excluded_edges=tuple(excluded),
        )


@dataclass(frozen=True, eq=False)
class BendReport:
    """Total bending energy and the per-edge breakdown."""

    total: float
    edges: np.ndarray
    l: np.ndarray
    L: np.ndarray
    theta: np.ndarray
    terms: np.ndarray
    excluded_edges: tuple

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["u", "w", "l", "L", "theta", "term"])
        for (u, w), le, ce, th, term in zip(self.edges, self.l, self.L,
                                            self.theta, self.terms):
            writer.writerow([int(u), int(w), repr(float(le)), repr(float(ce)),
                             repr(float(th)), repr(float(term))])
        return out.getvalue()

    def to_json(self):
        doc = {
            "total": self.total,
            "edge_count": int(len(self.edges)),
            "excluded_edges": [list(e) for e in self.excluded_edges],
            "per_edge": [
                {
                    "edge": [int(u), int(w)],
                    "l": float(le),
                    "L": float(ce),
                    "theta": float(th),
                    "term": float(term),
                }
                for (u, w), le, ce, th, term in zip(
                    self.edges, self.l, self.L, self.theta, self.terms
                )
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def bending_energy(pair):
    """Total bending energy ``sum (l/L) theta^2`` with per-edge breakdown."""
    terms = pair.l / pair.L * pair.theta ** 2
    return BendReport(
        total=float(terms.sum()),
        edges=pair.edges,
        l=pair.l,
        L=pair.L,
        theta=pair.theta,
        terms=terms,
        excluded_edges=pair.excluded_edges,
    )


@dataclass(frozen=True, eq=False)
class Hinge:
    """Two triangles ``(u, w, p)`` and ``(w, u, q)`` sharing the edge
    ``u - w``, given by the four corner points."""

    u: np.ndarray
    w: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @classmethod
    def from_triangles(cls, tri1, tri2):
        """Build a hinge from two point triples sharing exactly two corners."""
        tri1 = [np.asarray(p, dtype=np.float64) for p in tri1]
        tri2 = [np.asarray(p, dtype=np.float64) for p in tri2]
        shared = [
            (i, j)
            for i, a in enumerate(tri1)
            for j, b in enumerate(tri2)
            if np.array_equal(a, b)
        ]
        if len(shared) != 2:
            raise MeshError("triangles must share exactly one edge (two corners)")
        (i1, j1), (i2, j2) = shared
        u, w = tri1[i1], tri1[i2]
        p = tri1[3 - i1 - i2]
        q = tri2[3 - j1 - j2]
        return cls(u=u, w=w, p=p, q=q)

    def points(self):
        return np.vstack([self.u, self.w, self.p, self.q])


def _rotate_about_axis(points, origin, axis, angle):
    axis = axis / np.linalg.norm(axis)
    rel = points - origin
    cos, sin = np.cos(angle), np.sin(angle)
    return (
        origin
        + rel * cos
        + np.cross(axis, rel) * sin
        + np.outer(rel @ axis, axis) * (1.0 - cos)
    )


def flatten_hinge(hinge):
    """Rotate the q-triangle about the shared edge until the hinge is planar
    (signed dihedral zero); an isometry of each triangle."""
    theta0 = _signed_dihedral(hinge.u, hinge.w, hinge.p, hinge.q)
    return hinge if theta0 == 0.0 else _fold_from(hinge, -theta0)


def _fold_from(hinge, angle):
    axis = hinge.w - hinge.u
    q_new = _rotate_about_axis(hinge.q[None, :], hinge.u, axis, angle)[0]
    return Hinge(u=hinge.u, w=hinge.w, p=hinge.p, q=q_new)


def fold_hinge(hinge, theta):
    """Fold the flattened hinge isometrically to signed dihedral ``theta``."""
    flat = hinge
    theta0 = _signed_dihedral(hinge.u, hinge.w, hinge.p, hinge.q)
    if theta0 != 0.0:
        flat = _fold_from(hinge, -theta0)
    if theta == 0.0:
        return flat
    folded = _fold_from(flat, theta)
    # fix the rotation sense so the resulting signed dihedral equals +theta
    if not np.isclose(
        _signed_dihedral(folded.u, folded.w, folded.p, folded.q), theta,
        rtol=1e-8, atol=1e-10,
    ):
        folded = _fold_from(flat, -theta)
    return folded


def hinge_ratio(hinge):
    """Rest quantities ``(l, L)`` of the flattened hinge.

    ``l`` is the shared edge length, ``L`` the distance of the two in-plane
    circumcenters. Raises :class:`DegenerateFaceError` when the circumcenters
    coincide (cocircular hinge), for which the quadratic fold law degenerates.
    """
    flat = flatten_hinge(hinge)
    c1, _ = circumcenter([flat.u, flat.w, flat.p])
    c2, _ = circumcenter([flat.w, flat.u, flat.q])
    edge_len = float(np.linalg.norm(flat.w - flat.u))
    span = float(np.linalg.norm(c1 - c2))
    if span <= CENTER_DISTANCE_EPS * edge_len:
        raise DegenerateFaceError("coincident circumcenters (cocircular hinge)")
    return edge_len, span


def beta_theta_profile(hinge, thetas):
    """Circumcircle intersection angle of the hinge as a function of the fold.

    Flattens the hinge, then folds it isometrically by each ``theta``: both
    triangles rotate by ``theta`` about the shared edge (away from each
    other), which opens the angle between the face normals to ``2 * theta``.
    The intersection angle is evaluated via the quadrilateral formula.
    Returns a ``(k, 2)`` array of ``(theta, beta)`` rows; to leading order
    ``beta(theta) = beta(0) + (l / L) * theta**2``.
    """
    hinge_ratio(hinge)  # reject coincident circumcenters up front
    flat = flatten_hinge(hinge)
    rows = []
    for theta in np.asarray(thetas, dtype=np.float64):
        # rotating one wing by 2*theta is the symmetric fold up to a rigid
        # motion, and the intersection angle only sees the shape
        folded = _fold_from(flat, 2.0 * float(theta))
        quad = EdgeQuad(
            a=folded.u - folded.p,
            b=folded.q - folded.u,
            c=folded.w - folded.q,
            d=folded.p - folded.w,
        )
        rows.append((float(theta), beta_edge(quad)))
    return np.asarray(rows)


def profile_quadratic_coefficient(hinge, thetas=None):
    """Quadratic coefficient of ``beta(theta) - beta(0)`` fitted on a window.

    Fits the even model ``c2 * theta^2 + c4 * theta^4`` (the fold law is even
    in the fold angle, so odd terms vanish) over ``theta in [1e-3, 1e-2]`` by
    default and returns ``c2``, which matches ``l / L`` of the flat hinge up
    to higher order.
    """
    if thetas is None:
        thetas = np.geomspace(1e-3, 1e-2, 12)
    thetas = np.asarray(thetas, dtype=np.float64)
    profile = beta_theta_profile(hinge, np.concatenate([[0.0], thetas]))
    beta0 = profile[0, 1]
    y = profile[1:, 1] - beta0
    design = np.column_stack([thetas ** 2, thetas ** 4])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(coef[0])
