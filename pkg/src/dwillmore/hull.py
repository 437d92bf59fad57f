"""Convex hulls of 3D point clouds as triangle meshes."""

from __future__ import annotations

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .mesh import DegenerateFaceError, TriMesh


def convex_hull(points):
    """Triangulated boundary of the convex hull of a 3D point set.

    Parameters
    ----------
    points : (k, 3) array_like
        At least four points, not all coplanar.

    Returns
    -------
    TriMesh
        Closed mesh, consistently oriented with outward normals. Interior
        input points are dropped; hull vertices keep their input order.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise ValueError(f"points must be (k, 3), got {points.shape}")
    if len(points) < 4:
        raise DegenerateFaceError("convex hull needs at least 4 points")
    try:
        hull = ConvexHull(points)
    except QhullError as exc:
        raise DegenerateFaceError(f"degenerate (coplanar) input: {exc}") from exc

    used = np.unique(hull.simplices)
    remap = np.full(len(points), -1, dtype=np.int64)
    remap[used] = np.arange(len(used))
    vertices = points[used]
    faces = remap[hull.simplices]

    # qhull does not promise consistent winding; orient every face outward
    # from an interior point (valid because the hull is convex).
    inner = vertices.mean(axis=0)
    p0, p1, p2 = vertices[faces[:, 0]], vertices[faces[:, 1]], vertices[faces[:, 2]]
    normals = np.cross(p1 - p0, p2 - p0)
    inward = (normals * ((p0 + p1 + p2) / 3.0 - inner)).sum(axis=1) < 0.0
    faces[inward] = faces[inward][:, [0, 2, 1]]
    return TriMesh(vertices, faces)


def convexity_defect(mesh):
    """Largest signed distance of any vertex in front of any face plane.

    Non-positive (up to numerical noise) exactly when the mesh bounds a convex
    region with outward-oriented faces.
    """
    normals = mesh.face_normals()
    origins = mesh.vertices[mesh.faces[:, 0]]
    # distances (n_faces, n_vertices): <n_f, v - p0_f>
    d = normals @ mesh.vertices.T - (normals * origins).sum(axis=1)[:, None]
    return float(d.max())


def is_convex(mesh, tol_factor=1e-10):
    """Whether every vertex lies on or behind every face plane.

    The tolerance is ``tol_factor`` times the bounding-box diagonal.
    """
    return convexity_defect(mesh) <= tol_factor * mesh.bbox_diagonal()


def contains_points(mesh, points, tol_factor=1e-10):
    """Whether all ``points`` lie inside or on a convex, outward-oriented mesh."""
    points = np.asarray(points, dtype=np.float64)
    normals = mesh.face_normals()
    origins = mesh.vertices[mesh.faces[:, 0]]
    d = normals @ points.T - (normals * origins).sum(axis=1)[:, None]
    return bool(d.max() <= tol_factor * mesh.bbox_diagonal())
