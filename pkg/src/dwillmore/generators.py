"""Mesh generators: platonic solids, icospheres, bipyramids, tori, random
inscribed hulls, and the 11-vertex non-inscribable sphere."""

from __future__ import annotations

import numpy as np

from .hull import convex_hull
from .mesh import TriMesh, refine


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def tetrahedron():
    """Regular tetrahedron inscribed in the unit sphere."""
    v = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    ) / np.sqrt(3.0)
    return convex_hull(v)


def octahedron():
    """Regular octahedron inscribed in the unit sphere."""
    v = np.vstack([np.eye(3), -np.eye(3)])
    return convex_hull(v)


def icosahedron():
    """Regular icosahedron inscribed in the unit sphere."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    v = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            v += [(0.0, s1, s2 * phi), (s1, s2 * phi, 0.0), (s2 * phi, 0.0, s1)]
    v = np.asarray(v)
    v /= np.linalg.norm(v, axis=1)[:, None]
    return convex_hull(v)


def subdivided_sphere(level):
    """Icosphere: icosahedron refined ``level`` times, reprojecting each level."""
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    mesh = icosahedron()
    for _ in range(int(level)):
        mesh = refine(mesh)
        verts = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1)[:, None]
        mesh = mesh.with_vertices(verts)
    return mesh


def bipyramid(n=3):
    """n-gonal bipyramid inscribed in the unit sphere (two poles, n equator
    vertices)."""
    if n < 3:
        raise ValueError(f"bipyramid needs n >= 3, got {n}")
    angles = 2.0 * np.pi * np.arange(n) / n
    equator = np.column_stack([np.cos(angles), np.sin(angles), np.zeros(n)])
    poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
    return convex_hull(np.vstack([poles, equator]))


def steinitz_from(base, white_radius=1.05):
    """Apply the black/white non-inscribability construction to a closed mesh.

    The base vertices (black) keep their indices and all base edges; one new
    white vertex is added per base face at the face barycenter scaled to
    ``white_radius``, joined to that face's three black vertices. Whenever the
    base has at least as many faces as vertices and at least one edge, the
    resulting combinatorial type admits no realization with all vertices on a
    common sphere.
    """
    if not base.closed:
        raise ValueError("construction requires a closed base mesh")
    verts = [base.vertices[i] for i in range(base.n_vertices)]
    faces = []
    for i, j, k in base.faces.tolist():
        bc = (base.vertices[i] + base.vertices[j] + base.vertices[k]) / 3.0
        bc = bc / np.linalg.norm(bc) * white_radius
        white = len(verts)
        verts.append(bc)
        faces += [(i, j, white), (j, k, white), (k, i, white)]
    return TriMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def steinitz11():
    """The 11-vertex non-inscribable simplicial sphere.

    Black skeleton: triangle bipyramid (5 vertices, 9 edges, 6 faces). One
    white vertex per face, giving |V| = 11, |E| = 27, |F| = 18 with no
    white-white edges; since 6 white vertices exceed 5 black ones, no
    realization has all vertices on a sphere.
    """
    return steinitz_from(bipyramid(3))


def random_inscribed(n, seed):
    """Convex hull of ``n`` uniform random points on the unit sphere."""
    if n < 4:
        raise ValueError(f"random_inscribed needs n >= 4, got {n}")
    rng = _rng(seed)
    points = rng.standard_normal((int(n), 3))
    norms = np.linalg.norm(points, axis=1)
    while (norms < 1e-12).any():
        points[norms < 1e-12] = rng.standard_normal((int((norms < 1e-12).sum()), 3))
        norms = np.linalg.norm(points, axis=1)
    return convex_hull(points / norms[:, None])


def torus(n_major=12, n_minor=6, major_radius=1.0, minor_radius=0.4):
    """Genus-1 grid torus with consistent outward orientation."""
    if n_major < 3 or n_minor < 3:
        raise ValueError("torus needs n_major >= 3 and n_minor >= 3")
    if not 0.0 < minor_radius < major_radius:
        raise ValueError("torus needs 0 < minor_radius < major_radius")
    theta = 2.0 * np.pi * np.arange(n_major) / n_major
    phi = 2.0 * np.pi * np.arange(n_minor) / n_minor
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ring = major_radius + minor_radius * np.cos(pp)
    verts = np.column_stack(
        [
            (ring * np.cos(tt)).ravel(),
            (ring * np.sin(tt)).ravel(),
            (minor_radius * np.sin(pp)).ravel(),
        ]
    )
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            v00 = i * n_minor + j
            v10 = ((i + 1) % n_major) * n_minor + j
            v01 = i * n_minor + (j + 1) % n_minor
            v11 = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            faces += [(v00, v10, v11), (v00, v11, v01)]
    return TriMesh(verts, np.asarray(faces, dtype=np.int64), genus=1)


def perturb(mesh, amplitude, seed, radial=False):
    """Gaussian perturbation of vertex positions (same combinatorics).

    With ``radial=True`` each vertex is scaled by ``1 + amplitude * N(0, 1)``,
    which keeps sphere-like meshes star-shaped; otherwise an isotropic offset
    of standard deviation ``amplitude`` is added per coordinate.
    """
    rng = _rng(seed)
    if radial:
        factors = 1.0 + amplitude * rng.standard_normal(mesh.n_vertices)
        verts = mesh.vertices * factors[:, None]
    else:
        verts = mesh.vertices + amplitude * rng.standard_normal((mesh.n_vertices, 3))
    return mesh.with_vertices(verts)


GENERATOR_KINDS = (
    "tetrahedron",
    "octahedron",
    "icosahedron",
    "subdivided_sphere",
    "bipyramid",
    "steinitz11",
    "random_inscribed",
    "torus",
)


def generate(kind, level=None, n=None, seed=None):
    """Dispatch a generator by name (the CLI entry point to this module)."""
    if kind == "tetrahedron":
        return tetrahedron()
    if kind == "octahedron":
        return octahedron()
    if kind == "icosahedron":
        return icosahedron()
    if kind == "subdivided_sphere":
        return subdivided_sphere(1 if level is None else level)
    if kind == "bipyramid":
        return bipyramid(3 if n is None else n)
    if kind == "steinitz11":
        return steinitz11()
    if kind == "random_inscribed":
        if n is None:
            raise ValueError("random_inscribed requires n")
        return random_inscribed(n, seed)
    if kind == "torus":
        if n is None:
            return torus()
        return torus(n_major=n, n_minor=max(3, n // 2))
    raise ValueError(f"unknown generator kind {kind!r} (choose from {GENERATOR_KINDS})")
