"""Shared helpers for building randomized test meshes and hinges."""

import numpy as np
import pytest

from dwillmore import (
    Hinge,
    convex_hull,
    hinge_ratio,
    perturb,
    random_inscribed,
    subdivided_sphere,
)


def perturbed_sphere(level=1, noise=0.05, seed=0):
    """Icosphere with radial gaussian noise; stays non-degenerate for the
    noise levels used in the tests."""
    return perturb(subdivided_sphere(level), noise, seed, radial=True)


def perturbed_hull(n=40, noise=0.03, seed=0):
    """Hull of random sphere points, then perturbed (combinatorics kept)."""
    mesh = random_inscribed(n, seed)
    return perturb(mesh, noise, seed + 1, radial=True)


def random_planar_hinge(rng, ratio_range=(0.1, 10.0), min_beta=0.05):
    """Random planar hinge with controlled circumcenter distance.

    Draws quadrilaterals (p above, q below the shared edge) in the z = 0
    plane until the triangles are well shaped, the flat intersection angle is
    away from 0 and pi, and l/L falls inside ``ratio_range``.
    """
    while True:
        length = rng.uniform(0.5, 2.0)
        u = np.array([0.0, 0.0, 0.0])
        w = np.array([length, 0.0, 0.0])
        p = np.array([rng.uniform(-0.5, 1.5) * length, rng.uniform(0.2, 1.5) * length, 0.0])
        q = np.array([rng.uniform(-0.5, 1.5) * length, -rng.uniform(0.2, 1.5) * length, 0.0])
        hinge = Hinge(u=u, w=w, p=p, q=q)
        areas = [
            0.5 * np.linalg.norm(np.cross(w - u, p - u)),
            0.5 * np.linalg.norm(np.cross(u - w, q - w)),
        ]
        if min(areas) < 1e-2 * length ** 2:
            continue
        try:
            edge_len, span = hinge_ratio(hinge)
        except Exception:
            continue
        ratio = edge_len / span
        if not ratio_range[0] <= ratio <= ratio_range[1]:
            continue
        from dwillmore import beta_theta_profile

        beta0 = beta_theta_profile(hinge, [0.0])[0, 1]
        if not min_beta <= beta0 <= np.pi - min_beta:
            continue
        return hinge, ratio


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def hull_of_sphere_points(n, seed):
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return convex_hull(pts), pts


def random_stencil(rng, min_sin=1e-3, min_quality=1e-3):
    """Random well-shaped hinge stencil (u, w, p, q) in general position."""
    from dwillmore import EdgeQuad, beta_edge

    while True:
        p, u, q, w = rng.uniform(-1.0, 1.0, (4, 3))
        tris = ((u, w, p), (w, u, q))
        ok = True
        for t0, t1, t2 in tris:
            area = 0.5 * np.linalg.norm(np.cross(t1 - t0, t2 - t0))
            longest = max(
                np.linalg.norm(t1 - t0), np.linalg.norm(t2 - t1), np.linalg.norm(t0 - t2)
            )
            if area < min_quality * longest ** 2:
                ok = False
        if not ok:
            continue
        quad = EdgeQuad(a=u - p, b=q - u, c=w - q, d=p - w)
        if np.sin(beta_edge(quad)) < min_sin:
            continue
        return u, w, p, q, quad


def stencil_mesh(u, w, p, q):
    """Closed 4-vertex mesh whose edge (0,1) realizes the given stencil."""
    from dwillmore import TriMesh

    return TriMesh(np.vstack([u, w, p, q]), [[0, 1, 2], [1, 0, 3], [0, 2, 3], [1, 3, 2]])
