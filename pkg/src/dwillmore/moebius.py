"""Moebius transformations of R^3: similarities and sphere inversions.

Used to exercise the Moebius invariance of the circumcircle intersection
angles; the maps act on vertex positions only and never touch combinatorics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Vertices must stay at least this far from every inversion center.
INVERSION_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Similarity:
    """Rotation, uniform scale, and translation: ``x -> s R x + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    scale: float = 1.0
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=np.float64)
        if R.shape != (3, 3) or not np.allclose(R @ R.T, np.eye(3), atol=1e-10):
            raise ValueError("rotation must be a 3x3 orthogonal matrix")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def apply(self, points):
        points = np.asarray(points, dtype=np.float64)
        return points @ np.asarray(self.rotation).T * self.scale + np.asarray(
            self.translation, dtype=np.float64
        )


@dataclass(frozen=True, eq=False)
class SphereInversion:
    """Inversion in the sphere of given center and radius:
    ``x -> c + r^2 (x - c) / |x - c|^2``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"inversion radius must be positive, got {self.radius}")

    def apply(self, points):
        points = np.asarray(points, dtype=np.float64)
        c = np.asarray(self.center, dtype=np.float64)
        d = points - c
        dist_sq = (d * d).sum(axis=-1)
        if (dist_sq < INVERSION_EPS ** 2).any():
            raise ValueError(
                f"point within {INVERSION_EPS} of the inversion center {c.tolist()}"
            )
        return c + self.radius ** 2 * d / dist_sq[..., None]


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """Ordered composition of similarity and sphere-inversion atoms."""

    atoms: tuple = ()

    def apply(self, points):
        points = np.asarray(points, dtype=np.float64)
        for atom in self.atoms:
            points = atom.apply(points)
        return points


def apply_moebius(mesh, moebius_map):
    """Map all vertices through a Moebius transformation (combinatorics kept).

    Raises ``ValueError`` if any (intermediate) vertex comes within
    ``INVERSION_EPS`` of an inversion center.
    """
    return mesh.with_vertices(moebius_map.apply(mesh.vertices))


def random_rotation(rng):
    """Haar-ish random rotation matrix from a QR decomposition."""
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0.0:
        q[:, 0] = -q[:, 0]
    return q


def random_moebius(points, seed, with_inversion=True):
    """Random similarity, optionally followed by a sphere inversion.

    The inversion center is placed at 2.5x the cloud radius from the centroid
    of the similarity image, which keeps every vertex well away from the
    center and the numerics of the invariance check tight.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sim = Similarity(
        rotation=random_rotation(rng),
        scale=float(rng.uniform(0.5, 2.0)),
        translation=rng.uniform(-1.0, 1.0, 3),
    )
    if not with_inversion:
        return MoebiusMap((sim,))
    image = sim.apply(np.asarray(points, dtype=np.float64))
    centroid = image.mean(axis=0)
    radius = float(np.linalg.norm(image - centroid, axis=1).max())
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    inv = SphereInversion(
        center=centroid + direction * 2.5 * radius,
        radius=float(rng.uniform(0.7, 1.5)),
    )
    return MoebiusMap((sim, inv))
