"""Energy minimization: gradient descent on vertex positions and greedy
edge-flip optimization of the triangulation.

The position flow is plain gradient descent with Armijo backtracking; the
accepted energy sequence is non-increasing by construction. The analytic
gradient differentiates ``beta = arccos(N / D)`` through the quadrilateral
dot-product formula and is cross-checked against central differences.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .energy import (
    _beta_arrays,
    _total_from_positions,
    edge_betas,
    total_energy,
)
from .mesh import (
    BoundaryEdgeError,
    DegenerateFaceError,
    TriMesh,
    bbox_diagonal,
    degenerate_face_mask,
    flip_edge,
)

logger = logging.getLogger(__name__)

# Where sin(beta) falls below this, the -1/sin factor in the chain rule is
# clamped to -1e8 instead of blowing up at cocircular configurations.
SIN_GUARD = 1e-8
SIN_GUARD_FACTOR = -1e8

# Line-search steps below this fraction of the bounding-box diagonal stop the
# flow with termination reason "step_underflow".
STEP_UNDERFLOW_FACTOR = 1e-16

# A flip must lower the energy by more than this to be applied.
FLIP_EPS = 1e-10

NORMALIZATIONS = ("none", "recenter_rescale")
DEFAULT_FD_STEP_FACTOR = 1e-6


@dataclass(frozen=True)
class FlowConfig:
    """Gradient-descent parameters.

    ``normalization="recenter_rescale"`` recenters the vertices on their
    centroid and rescales the mean vertex norm to 1 after every accepted step;
    the energy is invariant under both, so this only pins down the similarity
    drift the energy cannot see.
    """

    max_iters: int = 1000
    grad_tol: float = 1e-8
    step: float = 0.01
    armijo_shrink: float = 0.5
    armijo_decrease: float = 1e-4
    fixed_vertices: tuple = ()
    normalization: str = "recenter_rescale"

    def __post_init__(self):
        if self.max_iters <= 0:
            raise ValueError("max_iters must be positive")
        if self.grad_tol < 0.0:
            raise ValueError("grad_tol must be non-negative")
        if self.step <= 0.0:
            raise ValueError("step must be positive")
        if not 0.0 < self.armijo_shrink < 1.0:
            raise ValueError("armijo_shrink must lie in (0, 1)")
        if not 0.0 < self.armijo_decrease < 1.0:
            raise ValueError("armijo_decrease must lie in (0, 1)")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


@dataclass(frozen=True)
class FlowStep:
    iteration: int
    energy: float
    grad_norm: float
    step: float


@dataclass(frozen=True, eq=False)
class FlowTrace:
    """Accepted-iteration records plus the final mesh and termination reason."""

    steps: list
    final_mesh: TriMesh
    termination: str  # gradient_tol | max_iters | step_underflow

    @property
    def final_energy(self):
        return self.steps[-1].energy

    @property
    def iterations(self):
        return self.steps[-1].iteration

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["iter", "energy", "grad_norm", "step"])
        for s in self.steps:
            writer.writerow([s.iteration, repr(s.energy), repr(s.grad_norm),
                             repr(s.step)])
        return out.getvalue()

    def to_json(self):
        doc = {
            "termination": self.termination,
            "final_energy": self.final_energy,
            "iterations": self.iterations,
            "steps": [
                {
                    "iter": s.iteration,
                    "energy": s.energy,
                    "grad_norm": s.grad_norm,
                    "step": s.step,
                }
                for s in self.steps
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class FlipRecord:
    edge: tuple
    new_edge: tuple
    delta: float
    energy: float


@dataclass(frozen=True, eq=False)
class FlipTrace:
    """Greedy edge-flip records; energies are strictly decreasing."""

    records: list
    initial_energy: float
    final_energy: float

    def to_csv(self):
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["flip", "u", "w", "p", "q", "delta", "energy"])
        for i, r in enumerate(self.records):
            writer.writerow([i, r.edge[0], r.edge[1], r.new_edge[0], r.new_edge[1],
                             repr(r.delta), repr(r.energy)])
        return out.getvalue()

    def to_json(self):
        doc = {
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "flips": [
                {
                    "edge": list(r.edge),
                    "new_edge": list(r.new_edge),
                    "delta": r.delta,
                    "energy": r.energy,
                }
                for r in self.records
            ],
        }
        return json.dumps(doc, indent=2) + "\n"


def _require_closed(mesh):
    if not mesh.closed:
        raise BoundaryEdgeError("flow operations require a closed mesh")


def grad_analytic(mesh, positions=None):
    """Exact gradient of the total energy with respect to vertex positions.

    Chain rule through ``beta = arccos(N / D)``; each edge contributes to its
    four stencil vertices. Edges with ``sin(beta) < 1e-8`` use a clamped
    ``-1/sin`` factor, so the result stays finite at cocircular edges.
    """
    _require_closed(mesh)
    positions = mesh.vertices if positions is None else positions
    if degenerate_face_mask(positions, mesh.faces).any():
        raise DegenerateFaceError("mesh has degenerate faces")
    edges, opp = mesh.edges, mesh.edge_opposite
    iu, iw = edges[:, 0], edges[:, 1]
    ip, iq = opp[:, 0], opp[:, 1]
    a = positions[iu] - positions[ip]
    b = positions[iq] - positions[iu]
    c = positions[iw] - positions[iq]
    d = positions[ip] - positions[iw]

    ac = (a * c).sum(1)
    bd = (b * d).sum(1)
    ab = (a * b).sum(1)
    cd = (c * d).sum(1)
    bc = (b * c).sum(1)
    da = (d * a).sum(1)
    na2 = (a * a).sum(1)
    nb2 = (b * b).sum(1)
    nc2 = (c * c).sum(1)
    nd2 = (d * d).sum(1)
    denom = np.sqrt(na2 * nb2 * nc2 * nd2)
    x = np.clip((ac * bd - ab * cd - bc * da) / denom, -1.0, 1.0)
    sin_beta = np.sqrt(np.maximum(1.0 - x * x, 0.0))
    factor = np.where(sin_beta < SIN_GUARD, SIN_GUARD_FACTOR, -1.0 / np.maximum(sin_beta, SIN_GUARD))

    def col(v):
        return v[:, None]

    # d(N)/d(vector) for N = <a,c><b,d> - <a,b><c,d> - <b,c><d,a>
    gna = c * col(bd) - b * col(cd) - d * col(bc)
    gnb = d * col(ac) - a * col(cd) - c * col(da)
    gnc = a * col(bd) - d * col(ab) - b * col(da)
    gnd = b * col(ac) - c * col(ab) - a * col(bc)
    # d(N/D)/d(vector); d(D)/da = D * a / |a|^2
    gxa = (gna / col(denom) - a * col(x / na2)) * col(factor)
    gxb = (gnb / col(denom) - b * col(x / nb2)) * col(factor)
    gxc = (gnc / col(denom) - c * col(x / nc2)) * col(factor)
    gxd = (gnd / col(denom) - d * col(x / nd2)) * col(factor)

    grad = np.zeros_like(positions)
    np.add.at(grad, iu, gxa - gxb)
    np.add.at(grad, ip, gxd - gxa)
    np.add.at(grad, iq, gxb - gxc)
    np.add.at(grad, iw, gxc - gxd)
    return grad


def grad_fd(mesh, h=None):
    """Central-difference gradient of the total energy (verification oracle).

    The probe step defaults to ``1e-6`` times the bounding-box diagonal; if a
    probe creates a degenerate face the step is reduced tenfold, twice, before
    giving up.
    """
    _require_closed(mesh)
    if h is None:
        h = DEFAULT_FD_STEP_FACTOR * mesh.bbox_diagonal()
    edges, opp, faces = mesh.edges, mesh.edge_opposite, mesh.faces
    n = mesh.n_vertices
    for attempt in range(3):
        try:
            grad = np.empty((n, 3))
            pos = mesh.vertices.copy()
            for i in range(n):
                for k in range(3):
                    orig = pos[i, k]
                    vals = []
                    for delta in (h, -h):
                        pos[i, k] = orig + delta
                        if degenerate_face_mask(pos, faces).any():
                            raise DegenerateFaceError("probe step degenerated a face")
                        vals.append(_total_from_positions(pos, edges, opp, n))
                    pos[i, k] = orig
                    grad[i, k] = (vals[0] - vals[1]) / (2.0 * h)
            return grad
        except DegenerateFaceError:
            if attempt == 2:
                raise
            h *= 0.1
    raise AssertionError("unreachable")


def _normalize_positions(positions):
    centered = positions - positions.mean(axis=0)
    return centered / np.linalg.norm(centered, axis=1).mean()


def run_flow(mesh, config=None):
    """Minimize the energy over vertex positions by gradient descent.

    Accepted iterations strictly decrease the energy (Armijo condition with
    the configured sufficient-decrease constant); candidate steps that would
    degenerate a face are rejected during backtracking. Returns a
    :class:`FlowTrace` whose row 0 records the starting state.
    """
    config = config or FlowConfig()
    _require_closed(mesh)
    fixed = np.asarray(sorted(set(int(v) for v in config.fixed_vertices)), dtype=np.int64)
    if len(fixed) and (fixed.min() < 0 or fixed.max() >= mesh.n_vertices):
        raise ValueError("fixed_vertices out of range")
    if len(fixed) and config.normalization != "none":
        raise ValueError(
            "fixed_vertices require normalization='none' "
            "(recentering would move pinned vertices)"
        )
    edges, opp, faces = mesh.edges, mesh.edge_opposite, mesh.faces
    n = mesh.n_vertices
    if degenerate_face_mask(mesh.vertices, faces).any():
        raise DegenerateFaceError("initial mesh has degenerate faces")

    pos = mesh.vertices.copy()
    energy = _total_from_positions(pos, edges, opp, n)

    def projected_gradient():
        g = grad_analytic(mesh, pos)
        if len(fixed):
            g[fixed] = 0.0
        return g, float(np.abs(g).max())

    g, gnorm = projected_gradient()
    steps = [FlowStep(0, energy, gnorm, 0.0)]
    termination = "max_iters"
    # doubled at the top of each search, so the first trial is config.step
    t = 0.5 * config.step
    for it in range(1, config.max_iters + 1):
        if gnorm <= config.grad_tol:
            termination = "gradient_tol"
            break
        g_sq = float((g * g).sum())
        t = 2.0 * t
        floor = STEP_UNDERFLOW_FACTOR * bbox_diagonal(pos)
        accepted = False
        while t >= floor:
            candidate = pos - t * g
            if not degenerate_face_mask(candidate, faces).any():
                cand_energy = _total_from_positions(candidate, edges, opp, n)
                if cand_energy <= energy - config.armijo_decrease * t * g_sq:
                    accepted = True
                    break
            t *= config.armijo_shrink
        if not accepted:
            termination = "step_underflow"
            break
        pos = candidate
        energy = cand_energy
        if config.normalization == "recenter_rescale":
            pos = _normalize_positions(pos)
            energy = _total_from_positions(pos, edges, opp, n)
        g, gnorm = projected_gradient()
        steps.append(FlowStep(it, energy, gnorm, t))
    else:
        termination = "max_iters"

    logger.info(
        "flow finished: %s after %d iteration(s), energy %.6e",
        termination, steps[-1].iteration, steps[-1].energy,
    )
    return FlowTrace(steps=steps, final_mesh=mesh.with_vertices(pos),
                     termination=termination)


def _flip_deltas(mesh, betas):
    """Energy change of every candidate edge flip (NaN where illegal).

    A flip of ``(u, w)`` with opposite vertices ``(p, q)`` replaces the
    intersection angles of the flipped edge and of the four quadrilateral
    boundary edges; all candidates are evaluated in one vectorized pass.
    """
    pos = mesh.vertices
    edges, opp = mesh.edges, mesh.edge_opposite
    ne = len(edges)
    deltas = np.full(ne, np.nan)
    stencils = []
    rows_old = []
    candidates = []
    valences = mesh.vertex_valences()
    for e in range(ne):
        u, w = int(edges[e, 0]), int(edges[e, 1])
        p, q = int(opp[e, 0]), int(opp[e, 1])
        if p < 0 or q < 0 or p == q:
            continue
        key = (p, q) if p < q else (q, p)
        if key in mesh._edge_index:
            continue
        if valences[u] <= 3 or valences[w] <= 3:
            continue
        ring = []
        ok = True
        # boundary edges (p,u), (u,q), (q,w), (w,p) with the opposite vertex
        # that the flip replaces (w, w, u, u) and its replacement (q, q, p, p)
        for (x, y, lost, gained) in ((p, u, w, q), (u, q, w, p),
                                     (q, w, u, p), (w, p, u, q)):
            row = mesh._edge_index[(x, y) if x < y else (y, x)]
            pair = opp[row]
            if pair[0] == lost:
                other = int(pair[1])
            elif pair[1] == lost:
                other = int(pair[0])
            else:
                ok = False  # inconsistent adjacency; skip candidate
                break
            if other < 0:
                ok = False
                break
            ring.append((row, (x, y, gained, other)))
        if not ok:
            continue
        # refuse flips that would create a (near-)degenerate face
        new_faces = np.array([[u, q, p], [w, p, q]])
        if degenerate_face_mask(pos, new_faces).any():
            continue
        rows_old.append([e] + [row for row, _ in ring])
        stencils.append([(p, q, u, w)] + [s for _, s in ring])
        candidates.append(e)
    if not candidates:
        return deltas
    stencils = np.asarray(stencils, dtype=np.int64)  # (k, 5, 4)
    rows_old = np.asarray(rows_old, dtype=np.int64)  # (k, 5)
    s0 = pos[stencils[:, :, 0]]
    s1 = pos[stencils[:, :, 1]]
    s2 = pos[stencils[:, :, 2]]
    s3 = pos[stencils[:, :, 3]]
    # stencil order (u', w', p', q') -> vectors a, b, c, d
    new_betas = _beta_arrays(s0 - s2, s3 - s0, s1 - s3, s2 - s1)
    deltas[candidates] = new_betas.sum(axis=1) - betas[rows_old].sum(axis=1)
    return deltas


def optimize_triangulation(mesh, flip_eps=FLIP_EPS):
    """Greedy energy-decreasing edge flips until no flip helps.

    Each round flips the edge with the largest energy decrease (ties broken by
    canonical edge order); vertex positions are untouched. Stops when the best
    available decrease is smaller than ``flip_eps``.
    """
    _require_closed(mesh)
    records = []
    initial = total_energy(mesh).total
    energy = initial
    while True:
        betas = edge_betas(mesh)
        deltas = _flip_deltas(mesh, betas)
        if np.isnan(deltas).all():
            break
        best = int(np.nanargmin(deltas))
        if not deltas[best] < -flip_eps:
            break
        u, w = (int(x) for x in mesh.edges[best])
        p, q = (int(x) for x in mesh.edge_opposite[best])
        mesh = flip_edge(mesh, best)
        energy = total_energy(mesh).total
        records.append(
            FlipRecord(edge=(u, w), new_edge=(min(p, q), max(p, q)),
                       delta=float(deltas[best]), energy=energy)
        )
    logger.info("flip optimization: %d flip(s), energy %.6e -> %.6e",
                len(records), initial, energy)
    return mesh, FlipTrace(records=records, initial_energy=initial,
                           final_energy=energy)


def scramble_triangulation(mesh, flips, seed):
    """Apply random legal edge flips (for building non-optimal triangulations).

    Flips that would produce a degenerate face are skipped. Returns the
    scrambled mesh and the number of flips actually applied.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    applied = 0
    attempts = 0
    while applied < flips and attempts < 50 * flips:
        attempts += 1
        e = int(rng.integers(mesh.n_edges))
        p, q = (int(x) for x in mesh.edge_opposite[e])
        if p < 0 or q < 0 or p == q:
            continue
        key = (p, q) if p < q else (q, p)
        if key in mesh._edge_index:
            continue
        u, w = (int(x) for x in mesh.edges[e])
        new_faces = np.array([[u, q, p], [w, p, q]])
        if degenerate_face_mask(mesh.vertices, new_faces).any():
            continue
        try:
            mesh = flip_edge(mesh, e)
        except Exception:
            continue
        applied += 1
    return mesh, applied


def alternate_flow(mesh, config, flip_every):
    """Alternate position flow and flip optimization.

    Runs the flow in chunks of ``flip_every`` iterations, applying greedy
    flips between chunks, until the iteration budget is exhausted or both
    phases are converged. Returns ``(trace, total_flips)`` where the trace
    rows are renumbered contiguously across chunks.
    """
    if flip_every <= 0:
        raise ValueError("flip_every must be positive")
    remaining = config.max_iters
    all_steps = []
    offset = 0
    total_flips = 0
    termination = "max_iters"
    while remaining > 0:
        chunk = replace(config, max_iters=min(flip_every, remaining))
        trace = run_flow(mesh, chunk)
        mesh = trace.final_mesh
        start = 1 if all_steps else 0
        for s in trace.steps[start:]:
            all_steps.append(replace(s, iteration=s.iteration + offset))
        offset = all_steps[-1].iteration if all_steps else 0
        remaining -= trace.iterations
        mesh, flip_trace = optimize_triangulation(mesh)
        total_flips += len(flip_trace.records)
        if flip_trace.records:
            g = grad_analytic(mesh)
            offset += 1
            all_steps.append(
                FlowStep(offset, flip_trace.final_energy, float(np.abs(g).max()), 0.0)
            )
        if trace.termination == "gradient_tol" and not flip_trace.records:
            termination = "gradient_tol"
            break
        if trace.termination == "step_underflow" and not flip_trace.records:
            termination = "step_underflow"
            break
    return (
        FlowTrace(steps=all_steps, final_mesh=mesh, termination=termination),
        total_flips,
    )
