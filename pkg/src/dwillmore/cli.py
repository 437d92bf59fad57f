"""Command-line front end.

Subcommands: ``gen``, ``energy``, ``flow``, ``flip-optimize``, ``refine``,
``bend``, ``check``. Meshes travel as OFF (or OBJ) files; ``-`` means
stdin/stdout, so generators and analyses compose in pipes::

    dwillmore gen --kind tetrahedron | dwillmore energy

Exit status: 0 on success, 1 on validation failure, 2 on usage errors. The
``DW_LOG`` environment variable (quiet, info, debug) controls diagnostics on
stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import bending, fileio, flow, generators
from .energy import total_energy
from .mesh import MeshError, refine

logger = logging.getLogger("dwillmore")

DEFAULT_SEED = 12345
LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging():
    raw = os.environ.get("DW_LOG", "quiet").strip().lower()
    level = LOG_LEVELS.get(raw)
    if level is None:
        level = logging.WARNING
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )
    if raw not in LOG_LEVELS:
        logger.warning("unknown DW_LOG value %r, using 'quiet'", raw)


def _load(path, fmt=None):
    if path == "-":
        return fileio.load_mesh(sys.stdin, format=fmt or "off")
    return fileio.load_mesh(path, format=fmt)


def _save(mesh, path, fmt=None):
    if path == "-":
        sys.stdout.write(fileio.dumps_mesh(mesh, fmt or "off"))
        return
    fileio.save_mesh(mesh, path, format=fmt)


def _write_text(text, path):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _flow_config(args):
    fixed = ()
    if args.fix:
        fixed = tuple(int(tok) for tok in args.fix.split(","))
    return flow.FlowConfig(
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        step=args.step,
        fixed_vertices=fixed,
        normalization=args.normalize,
    )


def cmd_gen(args):
    mesh = generators.generate(args.kind, level=args.level, n=args.n, seed=args.seed)
    _save(mesh, args.output, args.format if args.format != "json" else None)
    return 0


def cmd_energy(args):
    mesh = _load(args.input)
    report = total_energy(mesh)
    text = report.to_csv() if args.format == "csv" else report.to_json()
    _write_text(text, args.output)
    logger.info("total energy %.12e over %d edges", report.total, len(report.edges))
    return 0


def _write_trace(trace, base):
    if base == "-":
        return
    _write_text(trace.to_csv(), base + ".trace.csv")
    _write_text(trace.to_json(), base + ".trace.json")


def cmd_flow(args):
    mesh = _load(args.input)
    config = _flow_config(args)
    if args.alternate:
        trace, flips = flow.alternate_flow(mesh, config, args.alternate)
        logger.info("alternate flow applied %d flip(s)", flips)
    else:
        trace = flow.run_flow(mesh, config)
    _save(trace.final_mesh, args.output)
    _write_trace(trace, args.output)
    logger.info("final energy %.12e (%s)", trace.final_energy, trace.termination)
    return 0


def cmd_flip_optimize(args):
    mesh = _load(args.input)
    optimized, trace = flow.optimize_triangulation(mesh)
    _save(optimized, args.output)
    if args.output != "-":
        _write_text(trace.to_csv(), args.output + ".fliptrace.csv")
        _write_text(trace.to_json(), args.output + ".fliptrace.json")
    logger.info(
        "%d flip(s), energy %.6e -> %.6e",
        len(trace.records), trace.initial_energy, trace.final_energy,
    )
    return 0


def cmd_refine(args):
    mesh = _load(args.input)
    _save(refine(mesh), args.output)
    return 0


def cmd_bend(args):
    rest = _load(args.rest)
    deformed = _load(args.deformed)
    pair = bending.BendPair.from_meshes(rest, deformed)
    report = bending.bending_energy(pair)
    text = report.to_json() if args.format == "json" else report.to_csv()
    _write_text(text, args.output)
    logger.info("bending energy %.12e (%d edge(s) excluded)",
                report.total, len(report.excluded_edges))
    return 0


def _sphere_fit(points):
    # linear least squares: |x|^2 = 2 <x, c> + (r^2 - |c|^2)
    design = np.column_stack([2.0 * points, np.ones(len(points))])
    target = (points ** 2).sum(axis=1)
    sol, *_ = np.linalg.lstsq(design, target, rcond=None)
    center = sol[:3]
    radius = float(np.sqrt(max(sol[3] + center @ center, 0.0)))
    return center, radius


def cmd_check(args):
    mesh = _load(args.input)
    lines = [
        f"vertices: {mesh.n_vertices}",
        f"edges: {mesh.n_edges}",
        f"faces: {mesh.n_faces}",
        f"closed: {'yes' if mesh.closed else 'no'}",
        f"oriented: {'yes' if mesh.oriented else 'no'}",
        f"euler_characteristic: {mesh.euler_characteristic}",
        f"genus: {mesh.genus if mesh.genus is not None else 'n/a'}",
        f"degenerate_faces: {len(mesh.degenerate_faces())}",
    ]
    failures = []
    if not mesh.closed:
        failures.append("mesh is not closed")
    if not mesh.oriented:
        failures.append("mesh is not consistently oriented")
    if len(mesh.degenerate_faces()):
        failures.append("mesh has degenerate faces")
    if args.delaunay and not failures:
        center, radius = _sphere_fit(mesh.vertices)
        spread = np.abs(np.linalg.norm(mesh.vertices - center, axis=1) - radius)
        if spread.max() > 1e-6 * radius:
            failures.append(
                f"vertices not on a common sphere (max deviation {spread.max():.3e})"
            )
        else:
            total = total_energy(mesh).total
            lines.append(f"energy: {total!r}")
            if abs(total) > 1e-7:
                failures.append(
                    f"triangulation is not spherical-Delaunay (energy {total!r} > 1e-7)"
                )
    text = "\n".join(lines)
    print(text)
    for failure in failures:
        print(f"FAIL: {failure}", file=sys.stderr)
    return 1 if failures else 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dwillmore",
        description="Conformal (circumcircle-angle) energy of triangle meshes: "
        "evaluation, minimization, triangulation optimization, and thin-shell "
        "bending.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, with_input=True):
        if with_input:
            p.add_argument("--input", default="-", help="input mesh (OFF/OBJ path or '-')")
        p.add_argument("--output", default="-", help="output path or '-' (default)")

    p = sub.add_parser("gen", help="generate a mesh")
    p.add_argument("--kind", required=True, choices=generators.GENERATOR_KINDS)
    p.add_argument("--level", type=int, default=None, help="subdivision level")
    p.add_argument("--n", type=int, default=None, help="point/segment count")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--format", default="off", choices=["off", "obj"])
    add_io(p, with_input=False)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("energy", help="evaluate the energy report")
    add_io(p)
    p.add_argument("--format", default="json", choices=["json", "csv"])
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("flow", help="minimize the energy over vertex positions")
    add_io(p)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--grad-tol", type=float, default=1e-8)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--fix", default="", help="comma-separated vertex ids to pin")
    p.add_argument("--normalize", default="recenter_rescale",
                   choices=list(flow.NORMALIZATIONS))
    p.add_argument("--alternate", type=int, default=0, metavar="K",
                   help="alternate greedy flips every K flow iterations")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("flip-optimize", help="greedy energy-decreasing edge flips")
    add_io(p)
    p.set_defaults(func=cmd_flip_optimize)

    p = sub.add_parser("refine", help="1-to-4 midpoint refinement")
    add_io(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("bend", help="thin-shell bending energy of a mesh pair")
    p.add_argument("rest", help="rest mesh (OFF/OBJ)")
    p.add_argument("deformed", help="deformed mesh (OFF/OBJ)")
    p.add_argument("--output", default="-")
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.set_defaults(func=cmd_bend)

    p = sub.add_parser("check", help="validate a mesh, optionally the Delaunay property")
    p.add_argument("--input", default="-")
    p.add_argument("--delaunay", action="store_true",
                   help="require on-sphere vertices with (near-)zero energy")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (MeshError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
