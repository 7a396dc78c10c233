"""Command-line interface.

Exit status: 0 success, 2 bad input or usage, 3 infeasible guiding set.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .gvf import EnvelopePolicy, InfeasibleError, check_feasible
from .level_graph import GraphError, GuidingError, GuidingSet, build_grid
from .manifold import (
    harmonic_fit,
    manifold_cell_int_gvf,
    manifold_cell_real_gvf,
    manifold_int_gvf,
    manifold_real_gvf,
    write_values_csv,
)
from .mesh import MeshError, load_mesh, write_obj, write_off
from .pipeline import (
    ElementSample,
    GridSpec,
    InputError,
    PipelineError,
    parse_samples_csv,
    run_grid_pipeline,
    sample_bounds,
    write_csv_raster,
    write_pgm,
)
from .smoothing import SmoothConfig

log = logging.getLogger("gvfit")

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE = 0, 2, 3
POLICIES = ("lower", "mid", "midpoint", "upper")


def _read_samples(path):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return parse_samples_csv(data)


def _element_guiding(path, integer: bool) -> GuidingSet:
    samples = _read_samples(path)
    if any(not isinstance(s, ElementSample) for s in samples):
        raise InputError(f"{path}: expected id,value rows")
    pairs = []
    for s in samples:
        v = s.value
        if integer:
            if v != int(v):
                raise InputError(f"{path}: value {v} for element {s.element_id} is not an integer level")
            v = int(v)
        pairs.append((s.element_id, v))
    return GuidingSet.from_pairs(pairs)


def _graph_for(args):
    if args.mesh:
        mesh = load_mesh(args.mesh)
        return mesh, mesh.graph(args.space)
    if args.width and args.height:
        return None, build_grid(args.width, args.height)
    raise InputError("give either --mesh or --width and --height")


def cmd_check(args) -> int:
    _, g = _graph_for(args)
    j = _element_guiding(args.input, integer=True)
    report = check_feasible(g, j)
    if report.feasible:
        print("feasible")
        return EXIT_OK
    print(f"infeasible: {report.witness}")
    return EXIT_INFEASIBLE


def cmd_grid_fit(args) -> int:
    samples = _read_samples(args.input)
    spec = None
    if args.width or args.height:
        if args.auto_res or not (args.width and args.height):
            raise InputError("--width and --height go together and exclude --auto-res")
        bounds = tuple(args.bounds) if args.bounds else sample_bounds(samples)
        spec = GridSpec(args.width, args.height, bounds)
    cfg = SmoothConfig(order=args.order, iterations=args.smooth_iters,
                       step=args.step, tolerance=args.tolerance)
    try:
        g, field, report = run_grid_pipeline(samples, spec, cfg, EnvelopePolicy.parse(args.policy),
                                             args.levels)
    except PipelineError as exc:
        if isinstance(exc.cause, InfeasibleError):
            raise exc.cause
        raise InputError(str(exc)) from None
    if args.out_pgm:
        write_pgm(g, field, args.out_pgm)
    if args.out_csv:
        write_csv_raster(g, field, args.out_csv)
    if args.report:
        print(report.line())
    return EXIT_OK


_FITTERS = {
    ("vertex", "int"): manifold_int_gvf,
    ("vertex", "real"): manifold_real_gvf,
    ("cell", "int"): manifold_cell_int_gvf,
    ("cell", "real"): manifold_cell_real_gvf,
}


def cmd_mesh_fit(args) -> int:
    mesh = load_mesh(args.mesh)
    integer = args.mode == "int"
    j = _element_guiding(args.input, integer)
    fit = _FITTERS[args.space, args.mode]
    if integer:
        n = args.n or int(j.values.max())
        field = fit(mesh, j, n, EnvelopePolicy.parse(args.policy))
    else:
        field = fit(mesh, j, EnvelopePolicy.parse(args.policy))
    if args.out_off:
        write_off(mesh, args.out_off)
    if args.out_obj:
        if args.space != "vertex":
            raise InputError("--out-obj colours vertices; use --space vertex")
        write_obj(mesh, args.out_obj, field.real_values())
    if args.out_values:
        write_values_csv(field.values, args.out_values)
    return EXIT_OK


def cmd_harmonic(args) -> int:
    mesh = load_mesh(args.mesh)
    j = _element_guiding(args.input, integer=False)
    fit = _FITTERS[args.space, "real"]
    init = fit(mesh, j, EnvelopePolicy.parse(args.policy))
    res = harmonic_fit(mesh.graph(args.space), init, j, args.iters)
    if args.out_values:
        write_values_csv(res.field.values, args.out_values)
    if args.trace:
        rows = ["sweep,max_update"] + [f"{k},{r!r}" for k, r in enumerate(res.trace.tolist(), 1)]
        Path(args.trace).write_text("\n".join(rows) + "\n")
    last = float(res.trace[-1]) if len(res.trace) else 0.0
    log.info("harmonic: %d sweeps, last max update %.3g", args.iters, last)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gvfit", description="Gradually varied fitting on grids and meshes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="feasibility of an integer guiding set")
    c.add_argument("--input", required=True, help="CSV of id,value (integer levels)")
    c.add_argument("--mesh")
    c.add_argument("--space", choices=("vertex", "cell"), default="vertex")
    c.add_argument("--width", type=int)
    c.add_argument("--height", type=int)
    c.set_defaults(func=cmd_check)

    gf = sub.add_parser("grid-fit", help="fit x,y,value samples on a grid")
    gf.add_argument("--input", required=True)
    gf.add_argument("--width", type=int)
    gf.add_argument("--height", type=int)
    gf.add_argument("--auto-res", action="store_true")
    gf.add_argument("--bounds", type=float, nargs=4, metavar=("XMIN", "YMIN", "XMAX", "YMAX"))
    gf.add_argument("--policy", choices=POLICIES, default="mid")
    gf.add_argument("--smooth-iters", type=int, default=100)
    gf.add_argument("--order", type=int, default=1)
    gf.add_argument("--lambda", dest="step", type=float, default=0.2)
    gf.add_argument("--tolerance", type=float, default=1e-8)
    gf.add_argument("--levels", type=int, default=1)
    gf.add_argument("--out-pgm")
    gf.add_argument("--out-csv")
    gf.add_argument("--report", action="store_true", help="print a key=value run summary")
    gf.set_defaults(func=cmd_grid_fit)

    mf = sub.add_parser("mesh-fit", help="fit id,value samples on a mesh")
    mf.add_argument("--mesh", required=True)
    mf.add_argument("--input", required=True)
    mf.add_argument("--space", choices=("vertex", "cell"), default="vertex")
    mf.add_argument("--mode", choices=("int", "real"), default="real")
    mf.add_argument("--policy", choices=POLICIES, default="mid")
    mf.add_argument("--n", type=int, help="level count for --mode int (default: largest guiding level)")
    mf.add_argument("--out-off")
    mf.add_argument("--out-obj")
    mf.add_argument("--out-values")
    mf.set_defaults(func=cmd_mesh_fit)

    h = sub.add_parser("harmonic", help="harmonic relaxation of a real GVF fit")
    h.add_argument("--mesh", required=True)
    h.add_argument("--input", required=True)
    h.add_argument("--space", choices=("vertex", "cell"), default="vertex")
    h.add_argument("--policy", choices=POLICIES, default="mid")
    h.add_argument("--iters", type=int, default=100)
    h.add_argument("--out-values")
    h.add_argument("--trace")
    h.set_defaults(func=cmd_harmonic)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc.report.witness}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InputError, MeshError, GuidingError, GraphError, ValueError, OSError) as exc:
        print(f"error ({args.command}): {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
