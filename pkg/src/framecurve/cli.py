"""Command-line interface.

Subcommands: ``generate``, ``frames``, ``lift``, ``unlift``, ``geodesic``,
``dist``, ``distmat``, ``mean``, ``cluster`` and ``export``. Run
``framecurve <command> --help`` for the flags of each.

Exit codes: 0 success, 2 parse error, 3 precondition violation, 4 numerical
failure. Errors are reported on standard error with the offending file and,
where known, the sample indices.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import warnings

import numpy as np

from . import frames, generators
from .config import RunConfig, load_config
from .curvecore import ClosureClass, FramedCurve, GridSpec, Sign, hopf_map, lift, resample, sample_open, sample_periodic
from .errors import FrameCurveError, ParseError, PreconditionError
from .formats import CurveFile, atomic_write, fmt, matrix_from_text, matrix_to_text, quaternion_from_text, quaternion_to_text
from .geodesic import Mode, geodesic, shape_distance
from .mesh import tube_obj
from .quaternion import hopf_matrix, random_unit
from .stats import distance_matrix, k_medoids, mean_closed_curves

EXTRA_GENERATORS = ("fourier-loop", "planar-blob")


# loading ---------------------------------------------------------------------


def _resample_file(cf: CurveFile, grid: GridSpec) -> CurveFile:
    if cf.n_samples == grid.n_samples:
        return cf
    if cf.frame is not None:
        c = resample(cf.to_framed(), grid)
        return CurveFile(cf.id, cf.closed, grid.n_samples, np.asarray(c.gamma), np.asarray(c.V), cf.metadata)
    t = grid.times(cf.closed)
    pts = sample_periodic(cf.points, cf.grid, t) if cf.closed else sample_open(cf.points, cf.grid, t)
    return CurveFile(cf.id, cf.closed, grid.n_samples, pts, None, cf.metadata)


def _infer_mode(cf: CurveFile) -> Mode:
    if cf.closed:
        return Mode.CLOSED_FRAMED if cf.frame is not None else Mode.CLOSED_UNFRAMED
    return Mode.OPEN_FRAMED if cf.frame is not None else Mode.OPEN_UNFRAMED


def _model_input(cf: CurveFile, mode: Mode):
    """The object the pipeline for ``mode`` expects, built from a curve file."""
    closed_mode = mode in (Mode.CLOSED_FRAMED, Mode.CLOSED_UNFRAMED, Mode.PLANAR)
    if cf.closed != closed_mode:
        kind = "closed" if closed_mode else "open"
        raise PreconditionError(f"mode {mode.value} needs {kind} curves")
    if mode is Mode.PLANAR:
        return cf.points[:, 0] + 1j * cf.points[:, 1]
    if mode in (Mode.OPEN_FRAMED, Mode.CLOSED_FRAMED):
        if cf.frame is None:
            raise PreconditionError(f"mode {mode.value} needs frame columns (see 'framecurve frames')")
        return cf.to_framed()
    return cf.to_framed() if cf.frame is not None else cf.points


def _load_inputs(paths, cfg: RunConfig):
    files = []
    for p in paths:
        cf = CurveFile.read(p)
        try:
            files.append(_resample_file(cf, cfg.grid_spec))
        except FrameCurveError as exc:
            exc.path = p
            raise
    mode = Mode(cfg.mode) if cfg.mode else _infer_mode(files[0])
    inputs = []
    for p, cf in zip(paths, files):
        try:
            inputs.append(_model_input(cf, mode))
        except FrameCurveError as exc:
            exc.path = p
            raise
    return files, inputs, mode


def _curve_file(curve, id: str, closed: bool, grid: GridSpec, meta: dict) -> CurveFile:
    """Curve file for a pipeline output: a framed curve, points or complex samples."""
    if isinstance(curve, FramedCurve):
        return CurveFile.from_framed(curve, id, meta)
    pts = np.asarray(curve)
    if np.iscomplexobj(pts):
        pts = np.stack([pts.real, pts.imag, np.zeros(pts.shape)], axis=1)
    return CurveFile(id, closed, grid.n_samples, pts, None, meta)


def _write_json(path: str | None, data: dict) -> None:
    text = json.dumps(data, sort_keys=True, indent=2) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


# commands ----------------------------------------------------------------------


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ParseError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.replace("-", "_")] = float(v) if any(ch in v for ch in ".eE") else int(v)
        except ValueError:
            raise ParseError(f"--param {k}: not a number: {v!r}") from None
    return out


def cmd_generate(args, cfg: RunConfig) -> int:
    grid = cfg.grid_spec
    params = _parse_params(args.param)
    rng = np.random.default_rng(cfg.seed)
    try:
        if args.shape == "fourier-loop":
            gamma, vel = generators.fourier_loop(grid, rng, **params)
            closed = True
        elif args.shape == "planar-blob":
            if params:
                params = {"coeffs": tuple(params[k] for k in sorted(params))}
            c, dc = generators.planar_blob(grid, **params)
            gamma = np.stack([c.real, c.imag, np.zeros(c.shape)], axis=1)
            vel = np.stack([dc.real, dc.imag, np.zeros(dc.shape)], axis=1)
            closed = True
        else:
            gamma, vel = generators.GENERATORS[args.shape](grid, **params)
            closed = args.shape in generators.CLOSED_GENERATORS
    except TypeError as exc:
        raise ParseError(f"bad generator parameters: {exc}") from None
    if args.rotate:
        R = hopf_matrix(random_unit(rng))
        gamma, vel = gamma @ R.T, vel @ R.T
    meta = {"source": f"generator:{args.shape}"}
    if args.frame == "none":
        cf = CurveFile(args.id or args.shape, closed, grid.n_samples, gamma, None, meta)
    else:
        make = frames.rmf_frame if args.frame == "rmf" else frames.frenet_frame
        c = make(gamma, grid, closed=closed, velocity=vel)
        if args.twist:
            c = frames.add_full_twist(c, args.twist)
        cf = CurveFile.from_framed(c, args.id or args.shape, meta)
    cf.write(args.out)
    return 0


def cmd_frames(args, cfg: RunConfig) -> int:
    cf = CurveFile.read(args.input)
    grid = cf.grid
    make = frames.rmf_frame if args.kind == "rmf" else frames.frenet_frame
    c = make(cf.points, grid, closed=cf.closed)
    if args.twist:
        c = frames.add_full_twist(c, args.twist)
    meta = dict(cf.metadata, frame=args.kind)
    CurveFile.from_framed(c, cf.id, meta).write(args.out)
    return 0


def cmd_lift(args, cfg: RunConfig) -> int:
    cf = CurveFile.read(args.input)
    q = lift(cf.to_framed(), Sign.MINUS if args.minus else Sign.PLUS)
    atomic_write(args.out, quaternion_to_text(q, cf.id, cf.points[0]))
    if not args.quiet:
        sys.stdout.write(f"closure_class: {q.closure_class.value}\n")
    return 0


def cmd_unlift(args, cfg: RunConfig) -> int:
    try:
        with open(args.input, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", args.input) from None
    qid, q, base = quaternion_from_text(text, args.input)
    c = hopf_map(q)
    if q.closure_class is not ClosureClass.OPEN and not c.closed:
        sys.stderr.write("framecurve: warning: path does not satisfy the closure conditions; writing an open curve\n")
    c = c.with_gamma(np.asarray(c.gamma) + base, velocity=c.velocity)
    CurveFile.from_framed(c, qid, {"source": "unlift"}).write(args.out)
    return 0


def cmd_geodesic(args, cfg: RunConfig) -> int:
    files, (x0, x1), mode = _load_inputs([args.first, args.second], cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        path = geodesic(x0, x1, mode, cfg.steps, cfg.dp, cfg.grid_spec)
    msgs = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    os.makedirs(args.out, exist_ok=True)
    closed = mode in (Mode.CLOSED_FRAMED, Mode.CLOSED_UNFRAMED, Mode.PLANAR)
    width = max(3, len(str(cfg.steps)))
    names = []
    for k, (u, curve) in enumerate(zip(path.u, path.curves)):
        name = f"step_{k:0{width}d}.curve"
        meta = {"source": "geodesic", "u": fmt(u), "mode": mode.value}
        _curve_file(curve, f"{files[0].id}-{files[1].id}-{k}", closed, cfg.grid_spec, meta).write(os.path.join(args.out, name))
        names.append(name)
    reg = path.registration
    summary = {
        "mode": mode.value,
        "inputs": [files[0].id, files[1].id],
        "steps": names,
        "distance": path.distance,
        "normalized_distance": path.normalized_distance,
        "jordan_angles": list(path.jordan_angles) if path.jordan_angles is not None else None,
        "iterations": reg.iterations if reg is not None else 0,
        "seed_shift": int(reg.seed) if reg is not None else 0,
        "singular_samples": bool(path.singular),
        "warnings": msgs,
        "config": cfg.to_dict(),
    }
    _write_json(os.path.join(args.out, "summary.json"), summary)
    for m in msgs:
        sys.stderr.write(f"framecurve: warning: {m}\n")
    return 0


def cmd_dist(args, cfg: RunConfig) -> int:
    files, (x0, x1), mode = _load_inputs([args.first, args.second], cfg)
    raw, norm, reg = shape_distance(x0, x1, mode, cfg.dp, cfg.grid_spec)
    _write_json(args.out, {"mode": mode.value, "inputs": [f.id for f in files], "distance": raw, "normalized_distance": norm, "iterations": reg.iterations})
    return 0


def cmd_distmat(args, cfg: RunConfig) -> int:
    files, inputs, mode = _load_inputs(args.inputs, cfg)
    labels = [(f.id or os.path.basename(p)).replace(" ", "_") for f, p in zip(files, args.inputs)]
    if len(set(labels)) != len(labels):
        labels = [os.path.splitext(os.path.basename(p))[0].replace(" ", "_") for p in args.inputs]
    if len(set(labels)) != len(labels):
        labels = [f"{lab}_{i}" for i, lab in enumerate(labels)]
    dm = distance_matrix(inputs, mode, cfg.dp, labels, cfg.grid_spec, jobs=cfg.jobs)
    atomic_write(args.out, matrix_to_text(dm.labels, dm.d, mode.value, dm.failures))
    for (i, j), msg in sorted(dm.failures.items()):
        sys.stderr.write(f"framecurve: warning: pair {args.inputs[i]} / {args.inputs[j]}: {msg}\n")
    return 0


def cmd_mean(args, cfg: RunConfig) -> int:
    files, inputs, mode = _load_inputs(args.inputs, cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = mean_closed_curves(inputs, mode, cfg.dp, cfg.grid_spec)
    for w in caught:
        sys.stderr.write(f"framecurve: warning: {w.category.__name__}: {w.message}\n")
    meta = {"source": "mean", "mode": mode.value, "objective": fmt(res.history[-1]), "iterations": str(res.iterations)}
    _curve_file(res.curve, args.id, True, cfg.grid_spec, meta).write(args.out)
    return 0


def cmd_cluster(args, cfg: RunConfig) -> int:
    try:
        with open(args.matrix, encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", args.matrix) from None
    labels, d, mode, _ = matrix_from_text(text, args.matrix)
    res = k_medoids(d, args.k, seed=cfg.seed)
    out = {
        "k": args.k,
        "mode": mode,
        "seed": cfg.seed,
        "medoids": [labels[i] for i in res.medoid_indices],
        "assignment": {lab: labels[res.medoid_indices[a]] for lab, a in zip(labels, res.assignment)},
        "total_cost": res.total_cost,
        "cost_history": list(res.history),
    }
    _write_json(args.out, out)
    return 0


def cmd_export(args, cfg: RunConfig) -> int:
    paths = sorted(glob.glob(os.path.join(args.input, "step_*.curve"))) if os.path.isdir(args.input) else [args.input]
    if not paths:
        raise ParseError("no step_*.curve files found", args.input)
    os.makedirs(args.out, exist_ok=True)
    for p in paths:
        cf = CurveFile.read(p)
        if cf.frame is not None:
            c = cf.to_framed()
        else:
            c = frames.rmf_frame(cf.points, cf.grid, closed=cf.closed)
        name = os.path.splitext(os.path.basename(p))[0]
        atomic_write(os.path.join(args.out, name + ".obj"), tube_obj(c, args.radius, args.segments, name))
    return 0


# argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration")
    g.add_argument("--config", help="JSON config file (also FRAMECURVE_CONFIG)")
    g.add_argument("--grid", type=int, help="number of grid intervals (default 256)")
    g.add_argument("--mode", choices=[m.value for m in Mode], help="pipeline (default: inferred from the first input)")
    g.add_argument("--dp-window", dest="dp_window", type=int)
    g.add_argument("--seed-stride", dest="seed_stride", type=int)
    g.add_argument("--max-iters", dest="max_iters", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--steps", type=int, help="geodesic steps m; writes m + 1 curves")
    g.add_argument("--seed", type=int)
    g.add_argument("--jobs", type=int, help="worker processes for distmat")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="framecurve", description="Elastic shape analysis of framed space curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic curve")
    p.add_argument("shape", choices=sorted(generators.GENERATORS) + list(EXTRA_GENERATORS))
    p.add_argument("--frame", choices=["rmf", "frenet", "none"], default="rmf")
    p.add_argument("--twist", type=int, default=0, help="extra full turns of the framing")
    p.add_argument("--rotate", action="store_true", help="apply a random rotation drawn from --seed")
    p.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter")
    p.add_argument("--id")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("frames", help="compute a rotation-minimising or Frenet framing")
    p.add_argument("input")
    p.add_argument("--kind", choices=["rmf", "frenet"], default="rmf")
    p.add_argument("--twist", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_frames)

    p = sub.add_parser("lift", help="write the quaternionic lift of a framed curve")
    p.add_argument("input")
    p.add_argument("--minus", action="store_true", help="use the negative lift")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("unlift", help="map a quaternionic path back to a framed curve")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_unlift)

    p = sub.add_parser("geodesic", help="write the geodesic between two curves")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_geodesic)

    p = sub.add_parser("dist", help="print the shape distance between two curves")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--out", help="JSON output file (default stdout)")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("distmat", help="write the pairwise distance matrix")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distmat)

    p = sub.add_parser("mean", help="average closed curves")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--id", default="mean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("cluster", help="k-medoids clustering of a distance matrix")
    p.add_argument("matrix")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="JSON output file (default stdout)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("export", help="tube meshes (OBJ) for a geodesic directory or curve file")
    p.add_argument("input")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--segments", type=int, default=12)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export)

    for p in sub.choices.values():
        _common(p)
    return parser


def _where(exc: FrameCurveError, args) -> str:
    """Location prefix: the file the error came from, else the command's inputs."""
    if isinstance(exc, ParseError) and exc.path is not None:
        return ""
    path = getattr(exc, "path", None)
    if path is None:
        names = [getattr(args, k, None) for k in ("input", "matrix", "first", "second")]
        names = [n for n in names if n] + list(getattr(args, "inputs", None) or [])
        path = ", ".join(names)
    return f"{path}: " if path else ""


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    flags = {k: getattr(args, k, None) for k in RunConfig.__dataclass_fields__}
    try:
        cfg = load_config(flags, args.config)
        return args.func(args, cfg)
    except FrameCurveError as exc:
        sys.stderr.write(f"framecurve: {type(exc).__name__}: {_where(exc, args)}{exc}\n")
        return exc.exit_code
    except (ValueError, TypeError) as exc:
        sys.stderr.write(f"framecurve: invalid input: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
