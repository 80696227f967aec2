"""Command-line interface: ``frechetproj {dist,project,guard,cpack,gen,mc}``.

Exit codes: 0 success, 2 usage or input error, 3 a validator rejected a
result that should hold by construction.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators, guarding, io, metrics, montecarlo, packing
from .errors import CurveFormatError, DegenerateDistanceError, DimensionError
from .geom import as_point, project_curve, sample_unit_vector

EXIT_OK, EXIT_USAGE, EXIT_INVARIANT = 0, 2, 3


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _load_pair(a, b):
    P, Q = io.load_curve(a), io.load_curve(b)
    if P.shape[1] != Q.shape[1]:
        raise UsageError(f"{a} has dimension {P.shape[1]} but {b} has dimension {Q.shape[1]}")
    return P, Q


# ---------------------------------------------------------------- commands


def cmd_dist(args):
    P, Q = _load_pair(args.P, args.Q)
    res = (metrics.discrete_frechet if args.kind == "frechet" else metrics.dtw)(P, Q)
    print(io.fmt(res.value))
    if args.witness:
        lines = ["i,j"] + [f"{i},{j}" for i, j in res.witness]
        Path(args.witness).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_project(args):
    P = io.load_curve(args.curve)
    if args.direction is not None:
        u = as_point(args.direction, "direction")
        norm = float(np.linalg.norm(u))
        if not abs(norm - 1.0) <= 1e-12:
            raise UsageError(f"direction must have unit length, got norm {norm!r}")
    elif args.seed is not None:
        u = sample_unit_vector(P.shape[1], args.seed)
    else:
        raise UsageError("give --direction or --seed")
    if u.shape[0] != P.shape[1]:
        raise UsageError(f"direction has dimension {u.shape[0]}, curve {P.shape[1]}")
    text = io.format_curve(project_curve(P, u), "direction " + " ".join(io.fmt(x) for x in u))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_guard(args):
    if args.matrix:
        if args.curves:
            raise UsageError("give either two curve files or --matrix, not both")
        D = io.read_matrix(args.matrix)
        P = Q = None
    else:
        if len(args.curves) != 2:
            raise UsageError("guard needs two curve files (or --matrix)")
        P, Q = _load_pair(*args.curves)
        D = metrics.distance_matrix(P, Q)
    delta = metrics.frechet_from_matrix(D).value
    if args.trim:
        gs = guarding.trim_matrix(D) if P is None else guarding.trim_full(P, Q)
    else:
        if delta == 0.0:
            raise DegenerateDistanceError("distance zero: guarding sets and distortion are undefined")
        gs = guarding.build_guarding(D, delta, args.theta, check_delta=False)
    check = guarding.verify_guarding(D, gs, gs.theta, delta)
    if not check:
        raise InvariantError(f"guarding set failed validation: {check.describe()}")
    out = Path(args.out)
    if args.format == "json":
        rows = [{"i": i, "j": j, "delta_ij": v} for i, j, v in guarding.guarding_rows(D, gs)]
        _dump_json(rows, out)
        side = guarding.write_guarding(None, out.with_name(out.stem + "_sidecar.json"), D, gs)
    else:
        side = guarding.write_guarding(out, out.with_suffix(".json"), D, gs)
    print(f"size {side['size']} theta {io.fmt(side['theta'])} delta {io.fmt(side['delta'])}")
    return EXIT_OK


def cmd_cpack(args):
    P = io.load_curve(args.curve)
    rep = packing.packedness_estimate(P, args.resolution)
    inside = packing.ball_curve_length(P, rep.center, rep.radius) if rep.estimate > 0 else 0.0
    if inside < rep.estimate * rep.radius - 1e-9:
        raise InvariantError("packedness witness does not reproduce")
    out = rep.to_dict()
    out.update(vertices=int(P.shape[0]), resolution=args.resolution, flag_above=args.flag_above,
               flagged=bool(rep.estimate > args.flag_above))
    _dump_json(out, args.out)
    return EXIT_OK


def cmd_gen(args):
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = args.stem or args.family
    if args.family == "wedge":
        if args.t is None or args.alpha is None:
            raise UsageError("wedge needs --t and --alpha")
        P, Q, analytic = generators.gen_wedge(generators.WedgeSpec(args.t, args.alpha))
    elif args.family == "star":
        if args.k is None:
            raise UsageError("star needs --k")
        P, Q, analytic = generators.gen_star(generators.StarSpec(args.k, args.hats))
    elif args.family == "fork":
        if args.t is None:
            raise UsageError("fork needs --t")
        spec = generators.ForkSpec(args.t, args.delta, args.theta)
        D = generators.gen_fork_matrix(spec)
        io.write_matrix(outdir / f"{stem}.matrix", D, f"fork t={args.t}")
        _dump_json({"family": "fork", "t": args.t, "delta": args.delta, "theta": args.theta,
                    "claimed_size": generators.fork_count(args.t)}, outdir / f"{stem}.json")
        return EXIT_OK
    else:
        if args.t is None or args.seed is None:
            raise UsageError("walk needs --t and --seed")
        W = generators.gen_random_walk(args.t, args.d, args.step, args.seed)
        io.write_curve(outdir / f"{stem}.txt", W)
        _dump_json({"family": "walk", "t": args.t, "d": args.d, "step": args.step, "seed": args.seed},
                   outdir / f"{stem}.json")
        return EXIT_OK
    io.write_curve(outdir / f"{stem}_P.txt", P)
    io.write_curve(outdir / f"{stem}_Q.txt", Q)
    _dump_json(analytic, outdir / f"{stem}.json")
    return EXIT_OK


def read_manifest(path, min_len=None, max_len=None):
    """Manifest lines are ``id path`` or just ``path``; paths are relative to the manifest."""
    path = Path(path)
    ids, curves = [], []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(maxsplit=1)
        cid, rel = (parts[0], parts[1]) if len(parts) == 2 else (str(len(ids)), parts[0])
        if cid in ids:
            raise CurveFormatError(f"duplicate id {cid!r}", path, lineno)
        target = (path.parent / rel) if not Path(rel).is_absolute() else Path(rel)
        if not target.exists():
            raise CurveFormatError(f"cannot read {target}", path, lineno)
        C = io.load_curve(target)
        if (min_len and C.shape[0] < min_len) or (max_len and C.shape[0] > max_len):
            continue
        ids.append(cid)
        curves.append(C)
    return ids, curves


def read_directory(path, min_len=None, max_len=None):
    ids, curves = [], []
    for f in sorted(p for p in Path(path).iterdir() if p.is_file()):
        C = io.load_curve(f)
        if (min_len and C.shape[0] < min_len) or (max_len and C.shape[0] > max_len):
            continue
        ids.append(f.name)
        curves.append(C)
    return ids, curves


def cmd_mc(args):
    sources = [x for x in (args.manifest, args.corpus_dir, args.walks) if x is not None]
    if len(sources) != 1:
        raise UsageError("give exactly one of --manifest, --corpus-dir, --walks")
    if args.manifest:
        ids, curves = read_manifest(args.manifest, args.min_complexity, args.max_complexity)
    elif args.corpus_dir:
        ids, curves = read_directory(args.corpus_dir, args.min_complexity, args.max_complexity)
    else:
        ids = [f"walk{k}" for k in range(args.walks)]
        curves = [generators.gen_random_walk(args.walk_length, args.d, 1.0, montecarlo.substream(args.seed, 4, k))
                  for k in range(args.walks)]
    if len(curves) < 2:
        raise UsageError("the corpus needs at least two curves")
    dims = {C.shape[1] for C in curves}
    if len(dims) != 1:
        raise UsageError(f"corpus mixes dimensions {sorted(dims)}")
    config = montecarlo.ExperimentConfig(
        samples=args.samples, seed=args.seed, kind=args.kind, prefix_lengths=tuple(args.prefix),
        subcurve=not args.no_subcurve, gammas=tuple(args.gamma), workers=args.workers,
    )
    pairs = montecarlo.sample_pairs(len(curves), args.pairs, args.seed)
    report = montecarlo.run_corpus(curves, pairs, config)
    worst = max((float(r.ratios.max()) for r in report.rows if r.ratios.size), default=0.0)
    if worst > 1.0 + 1e-12:
        raise InvariantError(f"projected distance exceeds the original (ratio {worst!r})")
    paths = montecarlo.write_report(report, args.out_dir)
    if args.format == "json":
        table = montecarlo.bucket_stats(report.rows, config.buckets, config.gammas)
        _dump_json(table, Path(args.out_dir) / "mc_buckets.json")
    _dump_json({"ids": ids, "pairs": [[ids[a], ids[b]] for a, b in pairs]}, Path(args.out_dir) / "mc_pairs.json")
    print(f"{len(report.rows)} rows, {sum(r.ratios.size for r in report.rows)} samples -> {paths['raw'].parent}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser():
    ap = argparse.ArgumentParser(prog="frechetproj", description="Frechet distance under random projections")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="discrete Frechet or DTW distance of two curve files")
    p.add_argument("P")
    p.add_argument("Q")
    p.add_argument("--kind", choices=("frechet", "dtw"), default="frechet")
    p.add_argument("--witness", help="write the witness traversal as CSV")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("project", help="project a curve onto a line")
    p.add_argument("curve")
    p.add_argument("--direction", type=float, nargs="+")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("guard", help="guarding set of two curves or a distance matrix")
    p.add_argument("curves", nargs="*")
    p.add_argument("--matrix")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--trim", action="store_true", help="trim to a 4-guarding set")
    p.add_argument("--out", required=True, help="member table (CSV, or JSON with --format json)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_guard)

    p = sub.add_parser("cpack", help="packedness estimate of a curve")
    p.add_argument("curve")
    p.add_argument("--resolution", type=int, default=8)
    p.add_argument("--flag-above", type=float, default=3.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cpack)

    p = sub.add_parser("gen", help="write generated curves or matrices")
    p.add_argument("family", choices=("wedge", "star", "fork", "walk"))
    p.add_argument("--t", type=_positive_int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--hats", action="store_true")
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--stem")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("mc", help="Monte Carlo distortion experiment")
    p.add_argument("--manifest")
    p.add_argument("--corpus-dir", help="directory of curve files (native or GISCUP format)")
    p.add_argument("--walks", type=_positive_int, help="synthetic corpus of this many random walks")
    p.add_argument("--walk-length", type=_positive_int, default=60)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--pairs", type=_positive_int, default=10)
    p.add_argument("--samples", type=_positive_int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=("frechet", "dtw"), default="frechet")
    p.add_argument("--prefix", type=_int_list, default=[10, 50])
    p.add_argument("--no-subcurve", action="store_true")
    p.add_argument("--gamma", type=_float_list, default=list(montecarlo.DEFAULT_GAMMAS))
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--min-complexity", type=int)
    p.add_argument("--max-complexity", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_mc)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CurveFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, DimensionError, DegenerateDistanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvariantError, AssertionError) as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
