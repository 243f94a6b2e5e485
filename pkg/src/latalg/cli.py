"""Command-line front end.

Reports are machine-readable JSON on stdout (byte-identical for identical
configurations, seed included); human summaries go to stderr.  Exit codes:
0 success/consistent, 1 property violation found, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ball import BallGrid, vanishes_on_ball, vanishes_on_reals
from .cylinder import CylinderGrid, constant_one, cylinder_extension, generator, star_product
from .discretize import (
    atomize, build_partition, discrete_weight, discretize_function, verify_bounds,
)
from .expr import ParseError, parse, variables
from .freenorm import SearchConfig, norm_sandwich
from .models import model_suite, model_to_json
from .rewrite import polynomial_majorant

USAGE_ERROR = 2
VIOLATION = 1


def _echo(args: argparse.Namespace, **extra) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    params.update(extra)
    return {"version": __version__, "command": args.command, "params": params}


def _emit(report: dict, summary: str) -> None:
    print(json.dumps(report, sort_keys=True))
    print(summary, file=sys.stderr)


def _parse_expr_or_exit(text: str):
    try:
        return parse(text)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR) from None


def _parse_gens(text: str | None, names: tuple[str, ...], n: int | None) -> dict:
    """Parse ``"v=e1;w=0.5,0.5"`` into vectors; default: basis in name order."""
    if text:
        gens = {}
        for part in text.split(";"):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise SystemExit(USAGE_ERROR)
            name, value = part.split("=", 1)
            gens[name.strip()] = value.strip()
        parsed: dict[str, np.ndarray] = {}
        dim = n or 0
        for name, value in gens.items():
            if value.startswith("e") and value[1:].isdigit():
                index = int(value[1:]) - 1
                dim = max(dim, index + 1, 1)
                vec = np.zeros(index + 1)
                vec[index] = 1.0
                parsed[name] = vec
            else:
                parsed[name] = np.asarray([float(x) for x in value.split(",")], dtype=float)
                dim = max(dim, parsed[name].shape[0])
        out = {}
        for name, vec in parsed.items():
            if vec.shape[0] > dim:
                print(f"error: generator for {name!r} exceeds dimension {dim}", file=sys.stderr)
                raise SystemExit(USAGE_ERROR)
            full = np.zeros(dim)
            full[: vec.shape[0]] = vec
            out[name] = full
        missing = [name for name in names if name not in out]
        if missing:
            print(f"error: no generators for variables {missing}", file=sys.stderr)
            raise SystemExit(USAGE_ERROR)
        return out
    dim = n or max(len(names), 1)
    if len(names) > dim:
        print(f"error: {len(names)} variables but dimension {dim}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    gens = {}
    for i, name in enumerate(names):
        vec = np.zeros(dim)
        vec[i] = 1.0
        gens[name] = vec
    return gens


def cmd_check_identity(args: argparse.Namespace) -> int:
    e = _parse_expr_or_exit(args.expr)
    real = vanishes_on_reals(e, scale=3.0, samples=args.iters * 100,
                             seed=args.seed, tol=args.tol)
    report = _echo(args)
    report["vanishes_on_reals"] = real.vanishes
    report["real_residual"] = real.max_scaled_residual
    if not real.vanishes:
        report["witness"] = real.witness
        report["verdict"] = "non-identity"
        _emit(report, f"not an identity; witness {real.witness}")
        return 0

    majorant = polynomial_majorant(e)
    names = variables(e)
    rng = np.random.default_rng([args.seed % 2**32, 61])
    worst = 0.0
    worst_model = None
    for model in model_suite(args.seed):
        for _ in range(5):
            assignment = {name: model.random_element(rng) for name in names}
            value = model.evaluate(e, assignment).sup_norm()
            bound = float(majorant.evaluate(
                {name: el.sup_norm() for name, el in assignment.items()})) if names else 0.0
            scaled = value / (1.0 + bound)
            if scaled > worst:
                worst, worst_model = scaled, model_to_json(model)
    report["model_residual"] = worst
    consistent = worst <= args.tol
    report["verdict"] = "identity" if consistent else "transport-violation"
    if not consistent:
        report["violating_model"] = worst_model
    _emit(report, f"identity transport residual {worst:.3e}")
    return 0 if consistent else VIOLATION


def cmd_kernel(args: argparse.Namespace) -> int:
    e = _parse_expr_or_exit(args.expr)
    names = variables(e)
    gens = _parse_gens(args.gens, names, args.n)
    dim = max((v.shape[0] for v in gens.values()), default=args.n or 1)
    points = args.grid_sphere if args.grid_sphere % 2 == 1 else args.grid_sphere + 1
    grid = BallGrid(dim, max(points, 3))
    ball = vanishes_on_ball(e, gens, grid, tol=args.tol)
    real = vanishes_on_reals(e, scale=3.0, seed=args.seed, tol=args.tol)
    if not ball.vanishes:
        verdict = "nonzero on ball"
    elif real.vanishes:
        verdict = "identity"
    else:
        verdict = "ball-kernel witness"
    report = _echo(args)
    report.update({
        "verdict": verdict,
        "ball_residual": ball.max_residual,
        "real_residual": real.max_scaled_residual,
    })
    _emit(report, f"{verdict} (ball residual {ball.max_residual:.3e})")
    return 0


def cmd_surface(args: argparse.Namespace) -> int:
    if args.n != 2:
        print("error: surfaces are emitted for dimension 2 only", file=sys.stderr)
        return USAGE_ERROR
    grid = CylinderGrid.regular(2, r_levels=args.grid_r, face_points=args.grid_sphere)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    one = constant_one(grid)
    surfaces = {
        "generator_e1.csv": generator([1.0, 0.0], grid),
        "generator_e2.csv": generator([0.0, 1.0], grid),
        "unit_star_unit.csv": star_product(one, one),
    }
    if args.expr:
        e = _parse_expr_or_exit(args.expr)
        gens = _parse_gens(args.gens, variables(e), 2)
        surfaces["expression.csv"] = cylinder_extension(e, gens, grid)
    files = []
    for name, surface in surfaces.items():
        path = out_dir / name
        surface.to_csv(path)
        files.append(str(path))
    report = _echo(args)
    report["files"] = sorted(files)
    _emit(report, f"wrote {len(files)} surfaces to {out_dir}")
    return 0


def cmd_norm(args: argparse.Namespace) -> int:
    e = _parse_expr_or_exit(args.expr)
    names = variables(e)
    gens = _parse_gens(args.gens, names, args.n)
    config = SearchConfig(search_iters=args.iters, seed=args.seed,
                          delta_list=tuple(args.delta or (2.0 ** -5, 2.0 ** -6, 2.0 ** -7)))
    sandwich = norm_sandwich(e, gens, config)
    report = _echo(args)
    report.update({"lower": sandwich.lower, "upper": sandwich.upper,
                   "witness": sandwich.witness.to_json(), "iters": args.iters})
    _emit(report, f"norm in [{sandwich.lower:.6g}, {sandwich.upper:.6g}]")
    return 0


def cmd_discretize(args: argparse.Namespace) -> int:
    e = _parse_expr_or_exit(args.expr)
    names = variables(e)
    n = args.n or max(len(names), 1)
    deltas = args.delta or [2.0 ** -5]
    for delta in deltas:
        if not (0.0 < delta < 1.0):
            print(f"error: delta must lie in (0, 1), got {delta}", file=sys.stderr)
            return USAGE_ERROR
    gens = _parse_gens(args.gens, names, n)
    grid = CylinderGrid.regular(n, r_levels=args.grid_r, face_points=args.grid_sphere)
    w = np.broadcast_to(grid.r_levels[:, None], grid.shape)
    originals = {name: generator(vec, grid).values for name, vec in gens.items()}
    runs = []
    all_ok = True
    for delta in deltas:
        partition = build_partition(delta)
        splits, keys = [], []
        for name in sorted(originals):
            values = originals[name]
            splits.extend([np.maximum(values, 0.0), np.maximum(-values, 0.0)])
            keys.append(name)
        try:
            atoms = atomize(splits, w, partition)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return VIOLATION
        weights = discrete_weight(w, atoms, partition)
        discretes = [discretize_function(s, atoms, partition) for s in splits]
        composite_gens = {}
        for i, name in enumerate(keys):
            coeffs = discretes[2 * i] - discretes[2 * i + 1]
            composite_gens[name] = (originals[name], coeffs)
        bounds = verify_bounds(splits, discretes, w, weights, atoms, delta,
                               pair_trials=args.iters, seed=args.seed,
                               composite=e, composite_gens=composite_gens)
        runs.append(bounds.to_json())
        all_ok = all_ok and bounds.ok
    report = _echo(args)
    report["runs"] = runs
    _emit(report, f"{len(runs)} discretization runs, ok={all_ok}")
    return 0 if all_ok else VIOLATION


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--expr", help="expression text")
    sub.add_argument("--gens", help='generator assignment, e.g. "v=e1;w=e2" or "v=0.5,0.5"')
    sub.add_argument("--n", type=int, default=None, help="ambient dimension")
    sub.add_argument("--grid-r", type=int, default=33, dest="grid_r",
                     help="radial levels for cylinder grids")
    sub.add_argument("--grid-sphere", type=int, default=8, dest="grid_sphere",
                     help="points per face axis (cylinder) or per axis (ball)")
    sub.add_argument("--delta", type=float, action="append",
                     help="mesh parameter; repeatable")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--tol", type=float, default=1e-9)
    sub.add_argument("--iters", type=int, default=100)
    sub.add_argument("--out", help="output path (directory for surfaces)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="latalg",
        description="Lattice-algebra expression toolkit: identity checks, "
                    "kernel classification, cylinder surfaces, norm sandwiches "
                    "and level-set discretization.")
    parser.add_argument("--version", action="version", version=f"latalg {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    commands = {
        "check-identity": cmd_check_identity,
        "kernel": cmd_kernel,
        "surface": cmd_surface,
        "norm": cmd_norm,
        "discretize": cmd_discretize,
    }
    for name, func in commands.items():
        sub = subparsers.add_parser(name)
        _add_common(sub)
        sub.set_defaults(func=func)
    args = parser.parse_args(argv)
    if args.command != "surface" and not args.expr:
        print("error: --expr is required", file=sys.stderr)
        return USAGE_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
