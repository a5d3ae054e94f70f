"""``bandgap-lab`` command line.

Every subcommand prints a JSON summary on stdout and writes its reports plus
a ``manifest.json`` into ``--out-dir``.  Exit status: 0 on success, 2 for
input errors, 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bands import WeightedPointSet, single_band_ratio_scan
from .determinant import PerturbationDeterminant, reg_order
from .disk import (
    DiskFunctionSpec,
    JoukowskiMap,
    joukowski_ratios,
    polar_grid,
    random_blaschke,
    ratio_stats,
    verify_disk_theorem,
)
from .errors import DomainError, InputError, NumericalFailure
from .io import RunManifest, dumps, fingerprint_file, load_json, write_csv, write_json
from .jacobi import FiniteBandOperator
from .linalg import max_order
from .perturbations import PerturbationSpec, parse_complex
from .spectrum import discrete_spectrum, lt_family, sup_ratio

EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _check_order(*ns):
    cap = max_order()
    for n in ns:
        if n < 1:
            raise InputError(f"truncation order must be positive, got {n}")
        if n > cap:
            raise InputError(f"truncation order {n} exceeds the cap {cap}; raise BANDGAP_LAB_MAX_N")


def _load_operator(path):
    return FiniteBandOperator.from_json(load_json(path))


def _load_perts(path, seed):
    """One or more perturbation specs; ``seed`` (if given) replaces the file seeds in order."""
    obj = load_json(path)
    items = obj if isinstance(obj, list) else [obj]
    if not items:
        raise InputError(f"{path}: empty perturbation list")
    perts = [PerturbationSpec.from_json(o) for o in items]
    if seed is not None:
        perts = [replace(p, seed=seed + i) for i, p in enumerate(perts)]
    return perts


def _disk_spec(obj):
    if not isinstance(obj, dict):
        raise InputError("disk function spec must be a JSON object")
    zeros = [parse_complex(z) for z in obj.get("zeros", [])]
    mult = obj.get("multiplicities", [1] * len(zeros))
    atoms = tuple(parse_complex(c) for c in obj.get("atoms", []))
    weights = tuple(float(w) for w in obj.get("weights", []))
    pts = WeightedPointSet(np.asarray(zeros, dtype=complex), np.asarray(mult, dtype=int))
    return DiskFunctionSpec(pts, atoms, weights)


# -- subcommands ----------------------------------------------------------------


def cmd_bands(args, run):
    op = _load_operator(args.spec)
    bands = op.bands
    report = {
        "kind": op.kind,
        "edges": list(bands.edges),
        "gaps": [{"lo": lo, "hi": hi, "width": hi - lo} for lo, hi in bands.gaps],
        "n_bands": bands.n_bands,
    }
    run.write_json("bands.json", report)
    return report


def cmd_spectrum(args, run):
    op = _load_operator(args.spec)
    (pert,) = _load_perts(args.pert, args.seed)[:1]
    _check_order(args.n1, args.n2)
    if args.scale is not None:
        pert = pert.with_scale(args.scale)
    run.seeds["perturbation"] = pert.seed
    spec = discrete_spectrum(op, pert, args.n1, args.n2, eta=args.eta, method=args.method)
    report = {"operator": op.to_json(), "perturbation": pert.to_json(), **spec.to_json()}
    run.write_json("spectrum.json", report)
    run.write_csv("spectrum.csv", ["re", "im", "multiplicity", "stable", "drift"], spec.csv_rows())
    return {"n_entries": len(spec.entries), "entries": [e.to_json() for e in spec.entries]}


def cmd_lt_verify(args, run):
    op = _load_operator(args.spec)
    base = _load_perts(args.pert, None)
    if args.count > 1:
        if len(base) != 1:
            raise InputError("--count needs a single template perturbation")
        seed0 = base[0].seed if args.seed is None else args.seed
        perts = [replace(base[0], seed=seed0 + i) for i in range(args.count)]
    else:
        perts = _load_perts(args.pert, args.seed)
    _check_order(args.n1, args.n2)
    run.seeds["perturbations"] = [p.seed for p in perts]
    reports = lt_family(op, perts, args.scales, args.p, args.eps, (args.n1, args.n2),
                        eta=args.eta, method=args.method, jobs=args.jobs)
    rows = []
    it = iter(reports)
    for i, pert in enumerate(perts):
        for t in args.scales:
            r = next(it)
            rows.append((i, pert.seed, t, r.extra["schatten_norm"], r.value, r.bound_side,
                         r.ratio, r.extra["n_eigenvalues"], r.extra["max_drift"]))
    run.write_csv("lt_verify.csv", ["instance", "seed", "t", "schatten_norm", "sum", "bound_side",
                                    "ratio", "n_eigenvalues", "max_drift"], rows)
    summary = {"functional": reports[0].functional if reports else None, "p": args.p, "eps": args.eps,
               "sizes": [args.n1, args.n2], "n_reports": len(reports), "sup_ratio": sup_ratio(reports),
               "all_finite": all(np.isfinite(r.ratio) for r in reports)}
    run.write_json("lt_verify.json", {**summary, "reports": [r.to_json() for r in reports]})
    return summary


def cmd_det(args, run):
    op = _load_operator(args.spec)
    (pert,) = _load_perts(args.pert, args.seed)[:1]
    n = args.n1
    _check_order(n)
    run.seeds["perturbation"] = pert.seed
    det = PerturbationDeterminant.from_operator(op, pert, n)
    xs = np.linspace(args.re_min, args.re_max, args.grid_n)
    ys = np.linspace(args.im_min, args.im_max, args.grid_n)
    rows, skipped = [], 0
    for y in ys:
        for x in xs:
            lam = complex(x, y)
            try:
                s = det.sample(lam, args.p)
            except DomainError:
                skipped += 1
                continue
            rows.append((x, y, s.k, s.log_modulus, float(np.angle(s.value)), s.bound_side, s.ratio))
    run.write_csv("det.csv", ["re", "im", "k", "log_abs_g", "arg_g", "bound_side", "ratio"], rows)
    logs = np.array([r[3] for r in rows])
    summary = {"order": n, "p": args.p, "k": reg_order(args.p), "n_samples": len(rows),
               "skipped_on_bands": skipped, "all_finite": bool(np.all(np.isfinite(logs))),
               "max_ratio": max((r[6] for r in rows), default=None)}
    run.write_json("det.json", summary)
    return summary


def cmd_disk_verify(args, run):
    if args.family:
        obj = load_json(args.family)
        specs = [_disk_spec(o) for o in (obj if isinstance(obj, list) else [obj])]
    else:
        seed = 0 if args.seed is None else args.seed
        run.seeds["blaschke"] = seed
        rng = np.random.default_rng(seed)
        specs = [random_blaschke(rng) for _ in range(args.count)]
    eps_list = args.eps_list
    rows, reports = [], []
    for i, spec in enumerate(specs):
        for eps in eps_list:
            r = verify_disk_theorem(spec, eps)
            reports.append({"index": i, **r.to_json()})
            rows.append((i, r.kind, eps, r.value, r.K, r.ratio, int(r.passed)))
    run.write_csv("disk_verify.csv", ["index", "kind", "eps", "sum", "K", "ratio", "passed"], rows)
    summary = {"n_functions": len(specs), "eps": eps_list, "n_reports": len(reports),
               "violations": sum(1 for r in reports if not r["passed"])}
    run.write_json("disk_verify.json", {**summary, "reports": reports})
    return summary


def cmd_joukowski(args, run):
    jmap = JoukowskiMap(args.alpha, args.beta)
    grid = polar_grid(args.grid_n, args.grid_n, args.r0, args.r1)
    w, lam, r1, r2 = joukowski_ratios(jmap, grid)
    run.write_csv("joukowski.csv", ["w_re", "w_im", "lam_re", "lam_im", "r1", "r2"],
                  zip(w.real, w.imag, lam.real, lam.imag, r1, r2))
    lo, hi = single_band_ratio_scan(args.alpha, args.beta)
    summary = {"alpha": args.alpha, "beta": args.beta, "capacity": jmap.capacity,
               "n_points": int(w.size), "r1": ratio_stats(r1), "r2": ratio_stats(r2),
               "single_band_ratio": {"min": lo, "max": hi}}
    run.write_json("joukowski.json", summary)
    return {k: summary[k] for k in ("alpha", "beta", "n_points")} | {
        "r1": [summary["r1"]["min"], summary["r1"]["max"]],
        "r2": [summary["r2"]["min"], summary["r2"]["max"]]}


# -- plumbing --------------------------------------------------------------------


class _Run:
    def __init__(self, out_dir, manifest):
        self.out = Path(out_dir)
        self.manifest = manifest
        self.seeds = manifest.seeds

    def write_json(self, name, obj):
        write_json(self.out / name, obj)

    def write_csv(self, name, header, rows):
        write_csv(self.out / name, header, rows)


COMMANDS = {
    "bands": cmd_bands,
    "spectrum": cmd_spectrum,
    "lt-verify": cmd_lt_verify,
    "det": cmd_det,
    "disk-verify": cmd_disk_verify,
    "joukowski": cmd_joukowski,
}
INPUT_FLAGS = ("spec", "pert", "family")


def build_parser():
    parser = argparse.ArgumentParser(prog="bandgap-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for reports and manifest.json")
    common.add_argument("--seed", type=int, default=None, help="base seed for every random choice")

    def op_args(p, pert=True):
        p.add_argument("--spec", required=True, help="operator JSON")
        if pert:
            p.add_argument("--pert", required=True, help="perturbation JSON (object or list)")

    def size_args(p, n1=1000, n2=2000):
        p.add_argument("--n1", type=int, default=n1)
        p.add_argument("--n2", type=int, default=n2)
        p.add_argument("--eta", type=float, default=None, help="pollution distance to the bands")
        p.add_argument("--method", choices=("auto", "dense", "window"), default="auto")

    p = sub.add_parser("bands", parents=[common], help="band edges and gaps")
    op_args(p, pert=False)

    p = sub.add_parser("spectrum", parents=[common], help="stable discrete spectrum")
    op_args(p)
    size_args(p)
    p.add_argument("--scale", type=float, default=None, help="override the perturbation scale t")

    p = sub.add_parser("lt-verify", parents=[common], help="eigenvalue sums over a perturbation family")
    op_args(p)
    size_args(p)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--count", type=int, default=1, help="instances generated from a template spec")
    p.add_argument("--scales", type=_float_list, default=[0.25, 0.5, 1.0, 2.0])
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("det", parents=[common], help="regularized determinant on a rectangle")
    op_args(p)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--n1", type=int, default=400, help="truncation order")
    p.add_argument("--re-min", type=float, default=-4.0)
    p.add_argument("--re-max", type=float, default=4.0)
    p.add_argument("--im-min", type=float, default=-2.0)
    p.add_argument("--im-max", type=float, default=2.0)
    p.add_argument("--grid-n", type=int, default=21)

    p = sub.add_parser("disk-verify", parents=[common], help="zero sums of disk test functions")
    p.add_argument("--family", default=None, help="JSON list of disk function specs")
    p.add_argument("--count", type=int, default=100, help="random Blaschke products when no family is given")
    p.add_argument("--eps", dest="eps_list", type=_float_list, default=[0.1, 0.5, 0.9])

    p = sub.add_parser("joukowski", parents=[common], help="distance ratios under the Joukowski map")
    p.add_argument("--alpha", type=float, default=-2.0)
    p.add_argument("--beta", type=float, default=2.0)
    p.add_argument("--grid-n", type=int, default=200)
    p.add_argument("--r0", type=float, default=0.05)
    p.add_argument("--r1", type=float, default=0.999)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "out_dir")}
    manifest = RunManifest(args.command, params, seeds={"seed": args.seed}, version=__version__)
    t0 = time.perf_counter()
    try:
        for key in INPUT_FLAGS:
            path = getattr(args, key, None)
            if path:
                try:
                    manifest.inputs[key] = fingerprint_file(path)
                except OSError as exc:
                    raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        run = _Run(out, manifest)
        summary = COMMANDS[args.command](args, run)
    except InputError as exc:
        print(f"bandgap-lab {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"bandgap-lab {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    manifest.wall_time = time.perf_counter() - t0
    write_json(out / "manifest.json", manifest.to_json())
    sys.stdout.write(dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
