"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error. Data errors are
printed to stderr prefixed with the subsystem that raised them.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import experiments, fitting, linkage, model, stats, synth
from .baselines import geary_c, moran_i
from .errors import SaStatError
from .synth import GenSpec


class _UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse variant that reports usage problems with exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise _UsageExit()


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _build_parser() -> _Parser:
    p = _Parser(prog="sastat", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        return sp

    sp = add("linkage", "build a merge order from a dataset")
    sp.add_argument("--method", required=True, choices=sorted(linkage.BUILDERS))
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--dims", type=int, choices=(2, 3), default=2)
    sp.add_argument("--out", required=True)
    sp.add_argument("--matrix-cap", type=int, default=linkage.DEFAULT_MATRIX_CAP)

    for name in ("sa", "trace"):
        sp = add(name, "compute the autocorrelation statistic over a merge order")
        sp.add_argument("--order", required=True)
        sp.add_argument("--in", dest="infile", required=True)
        sp.add_argument("--dims", type=int, choices=(2, 3), default=2)
        sp.add_argument("--feature", default=None)
        if name == "sa":
            sp.add_argument("--trace", dest="trace_out", default=None)
        else:
            sp.add_argument("--out", required=True)

    for name in ("moran", "geary"):
        sp = add(name, f"compute {name}'s statistic with inverse-distance weights")
        sp.add_argument("--in", dest="infile", required=True)
        sp.add_argument("--dims", type=int, choices=(2, 3), default=2)
        sp.add_argument("--feature", default=None)

    sp = add("gen", "write a synthetic dataset CSV")
    sp.add_argument("--kind", required=True, choices=("iid", "uniform", "grid", "disk"))
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--radius", type=float, default=0.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--in", dest="infile", default=None, help="base dataset (disk kind)")
    sp.add_argument("--dims", type=int, choices=(2, 3), default=2)
    sp.add_argument("--feature", default=None)
    sp.add_argument("--out", required=True)

    sp = add("bench", "time statistics across sizes; write a bench CSV")
    sp.add_argument("--sizes", type=_int_list, required=True)
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--quad-cap", type=int, default=experiments.DEFAULT_QUAD_CAP)
    sp.add_argument("--matrix-cap", type=int, default=linkage.DEFAULT_MATRIX_CAP)
    sp.add_argument("--out", required=True)

    sp = add("exp-disk", "disk-averaging sensitivity sweep")
    sp.add_argument("--n", type=int, default=1000)
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--radii-min", type=float, default=1e-3)
    sp.add_argument("--radii-max", type=float, default=1.0)
    sp.add_argument("--radii-count", type=int, default=13)
    sp.add_argument("--out", required=True)

    sp = add("exp-grid", "grid-sampling convergence sweep with sigmoid fits")
    sp.add_argument("--ks", type=_int_list, required=True)
    sp.add_argument("--n-min", type=int, default=100)
    sp.add_argument("--n-max", type=int, default=100_000)
    sp.add_argument("--n-count", type=int, default=13)
    sp.add_argument("--reps", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--quad-cap", type=int, default=4000)
    sp.add_argument("--out", required=True)

    sp = add("exp-subsample", "statistics on random coordinate subsamples")
    sp.add_argument("--in", dest="infile", required=True)
    sp.add_argument("--dims", type=int, choices=(2, 3), default=2)
    sp.add_argument("--feature", default=None)
    sp.add_argument("--ms", type=_int_list, required=True)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)

    sp = add("fit", "fit the log-sigmoid saturation model to an (n,value) CSV")
    sp.add_argument("--in", dest="infile", required=True)
    return p


def _pick_feature(data: model.Dataset, name: str | None) -> model.FeatureVector:
    if name is not None:
        return data.feature(name)
    if len(data.features) == 1:
        return next(iter(data.features.values()))
    raise model.DataError(
        f"--feature required: dataset has features {sorted(data.features)}"
    )


def _cmd_linkage(args) -> None:
    data = model.read_dataset(args.infile, args.dims)
    if args.method in ("average", "median", "furthest"):
        order = linkage.build_order(args.method, data.points, matrix_cap=args.matrix_cap)
    else:
        order = linkage.build_order(args.method, data.points)
    model.write_merge_order(order, args.out)
    print(f"wrote {args.out} ({args.method}, n={order.n})")


def _cmd_sa(args) -> None:
    data = model.read_dataset(args.infile, args.dims)
    order = model.read_merge_order(args.order, data.n)
    fv = _pick_feature(data, args.feature)
    want_trace = getattr(args, "trace_out", None) is not None or args.command == "trace"
    result = stats.compute_sa(order, fv, want_trace=want_trace)
    print(f"S_A = {result.value:.6g} (n={result.n}, feature={fv.name}, order={order.method})")
    out = getattr(args, "trace_out", None) or getattr(args, "out", None)
    if want_trace and out:
        stats.trace_export(result, out)
        print(f"wrote trace {out}")


def _cmd_baseline(args) -> None:
    data = model.read_dataset(args.infile, args.dims)
    fv = _pick_feature(data, args.feature)
    fn = moran_i if args.command == "moran" else geary_c
    label = "I" if args.command == "moran" else "C"
    result = fn(data.points, fv)
    print(f"{label} = {result.value:.6g} (n={result.n}, W={result.weight_total:.6g})")


def _cmd_gen(args) -> None:
    kind = {
        "iid": "iid-normal",
        "uniform": "uniform-coords",
        "grid": "grid-sample",
        "disk": "disk-average",
    }[args.kind]
    base = None
    feature = args.feature or synth.FEATURE_NAME
    if kind == "disk-average":
        if args.infile is None:
            raise model.DataError("gen --kind disk needs --in with a base dataset")
        base = model.read_dataset(args.infile, args.dims)
    spec = GenSpec(kind, n=args.n, k=args.k, radius=args.radius, seed=args.seed, feature=feature)
    data = spec.generate(base)
    model.write_dataset(data, args.out)
    print(f"wrote {args.out} (n={data.n}, features={list(data.features)})")


def _cmd_bench(args) -> None:
    records, notices = experiments.run_timing(
        args.sizes, args.seed, reps=args.reps, quad_cap=args.quad_cap, matrix_cap=args.matrix_cap
    )
    experiments.write_bench_csv(records, args.out, notices)
    for note in notices:
        print(f"notice: {note}", file=sys.stderr)
    print(f"wrote {args.out} ({len(records)} records)")


def _cmd_exp_disk(args) -> None:
    radii = experiments.log_spaced_radii(args.radii_min, args.radii_max, args.radii_count)
    result = experiments.run_disk(args.n, radii, args.reps, args.seed)
    experiments.write_sweep_csv(result.rows, args.out, "radius")
    for name, radius in result.half_range_radius.items():
        shown = f"{radius:.6g}" if radius is not None else "undefined (flat sweep)"
        print(f"half-range radius [{name}] = {shown}")
    print(f"wrote {args.out}")


def _cmd_exp_grid(args) -> None:
    ns = np.unique(
        np.logspace(np.log10(args.n_min), np.log10(args.n_max), args.n_count).astype(int)
    )
    result = experiments.run_grid(args.ks, [int(v) for v in ns], args.reps, args.seed,
                                  quad_cap=args.quad_cap)
    experiments.write_grid_csv(result, args.out)
    for k, fit in result.fits.items():
        lo, hi = fit.ci_s_max
        print(
            f"k={k}: s_max = {fit.s_max:.6g} (95% CI [{lo:.6g}, {hi:.6g}]), "
            f"a = {fit.a:.6g}, b = {fit.b:.6g}"
        )
    print(f"wrote {args.out}")


def _cmd_exp_subsample(args) -> None:
    data = model.read_dataset(args.infile, args.dims)
    fv = _pick_feature(data, args.feature)
    rows = experiments.run_subsample(data, fv.name, args.ms, args.reps, args.seed)
    experiments.write_sweep_csv(rows, args.out, "m")
    print(f"wrote {args.out}")


def _cmd_fit(args) -> None:
    samples = []
    with open(Path(args.infile), "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(ln for ln in fh if not ln.startswith("#"))
        header = next(reader, None)
        if header is None or len(header) < 2:
            raise model.DataError(f"{args.infile}: expected a two-column (n,value) CSV")
        for row in reader:
            samples.append((int(row[0]), float(row[1])))
    fit = fitting.fit_log_sigmoid(samples)
    lo, hi = fit.ci_s_max
    print(f"s_max = {fit.s_max:.6g} (95% CI [{lo:.6g}, {hi:.6g}])")
    print(f"a = {fit.a:.6g}")
    print(f"b = {fit.b:.6g}")
    print(f"rss = {fit.rss:.6g}")


_HANDLERS = {
    "linkage": _cmd_linkage,
    "sa": _cmd_sa,
    "trace": _cmd_sa,
    "moran": _cmd_baseline,
    "geary": _cmd_baseline,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "exp-disk": _cmd_exp_disk,
    "exp-grid": _cmd_exp_grid,
    "exp-subsample": _cmd_exp_subsample,
    "fit": _cmd_fit,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit:
        return 1
    try:
        _HANDLERS[args.command](args)
    except SaStatError as exc:
        print(f"{exc.module}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        name = getattr(exc, "filename", None)
        where = f" ({name})" if name else ""
        print(f"io: {exc}{where}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"sastat: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
