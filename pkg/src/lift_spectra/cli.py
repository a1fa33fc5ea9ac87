"""Command-line front end: ``lift-spectra <command> [options]``.

Every command writes its results and a ``manifest.json`` into ``--out``;
``replay --manifest`` re-runs a manifest and compares the data files.
Exit codes: 0 ok, 2 usage, 3 input, 4 solver, 5 inequality violated.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__, kernels
from .errors import CounterexampleError, InputError, LiftSpectraError
from .graphs import CATALOG_NAMES, DENSE_CAP, base_spectrum, lambda_of, load_graph, validate
from .lift import random_lift
from .mc import (
    box_gnuplot,
    box_table,
    default_jobs,
    ecdf,
    ecdf_gnuplot,
    ks_distance,
    persist,
    quantiles,
    ramanujan_probability,
    run_trials,
)
from .spectra import DEFAULT_TOL, dense_lift_spectrum, lambda_new
from .verify import check_cheeger_sandwich, cheeger_bruteforce, run_suite

SEED_ENV = "LIFT_SPECTRA_SEED"
FIG1_NS = (50, 100, 200)
FIG2_PANELS = {
    "a": (("k4", 100), ("petersen", 100), ("dodecahedral", 100)),
    "b": (("k4", 500), ("petersen", 200), ("dodecahedral", 100)),
}
# arguments that do not change data outputs and are not replayed
NON_DATA_ARGS = ("out", "jobs", "format", "command", "manifest")


class Output:
    """Writes files below one directory and records their checksums."""

    def __init__(self, root):
        self.root = os.path.abspath(root)
        os.makedirs(self.root, exist_ok=True)
        self.files = {}

    def write(self, name, text, data=True):
        if os.path.isabs(name) or os.path.normpath(name).startswith(".."):
            raise InputError(f"refusing to write outside the output directory: {name}")
        path = os.path.join(self.root, name)
        with open(path, "w") as fh:
            fh.write(text)
        if data:
            self.files[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def json(self, name, obj, data=True):
        return self.write(name, json.dumps(obj, indent=2, sort_keys=True) + "\n", data)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        value = int(env, 0)
    except ValueError:
        raise InputError(f"{SEED_ENV}={env!r} is not an integer") from None
    if not 0 <= value < 2 ** 64:
        raise InputError(f"{SEED_ENV} must lie in [0, 2**64)")
    return value


def _quantile_levels(text):
    try:
        qs = [float(q) for q in text.split(",") if q.strip()]
    except ValueError:
        raise InputError(f"cannot parse quantile list {text!r}") from None
    if not qs:
        raise InputError("empty quantile list")
    return qs


def _emit(args, obj, csv_text=None):
    if args.format == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# -- commands --------------------------------------------------------------

def cmd_catalog(args, out):
    names = [args.base] if args.base else ["k4", "petersen", "dodecahedral", "cycle(4)", "complete(2)", "bouquet(2)"]
    rows = []
    for name in names:
        g = load_graph(name)
        v = validate(g)
        row = {
            "name": g.name,
            "m": g.m,
            "d": g.d,
            "edges": len(g.edges),
            "connected": v.connected,
            "bipartite": v.bipartite,
            "simple": v.simple,
            "spectrum": base_spectrum(g).values.tolist(),
        }
        row["lambda"] = lambda_of(g) if v.connected else None
        rows.append(row)
    out.json("catalog.json", rows)
    csv = "name,m,d,lambda\n" + "".join(f"{r['name']},{r['m']},{r['d']},{r['lambda']!r}\n" for r in rows)
    out.write("catalog.csv", csv)
    _emit(args, rows, csv)


def _lift_or_base(args):
    g = load_graph(args.base)
    return g, random_lift(g, args.n, _seed(args))


def cmd_spectrum(args, out):
    g, h = _lift_or_base(args)
    rep = lambda_new(h, dense_cap=args.dense_cap, tol=args.lanczos_tol, seed=_seed(args))
    result = {"base": g.name, "n": args.n, "seed": _seed(args), **rep.to_dict()}
    out.json("spectrum.json", result)
    csv = None
    if h.order <= args.dense_cap:
        csv = dense_lift_spectrum(h, dense_cap=args.dense_cap).to_csv()
        out.write("spectrum.csv", csv)
    _emit(args, result, csv)


def cmd_lift(args, out):
    g, h = _lift_or_base(args)
    out.write("lift.json", h.to_json() + "\n")
    edges = h.edge_list()
    csv = "u,v\n" + "".join(f"{u},{v}\n" for u, v in edges.tolist())
    out.write("lift_edges.csv", csv)
    summary = {"base": g.name, "n": args.n, "seed": _seed(args), "order": h.order, "edges": int(len(edges))}
    _emit(args, summary, csv)


def _batch(args, base, n, out, stem):
    g = load_graph(base)
    batch = run_trials(
        g, n, args.trials, _seed(args), args.jobs, dense_cap=args.dense_cap, tol=args.lanczos_tol
    )
    persist(batch, os.path.join(out.root, f"{stem}.batch.json"))
    out.write(f"{stem}.samples.csv", batch.to_csv())
    return batch


def _batch_summary(batch, qs):
    frac, (lo, hi) = ramanujan_probability(batch)
    return {
        "base": batch.base_name,
        "n": batch.n,
        "trials": batch.trial_count,
        "master_seed": batch.master_seed,
        "threshold": batch.threshold,
        "ramanujan_fraction": frac,
        "wilson95": [lo, hi],
        "quantiles": quantiles(batch, qs),
        "max_residual": batch.max_residual,
    }


def cmd_ecdf(args, out):
    qs = _quantile_levels(args.quantiles)
    batch = _batch(args, args.base, args.n, out, "trials")
    e = ecdf(batch)
    out.write("ecdf.csv", e.to_csv())
    summary = _batch_summary(batch, qs)
    out.json("summary.json", summary)
    _emit(args, summary, e.to_csv())


def cmd_verify(args, out):
    g = load_graph(args.base)
    reports = run_suite(g, args.n, _seed(args), lifts=args.lifts, spot_trials=args.trials, pairs=args.pairs)
    text = "".join(r.to_json() + "\n" for r in reports)
    out.write("reports.jsonl", text)
    worst = {r.name: {"margin": r.margin, "status": r.status} for r in reports}
    _emit(args, worst)
    bad = [r.name for r in reports if r.violated]
    if bad:
        raise CounterexampleError(f"violated: {', '.join(bad)} (see reports.jsonl)")


def cmd_cheeger(args, out):
    g = load_graph(args.base)
    hval, S = cheeger_bruteforce(g)
    reports = check_cheeger_sandwich(g)
    result = {
        "base": g.name,
        "h": hval,
        "argmin": sorted(S),
        "reports": [r.to_dict() for r in reports],
    }
    out.json("cheeger.json", result)
    _emit(args, result)
    bad = [r.name for r in reports if r.violated]
    if bad:
        raise CounterexampleError(f"violated: {', '.join(bad)}")


def cmd_reproduce_fig1(args, out):
    qs = _quantile_levels(args.quantiles)
    ns = args.ns or list(FIG1_NS)
    batches = [_batch(args, args.base, n, out, f"fig1_n{n}") for n in ns]
    out.write("fig1_boxes.csv", box_table(batches))
    title = f"lambda(H) of random n-lifts of {batches[0].base_name}"
    out.write("fig1.gp", box_gnuplot("fig1_boxes.csv", batches[0].threshold, title))
    summary = [_batch_summary(b, qs) for b in batches]
    out.json("fig1_summary.json", summary)
    _emit(args, summary, box_table(batches))


def cmd_reproduce_fig2(args, out):
    qs = _quantile_levels(args.quantiles)
    panels = ["a", "b"] if args.panel == "both" else [args.panel]
    summary = {}
    for panel in panels:
        batches = []
        series = []
        for base, n in FIG2_PANELS[panel]:
            stem = f"fig2{panel}_{base}_n{n}"
            b = _batch(args, base, n, out, stem)
            out.write(f"{stem}.ecdf.csv", ecdf(b).to_csv())
            series.append((f"{stem}.ecdf.csv", f"{b.base_name} n={n}"))
            batches.append(b)
        names = [f"{b.base_name}@{b.n}" for b in batches]
        ks = [[ks_distance(a, b) for b in batches] for a in batches]
        csv = "," + ",".join(names) + "\n"
        csv += "".join(name + "," + ",".join(repr(v) for v in row) + "\n" for name, row in zip(names, ks))
        out.write(f"fig2{panel}_ks.csv", csv)
        title = "matched total size mn" if panel == "b" else "matched covering number n"
        out.write(f"fig2{panel}.gp", ecdf_gnuplot(series, batches[0].threshold, title))
        summary[panel] = {
            "batches": [_batch_summary(b, qs) for b in batches],
            "ks": {f"{names[i]} vs {names[j]}": ks[i][j] for i in range(len(names)) for j in range(i + 1, len(names))},
        }
    out.json("fig2_summary.json", summary)
    _emit(args, summary)


COMMANDS = {
    "catalog": cmd_catalog,
    "spectrum": cmd_spectrum,
    "lift": cmd_lift,
    "ecdf": cmd_ecdf,
    "verify": cmd_verify,
    "cheeger": cmd_cheeger,
    "reproduce-fig1": cmd_reproduce_fig1,
    "reproduce-fig2": cmd_reproduce_fig2,
}


def cmd_replay(args, out):
    try:
        with open(args.manifest) as fh:
            manifest = json.load(fh)
        command = manifest["command"]
        recorded = manifest["args"]
        files = manifest["outputs"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from None
    if command not in COMMANDS:
        raise InputError(f"manifest names unknown command {command!r}")
    argv = [command] + _argv_from(recorded) + ["--out", args.out, "--jobs", str(args.jobs), "--format", args.format]
    sub = build_parser().parse_args(argv)
    sub_out = Output(args.out)
    _run(sub, sub_out)
    mismatched = sorted(k for k, v in files.items() if sub_out.files.get(k) != v)
    result = {"command": command, "files": len(files), "identical": not mismatched, "mismatched": mismatched}
    sys.stderr.write(json.dumps(result, sort_keys=True) + "\n")
    if mismatched:
        raise LiftSpectraError(f"replay differs in {', '.join(mismatched)}")


def _argv_from(recorded):
    argv = []
    for key, value in sorted(recorded.items()):
        if value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, list):
            argv += [flag] + [str(v) for v in value]
        else:
            argv += [flag, repr(value) if isinstance(value, float) else str(value)]
    return argv


def _run(args, out):
    COMMANDS[args.command](args, out)
    data_args = {k: v for k, v in vars(args).items() if k not in NON_DATA_ARGS}
    if data_args.get("seed") is None and "seed" in data_args:
        data_args["seed"] = _seed(args)
    manifest = {
        "tool": "lift-spectra",
        "version": __version__,
        "backend": kernels.BACKEND,
        "command": args.command,
        "args": data_args,
        "outputs": out.files,
    }
    out.json("manifest.json", manifest, data=False)


def _seed_type(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="lift-spectra", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="lift-spectra-out", help="output directory (default: %(default)s)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="stdout format")
    common.add_argument("--seed", type=_seed_type, default=None, help=f"master seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--jobs", type=_positive_int, default=default_jobs(), help="worker processes")
    common.add_argument("--dense-cap", type=_positive_int, default=DENSE_CAP, help="largest order solved densely")
    common.add_argument("--lanczos-tol", type=float, default=DEFAULT_TOL, help="relative Lanczos residual tolerance")
    common.add_argument("--quantiles", default="0.25,0.5,0.75", help="comma-separated quantile levels")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], help="list catalog graphs and their spectra")
    p.add_argument("--base", default=None, help=f"one graph ({', '.join(CATALOG_NAMES)} or a file)")

    for name, text in (("spectrum", "lambda(H) of one random lift"), ("lift", "write one random lift")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--base", required=True)
        p.add_argument("--n", type=_positive_int, required=True)

    p = sub.add_parser("ecdf", parents=[common], help="lambda(H) distribution over many lifts")
    p.add_argument("--base", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=1000)

    p = sub.add_parser("verify", parents=[common], help="run the inequality checks")
    p.add_argument("--base", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, default=200, help="lifts per statistical spot check")
    p.add_argument("--lifts", type=_positive_int, default=10, help="lifts searched for dense subsets")
    p.add_argument("--pairs", type=_positive_int, default=200, help="random vector pairs per check")

    p = sub.add_parser("cheeger", parents=[common], help="exact Cheeger constant and its eigenvalue bounds")
    p.add_argument("--base", required=True)

    p = sub.add_parser("reproduce-fig1", parents=[common], help="box plots of lambda(H) for n in 50, 100, 200")
    p.add_argument("--base", default="petersen")
    p.add_argument("--ns", type=_positive_int, nargs="+", default=None, help="covering numbers")
    p.add_argument("--trials", type=_positive_int, default=1000)

    p = sub.add_parser("reproduce-fig2", parents=[common], help="ecdf overlays for K4, Petersen, Dodecahedral")
    p.add_argument("--panel", choices=("a", "b", "both"), default="b")
    p.add_argument("--trials", type=_positive_int, default=1000)

    p = sub.add_parser("replay", parents=[common], help="re-run a manifest and compare its data files")
    p.add_argument("--manifest", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = Output(args.out)
        if args.command == "replay":
            cmd_replay(args, out)
        else:
            _run(args, out)
    except LiftSpectraError as exc:
        sys.stderr.write(f"lift-spectra: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"lift-spectra: {exc}\n")
        return InputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
