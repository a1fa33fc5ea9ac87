"""Seeded Monte Carlo campaigns over random lifts.

Trial ``t`` of a batch uses the lift seed ``trial_seed(master_seed, t)``;
results are collected by trial index, so a batch is a pure function of
(base graph, n, trials, master seed, solver settings) whatever the number
of worker processes.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from multiprocessing import get_context
from statistics import NormalDist

import numpy as np
from threadpoolctl import threadpool_limits

from ._rng import check_seed, trial_seed
from .errors import BatchFileError, InputError, SolverError
from .graphs import DENSE_CAP, parse_edge_list, serialize_edge_list, universal_cover_radius
from .lift import random_lift
from .spectra import DEFAULT_TOL, RAMANUJAN_RTOL, lambda_new

SCHEMA_VERSION = 1
QUANTILE_METHOD = "linear"


@dataclass(frozen=True)
class TrialBatch:
    base_name: str
    base_text: str
    m: int
    d: int
    n: int
    trial_count: int
    master_seed: int
    values: tuple  # lambda(H) in trial order
    seeds: tuple
    methods: tuple
    max_residual: float
    solver: dict = field(default_factory=dict)
    wall_time: dict = field(default_factory=dict, compare=False)

    @property
    def samples(self):
        """lambda(H) values sorted ascending."""
        return np.sort(np.asarray(self.values, dtype=float))

    @property
    def threshold(self):
        return universal_cover_radius(self.d)

    def ramanujan_flags(self):
        return np.asarray(self.values) <= self.threshold + RAMANUJAN_RTOL * self.d

    def to_dict(self):
        return {
            "base_name": self.base_name,
            "base_text": self.base_text,
            "m": self.m,
            "d": self.d,
            "n": self.n,
            "trial_count": self.trial_count,
            "master_seed": self.master_seed,
            "values": list(self.values),
            "seeds": list(self.seeds),
            "methods": list(self.methods),
            "max_residual": self.max_residual,
            "solver": dict(self.solver),
            "wall_time": dict(self.wall_time),
        }

    @classmethod
    def from_dict(cls, obj):
        try:
            batch = cls(
                base_name=str(obj["base_name"]),
                base_text=str(obj["base_text"]),
                m=int(obj["m"]),
                d=int(obj["d"]),
                n=int(obj["n"]),
                trial_count=int(obj["trial_count"]),
                master_seed=int(obj["master_seed"]),
                values=tuple(float(v) for v in obj["values"]),
                seeds=tuple(int(s) for s in obj["seeds"]),
                methods=tuple(str(s) for s in obj["methods"]),
                max_residual=float(obj["max_residual"]),
                solver=dict(obj["solver"]),
                wall_time=dict(obj["wall_time"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise BatchFileError(f"batch record is incomplete: {exc}") from None
        if not (len(batch.values) == len(batch.seeds) == len(batch.methods) == batch.trial_count):
            raise BatchFileError("batch record has inconsistent trial counts")
        return batch

    def to_csv(self):
        buf = io.StringIO()
        buf.write("trial,seed,lambda_new,ramanujan\n")
        for t, (s, v, r) in enumerate(zip(self.seeds, self.values, self.ramanujan_flags())):
            buf.write(f"{t},{s},{v!r},{'true' if r else 'false'}\n")
        return buf.getvalue()


# -- running trials --------------------------------------------------------

def default_max_steps(order, k=2):
    return 10 * k * max(1, math.ceil(math.log2(max(order, 2))))


def _one_trial(base, n, seed, dense_cap, tol):
    h = random_lift(base, n, seed)
    try:
        return lambda_new(h, dense_cap=dense_cap, tol=tol, seed=seed)
    except SolverError as first:
        try:
            return lambda_new(
                h, dense_cap=dense_cap, tol=tol, seed=seed, max_steps=2 * default_max_steps(h.order)
            )
        except SolverError as second:
            raise SolverError(
                f"trial with lift seed {seed} failed twice: {first}; retry: {second}"
            ) from None


def _run_chunk(base_text, base_name, n, master_seed, indices, dense_cap, tol):
    base = parse_edge_list(base_text, base_name)
    out = []
    with threadpool_limits(1):
        for t in indices:
            seed = trial_seed(master_seed, t)
            start = time.perf_counter()
            try:
                rep = _one_trial(base, n, seed, dense_cap, tol)
            except SolverError as exc:
                raise SolverError(f"trial {t}: {exc}") from None
            out.append((t, seed, rep.lambda_new, rep.residual, rep.method, time.perf_counter() - start))
    return out


def _chunks(trials, jobs):
    size = max(1, math.ceil(trials / (4 * jobs)))
    return [list(range(i, min(i + size, trials))) for i in range(0, trials, size)]


def run_trials(base, n, trials, master_seed, jobs=1, *, dense_cap=DENSE_CAP, tol=DEFAULT_TOL):
    """Sample lambda(H) over ``trials`` independent random n-lifts of ``base``."""
    if trials < 1:
        raise InputError(f"trials must be >= 1, got {trials}")
    if n < 1:
        raise InputError(f"covering number must be >= 1, got {n}")
    if jobs < 1:
        raise InputError(f"jobs must be >= 1, got {jobs}")
    master_seed = check_seed(master_seed)
    text = serialize_edge_list(base)
    start = time.perf_counter()
    chunks = _chunks(trials, jobs)
    args = (text, base.name, n, master_seed)
    rows = []
    if jobs == 1:
        for c in chunks:
            rows.extend(_run_chunk(*args, c, dense_cap, tol))
    else:
        with ProcessPoolExecutor(max_workers=jobs, mp_context=get_context("spawn")) as pool:
            futures = [pool.submit(_run_chunk, *args, c, dense_cap, tol) for c in chunks]
            for f in futures:
                rows.extend(f.result())
    rows.sort(key=lambda r: r[0])
    times = [r[5] for r in rows]
    return TrialBatch(
        base_name=base.name,
        base_text=text,
        m=base.m,
        d=base.d,
        n=n,
        trial_count=trials,
        master_seed=master_seed,
        values=tuple(float(r[2]) for r in rows),
        seeds=tuple(r[1] for r in rows),
        methods=tuple(r[4] for r in rows),
        max_residual=float(max(r[3] for r in rows)),
        solver={"dense_cap": dense_cap, "tol": tol},
        wall_time={
            "total": time.perf_counter() - start,
            "mean_trial": float(np.mean(times)),
            "max_trial": float(np.max(times)),
            "jobs": jobs,
        },
    )


def default_jobs():
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


# -- distribution summaries ------------------------------------------------

def _samples(data):
    if isinstance(data, TrialBatch):
        arr = data.samples
    elif isinstance(data, Ecdf):
        arr = data.samples
    else:
        arr = np.sort(np.asarray(data, dtype=float))
    if arr.size == 0:
        raise InputError("empty sample")
    return arr


@dataclass(frozen=True, eq=False)
class Ecdf:
    """Right-continuous empirical distribution function."""

    samples: np.ndarray

    def __post_init__(self):
        arr = np.sort(np.asarray(self.samples, dtype=float))
        if arr.size == 0:
            raise InputError("ecdf of an empty sample")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    def __call__(self, t):
        return np.searchsorted(self.samples, t, side="right") / self.samples.size

    @property
    def points(self):
        return np.unique(self.samples)

    @property
    def steps(self):
        return self(self.points)

    def to_csv(self):
        buf = io.StringIO()
        buf.write("lambda,ecdf\n")
        for x, y in zip(self.points, self.steps):
            buf.write(f"{float(x)!r},{float(y)!r}\n")
        return buf.getvalue()


def ecdf(data):
    return Ecdf(_samples(data))


def quantiles(data, qs):
    """Linear interpolation of order statistics; returns values with the method."""
    qs = np.asarray(qs, dtype=float)
    if np.any((qs < 0) | (qs > 1)):
        raise InputError("quantile levels must lie in [0, 1]")
    values = np.quantile(_samples(data), qs, method=QUANTILE_METHOD)
    return {"method": QUANTILE_METHOD, "q": qs.tolist(), "values": np.atleast_1d(values).tolist()}


def wilson_interval(successes, total, confidence=0.95):
    if total < 1:
        raise InputError("Wilson interval needs at least one trial")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    # the endpoints are exactly 0 and 1 at the extremes; avoid cancellation there
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return lo, hi


def ramanujan_probability(batch, confidence=0.95):
    """Fraction of trials at or below ``2 sqrt(d-1)`` (plus solver slack) and its Wilson interval."""
    flags = batch.ramanujan_flags()
    if flags.size == 0:
        raise InputError("empty batch")
    k = int(flags.sum())
    return k / flags.size, wilson_interval(k, flags.size, confidence)


def ks_distance(a, b):
    """Two-sample Kolmogorov-Smirnov statistic, exact over the merged breakpoints."""
    ea = a if isinstance(a, Ecdf) else ecdf(a)
    eb = b if isinstance(b, Ecdf) else ecdf(b)
    grid = np.union1d(ea.points, eb.points)
    return float(np.max(np.abs(ea(grid) - eb(grid))))


# -- persistence -----------------------------------------------------------

def _canonical(payload):
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def batch_checksum(batch):
    return hashlib.sha256(_canonical(batch.to_dict()).encode()).hexdigest()


def persist(batch, path):
    """Write the batch as JSON with a schema version and a checksum."""
    doc = {"schema": SCHEMA_VERSION, "sha256": batch_checksum(batch), "batch": batch.to_dict()}
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
    return doc["sha256"]


def load(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise BatchFileError(f"cannot read batch file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise BatchFileError(f"batch file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMA_VERSION:
        found = doc.get("schema") if isinstance(doc, dict) else None
        raise BatchFileError(f"batch file schema {found!r} is not {SCHEMA_VERSION}")
    if "batch" not in doc or "sha256" not in doc:
        raise BatchFileError("batch file lacks its payload or checksum")
    batch = TrialBatch.from_dict(doc["batch"])
    if batch_checksum(batch) != doc["sha256"]:
        raise BatchFileError("batch file checksum mismatch")
    return batch


# -- plot emission ---------------------------------------------------------

def box_table(batches, label="n"):
    """CSV of five-number summaries, one row per batch, for box plots."""
    buf = io.StringIO()
    buf.write(f"{label},min,q25,median,q75,max\n")
    for b in batches:
        q = quantiles(b, [0.0, 0.25, 0.5, 0.75, 1.0])["values"]
        key = b.n if label == "n" else b.base_name
        buf.write(f"{key}," + ",".join(repr(float(v)) for v in q) + "\n")
    return buf.getvalue()


def box_gnuplot(csv_name, threshold, title):
    return f"""# box plot of lambda(H): whiskers min..max, box q25..q75, line at the median
set datafile separator ','
set title '{title}'
set xlabel 'covering number n'
set ylabel 'lambda(H)'
set boxwidth 0.5
set style fill empty
set xtics ()
set key off
threshold = {threshold!r}
plot '{csv_name}' every ::1 using 0:3:2:6:5:xticlabels(1) with candlesticks whiskerbars lw 1, \\
     '' every ::1 using 0:4:4:4:4 with candlesticks lw 2, \\
     threshold with lines dashtype 2 lc rgb 'black'
"""


def ecdf_gnuplot(series, threshold, title):
    """``series`` is a list of ``(csv_name, label)`` pairs."""
    plots = ", \\\n     ".join(f"'{name}' every ::1 using 1:2 with steps title '{label}'" for name, label in series)
    return f"""# empirical distribution functions of lambda(H)
set datafile separator ','
set title '{title}'
set xlabel 'lambda(H)'
set ylabel 'empirical c.d.f.'
set yrange [0:1]
set key left top
set arrow from {threshold!r}, graph 0 to {threshold!r}, graph 1 nohead dashtype 2
plot {plots}
"""
