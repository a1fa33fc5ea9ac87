"""Numerical checks of inequalities about base graphs and their lifts.

Every checker returns an ``InequalityReport`` with ``margin = rhs - lhs``
and a witness that reproduces ``lhs`` when evaluated again. Probabilistic
statements are checked as counterexample searches over random and greedy
inputs; at these sizes any violation points to a bug.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from ._rng import DOMAIN_SEARCH, check_seed, derive
from .decompose import (
    expected_bilinear,
    heavy_light_split,
    lattice_round,
    light_variance_bound,
    light_variance_quantity,
)
from .errors import InputError
from .graphs import lambda_of, second_eigenvalue, universal_cover_radius, validate
from .lift import edge_count, random_lift
from .spectra import RAMANUJAN_RTOL, lambda_new

CHEEGER_CAP = 24
INHERIT_TOL = 1e-7
# relative error allowed on a computed eigenvalue when it enters a bound
EIG_SLACK = RAMANUJAN_RTOL

OK = "ok"
VIOLATED = "violated"
SKIPPED = "skipped"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    witness: object = None
    samples_examined: int = 1
    status: str = ""
    note: str = ""
    margin: float = field(init=False)

    def __post_init__(self):
        for name in ("lhs", "rhs"):
            value = getattr(self, name)
            if isinstance(value, np.generic):
                object.__setattr__(self, name, value.item())
        margin = float(self.rhs) - float(self.lhs)
        object.__setattr__(self, "margin", margin)
        if not self.status:
            object.__setattr__(self, "status", OK if margin >= 0 else VIOLATED)

    @property
    def violated(self):
        return self.status == VIOLATED

    def to_dict(self):
        out = asdict(self)
        out["witness"] = _plain(self.witness)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_plain(v) for v in obj]
        return sorted(items) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def skipped(name, note, samples=0):
    return InequalityReport(name, 0.0, 0.0, None, samples, SKIPPED, note)


def worst(reports, name=None):
    """Aggregate to the smallest margin among applicable reports."""
    reports = list(reports)
    live = [r for r in reports if r.status in (OK, VIOLATED)]
    if not live:
        return skipped(name or (reports[0].name if reports else "empty"), "no applicable samples", len(reports))
    w = min(live, key=lambda r: r.margin)
    return InequalityReport(
        name or w.name,
        w.lhs,
        w.rhs,
        w.witness,
        sum(r.samples_examined for r in reports),
        note=w.note,
    )


def write_jsonl(reports, fh):
    for r in reports:
        fh.write(r.to_json() + "\n")


def _vertex_set(S, order, what):
    S = sorted(set(int(v) for v in S))
    if S and (S[0] < 0 or S[-1] >= order):
        raise InputError(f"{what} contains a vertex outside [0, {order})")
    return S


def _indicator(S, order):
    v = np.zeros(order)
    v[S] = 1.0
    return v


# -- expander mixing on base graphs ----------------------------------------

def base_edge_count(g, A, B):
    """Ordered pairs ``(a, b)`` with ``a in A``, ``b in B`` and ``a ~ b``."""
    a = _indicator(A, g.m)
    b = _indicator(B, g.m)
    return int(round(float(a @ g.adjacency() @ b)))


def check_mixing(g, A, B, lam=None):
    A = _vertex_set(A, g.m, "A")
    B = _vertex_set(B, g.m, "B")
    lam = lambda_of(g) if lam is None else lam
    e = base_edge_count(g, A, B)
    lhs = abs(e - g.d * len(A) * len(B) / g.m)
    rhs = lam * math.sqrt(len(A) * len(B))
    return InequalityReport("mixing", lhs, rhs, {"A": A, "B": B})


def _mixing_rows(g, lam, IA, IB):
    Adj = g.adjacency()
    e = np.rint(((IA @ Adj) * IB).sum(axis=1))
    a = IA.sum(axis=1)
    b = IB.sum(axis=1)
    lhs = np.abs(e - g.d * a * b / g.m)
    rhs = lam * np.sqrt(a * b)
    return lhs, rhs


def _report_rows(g, lam, IA, IB, name):
    lhs, rhs = _mixing_rows(g, lam, IA, IB)
    k = int(np.argmin(rhs - lhs))
    A = np.flatnonzero(IA[k]).tolist()
    B = np.flatnonzero(IB[k]).tolist()
    # rebuild from the witness so the reported lhs is the scalar checker's value
    rep = check_mixing(g, A, B, lam)
    return InequalityReport(name, rep.lhs, rep.rhs, rep.witness, len(lhs))


def mixing_exhaustive(g, chunk=1 << 14):
    """Every pair of subsets (``4**m`` pairs, empty sets included)."""
    if g.m > 10:
        raise InputError(f"exhaustive mixing check needs m <= 10, got {g.m}")
    lam = lambda_of(g)
    masks = np.arange(1 << g.m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(g.m)) & 1).astype(float)
    reports = []
    pairs = np.stack(np.meshgrid(masks, masks, indexing="ij"), axis=-1).reshape(-1, 2)
    for start in range(0, len(pairs), chunk):
        p = pairs[start:start + chunk]
        reports.append(_report_rows(g, lam, bits[p[:, 0]], bits[p[:, 1]], "mixing"))
    return worst(reports, "mixing")


def mixing_sampled(g, samples, seed, chunk=1 << 14):
    """Uniformly random subset pairs (each vertex in each set with probability 1/2)."""
    lam = lambda_of(g)
    rng = np.random.default_rng(derive(check_seed(seed), 0, DOMAIN_SEARCH))
    reports = []
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        IA = rng.integers(0, 2, size=(k, g.m)).astype(float)
        IB = rng.integers(0, 2, size=(k, g.m)).astype(float)
        reports.append(_report_rows(g, lam, IA, IB, "mixing"))
        done += k
    return worst(reports, "mixing")


# -- edge counts in lifts --------------------------------------------------

def log2sq(d):
    return math.log2(d) ** 2


def check_cut_bound(h, lam, A, B):
    """Edges between ``A`` and ``B`` against ``802 lam sqrt(|A||B|) + 75 (|A|+|B|) log^2 d``."""
    A = _vertex_set(A, h.order, "A")
    B = _vertex_set(B, h.order, "B")
    a, b = len(A), len(B)
    if a * b > (2 * h.order / lam) ** 2:
        return skipped("cut_bound", "|A||B| exceeds (2mn/lam)^2")
    lhs = edge_count(h, A, B)
    rhs = 802 * lam * math.sqrt(a * b) + 75 * (a + b) * log2sq(h.d)
    return InequalityReport("cut_bound", lhs, rhs, {"A": A, "B": B})


def check_small_cut(h, A, B):
    """Edges between small ``A`` and ``B`` against ``50 (|A| + |B|)``."""
    A = _vertex_set(A, h.order, "A")
    B = _vertex_set(B, h.order, "B")
    if len(A) + len(B) > h.n ** (2.0 / 3.0):
        return skipped("small_cut", "|A|+|B| exceeds n^(2/3)")
    lhs = edge_count(h, A, B)
    return InequalityReport("small_cut", lhs, 50 * (len(A) + len(B)), {"A": A, "B": B})


def greedy_dense_pairs(h, start, steps):
    """Grow ``A`` and ``B`` alternately, each time adding the vertex with the
    most edges into the other side (smallest index on ties).

    Yields ``(A, B, e(A, B))`` after every addition; a vertex may sit in
    both sets.
    """
    nbr = h.neighbor_table()
    N = h.order
    into_a = np.zeros(N, dtype=np.int64)  # ordered pairs from v into A
    into_b = np.zeros(N, dtype=np.int64)
    in_a = np.zeros(N, dtype=bool)
    in_b = np.zeros(N, dtype=bool)
    A, B = [], []
    e = 0
    for step in range(steps):
        side_a = step % 2 == 0
        if step == 0:
            v = int(start)
        else:
            score = np.where(in_a, -1, into_b) if side_a else np.where(in_b, -1, into_a)
            v = int(np.argmax(score))
            if score[v] < 0:
                break
        if side_a:
            e += int(into_b[v])
            in_a[v] = True
            A.append(v)
            np.add.at(into_a, nbr[v], 1)
        else:
            e += int(into_a[v])
            in_b[v] = True
            B.append(v)
            np.add.at(into_b, nbr[v], 1)
        yield A, B, e


def greedy_cut_search(h, lam, seed, starts=1, max_size=None):
    """Greedy search for ``A, B`` that come closest to breaking the cut bound."""
    rng = np.random.default_rng(derive(check_seed(seed), 1, DOMAIN_SEARCH))
    cap = (2 * h.order / lam) ** 2
    steps = 2 * h.order if max_size is None else 2 * max_size
    lg = log2sq(h.d)
    best = None
    examined = 0
    for start in rng.integers(0, h.order, size=starts):
        for A, B, e in greedy_dense_pairs(h, start, steps):
            a, b = len(A), len(B)
            if a * b > cap:
                break
            if not b:
                continue
            examined += 1
            margin = 802 * lam * math.sqrt(a * b) + 75 * (a + b) * lg - e
            if best is None or margin < best[0]:
                best = (margin, list(A), list(B))
    rep = check_cut_bound(h, lam, best[1], best[2])
    return InequalityReport(rep.name, rep.lhs, rep.rhs, rep.witness, examined, note="greedy")


def greedy_small_cut_search(h, seed, starts=1):
    rng = np.random.default_rng(derive(check_seed(seed), 2, DOMAIN_SEARCH))
    limit = int(math.floor(h.n ** (2.0 / 3.0) + 1e-9))
    best = None
    examined = 0
    for start in rng.integers(0, h.order, size=starts):
        for A, B, e in greedy_dense_pairs(h, start, limit):
            if not B:
                continue
            examined += 1
            margin = 50 * (len(A) + len(B)) - e
            if best is None or margin < best[0]:
                best = (margin, list(A), list(B))
    if best is None:
        return skipped("small_cut", "n^(2/3) < 1 leaves no sets to try")
    rep = check_small_cut(h, best[1], best[2])
    return InequalityReport(rep.name, rep.lhs, rep.rhs, rep.witness, examined, note="greedy")


def random_cut_search(h, lam, seed, samples, size=None):
    """Random ``A, B`` of a fixed size (default ``sqrt(mn)``)."""
    rng = np.random.default_rng(derive(check_seed(seed), 3, DOMAIN_SEARCH))
    size = int(round(math.sqrt(h.order))) if size is None else size
    reports = []
    for _ in range(samples):
        A = rng.choice(h.order, size=size, replace=False)
        B = rng.choice(h.order, size=size, replace=False)
        reports.append(check_cut_bound(h, lam, A, B))
    return worst(reports, "cut_bound")


# -- Cheeger constant ------------------------------------------------------

def cheeger_bruteforce(g):
    """Exact edge-isoperimetric constant and a minimising set.

    Loops never cross a cut and are ignored. Returns ``(h, S)`` with ``S``
    the minimiser of smallest bitmask among those not containing vertex
    ``m - 1``.
    """
    if g.m > CHEEGER_CAP:
        raise InputError(f"brute-force Cheeger needs m <= {CHEEGER_CAP}, got {g.m}")
    if g.m < 2:
        raise InputError("Cheeger constant needs at least two vertices")
    eu = np.array([u for u, v in g.edges if u != v], dtype=np.int64)
    ev = np.array([v for u, v in g.edges if u != v], dtype=np.int64)
    boundary, small, mask = kernels.cheeger_min(g.m, eu, ev)
    S = frozenset(v for v in range(g.m) if (mask >> v) & 1)
    return boundary / small, S


def edge_boundary(g, S):
    return sum(1 for u, v in g.edges if (u in S) != (v in S))


def check_cheeger_sandwich(g):
    """Both sides of ``(d - lam)/2 <= h <= sqrt(2 d (d - lam))``.

    Returns ``(lower, upper)`` reports for ``lam = lambda_of(g)``. For a
    bipartite graph that ``lam`` equals ``d``, which makes the upper bound
    0; those reports are marked degenerate and two more are appended using
    the second largest eigenvalue instead.

    ``lam`` is a floating-point eigenvalue, so each side is evaluated at
    ``lam -+ EIG_SLACK * d``, whichever favours the inequality; equality
    cases such as K3 would otherwise flip on the last bit.
    """
    if g.m > CHEEGER_CAP:
        raise InputError(f"brute-force Cheeger needs m <= {CHEEGER_CAP}, got {g.m}")
    if not validate(g).connected:
        raise InputError("Cheeger sandwich needs a connected graph")
    hval, S = cheeger_bruteforce(g)
    witness = {"S": sorted(S), "boundary": edge_boundary(g, set(S))}
    d = g.d
    bipartite = validate(g).bipartite
    reports = []
    variants = [("lambda", lambda_of(g))]
    if bipartite:
        variants.append(("lambda2", second_eigenvalue(g)))
    slack = EIG_SLACK * d
    for label, lam in variants:
        status = DEGENERATE if (bipartite and label == "lambda") else ""
        note = f"{label}={lam!r} +- {slack!r}" + ("; bipartite: lambda = d" if status else "")
        reports.append(
            InequalityReport(
                f"cheeger_lower[{label}]", max(0.0, (d - lam - slack) / 2), hval, witness, status=status, note=note
            )
        )
        reports.append(
            InequalityReport(
                f"cheeger_upper[{label}]", hval, math.sqrt(max(0.0, 2 * d * (d - lam + slack))), witness,
                status=status, note=note,
            )
        )
    return tuple(reports)


# -- whole-batch checks ----------------------------------------------------

def eigenvalue_bound(lam, d):
    """``7500 max(lam, sqrt d) log2 d``."""
    return 7500 * max(lam, math.sqrt(d)) * math.log2(d)


def check_eigenvalue_bound(reports, g, n):
    """Largest observed lift eigenvalue against the explicit bound.

    ``reports`` holds lambda reports or plain lambda(H) values.
    Returns ``(bound, inheritance)``: the first compares ``max lambda(H)``
    with ``7500 max(lam, sqrt d) log2 d`` and notes the ratio to
    ``max(lam, rho)``; the second checks ``lambda(H) >= lambda(G) - 1e-7``
    trial by trial.
    """
    values = np.array([getattr(r, "lambda_new", r) for r in reports], dtype=float)
    if values.size == 0:
        raise InputError("need at least one trial")
    lam = lambda_of(g)
    k = int(np.argmax(values))
    ref = max(lam, universal_cover_radius(g.d))
    bound = InequalityReport(
        "eigenvalue_bound",
        float(values[k]),
        eigenvalue_bound(lam, g.d),
        {"trial": k, "n": n},
        len(values),
        note=f"max lambda(H) / max(lambda, rho) = {float(values[k] / ref)!r}",
    )
    j = int(np.argmin(values))
    inherit = InequalityReport(
        "inheritance",
        lam - INHERIT_TOL,
        float(values[j]),
        {"trial": j, "n": n},
        len(values),
    )
    return bound, inherit


def unit_orthogonal_pair(order, rng):
    """Two random unit vectors orthogonal to the all-ones vector."""
    out = []
    for _ in range(2):
        v = rng.standard_normal(order)
        v -= v.mean()
        out.append(v / np.linalg.norm(v))
    return out


def heavy_spot_check(g, n, trials, seed, lam=None):
    """``R_h`` for fixed random ``x, y`` across independent lifts.

    Returns ``(absolute, deviation)`` reports against ``3500 lam log2 d`` and
    ``7000 lam log2 d``; the expectation is the sample mean.
    """
    lam = lambda_of(g) if lam is None else lam
    rng = np.random.default_rng(derive(check_seed(seed), 4, DOMAIN_SEARCH))
    x, y = unit_orthogonal_pair(g.m * n, rng)
    vals = np.array([
        heavy_light_split(random_lift(g, n, derive(seed, t, DOMAIN_SEARCH)), lam, x, y).r_heavy
        for t in range(trials)
    ])
    return _spot_reports(vals, lam, g.d, 3500, 7000, "heavy")


def light_spot_check(g, n, trials, seed, lam=None):
    """``R_l`` for lattice-rounded ``x, y``: deviation from the mean against ``250 lam log2 d``."""
    lam = lambda_of(g) if lam is None else lam
    rng = np.random.default_rng(derive(check_seed(seed), 5, DOMAIN_SEARCH))
    x, y = unit_orthogonal_pair(g.m * n, rng)
    x, _ = lattice_round(x, g.d, g.m * n)
    y, _ = lattice_round(y, g.d, g.m * n)
    vals = np.array([
        heavy_light_split(random_lift(g, n, derive(seed, t, DOMAIN_SEARCH)), lam, x, y).r_light
        for t in range(trials)
    ])
    return _spot_reports(vals, lam, g.d, None, 250, "light")


def _spot_reports(vals, lam, d, abs_c, dev_c, label):
    lg = math.log2(d)
    mean = float(vals.mean())
    out = []
    if abs_c is not None:
        k = int(np.argmax(np.abs(vals)))
        out.append(InequalityReport(f"{label}_abs", abs(vals[k]), abs_c * lam * lg, {"trial": k}, len(vals)))
    k = int(np.argmax(np.abs(vals - mean)))
    out.append(
        InequalityReport(
            f"{label}_deviation", abs(vals[k] - mean), dev_c * lam * lg, {"trial": k}, len(vals),
            note=f"mean={mean!r}",
        )
    )
    return tuple(out)



def check_light_variance(g, n, pairs, seed, lam=None):
    """Light-pair variance quantity over random unit pairs against ``50 lam^2 log2 d / m``."""
    lam = lambda_of(g) if lam is None else lam
    rng = np.random.default_rng(derive(check_seed(seed), 6, DOMAIN_SEARCH))
    rhs = light_variance_bound(lam, g.d, g.m)
    best = None
    for t in range(pairs):
        x = rng.standard_normal(g.m * n)
        y = rng.standard_normal(g.m * n)
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        val = light_variance_quantity(g, n, lam, x, y)
        if best is None or val > best[0]:
            best = (val, t)
    return InequalityReport("light_variance", best[0], rhs, {"pair": best[1]}, pairs)


def check_expected_bilinear(g, n, pairs, seed):
    """Mean bilinear form over lifts, for unit pairs orthogonal to 1, against ``lam``."""
    if g.loop_count:
        return skipped("expected_bilinear", "base graph has loops")
    lam = lambda_of(g)
    rng = np.random.default_rng(derive(check_seed(seed), 7, DOMAIN_SEARCH))
    best = None
    for t in range(pairs):
        x, y = unit_orthogonal_pair(g.m * n, rng)
        val = expected_bilinear(g, n, x, y)
        if best is None or val > best[0]:
            best = (val, t)
    return InequalityReport("expected_bilinear", best[0], lam, {"pair": best[1]}, pairs)


def lift_seed(seed, t):
    return derive(check_seed(seed), t, DOMAIN_SEARCH)


def run_suite(g, n, seed, *, lifts=10, spot_trials=200, pairs=200, mixing_samples=10**5):
    """Every checker applicable to ``g`` and its n-lifts, as a list of reports."""
    if not validate(g).connected:
        raise InputError("the inequality suite needs a connected base graph")
    out = []
    if g.m >= 2:
        out.append(mixing_exhaustive(g) if g.m <= 8 else mixing_sampled(g, mixing_samples, seed))
    if 2 <= g.m <= CHEEGER_CAP:
        out.extend(check_cheeger_sandwich(g))
    # a one-vertex base has no nontrivial eigenvalue; any lam >= sqrt(d) is then admissible
    lam = lambda_of(g) if g.m > 1 else math.sqrt(g.d)
    if lam > 0:
        cut, small, values = [], [], []
        for t in range(lifts):
            h = random_lift(g, n, lift_seed(seed, t))
            cut.append(greedy_cut_search(h, lam, lift_seed(seed, t)))
            cut.append(random_cut_search(h, lam, lift_seed(seed, t), 10))
            small.append(greedy_small_cut_search(h, lift_seed(seed, t)))
            values.append(lambda_new(h).lambda_new)
        out.append(worst(cut, "cut_bound"))
        out.append(worst(small, "small_cut"))
        out.extend(check_eigenvalue_bound(values, g, n))
        if g.d >= 2:
            out.append(check_light_variance(g, n, pairs, seed, lam))
            out.extend(heavy_spot_check(g, n, spot_trials, seed, lam))
            out.extend(light_spot_check(g, n, spot_trials, seed, lam))
        out.append(check_expected_bilinear(g, n, pairs, seed))
    return out
