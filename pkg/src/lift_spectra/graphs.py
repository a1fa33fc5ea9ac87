"""Regular base graphs: representation, catalog and exact spectra.

A loop at ``v`` adds 2 to the degree of ``v`` and 2 to the diagonal entry
``A[v, v]``, so a single vertex carrying ``d/2`` loops is ``d``-regular.
"""
from __future__ import annotations

import io
import math
import re
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

DENSE_CAP = 4096


@dataclass(frozen=True)
class BaseGraph:
    """A ``d``-regular multigraph on vertices ``0 .. m-1``.

    ``edges`` keeps the caller's order and orientation: the edge index is
    what per-edge random streams of a lift are keyed on.
    """

    m: int
    edges: tuple
    d: int
    name: str = field(default="", compare=False)

    def __post_init__(self):
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        object.__setattr__(self, "edges", edges)
        if self.m < 1:
            raise InputError(f"need at least one vertex, got m={self.m}")
        if self.d < 1:
            raise InputError(f"degree must be positive, got d={self.d}")
        for u, v in edges:
            if not (0 <= u < self.m and 0 <= v < self.m):
                raise InputError(f"edge ({u}, {v}) has an endpoint outside [0, {self.m})")
        bad = [v for v, deg in enumerate(degrees(self.m, edges)) if deg != self.d]
        if bad:
            raise InputError(
                f"graph is not {self.d}-regular: vertex {bad[0]} has degree "
                f"{degrees(self.m, edges)[bad[0]]}"
            )

    @property
    def loop_count(self):
        return sum(1 for u, v in self.edges if u == v)

    def adjacency(self):
        return adjacency_matrix(self.m, self.edges)

    def edge_multiset(self):
        return Counter((min(u, v), max(u, v)) for u, v in self.edges)

    def neighbors(self, v):
        """Neighbours of ``v`` with multiplicity (a loop lists ``v`` twice)."""
        out = []
        for a, b in self.edges:
            if a == v:
                out.append(b)
            if b == v:
                out.append(a)
        return out


def degrees(m, edges):
    deg = [0] * m
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    return deg


def adjacency_matrix(m, edges):
    A = np.zeros((m, m))
    for u, v in edges:
        A[u, v] += 1
        A[v, u] += 1
    return A


@dataclass(frozen=True)
class ValidationReport:
    regular: bool
    degree: int | None
    connected: bool
    simple: bool
    bipartite: bool


def validate(g):
    """Recompute structural facts about ``g`` from its edge list."""
    deg = degrees(g.m, g.edges)
    regular = len(set(deg)) == 1
    mult = Counter((min(u, v), max(u, v)) for u, v in g.edges)
    simple = all(u != v for u, v in mult) and all(c == 1 for c in mult.values())

    adj = [[] for _ in range(g.m)]
    for u, v in g.edges:
        adj[u].append(v)
        adj[v].append(u)
    colour = [-1] * g.m
    components = 0
    bipartite = True
    for s in range(g.m):
        if colour[s] >= 0:
            continue
        components += 1
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if colour[w] < 0:
                    colour[w] = 1 - colour[u]
                    queue.append(w)
                elif colour[w] == colour[u]:
                    bipartite = False
    connected = components == 1
    return ValidationReport(
        regular=regular,
        degree=deg[0] if regular else None,
        connected=connected,
        simple=simple,
        bipartite=bipartite,
    )


# -- catalog ---------------------------------------------------------------

def complete(k):
    if k < 2:
        raise InputError(f"complete graph needs k >= 2, got {k}")
    edges = [(u, v) for u in range(k) for v in range(u + 1, k)]
    return BaseGraph(k, edges, k - 1, name=f"complete({k})")


def cycle(m):
    if m < 3:
        raise InputError(f"cycle needs m >= 3, got {m}")
    return BaseGraph(m, [(v, (v + 1) % m) for v in range(m)], 2, name=f"cycle({m})")


def bouquet(loops):
    if loops < 1:
        raise InputError(f"bouquet needs at least one loop, got {loops}")
    return BaseGraph(1, [(0, 0)] * loops, 2 * loops, name=f"bouquet({loops})")


def petersen():
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return BaseGraph(10, outer + spokes + inner, 3, name="petersen")


# LCF notation [10, 7, 4, -4, -7, 10, -4, 7, -7, 4]^2
_DODECAHEDRAL_LCF = [10, 7, 4, -4, -7, 10, -4, 7, -7, 4] * 2


def dodecahedral():
    m = 20
    edges = {(v, (v + 1) % m) for v in range(m)}
    for v, jump in enumerate(_DODECAHEDRAL_LCF):
        w = (v + jump) % m
        edges.add((min(v, w), max(v, w)))
    edges = sorted((min(u, v), max(u, v)) for u, v in edges)
    return BaseGraph(m, edges, 3, name="dodecahedral")


def k4():
    g = complete(4)
    return BaseGraph(g.m, g.edges, g.d, name="k4")


_FIXED = {"k4": k4, "petersen": petersen, "dodecahedral": dodecahedral}
_FAMILIES = {"complete": complete, "cycle": cycle, "bouquet": bouquet}
CATALOG_NAMES = tuple(_FIXED) + tuple(_FAMILIES)


def catalog(name, *params):
    """Named test graph: ``k4``, ``petersen``, ``dodecahedral``,
    ``complete(k)``, ``cycle(m)`` or ``bouquet(loops)``.

    ``name`` may carry its parameter inline, e.g. ``"cycle(5)"``.
    """
    match = re.fullmatch(r"\s*([a-z0-9_]+)\s*(?:\(\s*(\d+)\s*\))?\s*", name.lower())
    if match is None:
        raise InputError(f"cannot parse graph name {name!r}")
    key, inline = match.groups()
    if inline is not None:
        params = (int(inline),) + tuple(params)
    if key in _FIXED:
        if params:
            raise InputError(f"{key} takes no parameters")
        return _FIXED[key]()
    if key in _FAMILIES:
        if len(params) != 1:
            raise InputError(f"{key} takes exactly one integer parameter")
        return _FAMILIES[key](int(params[0]))
    raise InputError(f"unknown graph {name!r}; choose from {', '.join(CATALOG_NAMES)}")


# -- spectra ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in non-increasing order plus the declared degree."""

    values: np.ndarray
    declared_degree: int
    residual: float | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        vals = np.sort(vals)[::-1].copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return len(self.values)

    def nontrivial(self):
        """All eigenvalues but one copy of the largest."""
        return self.values[1:]

    def to_csv(self):
        buf = io.StringIO()
        buf.write("index,eigenvalue\n")
        for i, v in enumerate(self.values):
            buf.write(f"{i},{float(v)!r}\n")
        return buf.getvalue()


def symmetric_spectrum(A, declared_degree, *, dense_cap=DENSE_CAP):
    """Full eigendecomposition of a symmetric matrix with residual check."""
    order = A.shape[0]
    if order > dense_cap:
        raise InputError(f"order {order} exceeds the dense solver cap {dense_cap}")
    w, V = np.linalg.eigh(A)
    residual = float(np.max(np.linalg.norm(A @ V - V * w, axis=0))) if order else 0.0
    return Spectrum(w, declared_degree, residual)


def base_spectrum(g, *, dense_cap=DENSE_CAP):
    return symmetric_spectrum(g.adjacency(), g.d, dense_cap=dense_cap)


def lambda_of(g):
    """Largest absolute nontrivial eigenvalue of a connected base graph."""
    if not validate(g).connected:
        raise InputError("lambda is ambiguous for a disconnected graph")
    rest = base_spectrum(g).nontrivial()
    return float(np.max(np.abs(rest))) if len(rest) else 0.0


def second_eigenvalue(g):
    """Second largest (signed) eigenvalue; used by the Cheeger variant."""
    vals = base_spectrum(g).values
    return float(vals[1]) if len(vals) > 1 else float("-inf")


def universal_cover_radius(d):
    """Spectral radius ``2 sqrt(d - 1)`` of the infinite d-regular tree."""
    if d < 2:
        raise InputError(f"universal cover radius needs d >= 2, got {d}")
    return 2.0 * math.sqrt(d - 1)


# -- edge-list text format -------------------------------------------------

_HEADER = re.compile(r"m\s*=\s*(\d+)\s+d\s*=\s*(\d+)")


def parse_edge_list(text, name=""):
    """Parse ``m=<int> d=<int>`` followed by ``u v`` lines; ``#`` starts a comment."""
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            match = _HEADER.fullmatch(line)
            if match is None:
                raise InputError(f"line {lineno}: expected header 'm=<int> d=<int>', got {raw!r}")
            header = int(match.group(1)), int(match.group(2))
            continue
        parts = line.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise InputError(f"line {lineno}: expected 'u v', got {raw!r}")
        u, v = int(parts[0]), int(parts[1])
        if not (u < header[0] and v < header[0]):
            raise InputError(f"line {lineno}: endpoint out of range for m={header[0]}")
        edges.append((u, v))
    if header is None:
        raise InputError("missing 'm=<int> d=<int>' header")
    return BaseGraph(header[0], edges, header[1], name=name)


def serialize_edge_list(g):
    lines = [f"m={g.m} d={g.d}"]
    lines += [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(spec):
    """Catalog name or path to an edge-list file."""
    key = re.match(r"\s*([a-z0-9_]+)", spec.lower())
    if key and key.group(1) in CATALOG_NAMES:
        return catalog(spec)
    try:
        with open(spec) as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"{spec!r} is neither a catalog graph nor a readable file: {exc}") from None
    return parse_edge_list(text, name=spec)
