"""n-lifts of base graphs stored as one permutation per base edge.

Lift vertex ``(i, j)`` (copy ``i`` of base vertex ``j``) has flat index
``j * n + i``, so each fiber is a contiguous block of length ``n``.
Base edge ``e = (u, v)`` with permutation ``p`` contributes the lift edges
``(i, u) -- (p[i], v)`` for every ``i``; for a loop ``u == v`` a fixed point
of ``p`` becomes a loop in the lift.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import kernels
from ._rng import check_seed, edge_key
from .errors import InputError
from .graphs import BaseGraph, parse_edge_list, serialize_edge_list


@dataclass(frozen=True, eq=False)
class LiftedGraph:
    base: BaseGraph
    n: int
    perms: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"covering number must be >= 1, got {self.n}")
        perms = np.array(self.perms, dtype=np.int64, copy=True).reshape(len(self.base.edges), self.n)
        perms.setflags(write=False)
        object.__setattr__(self, "perms", perms)

    @property
    def order(self):
        return self.base.m * self.n

    @property
    def d(self):
        return self.base.d

    @cached_property
    def endpoints(self):
        """``(src, dst)`` arrays of shape (edges, n) with flat lift-vertex indices."""
        n = self.n
        eu = np.array([u for u, _ in self.base.edges], dtype=np.int64)
        ev = np.array([v for _, v in self.base.edges], dtype=np.int64)
        src = eu[:, None] * n + np.arange(n, dtype=np.int64)[None, :]
        dst = ev[:, None] * n + self.perms
        src = np.ascontiguousarray(src)
        dst = np.ascontiguousarray(dst)
        src.setflags(write=False)
        dst.setflags(write=False)
        return src, dst

    def edge_list(self):
        """Lift edges as an (n * |E|, 2) array in edge-index order."""
        src, dst = self.endpoints
        return np.stack([src.ravel(), dst.ravel()], axis=1)

    def neighbor_table(self):
        """``(order, d)`` array of neighbours; a lift loop lists its vertex twice."""
        src, dst = self.endpoints
        a = np.concatenate([src.ravel(), dst.ravel()])
        b = np.concatenate([dst.ravel(), src.ravel()])
        idx = np.argsort(a, kind="stable")
        table = b[idx].reshape(self.order, -1)
        return table

    def dense_adjacency(self):
        N = self.order
        A = np.zeros((N, N))
        src, dst = self.endpoints
        np.add.at(A, (src.ravel(), dst.ravel()), 1.0)
        np.add.at(A, (dst.ravel(), src.ravel()), 1.0)
        return A

    def identical(self, other):
        return (
            self.base == other.base
            and self.n == other.n
            and self.seed == other.seed
            and np.array_equal(self.perms, other.perms)
        )

    # -- serialization ------------------------------------------------------

    def to_json(self):
        return json.dumps(
            {
                "base": serialize_edge_list(self.base),
                "n": self.n,
                "seed": self.seed,
                "perms": self.perms.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text):
        try:
            obj = json.loads(text)
            base = parse_edge_list(obj["base"])
            return cls(base, int(obj["n"]), np.asarray(obj["perms"], dtype=np.int64), obj["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed lift JSON: {exc}") from None


def random_lift(g, n, seed):
    """Uniform random n-lift; edge ``e`` draws its permutation from ``edge_key(seed, e)``."""
    if n < 1:
        raise InputError(f"covering number must be >= 1, got {n}")
    seed = check_seed(seed)
    perms = np.empty((len(g.edges), n), dtype=np.int64)
    for e in range(len(g.edges)):
        perms[e] = kernels.permutation(edge_key(seed, e), n)
    h = LiftedGraph(g, n, perms, seed)
    if not verify_cover(h):
        raise AssertionError("constructed lift failed the covering self-check")
    return h


def identity_lift(g, n):
    """n disjoint copies of a loop-free ``g``."""
    if g.loop_count:
        raise InputError("identity lifts of graphs with loops are not defined")
    if n < 1:
        raise InputError(f"covering number must be >= 1, got {n}")
    perms = np.tile(np.arange(n, dtype=np.int64), (len(g.edges), 1))
    return LiftedGraph(g, n, perms, None)


def verify_cover(h):
    """True iff every edge permutation is a bijection and the lift is d-regular."""
    n = h.n
    if h.perms.shape != (len(h.base.edges), n):
        return False
    sorted_rows = np.sort(h.perms, axis=1)
    if not np.array_equal(sorted_rows, np.broadcast_to(np.arange(n), sorted_rows.shape)):
        return False
    src, dst = h.endpoints
    deg = np.bincount(src.ravel(), minlength=h.order) + np.bincount(dst.ravel(), minlength=h.order)
    return bool(np.all(deg == h.d))


def adjacency_apply(h, x):
    """Matrix-free product ``A_H x``; ``x`` may be a vector or an (order, k) block."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] != h.order:
        raise InputError(f"vector has length {x.shape[0]}, lift order is {h.order}")
    src, dst = h.endpoints
    return kernels.adjacency_apply(src, dst, x)


def edge_count(h, A, B):
    """Ordered-pair count ``#{(a, b): a in A, b in B, a ~ b}`` in the lift."""
    a = np.zeros(h.order)
    b = np.zeros(h.order)
    a[np.asarray(list(A), dtype=np.int64)] = 1.0
    b[np.asarray(list(B), dtype=np.int64)] = 1.0
    return int(round(float(a @ adjacency_apply(h, b))))
