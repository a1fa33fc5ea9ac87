"""Proof quantities for bilinear forms on lifts.

Everything here works over ordered adjacent pairs, so that summing
``x[a] * y[b]`` over all ordered pairs ``(a, b)`` with ``a ~ b`` gives
``x^T A_H y`` (a loop contributes its pair twice, matching the diagonal 2).
All logarithms are base 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .lift import adjacency_apply

NORM_SLACK = 1e-12


def _vector(x, length, what="x"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != length:
        raise InputError(f"{what} must be a vector of length {length}, got shape {x.shape}")
    return x


# -- heavy / light split ---------------------------------------------------

@dataclass(frozen=True)
class HeavyLightSplit:
    r_heavy: float
    r_light: float
    threshold: float
    heavy_count: int
    light_count: int

    @property
    def total(self):
        return self.r_heavy + self.r_light


def ordered_pair_products(h, x, y):
    """``x[a] * y[b]`` for every ordered adjacent pair, edge by edge."""
    src, dst = h.endpoints
    s, t = src.ravel(), dst.ravel()
    return np.concatenate([x[s] * y[t], x[t] * y[s]])


def heavy_light_split(h, lam, x, y):
    """Split ``x^T A_H y`` into pairs with ``|x_a y_b| >= lam/mn`` and the rest."""
    if not lam > 0:
        raise InputError(f"lam must be positive, got {lam}")
    x = _vector(x, h.order, "x")
    y = _vector(y, h.order, "y")
    threshold = lam / h.order
    prod = ordered_pair_products(h, x, y)
    heavy = np.abs(prod) >= threshold
    return HeavyLightSplit(
        r_heavy=float(np.sum(np.where(heavy, prod, 0.0))),
        r_light=float(np.sum(np.where(heavy, 0.0, prod))),
        threshold=threshold,
        heavy_count=int(heavy.sum()),
        light_count=int((~heavy).sum()),
    )


def bilinear(h, x, y):
    return float(_vector(x, h.order) @ adjacency_apply(h, _vector(y, h.order, "y")))


# -- dyadic profiles -------------------------------------------------------

@dataclass(frozen=True)
class VectorDyadicProfile:
    """Coordinates of a vector banded by magnitude relative to ``sqrt(lam/mn)``.

    Heavy side: index ``k`` is in level ``l`` when
    ``2**l <= |x_k| / sqrt(lam/mn) < 2**(l+1)``.
    Light side: when ``2**-l <= |x_k| / sqrt(lam/mn) < 2**(-l+1)``.
    """

    levels: dict
    scale: float
    side: str

    def level_floor(self, level):
        """Lower edge of a band in units of ``sqrt(lam/mn)``."""
        return 2.0 ** level if self.side == "heavy" else 2.0 ** -level

    def l2_mass_bound(self):
        """``sum_l |D_l| * floor_l**2 * lam/mn``; never exceeds ``||x||**2``."""
        return float(sum(len(ix) * self.level_floor(l) ** 2 for l, ix in self.levels.items()) * self.scale)

    def support(self):
        return np.sort(np.concatenate([np.asarray(v) for v in self.levels.values()])) if self.levels else np.empty(0, np.int64)


def vector_dyadic_profile(x, lam, mn, side="heavy"):
    if side not in ("heavy", "light"):
        raise InputError(f"side must be 'heavy' or 'light', got {side!r}")
    if not lam > 0:
        raise InputError(f"lam must be positive, got {lam}")
    x = np.asarray(x, dtype=np.float64)
    unit = math.sqrt(lam / mn)
    idx = np.flatnonzero(x)
    t = np.abs(x[idx]) / unit
    # frexp: t = f * 2**e with f in [0.5, 1), so floor(log2 t) = e - 1 exactly
    _, e = np.frexp(t)
    floor_log = e.astype(np.int64) - 1
    level = floor_log if side == "heavy" else -floor_log
    levels = {}
    for l in np.unique(level):
        levels[int(l)] = idx[level == l]
    return VectorDyadicProfile(levels=levels, scale=lam / mn, side=side)


@dataclass(frozen=True)
class FiberDyadicProfile:
    """Fibers grouped by the proportion of the fiber that a set occupies.

    ``classes[i] = (S_i, s_i, alpha_i)`` where ``S_i`` holds the base vertices
    ``v`` with ``2**-(i+1) < |A in fiber v| / n <= 2**-i``.
    """

    classes: dict
    counts: dict
    n: int
    size: int

    @property
    def alpha(self):
        return self.size / self.n

    def alpha_sum(self):
        return sum(a for _, _, a in self.classes.values())

    def class_size(self, i):
        return sum(self.counts[v] for v in self.classes[i][0])

    def sandwich_holds(self):
        for i, (_, _, a) in self.classes.items():
            size_i = self.class_size(i)
            if not (0.5 * a * self.n < size_i <= a * self.n):
                return False
        total = self.alpha_sum()
        return 0.5 * total < self.alpha <= total


def fiber_dyadic_profile(A, n):
    """Dyadic classes of fibers meeting ``A`` (flat lift-vertex indices)."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    A = np.unique(np.asarray(list(A), dtype=np.int64))
    if A.size and A.min() < 0:
        raise InputError("lift-vertex indices must be non-negative")
    fibers, counts = np.unique(A // n, return_counts=True)
    by_class = {}
    for v, c in zip(fibers.tolist(), counts.tolist()):
        # largest i with c * 2**i <= n, in exact integer arithmetic
        i = (n // c).bit_length() - 1
        by_class.setdefault(i, []).append(v)
    classes = {
        i: (frozenset(vs), len(vs), len(vs) * 2.0 ** -i) for i, vs in sorted(by_class.items())
    }
    return FiberDyadicProfile(
        classes=classes,
        counts=dict(zip(fibers.tolist(), counts.tolist())),
        n=n,
        size=int(A.size),
    )


# -- lattice ---------------------------------------------------------------

def lattice_step(d, mn):
    return 1.0 / (d * math.sqrt(mn))


def lattice_round(x, d, mn):
    """Nearest point of ``(eps Z)^mn`` inside the unit ball, ``eps = 1/(d sqrt(mn))``.

    Returns ``(x_tilde, k)`` with ``x_tilde = k * eps``. Coordinates are
    rounded to the nearest multiple; if that leaves the ball, coordinates
    that were rounded away from zero are moved one step back towards zero,
    largest magnitude first, until ``sum k**2 <= d**2 mn`` (checked exactly
    in integers). Each coordinate stays within ``eps`` of ``x``.
    """
    x = _vector(x, mn)
    norm = float(np.linalg.norm(x))
    if norm > 1.0 + NORM_SLACK:
        raise InputError(f"lattice rounding needs ||x|| <= 1, got {norm!r}")
    if norm > 1.0:
        x = x / norm
    eps = lattice_step(d, mn)
    k = np.rint(x / eps).astype(np.int64)
    limit = d * d * mn
    sq = int(np.dot(k, k))
    if sq > limit:
        away = np.flatnonzero(np.abs(k * eps) > np.abs(x))
        # largest |k| first; index order breaks ties so the repair is deterministic
        order = away[np.lexsort((away, -np.abs(k[away])))]
        for i in order:
            if sq <= limit:
                break
            old = int(k[i])
            k[i] -= np.sign(old)
            sq += int(k[i]) ** 2 - old * old
        if sq > limit:
            raise InputError("lattice repair failed; input norm is too close to 1")
    return k * eps, k


def lattice_ball_size(d, mn):
    """Number of lattice points in the closed unit ball, counted exactly."""
    limit = d * d * mn
    r = math.isqrt(limit)
    counts = np.zeros(limit + 1, dtype=object)
    counts[0] = 1
    squares = [k * k for k in range(-r, r + 1)]
    for _ in range(mn):
        nxt = np.zeros(limit + 1, dtype=object)
        for s in np.flatnonzero(counts):
            for q in squares:
                if s + q <= limit:
                    nxt[s + q] += counts[s]
        counts = nxt
    return int(sum(counts))


# -- expectation over uniform lifts ----------------------------------------

def fiber_sums(x, m, n):
    """``w_j = sum_i x[j*n + i]``."""
    return np.asarray(x, dtype=np.float64).reshape(m, n).sum(axis=1)


def expected_bilinear(g, n, x, y):
    """Mean of ``x^T A_H y`` over uniform random n-lifts of a loop-free ``g``."""
    if g.loop_count:
        raise InputError("the fiber-sum expectation formula is only valid without loops")
    x = _vector(x, g.m * n, "x")
    y = _vector(y, g.m * n, "y")
    w = fiber_sums(x, g.m, n)
    z = fiber_sums(y, g.m, n)
    return float(w @ g.adjacency() @ z) / n


# -- z log z = b -----------------------------------------------------------

def solve_zlogz(b):
    """The unique ``z > 1`` with ``z * log2(z) = b``.

    Newton's method kept inside a shrinking bracket; a step leaving the
    bracket is replaced by bisection.
    """
    b = float(b)
    if not b > 0 or not math.isfinite(b):
        raise InputError(f"b must be positive and finite, got {b}")

    def f(z):
        return z * math.log2(z) - b

    lo, hi = 1.0, max(2.0, 2.0 * b)
    z = min(hi, max(2.0, b / max(1.0, math.log2(b)))) if b > 2 else 1.0 + b / 2
    tol = 1e-12 * max(1.0, b)
    for _ in range(200):
        fz = f(z)
        if fz == 0.0:
            return z
        if fz < 0:
            lo = z
        else:
            hi = z
        step = z - fz / (math.log2(z) + 1.0 / math.log(2.0))
        z_new = step if lo < step < hi else 0.5 * (lo + hi)
        if z_new == z or hi - lo <= 4 * math.ulp(z):
            break
        z = z_new
    # polish: the best of z and its immediate floating-point neighbours
    cands = [z]
    for direction in (math.inf, -math.inf):
        c = z
        for _ in range(2):
            c = math.nextafter(c, direction)
            if c > 1.0:
                cands.append(c)
    z = min(cands, key=lambda c: (abs(f(c)), c))
    if abs(f(z)) > tol:
        raise ArithmeticError(f"z log z = {b} did not converge (residual {f(z)!r})")
    return z


def zlogz_rhs(e_st, i, j, alpha_i, beta_j, n):
    return (2.0 ** (i + j) / (9.0 * e_st)) * ((i + 2) * alpha_i + (j + 2) * beta_j + n ** -0.25)


def w_star(e_st, i, j, alpha_i, beta_j, n):
    """``(9 e / 2**(i+j)) * max(z, 2)`` where ``z log2 z`` solves the level equation."""
    if e_st < 1:
        raise InputError(f"edge count must be >= 1, got {e_st}")
    if alpha_i < 0 or beta_j < 0:
        raise InputError("densities must be non-negative")
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    z = solve_zlogz(zlogz_rhs(e_st, i, j, alpha_i, beta_j, n))
    return (9.0 * e_st / 2.0 ** (i + j)) * max(z, 2.0)


# -- light-pair variance ---------------------------------------------------

def light_variance_quantity(g, n, lam, x, y):
    """``sum x_a**2 y_b**2`` over light pairs ``(a, b)`` whose fibers are adjacent in ``g``.

    Pairs range over all copies in the two fibers, weighted by the base
    adjacency (ordered base pairs, loops counted twice).
    """
    mn = g.m * n
    x = _vector(x, mn, "x")
    y = _vector(y, mn, "y")
    for v, name in ((x, "x"), (y, "y")):
        if np.linalg.norm(v) > 1.0 + NORM_SLACK:
            raise InputError(f"||{name}|| must be <= 1")
    threshold = lam / mn
    X = x.reshape(g.m, n)
    Y = y.reshape(g.m, n)
    A = g.adjacency()
    total = 0.0
    for j, jp in zip(*np.nonzero(A)):
        prod = np.abs(np.outer(X[j], Y[jp]))
        light = prod < threshold
        total += A[j, jp] * float(np.sum(np.where(light, prod * prod, 0.0)))
    return total


def light_variance_bound(lam, d, m):
    return 50.0 * lam * lam * math.log2(d) / m
