"""Pure numpy implementations of the hot kernels.

These are the reference semantics for ``_ckernels.pyx``; both backends must
return bit-identical results for identical inputs.
"""
import numpy as np

from ._rng import GOLDEN, MASK64, MIX1, MIX2, stream

BACKEND = "python"

_U64 = np.uint64


def _fmix_array(z):
    z = z ^ (z >> _U64(30))
    z = z * _U64(MIX1)
    z = z ^ (z >> _U64(27))
    z = z * _U64(MIX2)
    return z ^ (z >> _U64(31))


def _sequential_permutation(key, n):
    perm = list(range(n))
    counter = 0
    for i in range(n - 1, 0, -1):
        bound = i + 1
        # reject the short top interval so r % bound is exactly uniform
        floor = (1 << 64) % bound
        while True:
            r = stream(key, counter)
            counter += 1
            if r >= floor:
                break
        j = r % bound
        perm[i], perm[j] = perm[j], perm[i]
    return np.asarray(perm, dtype=np.int64)


def permutation(key, n):
    """Uniform permutation of ``range(n)`` by Fisher-Yates on the stream ``key``."""
    if n <= 1:
        return np.arange(n, dtype=np.int64)
    key &= MASK64
    with np.errstate(over="ignore"):
        counters = np.arange(1, n, dtype=np.uint64)
        raw = _fmix_array(_U64(key) + _U64(GOLDEN) * counters)
        bounds = np.arange(n, 1, -1, dtype=np.uint64)
        floors = (_U64(0) - bounds) % bounds
    if not np.all(raw >= floors):
        # a rejection shifts every later counter; redo it one draw at a time
        return _sequential_permutation(key, n)
    swaps = (raw % bounds).tolist()
    perm = list(range(n))
    for i, j in zip(range(n - 1, 0, -1), swaps):
        perm[i], perm[j] = perm[j], perm[i]
    return np.asarray(perm, dtype=np.int64)


def adjacency_apply(src, dst, x):
    """Return A x for the graph whose edges are ``src[e, i] -- dst[e, i]``.

    Each row of ``src`` and of ``dst`` holds distinct vertices, so the
    per-row fancy-index updates never collide. Summation order is fixed:
    edge by edge, forward half before backward half.
    """
    y = np.zeros_like(x)
    for e in range(src.shape[0]):
        a = src[e]
        b = dst[e]
        y[a] += x[b]
        y[b] += x[a]
    return y


def cheeger_min(m, eu, ev, chunk=1 << 15):
    """Exhaustive edge-isoperimetric minimum over subsets avoiding vertex m-1.

    Returns ``(boundary, smaller_side, mask)`` of the minimiser with the
    smallest mask among ties. ``eu, ev`` list the non-loop edges.
    """
    total = 1 << (m - 1)
    shifts = np.arange(m - 1, dtype=np.int64)
    best = None
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(bool)
        bits = np.concatenate([bits, np.zeros((len(masks), 1), dtype=bool)], axis=1)
        boundary = (bits[:, eu] != bits[:, ev]).sum(axis=1)
        size = bits.sum(axis=1)
        small = np.minimum(size, m - size)
        k = int(np.argmin(boundary / small))
        # float argmin locates a minimiser; cross multiplication settles ties
        # exactly and the first hit carries the smallest mask
        ties = boundary * small[k] == boundary[k] * small
        k = int(np.argmax(ties))
        cand = (int(boundary[k]), int(small[k]), int(masks[k]))
        if best is None or cand[0] * best[1] < best[0] * cand[1]:
            best = cand
    return best
