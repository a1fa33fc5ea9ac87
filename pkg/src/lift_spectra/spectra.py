"""Eigenvalues of lifts: dense below the cap, block Lanczos above it."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from ._rng import DOMAIN_SOLVER, check_seed, derive
from .errors import InputError, SolverError
from .graphs import DENSE_CAP, symmetric_spectrum, universal_cover_radius
from .lift import adjacency_apply

RAMANUJAN_RTOL = 1e-9
DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class LambdaReport:
    """Top eigenvalue and the largest absolute nontrivial eigenvalue of a lift."""

    lambda_1: float
    lambda_new: float
    method: str
    residual: float
    d: int
    second: float
    smallest: float

    @property
    def lambda_new_max_abs(self):
        return self.lambda_new

    @property
    def threshold(self):
        return universal_cover_radius(self.d)

    @property
    def ramanujan(self):
        return is_ramanujan(self, self.d)

    def to_dict(self):
        threshold = self.threshold
        return {
            "lambda1": self.lambda_1,
            "lambda_new": self.lambda_new,
            "method": self.method,
            "residual": self.residual,
            "ramanujan": self.ramanujan,
            "threshold": threshold,
            # within solver tolerance of the threshold: classification is fragile
            "at_boundary": abs(self.lambda_new - threshold) <= RAMANUJAN_RTOL * self.d,
        }


def is_ramanujan(report, d):
    return report.lambda_new <= universal_cover_radius(d) + RAMANUJAN_RTOL * d


def dense_lift_spectrum(h, *, dense_cap=DENSE_CAP):
    """Full spectrum of ``A_H`` with the maximal eigenpair residual recorded."""
    if h.order > dense_cap:
        raise InputError(f"lift order {h.order} exceeds the dense solver cap {dense_cap}")
    return symmetric_spectrum(h.dense_adjacency(), h.d, dense_cap=dense_cap)


def _householder_apply(c, tau, Z):
    """Multiply ``Z`` by the orthogonal factor of a lower ``dsytrd`` reduction."""
    N = Z.shape[0]
    for k in range(N - 3, -1, -1):
        v = c[k + 2:, k]
        w = Z[k + 1] + v @ Z[k + 2:]
        Z[k + 1] -= tau[k] * w
        Z[k + 2:] -= tau[k] * np.outer(v, w)
    if N >= 2:
        # the last reflector has an empty tail
        Z[N - 1] -= tau[N - 2] * Z[N - 1]
    return Z


def dense_extremes(A):
    """Two largest and the smallest eigenpair of a symmetric matrix.

    One Householder tridiagonalisation; only the three wanted eigenvectors
    are computed and transformed back, so the residuals are explicit.
    Returns ``(values, residual)`` with ``values = (top, second, smallest)``.
    """
    N = A.shape[0]
    if N <= 3:
        w, V = np.linalg.eigh(A)
        residual = float(np.max(np.linalg.norm(A @ V - V * w, axis=0)))
        top = w[-1]
        second = w[-2] if N > 1 else -np.inf
        return (float(top), float(second), float(w[0])), residual
    lwork, info = lapack.dsytrd_lwork(N, lower=1)
    c, diag, off, tau, info = lapack.dsytrd(A, lower=1, lwork=int(lwork))
    if info != 0:
        raise SolverError(f"dsytrd failed with info={info}")
    w_hi, v_hi = sla.eigh_tridiagonal(diag, off, select="i", select_range=(N - 2, N - 1))
    w_lo, v_lo = sla.eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    w = np.concatenate([w_hi, w_lo])
    Z = _householder_apply(c, tau, np.hstack([v_hi, v_lo]))
    residual = float(np.max(np.linalg.norm(A @ Z - Z * w, axis=0)))
    return (float(w_hi[1]), float(w_hi[0]), float(w_lo[0])), residual


@dataclass(frozen=True, eq=False)
class LanczosResult:
    top: np.ndarray  # k largest Ritz values, descending
    bottom: np.ndarray  # k smallest Ritz values, ascending
    top_vectors: np.ndarray
    bottom_vectors: np.ndarray
    residual: float
    steps: int
    dimension: int


def _orthonormal_block(W, Q, rng, scale):
    """Orthonormalise ``W`` against ``Q`` and itself, refilling lost directions."""
    N, b = W.shape
    room = N - Q.shape[1]
    b = min(b, room)
    out = np.empty((N, b))
    for j in range(b):
        v = W[:, j].copy()
        ref = max(np.linalg.norm(v), scale)
        for _attempt in range(5):
            for _ in range(2):  # twice is enough (Kahan-Parlett)
                v -= Q @ (Q.T @ v)
                v -= out[:, :j] @ (out[:, :j].T @ v)
            nv = np.linalg.norm(v)
            if nv > 1e-10 * ref:
                break
            # Krylov breakdown: continue with a fresh random direction
            v = rng.standard_normal(N)
            ref = np.linalg.norm(v)
        else:
            raise SolverError("could not extend the Lanczos basis")
        out[:, j] = v / nv
    return out


def block_lanczos(apply, N, k, atol, seed=0, max_steps=None, need=None):
    """Extreme eigenpairs of a symmetric operator given only ``apply(X) = A X``.

    Block size ``k`` so that eigenvalues of multiplicity up to ``k`` are
    resolved at each end. Every new block is reorthogonalised against the
    whole basis and the projected matrix is accumulated exactly, so the
    Ritz residuals ``||A y - theta y||`` are computed rather than estimated.
    ``need = (top, bottom)`` limits the convergence test to that many Ritz
    pairs at each end (default: all ``k`` at both ends).
    """
    if max_steps is None:
        max_steps = 10 * k * max(1, math.ceil(math.log2(max(N, 2))))
    need_top, need_bottom = (k, k) if need is None else need
    rng = np.random.default_rng(derive(check_seed(seed), 0, DOMAIN_SOLVER))
    b = min(k, N)
    Q = _orthonormal_block(rng.standard_normal((N, b)), np.empty((N, 0)), rng, 1.0)
    AQ = np.empty((N, 0))
    T = np.empty((0, 0))
    X = Q
    steps = 0
    next_check = 1
    best = None
    while True:
        W = apply(X)
        steps += 1
        K0 = AQ.shape[1]
        AQ = np.hstack([AQ, W])
        coeff = Q.T @ W  # (K, b): new columns of the projected matrix
        K = Q.shape[1]
        T_new = np.zeros((K, K))
        T_new[:K0, :K0] = T
        T_new[:, K0:] = coeff
        T_new[K0:, :K0] = coeff[:K0].T
        T = 0.5 * (T_new + T_new.T)
        full = K >= N
        if full or steps >= next_check or steps >= max_steps:
            next_check = steps + max(1, steps // 8)
            theta, S = np.linalg.eigh(T)
            kk = min(k, K)
            want = np.r_[np.arange(K - kk, K), np.arange(kk)]
            Y = Q @ S[:, want]
            R = AQ @ S[:, want] - Y * theta[want]
            res = np.linalg.norm(R, axis=0)
            res = np.r_[res[kk - min(need_top, kk):kk], res[kk:kk + min(need_bottom, kk)]]
            best = (theta, want, Y, float(res.max()))
            if full or res.max() <= atol:
                break
            if steps >= max_steps:
                raise SolverError(
                    f"Lanczos did not converge in {steps} block steps "
                    f"(basis {K}, residual {res.max():.3e} > {atol:.3e})"
                )
        X = _orthonormal_block(W - Q @ coeff, Q, rng, np.linalg.norm(W))
        Q = np.hstack([Q, X])
    theta, want, Y, residual = best
    kk = len(want) // 2
    top_idx = want[:kk][::-1]
    return LanczosResult(
        top=theta[top_idx],
        bottom=theta[want[kk:]],
        top_vectors=Y[:, :kk][:, ::-1],
        bottom_vectors=Y[:, kk:],
        residual=residual,
        steps=steps,
        dimension=Q.shape[1],
    )


def lanczos_extremes(h, k=2, tol=DEFAULT_TOL, seed=0, max_steps=None, need=None):
    """``k`` largest and ``k`` smallest eigenvalues of a lift, matrix-free."""
    if k < 2:
        raise InputError(f"k must be >= 2, got {k}")
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    return block_lanczos(
        lambda X: adjacency_apply(h, X), h.order, k, tol * h.d, seed, max_steps, need
    )


def lambda_new(h, *, dense_cap=DENSE_CAP, tol=DEFAULT_TOL, seed=0, max_steps=None):
    """Largest absolute nontrivial eigenvalue of ``h`` (one copy of the top removed)."""
    if h.order <= dense_cap:
        (top, second, smallest), residual = dense_extremes(h.dense_adjacency())
        method = "dense"
    else:
        res = lanczos_extremes(h, 2, tol, seed, max_steps, need=(2, 1))
        top, second, smallest = float(res.top[0]), float(res.top[1]), float(res.bottom[0])
        residual = res.residual
        method = "lanczos"
    if h.order == 1:
        value = 0.0
    else:
        value = max(abs(second), abs(smallest))
    return LambdaReport(
        lambda_1=top,
        lambda_new=value,
        method=method,
        residual=residual,
        d=h.d,
        second=second,
        smallest=smallest,
    )
