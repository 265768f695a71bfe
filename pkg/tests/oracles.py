"""Independent reference computations used only by the test suite.

These deliberately avoid the library's own code paths: the Kronecker
product is written with explicit loops, extreme rays are enumerated by
facet sign patterns instead of double description, and completeness
weights come from an unconstrained least-squares solve.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy.linalg import null_space


def hand_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product via index arithmetic."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def nullspace_projector(q: np.ndarray, n_cols: int) -> np.ndarray:
    if q.shape[0] == 0:
        return np.eye(n_cols)
    basis = null_space(q)
    return basis @ basis.T


def projector_of(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of the given vectors."""
    stack = np.stack([np.asarray(v, float) for v in vectors]).T
    qmat, _ = np.linalg.qr(stack)
    return qmat @ qmat.T


def rank_cutoff_nullspace(q: np.ndarray, n_cols: int,
                          rank_factor: float = 1e-11) -> np.ndarray:
    """Nullspace basis under the library-wide rank cutoff.

    The cutoff formula max(rows, cols) * sigma_max * rank_factor is the
    published policy; the oracle shares it on purpose so that only the ray
    *enumeration* differs between the two routes.
    """
    if q.shape[0] == 0:
        return np.eye(n_cols)
    _, sigma, vh = np.linalg.svd(q)
    cutoff = max(q.shape) * float(sigma[0]) * rank_factor
    rank = int(np.sum(sigma > cutoff))
    return vh[rank:].T


def brute_force_rays(q: np.ndarray, feas_tol: float = 1e-9) -> list[np.ndarray]:
    """Extreme rays of {c >= 0 : Q c = 0} by enumerating facet sign patterns.

    Every extreme ray of a pointed k-dimensional cone is pinned by k - 1
    linearly independent active nonnegativity facets, so trying all
    (k - 1)-subsets of coordinates and keeping the feasible kernel
    directions enumerates all rays.  Coordinates that vanish identically
    on the nullspace impose no facet and are skipped.  Exponential, fine
    for k <= 3.
    """
    q = np.asarray(q, dtype=float)
    n = q.shape[1]
    basis = rank_cutoff_nullspace(q, n)
    k = basis.shape[1]
    assert k >= 1, "trivial nullspace"
    row_norms = np.linalg.norm(basis, axis=1)
    live = [i for i in range(n) if row_norms[i] > 1e-10 * row_norms.max()]
    rays = []
    for subset in combinations(live, k - 1):
        rows = basis[list(subset), :]
        kern = null_space(rows) if subset else np.eye(k)
        if kern.shape[1] != 1:
            continue
        for sign in (1.0, -1.0):
            c = sign * (basis @ kern[:, 0])
            if np.all(c >= -feas_tol):
                c = np.clip(c, 0.0, None)
                if c.sum() > 0:
                    rays.append(c / c.sum())
    unique: list[np.ndarray] = []
    for c in rays:
        if not any(np.abs(c - u).max() < 1e-7 for u in unique):
            unique.append(c)
    unique.sort(key=lambda c: tuple(np.round(c, 12)))
    return unique


def lstsq_completeness_weights(ops: np.ndarray) -> np.ndarray:
    """Weights solving sum_j w_j O_j = I by plain (sign-unconstrained) lstsq."""
    ops = np.asarray(ops, dtype=complex)
    n, dim = ops.shape[0], ops.shape[1]
    cols = ops.reshape(n, -1).T
    a = np.vstack([cols.real, cols.imag])
    b = np.concatenate([np.eye(dim).ravel(), np.zeros(dim * dim)])
    w, *_ = np.linalg.lstsq(a, b, rcond=None)
    return w
