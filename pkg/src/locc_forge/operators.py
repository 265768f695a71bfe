"""Hermitian operator algebra: tensor products, trace pairings, spans, dual bases.

Operators are plain ``numpy.ndarray`` matrices (complex128).  The functions
here are the only place the library touches raw linear algebra on operator
space; everything above works with the :class:`OperatorBasis` abstraction or
with coefficient vectors.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBasisError, DimensionMismatchError
from .tolerances import (
    GRAM_CONDITION_LIMIT,
    HERMITICITY_TOL,
    PSD_TOL,
    RANK_FACTOR,
    rank_threshold,
)


def as_hermitian(entries, herm_tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate a square matrix as Hermitian and return it as complex128.

    Asymmetry is measured in max norm after scaling by the largest entry
    magnitude, so the check is insensitive to overall operator scale.
    """
    a = np.ascontiguousarray(entries, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("operator dimension must be at least 1")
    scale = float(np.abs(a).max())
    if scale > 0.0 and float(np.abs(a - a.conj().T).max()) > herm_tol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    return a


def tensor(factors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of the factors, in the given order.

    Reduction is a left fold, so nested calls that preserve the overall
    factor order produce bit-identical results.
    """
    if len(factors) == 0:
        raise ValueError("tensor() needs at least one factor")
    out = np.asarray(factors[0], dtype=np.complex128)
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def frobenius(x: np.ndarray, y: np.ndarray) -> float:
    """Trace pairing Tr[x^dag y], returned as a real number.

    Raises if the pairing of the (nominally Hermitian) inputs has a
    non-negligible imaginary part.
    """
    if x.shape != y.shape:
        raise DimensionMismatchError(f"operand shapes differ: {x.shape} vs {y.shape}")
    value = np.vdot(x, y)
    scale = max(1.0, float(np.linalg.norm(x)) * float(np.linalg.norm(y)))
    if abs(value.imag) > 1e-10 * scale:
        raise ValueError(f"trace pairing has imaginary part {value.imag:.3e}")
    return float(value.real)


def independent_subset(ops: Sequence[np.ndarray],
                       rank_factor: float = RANK_FACTOR) -> list[int]:
    """Indices of a maximal linearly independent subset, greedy in input order.

    Rank is decided from the singular values of the vectorized stack with
    cutoff ``max(rows, cols) * sigma_max * rank_factor``.  A list of zero
    operators yields an empty index list.
    """
    if len(ops) == 0:
        raise ValueError("empty operator list")
    dim = ops[0].shape[0]
    vecs = np.stack([np.asarray(op, dtype=np.complex128).ravel() for op in ops])
    if any(op.shape != (dim, dim) for op in ops):
        raise DimensionMismatchError("operators have mixed dimensions")
    chosen: list[int] = []
    for i in range(len(ops)):
        stack = vecs[chosen + [i]]
        sigma = np.linalg.svd(stack, compute_uv=False)
        cutoff = rank_threshold(stack.shape, float(sigma[0]), rank_factor)
        rank = int(np.sum(sigma > cutoff))
        if rank == len(chosen) + 1:
            chosen.append(i)
    return chosen


def gram_matrix(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Real symmetric matrix of pairwise trace pairings."""
    stack = np.stack([np.asarray(op, dtype=np.complex128) for op in ops])
    g = np.einsum("aij,bij->ab", stack.conj(), stack)
    return np.ascontiguousarray(g.real)


class OperatorBasis:
    """An ordered, linearly independent set of Hermitian operators on one space.

    Caches the Gram matrix of trace pairings and provides the dual basis and
    coordinate maps within the span.

    Parameters
    ----------
    elements : iterable of ndarray
        Hermitian operators, all of the same dimension.
    check : bool
        Validate hermiticity and independence (on by default; internal
        constructions that are independent by design may skip it).
    """

    def __init__(self, elements: Iterable[np.ndarray], check: bool = True,
                 rank_factor: float = RANK_FACTOR):
        elems = [np.ascontiguousarray(e, dtype=np.complex128) for e in elements]
        if not elems:
            raise ValueError("a basis needs at least one element")
        if check:
            elems = [as_hermitian(e) for e in elems]
        dim = elems[0].shape[0]
        if any(e.shape != (dim, dim) for e in elems):
            raise DimensionMismatchError("basis elements have mixed dimensions")
        self.elements: tuple[np.ndarray, ...] = tuple(elems)
        self.space_dim: int = dim
        self._rank_factor = rank_factor
        if check:
            sigma = np.linalg.svd(self.gram, compute_uv=False)
            cutoff = rank_threshold(self.gram.shape, float(sigma[0]), rank_factor)
            if sigma[-1] <= cutoff:
                raise DegenerateBasisError(
                    "elements are linearly dependent within rank tolerance")

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def gram(self) -> np.ndarray:
        return gram_matrix(self.elements)

    @cached_property
    def stack(self) -> np.ndarray:
        """Elements as one (n, d, d) array."""
        return np.stack(self.elements)

    def _solve_gram(self, rhs: np.ndarray) -> np.ndarray:
        sigma = np.linalg.svd(self.gram, compute_uv=False)
        if sigma[-1] <= 0 or sigma[0] / sigma[-1] > GRAM_CONDITION_LIMIT:
            raise DegenerateBasisError(
                f"Gram matrix condition number exceeds {GRAM_CONDITION_LIMIT:.0e}")
        return np.linalg.solve(self.gram, rhs)

    def dual(self) -> "OperatorBasis":
        """The unique set in the same span pairing to the identity with this one.

        Element k of the result satisfies Tr[dual_k^dag element_j] = delta_jk.
        """
        coeffs = self._solve_gram(np.eye(len(self)))
        duals = np.einsum("kj,jab->kab", coeffs, self.stack)
        return OperatorBasis(list(duals), check=False, rank_factor=self._rank_factor)

    def coordinates(self, op: np.ndarray) -> np.ndarray:
        """Real coefficients of the projection of ``op`` onto the span."""
        rhs = np.array([frobenius(e, op) for e in self.elements])
        return self._solve_gram(rhs)

    def compose(self, coords: np.ndarray) -> np.ndarray:
        return np.einsum("j,jab->ab", np.asarray(coords, dtype=float), self.stack)

    def projection_residual(self, op: np.ndarray) -> float:
        """Max-norm distance from ``op`` to the span."""
        proj = self.compose(self.coordinates(op))
        return float(np.abs(op - proj).max())


def dual_basis(basis: OperatorBasis) -> OperatorBasis:
    return basis.dual()


def is_psd(x: np.ndarray, psd_tol: float = PSD_TOL) -> bool:
    """True iff the smallest eigenvalue is above the scaled negativity floor."""
    eigs = np.linalg.eigvalsh(x)
    floor = psd_tol * max(1.0, float(np.abs(eigs).max()))
    return bool(eigs[0] >= -floor)


def min_eigenvalue(x: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(x)[0])


def embed_at(x: np.ndarray, y: np.ndarray, slot: int,
             dims: tuple[int, ...]) -> np.ndarray:
    """Joint operator acting as ``x`` on party ``slot`` and ``y`` on the rest.

    ``y`` lives on the tensor product of the remaining parties in their
    original order; the result's legs are restored to declaration order.
    """
    from math import prod
    n_parties = len(dims)
    full = np.kron(x, y)
    order = [slot] + [p for p in range(n_parties) if p != slot]
    inverse = list(np.argsort(order))
    shape = [dims[p] for p in order]
    t = full.reshape(shape + shape)
    t = t.transpose(inverse + [n_parties + i for i in inverse])
    total = prod(dims)
    return np.ascontiguousarray(t.reshape(total, total))


def project_factor(op: np.ndarray, abar: np.ndarray, slot: int,
                   dims: tuple[int, ...]) -> tuple[np.ndarray, float]:
    """Best factor X with op ~ X (x) abar, plus the max-norm residual.

    The least-squares optimum is the trace pairing of ``op`` against the
    elementary slot operators tensored with ``abar``, divided by |abar|^2.
    """
    from math import prod
    n_parties = len(dims)
    dp = dims[slot]
    dc = prod(dims) // dp
    t = op.reshape(dims * 2)
    order = [slot] + [p for p in range(n_parties) if p != slot]
    t = t.transpose(order + [n_parties + p for p in order]).reshape(dp, dc, dp, dc)
    norm2 = float(np.vdot(abar, abar).real)
    if norm2 == 0.0:
        raise ValueError("cannot factor against a zero operator")
    x = np.einsum("rusv,uv->rs", t, abar.conj()) / norm2
    residual = float(np.abs(op - embed_at(x, abar, slot, dims)).max())
    return np.ascontiguousarray(x), residual
