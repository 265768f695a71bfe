"""Per-node feasibility analysis: the constraint matrix, its nullspace, and
reconstruction/factorization of candidate node operators.

At a node of a protocol tree the joint operator is a product A (x) Abar,
where A acts on the party about to measure and Abar is the fixed joint
operator of the bystanders.  The party's admissible next outcomes are the
coefficient vectors c >= 0 for which sum_j c_j O_j again has the form
A' (x) Abar.  Writing the outcome operators in a product basis of the two
operator spans, that condition says every component along directions
"anything (x) (not Abar)" vanishes.  Those directions are extracted with
dual bases: pair every dual element of the measuring party's span with the
dual elements of the bystander span that are trace-orthogonal to Abar, and
collect the pairings with the O_j as the rows of a real matrix Q.  The
admissible c are then exactly the nonnegative nullspace vectors of Q, a
basis-independent set.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .errors import InconsistentNodeError, NotProductError
from .measurement import SeparableMeasurement, complement_span, local_span
from .operators import OperatorBasis, frobenius, independent_subset, project_factor
from .tolerances import DEFAULT_TOL, MARGINAL_RANK_BAND, Tolerances


class MarginalRankWarning(UserWarning):
    """A singular value fell within a decade of the rank cutoff; the computed
    nullspace dimension is tolerance-sensitive."""


@dataclass(frozen=True)
class NodeContext:
    """A (node, measuring party) pair ready for feasibility analysis.

    ``coeffs`` are the node's coefficients against the unweighted outcome
    operators; ``abar`` is the joint operator of every party except
    ``acting_party`` (the identity at the root), expressed on the complement
    space with parties kept in declaration order.
    """

    measurement: SeparableMeasurement
    acting_party: int
    coeffs: np.ndarray
    abar: np.ndarray


def root_context(m: SeparableMeasurement, party: int) -> NodeContext:
    comp_dim = prod(d for i, d in enumerate(m.dims) if i != party) or 1
    return NodeContext(m, party, np.asarray(m.weights, dtype=float),
                       np.eye(comp_dim, dtype=complex))


@dataclass(frozen=True)
class FeasibleCone:
    """Nullspace and extreme rays of the constraint matrix at one context."""

    qmatrix: np.ndarray
    nullspace_basis: np.ndarray           # (n_outcomes, dim), orthonormal columns
    extreme_rays: tuple[np.ndarray, ...]  # L1-normalized, entrywise >= 0
    marginal_rank: bool = field(default=False, compare=False)

    @property
    def nullspace_dim(self) -> int:
        return self.nullspace_basis.shape[1]


def _bystander_basis(span: OperatorBasis, abar: np.ndarray,
                     tol: Tolerances) -> OperatorBasis:
    """Basis of the bystander span whose first element is Abar.

    The completion is drawn from the span's own elements, orthogonalized
    against Abar so the default construction is canonical.
    """
    coords = span.coordinates(abar)
    proj = span.compose(coords)
    residual = float(np.abs(abar - proj).max())
    scale = max(1.0, float(np.abs(abar).max()))
    if residual > 10 * tol.residual * scale:
        raise InconsistentNodeError(
            f"bystander operator lies outside its span (residual {residual:.3e})")

    norm2 = frobenius(abar, abar)
    candidates = [abar] + list(span.elements)
    elements = [abar]
    for i in independent_subset(candidates, tol.rank_factor):
        if i == 0:
            continue
        op = candidates[i]
        elements.append(op - (frobenius(abar, op) / norm2) * abar)
    if len(elements) != len(span):
        raise InconsistentNodeError(
            "bystander span completion has wrong dimension; span is degenerate")
    return OperatorBasis(elements, check=False)


def _random_mix(basis: OperatorBasis, rng: np.random.Generator,
                fix_first: bool) -> OperatorBasis:
    """Random invertible recombination of a basis, optionally pinning element 0."""
    n = len(basis)
    free = n - 1 if fix_first else n
    mix = np.eye(n)
    if free > 0:
        q, _ = np.linalg.qr(rng.standard_normal((free, free)))
        mix[n - free:, n - free:] = q * rng.uniform(0.5, 2.0, size=free)
        if fix_first:
            mix[1:, 0] = rng.standard_normal(free)
    mixed = np.einsum("ij,jab->iab", mix, basis.stack)
    return OperatorBasis(list(mixed), check=False)


def build_q(ctx: NodeContext, tol: Tolerances = DEFAULT_TOL,
            basis_rng: np.random.Generator | None = None) -> np.ndarray:
    """Constraint matrix whose nullspace parametrizes the party's next outcomes.

    Rows pair each dual element of the measuring party's span with each dual
    element of the bystander span that is trace-orthogonal to ``ctx.abar``;
    columns run over measurement outcomes.  Entries are real because all
    bases are Hermitian.  Identically zero rows are dropped.  When
    ``basis_rng`` is given, both bases are randomly recombined (keeping Abar
    as the leading bystander element); the resulting matrix differs row by
    row but its nullspace does not.
    """
    m = ctx.measurement
    p = ctx.acting_party
    acting_basis = local_span(m, p)
    bystander_basis = _bystander_basis(complement_span(m, p), ctx.abar, tol)
    if basis_rng is not None:
        acting_basis = _random_mix(acting_basis, basis_rng, fix_first=False)
        bystander_basis = _random_mix(bystander_basis, basis_rng, fix_first=True)

    acting_duals = acting_basis.dual().stack              # (na, dp, dp)
    bystander_duals = bystander_basis.dual().stack[1:]    # drop the Abar pairing

    if bystander_duals.shape[0] == 0:
        return np.zeros((0, m.n_outcomes))

    locals_ = m.local_factors(p)                           # (n, dp, dp)
    comps = m.complement_factors(p)                        # (n, dc, dc)
    # the trace factorizes over the product structure, so no joint embedding
    t_act = np.einsum("aij,nij->an", acting_duals.conj(), locals_)
    t_bys = np.einsum("bij,nij->bn", bystander_duals.conj(), comps)
    rows = np.einsum("an,bn->abn", t_act, t_bys).reshape(-1, m.n_outcomes)

    scale = max(1.0, float(np.abs(rows).max()))
    if float(np.abs(rows.imag).max()) > 1e-10 * scale:
        raise InconsistentNodeError("constraint matrix has complex entries")
    q = np.ascontiguousarray(rows.real)
    keep = np.abs(q).max(axis=1) > 1e-13 * scale
    return q[keep]


def nullspace(q: np.ndarray, n_cols: int,
              tol: Tolerances = DEFAULT_TOL) -> tuple[np.ndarray, bool]:
    """Orthonormal nullspace basis of ``q`` and a marginal-rank flag."""
    if q.shape[0] == 0:
        return np.eye(n_cols), False
    _, sigma, vh = np.linalg.svd(q)
    cutoff = tol.rank_threshold(q.shape, float(sigma[0]))
    marginal = bool(np.any((sigma > cutoff / MARGINAL_RANK_BAND)
                           & (sigma < cutoff * MARGINAL_RANK_BAND)))
    rank = int(np.sum(sigma > cutoff))
    basis = vh[rank:].conj().T
    return np.ascontiguousarray(basis.real), marginal


def feasible_cone(ctx: NodeContext, tol: Tolerances = DEFAULT_TOL) -> FeasibleCone:
    """Nullspace plus extreme rays of {c >= 0 : Q c = 0} for a context.

    The parent coefficient vector must itself lie in the cone; a node that
    fails this is inconsistent with the measurement.
    """
    from .cones import extreme_rays  # deferred: cones must stay import-light

    q = build_q(ctx, tol)
    basis, marginal = nullspace(q, ctx.measurement.n_outcomes, tol)
    if basis.shape[1] == 0:
        raise InconsistentNodeError("empty nullspace contradicts completeness")
    if marginal:
        warnings.warn("nullspace dimension decided near the rank cutoff",
                      MarginalRankWarning, stacklevel=2)

    c = np.asarray(ctx.coeffs, dtype=float)
    l1 = float(np.abs(c).sum())
    if l1 > 0 and q.shape[0] > 0:
        parent_residual = float(np.abs(q @ (c / l1)).max())
        if parent_residual > tol.residual:
            raise InconsistentNodeError(
                f"parent coefficients violate the node constraints "
                f"(residual {parent_residual:.3e})")
    rays = extreme_rays(q, nullspace_basis=basis, tol=tol)
    return FeasibleCone(q, basis, tuple(rays), marginal)


def reconstruct(m: SeparableMeasurement, coeffs) -> np.ndarray:
    """The joint operator sum_j c_j O_j."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (m.n_outcomes,):
        raise ValueError(f"expected {m.n_outcomes} coefficients, got shape {c.shape}")
    return np.einsum("j,jab->ab", c, m.outcome_operators)


def factorize(op: np.ndarray, abar: np.ndarray, slot: int, dims: tuple[int, ...],
              tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Extract the measuring party's factor from a product node operator.

    Cone membership guarantees the product form, so a residual above
    tolerance signals an analyzer bug and raises :class:`NotProductError`.
    """
    x, residual = project_factor(op, abar, slot, dims)
    if residual > tol.residual * max(1.0, float(np.abs(op).max())):
        raise NotProductError(
            f"operator is not a product with the given bystander factor "
            f"(residual {residual:.3e})")
    return x
