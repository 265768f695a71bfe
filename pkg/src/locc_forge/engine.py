"""Protocol search: which party measures when, and with what outcomes.

The search is depth-first with iterative deepening, so the first tree found
has minimal depth.  At each node every party except the one that just
measured gets a feasibility analysis; each splitting of the node vector
into extreme rays of the party's cone becomes a candidate measurement, and
a branch dies when no party can split a node that is not yet a final
outcome.  Impossibility is only ever certified at the root: if every
party's root cone is one-dimensional, no first measurement exists and no
protocol of any length (finite or not) can implement the measurement.
Dead ends below the root merely terminate the search, because children are
drawn from extreme rays only and a non-extremal split that was not tried
could in principle exist; exhaustion therefore reports INCONCLUSIVE.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cones import decompose
from .errors import LoccForgeError
from .feasibility import (
    FeasibleCone,
    NodeContext,
    factorize,
    feasible_cone,
    reconstruct,
    root_context,
)
from .measurement import SeparableMeasurement
from .operators import tensor
from .tolerances import DEFAULT_TOL, LEAF_SUPPORT_TOL, Tolerances

DEFAULT_MAX_ROUNDS = 8
DEFAULT_MAX_SUPPORT = 6


class Verdict(str, Enum):
    PROTOCOL_FOUND = "PROTOCOL_FOUND"
    IMPOSSIBLE_AT_ROOT = "IMPOSSIBLE_AT_ROOT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(eq=False)
class ProtocolNode:
    """One node of an LOCC tree.

    ``acting_party`` is the index of the party whose measurement produced
    the node (None at the root).  ``leaf_outcome`` is an (outcome index,
    scale) pair present exactly on leaves.
    """

    coeffs: np.ndarray
    acting_party: int | None
    children: tuple["ProtocolNode", ...]
    leaf_outcome: tuple[int, float] | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def walk(self, path: str = "root"):
        yield self, path
        for i, child in enumerate(self.children):
            yield from child.walk(f"{path}.{i}")

    def leaves(self, path: str = "root"):
        return [(node, p) for node, p in self.walk(path) if node.is_leaf]

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(c.depth() for c in self.children)


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    dead_ends: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class RootFeasibility:
    party: str
    nullspace_dim: int
    extreme_rays: tuple[np.ndarray, ...]


@dataclass(eq=False)
class Certificate:
    """Outcome of a synthesis run, with enough evidence to audit it."""

    verdict: Verdict
    root_dims: tuple[int, ...]
    search_stats: SearchStats
    tolerances: Tolerances
    tree: ProtocolNode | None = None


def _worker_cap() -> int:
    raw = os.environ.get("LOCC_FORGE_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _root_cones(m: SeparableMeasurement, tol: Tolerances) -> list[FeasibleCone]:
    def analyze(party: int) -> FeasibleCone:
        return feasible_cone(root_context(m, party), tol)

    cap = min(_worker_cap(), len(m.parties))
    if cap > 1:
        with ThreadPoolExecutor(max_workers=cap) as pool:
            return list(pool.map(analyze, range(len(m.parties))))
    return [analyze(p) for p in range(len(m.parties))]


def check_root(m: SeparableMeasurement,
               tol: Tolerances = DEFAULT_TOL) -> list[RootFeasibility]:
    """Per-party feasibility of the very first measurement.

    All parties' root dimensions equal to one certifies that no LOCC
    protocol for the measurement exists.
    """
    return [
        RootFeasibility(m.parties[p].name, cone.nullspace_dim, cone.extreme_rays)
        for p, cone in enumerate(_root_cones(m, tol))
    ]


def ordering_bound(n_parties: int, rounds: int) -> int:
    """Number of party orderings a full search over `rounds` rounds may visit."""
    if n_parties < 2 or rounds < 1:
        raise ValueError("need at least 2 parties and 1 round")
    return n_parties * (n_parties - 1) ** (rounds - 1)


def _coeff_key(coeffs: np.ndarray) -> tuple:
    l1 = float(np.abs(coeffs).sum())
    if l1 == 0:
        return (0,)
    return tuple(np.round(coeffs / l1, 9))


def leaf_outcome(m: SeparableMeasurement, coeffs: np.ndarray,
                 tol: Tolerances = DEFAULT_TOL) -> tuple[int, float] | None:
    """(outcome index, scale) if the node is a final outcome, else None.

    Two tests: the coefficient vector is supported on a single outcome, or
    the reconstructed operator is a positive multiple of some outcome
    operator.  The second catches coefficient vectors that differ from a
    unit vector yet reconstruct to the same operator, which happens when
    the outcome operators are linearly dependent.
    """
    c = np.asarray(coeffs, dtype=float)
    order = np.argsort(c)
    top = float(c[order[-1]])
    if top <= 0:
        return None
    second = float(c[order[-2]]) if c.size > 1 else 0.0
    if second <= LEAF_SUPPORT_TOL * top:
        return int(order[-1]), top
    op = reconstruct(m, c)
    scale = max(1.0, float(np.abs(op).max()))
    for j in range(m.n_outcomes):
        oj = m.outcome_operators[j]
        norm2 = float(np.vdot(oj, oj).real)
        if norm2 == 0.0:
            continue
        s = float(np.vdot(oj, op).real / norm2)
        if s > 0 and float(np.abs(op - s * oj).max()) <= tol.residual * scale:
            return j, s
    return None


class _Search:
    """Shared state for one synthesis run."""

    def __init__(self, m: SeparableMeasurement, max_support: int, tol: Tolerances):
        self.m = m
        self.max_support = max_support
        self.tol = tol
        self.stats = SearchStats()
        self.cones: dict[tuple, FeasibleCone] = {}
        self.failed: set[tuple] = set()

    def cone_at(self, party: int, coeffs: np.ndarray,
                factors: tuple[np.ndarray, ...]) -> FeasibleCone:
        key = (party, _coeff_key(coeffs))
        cone = self.cones.get(key)
        if cone is None:
            rest = [f for q, f in enumerate(factors) if q != party]
            abar = tensor(rest) if rest else np.eye(1, dtype=complex)
            cone = feasible_cone(NodeContext(self.m, party, coeffs, abar), self.tol)
            self.cones[key] = cone
        return cone

    def run(self, coeffs: np.ndarray, produced_by: int | None,
            factors: tuple[np.ndarray, ...], remaining: int) -> ProtocolNode | None:
        m = self.m
        leaf = leaf_outcome(m, coeffs, self.tol)
        if leaf is not None:
            return ProtocolNode(coeffs, produced_by, (), leaf)
        if remaining == 0:
            self.stats.dead_ends += 1
            return None
        memo_key = (produced_by, remaining, _coeff_key(coeffs))
        if memo_key in self.failed:
            return None
        self.stats.nodes_expanded += 1

        dims = m.dims
        for party in range(len(m.parties)):
            if party == produced_by:
                continue
            cone = self.cone_at(party, coeffs, factors)
            if cone.nullspace_dim == 1:
                continue
            rays = list(cone.extreme_rays)
            rest = [f for q, f in enumerate(factors) if q != party]
            abar = tensor(rest) if rest else np.eye(1, dtype=complex)
            for dec in decompose(coeffs, rays, self.max_support, self.tol):
                children = []
                for i, s in zip(dec.rays_used, dec.scales):
                    child_coeffs = s * rays[i]
                    new_factor = factorize(reconstruct(m, child_coeffs), abar,
                                           party, dims, self.tol)
                    child_factors = tuple(
                        new_factor if q == party else f
                        for q, f in enumerate(factors))
                    child = self.run(child_coeffs, party, child_factors,
                                     remaining - 1)
                    if child is None:
                        break
                    children.append(child)
                else:
                    return ProtocolNode(coeffs, produced_by, tuple(children))
        self.failed.add(memo_key)
        self.stats.dead_ends += 1
        return None


def synthesize(m: SeparableMeasurement, max_rounds: int = DEFAULT_MAX_ROUNDS,
               max_support: int = DEFAULT_MAX_SUPPORT,
               tol: Tolerances = DEFAULT_TOL) -> Certificate:
    """Search for an LOCC tree implementing the measurement.

    Returns PROTOCOL_FOUND with a verified tree, IMPOSSIBLE_AT_ROOT when no
    party can make any first measurement, or INCONCLUSIVE when the
    extreme-ray search is exhausted within ``max_rounds``.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    started = time.perf_counter()
    root_cones = _root_cones(m, tol)
    dims = tuple(c.nullspace_dim for c in root_cones)
    stats = SearchStats()

    if all(d == 1 for d in dims):
        _assert_trivial_root(m, root_cones, tol)
        stats.wall_time = time.perf_counter() - started
        return Certificate(Verdict.IMPOSSIBLE_AT_ROOT, dims, stats, tol)

    weights = np.asarray(m.weights, dtype=float)
    identities = tuple(np.eye(d, dtype=complex) for d in m.dims)
    search = _Search(m, max_support, tol)
    for party, cone in enumerate(root_cones):
        search.cones[(party, _coeff_key(weights))] = cone

    tree = None
    for depth in range(1, max_rounds + 1):
        search.failed.clear()
        tree = search.run(weights, None, identities, depth)
        if tree is not None:
            break
    stats.nodes_expanded = search.stats.nodes_expanded
    stats.dead_ends = search.stats.dead_ends
    stats.wall_time = time.perf_counter() - started

    if tree is None:
        return Certificate(Verdict.INCONCLUSIVE, dims, stats, tol)

    from .verify import verify_tree  # independent checker, import kept one-way
    report = verify_tree(tree, m, tol)
    if not report.passed:
        raise LoccForgeError(
            "internal error: synthesized tree failed independent verification: "
            + ", ".join(k for k, c in report.checks.items() if not c.passed))
    return Certificate(Verdict.PROTOCOL_FOUND, dims, stats, tol, tree)


def _assert_trivial_root(m: SeparableMeasurement, root_cones: list[FeasibleCone],
                         tol: Tolerances) -> None:
    """Soundness check behind an impossibility verdict: each party's only
    root ray is the completeness vector, whose operator is the identity."""
    w = np.asarray(m.weights, dtype=float)
    w_dir = w / w.sum()
    eye = np.eye(m.total_dim)
    for root in root_cones:
        if len(root.extreme_rays) != 1:
            raise LoccForgeError("impossibility self-check failed: stray ray")
        ray = root.extreme_rays[0]
        if float(np.abs(ray - w_dir).max()) > tol.residual:
            raise LoccForgeError(
                "impossibility self-check failed: root ray is not the "
                "completeness vector")
        op = reconstruct(m, ray / ray.sum() * w.sum())
        if float(np.abs(op - eye).max()) > 10 * tol.residual:
            raise LoccForgeError(
                "impossibility self-check failed: root ray does not "
                "reconstruct the identity")
