"""The B-side: Mukai lines of the line bundles O(k), the residual block by
double orthogonality, B-mutation systems and their braid compatibility.

Everything lives in Hochschild coordinates, i.e. in H(X) with the pairing
[.,.>_X, and is moved to the A-side only through the Gamma map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _subspace as sub
from .cohomology import (
    CompleteIntersection,
    gamma_line,
    gamma_map_matrix,
    mukai_vector,
    pairing_B_matrix,
    parity,
)
from .direction import DirectionTuple, ExponentSet, is_ordered, ordered_ids, tau_theta_bullet
from .mutation import (
    BraidWord,
    MutationSystem,
    StructureError,
    apply_braid,
    transport_bullet_to_theta0,
    validate_mutation_system,
)
from .quantum import ZERO_ID, exponents, pipeline_tuple


@dataclass(frozen=True)
class MukaiLine:
    """The line of O(k) in both coordinates: Mukai vector and Gamma Ch(O(k))."""

    k: int
    hh: np.ndarray
    cohomology: np.ndarray


def mukai_line(ci: CompleteIntersection, k: int, convention: str = "b") -> MukaiLine:
    nu = mukai_vector(ci, k).to_vector()
    return MukaiLine(k, nu, gamma_map_matrix(ci, convention) @ nu)


def residual_subspace(ci: CompleteIntersection, lines: Mapping, order: Sequence, slot=ZERO_ID,
                      P: np.ndarray | None = None, tol: float = 1e-9) -> np.ndarray:
    """Two-sided orthogonal complement of the other blocks, split at ``slot``.

    ``lines`` maps ids to basis matrices.  The blocks must already be
    semiorthogonal in the given order.
    """
    P = pairing_B_matrix(ci) if P is None else P
    order = list(order)
    others = [c for c in order if c != slot]
    for i, a in enumerate(others):
        for b in others[i + 1:]:
            # later block on the left must pair to zero with earlier blocks
            val = np.asarray(lines[b]).T @ P @ np.asarray(lines[a])
            scale = np.linalg.norm(lines[a]) * np.linalg.norm(lines[b]) * np.abs(P).max()
            if np.abs(val).max() > tol * scale:
                raise StructureError(f"blocks {a!r}, {b!r} are not semiorthogonal")
    pos = order.index(slot)
    before = [np.asarray(lines[c]) for c in order[:pos]]
    after = [np.asarray(lines[c]) for c in order[pos + 1:]]
    Z = sub.two_sided_complement(P, before, after, parity(ci))
    expected = ci.n_total - sum(b.shape[1] for b in before + after)
    if Z.shape[1] != expected:
        raise StructureError(f"residual has dimension {Z.shape[1]}, expected {expected}")
    return Z


@dataclass
class SubspaceSystem:
    """Per-exponent subspaces of a paired space, listed in an order."""

    pairing: np.ndarray
    exponents: ExponentSet
    order: tuple
    subspaces: dict
    grading: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def to_mutation_system(self) -> MutationSystem:
        f = np.hstack([self.subspaces[c] for c in self.order])
        dims = {c: self.subspaces[c].shape[1] for c in self.order}
        bg = None
        if self.grading is not None:
            bg = {c: sub.span_parities(self.subspaces[c], self.grading) for c in self.order}
        return MutationSystem(self.pairing, self.exponents, self.order, dims, f, self.grading, bg)

    def semiorthogonality_residual(self) -> float:
        worst = 0.0
        P = self.pairing
        for i, a in enumerate(self.order):
            for b in self.order[i + 1:]:
                A, B = self.subspaces[a], self.subspaces[b]
                if A.shape[1] and B.shape[1]:
                    val = B.T @ P @ A
                    worst = max(worst, float(np.abs(val).max() / (np.abs(P).max() * np.abs(A).max() * np.abs(B).max())))
        return worst

    def spans(self) -> bool:
        F = np.hstack([self.subspaces[c] for c in self.order])
        return F.shape[1] == F.shape[0] and np.linalg.matrix_rank(F) == F.shape[0]


def b_subspace_system(ci: CompleteIntersection, tup: DirectionTuple | None = None,
                      theta0: float = 0.1) -> SubspaceSystem:
    """Mukai lines of O(0..r-1) at -T omega_k and the residual at 0, in the tuple order."""
    C = exponents(ci)
    tup = pipeline_tuple(ci, theta0) if tup is None else tup
    if not is_ordered(tup, C):
        raise StructureError("direction tuple is not ordered")
    order = ordered_ids(tau_theta_bullet(C, tup))
    P = pairing_B_matrix(ci)
    spaces = {f"c{k}": mukai_line(ci, k).hh[:, None] for k in range(ci.index)}
    if ZERO_ID in C.ids:
        spaces[ZERO_ID] = residual_subspace(ci, spaces, order, ZERO_ID, P)
    meta = {"side": "B", "k_values": list(range(ci.index)),
            "residual_slot": order.index(ZERO_ID) + 1 if ZERO_ID in order else None}
    return SubspaceSystem(P, C, tuple(order), spaces, parity(ci), meta)


def build_b_mutation_system(ci: CompleteIntersection, tup: DirectionTuple | None = None,
                            theta0: float = 0.1, tol: float = 1e-9) -> MutationSystem:
    """The B-mutation system at the ordered tuple (default: the pipeline tuple at theta0)."""
    ms = b_subspace_system(ci, tup, theta0).to_mutation_system()
    rep = validate_mutation_system(ms, tol)
    if not rep.ok:
        raise StructureError(f"B-side system fails validation: {rep}")
    return ms


def b_mutation_system_at_theta0(ci: CompleteIntersection, theta0: float = 0.1) -> MutationSystem:
    tup = pipeline_tuple(ci, theta0)
    return transport_bullet_to_theta0(build_b_mutation_system(ci, tup), theta0, tup)


def _sigma_subspaces(P: np.ndarray, spaces: list[np.ndarray], i: int, sign: int,
                     grading: np.ndarray | None) -> list[np.ndarray]:
    """Re-solve orthogonality after sigma_i^{sign} (positions 1-based)."""
    W = list(spaces)
    a, b = i - 1, i  # 0-based positions i, i+1
    if sign > 0:
        # block at i moves to i+1 and is re-solved; block at i+1 moves to i unchanged
        before = W[:a] + [W[b]]
        after = W[b + 1:]
        new = sub.two_sided_complement(P, before, after, grading)
        out = W[:a] + [W[b], new] + W[b + 1:]
        moved = W[a]
    else:
        # block at i+1 moves to i and is re-solved; block at i moves to i+1 unchanged
        before = W[:a]
        after = [W[a]] + W[b + 1:]
        new = sub.two_sided_complement(P, before, after, grading)
        out = W[:a] + [new, W[a]] + W[b + 1:]
        moved = W[b]
    if new.shape[1] != moved.shape[1]:
        raise StructureError("orthogonality re-solve changed a block dimension")
    return out


@dataclass
class BraidCompatibilityReport:
    word: str
    distances: dict
    tol: float

    @property
    def max_distance(self) -> float:
        return max(self.distances.values(), default=0.0)

    @property
    def ok(self) -> bool:
        return self.max_distance <= self.tol


def braid_compatibility_check(ms: MutationSystem, w: BraidWord, tol: float = 1e-9) -> BraidCompatibilityReport:
    """Subspace-level mutation (re-solving orthogonality) against apply_braid."""
    order = list(ms.order)
    spaces = [ms.f_block(c) for c in order]
    for i, e in reversed(w.letters):
        spaces = _sigma_subspaces(ms.pairing, spaces, i, e, ms.grading)
        if e > 0:
            order[i - 1], order[i] = order[i], order[i - 1]
        else:
            order[i - 1], order[i] = order[i], order[i - 1]
    target = apply_braid(ms, w)
    if tuple(order) != tuple(target.order):
        raise StructureError("orders disagree after the braid")
    dist = {c: sub.subspace_distance(S, target.f_block(c)) for c, S in zip(order, spaces)}
    return BraidCompatibilityReport(str(w), dist, tol)


def euler_gram(ci: CompleteIntersection, ks: Sequence[int] | None = None) -> np.ndarray:
    """[nu(O(i)), nu(O(j))>_B: the Euler matrix from Mukai vectors."""
    ks = list(range(ci.index)) if ks is None else list(ks)
    P = pairing_B_matrix(ci)
    V = np.column_stack([mukai_vector(ci, k).to_vector() for k in ks])
    return V.T @ P @ V


def gamma_intertwining_residual(ci: CompleteIntersection, ms: MutationSystem, convention: str = "b") -> float:
    """|| Gamma(f)^T [.,.) Gamma(f) - f^T [.,.> f || on the block bases, relative."""
    from .cohomology import pairing_A_matrix

    G = gamma_map_matrix(ci, convention)
    lhs = (G @ ms.f).T @ pairing_A_matrix(ci) @ (G @ ms.f)
    rhs = ms.f.T @ ms.pairing @ ms.f
    return float(np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
