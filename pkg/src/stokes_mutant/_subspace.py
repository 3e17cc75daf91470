"""Subspace helpers shared by the A- and B-side constructions.

Subspaces are stored as basis matrices (columns).  Complements are taken
with respect to a bilinear (not sesquilinear) pairing matrix P, so
``left_perp(P, W)`` is {v : [v, w> = 0 for w in W} and ``right_perp(P, W)``
is {v : [w, v> = 0 for w in W}.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import null_space, subspace_angles

RANK_RTOL = 1e-9


def orth(A: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the column span (rank decided by singular values)."""
    A = np.asarray(A, complex)
    if A.size == 0:
        return np.zeros((A.shape[0], 0), complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((A.shape[0], 0), complex)
    return U[:, s > rtol * s[0]]


def kernel(M: np.ndarray, n: int, rtol: float = RANK_RTOL) -> np.ndarray:
    """Kernel of an (k x n) constraint matrix; k may be zero."""
    M = np.asarray(M, complex).reshape(-1, n)
    if M.shape[0] == 0 or not np.any(M):
        return np.eye(n, dtype=complex)
    return null_space(M, rcond=rtol)


def left_perp(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    return kernel((P @ W).T, P.shape[0])


def right_perp(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    return kernel(W.T @ P, P.shape[0])


def two_sided_complement(P: np.ndarray, before: list[np.ndarray], after: list[np.ndarray],
                         grading: np.ndarray | None = None, rtol: float = RANK_RTOL) -> np.ndarray:
    """(intersection of left perps of ``before``) meet (intersection of right perps of ``after``).

    With a grading, the kernel is solved separately in each parity sector so the
    returned basis vectors have definite parity (this needs the constraints to
    respect the grading, which holds for graded pairings and even lines).
    """
    P = np.asarray(P, complex)
    n = P.shape[0]
    rows = [(P @ W).T for W in before if W.shape[1]] + [W.T @ P for W in after if W.shape[1]]
    C = np.vstack(rows) if rows else np.zeros((0, n), complex)
    if grading is None:
        return kernel(C, n, rtol)
    grading = np.asarray(grading)
    cols = []
    for p in sorted(set(grading.tolist())):
        idx = np.flatnonzero(grading == p)
        E = np.eye(n)[:, idx]
        K = kernel(C @ E, len(idx), rtol)
        cols.append(E @ K)
    return np.hstack(cols) if cols else np.zeros((n, 0), complex)


def span_parities(B: np.ndarray, grading: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Parity of each basis column; raises if a column mixes parities."""
    out = []
    for col in np.asarray(B).T:
        present = {int(g) for g, x in zip(grading, col) if abs(x) > tol * max(1.0, np.abs(col).max())}
        if len(present) > 1:
            raise ValueError("basis vector has mixed parity")
        out.append(present.pop() if present else 0)
    return np.array(out, dtype=int)


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Largest principal angle between two column spans (inf on dimension mismatch)."""
    A = np.asarray(A, complex)
    B = np.asarray(B, complex)
    if A.shape[1] != B.shape[1]:
        return float("inf")
    if A.shape[1] == 0:
        return 0.0
    return float(np.max(subspace_angles(A, B)))


def contains(A: np.ndarray, B: np.ndarray, rtol: float = 1e-8) -> float:
    """Relative residual of projecting the columns of B onto span A (0 iff B in A)."""
    Q = orth(A)
    B = np.asarray(B, complex)
    if B.shape[1] == 0:
        return 0.0
    res = B - Q @ (Q.conj().T @ B)
    return float(np.linalg.norm(res) / max(np.linalg.norm(B), 1e-300))
