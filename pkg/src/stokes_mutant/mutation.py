"""Stokes data, mutation systems and the braid-group action on them.

Matrices act on column vectors.  A Stokes data object stores the splitting
``f`` (column groups f_c, ordered by tau) and ``f_star`` (row groups f*_c in
the same order).  A component map V_c -> V_c' of an endomorphism of the direct
sum sits in block-row c', block-column c.

Braid words are products sigma_{i1} sigma_{i2} ... sigma_{ik} read as
composites of functors, so the rightmost letter acts first.  sigma_i is the
right mutation at i+1 and sigma_i^{-1} the left mutation at i.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from itertools import permutations as _perms
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .direction import (
    DirectionTuple,
    ExponentSet,
    NonGenericDirectionError,
    TOL_ANGLE,
    crossing_angles,
    is_generic,
    is_ordered,
    ordered_ids,
    r_theta,
    tau_theta,
    tau_theta_bullet,
)

TOL_LIN = 1e-10


class StructureError(ValueError):
    """Shapes or labels are inconsistent (as opposed to a failed axiom)."""


def _as_matrix(a, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        m = m.reshape(rows if rows is not None else -1, cols if cols is not None else -1)
    return m


def rel_residual(a: np.ndarray, b: np.ndarray) -> float:
    """||a - b|| relative to max(1, ||b||)."""
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))


def equilibrated_cond(a: np.ndarray) -> float:
    """Condition number after scaling rows and columns to unit norm.

    Invertibility does not depend on such scalings, while the plain condition
    number does; graded bases (H^k against H^0) make the difference large.
    """
    a = np.asarray(a, complex)
    if a.size == 0:
        return 1.0
    for axis in (0, 1, 0):
        norms = np.linalg.norm(a, axis=axis, keepdims=True)
        if np.any(norms == 0):
            return math.inf
        a = a / norms
    return float(np.linalg.cond(a))


@dataclass(frozen=True)
class MonodromyRep:
    """A vector space C^dim with an invertible operator T and optional parities."""

    dim: int
    T: np.ndarray
    grading: np.ndarray | None = None

    def __post_init__(self):
        T = _as_matrix(self.T, self.dim, self.dim) if self.dim else np.zeros((0, 0), complex)
        if T.shape != (self.dim, self.dim):
            raise StructureError(f"monodromy has shape {T.shape}, expected {(self.dim, self.dim)}")
        if self.dim and np.linalg.cond(T) > 1e14:
            raise StructureError("monodromy is not invertible")
        object.__setattr__(self, "T", T)
        if self.grading is not None:
            g = np.asarray(self.grading, dtype=int) % 2
            if g.shape != (self.dim,):
                raise StructureError("grading must give one parity per basis vector")
            object.__setattr__(self, "grading", g)

    def sign(self) -> np.ndarray:
        """(-1)^deg as a diagonal matrix (identity when ungraded)."""
        if self.grading is None:
            return np.eye(self.dim)
        return np.diag((-1.0) ** self.grading)


@dataclass(frozen=True)
class StokesData:
    """Stokes data of type (C, tau) on a monodromy representation (V, T)."""

    ambient: MonodromyRep
    exponents: ExponentSet
    order: tuple
    blocks: Mapping[Hashable, MonodromyRep]
    f: np.ndarray
    f_star: np.ndarray

    def __post_init__(self):
        order = tuple(self.order)
        object.__setattr__(self, "order", order)
        if set(order) != set(self.exponents.ids) or len(order) != len(self.exponents):
            raise StructureError("order must list every exponent id exactly once")
        n = self.ambient.dim
        dims = [self.blocks[c].dim for c in order]
        if sum(dims) != n:
            raise StructureError(f"block dimensions {dims} do not add up to {n}")
        f = _as_matrix(self.f, n, n) if n else np.zeros((0, 0), complex)
        fs = _as_matrix(self.f_star, n, n) if n else np.zeros((0, 0), complex)
        if f.shape != (n, n) or fs.shape != (n, n):
            raise StructureError("f and f_star must be square of size dim V")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "f_star", fs)

    @classmethod
    def from_blocks(cls, ambient: MonodromyRep, exponents: ExponentSet, order: Sequence,
                    blocks: Mapping, f_blocks: Mapping, fstar_blocks: Mapping) -> "StokesData":
        n = ambient.dim
        f = np.zeros((n, n), complex)
        fs = np.zeros((n, n), complex)
        pos = 0
        for c in order:
            d = blocks[c].dim
            f[:, pos:pos + d] = np.asarray(f_blocks[c], complex).reshape(n, d)
            fs[pos:pos + d, :] = np.asarray(fstar_blocks[c], complex).reshape(d, n)
            pos += d
        return cls(ambient, exponents, tuple(order), dict(blocks), f, fs)

    @property
    def T(self) -> np.ndarray:
        return self.ambient.T

    @property
    def m(self) -> int:
        return len(self.order)

    @property
    def dim(self) -> int:
        return self.ambient.dim

    @property
    def tau(self) -> dict:
        return {c: k + 1 for k, c in enumerate(self.order)}

    def _slice(self, cid) -> slice:
        pos = 0
        for c in self.order:
            d = self.blocks[c].dim
            if c == cid:
                return slice(pos, pos + d)
            pos += d
        raise KeyError(cid)

    def f_block(self, cid) -> np.ndarray:
        return self.f[:, self._slice(cid)]

    def fstar_block(self, cid) -> np.ndarray:
        return self.f_star[self._slice(cid), :]

    def fshriek_block(self, cid) -> np.ndarray:
        Tc = self.blocks[cid].T
        return np.linalg.solve(Tc, self.fstar_block(cid) @ self.T) if Tc.size else self.fstar_block(cid)

    def block_T(self) -> np.ndarray:
        """The direct sum of block monodromies in tau-order."""
        return _block_diag([self.blocks[c].T for c in self.order])

    def dims(self) -> list[int]:
        return [self.blocks[c].dim for c in self.order]

    def block_of(self, position: int):
        """Exponent id at 1-based tau position."""
        return self.order[position - 1]


def _block_diag(mats: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n), complex)
    pos = 0
    for m in mats:
        d = m.shape[0]
        out[pos:pos + d, pos:pos + d] = m
        pos += d
    return out


@dataclass
class ValidationReport:
    """Residual norms for each checked clause."""

    residuals: dict = field(default_factory=dict)
    tol: float = TOL_LIN

    @property
    def violations(self) -> dict:
        return {k: v for k, v in self.residuals.items() if not v <= self.tol}

    @property
    def ok(self) -> bool:
        return not self.violations

    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def __str__(self) -> str:
        if self.ok:
            return f"valid (max residual {self.max_residual():.2e})"
        lines = [f"{k}: {v:.3e}" for k, v in self.violations.items()]
        return "invalid\n" + "\n".join(lines)


def validate_stokes_data(sd: StokesData, tol: float = TOL_LIN) -> ValidationReport:
    """Check invertibility and both triangularity axioms of Stokes data."""
    rep = ValidationReport(tol=tol)
    n = sd.dim
    if n == 0:
        return rep
    rep.residuals["f invertible"] = 0.0 if equilibrated_cond(sd.f) < 1 / tol else math.inf
    rep.residuals["f* invertible"] = 0.0 if equilibrated_cond(sd.f_star) < 1 / tol else math.inf
    tau = sd.tau
    for c in sd.order:
        fc = sd.f_block(c)
        if fc.shape[1] == 0:
            continue
        for c2 in sd.order:
            if sd.blocks[c2].dim == 0:
                continue
            fs2 = sd.fstar_block(c2)
            fsh2 = sd.fshriek_block(c2)
            scale = max(1.0, np.linalg.norm(fc) * np.linalg.norm(fs2))
            if c2 == c:
                eye = np.eye(fc.shape[1])
                scale2 = max(1.0, np.linalg.norm(fc) * np.linalg.norm(fsh2))
                rep.residuals[f"(1) f*_{c} f_{c} = id"] = float(np.linalg.norm(fs2 @ fc - eye) / scale)
                rep.residuals[f"(2) f!_{c} f_{c} = id"] = float(np.linalg.norm(fsh2 @ fc - eye) / scale2)
            elif tau[c2] < tau[c]:
                rep.residuals[f"(1) f*_{c2} f_{c} = 0"] = float(np.linalg.norm(fs2 @ fc) / scale)
            else:
                scale2 = max(1.0, np.linalg.norm(fc) * np.linalg.norm(fsh2))
                rep.residuals[f"(2) f!_{c2} f_{c} = 0"] = float(np.linalg.norm(fsh2 @ fc) / scale2)
    return rep


# ---------------------------------------------------------------------------
# mutation systems


@dataclass(frozen=True)
class MutationSystem:
    """A non-degenerate pairing with a semiorthogonal splitting.

    ``pairing[i, j]`` is [e_i, e_j>.  Monodromy and f* are derived, never stored.
    """

    pairing: np.ndarray
    exponents: ExponentSet
    order: tuple
    block_dims: Mapping[Hashable, int]
    f: np.ndarray
    grading: np.ndarray | None = None
    block_grading: Mapping[Hashable, np.ndarray] | None = None

    def __post_init__(self):
        P = _as_matrix(self.pairing)
        n = P.shape[0]
        object.__setattr__(self, "pairing", P)
        object.__setattr__(self, "order", tuple(self.order))
        object.__setattr__(self, "f", _as_matrix(self.f, n, n))
        if sum(self.block_dims[c] for c in self.order) != n:
            raise StructureError("block dimensions do not add up to dim V")
        if (self.grading is None) != (self.block_grading is None):
            raise StructureError("grading and block_grading must be given together")

    @property
    def dim(self) -> int:
        return self.pairing.shape[0]

    @property
    def tau(self) -> dict:
        return {c: k + 1 for k, c in enumerate(self.order)}

    def _slice(self, cid) -> slice:
        pos = 0
        for c in self.order:
            d = self.block_dims[c]
            if c == cid:
                return slice(pos, pos + d)
            pos += d
        raise KeyError(cid)

    def f_block(self, cid) -> np.ndarray:
        return self.f[:, self._slice(cid)]

    def block_pairing(self, cid) -> np.ndarray:
        F = self.f_block(cid)
        return F.T @ self.pairing @ F

    def sign(self) -> np.ndarray:
        if self.grading is None:
            return np.eye(self.dim)
        return np.diag((-1.0) ** np.asarray(self.grading))

    def block_sign(self, cid) -> np.ndarray:
        if self.block_grading is None:
            return np.eye(self.block_dims[cid])
        return np.diag((-1.0) ** np.asarray(self.block_grading[cid]))

    def with_splitting(self, order: Sequence, f: np.ndarray) -> "MutationSystem":
        return MutationSystem(self.pairing, self.exponents, tuple(order), self.block_dims, f,
                              self.grading, self.block_grading)


def monodromy_from_pairing(P: np.ndarray, sign: np.ndarray | None = None) -> np.ndarray:
    """The operator T with [Tv, w> = (-1)^{deg v} [w, v> (plain case: sign = id)."""
    P = np.asarray(P, complex)
    if sign is None:
        sign = np.eye(P.shape[0])
    return np.linalg.solve(P.T, P) @ sign


def derive_T(ms: MutationSystem) -> np.ndarray:
    return monodromy_from_pairing(ms.pairing, ms.sign())


def derive_f_star(ms: MutationSystem) -> np.ndarray:
    """Row groups f*_c defined by [v, f_c w> = [f*_c v, w>_c."""
    rows = []
    for c in ms.order:
        d = ms.block_dims[c]
        if d == 0:
            continue
        Pc = ms.block_pairing(c)
        if equilibrated_cond(Pc) > 1e13:
            raise StructureError(f"block pairing singular for {c!r}")
        rows.append(np.linalg.solve(Pc.T, ms.f_block(c).T @ ms.pairing.T))
    return np.vstack(rows) if rows else np.zeros((0, 0), complex)


def to_stokes_data(ms: MutationSystem) -> StokesData:
    """Forget the pairing, keeping the derived monodromy and f*."""
    ambient = MonodromyRep(ms.dim, derive_T(ms), ms.grading)
    blocks = {}
    for c in ms.order:
        d = ms.block_dims[c]
        if d == 0:
            blocks[c] = MonodromyRep(0, np.zeros((0, 0)))
            continue
        g = None if ms.block_grading is None else ms.block_grading[c]
        blocks[c] = MonodromyRep(d, monodromy_from_pairing(ms.block_pairing(c), ms.block_sign(c)), g)
    return StokesData(ambient, ms.exponents, ms.order, blocks, ms.f, derive_f_star(ms))


def validate_mutation_system(ms: MutationSystem, tol: float = TOL_LIN) -> ValidationReport:
    """Non-degeneracy, monodromy compatibility and semiorthogonality."""
    rep = ValidationReport(tol=tol)
    P = ms.pairing
    rep.residuals["pairing non-degenerate"] = 0.0 if equilibrated_cond(P) < 1 / tol else math.inf
    T = derive_T(ms)
    S = ms.sign()
    # [Tv, w> = (-1)^{deg v}[w, v>  as matrices: T^T P = S P^T
    rep.residuals["compatibility"] = rel_residual(T.T @ P, S @ P.T)
    tau = ms.tau
    scale = max(1.0, np.linalg.norm(P))
    for c in ms.order:
        if ms.block_dims[c] == 0:
            continue
        Pc = ms.block_pairing(c)
        rep.residuals[f"block {c} non-degenerate"] = 0.0 if equilibrated_cond(Pc) < 1 / tol else math.inf
        for c2 in ms.order:
            if c2 != c and ms.block_dims[c2] and tau[c] > tau[c2]:
                val = ms.f_block(c).T @ P @ ms.f_block(c2)
                rep.residuals[f"semiorthogonal {c},{c2}"] = float(np.linalg.norm(val) / scale)
    if rep.ok:
        sd_rep = validate_stokes_data(to_stokes_data(ms), tol)
        rep.residuals.update({f"stokes {k}": v for k, v in sd_rep.residuals.items()})
    return rep


def gram_matrix(ms: MutationSystem, block_bases: Mapping | None = None) -> np.ndarray:
    """Pairings [f_{c_i} e, f_{c_j} e'> arranged in tau-order.

    ``block_bases`` optionally maps an id to a basis (columns) of V_c.
    """
    cols = []
    for c in ms.order:
        F = ms.f_block(c)
        if block_bases is not None and c in block_bases:
            F = F @ np.asarray(block_bases[c], complex)
        cols.append(F)
    F = np.hstack(cols) if cols else np.zeros((ms.dim, 0))
    return F.T @ ms.pairing @ F


# ---------------------------------------------------------------------------
# mutation operators


def mutation_endos(sd: StokesData, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(R_i, R*_i, L_i, L!_i) for the block at tau position i."""
    if not 1 <= i <= sd.m:
        raise IndexError(f"position {i} out of range 1..{sd.m}")
    c = sd.block_of(i)
    n = sd.dim
    eye = np.eye(n, dtype=complex)
    if sd.blocks[c].dim == 0:
        return eye, eye.copy(), eye.copy(), eye.copy()
    fc, fsc, fshc = sd.f_block(c), sd.fstar_block(c), sd.fshriek_block(c)
    Tc, T = sd.blocks[c].T, sd.T
    R = eye - fc @ fsc
    Rs = eye - T @ fc @ np.linalg.solve(Tc, fsc)
    L = eye - fc @ fshc
    Ls = eye - np.linalg.solve(T, fc @ Tc @ fshc)
    return R, Rs, L, Ls


def _swap(order: tuple, a: int, b: int) -> tuple:
    o = list(order)
    o[a - 1], o[b - 1] = o[b - 1], o[a - 1]
    return tuple(o)


def _rebuild(sd: StokesData, order, f_new: Mapping, fs_new: Mapping) -> StokesData:
    fb = {c: f_new.get(c, sd.f_block(c)) for c in sd.order}
    fsb = {c: fs_new.get(c, sd.fstar_block(c)) for c in sd.order}
    return StokesData.from_blocks(sd.ambient, sd.exponents, order, sd.blocks, fb, fsb)


def mutate_right(sd: StokesData, i: int) -> StokesData:
    """Right mutation at i (2 <= i <= m); new type (i, i-1) o tau."""
    if not 2 <= i <= sd.m:
        raise IndexError(f"right mutation index {i} outside 2..{sd.m}")
    R, Rs, _, _ = mutation_endos(sd, i)
    c = sd.block_of(i - 1)
    return _rebuild(sd, _swap(sd.order, i - 1, i), {c: R @ sd.f_block(c)}, {c: sd.fstar_block(c) @ Rs})


def mutate_left(sd: StokesData, i: int) -> StokesData:
    """Left mutation at i (1 <= i <= m-1); new type (i, i+1) o tau."""
    if not 1 <= i <= sd.m - 1:
        raise IndexError(f"left mutation index {i} outside 1..{sd.m - 1}")
    _, _, L, Ls = mutation_endos(sd, i)
    c = sd.block_of(i + 1)
    T = sd.T
    fs = sd.fstar_block(c) @ T @ Ls @ np.linalg.inv(T)
    return _rebuild(sd, _swap(sd.order, i, i + 1), {c: L @ sd.f_block(c)}, {c: fs})


# ---------------------------------------------------------------------------
# permutations and braid words


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..m} given by its images."""

    images: tuple

    def __post_init__(self):
        imgs = tuple(int(x) for x in self.images)
        if sorted(imgs) != list(range(1, len(imgs) + 1)):
            raise ValueError(f"{imgs} is not a permutation of 1..{len(imgs)}")
        object.__setattr__(self, "images", imgs)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def longest(cls, m: int) -> "Permutation":
        return cls(tuple(range(m, 0, -1)))

    @classmethod
    def transposition(cls, m: int, i: int) -> "Permutation":
        imgs = list(range(1, m + 1))
        imgs[i - 1], imgs[i] = imgs[i], imgs[i - 1]
        return cls(tuple(imgs))

    @classmethod
    def from_orders(cls, new: Mapping, old: Mapping) -> "Permutation":
        """The permutation new o old^{-1} for two orderings id -> position."""
        imgs = [0] * len(old)
        for cid, pos in old.items():
            imgs[pos - 1] = new[cid]
        return cls(tuple(imgs))

    @property
    def m(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        """Composition self o other."""
        return Permutation(tuple(self(other(i)) for i in range(1, self.m + 1)))

    def inverse(self) -> "Permutation":
        inv = [0] * self.m
        for i, s in enumerate(self.images, start=1):
            inv[s - 1] = i
        return Permutation(tuple(inv))

    def length(self) -> int:
        s = self.images
        return sum(1 for a in range(len(s)) for b in range(a + 1, len(s)) if s[a] > s[b])

    def act_on(self, tau: Mapping) -> dict:
        """s o tau."""
        return {c: self(p) for c, p in tau.items()}


_LETTER = re.compile(r"^s(\d+)(\^-1|')?$")


@dataclass(frozen=True)
class BraidWord:
    """sigma_{i1}^{e1} ... sigma_{ik}^{ek} in Br_m; letters are (i, +-1)."""

    m: int
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((int(i), 1 if e > 0 else -1) for i, e in self.letters)
        for i, _ in letters:
            if not 1 <= i <= self.m - 1:
                raise ValueError(f"generator index {i} out of range for {self.m} strands")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str, m: int) -> "BraidWord":
        """Parse e.g. ``"s1 s2^-1 s1"``."""
        letters = []
        for tok in text.replace(",", " ").split():
            mt = _LETTER.match(tok.strip())
            if not mt:
                raise ValueError(f"cannot parse braid letter {tok!r}")
            letters.append((int(mt.group(1)), -1 if mt.group(2) else 1))
        return cls(m, tuple(letters))

    def __str__(self) -> str:
        return " ".join(f"s{i}" + ("" if e > 0 else "^-1") for i, e in self.letters)

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        if self.m != other.m:
            raise ValueError("strand mismatch")
        return BraidWord(self.m, self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        return BraidWord(self.m, tuple((i, -e) for i, e in reversed(self.letters)))

    def permutation(self) -> Permutation:
        p = Permutation.identity(self.m)
        for i, _ in self.letters:
            p = p * Permutation.transposition(self.m, i)
        return p


def apply_braid(obj, w: BraidWord):
    """Act by a braid word on StokesData or on a MutationSystem."""
    if isinstance(obj, MutationSystem):
        sd = apply_braid(to_stokes_data(obj), w)
        return obj.with_splitting(sd.order, sd.f)
    if w.m != obj.m:
        raise ValueError(f"braid on {w.m} strands applied to {obj.m} blocks")
    sd = obj
    for i, e in reversed(w.letters):
        sd = mutate_right(sd, i + 1) if e > 0 else mutate_left(sd, i)
    return sd


def inversion_set(s: Permutation) -> tuple[set, dict]:
    """I(s) as a set of pairs and the map i -> I_i(s)."""
    per = {i: {j for j in range(i + 1, s.m + 1) if s(i) > s(j)} for i in range(1, s.m + 1)}
    total = {(i, j) for i, js in per.items() for j in js}
    return total, per


def reduced_word_lift(s: Permutation) -> BraidWord:
    """Positive lift of the lexicographically smallest reduced word of s."""
    letters = []
    cur = s
    while cur.length() > 0:
        inv = cur.inverse()
        i = next(i for i in range(1, cur.m) if inv(i) > inv(i + 1))
        letters.append((i, 1))
        cur = Permutation.transposition(cur.m, i) * cur
    return BraidWord(s.m, tuple(letters))


def reduced_words(s: Permutation) -> list[tuple]:
    """Every reduced word of s, as tuples of generator indices."""
    if s.length() == 0:
        return [()]
    out = []
    inv = s.inverse()
    for i in range(1, s.m):
        if inv(i) > inv(i + 1):
            rest = Permutation.transposition(s.m, i) * s
            out.extend((i,) + w for w in reduced_words(rest))
    return out


def lift_closed_form(sd: StokesData, s: Permutation) -> np.ndarray:
    """f after acting by the lift of s, from the product of original R_i."""
    Rs = {i: mutation_endos(sd, i)[0] for i in range(1, sd.m + 1)}
    _, per = inversion_set(s)
    cols = {}
    for c in sd.order:
        fc = sd.f_block(c)
        for i in sorted(per[sd.tau[c]]):
            fc = Rs[i] @ fc
        cols[c] = fc
    new_order = ordered_ids(s.act_on(sd.tau))
    return np.hstack([cols[c] for c in new_order]) if sd.dim else np.zeros((0, 0))


def delta_action(sd: StokesData) -> StokesData:
    """The half twist, the lift of the longest permutation."""
    return apply_braid(sd, reduced_word_lift(Permutation.longest(sd.m)))


def delta_closed_form(sd: StokesData) -> tuple[np.ndarray, np.ndarray]:
    """(f*)^{-1} and (+T_c) f^{-1} T^{-1}, in the reversed block order."""
    f_new = np.linalg.inv(sd.f_star)
    fs_new = sd.block_T() @ np.linalg.solve(sd.f, np.linalg.inv(sd.T))
    # regroup from old tau-order to the reversed order
    dims = sd.dims()
    offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    idx = np.concatenate([np.arange(offs[k], offs[k + 1]) for k in reversed(range(sd.m))]) if sd.dim else []
    return f_new[:, idx], fs_new[idx, :]


# ---------------------------------------------------------------------------
# Stokes factors


def _block_offsets(dims: Sequence[int]) -> list[slice]:
    out, pos = [], 0
    for d in dims:
        out.append(slice(pos, pos + d))
        pos += d
    return out


@dataclass(frozen=True)
class StokesFactorGroups:
    """Membership tests for Sf(theta) and Sm(theta) on a tau_theta0 block layout."""

    exponents: ExponentSet
    order: tuple
    dims: tuple
    theta: float
    tol: float = TOL_LIN

    def _blocks(self, g):
        g = np.asarray(g, complex)
        sl = _block_offsets(self.dims)
        return g, {(a, b): g[sl[j], sl[i]] for i, a in enumerate(self.order) for j, b in enumerate(self.order)}

    def _diag_ok(self, parts) -> bool:
        return all(np.allclose(parts[c, c], np.eye(d), atol=self.tol) for c, d in zip(self.order, self.dims))

    def in_sf(self, g) -> bool:
        """Identity diagonal and g_{cc'} = 0 off R(theta)."""
        _, parts = self._blocks(g)
        allowed = r_theta(self.exponents, self.theta)
        return self._diag_ok(parts) and all(
            np.linalg.norm(v) <= self.tol for (a, b), v in parts.items() if a != b and (a, b) not in allowed)

    def in_sm(self, g) -> bool:
        """Identity diagonal and g_{cc'} = 0 whenever c' <_{theta+pi/2} c."""
        _, parts = self._blocks(g)
        C = self.exponents
        key = {c: (np.exp(-1j * (self.theta + math.pi / 2)) * C[c]).real for c in self.order}
        return self._diag_ok(parts) and all(
            np.linalg.norm(v) <= self.tol for (a, b), v in parts.items() if a != b and key[b] < key[a])


def stokes_factor_groups(sd: StokesData, theta: float) -> StokesFactorGroups:
    return StokesFactorGroups(sd.exponents, sd.order, tuple(sd.dims()), theta)


def factorize_stokes_multiplier(g, C: ExponentSet, theta0: float, dims: Sequence[int] | None = None,
                                tol: float = TOL_LIN) -> list[tuple[float, np.ndarray]]:
    """Write g in Sm(theta0) as g_l ... g_1 with g_k in Sf(theta_k), theta_1 > ... > theta_l.

    Blocks of g follow the tau_theta0 order.  Returns [(theta_k, g_k)] with k = 1..l.
    """
    if not is_generic(theta0, C):
        raise NonGenericDirectionError(f"theta0={theta0!r} is not generic")
    order = ordered_ids(tau_theta(C, theta0))
    dims = tuple(dims) if dims is not None else (1,) * len(order)
    g = np.asarray(g, complex)
    if not StokesFactorGroups(C, order, dims, theta0, tol).in_sm(g):
        raise ValueError("g is not in Sm(theta0)")
    angles = crossing_angles(C, theta0)
    owner = {}
    for k, th in enumerate(angles):
        for pair in r_theta(C, th):
            owner[pair] = k
    sl = _block_offsets(dims)
    n = g.shape[0]
    factors = [np.eye(n, dtype=complex) for _ in angles]
    m = len(order)
    for gap in range(1, m):
        prod = _compose(factors, n)
        for i in range(m - gap):
            j = i + gap
            a, b = order[i], order[j]
            k = owner[(a, b)]
            factors[k][sl[j], sl[i]] = g[sl[j], sl[i]] - prod[sl[j], sl[i]]
    return list(zip(angles, factors))


def _compose(factors: Sequence[np.ndarray], n: int) -> np.ndarray:
    out = np.eye(n, dtype=complex)
    for fk in factors:
        out = fk @ out
    return out


def compose_factors(factors: Sequence[tuple[float, np.ndarray]]) -> np.ndarray:
    """g_l o ... o g_1 for a factor list as returned by the factorization."""
    mats = [fk for _, fk in factors]
    if not mats:
        raise ValueError("empty factor list")
    return _compose(mats, mats[0].shape[0])


# ---------------------------------------------------------------------------
# direction changes


@dataclass(frozen=True)
class StokesStructure:
    """Stokes data anchored at a generic reference direction."""

    base: StokesData
    theta_ref: float

    def __post_init__(self):
        if not is_generic(self.theta_ref, self.base.exponents):
            raise NonGenericDirectionError("reference direction is not generic")
        expected = ordered_ids(tau_theta(self.base.exponents, self.theta_ref))
        if tuple(self.base.order) != expected:
            raise StructureError(f"base order {self.base.order} differs from tau at theta_ref {expected}")


def _step_down(sd: StokesData, theta: float, theta_new: float) -> StokesData:
    """Move from theta to theta_new in [theta - pi, theta]."""
    C = sd.exponents
    s = Permutation.from_orders(tau_theta(C, theta_new), sd.tau)
    return apply_braid(sd, reduced_word_lift(s))


def _step_up(sd: StokesData, theta: float, theta_new: float) -> StokesData:
    """Move from theta to theta_new in [theta, theta + pi]."""
    C = sd.exponents
    s = Permutation.from_orders(sd.tau, tau_theta(C, theta_new))
    return apply_braid(sd, reduced_word_lift(s).inverse())


def reindex(ss: StokesStructure, theta_new: float) -> StokesData:
    """Stokes data at another generic direction, composed from steps of at most pi."""
    C = ss.base.exponents
    if not is_generic(theta_new, C):
        raise NonGenericDirectionError(f"theta_new={theta_new!r} is not generic")
    sd, th = ss.base, ss.theta_ref
    while th - theta_new > math.pi + TOL_ANGLE:
        sd, th = delta_action(sd), th - math.pi
    while theta_new - th > math.pi + TOL_ANGLE:
        sd, th = _step_up(sd, th, th + math.pi), th + math.pi
    if theta_new < th:
        return _step_down(sd, th, theta_new)
    if theta_new > th:
        return _step_up(sd, th, theta_new)
    return sd


def assemble_theta_bullet(ss: StokesStructure, tup: DirectionTuple) -> StokesData:
    """Glue f_{theta_c, c} over c into Stokes data of type tau_{theta bullet}."""
    C = ss.base.exponents
    if not is_ordered(tup, C):
        raise NonGenericDirectionError("direction tuple is not ordered")
    order = ordered_ids(tau_theta_bullet(C, tup))
    fb, fsb = {}, {}
    cache: dict[float, StokesData] = {}
    for c in C.ids:
        th = tup[c]
        if th not in cache:
            cache[th] = reindex(ss, th)
        fb[c] = cache[th].f_block(c)
        fsb[c] = cache[th].fstar_block(c)
    return StokesData.from_blocks(ss.base.ambient, C, order, ss.base.blocks, fb, fsb)


def bullet_to_theta0_words(C: ExponentSet, theta0: float, tup: DirectionTuple) -> tuple[BraidWord, BraidWord]:
    """Lifts (s)_R and (s')_R with f_{theta bullet} = (s')_R (s)_R f_{theta0}."""
    from .direction import bullet_bookkeeping

    bk = bullet_bookkeeping(C, theta0, tup)
    s = Permutation.from_orders(bk.tau_phi, bk.tau_theta0)
    s2 = Permutation.from_orders(bk.tau_bullet, bk.tau_phi)
    return reduced_word_lift(s), reduced_word_lift(s2)


def bullet_transport_word(C: ExponentSet, theta0: float, tup: DirectionTuple) -> BraidWord:
    """The braid taking data of type tau_{theta bullet} back to type tau_{theta0}."""
    first, second = bullet_to_theta0_words(C, theta0, tup)
    return (second * first).inverse()


def transport_bullet_to_theta0(obj, theta0: float, tup: DirectionTuple):
    """Undo f_{theta bullet} = (s')_R (s)_R f_{theta0} on StokesData or a MutationSystem."""
    return apply_braid(obj, bullet_transport_word(obj.exponents, theta0, tup))


# ---------------------------------------------------------------------------
# random test data


def _rand_c(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def _unipotent(rng, dims, lower: bool, scale: float) -> np.ndarray:
    n = sum(dims)
    sl = _block_offsets(dims)
    out = np.eye(n, dtype=complex)
    for i in range(len(dims)):
        for j in range(len(dims)):
            if (lower and j < i) or (not lower and j > i):
                out[sl[i], sl[j]] = scale * _rand_c(rng, dims[i], dims[j])
    return out


def random_stokes_data(rng: np.random.Generator, dims: Sequence[int], exponents: ExponentSet | None = None,
                       scale: float = 0.5) -> StokesData:
    """Random valid Stokes data with the given block dimensions (in tau-order)."""
    m = len(dims)
    C = exponents or ExponentSet.from_values(range(m))
    order = C.ids
    n = sum(dims)
    f = np.eye(n) + scale * _rand_c(rng, n, n) / math.sqrt(max(n, 1))
    Tcs = [np.eye(d) + scale * _rand_c(rng, d, d) / math.sqrt(max(d, 1)) for d in dims]
    lower = _unipotent(rng, dims, True, scale)
    upper = _unipotent(rng, dims, False, scale)
    f_star = lower @ np.linalg.inv(f)
    T = f @ np.linalg.solve(lower, _block_diag(Tcs)) @ upper @ np.linalg.inv(f)
    blocks = {c: MonodromyRep(d, Tc) for c, d, Tc in zip(order, dims, Tcs)}
    return StokesData(MonodromyRep(n, T), C, order, blocks, f, f_star)


def random_mutation_system(rng: np.random.Generator, dims: Sequence[int], exponents: ExponentSet | None = None,
                           scale: float = 0.5) -> MutationSystem:
    """Random mutation system: a block upper triangular Gram in a random splitting."""
    m = len(dims)
    C = exponents or ExponentSet.from_values(range(m))
    n = sum(dims)
    f = np.eye(n) + scale * _rand_c(rng, n, n) / math.sqrt(max(n, 1))
    gram = _unipotent(rng, dims, False, scale)
    sl = _block_offsets(dims)
    for k, d in enumerate(dims):
        gram[sl[k], sl[k]] = np.eye(d) + scale * _rand_c(rng, d, d) / math.sqrt(max(d, 1))
    finv = np.linalg.inv(f)
    P = finv.T @ gram @ finv
    return MutationSystem(P, C, C.ids, dict(zip(C.ids, dims)), f)


def all_reduced_word_lifts(s: Permutation) -> Iterable[BraidWord]:
    for w in reduced_words(s):
        yield BraidWord(s.m, tuple((i, 1) for i in w))


def all_permutations(m: int) -> Iterable[Permutation]:
    for p in _perms(range(1, m + 1)):
        yield Permutation(p)
