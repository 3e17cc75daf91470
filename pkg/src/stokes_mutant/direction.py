"""Directions in the complex plane: the orders <=_theta, Stokes directions,
genericity, the ordering bijections tau_theta and tau_{theta bullet}, and
crossing angles.

Angles are plain floats in radians and are never reduced mod 2*pi, since
theta and theta - 2*pi index different Stokes data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Hashable, Iterable, Iterator, Mapping

TOL_ANGLE = 1e-9
TWO_PI = 2.0 * math.pi


class NonGenericDirectionError(ValueError):
    """Raised when an angle sits on a Stokes direction."""


class ExponentSet:
    """A finite set of pairwise distinct complex exponents with opaque ids.

    >>> C = ExponentSet.from_values([-2, 2])
    >>> C.ids
    ('c0', 'c1')
    """

    def __init__(self, entries: Iterable[tuple[Hashable, complex]]):
        pairs = [(cid, complex(val)) for cid, val in entries]
        ids = [cid for cid, _ in pairs]
        vals = [val for _, val in pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("exponent ids must be unique")
        if len(set(vals)) != len(vals):
            raise ValueError("exponent values must be pairwise distinct")
        self._ids = tuple(ids)
        self._values = dict(pairs)

    @classmethod
    def from_values(cls, values: Iterable[complex], prefix: str = "c") -> "ExponentSet":
        return cls((f"{prefix}{k}", v) for k, v in enumerate(values))

    @property
    def ids(self) -> tuple:
        return self._ids

    def __getitem__(self, cid: Hashable) -> complex:
        return self._values[cid]

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self) -> Iterator:
        return iter(self._ids)

    def items(self) -> list[tuple[Hashable, complex]]:
        return [(cid, self._values[cid]) for cid in self._ids]

    def __repr__(self) -> str:
        body = ", ".join(f"{cid!r}: {val:.6g}" for cid, val in self.items())
        return f"ExponentSet({{{body}}})"


def _key(c: complex, theta: float) -> float:
    return (cmath.exp(-1j * theta) * c).real


def leq_theta(c: complex, c2: complex, theta: float) -> bool:
    """c <=_theta c2: Re(e^{-i theta} c) < Re(e^{-i theta} c2), or c == c2."""
    return c == c2 or _key(c, theta) < _key(c2, theta)


def lt_theta(c: complex, c2: complex, theta: float) -> bool:
    """Strict version of :func:`leq_theta`."""
    return c != c2 and _key(c, theta) < _key(c2, theta)


def stokes_directions(c: complex, c2: complex) -> tuple[float, float]:
    """The two antipodal angles where Re e^{-i theta}(c - c2) = 0, in [0, 2 pi)."""
    if c == c2:
        raise ValueError("no Stokes direction for equal exponents")
    a = cmath.phase(complex(c) - complex(c2))
    return tuple(sorted(((a + math.pi / 2) % TWO_PI, (a - math.pi / 2) % TWO_PI)))


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle."""
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def is_generic(theta: float, C: ExponentSet, tol: float = TOL_ANGLE) -> bool:
    """True iff theta + pi/2 is not (within tol) a Stokes direction of any pair."""
    vals = [C[cid] for cid in C]
    target = theta + math.pi / 2
    for i, c in enumerate(vals):
        for c2 in vals[i + 1:]:
            if any(angle_distance(target, s) <= tol for s in stokes_directions(c, c2)):
                return False
    return True


def tau_theta(C: ExponentSet, theta: float, tol: float = TOL_ANGLE) -> dict:
    """Ordering bijection id -> {1..m} with tau(c) < tau(c') iff c <_{theta+pi/2} c'."""
    if not is_generic(theta, C, tol):
        raise NonGenericDirectionError(f"theta={theta!r} is not generic for {C!r}")
    ranked = sorted(C.ids, key=lambda cid: _key(C[cid], theta + math.pi / 2))
    return {cid: pos + 1 for pos, cid in enumerate(ranked)}


def ordered_ids(tau: Mapping) -> tuple:
    """Ids listed by increasing tau value."""
    return tuple(sorted(tau, key=tau.__getitem__))


@dataclass(frozen=True)
class DirectionTuple:
    """A reference angle together with one angle per exponent id.

    Each per-exponent angle must satisfy theta_ref >= theta_c > theta_ref - 2 pi.
    """

    theta_ref: float
    per_exponent: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for cid, th in self.per_exponent.items():
            if not (self.theta_ref + TOL_ANGLE >= th > self.theta_ref - TWO_PI + TOL_ANGLE):
                raise ValueError(
                    f"angle for {cid!r} is {th!r}, outside ({self.theta_ref - TWO_PI}, {self.theta_ref}]"
                )

    def __getitem__(self, cid: Hashable) -> float:
        return self.per_exponent[cid]

    @classmethod
    def constant(cls, C: ExponentSet, theta: float) -> "DirectionTuple":
        return cls(theta, {cid: theta for cid in C})


def _rays_meet(c: complex, th: float, c2: complex, th2: float, tol: float = 1e-12) -> bool:
    """Do the closed half-lines {c - r e^{i th}} and {c2 - r e^{i th2}} (r >= 0) meet?"""
    d1 = -cmath.exp(1j * th)
    d2 = -cmath.exp(1j * th2)
    w = c2 - c
    cross = (d1.conjugate() * d2).imag
    scale = max(1.0, abs(w))
    if abs(cross) > tol:
        # c + r d1 = c2 + s d2, solved by 2d cross products
        r = (w.real * d2.imag - w.imag * d2.real) / cross
        s = (w.real * d1.imag - w.imag * d1.real) / cross
        return r >= -tol * scale and s >= -tol * scale
    # parallel rays: they meet only if collinear and overlapping
    if abs((w.conjugate() * d1).imag) > tol * scale:
        return False
    along = (w.conjugate() * d1).real  # position of c2 along d1 from c
    same_dir = (d1.conjugate() * d2).real > 0
    if same_dir:
        return True
    return along >= -tol * scale


def lt_theta_bullet(c_id: Hashable, c2_id: Hashable, tup: DirectionTuple, C: ExponentSet,
                    tol: float = TOL_ANGLE) -> bool:
    """The relation c <_{theta bullet + pi/2} c2 from the half-line definition."""
    if c_id == c2_id:
        raise ValueError("relation is defined on distinct exponents only")
    th, th2 = tup[c_id], tup[c2_id]
    c, c2 = C[c_id], C[c2_id]
    if abs(th - th2) <= tol:
        return lt_theta(c, c2, th + math.pi / 2)
    if th > th2:
        return not _rays_meet(c, th, c2, th2)
    return False


def lt_theta_bullet_lemma(c_id: Hashable, c2_id: Hashable, tup: DirectionTuple, C: ExponentSet,
                          tol: float = TOL_ANGLE) -> bool:
    """The same relation through the two-case characterization by ordinary orders."""
    th, th2 = tup[c_id], tup[c2_id]
    c, c2 = C[c_id], C[c2_id]
    if abs(th - th2) <= tol:
        th2 = th
    if th >= th2 > th - math.pi:
        return lt_theta(c, c2, th + math.pi / 2) or lt_theta(c, c2, th2 + math.pi / 2)
    if th - math.pi >= th2:
        return lt_theta(c2, c, th + math.pi / 2) or lt_theta(c2, c, th2 + math.pi / 2)
    return False


def is_ordered(tup: DirectionTuple, C: ExponentSet, tol: float = TOL_ANGLE) -> bool:
    """Generic, in range, and lt_theta_bullet is a strict total order on C."""
    ids = C.ids
    if set(tup.per_exponent) != set(ids):
        return False
    for cid in ids:
        th = tup[cid]
        if not is_generic(th, C, tol):
            return False
        if not (tup.theta_ref + tol >= th > tup.theta_ref - TWO_PI + tol):
            return False
    rel = {(a, b): lt_theta_bullet(a, b, tup, C, tol) for a in ids for b in ids if a != b}
    for a in ids:
        for b in ids:
            if a == b:
                continue
            if rel[a, b] == rel[b, a]:
                return False
    for a, b, c in permutations(ids, 3):
        if rel[a, b] and rel[b, c] and not rel[a, c]:
            return False
    return True


def tau_theta_bullet(C: ExponentSet, tup: DirectionTuple, tol: float = TOL_ANGLE) -> dict:
    """Ordering bijection for an ordered tuple."""
    if not is_ordered(tup, C, tol):
        raise NonGenericDirectionError("direction tuple is not ordered")
    below = {a: sum(lt_theta_bullet(b, a, tup, C, tol) for b in C.ids if b != a) for a in C.ids}
    return {cid: below[cid] + 1 for cid in C.ids}


def r_theta(C: ExponentSet, theta: float, tol: float = TOL_ANGLE) -> set:
    """Ordered pairs (c, c') with e^{-i theta}(c - c') real and positive."""
    out = set()
    for a in C.ids:
        for b in C.ids:
            if a == b:
                continue
            diff = C[a] - C[b]
            if angle_distance(cmath.phase(diff), theta) <= tol:
                out.add((a, b))
    return out


def crossing_angles(C: ExponentSet, theta0: float, tol: float = TOL_ANGLE) -> list[float]:
    """Angles in (theta0 - pi, theta0) with nonempty R(theta), descending."""
    if not is_generic(theta0, C, tol):
        raise NonGenericDirectionError(f"theta0={theta0!r} is not generic")
    found: list[float] = []
    for a in C.ids:
        for b in C.ids:
            if a == b:
                continue
            ph = cmath.phase(C[a] - C[b])
            k = math.ceil((theta0 - math.pi - ph) / TWO_PI)
            cand = ph + k * TWO_PI
            while cand < theta0:
                if cand > theta0 - math.pi and all(abs(cand - x) > tol for x in found):
                    found.append(cand)
                cand += TWO_PI
    return sorted(found, reverse=True)


@dataclass(frozen=True)
class BulletBookkeeping:
    """Intermediate tuple and permutations relating tau_theta0 to tau_{theta bullet}."""

    phi: DirectionTuple
    tau_theta0: dict
    tau_phi: dict
    tau_bullet: dict
    first_identity: bool
    second_identity: bool


def bullet_bookkeeping(C: ExponentSet, theta0: float, tup: DirectionTuple,
                       tol: float = TOL_ANGLE) -> BulletBookkeeping:
    """Clamp a tuple at theta0 - pi and check the two inversion-set identities.

    The clamped tuple phi_c = max(theta_c, theta0 - pi) sits between theta0 and
    the tuple; each identity says that one leg of the move is a reduced-word lift.
    """
    phi = DirectionTuple(theta0, {cid: max(tup[cid], theta0 - math.pi) for cid in C.ids})
    t0 = tau_theta(C, theta0, tol)
    tphi = tau_theta_bullet(C, phi, tol)
    tbul = tau_theta_bullet(C, tup, tol)

    def lt0(a, b):
        return lt_theta(C[a], C[b], theta0 + math.pi / 2)

    def lt_at(a, b, th):
        return lt_theta(C[a], C[b], th + math.pi / 2)

    first = second = True
    for c in C.ids:
        others = [b for b in C.ids if b != c]
        lhs = {b for b in others if lt0(c, b) and lt_theta_bullet(b, c, phi, C, tol)}
        rhs = {b for b in others if lt0(c, b) and lt_at(b, c, phi[c])}
        first &= lhs == rhs
        lhs2 = sorted((b for b in others if lt_theta_bullet(c, b, phi, C, tol)
                       and lt_theta_bullet(b, c, tup, C, tol)), key=tphi.__getitem__)
        rhs2 = sorted((b for b in others if lt_at(c, b, phi[c]) and lt_at(b, c, tup[c])),
                      key=tphi.__getitem__)
        second &= lhs2 == rhs2
    return BulletBookkeeping(phi, t0, tphi, tbul, first, second)
