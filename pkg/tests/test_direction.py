from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stokes_mutant.direction import (
    DirectionTuple,
    ExponentSet,
    NonGenericDirectionError,
    bullet_bookkeeping,
    crossing_angles,
    is_generic,
    is_ordered,
    leq_theta,
    lt_theta_bullet,
    lt_theta_bullet_lemma,
    ordered_ids,
    r_theta,
    stokes_directions,
    tau_theta,
)

PM2 = ExponentSet([("m", -2), ("p", 2)])
W = cmath.exp(-2j * math.pi / 3)
P2_EXP = ExponentSet.from_values([-3, -3 * W, -3 * W * W])

finite = st.floats(-5, 5, allow_nan=False)
cplx = st.builds(complex, finite, finite)


def test_stokes_directions_examples():
    assert np.allclose(sorted(stokes_directions(1, 0)), [math.pi / 2, 3 * math.pi / 2])
    assert np.allclose(sorted(stokes_directions(1j, 0)), [0, math.pi])
    assert np.allclose(sorted(stokes_directions(1 + 1j, 1 - 1j)), [0, math.pi])


def test_genericity():
    assert is_generic(0.1, PM2)
    assert not is_generic(0.0, PM2)
    assert is_generic(0.0, ExponentSet([("x", 1)]))


def test_tau_two_exponents():
    # Im(e^{-0.1i} * 2) < 0 < Im(e^{-0.1i} * (-2)), so 2 comes first
    assert ordered_ids(tau_theta(PM2, 0.1)) == ("p", "m")
    with pytest.raises(NonGenericDirectionError):
        tau_theta(PM2, 0.0)


def test_tau_projective_plane():
    assert ordered_ids(tau_theta(P2_EXP, 0.1)) == ("c2", "c0", "c1")


def test_r_theta_and_crossings():
    assert r_theta(PM2, math.pi) == {("m", "p")}
    assert r_theta(PM2, 0.0) == {("p", "m")}
    assert r_theta(PM2, 0.3) == set()
    assert np.allclose(crossing_angles(PM2, 0.1), [0.0])
    angles = crossing_angles(P2_EXP, 0.1)
    assert len(angles) == 3 and all(len(r_theta(P2_EXP, a)) == 1 for a in angles)
    assert crossing_angles(ExponentSet([("x", 1)]), 0.1) == []


def test_crossings_partition_the_order():
    for C, th in [(PM2, 0.1), (P2_EXP, 0.1), (ExponentSet.from_values([4, 4j, -4, -4j]), 0.2)]:
        tau = tau_theta(C, th)
        want = {(a, b) for a in C.ids for b in C.ids if tau[a] < tau[b]}
        parts = [r_theta(C, a) for a in crossing_angles(C, th)]
        got = set().union(*parts)
        assert got == want and sum(map(len, parts)) == len(want)


@given(cplx, cplx, st.floats(-7, 7))
def test_leq_antisymmetric(c, c2, th):
    if leq_theta(c, c2, th) and leq_theta(c2, c, th):
        assert c == c2


@given(cplx, cplx, cplx, st.floats(-7, 7))
def test_leq_transitive(a, b, c, th):
    if leq_theta(a, b, th) and leq_theta(b, c, th):
        assert leq_theta(a, c, th)


def test_genericity_is_open():
    C = P2_EXP
    for th in np.linspace(-3, 3, 41):
        if is_generic(th, C):
            assert is_generic(th + 4e-10, C) and is_generic(th - 4e-10, C)


def test_bullet_reduces_to_constant_direction():
    tup = DirectionTuple.constant(P2_EXP, 0.1)
    tau = tau_theta(P2_EXP, 0.1)
    for a in P2_EXP.ids:
        for b in P2_EXP.ids:
            if a != b:
                assert lt_theta_bullet(a, b, tup, P2_EXP) == (tau[a] < tau[b])
    assert is_ordered(tup, P2_EXP)


def test_pipeline_tuple_cubic_order():
    C = ExponentSet([("c_o", 0), ("c0", -3 ** 0.5 * 3), ("c1", 3 ** 0.5 * 3)])
    tup = DirectionTuple(0.1, {"c_o": 0.1, "c0": 0.1, "c1": 0.1 - math.pi})
    assert is_ordered(tup, C)
    from stokes_mutant.direction import tau_theta_bullet

    assert ordered_ids(tau_theta_bullet(C, tup)) == ("c_o", "c0", "c1")


def test_opposite_rays():
    C = ExponentSet([("z", 0), ("t", -4)])
    tup = DirectionTuple(0.1, {"z": 0.1, "t": 0.1 - math.pi + 0.05})
    assert lt_theta_bullet("z", "t", tup, C)


def test_tuple_range_is_enforced():
    with pytest.raises(ValueError):
        DirectionTuple(0.1, {"a": 0.2})
    with pytest.raises(ValueError):
        DirectionTuple(0.1, {"a": 0.1 - 2 * math.pi})


def test_bullet_definition_matches_lemma():
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(10_000):
        vals = rng.normal(size=2) + 1j * rng.normal(size=2)
        C = ExponentSet.from_values(vals)
        th0 = rng.uniform(-3, 3)
        tup = DirectionTuple(th0, {c: th0 - rng.uniform(0, 2 * math.pi - 1e-6) for c in C.ids})
        if not all(is_generic(tup[c], C) for c in C.ids):
            continue
        a, b = C.ids
        assert lt_theta_bullet(a, b, tup, C) == lt_theta_bullet_lemma(a, b, tup, C)
        checked += 1
    assert checked > 9000


def test_bookkeeping_identities_hold_on_pipeline_tuples():
    from stokes_mutant.cohomology import CompleteIntersection
    from stokes_mutant.quantum import exponents, pipeline_tuple

    for ci in [CompleteIntersection.projective_space(n) for n in (1, 2, 3, 4)] + [CompleteIntersection(4, (3,))]:
        C = exponents(ci)
        for th in (0.1, -0.2):
            if abs(th) < math.pi / ci.index and is_generic(th, C):
                bk = bullet_bookkeeping(C, th, pipeline_tuple(ci, th))
                assert bk.first_identity and bk.second_identity
