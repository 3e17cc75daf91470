from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import CUBIC3, P1, P2, P3, QUADRIC3
from stokes_mutant import _subspace as sub
from stokes_mutant.cohomology import CompleteIntersection, gamma_line, pairing_B_matrix
from stokes_mutant.mutation import (
    BraidWord,
    Permutation,
    StructureError,
    gram_matrix,
    reduced_word_lift,
    validate_mutation_system,
)
from stokes_mutant.quantum import ZERO_ID, asymptotic_classes
from stokes_mutant.sod import (
    b_mutation_system_at_theta0,
    b_subspace_system,
    braid_compatibility_check,
    build_b_mutation_system,
    euler_gram,
    gamma_intertwining_residual,
    mukai_line,
    residual_subspace,
)

SAMPLES = [P1, P2, P3, CUBIC3, QUADRIC3, CompleteIntersection(5, (3,)), CompleteIntersection(5, (2, 2))]


def test_mukai_line_examples():
    ln = mukai_line(P1, 1)
    assert np.allclose(ln.cohomology, gamma_line(P1, 1).to_vector())
    for ci in SAMPLES:
        P = pairing_B_matrix(ci)
        for k in range(ci.index):
            nu = mukai_line(ci, k).hh
            assert abs(nu @ P @ nu - 1) < 1e-12


def test_euler_gram_unipotent_integer():
    for ci in SAMPLES:
        E = euler_gram(ci)
        assert np.allclose(E, np.round(E.real), atol=1e-9)
        assert np.allclose(np.tril(E, -1), 0, atol=1e-9) and np.allclose(np.diag(E), 1)
    assert np.allclose(euler_gram(P2), [[1, 3, 6], [0, 1, 3], [0, 0, 1]])
    assert np.allclose(euler_gram(CUBIC3), [[1, 5], [0, 1]])


def test_residual_dimensions():
    ss = b_subspace_system(CUBIC3)
    assert ss.order == (ZERO_ID, "c0", "c1")
    assert [ss.subspaces[c].shape[1] for c in ss.order] == [12, 1, 1]
    assert ss.semiorthogonality_residual() < 1e-12 and ss.spans()
    assert ZERO_ID not in b_subspace_system(P3).subspaces
    for ci in (QUADRIC3, CompleteIntersection(5, (2, 2))):
        ss = b_subspace_system(ci)
        assert ss.subspaces[ZERO_ID].shape[1] == ci.n_total - ci.index


def test_residual_contains_primitive_part():
    Z = b_subspace_system(CUBIC3).subspaces[ZERO_ID]
    assert sub.contains(Z, np.eye(14)[:, 4:]) < 1e-10


def test_residual_rejects_non_semiorthogonal_lines():
    lines = {f"c{k}": mukai_line(CUBIC3, k).hh[:, None] for k in range(2)}
    bad = dict(lines)
    bad["c0"], bad["c1"] = lines["c1"], lines["c0"] + 0.3 * lines["c1"]
    with pytest.raises(StructureError):
        residual_subspace(CUBIC3, bad, (ZERO_ID, "c0", "c1"))


def test_b_systems_validate():
    for ci in SAMPLES:
        ms = build_b_mutation_system(ci)
        assert validate_mutation_system(ms).ok
        assert gamma_intertwining_residual(ci, ms) < 1e-12


def test_b_gram_projective_line():
    assert np.allclose(gram_matrix(build_b_mutation_system(P1)), [[1, 2], [0, 1]])


def test_b_at_theta0_matches_a_side():
    from stokes_mutant.cohomology import gamma_map_matrix

    for ci in (P2, CUBIC3):
        b = b_mutation_system_at_theta0(ci)
        a = asymptotic_classes(ci, 0.1).at_theta0().mutation_system()
        G = gamma_map_matrix(ci, "b")
        assert a.order == b.order
        for c in a.order:
            assert sub.subspace_distance(a.f_block(c), G @ b.f_block(c)) < 1e-8


@pytest.mark.parametrize("ci", [P2, P3, CUBIC3])
def test_braid_compatibility(ci):
    ms = build_b_mutation_system(ci)
    m = len(ms.order)
    words = [BraidWord(m, ()), BraidWord(m, ((1, 1),)), BraidWord(m, ((1, -1),))]
    if m > 2:
        words.append(BraidWord(m, ((1, 1), (2, -1), (1, 1))))
    delta = reduced_word_lift(Permutation.longest(m))
    words.append(delta * delta)
    for w in words:
        rep = braid_compatibility_check(ms, w)
        assert rep.ok, (str(w), rep.distances)


def test_empty_word_is_exact():
    ms = build_b_mutation_system(CUBIC3)
    assert braid_compatibility_check(ms, BraidWord(3, ())).max_distance < 1e-12


def test_high_dimensional_b_systems_validate():
    # graded bases make Mukai vectors of O(3) on a fivefold large; validation must not care
    for ci in (CompleteIntersection(6, (3,)), CompleteIntersection(6, (2,))):
        ms = build_b_mutation_system(ci)
        assert validate_mutation_system(ms).ok
