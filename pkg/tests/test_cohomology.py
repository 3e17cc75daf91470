from __future__ import annotations

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CUBIC3, P1, P2, P3, QUADRIC3
from stokes_mutant.cohomology import (
    CohClass,
    CompleteIntersection,
    HPoly,
    chern_data,
    euler_chi,
    euler_chi_hrr,
    euler_matrix,
    gamma_class,
    gamma_line,
    gamma_log_coefficients,
    gamma_map,
    gamma_map_matrix,
    gamma_series_identity_residual,
    lemma_pairing_residual,
    lemma_pairing_sample_residual,
    mu_matrix,
    mukai_vector,
    pairing_A,
    pairing_A_matrix,
    pairing_B,
    pairing_B_matrix,
    parity,
    primitive_dim,
    resolve_gamma_convention,
    serre_monodromy,
    todd_class,
    todd_log_coefficients,
    topological_euler,
)

SAMPLES = [P1, P2, P3, CUBIC3, QUADRIC3, CompleteIntersection(5, (3,)), CompleteIntersection(5, (2, 2)),
           CompleteIntersection(6, (2, 3)), CompleteIntersection(7, (2, 2, 2)), CompleteIntersection(7, (4,))]


def test_gamma_log_series_matches_mpmath():
    ref = mpmath.taylor(lambda x: mpmath.loggamma(1 + x), 0, 8)
    ours = gamma_log_coefficients(8)
    assert max(abs(complex(a) - complex(b)) for a, b in zip(ours, ref)) < 1e-15


def test_todd_log_series_matches_mpmath():
    ref = mpmath.taylor(lambda x: mpmath.log(x / (1 - mpmath.exp(-x))) if x != 0 else mpmath.mpf(0), 0, 8)
    ours = todd_log_coefficients(8)
    assert all(isinstance(c, Fraction) for c in ours)
    assert max(abs(float(a) - float(b)) for a, b in zip(ours, ref)) < 1e-14


def test_gamma_function_identity():
    assert gamma_series_identity_residual(8) <= 1e-12


def test_hpoly_arithmetic():
    p = HPoly([1, 2, 3])
    assert np.allclose((p * p.inverse()).to_array(), [1, 0, 0])
    assert np.allclose((p.log().exp()).to_array(), p.to_array())
    assert np.allclose((p.sqrt() * p.sqrt()).to_array(), p.to_array())


def test_chern_class_cubic_threefold():
    total, _ = chern_data(CUBIC3)
    assert [total[k] for k in range(4)] == [1, 2, 4, -2]


@pytest.mark.parametrize("ci,chi,prim", [(P1, 2, 0), (P3, 4, 0), (CUBIC3, -6, 10), (QUADRIC3, 4, 0),
                                         (CompleteIntersection(5, (3,)), 27, 22),
                                         (CompleteIntersection(5, (2, 2)), 0, 4),
                                         (CompleteIntersection(6, (2, 3)), 90, 85),
                                         (CompleteIntersection(7, (2, 2, 2)), 48, 43)])
def test_topology(ci, chi, prim):
    assert topological_euler(ci) == chi
    assert primitive_dim(ci) == prim == ci.b_prim


def test_projective_space_topology():
    for n in range(1, 7):
        ci = CompleteIntersection.projective_space(n)
        assert topological_euler(ci) == n + 1 and ci.b_prim == 0


def test_invalid_varieties():
    with pytest.raises(ValueError):
        CompleteIntersection(4, (5,))
    with pytest.raises(ValueError):
        CompleteIntersection(3, (2,))
    with pytest.raises(ValueError):
        CompleteIntersection(4, (1,))


def test_mu_and_parity():
    assert np.allclose(np.diag(mu_matrix(P2)), [-1, 0, 1])
    assert list(parity(CUBIC3)) == [0] * 4 + [1] * 10


def test_pairing_a_examples():
    O, O1 = gamma_line(P1, 0), gamma_line(P1, 1)
    assert abs(pairing_A(P1, O, O) - 1) < 1e-14
    assert abs(pairing_A(P1, O, O1) - 2) < 1e-14
    a = CohClass(np.zeros(4), np.eye(10)[0])
    b = CohClass(np.zeros(4), np.eye(10)[1])
    assert abs(pairing_A(CUBIC3, a, b) - 1 / (2 * math.pi) ** 3) < 1e-16


def test_pairing_b_examples():
    one, H = CohClass(np.array([1, 0]), []), CohClass(np.array([0, 1]), [])
    assert abs(pairing_B(P1, one, one) - 1) < 1e-14
    assert abs(pairing_B(P1, one, H) - 1 / (2j * math.pi)) < 1e-14


def test_pairings_separate_ambient_and_primitive():
    for ci in (CUBIC3, CompleteIntersection(5, (3,))):
        n = ci.n_amb
        for P in (pairing_A_matrix(ci), pairing_B_matrix(ci)):
            assert np.allclose(P[:n, n:], 0) and np.allclose(P[n:, :n], 0)


def test_serre_monodromy():
    assert np.allclose(serre_monodromy(P1), -np.array([[1, 0], [4j * math.pi, 1]]))
    assert abs(np.trace(serre_monodromy(P1)) + 2) < 1e-14
    T = serre_monodromy(CUBIC3)
    assert np.allclose(T[4:, 4:], np.eye(10))
    for ci in SAMPLES[:6]:
        T, P, S = serre_monodromy(ci), pairing_B_matrix(ci), np.diag((-1.0) ** parity(ci))
        assert np.abs(T.T @ P - S @ P.T).max() < 1e-12 * max(1, np.abs(P).max())


def test_gamma_map_examples():
    assert np.allclose(gamma_map(P1, CohClass(np.zeros(2), []), "a").to_vector(), 0)
    untwisted = gamma_map_matrix(P1, "a", twist=False) @ np.array([1, 0])
    assert np.allclose(untwisted, [1, -(1 + 2 * np.euler_gamma)])
    for conv in ("a", "b"):
        assert np.allclose(gamma_map_matrix(P1, conv) @ np.array([0, 1]), [0, 1])
        assert np.linalg.cond(gamma_map_matrix(CUBIC3, conv)) < 1e8


def test_mukai_line_examples():
    g = np.euler_gamma
    assert np.allclose(gamma_line(P1, 0).to_vector(), [1, -2 * g])
    assert np.allclose(gamma_line(P1, 1).to_vector(), [1, 2j * math.pi - 2 * g])
    for ci in (P2, CUBIC3):
        G = gamma_map_matrix(ci, "b")
        for k in range(ci.index):
            assert np.allclose(G @ mukai_vector(ci, k).to_vector(), gamma_line(ci, k).to_vector())


def test_euler_projective_spaces():
    for n in range(1, 7):
        ci = CompleteIntersection.projective_space(n)
        E = euler_matrix(ci, range(n + 1))
        want = np.array([[math.comb(n + j - i, n) if j >= i else 0 for j in range(n + 1)] for i in range(n + 1)])
        assert np.abs(E - want).max() <= 1e-9
    assert euler_chi(P2, 0, 2) == pytest.approx(6)


def test_euler_hrr_agreement_on_samples():
    for ci in SAMPLES:
        for i in range(ci.index):
            assert euler_chi_hrr(ci, i, i) == 1
            for j in range(ci.index):
                val = euler_chi(ci, i, j)
                assert abs(val - float(euler_chi_hrr(ci, i, j))) <= 1e-9
                assert float(euler_chi_hrr(ci, i, j)).is_integer()


def test_cubic_threefold_euler_value():
    # chi(O(1)) on X_3: the five sections of O(1)
    assert euler_chi_hrr(CUBIC3, 0, 1) == 5


def test_convention_resolution():
    res = resolve_gamma_convention()
    assert res.convention == "b"
    assert res.residuals["a"] > 1e-3
    # P^1 cannot tell them apart
    assert lemma_pairing_residual(P1, "a") < 1e-12 and lemma_pairing_residual(P1, "b") < 1e-12


def test_lemma_pairing_random_pairs(rng):
    for ci in (P2, P3, CUBIC3):
        assert lemma_pairing_sample_residual(ci, rng, 200) <= 1e-9


@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_gamma_isometry_on_classes(xs):
    a = CohClass(np.array(xs[:4]) + 0.5j, np.zeros(0))
    b = CohClass(np.array(xs[4:]) - 0.25j, np.zeros(0))
    ga, gb = gamma_map(P3, a, "b"), gamma_map(P3, b, "b")
    lhs, rhs = pairing_A(P3, ga, gb), pairing_B(P3, a, b)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs), np.abs(a.to_vector()).max() * np.abs(b.to_vector()).max())


def test_todd_and_gamma_classes_leading_terms():
    assert np.allclose(todd_class(P1, twist=False).to_array(), [1, 1])
    assert np.allclose(gamma_class(P2).to_array()[:2], [1, -3 * np.euler_gamma])
