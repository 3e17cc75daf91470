"""The twelve acceptance criteria, one test each, each printing a pass/fail line."""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from conftest import CUBIC3, P1, P2, P3
from stokes_mutant import _subspace as sub
from stokes_mutant.cli import dubrovin_check
from stokes_mutant.cohomology import (
    CompleteIntersection,
    euler_chi_hrr,
    euler_matrix,
    gamma_class,
    gamma_series_identity_residual,
    lemma_pairing_sample_residual,
    resolve_gamma_convention,
)
from stokes_mutant.direction import ordered_ids, tau_theta
from stokes_mutant.mutation import (
    BraidWord,
    Permutation,
    StokesFactorGroups,
    StokesStructure,
    all_permutations,
    all_reduced_word_lifts,
    apply_braid,
    compose_factors,
    delta_action,
    delta_closed_form,
    factorize_stokes_multiplier,
    random_stokes_data,
    reindex,
    to_stokes_data,
)
from stokes_mutant.quantum import (
    ZERO_ID,
    asymptotic_classes,
    exponents,
    fundamental_series,
    gauge_symmetry_check,
    quantum_connection,
    spectrum,
    symsol_residual,
)

BINOMIAL = {n: np.array([[math.comb(n + j - i, n) if j >= i else 0 for j in range(n + 1)] for i in range(n + 1)])
            for n in range(1, 7)}


@pytest.fixture
def verdict(capsys):
    def emit(number: int, title: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return emit


def _residual(a, b) -> float:
    return float(np.abs(np.asarray(a) - np.asarray(b)).max() / max(1.0, np.abs(b).max()))


def _random_dims(rng) -> list[int]:
    m = int(rng.integers(2, 5))
    while True:
        dims = [int(x) for x in rng.integers(1, 4, size=m)]
        if sum(dims) <= 8:
            return dims


def _distance(a, b) -> float:
    if a.order != b.order:
        return math.inf
    return max(_residual(a.f, b.f), _residual(a.f_star, b.f_star))


def test_criterion_01_braid_relations(rng, verdict):
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        sd = random_stokes_data(rng, _random_dims(rng))
        m = sd.m
        i = int(rng.integers(1, m))
        s, si = BraidWord(m, ((i, 1),)), BraidWord(m, ((i, -1),))
        worst = max(worst, _distance(apply_braid(apply_braid(sd, si), s), sd),
                    _distance(apply_braid(apply_braid(sd, s), si), sd))
        if m >= 3:
            i = int(rng.integers(1, m - 1))
            a = apply_braid(sd, BraidWord(m, ((i, 1), (i + 1, 1), (i, 1))))
            b = apply_braid(sd, BraidWord(m, ((i + 1, 1), (i, 1), (i + 1, 1))))
            worst = max(worst, _distance(a, b))
        if m >= 4:
            a = apply_braid(sd, BraidWord(m, ((1, 1), (3, 1))))
            b = apply_braid(sd, BraidWord(m, ((3, 1), (1, 1))))
            worst = max(worst, _distance(a, b))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    verdict(1, "braid relations on 1000 random Stokes data", ok, f"max residual {worst:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_02_reduced_words(rng, verdict):
    worst, count = 0.0, 0
    samples = [random_stokes_data(rng, dims) for dims in ([1, 1, 1, 1], [2, 1, 1, 2], [1, 3, 2, 1])]
    for s in all_permutations(4):
        for sd in samples:
            results = [apply_braid(sd, w) for w in all_reduced_word_lifts(s)]
            count += len(results)
            for r in results[1:]:
                worst = max(worst, _distance(r, results[0]))
    ok = worst <= 1e-10
    verdict(2, "reduced words of S_4 act identically", ok, f"{count} word actions, max residual {worst:.2e}")
    assert ok


def test_criterion_03_half_twist(rng, verdict):
    worst = 0.0
    for _ in range(1000):
        sd = random_stokes_data(rng, _random_dims(rng))
        d = delta_action(sd)
        f_new, fs_new = delta_closed_form(sd)
        worst = max(worst, _residual(d.f, f_new), _residual(d.f_star, fs_new))
        dd = delta_action(d)
        Tb = sd.block_T()
        worst = max(worst, _residual(dd.f, sd.T @ sd.f @ np.linalg.inv(Tb)),
                    _residual(dd.f_star, Tb @ sd.f_star @ np.linalg.inv(sd.T)))
    ok = worst <= 1e-10
    verdict(3, "half twist and full twist closed forms", ok, f"max residual {worst:.2e}")
    assert ok


def _random_sm(rng, C, theta0, dims):
    order = ordered_ids(tau_theta(C, theta0))
    grp = StokesFactorGroups(C, order, dims, theta0)
    key = {c: (np.exp(-1j * (theta0 + math.pi / 2)) * C[c]).real for c in order}
    offs = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    n = int(offs[-1])
    g = np.eye(n, dtype=complex)
    for i, a in enumerate(order):
        for j, b in enumerate(order):
            if a != b and not key[b] < key[a]:
                shape = (dims[j], dims[i])
                g[offs[j]:offs[j + 1], offs[i]:offs[i + 1]] = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    assert grp.in_sm(g)
    return g


def test_criterion_04_factorization(rng, verdict):
    worst, sensitivity = 0.0, math.inf
    eps = 1e-4
    for ci in (P2, CUBIC3):
        C = exponents(ci)
        mult = {cid: (12 if cid == ZERO_ID else 1) if ci is CUBIC3 else 1 for cid in C.ids}
        dims = tuple(mult[c] for c in ordered_ids(tau_theta(C, 0.1)))
        for _ in range(50):
            g = _random_sm(rng, C, 0.1, dims)
            factors = factorize_stokes_multiplier(g, C, 0.1, dims)
            worst = max(worst, _residual(compose_factors(factors), g))
            for k, (th, fk) in enumerate(factors):
                off = np.argwhere(np.abs(fk - np.eye(len(g))) > 0)
                if not len(off):
                    continue
                r, c = off[0]
                bumped = [(t, x.copy()) for t, x in factors]
                bumped[k][1][r, c] += eps
                g2 = compose_factors(bumped)
                sensitivity = min(sensitivity, float(np.abs(g2 - g).max()))
                again = factorize_stokes_multiplier(g2, C, 0.1, dims)
                worst = max(worst, max(_residual(a[1], b[1]) for a, b in zip(again, bumped)))
    ok = worst <= 1e-10 and sensitivity >= eps * (1 - 1e-6)
    verdict(4, "Stokes factor decomposition (P^2 and cubic threefold geometries)", ok,
            f"recompose residual {worst:.2e}, min sensitivity to a {eps:g} factor change {sensitivity:.2e}")
    assert ok


def test_criterion_05_euler_matrices(verdict):
    worst, exact_ok = 0.0, True
    for n in range(1, 7):
        ci = CompleteIntersection.projective_space(n)
        E = euler_matrix(ci, range(n + 1))
        worst = max(worst, float(np.abs(E - BINOMIAL[n]).max()))
        exact_ok &= np.array_equal(np.round(E.real).astype(int), BINOMIAL[n])
    catalog = CompleteIntersection.fano_catalog(7)
    for ci in catalog:
        E = euler_matrix(ci)
        exact = np.array([[float(euler_chi_hrr(ci, i, j)) for j in range(ci.index)] for i in range(ci.index)])
        exact_ok &= all(euler_chi_hrr(ci, i, j).denominator == 1 for i in range(ci.index) for j in range(ci.index))
        worst = max(worst, float(np.abs(E - exact).max()))
        exact_ok &= np.array_equal(np.round(E.real), exact)
    ok = worst <= 1e-9 and exact_ok
    verdict(5, "Euler matrices against Riemann-Roch integers", ok,
            f"P^1..P^6 and {len(catalog)} complete intersections, max residual {worst:.2e}")
    assert ok


def test_criterion_06_pairing_compatibility(rng, verdict):
    conv = resolve_gamma_convention().convention
    res = {ci.label: lemma_pairing_sample_residual(ci, rng, 1000, conv) for ci in (P2, P3, CUBIC3)}
    series = gamma_series_identity_residual(8)
    ok = max(res.values()) <= 1e-9 and series <= 1e-12
    detail = ", ".join(f"{k} {v:.2e}" for k, v in res.items())
    verdict(6, f"Gamma map isometry (convention {conv})", ok, f"{detail}; Gamma series identity {series:.2e}")
    assert ok


def _frame_gram(ci, n, tol, budget):
    start = time.perf_counter()
    G = asymptotic_classes(ci, 0.1).gram()
    elapsed = time.perf_counter() - start
    err = float(np.abs(G - BINOMIAL[n]).max())
    return err, elapsed, err <= tol and elapsed < budget


def test_criterion_07_stokes_matrix_p1(verdict):
    err, elapsed, ok = _frame_gram(P1, 1, 1e-6, 10)
    verdict(7, "P^1 asymptotic frame Gram [[1,2],[0,1]]", ok, f"error {err:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_08_stokes_matrix_p2_p3(verdict):
    e2, t2, ok2 = _frame_gram(P2, 2, 1e-4, 60)
    e3, t3, ok3 = _frame_gram(P3, 3, 1e-3, 300)
    verdict(8, "P^2 and P^3 asymptotic frame Grams are binomial", ok2 and ok3,
            f"P^2 error {e2:.2e} in {t2:.1f} s, P^3 error {e3:.2e} in {t3:.1f} s")
    assert ok2 and ok3


def test_criterion_09_gamma_conjecture(verdict):
    out, ok = [], True
    for ci, tol in ((P1, 1e-6), (P2, 1e-4), (P3, 1e-4), (CUBIC3, 1e-3)):
        line = asymptotic_classes(ci, 0.1).bases["c0"]
        g = gamma_class(ci).to_array()
        na = ci.n_amb
        angle = sub.subspace_distance(line[:na], g[:na, None])
        full = np.concatenate([g[:na], np.zeros(ci.n_total - na)])
        angle = max(angle, sub.subspace_distance(line, full[:, None]))
        ok &= angle <= tol
        out.append(f"{ci.label} {angle:.1e}")
    verdict(9, "dominant asymptotic line is spanned by the Gamma class", ok, ", ".join(out))
    assert ok


def test_criterion_10_dubrovin_check(verdict):
    out, ok = [], True
    for ci in (P1, P2, P3, CUBIC3):
        rep = dubrovin_check(ci, 0.1, tol_cmp=1e-3)
        good = rep.verdict and (rep.residual_agreement is None or rep.residual_agreement <= 1e-8)
        ok &= good
        extra = "" if rep.residual_agreement is None else f", residual agreement {rep.residual_agreement:.1e}"
        out.append(f"{ci.label} distance {rep.max_distance:.1e}{extra}")
    verdict(10, "Dubrovin-type check", ok, "; ".join(out))
    assert ok


def test_criterion_11_direction_change(verdict):
    a = asymptotic_classes(P2, 0.1).at_theta0().mutation_system()
    b = asymptotic_classes(P2, -0.7).at_theta0().mutation_system()
    moved = reindex(StokesStructure(to_stokes_data(a), 0.1), -0.7)
    same_order = tuple(moved.order) == tuple(b.order)
    dist = max(sub.subspace_distance(moved.f_block(c), b.f_block(c)) for c in b.order)
    ok = same_order and dist <= 1e-4
    verdict(11, "P^2 frames at 0.1 and -0.7 are braid-related", ok, f"max principal angle {dist:.2e}")
    assert ok


def test_criterion_12_gauge_and_series(verdict):
    worst_gauge, worst_series = 0.0, 0.0
    for ci in (P1, P2, P3, CUBIC3, CompleteIntersection(4, (2,))):
        rep = gauge_symmetry_check(ci)
        worst_gauge = max(worst_gauge, max(rep.residuals.values()))
        qc = quantum_connection(ci)
        worst_series = max(worst_series, symsol_residual(fundamental_series(qc, 20), qc))
    ok = worst_gauge <= 1e-10 and worst_series <= 1e-10
    verdict(12, "gauge identity, eigenspace transport and series symmetry", ok,
            f"gauge/transport {worst_gauge:.2e}, series through order 20 {worst_series:.2e}")
    assert ok
