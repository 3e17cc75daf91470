"""The A-side: quantum multiplication, the quantum connection and its
asymptotic classes.

The quantum connection on H(X) is

    nabla_{z d/dz} = z d/dz - (U / z - mu),    U = c_1(X) *_0,

so flat sections solve y' = (U / z^2 - mu / z) y.  The ambient quantum product
is computed in the classical basis 1, H, ..., H^d from the J-function by a
graded Birkhoff factorization, in exact rational arithmetic.  The primitive
part is killed by U.

Asymptotic classes are found by seeding the formal solution attached to a
simple eigenvalue near z = 0 (where it is an accurate asymptotic expansion)
and integrating outwards along the ray where that solution is the most
recessive one.  Errors in every other direction decay along the way.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from . import _subspace as sub
from .cohomology import (
    CompleteIntersection,
    exp_rho,
    gamma_line,
    mu_matrix,
    pairing_A_matrix,
    parity,
    poincare_gram,
    rho_matrix,
    series_inv,
    series_mul,
)
from .direction import DirectionTuple, ExponentSet, is_generic, ordered_ids, tau_theta_bullet
from .mutation import MutationSystem, transport_bullet_to_theta0, validate_mutation_system

ZERO_ID = "c_o"
TOL_SERIES = 1e-12
TOL_EIG = 1e-8


class AccuracyError(ArithmeticError):
    """A numerical stage could not reach the requested accuracy."""


class ObstructionError(ArithmeticError):
    """The fundamental-solution recursion hit a non-vanishing kernel component."""


def thread_cap() -> int:
    """Parallel job cap from STOKES_MUTANT_THREADS (default: CPU count)."""
    raw = os.environ.get("STOKES_MUTANT_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


# ---------------------------------------------------------------------------
# exact quantum product on the ambient part
#
# A graded vector of degree g is a dict {(d, a): coefficient} standing for
# sum coefficient * Q^d H^a z^(g - a - d r).


def _zpow(g: int, key: tuple, r: int) -> int:
    return g - key[1] - key[0] * r


def _j_series(ci: CompleteIntersection, deg: int, length: int) -> list[Fraction]:
    """alpha_k with J_deg(z) = z^(-deg r) sum_k alpha_k (H/z)^k."""
    const = Fraction(math.prod(math.factorial(di * deg) for di in ci.degrees),
                     math.factorial(deg) ** (ci.N + 1))
    s = [Fraction(1)] + [Fraction(0)] * (length - 1)
    n = length - 1
    for di in ci.degrees:
        for j in range(1, di * deg + 1):
            s = series_mul(s, [Fraction(1), Fraction(di, j)], n)
    for j in range(1, deg + 1):
        inv = series_inv([Fraction(1), Fraction(1, j)] + [Fraction(0)] * (n - 1), n)
        for _ in range(ci.N + 1):
            s = series_mul(s, inv, n)
    return [const * x for x in s]


def _mirror_series(ci: CompleteIntersection, dmax: int, length: int) -> dict[int, list[Fraction]]:
    """Coefficients of e^{-tH/z} J, degree by degree in Q (index-one mirror shift included)."""
    raw = {d: _j_series(ci, d, length) for d in range(dmax + 1)}
    if ci.index >= 2:
        return raw
    shift = Fraction(-ci.D_prime)
    out = {}
    for D in range(dmax + 1):
        acc = [Fraction(0)] * length
        for n in range(D + 1):
            w = shift**n / math.factorial(n)
            acc = [x + w * y for x, y in zip(acc, raw[D - n])]
        out[D] = acc
    return out


@dataclass(frozen=True)
class QuantumPowers:
    """Quantum powers H^{*l} (l = 0..d+1) and the matrix of H* in the classical basis.

    ``powers[l]`` and ``columns[a]`` are dicts {(Q-degree, H-degree): Fraction}.
    """

    ci: CompleteIntersection
    powers: tuple
    columns: tuple
    factorization_residual: Fraction

    def matrix(self, Q: complex = 1) -> np.ndarray:
        """H* on the ambient part at Novikov parameter Q."""
        n = self.ci.n_amb
        M = np.zeros((n, n), complex)
        for a, col in enumerate(self.columns):
            for (d, a2), c in col.items():
                M[a2, a] += complex(c) * Q**d
        return M

    def exact_matrix(self) -> list[list[Fraction]]:
        """H* at Q = 1 with rational entries."""
        n = self.ci.n_amb
        M = [[Fraction(0)] * n for _ in range(n)]
        for a, col in enumerate(self.columns):
            for (_, a2), c in col.items():
                M[a2][a] += c
        return M


def quantum_powers(ci: CompleteIntersection) -> QuantumPowers:
    """Quantum powers of H from the J-function by graded Birkhoff factorization.

    With w_l = e^{-tH/z} (z d/dt)^l J, one has w_l = L(z) b_l(z) where
    L = 1 + O(1/z) and b_{l+1} = H * b_l + z d/dt b_l is polynomial in z.
    Then H^{*l} = b_l(0), solved degree by degree.
    """
    d, r = ci.dim, ci.index
    dmax = 3 * (d + 2) // r + 3
    alpha = _mirror_series(ci, dmax, d + 1)

    def w(i: int) -> dict:
        out: dict = defaultdict(Fraction)
        for dd in range(dmax + 1):
            for m in range(min(i, d) + 1):
                lead = math.comb(i, m) * (dd ** (i - m))
                if lead == 0:
                    continue
                for k in range(d + 1 - m):
                    if alpha[dd][k]:
                        out[(dd, m + k)] += lead * alpha[dd][k]
        return out

    def clean(v: dict) -> dict:
        return {k: c for k, c in v.items() if c != 0 and k[0] <= dmax}

    one = {(0, 0): Fraction(1)}
    powers, bs, Lt, cols = [one], [one], [], []
    zmin = -(d + 2)
    for l in range(d + 1):
        # L(H^l) = w_l - sum over the non-leading terms of b_l
        acc = defaultdict(Fraction, w(l))
        for (dd, a), c in bs[l].items():
            if (dd, a) == (0, l):
                continue
            for (d2, a2), c2 in Lt[a].items():
                acc[(d2 + dd, a2)] -= c * c2
        Lt.append(clean(acc))
        g = l + 1
        # the part of b_{l+1} with positive z-power
        rest = defaultdict(Fraction)
        for (dd, a), c in bs[l].items():
            if dd:
                rest[(dd, a)] += dd * c
            if _zpow(l, (dd, a), r) >= 1:
                for (d2, a2), c2 in cols[a].items():
                    rest[(d2 + dd, a2)] += c * c2
        rest = clean(rest)
        u = defaultdict(Fraction, {k: c for k, c in w(g).items() if _zpow(g, k, r) == 0})
        for (dd, a), c in rest.items():
            p = _zpow(g, (dd, a), r)
            for (d2, a2), c2 in Lt[a].items():
                if _zpow(a, (d2, a2), r) == -p:
                    u[(d2 + dd, a2)] -= c * c2
        u = clean(u)
        powers.append(u)
        b_next = defaultdict(Fraction, rest)
        for k, c in u.items():
            b_next[k] += c
        bs.append(clean(b_next))
        col = defaultdict(Fraction, u)
        for (dd, a), c in powers[l].items():
            if (dd, a) == (0, l):
                continue
            for (d2, a2), c2 in cols[a].items():
                col[(d2 + dd, a2)] -= c * c2
        cols.append(clean(col))

    # consistency: L(b_{d+1}) reproduces w_{d+1} in every z-power we resolved
    g = d + 1
    recon = defaultdict(Fraction)
    for (dd, a), c in bs[g].items():
        for (d2, a2), c2 in Lt[a].items():
            recon[(d2 + dd, a2)] += c * c2
    target = w(g)
    resid = Fraction(0)
    for k in set(recon) | set(target):
        if k[0] <= dmax // 2 and _zpow(g, k, r) >= zmin:
            resid = max(resid, abs(recon.get(k, Fraction(0)) - target.get(k, Fraction(0))))
    return QuantumPowers(ci, tuple(powers), tuple(cols), resid)


def ambient_quantum_product(ci: CompleteIntersection, Q: complex = 1) -> np.ndarray:
    """Matrix of H* on 1, H, ..., H^d at Novikov parameter Q."""
    return quantum_powers(ci).matrix(Q)


def quantum_ring_matrix(ci: CompleteIntersection, q: complex = 1) -> np.ndarray:
    """Multiplication by c_1 = r x on C[x]/(relation) in the basis 1, x, ..., x^d.

    The relation is x^{d+1} = D q^r x^{d+1-r} for index at least two and
    (x + D' q)^d (x - (D - D') q) = 0 for index one.
    """
    d, r = ci.dim, ci.index
    n = d + 1
    # monic relation x^n + sum_k coeff[k] x^k = 0
    coeff = np.zeros(n, complex)
    if r >= 2:
        coeff[n - r] = -ci.D * q**r
    else:
        poly = np.poly1d([1.0])
        for _ in range(d):
            poly = poly * np.poly1d([1.0, ci.D_prime * q])
        poly = poly * np.poly1d([1.0, -(ci.D - ci.D_prime) * q])
        c = poly.coeffs[::-1]
        coeff[:] = c[:n]
    M = np.zeros((n, n), complex)
    for j in range(n - 1):
        M[j + 1, j] = 1
    M[:, n - 1] = -coeff
    return r * M


# ---------------------------------------------------------------------------
# the connection


@dataclass(frozen=True)
class QuantumConnectionData:
    """U = c_1 *_0, the grading mu, classical rho and the exponent set -C_X."""

    ci: CompleteIntersection
    U: np.ndarray
    mu: np.ndarray
    rho: np.ndarray
    exponents: ExponentSet
    grading: np.ndarray

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def T_max(self) -> float:
        return self.ci.index * self.ci.D ** (1.0 / self.ci.index)


def c1_quantum_matrix(ci: CompleteIntersection, q: complex = 1) -> np.ndarray:
    """c_1 *_q on the full model: r (H*) at Q = q^r on the ambient part, 0 on the primitive part."""
    n, na = ci.n_total, ci.n_amb
    U = np.zeros((n, n), complex)
    U[:na, :na] = ci.index * ambient_quantum_product(ci, q**ci.index)
    return U


def omega(ci: CompleteIntersection, k: int) -> complex:
    return complex(np.exp(-2j * math.pi * k / ci.index))


def exponent_values(ci: CompleteIntersection) -> dict:
    """id -> exponent: c_k = -T omega_k for k < r, and 0 when the model has room for it."""
    T = ci.index * ci.D ** (1.0 / ci.index)
    vals = {f"c{k}": -T * omega(ci, k) for k in range(ci.index)}
    if ci.index >= 2 and ci.n_total > ci.index:
        vals[ZERO_ID] = 0j
    return vals


def exponents(ci: CompleteIntersection) -> ExponentSet:
    """The exponent set -C_X (index at least two)."""
    if ci.index < 2:
        raise NotImplementedError("exponent bookkeeping is implemented for index at least two")
    return ExponentSet(exponent_values(ci).items())


def quantum_connection(ci: CompleteIntersection) -> QuantumConnectionData:
    return QuantumConnectionData(ci, c1_quantum_matrix(ci), mu_matrix(ci), rho_matrix(ci),
                                 exponents(ci), parity(ci))


def _charpoly_exact(M: list[list[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial coefficients (highest first) by Faddeev-LeVerrier."""
    n = len(M)

    def matmul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    coeffs = [Fraction(1)]
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        for i in range(n):
            Mk[i][i] += coeffs[-1]
        AM = matmul(M, Mk)
        c = -sum(AM[i][i] for i in range(n)) / k
        coeffs.append(c)
        Mk = AM
    return coeffs


@dataclass
class SpectrumReport:
    eigenvalues: list  # (value, multiplicity)
    T_max: float
    clauses: dict

    @property
    def ok(self) -> bool:
        return all(self.clauses.values())


def spectrum(ci: CompleteIntersection, tol: float = TOL_EIG) -> list[tuple[complex, int]]:
    """Eigenvalues of c_1 *_0 with multiplicities.

    The ambient characteristic polynomial is computed exactly, its zero roots
    split off, and the remaining roots clustered at relative tolerance ``tol``.
    """
    M = quantum_powers(ci).exact_matrix()
    r = ci.index
    cp = _charpoly_exact([[r * x for x in row] for row in M])
    zero_mult = 0
    while cp and cp[-1] == 0:
        cp.pop()
        zero_mult += 1
    roots = np.roots([float(c) for c in cp]) if len(cp) > 1 else np.array([])
    zero_mult += ci.b_prim
    scale = max([1.0] + [abs(x) for x in roots])
    clusters: list[list] = []
    for z in roots:
        for cl in clusters:
            if abs(cl[0] - z) <= tol * scale:
                cl[1] += 1
                break
        else:
            clusters.append([complex(z), 1])
    out = [(c, m) for c, m in clusters]
    if zero_mult:
        out.append((0j, zero_mult))
    return out


def property_O_check(ci: CompleteIntersection, tol: float = TOL_EIG) -> SpectrumReport:
    """The three clauses of Property O on the spectrum of c_1 *_0."""
    spec = spectrum(ci, tol)
    T = max(abs(c) for c, _ in spec)
    on_circle = [(c, m) for c, m in spec if abs(abs(c) - T) <= tol * T]
    mult_T = sum(m for c, m in on_circle if abs(c - T) <= tol * T)
    r = ci.index
    roots = [T * omega(ci, k) for k in range(r)]
    clauses = {
        "T in spectrum": mult_T > 0,
        "modulus peers are rotations": all(min(abs(c - w) for w in roots) <= tol * T for c, _ in on_circle),
        "T simple": mult_T == 1,
    }
    return SpectrumReport(spec, T, clauses)


@dataclass
class GaugeReport:
    residuals: dict
    tol: float

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def _eigvec(U: np.ndarray, val: complex) -> np.ndarray:
    w, V = np.linalg.eig(U)
    return V[:, int(np.argmin(np.abs(w - val)))]


def gauge_symmetry_check(ci: CompleteIntersection, rng: np.random.Generator | None = None,
                         samples: int = 5, tol: float = 1e-10) -> GaugeReport:
    """q^mu (c_1 *_q) q^-mu = q (c_1 *_0) and omega_k^-mu E(c) = E(omega_k c)."""
    rng = rng or np.random.default_rng(0)
    mu = np.diag(mu_matrix(ci))
    U0 = c1_quantum_matrix(ci)
    worst = 0.0
    for _ in range(samples):
        q = complex(rng.uniform(0.5, 2.0) * np.exp(1j * rng.uniform(-math.pi, math.pi)))
        Uq = c1_quantum_matrix(ci, q)
        # q^{mu_i - mu_j}; differences of mu are integers on each parity sector
        scale = np.array([[q ** int(round(a - b)) if abs(a - b - round(a - b)) < 1e-12 else 0.0
                           for b in mu] for a in mu])
        lhs = scale * Uq
        worst = max(worst, float(np.linalg.norm(lhs - q * U0) / np.linalg.norm(U0)))
    res = {"gauge identity": worst}
    sym = 0.0
    for c, m in spectrum(ci):
        if c == 0 or m != 1:
            continue
        v = _eigvec(U0, c)
        for k in range(1, ci.index):
            Wk = np.diag(np.exp(2j * math.pi * k * mu / ci.index))
            target = _eigvec(U0, omega(ci, k) * c)
            sym = max(sym, sub.subspace_distance((Wk @ v)[:, None], target[:, None]))
    res["eigenspace transport"] = sym
    return GaugeReport(res, tol)


# ---------------------------------------------------------------------------
# fundamental solution at infinity


@dataclass
class FundamentalSeries:
    """S(z) = sum_n S_n z^-n with S_0 = id."""

    coeffs: list
    residuals: list
    obstruction: float

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def evaluate(self, z: complex) -> np.ndarray:
        out = np.zeros_like(self.coeffs[0])
        for S in reversed(self.coeffs):
            out = out / z + S
        return out


def fundamental_series(qc: QuantumConnectionData, order: int, tol: float = TOL_SERIES) -> FundamentalSeries:
    """Solve (mu_i - mu_j - n) S_n[i, j] = (U S_{n-1} - S_{n-1} rho)[i, j] order by order.

    Entries on the kernel are set to zero; the right side must vanish there.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    n = qc.n
    mu = np.diag(qc.mu).real
    gap = mu[:, None] - mu[None, :]
    S = [np.eye(n, dtype=complex)]
    residuals, obstruction = [], 0.0
    for k in range(1, order + 1):
        rhs = qc.U @ S[-1] - S[-1] @ qc.rho
        den = gap - k
        ker = np.abs(den) < 1e-12
        scale = max(1.0, float(np.abs(rhs).max()))
        obs = float(np.abs(rhs[ker]).max() / scale) if ker.any() else 0.0
        obstruction = max(obstruction, obs)
        if obs > tol:
            raise ObstructionError(f"fundamental solution recursion obstructed at order {k} ({obs:.2e})")
        Sk = np.where(ker, 0.0, rhs / np.where(ker, 1.0, den))
        residuals.append(float(np.abs(den * Sk - np.where(ker, 0.0, rhs)).max() / scale))
        S.append(Sk)
    return FundamentalSeries(S, residuals, obstruction)


def pairing_identity_residual(fs: FundamentalSeries, G: np.ndarray) -> float:
    """max_n || sum_{a+b=n} (-1)^a S_a^T G S_b || for n >= 1, relative to the size of the terms."""
    worst = 0.0
    g = np.abs(G).max()
    for n in range(1, fs.order + 1):
        acc = sum((-1) ** a * fs.coeffs[a].T @ G @ fs.coeffs[n - a] for a in range(n + 1))
        scale = g * sum(np.abs(fs.coeffs[a]).max() * np.abs(fs.coeffs[n - a]).max() for a in range(n + 1))
        worst = max(worst, float(np.abs(acc).max() / scale))
    return worst


def symsol_residual(fs: FundamentalSeries, qc: QuantumConnectionData) -> float:
    """max |S_n[i,j] (exp(2 pi i k (mu_i - mu_j - n)/r) - 1)| over k, n, relative per order."""
    mu = np.diag(qc.mu).real
    r = qc.ci.index
    worst = 0.0
    for n, Sn in enumerate(fs.coeffs[1:], start=1):
        scale = max(1.0, float(np.abs(Sn).max()))
        for k in range(1, r):
            phase = np.exp(2j * math.pi * k * (mu[:, None] - mu[None, :] - n) / r) - 1
            worst = max(worst, float(np.abs(Sn * phase).max() / scale))
    return worst


# ---------------------------------------------------------------------------
# formal solutions near zero and ray integration


@dataclass
class FormalSolution:
    """w(z) = sum_n v_n z^n, so that e^{-u/z} z^lam w(z) is a formal flat section."""

    u: complex
    lam: complex
    coeffs: list

    def partial_sum(self, z: complex, terms: int | None = None) -> np.ndarray:
        terms = len(self.coeffs) if terms is None else terms
        out = np.zeros_like(self.coeffs[0])
        for v in reversed(self.coeffs[:terms]):
            out = out * z + v
        return out

    def optimal_terms(self, z: complex) -> int:
        """Number of terms up to the smallest one (superasymptotic truncation)."""
        sizes = [np.linalg.norm(v) * abs(z) ** n for n, v in enumerate(self.coeffs)]
        return int(np.argmin(sizes[1:])) + 1 if len(sizes) > 1 else 1


def formal_solution(qc: QuantumConnectionData, u: complex, order: int = 40,
                    tol: float = 1e-8) -> FormalSolution:
    """Formal solution for a simple eigenvalue u of U (exponent -u).

    (U - u) v_n = (lam + n - 1 + mu) v_{n-1}; the component along v_0 is fixed
    by solvability of the next order.
    """
    U, mu = qc.U, qc.mu
    n = qc.n
    ev, V = np.linalg.eig(U)
    idx = np.argsort(np.abs(ev - u))
    if abs(ev[idx[0]] - u) > tol * max(1.0, abs(u)) or (n > 1 and abs(ev[idx[1]] - u) <= tol * max(1.0, abs(u))):
        raise ValueError(f"{u} is not a simple eigenvalue; this block is not handled by formal_solution")
    evl, W = np.linalg.eig(U.T)
    v0 = V[:, idx[0]]
    w = W[:, int(np.argmin(np.abs(evl - u)))]
    wv = w @ v0
    lam = -(w @ mu @ v0) / wv
    A = np.vstack([U - u * np.eye(n), w[None, :]])
    coeffs = [v0]
    for k in range(1, order + 1):
        rhs = (lam + k - 1) * coeffs[-1] + mu @ coeffs[-1]
        x, *_ = np.linalg.lstsq(A, np.concatenate([rhs, [0]]), rcond=None)
        a = -(w @ mu @ x) / (k * wv)
        coeffs.append(x + a * v0)
    return FormalSolution(complex(u), complex(lam), coeffs)


@dataclass
class RayResult:
    w_end: np.ndarray
    rho_start: float
    rho_end: float
    nfev: int
    success: bool
    message: str


def integrate_ray(U: np.ndarray, mu: np.ndarray, phi: float, rho_start: float, rho_end: float,
                  w0: np.ndarray, shift: complex = 0.0, rtol: float = 1e-10, atol: float = 1e-13) -> RayResult:
    """Transport w = e^{shift/z} y along z = rho e^{i phi}, where y' = (U/z^2 - mu/z) y.

    ``shift = 0`` integrates the flat section itself.
    """
    n = U.shape[0]
    e = np.exp(1j * phi)
    A = U - shift * np.eye(n)

    def rhs(rho, w):
        z = rho * e
        return e * ((A @ w) / z**2 - (mu @ w) / z)

    sol = solve_ivp(rhs, (rho_start, rho_end), np.asarray(w0, complex), method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise AccuracyError(f"ray integration failed at phi={phi:.4f}: {sol.message}")
    return RayResult(sol.y[:, -1], rho_start, rho_end, int(sol.nfev), bool(sol.success), sol.message)


def _mat_power_z(M: np.ndarray, logz: complex) -> np.ndarray:
    """exp(M log z) for diagonal M."""
    return np.diag(np.exp(np.diag(M) * logz))


def class_from_section(qc: QuantumConnectionData, fs: FundamentalSeries, y: np.ndarray,
                       logz: complex) -> np.ndarray:
    """alpha with Phi(alpha)(z) = y, up to the constant (2 pi)^{-d/2}."""
    z = np.exp(logz)
    Sinv_y = np.linalg.solve(fs.evaluate(z), y)
    return exp_rho(qc.ci, -logz) @ _mat_power_z(qc.mu, logz) @ Sinv_y


@dataclass
class LineDiagnostics:
    exponent: complex
    phi: float
    rho_seed: float
    rho_outer: float
    terms: int
    seed_residual: float
    nfev: int


def asymptotic_line(qc: QuantumConnectionData, fs: FundamentalSeries, k: int, M: int = 20,
                    rtol: float = 1e-10, atol: float = 1e-13, outer: float = 10.0) -> tuple[np.ndarray, LineDiagnostics]:
    """Class spanning A_k: the flat section most recessive along arg z = -2 pi k / r."""
    ci = qc.ci
    vals = [v for v in exponent_values(ci).values()]
    u = -exponent_values(ci)[f"c{k}"]
    dmin = min(abs(a - b) for i, a in enumerate(vals) for b in vals[i + 1:])
    cmax = max(abs(v) for v in vals)
    rho_m = dmin / M
    R = outer * cmax
    phi = -2 * math.pi * k / ci.index
    formal = formal_solution(qc, u, order=2 * M + 10)
    zm = rho_m * np.exp(1j * phi)
    terms = formal.optimal_terms(zm)
    w0 = formal.partial_sum(zm, terms)
    w0 = w0 / np.linalg.norm(w0)
    # size of the first omitted term, relative: a proxy for the seeding error
    seed_res = float(np.linalg.norm(formal.coeffs[min(terms, len(formal.coeffs) - 1)]) * rho_m**terms)
    ray = integrate_ray(qc.U, qc.mu, phi, rho_m, R, w0, shift=u, rtol=rtol, atol=atol)
    alpha = class_from_section(qc, fs, ray.w_end, math.log(R) + 1j * phi)
    return alpha, LineDiagnostics(complex(-u), phi, rho_m, R, terms, seed_res, ray.nfev)


def q_flatness_drift(qc: QuantumConnectionData, phi: float, rho_a: float, rho_b: float,
                     rng: np.random.Generator | None = None, rtol: float = 1e-10, atol: float = 1e-13) -> float:
    """Relative drift of Q(s, t)(z) = (s(-z), t(z)) along a ray segment.

    s is transported along the opposite ray; both solutions start from random data.
    """
    rng = rng or np.random.default_rng(1)
    n = qc.n
    G = poincare_gram(qc.ci)
    e = np.exp(1j * phi)
    U, mu = qc.U, qc.mu

    def rhs(rho, Y):
        s, t = Y[:n], Y[n:]
        z = rho * e
        ds = -e * ((U @ s) / z**2 + (mu @ s) / z)  # d/drho s(-z)
        dt = e * ((U @ t) / z**2 - (mu @ t) / z)
        return np.concatenate([ds, dt])

    Y0 = rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n)
    sol = solve_ivp(rhs, (rho_a, rho_b), Y0, method="DOP853", rtol=rtol, atol=atol, dense_output=False,
                    t_eval=np.linspace(rho_a, rho_b, 25))
    vals = [sol.y[:n, j] @ G @ sol.y[n:, j] for j in range(sol.y.shape[1])]
    scale = max(np.linalg.norm(sol.y[:n, j]) * np.linalg.norm(sol.y[n:, j]) for j in range(sol.y.shape[1]))
    return float(max(abs(v - vals[0]) for v in vals) / (scale * np.abs(G).max()))


# ---------------------------------------------------------------------------
# frames


def pipeline_tuple(ci: CompleteIntersection, theta0: float) -> DirectionTuple:
    """theta_{c_k} = theta0 - 2 pi k / r, and theta0 for the zero exponent."""
    vals = exponent_values(ci)
    per = {f"c{k}": theta0 - 2 * math.pi * k / ci.index for k in range(ci.index)}
    if ZERO_ID in vals:
        per[ZERO_ID] = theta0
    return DirectionTuple(theta0, per)


def normalize_line(v: np.ndarray, P: np.ndarray, target: np.ndarray | None = None) -> np.ndarray:
    """Scale to [v, v) = 1; fix the sign against ``target`` or by the first large coordinate."""
    v = np.asarray(v, complex)
    v = v / np.sqrt(v @ P @ v)
    if target is not None:
        if (v @ P @ target).real < 0:
            v = -v
    else:
        j = int(np.argmax(np.abs(v) > 1e-8 * np.abs(v).max()))
        if v[j].real < 0:
            v = -v
    return v


@dataclass
class AsymptoticFrame:
    """Per-exponent bases of Im f_c, at theta0 or at an ordered tuple."""

    ci: CompleteIntersection
    theta0: float
    tuple: DirectionTuple | None
    order: tuple
    bases: dict
    diagnostics: dict = field(default_factory=dict)

    def mutation_system(self) -> MutationSystem:
        ci = self.ci
        grading = parity(ci)
        bg = {c: sub.span_parities(self.bases[c], grading) for c in self.order}
        f = np.hstack([self.bases[c] for c in self.order])
        dims = {c: self.bases[c].shape[1] for c in self.order}
        return MutationSystem(pairing_A_matrix(ci), exponents(ci), self.order, dims, f, grading, bg)

    def at_theta0(self) -> "AsymptoticFrame":
        """Transport a tuple frame back to theta0 through the braid action."""
        if self.tuple is None:
            return self
        ms = transport_bullet_to_theta0(self.mutation_system(), self.theta0, self.tuple)
        bases = {c: ms.f_block(c) for c in ms.order}
        return AsymptoticFrame(self.ci, self.theta0, None, ms.order, bases, dict(self.diagnostics))

    def gram(self) -> np.ndarray:
        P = pairing_A_matrix(self.ci)
        F = np.hstack([self.bases[c] for c in self.order])
        return F.T @ P @ F


def extract_zero_block(ci: CompleteIntersection, lines: Mapping, order: Sequence,
                       P: np.ndarray | None = None) -> np.ndarray:
    """The zero-exponent block by two-sided orthogonality inside the given order."""
    P = pairing_A_matrix(ci) if P is None else P
    if ZERO_ID not in order:
        return np.zeros((ci.n_total, 0), complex)
    pos = list(order).index(ZERO_ID)
    before = [np.asarray(lines[c]).reshape(ci.n_total, -1) for c in order[:pos]]
    after = [np.asarray(lines[c]).reshape(ci.n_total, -1) for c in order[pos + 1:]]
    Z = sub.two_sided_complement(P, before, after, parity(ci))
    expected = ci.n_total - sum(b.shape[1] for b in before + after)
    if Z.shape[1] != expected:
        raise AccuracyError(f"zero block has dimension {Z.shape[1]}, expected {expected}")
    return Z


def asymptotic_classes(ci: CompleteIntersection, theta0: float = 0.1, M: int = 20, order: int = 60,
                       rtol: float = 1e-10, atol: float = 1e-13, compare: bool = True,
                       threads: int | None = None, cond_max: float = 1e12) -> AsymptoticFrame:
    """The A-side frame at the pipeline tuple (transport with ``at_theta0``).

    Nonzero exponents come from ray integration; the zero exponent from
    orthogonality.  With ``compare`` the sign of each line is fixed against
    Gamma Ch(O(k)); otherwise by a coordinate rule.
    """
    if ci.index < 2:
        raise NotImplementedError("the A-side pipeline needs index at least two")
    if not abs(theta0) < math.pi / ci.index:
        raise ValueError("theta0 must satisfy |theta0| < pi / r for the pipeline tuple")
    qc = quantum_connection(ci)
    C = qc.exponents
    if not is_generic(theta0, C):
        raise ValueError(f"theta0={theta0} is not generic")
    tup = pipeline_tuple(ci, theta0)
    frame_order = ordered_ids(tau_theta_bullet(C, tup))
    fs = fundamental_series(qc, order)
    P = pairing_A_matrix(ci)
    jobs = list(range(ci.index))
    workers = min(threads or thread_cap(), len(jobs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: asymptotic_line(qc, fs, k, M, rtol, atol), jobs))
    else:
        results = [asymptotic_line(qc, fs, k, M, rtol, atol) for k in jobs]
    lines, diag = {}, {}
    for k, (alpha, dg) in zip(jobs, results):
        target = gamma_line(ci, k).to_vector() if compare else None
        lines[f"c{k}"] = normalize_line(alpha, P, target)[:, None]
        diag[f"c{k}"] = dg
    bases = dict(lines)
    if ZERO_ID in C.ids:
        bases[ZERO_ID] = extract_zero_block(ci, lines, frame_order, P)
    F = np.hstack([bases[c] for c in frame_order])
    cond = float(np.linalg.cond(F))
    if cond > cond_max:
        raise AccuracyError(f"frame condition number {cond:.2e}; increase the series order or radius")
    diagnostics = {"lines": diag, "series_order": order, "M": M, "rtol": rtol, "atol": atol,
                   "frame_cond": cond, "series_obstruction": fs.obstruction}
    return AsymptoticFrame(ci, theta0, tup, frame_order, bases, diagnostics)


def a_mutation_system(ci: CompleteIntersection, theta0: float = 0.1, **kw) -> MutationSystem:
    """A-mutation system at theta0."""
    frame = asymptotic_classes(ci, theta0, **kw).at_theta0()
    ms = frame.mutation_system()
    rep = validate_mutation_system(ms, tol=1e-6)
    if not rep.ok:
        raise AccuracyError(f"A-side system fails validation: {rep}")
    return ms
