"""
Stokes multipliers and their factors
====================================

Exponents at the cube roots of unity (the geometry of P^2).  A random
Stokes multiplier at a generic direction splits uniquely into factors, one
per Stokes direction crossed in the next half turn.
"""

from __future__ import annotations

import numpy as np

from stokes_mutant.direction import crossing_angles, ordered_ids, r_theta, tau_theta
from stokes_mutant.mutation import compose_factors, factorize_stokes_multiplier
from stokes_mutant.quantum import exponents
from stokes_mutant.cohomology import CompleteIntersection

np.set_printoptions(precision=3, suppress=True)

P2 = CompleteIntersection.projective_space(2)
C = exponents(P2)
theta0 = 0.1
print("exponents:", {c: complex(round(v.real, 4), round(v.imag, 4)) for c, v in C.items()})
print("order at theta0:", ordered_ids(tau_theta(C, theta0)))

# %% Which pairs line up at each crossing angle.
for th in crossing_angles(C, theta0):
    print(f"theta = {th:+.4f}:", sorted(r_theta(C, th)))

# %% A lower unipotent multiplier, its factors and the recomposition.
g = np.array([[1, 0, 0], [2.0, 1, 0], [-1.5 + 1j, 0.5, 1]])
factors = factorize_stokes_multiplier(g, C, theta0)
for th, fk in factors:
    print(f"factor at {th:+.4f}:\n{fk}")
print("recompose residual:", np.abs(compose_factors(factors) - g).max())

# %% Uniqueness: moving one factor always moves the product.
bumped = [(th, fk.copy()) for th, fk in factors]
row, col = np.argwhere(np.tril(bumped[0][1], -1))[0]
bumped[0][1][row, col] += 1e-4
print("product change:", np.abs(compose_factors(bumped) - g).max())
