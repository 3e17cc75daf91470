"""
Gamma classes and Euler pairings
================================

Classical data of Fano complete intersections: Euler matrices of
O, O(1), ..., Gamma-transported line bundles, and the isometry between the
two pairings that fixes the Gamma convention.
"""

from __future__ import annotations

import numpy as np

from stokes_mutant.cohomology import (
    CompleteIntersection,
    euler_matrix,
    gamma_class,
    gamma_line,
    hpoly_format,
    lemma_pairing_sample_residual,
    resolve_gamma_convention,
    topological_euler,
)

np.set_printoptions(precision=6, suppress=True)

# %% Euler matrices from the pairing side; on P^n they are binomial.
for n in (1, 2, 3):
    print(f"P^{n}:\n", np.round(euler_matrix(CompleteIntersection.projective_space(n), range(n + 1)).real, 9) + 0.0)

# %% The cubic threefold: index two, ten primitive classes.
X = CompleteIntersection(4, (3,))
print(X.label, "index", X.index, "euler characteristic", topological_euler(X), "primitive", X.b_prim)
print("Euler matrix of O, O(1):\n", euler_matrix(X).real.round(9) + 0.0)
print("Gamma class:", hpoly_format(gamma_class(X)))
print("Gamma Ch(O(1)):", hpoly_format(gamma_line(X, 1).ambient))

# %% Only one of the two Gamma conventions is an isometry in every dimension.
res = resolve_gamma_convention()
print("convention:", res.convention, "residuals:", {k: f"{v:.1e}" for k, v in res.residuals.items()})
rng = np.random.default_rng(0)
print("random pairs on the cubic:", lemma_pairing_sample_residual(X, rng, 1000, res.convention))
