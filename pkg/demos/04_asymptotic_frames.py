"""
Asymptotic classes of the quantum connection
============================================

For P^2 the quantum connection has three exponents.  The asymptotic
classes come from formal solutions near the irregular point, continued
along rays by an adaptive integrator.  Their Gram matrix reproduces the
Euler matrix, and the dominant line is spanned by the Gamma class.
"""

from __future__ import annotations

import time

import numpy as np

from stokes_mutant import _subspace as sub
from stokes_mutant.cohomology import CompleteIntersection, gamma_class
from stokes_mutant.quantum import (
    asymptotic_classes,
    property_O_check,
    quantum_connection,
    spectrum,
)

np.set_printoptions(precision=6, suppress=True)

P2 = CompleteIntersection.projective_space(2)
qc = quantum_connection(P2)
print("c1 * at Q = 1:\n", qc.U.real)
print("spectrum:", [(complex(round(v.real, 6), round(v.imag, 6)), m) for v, m in spectrum(P2)])
print("property O:", property_O_check(P2).ok)

# %% Frame along the pipeline tuple: the Gram is the binomial matrix.
start = time.perf_counter()
frame = asymptotic_classes(P2, 0.1)
print(f"frame computed in {time.perf_counter() - start:.2f} s, order {frame.order}")
print("Gram:\n", frame.gram().real.round(8) + 0.0)
for c, d in frame.diagnostics["lines"].items():
    print(f"  {c}: seed residual {d.seed_residual:.1e}, rays {d.rho_seed:.2f} -> {d.rho_outer:.2f}")

# %% At theta0 itself the order differs and the lines are mutated accordingly.
at0 = frame.at_theta0()
print("order at theta0:", at0.order)
print("Gram at theta0:\n", at0.gram().real.round(8) + 0.0)

# %% The dominant line against the Gamma class.
angle = sub.subspace_distance(frame.bases["c0"], gamma_class(P2).to_array()[:, None])
print(f"principal angle to the Gamma class: {angle:.2e}")
