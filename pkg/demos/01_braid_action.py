"""
Braid group action on Stokes data
=================================

A two-block example, then random data on four blocks: mutations, the
braid relations and the half twist.
"""

from __future__ import annotations

import numpy as np

from stokes_mutant.direction import ExponentSet
from stokes_mutant.mutation import (
    BraidWord,
    MonodromyRep,
    StokesData,
    apply_braid,
    delta_action,
    delta_closed_form,
    mutate_right,
    random_stokes_data,
    validate_stokes_data,
)

np.set_printoptions(precision=4, suppress=True)

# %% A one-parameter family with two rank-one blocks.
t = 2.0
C = ExponentSet([("a", -1), ("b", 1)])
T = np.array([[1, t], [-t, 1 - t * t]])
one = MonodromyRep(1, [[1]])
sd = StokesData(MonodromyRep(2, T), C, ("a", "b"), {"a": one, "b": one}, np.eye(2), np.array([[1, 0], [t, 1]]))
print("valid:", validate_stokes_data(sd).ok)

# %% sigma_1 is the right mutation at position 2; it swaps the blocks.
new = mutate_right(sd, 2)
print("order after sigma_1:", new.order)
print("f:\n", new.f)
print("f*:\n", new.f_star)

# %% Random data on four blocks: the braid relation s1 s2 s1 = s2 s1 s2.
rng = np.random.default_rng(7)
sd4 = random_stokes_data(rng, [1, 2, 1, 2])
lhs = apply_braid(sd4, BraidWord.parse("s1 s2 s1", 4))
rhs = apply_braid(sd4, BraidWord.parse("s2 s1 s2", 4))
print("braid relation residual:", np.abs(lhs.f - rhs.f).max())

# %% The half twist has a closed form: f -> (f*)^-1.
d = delta_action(sd4)
f_new, fs_new = delta_closed_form(sd4)
print("half twist residuals:", np.abs(d.f - f_new).max(), np.abs(d.f_star - fs_new).max())

# %% Twice the half twist conjugates by the monodromy.
dd = delta_action(d)
full = sd4.T @ sd4.f @ np.linalg.inv(sd4.block_T())
print("full twist residual:", np.abs(dd.f - full).max())
