from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from stokes_mutant.cohomology import CompleteIntersection

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

P1 = CompleteIntersection.projective_space(1)
P2 = CompleteIntersection.projective_space(2)
P3 = CompleteIntersection.projective_space(3)
CUBIC3 = CompleteIntersection(4, (3,))
QUADRIC3 = CompleteIntersection(4, (2,))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
