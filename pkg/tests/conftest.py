import numpy as np
import pytest

import rkbs_sparse as rk
from rkbs_sparse.core import DomainError, matrix_rank

ACCEPTANCE_SEED = 20240607


def random_seq_instances(count: int, max_n: int = 4, seed: int = ACCEPTANCE_SEED,
                         options: rk.SolverOptions | None = None):
    """Seeded random interpolation instances over finite/harmonic/geometric
    functionals, filtered for linear independence on the truncated range."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, max_n + 1))
        functionals = []
        used_harmonic = False
        for _ in range(n):
            pick = int(rng.integers(0, 3))
            if pick == 0 and not used_harmonic:
                functionals.append(rk.harmonic())
                used_harmonic = True
            elif pick == 1:
                ratio = float(rng.uniform(-0.9, 0.9))
                if abs(ratio) < 0.05:
                    ratio = 0.4
                functionals.append(rk.geometric(round(ratio, 6)))
            else:
                length = int(rng.integers(1, 7))
                values = np.round(rng.uniform(-2.0, 2.0, length), 3)
                functionals.append(rk.finite(values))
        y = np.round(rng.uniform(-2.0, 2.0, n), 3)
        if float(np.max(np.abs(y))) < 0.1:
            continue
        try:
            problem = rk.seq_problem(functionals, y, options or rk.SolverOptions())
        except DomainError:
            continue
        if matrix_rank(problem.coordinate_matrix(64), 1e-9) < n:
            continue
        out.append(problem)
    return out


@pytest.fixture
def worked_example():
    """Harmonic plus alternating-geometric pair with y = [1, 1]."""
    return rk.seq_problem([rk.harmonic(), rk.geometric(-0.5)], [1.0, 1.0])


@pytest.fixture
def unit_pair_problem():
    """Coordinate functionals e1, e2 (measurement matrix I2)."""
    return rk.seq_problem([rk.finite([1.0]), rk.finite([0.0, 1.0])], [1.0, 1.0])
