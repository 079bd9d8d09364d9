import json
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from cembenders.benders import MasterState, build_planning_problem, planning_space  # noqa: E402
from cembenders.instance import generate_synthetic, load_instance, preset  # noqa: E402
from cembenders.lpcore import LPProblem, solve_lp  # noqa: E402
from cembenders.reformulate import assemble_monolithic  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"
# Seeded desk instances shared by the oracle-equivalence checks.
DESK_SEEDS = tuple(range(1, 11))

settings.register_profile("suite", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("suite")


@lru_cache(maxsize=None)
def tiny1():
    return load_instance(FIXTURES / "tiny1")


@lru_cache(maxsize=None)
def tiny1_expected():
    return json.loads((FIXTURES / "tiny1_expected.json").read_text())


@lru_cache(maxsize=None)
def tiny1_int():
    return tiny1().replace(discrete=tuple(tiny1_expected()["integers"]))


@lru_cache(maxsize=None)
def desk(seed: int):
    return generate_synthetic(preset("desk"), seed)


@lru_cache(maxsize=None)
def oracle_value(key):
    """Monolithic LP optimum for ``("tiny1",)`` or ``("desk", seed)``."""
    inst = tiny1() if key[0] == "tiny1" else desk(key[1])
    return solve_lp(assemble_monolithic(inst)).objective


def random_lp(seed: int, m: int = 6, n: int = 5) -> LPProblem:
    """Feasible, bounded LP with mixed row senses built around a known point."""
    rng = np.random.default_rng(seed)
    A = rng.integers(-5, 6, size=(m, n)).astype(float)
    x0 = rng.uniform(0, 4, size=n)
    senses = rng.choice(["L", "G", "E"], size=m, p=[0.5, 0.3, 0.2])
    act = A @ x0
    rhs = np.where(senses == "L", act + rng.uniform(0, 3, m),
                   np.where(senses == "G", act - rng.uniform(0, 3, m), act))
    c = rng.integers(-6, 7, size=n).astype(float)
    return LPProblem(A, senses, np.round(rhs, 6), c, np.zeros(n), np.full(n, 6.0))


def planning_points(bp, count: int, seed: int, box: float = 500.0):
    """Random (y, z) pairs satisfying every planning row.

    Each point blends two vertices found with random objectives, so it sits
    inside the region rather than only at its corners.  Columns are boxed to
    keep the vertices finite.
    """
    rng = np.random.default_rng(seed)
    base = build_planning_problem(MasterState(), bp)
    space = planning_space(bp)
    ub = np.minimum(base.ub, box)
    vertices = []
    for _ in range(count + 1):
        c = np.concatenate([rng.uniform(-1, 1, space.ny + space.nz), np.zeros(space.nw)])
        sol = solve_lp(LPProblem(base.A, base.senses, base.rhs, c, base.lb, ub))
        assert sol.optimal
        vertices.append(sol.x)
    out = []
    for k in range(count):
        t = rng.uniform()
        y, z, _ = space.split(t * vertices[k] + (1 - t) * vertices[k + 1])
        out.append((y, z))
    return out


@pytest.fixture
def tiny():
    return tiny1()


@pytest.fixture
def expected():
    return tiny1_expected()
