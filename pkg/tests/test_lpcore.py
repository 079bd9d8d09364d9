from dataclasses import replace

import numpy as np
import pytest
import scipy.sparse as sp
from conftest import random_lp
from hypothesis import given
from hypothesis import strategies as st
from oracles import (
    binary_enumeration, chebyshev_by_enumeration, projection_by_enumeration, tableau_lp,
)

from cembenders.errors import Infeasible, NodeLimit
from cembenders.lpcore import (
    INFEASIBLE, NODE_LIMIT, OPTIMAL, UNBOUNDED, LPProblem, SolveOptions, analytic_center,
    chebyshev_center, export_mps, import_solution, kkt_residual, read_mps, relative_gap, solve_lp,
    solve_milp, solve_qp, write_solution,
)


def lp(A, senses, rhs, c, lb=None, ub=None, **kw):
    A = np.asarray(A, float)
    n = A.shape[1]
    lb = np.zeros(n) if lb is None else lb
    ub = np.full(n, np.inf) if ub is None else ub
    return LPProblem(A, np.array(senses), rhs, c, lb, ub, **kw)


def test_textbook_lp_and_duals():
    # max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18
    p = lp([[1, 0], [0, 2], [3, 2]], ["L", "L", "L"], [4, 12, 18], [-3, -5])
    sol = solve_lp(p)
    assert sol.status == OPTIMAL
    assert sol.objective == pytest.approx(-36)
    np.testing.assert_allclose(sol.x, [2, 6], atol=1e-9)
    # d(obj)/d(rhs): relaxing the binding rows lowers the minimum.
    np.testing.assert_allclose(sol.duals, [0, -1.5, -1], atol=1e-9)
    np.testing.assert_allclose(sol.multipliers(p), [0, 1.5, 1], atol=1e-9)
    assert sol.dual_objective(p) == pytest.approx(sol.objective)


def test_infeasible_and_unbounded():
    assert solve_lp(lp([[1.0]], ["G"], [2], [1], ub=[1])).status == INFEASIBLE
    assert solve_lp(lp([[1.0]], ["G"], [2], [-1])).status == UNBOUNDED


@pytest.mark.parametrize("seed", range(20))
def test_lp_matches_tableau_oracle(seed):
    p = random_lp(seed)
    status, obj, _ = tableau_lp(p.A.toarray(), p.senses, p.rhs, p.c, p.lb, p.ub)
    sol = solve_lp(p)
    assert sol.status == status
    if status == OPTIMAL:
        assert sol.objective == pytest.approx(obj, rel=1e-7, abs=1e-9)
        assert sol.dual_objective(p) == pytest.approx(sol.objective, rel=1e-7, abs=1e-7)


@given(st.integers(0, 10_000))
def test_strong_duality_property(seed):
    p = random_lp(seed, m=5, n=4)
    sol = solve_lp(p)
    if sol.optimal:
        assert p.violation(sol.x) <= 1e-7
        assert sol.dual_objective(p) == pytest.approx(sol.objective, rel=1e-7, abs=1e-7)


def test_dual_is_rhs_sensitivity():
    p = random_lp(3)
    sol = solve_lp(p)
    assert sol.optimal
    i = int(np.argmax(np.abs(sol.duals)))
    h = 1e-4
    bumped = solve_lp(p.with_changes(rhs=p.rhs + h * np.eye(p.num_rows)[i]))
    assert (bumped.objective - sol.objective) / h == pytest.approx(sol.duals[i], rel=1e-4, abs=1e-6)


def _box_region(G, h, n):
    return lp(G, ["L"] * len(h), h, np.zeros(n), lb=np.full(n, -np.inf))


@given(st.integers(0, 10_000), st.integers(2, 4))
def test_qp_projection_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    m = n + 2
    G = rng.normal(size=(m, n))
    x0 = rng.normal(size=n)
    h = G @ x0 + rng.uniform(0.1, 1.0, m)
    v = rng.normal(scale=3.0, size=n)
    p = _box_region(G, h, n).with_changes(Q=2 * sp.identity(n), c=-2 * v, offset=float(v @ v))
    sol = solve_qp(p)
    x_ref, val_ref = projection_by_enumeration(G, h, v)
    assert sol.optimal
    np.testing.assert_allclose(sol.x, x_ref, atol=1e-6)
    assert sol.objective == pytest.approx(val_ref, abs=1e-6)


def test_certificate_accepts_solver_output_and_rejects_perturbations():
    p = random_lp(4)
    assert kkt_residual(p, solve_lp(p)) <= 1e-7
    rng = np.random.default_rng(4)
    G = rng.normal(size=(5, 3))
    h = G @ rng.normal(size=3) + 0.5
    v = rng.normal(scale=3.0, size=3)
    q = _box_region(G, h, 3).with_changes(Q=2 * sp.identity(3), c=-2 * v, offset=float(v @ v))
    sol = solve_qp(q)
    assert sol.info["kkt_residual"] <= 1e-7
    moved = replace(sol, x=sol.x + 1e-2, reduced_costs=sol.reduced_costs + 1e-2)
    assert kkt_residual(q, moved) > 1e-6


def test_qp_on_wide_coefficient_range():
    # Projection of a far point onto a slab with large coefficients and rhs.
    n = 4
    A = np.array([[1.2e4, 0.5, 3.0, 1.0], [1.0, 9e3, 0.0, 2.0]])
    rhs = np.array([4.1e6, 2.0e6])
    v = np.array([900.0, 850.0, 700.0, 50.0])
    q = lp(A, ["L", "L"], rhs, -2 * v, lb=np.zeros(n)).with_changes(
        Q=2 * sp.identity(n), offset=float(v @ v))
    sol = solve_qp(q)
    assert sol.optimal and sol.info["kkt_residual"] <= 1e-7
    G = np.vstack([A, -np.eye(n)])
    x_ref, _ = projection_by_enumeration(G, np.concatenate([rhs, np.zeros(n)]), v)
    np.testing.assert_allclose(sol.x, x_ref, rtol=1e-7, atol=1e-6)


def test_qp_on_thin_slab():
    # Feasible width 1e-6 relative to the rhs; must not come back infeasible.
    n = 3
    v = np.array([5.0, -2.0, 1.0])
    a = np.array([1.0e3, 2.0e3, 1.0])
    rhs = np.array([1.0e6 * (1 + 1e-6), -1.0e6])
    q = lp(np.vstack([a, -a]), ["L", "L"], rhs, -2 * v, lb=np.full(n, -np.inf)).with_changes(
        Q=2 * sp.identity(n), offset=float(v @ v))
    sol = solve_qp(q)
    assert sol.optimal and sol.info["kkt_residual"] <= 1e-7
    x_ref, _ = projection_by_enumeration(np.vstack([a, -a]), rhs, v)
    np.testing.assert_allclose(sol.x, x_ref, rtol=1e-7, atol=1e-6)


def test_infeasible_qp():
    q = lp([[1.0, 1.0]], ["G"], [5.0], [0.0, 0.0], ub=np.ones(2)).with_changes(
        Q=sp.identity(2))
    assert solve_qp(q).status == INFEASIBLE


def test_qp_gap_tolerance_defaults_to_strict():
    assert SolveOptions().qp_gap_tol <= 1e-7


def test_qp_rejects_indefinite():
    p = lp([[1, 1]], ["L"], [1], [0, 0]).with_changes(Q=sp.diags([1.0, -1.0]))
    with pytest.raises(ValueError):
        solve_qp(p)


def test_milp_knapsack_matches_enumeration():
    A = [[3, 4, 5, 2, 6, 1]]
    c = [-4, -5, -7, -2, -8, -1]
    p = lp(A, ["L"], [10], c, ub=np.ones(6), integers=np.arange(6))
    best, _ = binary_enumeration(A, ["L"], [10], c)
    sol = solve_milp(p, SolveOptions(mip_gap=0.0))
    assert sol.status == OPTIMAL
    assert sol.objective == float(best)


@given(st.integers(0, 10_000))
def test_milp_binary_property(seed):
    rng = np.random.default_rng(seed)
    n = 6
    A = rng.integers(-3, 6, size=(3, n)).astype(float)
    rhs = rng.integers(2, 9, size=3).astype(float)
    c = rng.integers(-9, 5, size=n).astype(float)
    senses = ["L", "L", "G"]
    rhs[2] = -rhs[2]
    best, _ = binary_enumeration(A, senses, rhs, c)
    sol = solve_milp(lp(A, senses, rhs, c, ub=np.ones(n), integers=np.arange(n)),
                     SolveOptions(mip_gap=0.0))
    if best is None:
        assert sol.status == INFEASIBLE
    else:
        assert sol.objective == float(best)


def test_milp_node_limit():
    A = [[3, 4, 5, 2, 6, 1]]
    p = lp(A, ["L"], [10.5], [-4, -5, -7, -2, -8, -1], ub=np.ones(6), integers=np.arange(6))
    opts = SolveOptions(mip_gap=0.0, node_limit=1)
    assert solve_milp(p, opts).status in (NODE_LIMIT, OPTIMAL)
    with pytest.raises(NodeLimit):
        solve_milp(p.with_changes(rhs=np.array([10.5])), SolveOptions(mip_gap=0.0, node_limit=0),
                   raise_on_limit=True)


def test_chebyshev_unit_square():
    G = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], float)
    res = chebyshev_center(_box_region(G, np.array([1, 0, 1, 0.0]), 2))
    np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-9)
    assert res.radius == pytest.approx(0.5)


@given(st.integers(0, 10_000), st.integers(2, 3))
def test_chebyshev_radius_matches_enumeration(seed, n):
    rng = np.random.default_rng(seed)
    G = rng.normal(size=(n + 3, n))
    G = np.vstack([G, np.eye(n), -np.eye(n)])
    h = np.concatenate([np.abs(rng.normal(size=n + 3)) + 0.2, np.full(2 * n, 2.0)])
    res = chebyshev_center(_box_region(G, h, n))
    r_ref, _ = chebyshev_by_enumeration(G, h)
    assert res.radius == pytest.approx(r_ref, abs=1e-7)
    assert res.min_scaled_slack() >= res.radius - 1e-7


def test_chebyshev_with_equality_and_pin():
    # x + y = 1 inside the unit box: the ball lives on the segment.
    p = lp([[1, 1]], ["E"], [1], [0, 0], ub=np.ones(2))
    res = chebyshev_center(p)
    np.testing.assert_allclose(res.x, [0.5, 0.5], atol=1e-9)
    pinned = chebyshev_center(lp([[1, 1]], ["L"], [2], [0, 0], ub=np.ones(2)), {0: 1.0})
    np.testing.assert_allclose(pinned.x, [1.0, 0.5], atol=1e-9)


def test_chebyshev_empty_region():
    with pytest.raises(Infeasible):
        chebyshev_center(lp([[1.0]], ["G"], [2], [0], ub=[1]))


def test_analytic_center_of_box():
    p = lp(np.zeros((0, 2)), [], [], [0, 0], ub=np.array([2.0, 4.0]))
    res = analytic_center(p)
    np.testing.assert_allclose(res.x, [1, 2], atol=1e-6)


def test_mps_and_solution_roundtrip(tmp_path):
    p = random_lp(5).with_changes(integers=np.array([1]))
    path = export_mps(p, tmp_path / "p.mps")
    q = read_mps(path)
    np.testing.assert_allclose(q.A.toarray(), p.A.toarray())
    assert list(q.senses) == list(p.senses)
    np.testing.assert_allclose(q.rhs, p.rhs)
    np.testing.assert_allclose(q.c, p.c)
    assert q.integers.tolist() == [1]
    sol = solve_lp(p.relaxed())
    write_solution(sol, p, tmp_path / "s.csv")
    back = import_solution(tmp_path / "s.csv", p)
    np.testing.assert_array_equal(back.x, sol.x)
    np.testing.assert_array_equal(back.duals, sol.duals)


def test_relative_gap_conventions():
    assert relative_gap(0.0, 0.0) == 0.0
    assert relative_gap(11.0, 10.0) == pytest.approx(0.1)
    assert relative_gap(np.inf, 1.0) == np.inf


def test_one_variable_lp_dual():
    sol = solve_lp(lp([[1.0]], ["G"], [3], [1]))
    assert sol.objective == pytest.approx(3)
    assert sol.duals[0] == pytest.approx(1)


def test_degenerate_lp_vertex_dual():
    sol = solve_lp(lp([[1, 1]], ["G"], [1], [1, 1]))
    assert sol.objective == pytest.approx(1)
    assert sol.duals[0] == pytest.approx(1)


def test_lp_is_deterministic():
    p = random_lp(11)
    a, b = solve_lp(p), solve_lp(p)
    assert a.x.tobytes() == b.x.tobytes()
    assert a.duals.tobytes() == b.duals.tobytes()


def test_qp_hand_examples():
    inner = lp(np.zeros((0, 1)), [], [], [-2.0], ub=[2.0]).with_changes(
        Q=sp.identity(1) * 2, offset=1.0)
    assert solve_qp(inner).x[0] == pytest.approx(1)
    capped = lp([[1.0]], ["L"], [2], [-10.0], lb=[-np.inf]).with_changes(
        Q=sp.identity(1) * 2, offset=25.0)
    sol = solve_qp(capped)
    assert sol.x[0] == pytest.approx(2)
    assert sol.objective == pytest.approx(9)
    assert sol.multipliers(capped)[0] == pytest.approx(6, rel=1e-6)


def test_milp_rounds_down():
    sol = solve_milp(lp([[1.0]], ["L"], [2.5], [-1], ub=[3.0], integers=[0]))
    assert sol.x[0] == 2


def test_milp_integral_relaxation_stops_at_root():
    # 2x2 transportation problem: totally unimodular rows, integral data.
    A = [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]]
    p = lp(A, ["L", "L", "G", "G"], [3, 4, 2, 5], [1, 3, 2, 1], integers=np.arange(4))
    sol = solve_milp(p)
    assert sol.nodes == 1
    assert np.all(sol.x == np.round(sol.x))


@given(st.integers(0, 10_000))
def test_milp_bound_trace_monotone(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(1, 9, size=(2, 6)).astype(float)
    p = lp(A, ["L", "L"], [11.5, 13.5], -rng.integers(1, 9, size=6).astype(float),
           ub=np.full(6, 2.0), integers=np.arange(6))
    sol = solve_milp(p, SolveOptions(mip_gap=0.0))
    assert np.all(np.diff(sol.bound_trace) >= -1e-9)
    assert sol.bound <= sol.objective + 1e-9


def test_chebyshev_triangle_incenter():
    G = np.array([[-1, 0], [0, -1], [1, 1]], float)
    res = chebyshev_center(_box_region(G, np.array([0, 0, 1.0]), 2))
    r = 1 / (2 + np.sqrt(2))
    assert res.radius == pytest.approx(r)
    np.testing.assert_allclose(res.x, [r, r], atol=1e-9)


def test_chebyshev_row_permutation_invariant():
    rng = np.random.default_rng(4)
    G = np.vstack([rng.normal(size=(5, 3)), np.eye(3), -np.eye(3)])
    h = np.concatenate([np.abs(rng.normal(size=5)) + 0.5, np.full(6, 1.0)])
    perm = rng.permutation(len(h))
    a = chebyshev_center(_box_region(G, h, 3))
    b = chebyshev_center(_box_region(G[perm], h[perm], 3))
    assert a.x.tobytes() == b.x.tobytes()


def test_solution_missing_column_names_it(tmp_path):
    from cembenders.errors import ParseError

    p = random_lp(2)
    sol = solve_lp(p)
    path = write_solution(sol, p, tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    path.write_text("\n".join(line for line in lines if not line.startswith("c3,")) + "\n")
    with pytest.raises(ParseError, match="c3"):
        import_solution(path, p)
    path.write_text("bogus\n")
    with pytest.raises(ParseError, match="line 1"):
        import_solution(path)


def test_monolithic_mps_roundtrip(tmp_path):
    from conftest import tiny1

    from cembenders.reformulate import assemble_monolithic

    p = assemble_monolithic(tiny1())
    q = read_mps(export_mps(p, tmp_path / "m.mps"))
    assert q.col_names == p.col_names
    assert q.row_names == p.row_names
    assert solve_lp(q).objective == pytest.approx(solve_lp(p).objective, rel=1e-12)
