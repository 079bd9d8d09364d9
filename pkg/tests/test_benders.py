import csv
from dataclasses import replace

import numpy as np
import pytest
from conftest import oracle_value, planning_points, tiny1, tiny1_expected

from cembenders.benders import (
    BendersConfig, Cut, MasterState, build_planning_problem, candidate_cost,
    compute_upper_bound, planning_space, run_benders, solve_subproblem, write_run,
)
from cembenders.benders.report import TRACE_COLUMNS, read_trace
from cembenders.errors import SpecInvalid, SubproblemError
from cembenders.instance import generate_synthetic, preset
from cembenders.lpcore import relative_gap, solve_lp
from cembenders.reformulate import assemble_block_problem, assemble_monolithic


def monolithic_point(inst):
    bp = assemble_block_problem(inst)
    sol = solve_lp(assemble_monolithic(inst))
    ny, nz = bp.num_y, bp.num_z
    return bp, sol, sol.x[:ny], sol.x[ny:ny + nz]


def test_subproblem_recovers_monolithic_operating_cost():
    inst = tiny1()
    bp, sol, y, z = monolithic_point(inst)
    off = bp.num_y + bp.num_z
    b = bp.blocks[0]
    res = solve_subproblem(b, y[b.y_cols], z[b.z_cols])
    assert res.value == pytest.approx(float(b.c @ sol.x[off:off + b.num_x]), rel=1e-6)


def test_subproblem_without_capacity_serves_nothing():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    for b in bp.blocks:
        w = inst.subperiod(b.w)
        vcf = inst.period_of(b.w).variable_cost_factor
        demand = sum(sum(series) for series in w.demand.values())
        res = solve_subproblem(b, np.zeros(b.y_cols.size), np.zeros(b.z_cols.size))
        assert res.value == pytest.approx(demand * inst.penalties.nse_cost * vcf, rel=1e-9)


@pytest.mark.parametrize("w_index", [0, 1])
def test_cut_validity_at_random_points(w_index):
    bp = assemble_block_problem(tiny1())
    b = bp.blocks[w_index]
    (y0, z0), *rest = planning_points(bp, 11, seed=w_index)
    base = solve_subproblem(b, y0[b.y_cols], z0[b.z_cols])
    cut = Cut(b.w, 0, base.value, base.pi, base.lam, y0[b.y_cols], z0[b.z_cols])
    assert cut.evaluate(y0[b.y_cols], z0[b.z_cols]) == base.value
    for y, z in rest:
        g = solve_subproblem(b, y[b.y_cols], z[b.z_cols]).value
        assert g >= cut.evaluate(y[b.y_cols], z[b.z_cols]) - 1e-6


def test_subproblem_errors_name_the_subperiod():
    bp = assemble_block_problem(tiny1())
    b = bp.blocks[1]
    with pytest.raises(SubproblemError) as err:
        solve_subproblem(b, np.full(b.y_cols.size, np.nan), np.zeros(b.z_cols.size))
    assert err.value.subperiod == b.w
    with pytest.raises(SubproblemError):
        solve_subproblem(b, np.zeros(1), np.zeros(b.z_cols.size))


def test_upper_bound_replaces_incumbent_only_on_strict_improvement():
    bp = assemble_block_problem(tiny1())
    y = np.zeros(bp.num_y)
    z = np.zeros(bp.num_z)
    state = MasterState(U=100.0, y_star=np.ones(bp.num_y), z_star=np.ones(bp.num_z))
    w = [b.w for b in bp.blocks]
    weights = sum(b.weight for b in bp.blocks)
    compute_upper_bound(state, (y, z), {k: 100.0 / weights for k in w}, bp)
    assert state.U == pytest.approx(100.0)
    assert np.all(state.y_star == 1)
    compute_upper_bound(state, (y, z), {k: 95.0 / weights for k in w}, bp)
    assert state.U == pytest.approx(95.0)
    assert np.all(state.y_star == 0)


def test_exact_tie_retains_incumbent():
    bp = assemble_block_problem(tiny1())
    y = np.zeros(bp.num_y)
    z = np.zeros(bp.num_z)
    values = {b.w: 7.0 for b in bp.blocks}
    cand = candidate_cost(bp, y, values)
    state = MasterState(U=cand, y_star=np.ones(bp.num_y), z_star=np.ones(bp.num_z))
    compute_upper_bound(state, (y, z), values, bp)
    assert state.U == cand
    assert np.all(state.y_star == 1)


def test_empty_pool_planning_problem():
    bp = assemble_block_problem(tiny1())
    sol = solve_lp(build_planning_problem(MasterState(), bp))
    _, _, theta = planning_space(bp).split(sol.x)
    assert sol.objective == pytest.approx(tiny1_expected()["empty_cut_planning_objective"], abs=1e-9)
    assert np.all(theta == 0)


def test_one_cut_row_per_subperiod_after_one_iteration():
    res = run_benders(tiny1(), BendersConfig(max_iter=1))
    prob = build_planning_problem(res.state, res.bp)
    cut_rows = [n for n in prob.row_names if n.startswith("cut_")]
    assert sorted(cut_rows) == sorted(f"cut_w{b.w}_k0" for b in res.bp.blocks)
    assert res.status == "max_iter"


def test_cut_row_binds_at_anchor():
    res = run_benders(tiny1(), BendersConfig(max_iter=1))
    bp = res.bp
    cut = res.state.cuts[0]
    b = bp.block(cut.w)
    prob = build_planning_problem(res.state, bp)
    sp_ = planning_space(bp)
    x = np.zeros(sp_.n)
    x[b.y_cols] = cut.y_anchor
    x[bp.num_y + b.z_cols] = cut.z_anchor
    x[sp_.theta(cut.w)] = cut.value
    i = prob.row_names.index(f"cut_w{cut.w}_k0")
    assert prob.A[i] @ x == pytest.approx(prob.rhs[i], rel=1e-12, abs=1e-9)


def test_first_upper_bound_is_direct_evaluation():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    sol = solve_lp(build_planning_problem(MasterState(), bp))
    y, z, _ = planning_space(bp).split(sol.x)
    direct = float(bp.layout.f @ y) + sum(
        b.weight * solve_subproblem(b, y[b.y_cols], z[b.z_cols]).value for b in bp.blocks)
    res = run_benders(inst, BendersConfig(max_iter=1))
    assert res.trace[0].U == pytest.approx(direct, rel=1e-12)


def test_tiny_converges_to_oracle():
    res = run_benders(tiny1())
    assert res.converged
    assert res.gap <= 1e-3
    assert relative_gap(res.objective, oracle_value(("tiny1",))) <= 1e-3


def test_zero_demand_converges_immediately():
    inst = tiny1()
    periods = tuple(replace(p, subperiods=tuple(
        replace(w, demand={k: tuple(0.0 for _ in v) for k, v in w.demand.items()})
        for w in p.subperiods)) for p in inst.periods)
    inst = inst.replace(periods=periods)
    res = run_benders(inst)
    plan = solve_lp(build_planning_problem(MasterState(), res.bp))
    assert res.converged and res.iterations == 1
    assert res.objective == pytest.approx(res.lower)
    assert res.objective == pytest.approx(plan.objective, abs=1e-9)


def test_bounds_are_monotone_and_sandwich_the_oracle():
    res = run_benders(tiny1())
    opt = oracle_value(("tiny1",))
    U = [r.U for r in res.trace]
    L = [r.L for r in res.trace]
    assert all(b <= a for a, b in zip(U, U[1:]))
    assert all(b >= a - 1e-9 for a, b in zip(L, L[1:]))
    for u, lo in zip(U, L):
        assert lo <= opt * (1 + 1e-9) and opt <= u + 1e-6 * abs(u)


def test_config_validation():
    with pytest.raises(SpecInvalid, match=r"\(0, 1\)"):
        BendersConfig(alpha=1.5)
    with pytest.raises(SpecInvalid):
        BendersConfig(tol=0.0)
    with pytest.raises(SpecInvalid):
        run_benders(tiny1(), BendersConfig(kind="l2"))


def test_run_artifacts(tmp_path):
    res = run_benders(tiny1())
    paths = write_run(tmp_path, res)
    with open(paths["trace"]) as fh:
        header = next(csv.reader(fh))
    assert tuple(header) == TRACE_COLUMNS
    rows = read_trace(paths["trace"])
    assert len(rows) == res.iterations
    assert float(rows[-1]["U"]) == res.objective
    sol = paths["solution"].read_text().splitlines()
    assert sol[1] == f"objective,{res.objective!r}"
    assert len(sol) == 2 + res.bp.num_y + res.bp.num_z
    assert (tmp_path / "timings.csv").exists() and (tmp_path / "meta.json").exists()


@pytest.mark.slow
def test_small_seed11_converges():
    inst = generate_synthetic(preset("small"), 11)
    res = run_benders(inst, BendersConfig(max_iter=400))
    assert res.converged and res.gap <= 1e-3
    L = [r.L for r in res.trace]
    assert all(b >= a - 1e-9 for a, b in zip(L, L[1:]))
