from dataclasses import replace

import numpy as np
import pytest
from conftest import DESK_SEEDS, desk, tiny1, tiny1_expected
from hypothesis import given
from hypothesis import strategies as st

from cembenders.instance import (
    CO2_CAP, MDS_STORAGE, SHORT_STORAGE, THERMAL, GeneratorSpec, generate_synthetic, preset,
)
from cembenders.lpcore import EQ, solve_lp
from cembenders.reformulate import (
    CHAINED, assemble_block_problem, assemble_monolithic, build_operational_block,
    policy_budget, stack_blocks,
)


def row(block, name):
    i = block.row_names.index(name)
    A, B, Q = block.A.csr[i], block.B.csr[i], block.Q.csr[i]
    out = {block.x_names[j]: v for j, v in zip(A.indices, A.data)}
    out.update({f"y:{j}": v for j, v in zip(B.indices, B.data)})
    out.update({f"z:{block.z_cols[j]}": v for j, v in zip(Q.indices, Q.data)})
    return out, block.senses[i], block.b[i]


def test_column_count_matches_fixture():
    exp = tiny1_expected()
    bp = assemble_block_problem(tiny1())
    assert bp.num_y == exp["num_y"]
    assert bp.num_z == exp["num_z"]
    assert stack_blocks(bp).num_cols == exp["decomposed_columns"]
    assert assemble_monolithic(tiny1(), CHAINED).num_cols == exp["chained_columns"]


def test_mds_first_hour_row_uses_retention_on_start_boundary():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    b = bp.blocks[0]
    g = next(r for r in inst.resources if r.kind == MDS_STORAGE)
    coefs, sense, _ = row(b, f"w{b.w}_soc_{g.id}_0")
    z = bp.layout.z_index[("z_start", g.id, b.w)]
    assert sense == EQ
    assert abs(coefs[f"z:{z}"]) == pytest.approx(1 - g.eta_self)


def test_unit_efficiency_state_rows():
    inst = tiny1()
    res = tuple(replace(r, eta_self=0.0, eta_charge=1.0, eta_discharge=1.0)
                if r.kind == MDS_STORAGE else r for r in inst.resources)
    inst = inst.replace(resources=res)
    g = next(r for r in inst.resources if r.kind == MDS_STORAGE).id
    b = build_operational_block(inst, 1)
    for t in range(1, 4):
        coefs, sense, rhs = row(b, f"w1_soc_{g}_{t}")
        expected = {f"w1_x_soc_{g}_{t}": 1.0, f"w1_x_soc_{g}_{t - 1}": -1.0,
                    f"w1_x_c_{g}_{t}": -1.0, f"w1_x_d_{g}_{t}": 1.0}
        assert coefs == pytest.approx(expected)
        assert (sense, rhs) == (EQ, 0.0)


def test_emission_row_coefficients():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    b = bp.blocks[0]
    q = next(p for p in inst.policies if p.kind == CO2_CAP)
    gas = next(r for r in inst.resources if r.kind == THERMAL)
    coefs, _, rhs = row(b, f"w{b.w}_policy_{q.id}")
    zb = bp.layout.z_index[("z_b", q.id, b.w)]
    for t in range(4):
        assert coefs[f"w{b.w}_x_d_{gas.id}_{t}"] == pytest.approx(gas.co2_rate)
    assert coefs[f"z:{zb}"] == -1.0
    assert rhs == 0.0


def test_coupling_rows_for_two_subperiods():
    bp = assemble_block_problem(tiny1())
    pr = bp.planning
    names = [pr.names[i] for i in pr.select("coupling")]
    assert sum("_chain_" in n or "_wrap_" in n for n in names) == 2
    assert sum("_budget_" in n for n in names) == 1


def test_chain_and_wrap_for_three_subperiods():
    spec = GeneratorSpec(subperiods=3)
    bp = assemble_block_problem(generate_synthetic(spec, 3))
    pr = bp.planning
    lay = bp.layout
    pairs = []
    for i in pr.select("coupling"):
        if "_chain_" in pr.names[i] or "_wrap_" in pr.names[i]:
            cols = pr.Z.csr[i]
            ends = {lay.z_keys[j][0]: lay.z_keys[j][2] for j in cols.indices}
            pairs.append((ends["z_end"], ends["z_start"]))
    assert sorted(pairs) == [(1, 2), (2, 3), (3, 1)]


def test_budget_rhs_is_policy_cap():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    q = next(p for p in inst.policies if p.kind == CO2_CAP)
    i = bp.planning.names.index(f"p0_{inst.scenarios[0].id}_budget_{q.id}")
    assert bp.planning.rhs[i] == q.target
    assert policy_budget(inst, q, 0, inst.scenarios[0].id) == q.target


def test_short_storage_cyclic_closure():
    inst = desk(1)
    g = next(r for r in inst.resources if r.kind == SHORT_STORAGE).id
    b = assemble_block_problem(inst).blocks[0]
    H = inst.subperiod(b.w).hours
    coefs, _, _ = row(b, f"w{b.w}_soc_{g}_0")
    assert f"w{b.w}_x_soc_{g}_{H - 1}" in coefs


def test_digest_is_deterministic():
    a = assemble_block_problem(generate_synthetic(preset("tiny"), 7))
    b = assemble_block_problem(generate_synthetic(preset("tiny"), 7))
    assert a.digest() == b.digest()


def test_catalog_is_complete():
    inst = tiny1()
    bp = assemble_block_problem(inst)
    g = next(r for r in inst.resources if r.kind == MDS_STORAGE).id
    for b in bp.blocks:
        for t in range(inst.subperiod(b.w).hours):
            for sym in ("x_soc", "x_c", "x_d"):
                bp.column(sym, g, (b.w, t))
        for sym in ("z_start", "z_end"):
            bp.column(sym, g, b.w)
        bp.column("z_b", "co2", b.w)


def test_block_separability():
    bp = assemble_block_problem(desk(2))
    A = stack_blocks(bp).A.tocsr()
    n_plan = bp.num_y + bp.num_z
    owner = np.concatenate([np.full(n_plan, -1)] + [np.full(b.num_x, i)
                                                    for i, b in enumerate(bp.blocks)])
    for i in range(bp.planning.senses.size, A.shape[0]):
        blocks = {owner[j] for j in A.indices[A.indptr[i]:A.indptr[i + 1]]} - {-1}
        assert len(blocks) == 1


def test_objective_weights_are_probability_times_cost():
    bp = assemble_block_problem(desk(3))
    p = stack_blocks(bp)
    off = bp.num_y + bp.num_z
    for b in bp.blocks:
        np.testing.assert_array_equal(p.c[off:off + b.num_x], b.weight * b.c)
        off += b.num_x


def test_equivalence_on_tiny():
    exp = tiny1_expected()
    dec = solve_lp(assemble_monolithic(tiny1())).objective
    chn = solve_lp(assemble_monolithic(tiny1(), CHAINED)).objective
    assert dec == pytest.approx(chn, rel=1e-9)
    assert dec == pytest.approx(exp["monolithic_objective"], rel=1e-9)


def test_without_mds_only_budget_columns_differ():
    inst = tiny1()
    inst = inst.replace(resources=tuple(r for r in inst.resources if r.kind != MDS_STORAGE))
    dec = assemble_monolithic(inst)
    chn = assemble_monolithic(inst, CHAINED)
    extra_dec = set(dec.col_names) - set(chn.col_names)
    extra_chn = set(chn.col_names) - set(dec.col_names)
    assert all("_z_b_" in n or "_s_policy_" in n for n in extra_dec)
    assert all("_s_policy_" in n for n in extra_chn)
    assert solve_lp(dec).objective == pytest.approx(solve_lp(chn).objective, rel=1e-9)


@pytest.mark.parametrize("seed", DESK_SEEDS)
def test_equivalence_on_desk_instances(seed):
    dec = solve_lp(assemble_monolithic(desk(seed))).objective
    chn = solve_lp(assemble_monolithic(desk(seed), CHAINED)).objective
    assert dec == pytest.approx(chn, rel=1e-9)


@given(st.integers(0, 10_000), st.booleans(), st.sampled_from([None, 0.3]))
def test_equivalence_property(seed, wrap, share):
    spec = replace(preset("tiny"), subperiods=3, scenarios=2, min_share=share)
    inst = generate_synthetic(spec, seed).replace(mds_wrap=wrap)
    dec = solve_lp(assemble_monolithic(inst)).objective
    chn = solve_lp(assemble_monolithic(inst, CHAINED)).objective
    assert dec == pytest.approx(chn, rel=1e-9)


@pytest.mark.slow
def test_equivalence_on_small_seed11():
    inst = generate_synthetic(preset("small"), 11)
    dec = solve_lp(assemble_monolithic(inst)).objective
    chn = solve_lp(assemble_monolithic(inst, CHAINED)).objective
    assert dec == pytest.approx(chn, rel=1e-9)
