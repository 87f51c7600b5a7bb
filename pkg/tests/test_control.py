import numpy as np
import pytest

from neutralflow.control import (
    ControlConfig,
    aggregate_and_rank,
    choose_mu_samples,
    collect_samples,
    hautus_delay_free,
    lp_reduction_rank,
    rank_condition,
    reach_columns,
    witness_pairing,
)
from neutralflow.delays import DelayBank
from neutralflow.network import flow_exponents
from neutralflow.operators import assemble_grid, frequency_toolkit, theta_grid
from neutralflow.spectral import char_det, neutral_det

from conftest import atom_bank, boundary_config, empty_bank


def _analyze(net, coeffs, grid, exps, bank, config, count=40, seed=0):
    mus = choose_mu_samples(net, coeffs, exps, bank, count, seed=seed)
    samples = collect_samples(net, coeffs, exps, grid, bank, config, mus)
    return samples, aggregate_and_rank(grid, samples)


def test_zero_control_rank_zero(single_loop):
    net, coeffs, grid, exps = single_loop
    config = ControlConfig.constant(net.n, net.m)  # no channels at all
    config = ControlConfig(1, 0, np.zeros((net.n, 1)), (), ())
    samples, rep = _analyze(net, coeffs, grid, exps, empty_bank(net.m), config, count=8)
    assert rep.rank == 0 and rep.defect == 1.0
    assert rep.verdict != "controllable-at-grid"


def test_single_loop_boundary_controllable(single_loop):
    net, coeffs, grid, exps = single_loop
    samples, rep = _analyze(net, coeffs, grid, exps, empty_bank(1), boundary_config(net))
    assert rep.rank == grid.dim and rep.defect == 0.0
    assert rep.verdict == "controllable-at-grid"


def test_two_loops_defect_is_half(two_loops):
    net, coeffs, grid, exps = two_loops
    config = ControlConfig.constant(net.n, net.m, K=[[1.0], [0.0]], B0=[[1.0], [0.0]])
    samples, rep = _analyze(net, coeffs, grid, exps, empty_bank(2), config)
    assert rep.defect == 0.5
    assert rep.verdict == "defective"
    # the witness is supported on loop 2 and annihilates every column
    assert witness_pairing(grid, samples, rep.witness) <= 1e-10
    assert np.max(np.abs(rep.witness[: grid.N])) < 1e-6


def test_sample_line_avoids_singularities(single_loop):
    net, coeffs, grid, exps = single_loop
    bank = atom_bank(1, eta=(0.5, -1.0))
    mus = choose_mu_samples(net, coeffs, exps, bank, 24, seed=3)
    for mu in mus:
        assert abs(char_det(net, exps, mu)) > 1e-2
        assert abs(neutral_det(bank, mu)) > 1e-2


def test_sampling_is_deterministic(single_loop):
    net, coeffs, grid, exps = single_loop
    a = choose_mu_samples(net, coeffs, exps, empty_bank(1), 16, seed=5)
    b = choose_mu_samples(net, coeffs, exps, empty_bank(1), 16, seed=5)
    assert np.array_equal(a, b)


def test_reach_columns_shapes(single_loop):
    net, coeffs, grid, exps = single_loop
    config = ControlConfig.constant(net.n, net.m, K=[[1.0]], K0=[[1.0]])
    tk = frequency_toolkit(net, coeffs, exps, grid, 2.0 + 1.0j)
    s = reach_columns(tk, empty_bank(1), config)
    assert s.boundary.shape == (grid.dim, 1)
    assert s.distributed.shape == (grid.dim, 1)
    assert s.joint.shape == (grid.dim, 2)


def test_three_verdict_paths_agree_on_all_fixtures(single_loop, two_loops, two_cycle):
    cases = []
    net, coeffs, grid, exps = single_loop
    cases.append((single_loop, empty_bank(1), boundary_config(net)))
    cases.append((single_loop, atom_bank(1, eta=(0.4, -1.0)), boundary_config(net)))
    cases.append((single_loop, atom_bank(1, vartheta=(1.0, -0.5)), ControlConfig.constant(1, 1, K0=[[0.0]])))
    cases.append((single_loop, atom_bank(1, gamma=(0.3, -1.0)), boundary_config(net)))
    net2 = two_loops[0]
    cases.append((two_loops, empty_bank(2), ControlConfig.constant(net2.n, net2.m, K=[[1.0], [0.0]], B0=[[1.0], [0.0]])))
    cases.append((two_cycle, empty_bank(2), boundary_config(two_cycle[0])))
    for (net, coeffs, grid, exps), bank, config in cases:
        samples, rep = _analyze(net, coeffs, grid, exps, bank, config)
        svd_pass = rep.verdict == "controllable-at-grid"
        t4_pass, _ = rank_condition(grid, samples)
        lp_pass, _, _ = lp_reduction_rank(grid, theta_grid(bank.r, 8), samples)
        assert svd_pass == t4_pass == lp_pass


def test_rank_condition_detail_consistency(two_loops):
    net, coeffs, grid, exps = two_loops
    config = ControlConfig.constant(net.n, net.m, K=[[1.0], [0.0]], B0=[[1.0], [0.0]])
    samples, rep = _analyze(net, coeffs, grid, exps, empty_bank(2), config)
    passed, detail = rank_condition(grid, samples)
    # rank([B D]) = rank(B) + rank of the pairing against the complement
    assert rep.rank == detail["rank_boundary"] + detail["rank_pairing"]
    assert not passed


def test_hautus_agrees_with_svd_on_delay_free(single_loop, two_loops):
    net, coeffs, grid, exps = single_loop
    ok, failures = hautus_delay_free(net, coeffs, exps, grid, boundary_config(net))
    assert ok and not failures
    net2, coeffs2, grid2, exps2 = two_loops
    config = ControlConfig.constant(net2.n, net2.m, K=[[1.0], [0.0]], B0=[[1.0], [0.0]])
    ok2, failures2 = hautus_delay_free(net2, coeffs2, exps2, grid2, config)
    assert not ok2 and failures2


def test_control_config_materialization(single_loop):
    net, coeffs, grid, exps = single_loop
    config = ControlConfig.constant(net.n, net.m, K0=[[2.0]], B0=[[3.0]])
    assert np.allclose(config.K0_matrix(grid), 2.0)
    assert np.allclose(config.B0_matrix(grid), 3.0)
    assert config.n_v == 0 and config.n_u == 1
