import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neutralflow.errors import NetworkError
from neutralflow.network import (
    EdgeCoefficients,
    Profile,
    build_network,
    flow_exponents,
    line_graph_adjacency,
)
from neutralflow.operators import assemble_grid


def test_single_loop_incidence():
    net = build_network([(0, 0)], [[1.0]])
    assert net.n == 1 and net.m == 1
    assert net.inc_out.tolist() == [[1.0]]
    assert net.inc_in.tolist() == [[1.0]]


def test_two_cycle_valid():
    net = build_network([(0, 1), (1, 0)], [[1.0, 0.0], [0.0, 1.0]])
    assert net.tails == (0, 1) and net.heads == (1, 0)


def test_weight_out_of_range():
    with pytest.raises(NetworkError, match="outside"):
        build_network([(0, 0)], [[1.5]])


def test_weight_on_non_outgoing_slot():
    with pytest.raises(NetworkError, match="not the tail"):
        build_network([(0, 1), (1, 0)], [[0.5, 0.5], [0.5, 0.5]])


def test_kirchhoff_violation_names_vertex():
    with pytest.raises(NetworkError, match="vertex 1"):
        build_network([(0, 1), (1, 0)], [[1.0, 0.0], [0.0, 0.7]])


def test_disconnected_rejected_by_default():
    with pytest.raises(NetworkError, match="disconnected"):
        build_network([(0, 0), (1, 1)], [[1.0, 0.0], [0.0, 1.0]])


def test_disconnected_allowed_when_asked():
    net = build_network([(0, 0), (1, 1)], [[1.0, 0.0], [0.0, 1.0]], require_connected=False)
    assert net.m == 2


def test_line_graph_two_cycle():
    net = build_network([(0, 1), (1, 0)], [[1.0, 0.0], [0.0, 1.0]])
    assert line_graph_adjacency(net).tolist() == [[0.0, 1.0], [1.0, 0.0]]


@given(st.integers(2, 5), st.data())
@settings(max_examples=25, deadline=None)
def test_line_graph_columns_sum_to_one(n, data):
    # a random strongly-wired graph: each vertex gets >= 1 outgoing edge
    edges = []
    for v in range(n):
        kout = data.draw(st.integers(1, 3))
        for _ in range(kout):
            edges.append((v, data.draw(st.integers(0, n - 1))))
    m = len(edges)
    weights = np.zeros((n, m))
    for v in range(n):
        out = [j for j, (t, _) in enumerate(edges) if t == v]
        share = np.asarray(data.draw(st.lists(st.floats(0.1, 1.0), min_size=len(out), max_size=len(out))))
        weights[v, out] = share / share.sum()
    net = build_network(edges, weights, require_connected=False)
    cols = line_graph_adjacency(net).sum(axis=0)
    assert np.allclose(cols, 1.0, atol=1e-12)


def test_profile_piecewise_eval():
    p = Profile((0.0, 0.5, 1.0), ((1.0, 1.0), (2.0,)))
    x = np.array([0.1, 0.4, 0.6, 0.9])
    assert np.allclose(p(x), [1.1, 1.4, 2.0, 2.0])


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=6))
@settings(max_examples=50, deadline=None)
def test_profile_poly_matches_polyval(coeffs):
    p = Profile.poly(coeffs)
    x = np.linspace(0, 1, 17)
    assert np.allclose(p(x), np.polynomial.polynomial.polyval(x, coeffs), atol=1e-12)


def test_nonpositive_velocity_rejected():
    with pytest.raises(NetworkError, match="positive"):
        EdgeCoefficients((Profile.poly([1.0, -2.0]),), (Profile.constant(0.0),))


def test_flow_exponents_unit_coefficients(single_loop):
    net, coeffs, grid, exps = single_loop
    assert abs(exps.tau_total[0] - 1.0) < 1e-14
    assert abs(exps.xi_total[0]) < 1e-14
    # tau(x, 1) = 1 - x for c = 1
    assert np.allclose(exps.tau_to_one[0], 1.0 - grid.nodes, atol=1e-13)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=50, deadline=None)
def test_flow_exponent_additivity(single_loop_varying, a, b, c):
    _, _, _, exps = single_loop_varying
    x, y, z = sorted((a, b, c))
    lhs = exps.xi(0, x, y) + exps.xi(0, y, z)
    assert abs(lhs - exps.xi(0, x, z)) < 1e-11
    lhs_t = exps.tau(0, x, y) + exps.tau(0, y, z)
    assert abs(lhs_t - exps.tau(0, x, z)) < 1e-11


def test_travel_time_inversion(single_loop_varying):
    _, _, _, exps = single_loop_varying
    for s in np.linspace(0.0, float(exps.tau_total[0]), 9):
        x = exps.x_at_travel_time(0, s)
        assert abs(exps.tau(0, x) - s) < 1e-11


def test_flow_exponent_tables_match_series(single_loop_varying):
    _, _, grid, exps = single_loop_varying
    assert np.allclose(exps.xi_to_one[0], exps.xi(0, grid.nodes), atol=1e-11)
    assert np.allclose(exps.tau_to_one[0], exps.tau(0, grid.nodes), atol=1e-11)
