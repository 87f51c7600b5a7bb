import numpy as np
import pytest

from neutralflow.control import ControlConfig
from neutralflow.delays import DelayBank, DelayMeasure
from neutralflow.network import (
    EdgeCoefficients,
    Profile,
    build_network,
    flow_exponents,
)
from neutralflow.operators import assemble_grid


@pytest.fixture(scope="session")
def single_loop():
    """One vertex, one self-edge, c = 1, q = 0."""
    net = build_network([(0, 0)], [[1.0]])
    coeffs = EdgeCoefficients.constant(1)
    grid = assemble_grid(1, 16)
    exps = flow_exponents(net, coeffs, grid)
    return net, coeffs, grid, exps


@pytest.fixture(scope="session")
def single_loop_varying():
    """One self-edge with genuinely x-dependent velocity and absorption."""
    net = build_network([(0, 0)], [[1.0]])
    coeffs = EdgeCoefficients(
        (Profile.poly([1.0, 0.5]),),
        (Profile.poly([0.2, -0.4, 0.1]),),
    )
    grid = assemble_grid(1, 32)
    exps = flow_exponents(net, coeffs, grid)
    return net, coeffs, grid, exps


@pytest.fixture(scope="session")
def two_loops():
    """Two disjoint self-loops: the canonical non-controllable graph."""
    net = build_network(
        [(0, 0), (1, 1)], [[1.0, 0.0], [0.0, 1.0]], require_connected=False
    )
    coeffs = EdgeCoefficients.constant(2)
    grid = assemble_grid(2, 16)
    exps = flow_exponents(net, coeffs, grid)
    return net, coeffs, grid, exps


@pytest.fixture(scope="session")
def two_cycle():
    """v0 -> v1 -> v0, unit coefficients."""
    net = build_network([(0, 1), (1, 0)], [[1.0, 0.0], [0.0, 1.0]])
    coeffs = EdgeCoefficients.constant(2)
    grid = assemble_grid(2, 16)
    exps = flow_exponents(net, coeffs, grid)
    return net, coeffs, grid, exps


def empty_bank(m, n_u=1, r=1.0):
    return DelayBank.empty(r, m, n_u)


def atom_bank(m, *, eta=None, gamma=None, vartheta=None, nu=None, n_u=1, r=1.0):
    """Bank with a single atom in the chosen slots (value, theta) per slot."""

    def state(spec):
        if spec is None:
            return DelayMeasure.zero(r, (m, m))
        value, theta = spec
        return DelayMeasure.single_atom(r, theta, value * np.eye(m))

    def inp(spec):
        if spec is None:
            return DelayMeasure.zero(r, (m, n_u))
        value, theta = spec
        return DelayMeasure.single_atom(r, theta, value * np.ones((m, n_u)))

    return DelayBank(state(eta), state(gamma), inp(vartheta), inp(nu))


def boundary_config(net, column=0):
    K = np.zeros((net.n, 1))
    K[column, 0] = 1.0
    return ControlConfig.boundary_only(K, net.m)
