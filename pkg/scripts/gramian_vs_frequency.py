#!/usr/bin/env python3
"""Cross-validate the frequency-domain reachability span against a
time-domain empirical Gramian on the boundary-controlled unit loop.

Prints singular values of both constructions and the principal angles
between their spans.
"""

import sys

import numpy as np

from neutralflow.control import aggregate_and_rank, choose_mu_samples, collect_samples
from neutralflow.delays import DelayBank
from neutralflow.network import EdgeCoefficients, build_network, flow_exponents
from neutralflow.operators import assemble_grid
from neutralflow.sim import ControlSignal, empirical_gramian, gramian_rank, principal_angles


def run():
    net = build_network([(0, 0)], [[1.0]])
    coeffs = EdgeCoefficients.constant(1)
    grid = assemble_grid(1, 16)
    exps = flow_exponents(net, coeffs, grid)
    bank = DelayBank.empty(1.0, 1, 1)
    K = np.array([[1.0]])
    from neutralflow.control import ControlConfig

    config = ControlConfig.boundary_only(K, net.m)

    mus = choose_mu_samples(net, coeffs, exps, bank, 40, seed=0)
    samples = collect_samples(net, coeffs, exps, grid, bank, config, mus)
    rep = aggregate_and_rank(grid, samples)
    print(f"frequency span: rank {rep.rank}/{rep.dim}, verdict {rep.verdict}")

    probes = [
        ControlSignal.boundary(
            config, lambda t, k=k: np.array([np.polynomial.legendre.Legendre.basis(k)(t - 1.0)])
        )
        for k in range(24)
    ]
    _, sv, U = empirical_gramian(net, coeffs, exps, bank, config, grid, dt=0.02, T=2.0, probes=probes)
    grank = gramian_rank(sv)
    print(f"empirical gramian: rank {grank}/{grid.dim}")
    print("gramian singular values:", np.array2string(sv[:8], precision=3))

    cols = np.hstack([s.joint for s in samples])
    angles = principal_angles(grid, cols, U[:, :grank])
    print(f"max principal angle between spans: {np.max(angles):.3e} rad")
    return 0


if __name__ == "__main__":
    sys.exit(run())
