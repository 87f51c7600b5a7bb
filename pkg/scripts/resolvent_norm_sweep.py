#!/usr/bin/env python3
"""Sweep the coupled resolvent norm along vertical lines in the complex plane.

The norm blows up as the line approaches the characteristic roots on the
imaginary axis; the CSV shows the spikes sharpening as Re mu -> 0+.
"""

import csv
import pathlib
import sys

import numpy as np

from neutralflow.network import EdgeCoefficients, build_network, flow_exponents
from neutralflow.operators import assemble_grid
from neutralflow.spectral import resolvent_norm_sweep

OUT = pathlib.Path("out/resolvent_norm_sweep.csv")


def run():
    net = build_network([(0, 0)], [[1.0]])
    coeffs = EdgeCoefficients.constant(1)
    grid = assemble_grid(1, 24)
    exps = flow_exponents(net, coeffs, grid)
    ims = np.linspace(-8.0, 8.0, 321)
    res = np.arange(0.05, 0.55, 0.05)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "norm"])
        for re in res:
            norms = resolvent_norm_sweep(net, coeffs, exps, grid, re + 1j * ims)
            for im, nrm in zip(ims, norms):
                w.writerow([f"{re:.17g}", f"{im:.17g}", f"{nrm:.17g}"])
            peak = ims[int(np.argmax(norms))]
            print(f"Re mu = {re:4.2f}: max norm {np.max(norms):10.3e} at Im mu = {peak:+.3f}")
    print(f"wrote {OUT}")
    return 0


if __name__ == "__main__":
    sys.exit(run())
