import numpy as np
import pytest

from neutralflow.delays import DelayBank, DelayMeasure
from neutralflow.spectral import (
    char_det,
    count_roots,
    neutral_det,
    polish_root,
    resolvent_norm_sweep,
)
from neutralflow.errors import RootPolishDiverged


def _match(found, expected):
    used = set()
    worst = 0.0
    assert len(found) == len(expected)
    for e in expected:
        best = min((i for i in range(len(found)) if i not in used), key=lambda i: abs(found[i] - e))
        used.add(best)
        worst = max(worst, abs(found[best] - e))
    return worst


def test_char_det_single_loop(single_loop):
    net, _, _, exps = single_loop
    assert abs(char_det(net, exps, 0.0)) < 1e-14
    assert abs(char_det(net, exps, 1.0) - (1 - np.exp(-1))) < 1e-14


def test_loop_spectral_lattice(single_loop):
    net, _, _, exps = single_loop
    rep = count_roots(lambda mu: char_det(net, exps, mu), (-1, 1, -7, 7))
    assert rep.count == 3
    assert _match(rep.roots, [0.0, 2j * np.pi, -2j * np.pi]) < 1e-10
    assert max(abs(char_det(net, exps, z)) for z in rep.roots) <= 1e-10


def test_neutral_lattice():
    d = 0.5
    bank = DelayBank(
        DelayMeasure.single_atom(1.0, -1.0, [[d]]),
        DelayMeasure.zero(1.0, (1, 1)),
        DelayMeasure.zero(1.0, (1, 1)),
        DelayMeasure.zero(1.0, (1, 1)),
    )
    rep = count_roots(lambda mu: neutral_det(bank, mu), (-2, 1, -7, 7))
    expected = [np.log(d) + 2j * np.pi * k for k in (-1, 0, 1)]
    assert rep.count == 3
    assert _match(rep.roots, expected) < 1e-8


def test_empty_box(single_loop):
    net, _, _, exps = single_loop
    rep = count_roots(lambda mu: char_det(net, exps, mu), (0.5, 1.5, 1.0, 3.0))
    assert rep.count == 0 and rep.roots == []


def test_double_root_multiplicity():
    rep = count_roots(lambda z: (z - 0.3) ** 2 * (z + 1j), (-1, 1, -2, 2))
    assert rep.count == 3
    near = sorted(rep.roots, key=lambda z: abs(z - 0.3))[:2]
    assert near[0] == near[1]  # reported with multiplicity
    assert abs(near[0] - 0.3) < 1e-4


def test_polish_root_simple():
    z = polish_root(lambda z: z * z - 2.0, 1.3)
    assert abs(z - np.sqrt(2)) < 1e-9


def test_polish_root_diverges():
    with pytest.raises(RootPolishDiverged):
        polish_root(lambda z: np.exp(z) + 3.0 + 0j * z, 100.0, max_iter=5)


def test_resolvent_norm_spikes_near_root(single_loop):
    net, coeffs, grid, exps = single_loop
    mus = [1e-4, 0.5]
    norms = resolvent_norm_sweep(net, coeffs, exps, grid, mus)
    assert norms[0] > 100 * norms[1]
    sing = resolvent_norm_sweep(net, coeffs, exps, grid, [0.0])
    assert np.isinf(sing[0])
