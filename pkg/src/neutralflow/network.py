"""Directed metric graph, incidence/weight matrices and per-edge transport
coefficients, plus the cumulative flow-exponent tables used by every
frequency-domain kernel.

Conventions: edge j runs from its tail vertex e_j(1) (the x = 1 endpoint)
to its head vertex e_j(0); material flows from x = 1 towards x = 0.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from scipy.optimize import brentq

from .errors import NetworkError
from .quadrature import segment_rule

KIRCHHOFF_TOL = 1e-12


@dataclass(frozen=True)
class Profile:
    """Piecewise-polynomial coefficient profile on [0, 1].

    ``breaks`` has len(pieces)+1 entries starting at 0 and ending at 1;
    each piece is an ascending-power coefficient array evaluated in the
    global coordinate.  A plain polynomial is a single piece.
    """

    breaks: tuple
    pieces: tuple

    @classmethod
    def poly(cls, coeffs):
        return cls((0.0, 1.0), (tuple(float(c) for c in coeffs),))

    @classmethod
    def constant(cls, value):
        return cls.poly([value])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        edges = np.asarray(self.breaks)
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(self.pieces) - 1)
        for p, coeffs in enumerate(self.pieces):
            mask = idx == p
            if np.any(mask):
                out[mask] = np.polynomial.polynomial.polyval(x[mask], coeffs)
        return out

    @property
    def is_smooth(self):
        return len(self.pieces) == 1


@dataclass(frozen=True)
class Network:
    n: int
    m: int
    tails: tuple  # tail vertex per edge (the x = 1 endpoint)
    heads: tuple  # head vertex per edge (the x = 0 endpoint)
    inc_out: np.ndarray  # n x m, 1 where vertex is the tail of the edge
    inc_in: np.ndarray  # n x m, 1 where vertex is the head of the edge
    weights: np.ndarray  # n x m outgoing Kirchhoff weights

    def out_edges(self, vertex):
        return [j for j in range(self.m) if self.tails[j] == vertex]

    def in_edges(self, vertex):
        return [j for j in range(self.m) if self.heads[j] == vertex]


def build_network(edge_list, weights, require_connected=True) -> Network:
    """Validate and assemble a Network from (tail, head) pairs and the n x m
    outgoing weight matrix.

    ``require_connected=False`` admits disconnected graphs; the analysis
    fixtures use disjoint unions deliberately (they are the canonical
    non-controllable examples).
    """
    edge_list = [(int(t), int(h)) for t, h in edge_list]
    m = len(edge_list)
    if m == 0:
        raise NetworkError("graph needs at least one edge")
    weights = np.asarray(weights, dtype=float)
    n = weights.shape[0]
    if weights.shape != (n, m):
        raise NetworkError(f"weights must be n x m = {n} x {m}, got {weights.shape}")
    for j, (t, h) in enumerate(edge_list):
        if not (0 <= t < n and 0 <= h < n):
            raise NetworkError(f"edge {j}: vertex index out of range [0, {n})")
    if np.any(weights < 0) or np.any(weights > 1):
        bad = np.argwhere((weights < 0) | (weights > 1))[0]
        raise NetworkError(f"weight[{bad[0]},{bad[1]}] outside [0, 1]")

    tails = tuple(t for t, _ in edge_list)
    heads = tuple(h for _, h in edge_list)
    inc_out = np.zeros((n, m))
    inc_in = np.zeros((n, m))
    for j in range(m):
        inc_out[tails[j], j] = 1.0
        inc_in[heads[j], j] = 1.0

    misplaced = (weights != 0) & (inc_out == 0)
    if np.any(misplaced):
        i, j = np.argwhere(misplaced)[0]
        raise NetworkError(f"weight[{i},{j}] nonzero but vertex {i} is not the tail of edge {j}")

    row_sums = weights.sum(axis=1)
    bad_rows = [i for i in range(n) if abs(row_sums[i] - 1.0) > KIRCHHOFF_TOL]
    if bad_rows:
        detail = ", ".join(f"vertex {i}: sum={row_sums[i]:.15g}" for i in bad_rows)
        raise NetworkError(f"Kirchhoff violation ({detail})")

    if require_connected and not _connected(n, edge_list):
        raise NetworkError("graph is disconnected (pass require_connected=False to allow)")

    return Network(n, m, tails, heads, inc_out, inc_in, weights)


def _connected(n, edge_list):
    adj = [[] for _ in range(n)]
    for t, h in edge_list:
        adj[t].append(h)
        adj[h].append(t)
    seen = {0}
    stack = [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def line_graph_adjacency(net: Network) -> np.ndarray:
    """m x m edge-to-edge coupling matrix weights^T @ inc_in.

    Entry (j, k) is the fraction of the flux arriving at edge k's head that
    enters edge j; Kirchhoff makes every column sum to one."""
    return net.weights.T @ net.inc_in


@dataclass(frozen=True)
class EdgeCoefficients:
    """Per-edge velocity c_j > 0 and absorption q_j profiles."""

    c: tuple  # of Profile
    q: tuple  # of Profile

    def __post_init__(self):
        if len(self.c) != len(self.q):
            raise NetworkError("c and q profile counts differ")
        xs = np.linspace(0.0, 1.0, 257)
        for j, prof in enumerate(self.c):
            vals = prof(xs)
            if not np.all(np.isfinite(vals)) or np.min(vals) <= 0:
                raise NetworkError(f"velocity profile on edge {j} is not strictly positive")
        for j, prof in enumerate(self.q):
            if not np.all(np.isfinite(prof(xs))):
                raise NetworkError(f"absorption profile on edge {j} is not finite")

    @classmethod
    def constant(cls, m, c=1.0, q=0.0):
        return cls(
            tuple(Profile.constant(c) for _ in range(m)),
            tuple(Profile.constant(q) for _ in range(m)),
        )


_FIT_DEGREE = 96


def _cheb_antiderivative(fun):
    """Chebyshev series of int_x^1 fun(s) ds on [0, 1]."""
    s = np.cos(np.pi * np.arange(_FIT_DEGREE + 1) / _FIT_DEGREE)
    x = (s + 1.0) / 2.0
    coeffs = np.linalg.solve(npcheb.chebvander(s, _FIT_DEGREE), fun(x))
    anti = npcheb.chebint(coeffs) * 0.5  # d x = ds / 2
    # F(x) = int_x^1 = A(1) - A(s(x))
    const = npcheb.chebval(1.0, anti)
    anti = -anti
    anti[0] += const
    return anti


@dataclass(frozen=True)
class FlowExponents:
    """Cumulative transport integrals per edge.

    ``xi_to_one[j]`` holds int_x^1 q_j/c_j at the grid nodes and
    ``tau_to_one[j]`` holds the travel time int_x^1 1/c_j; differences of the
    cumulative tables give the two-point values, so additivity over
    concatenated intervals is exact by construction.
    """

    xi_to_one: tuple  # nodal tables, one array per edge
    tau_to_one: tuple
    xi_total: np.ndarray  # xi_j(0, 1)
    tau_total: np.ndarray  # tau_j(0, 1)
    _xi_series: tuple  # chebyshev series of int_x^1 q/c, for off-grid use
    _tau_series: tuple

    def xi(self, j, x, y=1.0):
        """xi_j(x, y) = int_x^y q_j/c_j for x <= y."""
        fx = npcheb.chebval(2.0 * np.asarray(x) - 1.0, self._xi_series[j])
        fy = npcheb.chebval(2.0 * np.asarray(y) - 1.0, self._xi_series[j])
        return fx - fy

    def tau(self, j, x, y=1.0):
        fx = npcheb.chebval(2.0 * np.asarray(x) - 1.0, self._tau_series[j])
        fy = npcheb.chebval(2.0 * np.asarray(y) - 1.0, self._tau_series[j])
        return fx - fy

    def x_at_travel_time(self, j, s):
        """Invert tau_j(x, 1) = s for x (s in [0, tau_total_j])."""
        if s <= 0:
            return 1.0
        total = float(self.tau_total[j])
        if s >= total:
            if s > total + 1e-9:
                raise ValueError(f"travel time {s} exceeds edge total {total}")
            return 0.0
        return brentq(lambda x: float(self.tau(j, x)) - s, 0.0, 1.0, xtol=1e-14)


def flow_exponents(net: Network, coeffs: EdgeCoefficients, grid) -> FlowExponents:
    """Tabulate the flow exponents on the grid nodes (spectral cumulative
    quadrature) and fit off-grid evaluators."""
    rule = segment_rule(grid.N)
    xi_tabs, tau_tabs, xi_tot, tau_tot = [], [], [], []
    xi_series, tau_series = [], []
    for j in range(net.m):
        c = coeffs.c[j](rule.nodes)
        if np.min(c) <= 0:
            raise NetworkError(f"non-positive velocity sample on edge {j}")
        q = coeffs.q[j](rule.nodes)
        xi_tabs.append(rule.cum_to_one @ (q / c))
        tau_tabs.append(rule.cum_to_one @ (1.0 / c))
        xi_tot.append(float(rule.weights @ (q / c)))
        tau_tot.append(float(rule.weights @ (1.0 / c)))
        xi_series.append(_cheb_antiderivative(lambda x, j=j: coeffs.q[j](x) / coeffs.c[j](x)))
        tau_series.append(_cheb_antiderivative(lambda x, j=j: 1.0 / coeffs.c[j](x)))
    return FlowExponents(
        tuple(xi_tabs),
        tuple(tau_tabs),
        np.array(xi_tot),
        np.array(tau_tot),
        tuple(xi_series),
        tuple(tau_series),
    )
