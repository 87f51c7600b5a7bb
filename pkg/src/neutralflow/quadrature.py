"""Spatial and delay-line grids with spectrally accurate integration,
differentiation and endpoint-trace matrices.

The spatial grid is Gauss-Legendre on [0, 1] per edge; all matrices act on
nodal values through the interpolating polynomial, so integration /
differentiation are exact on polynomials up to the grid degree.  The delay
line [-r, 0] uses Chebyshev-Lobatto nodes (both endpoints present, one of
them theta = 0, which the history constraints need).
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import legendre as npleg


def gauss_rule(n):
    """Gauss-Legendre nodes/weights mapped to [0, 1]; weights sum to 1."""
    t, v = npleg.leggauss(n)
    return (t + 1.0) / 2.0, v / 2.0


def _legendre_analysis(t, v):
    """Nodal values -> Legendre coefficients, exact through degree n-1."""
    n = len(t)
    vander = npleg.legvander(t, n - 1)  # P_k(t_i)
    norm = (2.0 * np.arange(n) + 1.0) / 2.0
    return norm[:, None] * (vander * v[:, None]).T


def _legendre_int_matrix(n):
    """Coefficient-space antiderivative, shape (n+1, n)."""
    out = np.zeros((n + 1, n))
    for k in range(n):
        unit = np.zeros(n)
        unit[k] = 1.0
        out[:, k] = npleg.legint(unit)
    return out


def _legendre_der_matrix(n):
    out = np.zeros((max(n - 1, 1), n))
    for k in range(n):
        unit = np.zeros(n)
        unit[k] = 1.0
        d = npleg.legder(unit)
        out[: len(d), k] = d
    return out


@dataclass(frozen=True)
class SegmentRule:
    """Quadrature calculus for one reference interval [0, 1] with n nodes."""

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    cum_to_one: np.ndarray  # (C h)_i = int_{x_i}^{1} h, exact for deg < n
    cum_from_zero: np.ndarray  # (C h)_i = int_{0}^{x_i} h
    trace0: np.ndarray  # row: interpolant value at x = 0
    trace1: np.ndarray  # row: interpolant value at x = 1
    diff: np.ndarray  # nodal differentiation matrix

    @classmethod
    def build(cls, n):
        if n < 4:
            raise ValueError(f"need at least 4 nodes per edge, got {n}")
        x, w = gauss_rule(n)
        t = 2.0 * x - 1.0
        v = 2.0 * w
        analysis = _legendre_analysis(t, v)
        lint = _legendre_int_matrix(n)
        eval_all = npleg.legvander(t, n)  # (n, n+1)
        at_one = np.sum(lint, axis=0)  # P_k(1) = 1
        at_neg = ((-1.0) ** np.arange(n + 1)) @ lint
        cum_to_one = 0.5 * (at_one[None, :] - eval_all @ lint) @ analysis
        cum_from_zero = 0.5 * (eval_all @ lint - at_neg[None, :]) @ analysis
        trace1 = np.ones(n) @ analysis
        trace0 = ((-1.0) ** np.arange(n)) @ analysis
        lder = _legendre_der_matrix(n)
        diff = 2.0 * npleg.legvander(t, max(n - 2, 0)) @ lder @ analysis
        return cls(n, x, w, cum_to_one, cum_from_zero, trace0, trace1, diff)


_SEGMENT_CACHE: dict[int, SegmentRule] = {}


def segment_rule(n) -> SegmentRule:
    if n not in _SEGMENT_CACHE:
        _SEGMENT_CACHE[n] = SegmentRule.build(n)
    return _SEGMENT_CACHE[n]


@dataclass(frozen=True)
class ThetaRule:
    """Chebyshev-Lobatto calculus on [-r, 0].

    Node 0 is theta = 0 and node k-1 is theta = -r.  ``cum_to_zero`` maps
    nodal values g to int_{theta_a}^{0} g.
    """

    r: float
    k: int
    theta: np.ndarray
    weights: np.ndarray  # Clenshaw-Curtis weights for int_{-r}^{0}
    cum_to_zero: np.ndarray
    diff: np.ndarray
    _analysis: np.ndarray = field(repr=False, default=None)

    @classmethod
    def build(cls, r, n_theta):
        if n_theta < 4:
            raise ValueError(f"need at least 4 delay-line intervals, got {n_theta}")
        k = n_theta + 1
        s = np.cos(np.pi * np.arange(k) / n_theta)  # 1 .. -1
        theta = (s - 1.0) * r / 2.0  # 0 .. -r
        vander = npcheb.chebvander(s, k - 1)
        analysis = np.linalg.inv(vander)
        cint = np.zeros((k + 1, k))
        for j in range(k):
            unit = np.zeros(k)
            unit[j] = 1.0
            cint[:, j] = npcheb.chebint(unit)
        eval_all = npcheb.chebvander(s, k)
        at_one = np.sum(cint, axis=0)
        cum_to_zero = (r / 2.0) * (at_one[None, :] - eval_all @ cint) @ analysis
        weights = cum_to_zero[-1, :].copy()
        cder = np.zeros((k - 1, k))
        for j in range(k):
            unit = np.zeros(k)
            unit[j] = 1.0
            d = npcheb.chebder(unit)
            cder[: len(d), j] = d
        diff = (2.0 / r) * npcheb.chebvander(s, k - 2) @ cder @ analysis
        return cls(r, k, theta, weights, cum_to_zero, diff, analysis)

    def eval_row(self, theta_star):
        """Row vector interpolating nodal values at an off-grid theta."""
        s = 2.0 * theta_star / self.r + 1.0
        return npcheb.chebvander(np.atleast_1d(s), self.k - 1) @ self._analysis


_THETA_CACHE: dict[tuple, ThetaRule] = {}


def theta_rule(r, n_theta) -> ThetaRule:
    key = (float(r), int(n_theta))
    if key not in _THETA_CACHE:
        _THETA_CACHE[key] = ThetaRule.build(r, n_theta)
    return _THETA_CACHE[key]
