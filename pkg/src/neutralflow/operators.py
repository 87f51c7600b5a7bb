"""Frequency-dependent operators of the boundary-coupled transport system,
discretized on per-edge Gauss-Legendre grids.

State vectors are edge-major: entry j*N + i is edge j at node i.  Delay-line
profiles are theta-major: block a (size m*N or n_u) holds the value at the
a-th Chebyshev node of [-r, 0], node 0 being theta = 0.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .delays import DelayBank, symbol
from .errors import (
    CharacteristicSingularity,
    DelayCharacteristicSingularity,
    NeutralSingularity,
)
from .network import EdgeCoefficients, FlowExponents, Network
from .quadrature import SegmentRule, ThetaRule, segment_rule, theta_rule

DET_SINGULAR_TOL = 1e-12

ThetaGrid = ThetaRule


@dataclass(frozen=True)
class Grid:
    """Per-edge Gauss-Legendre discretization of the state space."""

    m: int
    N: int
    rule: SegmentRule = field(repr=False)

    @property
    def dim(self):
        return self.m * self.N

    @property
    def nodes(self):
        return self.rule.nodes

    @property
    def edge_weights(self):
        return self.rule.weights

    @property
    def weights(self):
        """Quadrature weights for the full edge-major state vector."""
        return np.tile(self.rule.weights, self.m)

    def inner(self, f, g):
        """Discrete L^2 inner product (conjugate-linear in the second slot)."""
        return np.sum(self.weights * np.asarray(f) * np.conj(np.asarray(g)))

    def norm(self, f):
        return float(np.sqrt(np.sum(self.weights * np.abs(np.asarray(f)) ** 2).real))


def assemble_grid(m, N) -> Grid:
    return Grid(m, N, segment_rule(N))


def theta_grid(r, n_theta) -> ThetaGrid:
    return theta_rule(r, n_theta)


def _edge_exponential(exps: FlowExponents, j, mu):
    """Nodal values of exp(xi_j(x,1) - mu tau_j(x,1))."""
    return np.exp(exps.xi_to_one[j] - mu * exps.tau_to_one[j])


def resolvent_free(net: Network, coeffs: EdgeCoefficients, exps: FlowExponents, grid: Grid, mu):
    """Resolvent of the transport generator with absorbing boundary f(1) = 0.

    Per edge, (R f)(x) = int_x^1 exp(xi(x,y) - mu tau(x,y)) f(y)/c(y) dy; the
    kernel factors as E(x)/E(y) with E the edge exponential, so the matrix is
    a diagonal conjugation of the spectral cumulative-integral operator.
    Entire in mu (Volterra structure)."""
    mu = complex(mu)
    rule = grid.rule
    out = np.zeros((grid.dim, grid.dim), dtype=complex)
    for j in range(net.m):
        e = _edge_exponential(exps, j, mu)
        c = coeffs.c[j](rule.nodes)
        block = (e[:, None] * rule.cum_to_one) * (1.0 / (c * e))[None, :]
        sl = slice(j * grid.N, (j + 1) * grid.N)
        out[sl, sl] = block
    return out


def boundary_lift(net: Network):
    """m x n lifting of vertex data onto edge endpoints at x = 1: edge j
    receives weight w[tail(j), j] times the tail-vertex value."""
    lift = np.zeros((net.m, net.n))
    for j in range(net.m):
        lift[j, net.tails[j]] = net.weights[net.tails[j], j]
    return lift


def dirichlet(net: Network, coeffs: EdgeCoefficients, exps: FlowExponents, grid: Grid, mu):
    """mN x n Dirichlet operator: lift vertex data through the outgoing
    weights, then propagate along each edge with the flow exponential."""
    mu = complex(mu)
    lift = boundary_lift(net)
    out = np.zeros((grid.dim, net.n), dtype=complex)
    for j in range(net.m):
        e = _edge_exponential(exps, j, mu)
        out[j * grid.N : (j + 1) * grid.N, :] = np.outer(e, lift[j, :])
    return out


def boundary_trace_in(net: Network, grid: Grid):
    """n x mN incoming vertex trace: sum of f_j(0) over edges with head i."""
    out = np.zeros((net.n, grid.dim))
    for j in range(net.m):
        out[net.heads[j], j * grid.N : (j + 1) * grid.N] += grid.rule.trace0
    return out


def read_boundary(net: Network, grid: Grid, f):
    """Recover the vertex datum v from the x = 1 trace of f through the
    outgoing-weight lifting (least squares; exact on the lifted range)."""
    f = np.asarray(f).reshape(net.m, grid.N)
    f1 = f @ grid.rule.trace1
    lift = boundary_lift(net)
    v, *_ = np.linalg.lstsq(lift.astype(complex), f1, rcond=None)
    return v


def char_matrix(net: Network, exps: FlowExponents, mu):
    """n x n boundary characteristic matrix: entry (head, tail) accumulates
    w[tail, j] exp(xi_j(0,1) - mu tau_j(0,1)) over the edges j joining them.
    Its eigenvalue 1 marks spectrum of the boundary-coupled generator."""
    mu = complex(mu)
    out = np.zeros((net.n, net.n), dtype=complex)
    for j in range(net.m):
        out[net.heads[j], net.tails[j]] += net.weights[net.tails[j], j] * np.exp(
            exps.xi_total[j] - mu * exps.tau_total[j]
        )
    return out


@dataclass
class FrequencyToolkit:
    """All mu-dependent graph-level operators for a single frequency."""

    net: Network
    coeffs: EdgeCoefficients
    exps: FlowExponents
    grid: Grid
    mu: complex
    coupled: bool
    R_A: np.ndarray
    Dmu: np.ndarray
    Mtrace: np.ndarray
    Amu: np.ndarray
    det_char: complex
    R_AGM: np.ndarray | None

    @property
    def singular(self):
        return self.R_AGM is None

    def diagnostics(self):
        d = {
            "mu": [self.mu.real, self.mu.imag],
            "det_boundary_char": [self.det_char.real, self.det_char.imag],
            "singular": self.singular,
        }
        if not self.singular:
            d["cond_R_AGM"] = float(np.linalg.cond(self.R_AGM))
        return d


def frequency_toolkit(net, coeffs, exps, grid, mu, coupled=True, singular_ok=False) -> FrequencyToolkit:
    """Assemble the free resolvent, Dirichlet operator, characteristic matrix
    and (if nonsingular) the boundary-coupled resolvent at one frequency.

    With ``coupled=False`` the boundary feedback is switched off and the
    coupled resolvent equals the free one."""
    mu = complex(mu)
    R_A = resolvent_free(net, coeffs, exps, grid, mu)
    Dmu = dirichlet(net, coeffs, exps, grid, mu)
    Mtrace = boundary_trace_in(net, grid).astype(complex)
    Amu = char_matrix(net, exps, mu) if coupled else np.zeros((net.n, net.n), dtype=complex)
    det_char = complex(np.linalg.det(np.eye(net.n) - Amu))
    if abs(det_char) <= DET_SINGULAR_TOL:
        if not singular_ok:
            raise CharacteristicSingularity(
                f"det(I - char_matrix({mu})) = {det_char:.3e}; mu is a boundary characteristic root"
            )
        R_AGM = None
    elif not coupled:
        R_AGM = R_A
    else:
        correction = np.linalg.solve(np.eye(net.n) - Amu, Mtrace @ R_A)
        R_AGM = R_A + Dmu @ correction
    return FrequencyToolkit(net, coeffs, exps, grid, mu, coupled, R_A, Dmu, Mtrace, Amu, det_char, R_AGM)


def resolvent_perturbed(toolkit: FrequencyToolkit):
    """Boundary-coupled resolvent (I + D_mu (I - A_mu)^{-1} M) R(mu, A)."""
    if toolkit.singular:
        raise CharacteristicSingularity(
            f"det(I - char_matrix({toolkit.mu})) = {toolkit.det_char:.3e}"
        )
    return toolkit.R_AGM


def pointwise_state_matrix(S, N):
    """Lift an m x m coefficient matrix to the edge-major state space."""
    return np.kron(np.asarray(S, dtype=complex), np.eye(N))


def input_column_matrix(S, N):
    """Lift an m x n_u coefficient matrix to columns constant along edges."""
    return np.kron(np.asarray(S, dtype=complex), np.ones((N, 1)))


@dataclass
class NeutralFrequency:
    """The neutral frequency inverse and the delay symbols behind it."""

    mu: complex
    Xi: np.ndarray
    sym_neutral: np.ndarray  # m x m symbol of the neutral kernel
    sym_retarded: np.ndarray  # m x m symbol of the retarded kernel
    sym_input_feed: np.ndarray  # m x n_u
    sym_input_force: np.ndarray  # m x n_u
    residual: float
    cond: float


def neutral_inverse(toolkit: FrequencyToolkit, bank: DelayBank) -> NeutralFrequency:
    """Invert I - (neutral symbol) - R_coupled (retarded symbol) on the grid.

    Raises NeutralSingularity when the neutral symbol pins eigenvalue one and
    DelayCharacteristicSingularity when the assembled matrix is singular."""
    mu = toolkit.mu
    grid = toolkit.grid
    s_eta = symbol(bank.eta, mu)
    s_gamma = symbol(bank.gamma, mu)
    det_neutral = complex(np.linalg.det(np.eye(bank.m) - s_eta))
    if abs(det_neutral) <= DET_SINGULAR_TOL:
        raise NeutralSingularity(f"det(I - neutral symbol({mu})) = {det_neutral:.3e}")
    R_AGM = resolvent_perturbed(toolkit)
    core = (
        np.eye(grid.dim)
        - pointwise_state_matrix(s_eta, grid.N)
        - R_AGM @ pointwise_state_matrix(s_gamma, grid.N)
    )
    cond = float(np.linalg.cond(core))
    if cond > 1.0 / DET_SINGULAR_TOL:
        raise DelayCharacteristicSingularity(
            f"neutral frequency matrix at mu={mu} is numerically singular (cond={cond:.3e})"
        )
    Xi = np.linalg.inv(core)
    residual = float(np.linalg.norm(Xi @ core - np.eye(grid.dim), 2))
    return NeutralFrequency(
        mu,
        Xi,
        s_eta,
        s_gamma,
        symbol(bank.vartheta, mu),
        symbol(bank.nu, mu),
        residual,
        cond,
    )


def measure_theta_matrix(meas, tgrid: ThetaGrid, N, state_input=True):
    """Matrix form of a delay measure acting on delay-line profiles.

    For state kernels (m x m atoms) the input is a theta-major X profile and
    the output lives in X; for input kernels (m x n_u) the input is a
    theta-major control profile."""
    k = tgrid.k
    m_out = meas.shape[0] * N
    in_block = meas.shape[1] * N if state_input else meas.shape[1]
    out = np.zeros((m_out, k * in_block), dtype=complex)

    def lifted(w):
        return pointwise_state_matrix(w, N) if state_input else input_column_matrix(w, N)

    for theta, w in meas.atoms:
        row = tgrid.eval_row(theta)[0]
        out += np.kron(row, lifted(w))
    gauss_t, gauss_w = np.polynomial.legendre.leggauss(12)
    for a, b, rho in meas.density:
        pts = (gauss_t + 1.0) * (b - a) / 2.0 + a
        wts = gauss_w * (b - a) / 2.0
        row = np.zeros(k)
        for p, wq in zip(pts, wts):
            row += wq * tgrid.eval_row(p)[0]
        out += np.kron(row, lifted(rho))
    return out


def exp_lift(tgrid: ThetaGrid, mu, block_dim):
    """Map a state vector to the delay-line profile e^{mu theta} (x)."""
    col = np.exp(complex(mu) * tgrid.theta)
    return np.kron(col[:, None], np.eye(block_dim))


def shift_resolvent(tgrid: ThetaGrid, mu, block_dim):
    """Resolvent of the left-shift generator with zero trace at theta = 0:
    (R g)(theta) = e^{mu theta} int_theta^0 e^{-mu s} g(s) ds."""
    mu = complex(mu)
    e = np.exp(mu * tgrid.theta)
    core = (e[:, None] * tgrid.cum_to_zero) * (1.0 / e)[None, :]
    return np.kron(core, np.eye(block_dim))


@dataclass
class BlockResolvent:
    """The 3 x 3 resolvent of the full neutral generator on
    state x state-history x input-history, all nine blocks dense."""

    mu: complex
    grid: Grid
    tgrid: ThetaGrid
    n_u: int
    b11: np.ndarray
    b12: np.ndarray
    b13: np.ndarray
    b21: np.ndarray
    b22: np.ndarray
    b23: np.ndarray
    b33: np.ndarray
    # intermediate operators kept for the controllability columns and tests
    Xi: np.ndarray
    Gamma: np.ndarray
    Omega: np.ndarray
    Lambda_: np.ndarray
    Delta: np.ndarray
    R_hist_neutral: np.ndarray  # resolvent of the history shift with neutral trace
    D_mat: np.ndarray
    L_mat: np.ndarray
    K1_mat: np.ndarray
    B1_mat: np.ndarray
    e_mu_X: np.ndarray

    @property
    def dims(self):
        kx = self.tgrid.k * self.grid.dim
        ku = self.tgrid.k * self.n_u
        return (self.grid.dim, kx, ku)

    def apply(self, x, f, g):
        z = self.b11 @ x + self.b12 @ f + self.b13 @ g
        phi = self.b21 @ x + self.b22 @ f + self.b23 @ g
        psi = self.b33 @ g
        return z, phi, psi


def resolvent_blocks(toolkit: FrequencyToolkit, bank: DelayBank, tgrid: ThetaGrid) -> BlockResolvent:
    """Assemble the full product-space resolvent at one frequency."""
    grid = toolkit.grid
    mu = toolkit.mu
    nf = neutral_inverse(toolkit, bank)
    R_AGM = toolkit.R_AGM
    dim = grid.dim
    n_u = bank.n_u

    D_mat = measure_theta_matrix(bank.eta, tgrid, grid.N, state_input=True)
    L_mat = measure_theta_matrix(bank.gamma, tgrid, grid.N, state_input=True)
    K1_mat = measure_theta_matrix(bank.vartheta, tgrid, grid.N, state_input=False)
    B1_mat = measure_theta_matrix(bank.nu, tgrid, grid.N, state_input=False)

    e_mu = exp_lift(tgrid, mu, dim)
    inv_neutral = pointwise_state_matrix(
        np.linalg.inv(np.eye(bank.m) - nf.sym_neutral), grid.N
    )
    Rq_X = shift_resolvent(tgrid, mu, dim)
    Rq_U = shift_resolvent(tgrid, mu, n_u)

    R_hist_neutral = Rq_X + e_mu @ inv_neutral @ (D_mat @ Rq_X)
    Delta = e_mu @ inv_neutral @ (R_AGM @ L_mat)
    kx = tgrid.k * dim
    R1Delta = np.linalg.inv(np.eye(kx) - Delta)

    Gamma = e_mu @ nf.Xi
    Omega = Gamma @ (K1_mat + R_AGM @ B1_mat)
    Lambda_ = R_AGM @ (L_mat @ Omega + B1_mat)

    b11 = R_AGM @ (np.eye(dim) + L_mat @ Gamma @ R_AGM)
    b12 = R_AGM @ (L_mat @ (R1Delta @ R_hist_neutral))
    b13 = Lambda_ @ Rq_U
    b21 = Gamma @ R_AGM
    b22 = R1Delta @ R_hist_neutral
    b23 = Omega @ Rq_U
    b33 = Rq_U

    return BlockResolvent(
        mu, grid, tgrid, n_u,
        b11, b12, b13, b21, b22, b23, b33,
        nf.Xi, Gamma, Omega, Lambda_, Delta, R_hist_neutral,
        D_mat, L_mat, K1_mat, B1_mat, e_mu,
    )


def apply_discrete_generator(toolkit: FrequencyToolkit, bank: DelayBank, tgrid: ThetaGrid, zeta):
    """(mu - generator) applied to a product-space vector, built from spectral
    differentiation matrices only -- independent of the quadrature kernels.

    Returns the three defect rows plus the domain-constraint residuals
    (boundary transmission, history trace, input-history trace)."""
    grid = toolkit.grid
    mu = toolkit.mu
    z, phi, psi = zeta
    rule = grid.rule
    dim = grid.dim

    z_edges = z.reshape(grid.m, grid.N)
    Az = np.zeros_like(z_edges)
    for j in range(grid.m):
        c = toolkit.coeffs.c[j](rule.nodes)
        q = toolkit.coeffs.q[j](rule.nodes)
        Az[j] = c * (rule.diff @ z_edges[j]) + q * z_edges[j]
    D_mat = measure_theta_matrix(bank.eta, tgrid, grid.N, state_input=True)
    L_mat = measure_theta_matrix(bank.gamma, tgrid, grid.N, state_input=True)
    K1_mat = measure_theta_matrix(bank.vartheta, tgrid, grid.N, state_input=False)
    B1_mat = measure_theta_matrix(bank.nu, tgrid, grid.N, state_input=False)

    row1 = mu * z - Az.ravel() - L_mat @ phi - B1_mat @ psi
    dtheta_x = np.kron(tgrid.diff, np.eye(dim))
    dtheta_u = np.kron(tgrid.diff, np.eye(bank.n_u))
    row2 = mu * phi - dtheta_x @ phi
    row3 = mu * psi - dtheta_u @ psi

    f1 = z_edges @ rule.trace1
    lift = boundary_lift(toolkit.net).astype(complex)
    bc = f1 - lift @ (toolkit.Mtrace @ z)
    hist_trace = phi[:dim] - (z + D_mat @ phi + K1_mat @ psi)
    input_trace = psi[: bank.n_u]
    return row1, row2, row3, bc, hist_trace, input_trace


def oracle_resolvent(net: Network, coeffs: EdgeCoefficients, mu, f_funcs, boundary=None, x_eval=None):
    """Independent check of the free resolvent: per edge, integrate
    mu g - c g' - q g = f backward from g(1) with an adaptive high-order ODE
    solver.  ``f_funcs`` are callables per edge; ``boundary`` the values g(1).
    Returns the per-edge solutions sampled at ``x_eval`` (default: [0, 1]
    dense)."""
    mu = complex(mu)
    m = net.m
    if boundary is None:
        boundary = np.zeros(m, dtype=complex)
    if x_eval is None:
        x_eval = np.linspace(0.0, 1.0, 201)
    x_eval = np.asarray(x_eval, dtype=float)
    out = []
    for j in range(m):
        cf, qf, ff = coeffs.c[j], coeffs.q[j], f_funcs[j]

        def rhs(x, y):
            return (mu * y - qf(x) * y - ff(x)) / cf(x)

        sol = solve_ivp(
            rhs,
            (1.0, 0.0),
            np.atleast_1d(np.complex128(boundary[j])),
            t_eval=x_eval[::-1],
            rtol=1e-12,
            atol=1e-13,
            method="DOP853",
        )
        out.append(sol.y[0][::-1])
    return np.array(out)
