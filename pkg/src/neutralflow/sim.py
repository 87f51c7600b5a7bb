"""Time-domain simulation by the method of characteristics.

Each edge gets a grid whose nodes are exactly one time step apart in travel
time, so advection is an index shift with an exact growth factor and the
scheme has no dispersive error; only the delayed source terms are explicit
first order in dt.  Histories live in ring buffers; the reconstruction of
the full state from the flow variable is explicit because every delay
measure must keep a gap of at least one time step away from zero.
"""

from dataclasses import dataclass, field
from math import floor

import numpy as np

from .control import ControlConfig, ControlSignal  # noqa: F401  (re-export)
from .delays import DelayBank, DelayMeasure, check_gap
from .errors import CFLViolation
from .network import EdgeCoefficients, FlowExponents, Network

COMMENSURATE_TOL = 1e-9


@dataclass(frozen=True)
class SimGrid:
    """Per-edge travel-time-uniform grids; node 0 sits at x = 1 (inflow) and
    node K_j at x = 0 (outflow)."""

    dt: float
    steps: tuple  # K_j per edge
    x_desc: tuple  # nodes from 1 down to 0
    shift: tuple  # shift[j][k] = exp(xi_j(x_k, x_{k-1})), k >= 1
    history_slots: int  # H = r / dt


def build_sim_grid(net: Network, exps: FlowExponents, r, dt) -> SimGrid:
    dt = float(dt)
    if dt <= 0:
        raise CFLViolation("dt must be positive")
    H = int(round(r / dt))
    if abs(H * dt - r) > COMMENSURATE_TOL * max(1.0, r):
        raise CFLViolation(f"delay horizon {r} is not a multiple of dt={dt}")
    steps, x_desc, shift = [], [], []
    for j in range(net.m):
        tau = exps.tau_total[j]
        K = int(round(tau / dt))
        if K < 1 or abs(K * dt - tau) > COMMENSURATE_TOL * max(1.0, tau):
            raise CFLViolation(
                f"edge {j} travel time {tau:.12g} is not a positive multiple of dt={dt}"
            )
        xs = np.array([exps.x_at_travel_time(j, k * dt) for k in range(K + 1)])
        xs[0], xs[-1] = 1.0, 0.0
        xi = np.array([exps.xi(j, x) for x in xs])
        fac = np.ones(K + 1)
        fac[1:] = np.exp(xi[1:] - xi[:-1])
        steps.append(K)
        x_desc.append(xs)
        shift.append(fac)
    return SimGrid(dt, tuple(steps), tuple(x_desc), tuple(shift), H)


@dataclass
class SimState:
    """Flow variable, reconstructed state, and its ring-buffered history."""

    net: Network
    grid: SimGrid
    bank: DelayBank
    config: ControlConfig
    control: ControlSignal
    step: int
    rho: list  # per-edge arrays on x_desc
    zbuf: list  # per-edge (H+1, K_j+1) rings; row step % (H+1) is current

    @property
    def time(self):
        return self.step * self.grid.dt

    def z_now(self, j):
        return self.zbuf[j][self.step % (self.grid.history_slots + 1)]

    def _z_back(self, j, back):
        """z on edge j, ``back`` steps (possibly fractional) in the past."""
        H = self.grid.history_slots
        s0 = floor(back)
        frac = back - s0
        row0 = self.zbuf[j][(self.step - s0) % (H + 1)]
        if frac == 0.0:
            return row0
        row1 = self.zbuf[j][(self.step - s0 - 1) % (H + 1)]
        return (1.0 - frac) * row0 + frac * row1

    def _to_edge(self, vals, src, dst):
        """Interpolate nodal values from edge src's grid to edge dst's."""
        if src == dst:
            return vals
        xs = self.grid.x_desc[src][::-1]
        xd = self.grid.x_desc[dst][::-1]
        return np.interp(xd, xs, vals[::-1])[::-1]

    def delayed_state(self, meas: DelayMeasure):
        """(measure * z_t) per edge, on that edge's grid."""
        dt = self.grid.dt
        out = [np.zeros(k + 1) for k in self.grid.steps]
        for theta, W in meas.atoms:
            rows = [self._z_back(k, -theta / dt) for k in range(self.net.m)]
            for j in range(self.net.m):
                for k in range(self.net.m):
                    if W[j, k] != 0.0:
                        out[j] = out[j] + W[j, k] * self._to_edge(rows[k], k, j)
        for a, b, rho in meas.density:
            ss = np.arange(int(np.ceil(-b / dt)), int(np.floor(-a / dt)) + 1)
            knots_theta = -ss * dt
            thetas = np.concatenate([[a], knots_theta[::-1], [b]])
            thetas = np.unique(np.clip(thetas, a, b))
            for j in range(self.net.m):
                acc = None
                for k in range(self.net.m):
                    if rho[j, k] == 0.0:
                        continue
                    vals = np.array(
                        [self._to_edge(self._z_back(k, -th / dt), k, j) for th in thetas]
                    )
                    term = rho[j, k] * np.trapezoid(vals, x=thetas, axis=0)
                    acc = term if acc is None else acc + term
                if acc is not None:
                    out[j] = out[j] + acc
        return [np.asarray(np.real_if_close(o)) for o in out]

    def delayed_input(self, meas: DelayMeasure, t):
        """(measure * u_t)(t) as an m-vector; the control is a callable, so
        delayed values are exact."""
        out = np.zeros(meas.shape[0], dtype=complex)
        u = self.control.u
        for theta, W in meas.atoms:
            out += W @ u(t + theta)
        gauss_t, gauss_w = np.polynomial.legendre.leggauss(12)
        for a, b, rho in meas.density:
            pts = (gauss_t + 1.0) * (b - a) / 2.0 + a
            wts = gauss_w * (b - a) / 2.0
            for p, wq in zip(pts, wts):
                out += wq * (rho @ u(t + p))
        return np.asarray(np.real_if_close(out))

    def reconstruct_z(self, t):
        """z = rho + (neutral kernel * z_t) + K0 u + K1 u_t, explicit because
        the neutral kernel keeps clear of theta = 0."""
        dz = self.delayed_state(self.bank.eta)
        k1 = self.delayed_input(self.bank.vartheta, t)
        u = self.control.u(t)
        z = []
        for j in range(self.net.m):
            base = self.rho[j] + dz[j] + k1[j]
            if self.config.n_u:
                prof = sum(
                    self.config.K0[j][i](self.grid.x_desc[j]) * u[i]
                    for i in range(self.config.n_u)
                )
                base = base + prof
            z.append(base)
        return z

    def mass(self):
        """Trapezoid integral of the flow variable over every edge."""
        total = 0.0
        for j in range(self.net.m):
            xs = self.grid.x_desc[j][::-1]
            total += float(np.trapezoid(self.rho[j][::-1], x=xs))
        return total

    def norm(self):
        total = 0.0
        for j in range(self.net.m):
            xs = self.grid.x_desc[j][::-1]
            total += float(np.trapezoid(self.rho[j][::-1] ** 2, x=xs))
        return float(np.sqrt(total))


def _zero_signal(n):
    v = np.zeros(n)
    return lambda t: v


def init_state(
    net: Network,
    coeffs: EdgeCoefficients,
    exps: FlowExponents,
    bank: DelayBank,
    config: ControlConfig,
    dt,
    history=None,
    control: ControlSignal | None = None,
) -> SimState:
    """Set up the simulation at t = 0 from a state-history function
    ``history(theta, j, x)`` (default zero)."""
    check_gap(bank.eta, dt)
    check_gap(bank.vartheta, dt)
    grid = build_sim_grid(net, exps, bank.r, dt)
    if control is None:
        control = ControlSignal.zero(config)
    H = grid.history_slots
    zbuf = []
    for j in range(net.m):
        buf = np.zeros((H + 1, grid.steps[j] + 1))
        if history is not None:
            for s in range(H + 1):
                buf[(0 - s) % (H + 1)] = history(-s * dt, j, grid.x_desc[j])
        zbuf.append(buf)
    state = SimState(net, grid, bank, config, control, 0, [None] * net.m, zbuf)
    dz = state.delayed_state(bank.eta)
    k1 = state.delayed_input(bank.vartheta, 0.0)
    u0 = control.u(0.0)
    for j in range(net.m):
        rho = state.z_now(j) - dz[j] - k1[j]
        if config.n_u:
            rho = rho - sum(
                config.K0[j][i](grid.x_desc[j]) * u0[i] for i in range(config.n_u)
            )
        state.rho[j] = rho
    return state


def step(state: SimState, coeffs: EdgeCoefficients):
    """Advance one time step: exact advection shift, explicit delayed
    sources, vertex transmission, state reconstruction."""
    net, grid, cfg = state.net, state.grid, state.config
    dt = grid.dt
    t = state.time
    src_state = state.delayed_state(state.bank.gamma)
    src_force = state.delayed_input(state.bank.nu, t)
    u = state.control.u(t)
    new_rho = []
    for j in range(net.m):
        src = src_state[j] + src_force[j]
        if cfg.n_u:
            src = src + sum(
                cfg.B0[j][i](grid.x_desc[j]) * u[i] for i in range(cfg.n_u)
            )
        r = np.empty_like(state.rho[j])
        r[1:] = grid.shift[j][1:] * state.rho[j][:-1] + dt * src[1:]
        r[0] = 0.0
        new_rho.append(r)
    v = state.control.v(t + dt)
    vertex = np.zeros(net.n)
    for i in range(net.n):
        for j in net.in_edges(i):
            vertex[i] += new_rho[j][-1]
    if cfg.n_v:
        vertex = vertex + cfg.K @ v
    for j in range(net.m):
        new_rho[j][0] = net.weights[net.tails[j], j] * vertex[net.tails[j]]
    state.rho = new_rho
    state.step += 1
    z = state.reconstruct_z(state.time)
    H = grid.history_slots
    for j in range(net.m):
        state.zbuf[j][state.step % (H + 1)] = z[j]
    return state


@dataclass
class SimTrace:
    times: np.ndarray
    mass: np.ndarray
    norm: np.ndarray
    snapshots: dict = field(default_factory=dict)  # step -> list of per-edge rho


def simulate(
    net,
    coeffs,
    exps,
    bank,
    config,
    dt,
    T,
    history=None,
    control=None,
    snapshot_every=None,
) -> tuple:
    """Run the scheme to time T; returns (final state, trace)."""
    state = init_state(net, coeffs, exps, bank, config, dt, history, control)
    n_steps = int(round(T / dt))
    times = np.zeros(n_steps + 1)
    mass = np.zeros(n_steps + 1)
    norm = np.zeros(n_steps + 1)
    trace = SimTrace(times, mass, norm)
    mass[0], norm[0] = state.mass(), state.norm()
    if snapshot_every:
        trace.snapshots[0] = [r.copy() for r in state.rho]
    for k in range(1, n_steps + 1):
        step(state, coeffs)
        times[k] = state.time
        mass[k], norm[k] = state.mass(), state.norm()
        if snapshot_every and k % snapshot_every == 0:
            trace.snapshots[k] = [r.copy() for r in state.rho]
    return state, trace


def fit_decay_rate(times, norms, t_min):
    """Least-squares slope of log |state| past a transient."""
    sel = (times >= t_min) & (norms > 1e-300)
    t, y = times[sel], np.log(norms[sel])
    A = np.vstack([t, np.ones_like(t)]).T
    slope, _ = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope)


def state_on_gauss_grid(state: SimState, gauss_grid):
    """Interpolate the flow variable onto the edge-major Gauss grid."""
    out = np.zeros(gauss_grid.dim)
    for j in range(state.net.m):
        xs = state.grid.x_desc[j][::-1]
        vals = state.rho[j][::-1]
        out[j * gauss_grid.N : (j + 1) * gauss_grid.N] = np.interp(
            gauss_grid.nodes, xs, vals
        )
    return out


def empirical_gramian(net, coeffs, exps, bank, config, gauss_grid, dt, T, probes):
    """End states of zero-history probe runs, stacked on the Gauss grid.

    ``probes`` is a list of ControlSignal; the weighted SVD of the stacked
    end states estimates the reachable subspace after time T."""
    cols = []
    for sig in probes:
        st, _ = simulate(net, coeffs, exps, bank, config, dt, T, history=None, control=sig)
        cols.append(state_on_gauss_grid(st, gauss_grid))
    C = np.array(cols).T
    wh = np.sqrt(gauss_grid.weights)
    U, sv, _ = np.linalg.svd(wh[:, None] * C, full_matrices=False)
    return C, sv, U / wh[:, None]


def gramian_rank(sv, tol=1e-6):
    return int(np.sum(sv >= tol * sv[0])) if sv.size else 0


def principal_angles(grid, A, B):
    """Principal angles between the weighted column spans of A and B."""
    wh = np.sqrt(grid.weights)
    Qa, _ = np.linalg.qr(wh[:, None] * np.asarray(A, dtype=complex))
    Qb, _ = np.linalg.qr(wh[:, None] * np.asarray(B, dtype=complex))
    sv = np.linalg.svd(Qa.conj().T @ Qb, compute_uv=False)
    return np.arccos(np.clip(sv, -1.0, 1.0))
