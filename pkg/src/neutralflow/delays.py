"""Matrix-valued Stieltjes delay measures on [-r, 0]: point atoms plus an
optional piecewise-constant density.  A measure realizes one of the four
delay couplings (state->state neutral, state->state retarded, input->state
delayed, input->state distributed-delay feedthrough).

Frequency symbols integrate e^{mu theta} against the measure in closed
form; ``apply_history`` integrates a sampled history buffer instead.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GapViolation


def _phi1(z):
    """(e^z - 1)/z with a stable small-z branch."""
    arr = np.atleast_1d(np.asarray(z, dtype=complex))
    small = np.abs(arr) < 1e-6
    zs = np.where(small, 1.0, arr)
    out = np.expm1(zs) / zs
    if np.any(small):
        zz = arr[small]
        out[small] = 1.0 + zz / 2.0 + zz * zz / 6.0
    return out if np.ndim(z) else out[0]


@dataclass(frozen=True)
class DelayMeasure:
    """Atoms (theta_i, W_i) with theta_i <= -gap < 0, plus an optional
    piecewise-constant matrix density on [-r, 0].

    ``density`` is a list of (a, b, R) pieces with -r <= a < b <= 0 and R a
    matrix of the same shape as the atoms.
    """

    r: float
    shape: tuple
    atoms: tuple = ()
    density: tuple = ()
    gap: float = field(default=None)

    def __post_init__(self):
        if self.r <= 0:
            raise ValueError("delay horizon r must be positive")
        atoms = []
        for theta, w in self.atoms:
            w = np.asarray(w, dtype=complex)
            if w.shape != tuple(self.shape):
                raise ValueError(f"atom weight shape {w.shape} != {self.shape}")
            if not (-self.r - 1e-12 <= theta < 0):
                raise ValueError(f"atom location {theta} outside [-r, 0)")
            atoms.append((float(theta), w))
        object.__setattr__(self, "atoms", tuple(atoms))
        pieces = []
        for a, b, rho in self.density:
            rho = np.asarray(rho, dtype=complex)
            if rho.shape != tuple(self.shape):
                raise ValueError(f"density piece shape {rho.shape} != {self.shape}")
            if not (-self.r - 1e-12 <= a < b <= 1e-15):
                raise ValueError(f"density piece ({a}, {b}) outside [-r, 0]")
            pieces.append((float(a), float(b), rho))
        object.__setattr__(self, "density", tuple(pieces))
        if self.gap is None:
            gap = min((-theta for theta, _ in self.atoms), default=self.r)
            object.__setattr__(self, "gap", float(gap))
        if self.atoms and self.gap > min(-theta for theta, _ in self.atoms) + 1e-15:
            raise ValueError("declared gap exceeds the closest atom distance")

    @classmethod
    def zero(cls, r, shape):
        return cls(r=r, shape=tuple(shape))

    @classmethod
    def single_atom(cls, r, theta, weight):
        weight = np.asarray(weight, dtype=complex)
        return cls(r=r, shape=weight.shape, atoms=((theta, weight),))

    @property
    def is_zero(self):
        return not self.atoms and not self.density

    def total_variation(self):
        """Entrywise total variation bound."""
        tv = np.zeros(self.shape)
        for _, w in self.atoms:
            tv = tv + np.abs(w)
        for a, b, rho in self.density:
            tv = tv + (b - a) * np.abs(rho)
        return tv


def symbol(meas: DelayMeasure, mu) -> np.ndarray:
    """Frequency symbol sum_i W_i e^{mu theta_i} + int rho(theta) e^{mu theta}.

    Density pieces use the exact exponential moment per piece, so the
    symbol is entire in mu with no quadrature error."""
    mu = complex(mu)
    out = np.zeros(meas.shape, dtype=complex)
    for theta, w in meas.atoms:
        out += w * np.exp(mu * theta)
    for a, b, rho in meas.density:
        # int_a^b e^{mu t} dt = e^{mu a} (b - a) phi1(mu (b - a))
        out += rho * ((b - a) * np.exp(mu * a) * _phi1(mu * (b - a)))
    return out


def apply_history(meas: DelayMeasure, hist, r=None) -> np.ndarray:
    """Integrate the measure against a uniformly sampled history buffer.

    ``hist`` has shape (H+1, d, ...) covering theta = -r .. 0 in order; atoms
    are read by linear interpolation between samples, the density against the
    exact integral of the piecewise-linear interpolant (both O(dtheta^2))."""
    hist = np.asarray(hist)
    if hist.shape[0] < 2:
        raise ValueError("history buffer needs at least two samples")
    r = meas.r if r is None else float(r)
    steps = hist.shape[0] - 1
    dtheta = r / steps

    def sample(theta):
        pos = (theta + r) / dtheta
        lo = int(np.clip(np.floor(pos), 0, steps - 1))
        frac = pos - lo
        return (1.0 - frac) * hist[lo] + frac * hist[lo + 1]

    out = None
    for theta, w in meas.atoms:
        if theta < -r - 1e-12:
            raise ValueError(f"buffer covers [-{r}, 0] but atom sits at {theta}")
        term = np.tensordot(w, sample(theta), axes=1)
        out = term if out is None else out + term
    for a, b, rho in meas.density:
        knots = [a] + [(-r + k * dtheta) for k in range(steps + 1) if a < -r + k * dtheta < b] + [b]
        acc = np.zeros_like(np.tensordot(rho, hist[0], axes=1))
        for lo, hi in zip(knots[:-1], knots[1:]):
            acc = acc + 0.5 * (hi - lo) * np.tensordot(rho, sample(lo) + sample(hi), axes=1)
        out = acc if out is None else out + acc
    if out is None:
        trail = hist.shape[1:]
        out = np.zeros((meas.shape[0],) + trail[1:], dtype=hist.dtype)
    return out


def check_gap(meas: DelayMeasure, dt) -> bool:
    """Explicit neutral stepping needs every atom at theta <= -dt."""
    if meas.gap + 1e-12 < dt:
        worst = min(meas.atoms, key=lambda a: -a[0])
        raise GapViolation(
            f"atom at theta={worst[0]} is closer to zero than the step dt={dt}"
        )
    return True


@dataclass(frozen=True)
class DelayBank:
    """The four delay measures of one system, with consistent horizon r.

    eta: neutral state kernel (m x m), gamma: retarded state kernel (m x m),
    vartheta: delayed-input feedthrough (m x n_u), nu: delayed-input forcing
    (m x n_u)."""

    eta: DelayMeasure
    gamma: DelayMeasure
    vartheta: DelayMeasure
    nu: DelayMeasure

    def __post_init__(self):
        rs = {self.eta.r, self.gamma.r, self.vartheta.r, self.nu.r}
        if len(rs) != 1:
            raise ValueError(f"inconsistent delay horizons: {sorted(rs)}")
        m = self.eta.shape[0]
        if self.eta.shape != (m, m) or self.gamma.shape != (m, m):
            raise ValueError("state kernels must be m x m")
        if self.vartheta.shape[0] != m or self.nu.shape != self.vartheta.shape:
            raise ValueError("input kernels must share shape m x n_u")

    @property
    def r(self):
        return self.eta.r

    @property
    def m(self):
        return self.eta.shape[0]

    @property
    def n_u(self):
        return self.vartheta.shape[1]

    @classmethod
    def empty(cls, r, m, n_u=1):
        return cls(
            DelayMeasure.zero(r, (m, m)),
            DelayMeasure.zero(r, (m, m)),
            DelayMeasure.zero(r, (m, n_u)),
            DelayMeasure.zero(r, (m, n_u)),
        )
