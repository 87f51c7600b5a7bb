"""Characteristic determinants and root location in rectangles of the
complex plane, via the argument principle with adaptive subdivision."""

from dataclasses import dataclass, field

import numpy as np

from .delays import DelayBank, symbol
from .errors import ContourTooClose, RootPolishDiverged
from .network import EdgeCoefficients, FlowExponents, Network
from .operators import Grid, char_matrix, frequency_toolkit, resolvent_perturbed


def char_det(net: Network, exps: FlowExponents, mu):
    """det(I - char_matrix(mu)); zeros are spectrum of the coupled flow."""
    return complex(np.linalg.det(np.eye(net.n) - char_matrix(net, exps, mu)))


def neutral_det(bank: DelayBank, mu):
    """det(I - neutral symbol(mu)); zeros force the neutral relation to
    degenerate regardless of the flow."""
    return complex(np.linalg.det(np.eye(bank.m) - symbol(bank.eta, mu)))


@dataclass
class RootReport:
    """Roots of a characteristic determinant inside a rectangle."""

    box: tuple  # (re_min, re_max, im_min, im_max)
    count: int
    roots: list = field(default_factory=list)  # polished roots (with multiplicity 1 cells)
    cells: list = field(default_factory=list)  # (box, winding) leaves of the subdivision

    def to_dict(self):
        return {
            "box": list(self.box),
            "count": self.count,
            "roots": [[z.real, z.imag] for z in self.roots],
        }


def _winding(fn, box, pts_per_edge=512):
    """Winding number of fn around the rectangle boundary via phase
    unwrapping.  Raises ContourTooClose if the contour grazes a zero."""
    re0, re1, im0, im1 = box
    top = np.linspace(re0, re1, pts_per_edge, endpoint=False) + 1j * im0
    right = re1 + 1j * np.linspace(im0, im1, pts_per_edge, endpoint=False)
    bottom = np.linspace(re1, re0, pts_per_edge, endpoint=False) + 1j * im1
    left = re0 + 1j * np.linspace(im1, im0, pts_per_edge, endpoint=False)
    zs = np.concatenate([top, right, bottom, left])
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.array([fn(z) for z in zs])
    mags = np.abs(vals)
    scale = np.median(mags)
    if scale == 0.0 or np.min(mags) < 1e-10 * max(scale, 1.0):
        raise ContourTooClose(f"contour of box {box} passes within 1e-10 of a zero")
    phases = np.unwrap(np.angle(vals))
    closing = np.angle(vals[0]) - phases[-1]
    closing = (closing + np.pi) % (2.0 * np.pi) - np.pi
    winding = (phases[-1] + closing - phases[0]) / (2.0 * np.pi)
    w = int(round(winding))
    if abs(winding - w) > 0.25:
        raise ContourTooClose(f"ambiguous winding {winding:.3f} on box {box}")
    return w


def _winding_robust(fn, box, pts_per_edge):
    """Winding with up to three outward boundary perturbations if a zero sits
    on (or numerically too near) the outer contour."""
    re0, re1, im0, im1 = box
    h = max(re1 - re0, im1 - im0)
    for attempt in range(4):
        eps = 0.0 if attempt == 0 else h * 1e-3 * attempt
        b = (re0 - eps, re1 + eps, im0 - eps, im1 + eps)
        try:
            return _winding(fn, b, pts_per_edge), b
        except ContourTooClose:
            if attempt == 3:
                raise
    raise ContourTooClose(f"could not separate contour of {box} from zeros")


def _split(fn, cell, w, pts_per_edge):
    """Split a cell across its long axis into two non-overlapping halves
    whose windings add up to w, jittering the shared midline off any zero."""
    re0, re1, im0, im1 = cell
    horizontal = re1 - re0 >= im1 - im0
    lo, hi = (re0, re1) if horizontal else (im0, im1)
    h = hi - lo
    # all offsets nonzero and away from simple fractions, so roots sitting at
    # round coordinates never land exactly on a bisection line
    for jitter in (0.0137, -0.0119, 0.0293, -0.0311, 0.0433, -0.0457):
        mid = (lo + hi) / 2.0 + jitter * h
        if horizontal:
            halves = [(re0, mid, im0, im1), (mid, re1, im0, im1)]
        else:
            halves = [(re0, re1, im0, mid), (re0, re1, mid, im1)]
        try:
            ws = [_winding(fn, half, pts_per_edge) for half in halves]
        except ContourTooClose:
            continue
        if sum(ws) == w:
            return list(zip(halves, ws))
    raise ContourTooClose(f"could not subdivide {cell} away from its zeros")


def polish_root(fn, z0, tol=1e-10, max_iter=50):
    """Newton iteration with a central-difference derivative; raises
    RootPolishDiverged if the residual fails to reach tol."""
    z = complex(z0)
    h = 1e-7
    with np.errstate(over="ignore", invalid="ignore"):
        return _polish(fn, z, h, tol, max_iter)


def _polish(fn, z, h, tol, max_iter):
    for _ in range(max_iter):
        f = fn(z)
        if not np.isfinite(f):
            break
        if abs(f) <= tol:
            return z
        df = (fn(z + h) - fn(z - h)) / (2.0 * h)
        if df == 0 or not np.isfinite(df):
            break
        step = f / df
        z = z - step
        if abs(step) < 1e-15:
            break
    if np.isfinite(z) and abs(fn(z)) <= tol:
        return z
    raise RootPolishDiverged(f"Newton stalled at {z} with residual {abs(fn(z)):.3e}")


def count_roots(fn, box, pts_per_edge=512, min_cell=1e-6, polish_tol=1e-10) -> RootReport:
    """Count and locate zeros of an analytic fn inside a rectangle.

    Subdivides until each cell holds at most one zero (or the cell is
    smaller than min_cell), then polishes from the cell center."""
    total, box = _winding_robust(fn, box, pts_per_edge)
    report = RootReport(box=box, count=total)
    stack = [(box, total)]
    while stack:
        cell, w = stack.pop()
        if w == 0:
            continue
        re0, re1, im0, im1 = cell
        size = max(re1 - re0, im1 - im0)
        if w > 1 and size >= min_cell:
            # try to separate the zeros; an inseparable tight cluster is a
            # multiple root and falls through to polishing with multiplicity
            try:
                for half, wh in _split(fn, cell, w, pts_per_edge):
                    if wh:
                        stack.append((half, wh))
                continue
            except ContourTooClose:
                if size > 1e-3 * (1.0 + abs(complex(re0, im0))):
                    raise
        margin = 1e-9 + 1e-6 * size
        starts = [complex((re0 + re1) / 2.0, (im0 + im1) / 2.0)]
        starts += [
            complex(re0 + fx * (re1 - re0), im0 + fy * (im1 - im0))
            for fx, fy in ((0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75))
        ]
        root = None
        for z0 in starts:
            try:
                cand = polish_root(fn, z0, tol=polish_tol)
            except RootPolishDiverged:
                continue
            if re0 - margin <= cand.real <= re1 + margin and im0 - margin <= cand.imag <= im1 + margin:
                root = cand
                break
        if root is None:
            # Newton kept escaping the cell: localize harder
            if size >= min_cell:
                for half, wh in _split(fn, cell, w, pts_per_edge):
                    if wh:
                        stack.append((half, wh))
                continue
            raise RootPolishDiverged(f"no start point converged inside cell {cell}")
        report.cells.append((cell, w))
        for _ in range(w):
            report.roots.append(root)
    report.roots.sort(key=lambda z: (z.real, z.imag))
    return report


def resolvent_norm_sweep(net, coeffs, exps, grid: Grid, mus, coupled=True):
    """Spectral norm of the coupled resolvent along a list of frequencies;
    singular frequencies report inf."""
    out = []
    for mu in mus:
        tk = frequency_toolkit(net, coeffs, exps, grid, mu, coupled=coupled, singular_ok=True)
        if tk.singular:
            out.append(float("inf"))
        else:
            out.append(float(np.linalg.norm(resolvent_perturbed(tk), 2)))
    return np.array(out)
