"""JSON run-configuration ingestion.

Every validation problem is collected as a (json_path, message) pair and
raised in one ConfigError, so a bad file reports all its issues at once
with the exact path of each offending field.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .control import ControlConfig
from .delays import DelayBank, DelayMeasure
from .errors import ConfigError, NetworkError
from .network import EdgeCoefficients, Network, Profile, build_network


@dataclass
class RunConfig:
    """Everything a CLI command needs, parsed and cross-validated."""

    net: Network
    coeffs: EdgeCoefficients
    bank: DelayBank
    control: ControlConfig
    grid_n: int = 16
    n_theta: int = 32
    mu_count: int = 40
    mu_margin: float = 1.0
    svd_tol: float = 1e-8
    seed: int = 0
    sim_dt: float = 0.01
    sim_t_final: float = 10.0
    snapshot_stride: int = 0
    raw: dict = field(default_factory=dict, repr=False)


def _profile(spec, path, issues):
    if isinstance(spec, (int, float)):
        return Profile.constant(float(spec))
    if isinstance(spec, list):
        if not spec or not all(isinstance(v, (int, float)) for v in spec):
            issues.append((path, "polynomial coefficients must be a nonempty list of numbers"))
            return Profile.constant(0.0)
        return Profile.poly(spec)
    if isinstance(spec, dict):
        breaks = spec.get("breaks")
        pieces = spec.get("pieces")
        if not isinstance(breaks, list) or not isinstance(pieces, list) or len(breaks) != len(pieces) + 1:
            issues.append((path, "piecewise profile needs breaks (len = pieces+1) and pieces"))
            return Profile.constant(0.0)
        try:
            return Profile(tuple(float(b) for b in breaks), tuple(tuple(float(c) for c in p) for p in pieces))
        except Exception as exc:  # malformed numbers
            issues.append((path, f"bad piecewise profile: {exc}"))
            return Profile.constant(0.0)
    issues.append((path, f"cannot interpret {type(spec).__name__} as a coefficient profile"))
    return Profile.constant(0.0)


def _matrix(spec, shape, path, issues):
    try:
        mat = np.asarray(spec, dtype=float)
    except Exception:
        issues.append((path, "not a numeric matrix"))
        return np.zeros(shape)
    if mat.shape != shape:
        issues.append((path, f"shape {mat.shape} != expected {shape}"))
        return np.zeros(shape)
    return mat


def _measure(spec, r, shape, path, issues):
    if spec is None:
        return DelayMeasure.zero(r, shape)
    atoms = []
    for i, atom in enumerate(spec.get("atoms", [])):
        p = f"{path}.atoms[{i}]"
        theta = atom.get("theta")
        if not isinstance(theta, (int, float)) or not (-r - 1e-12 <= theta < 0):
            issues.append((p + ".theta", f"atom location must lie in [-r, 0) = [{-r}, 0)"))
            continue
        atoms.append((float(theta), _matrix(atom.get("matrix"), shape, p + ".matrix", issues)))
    density = []
    for i, piece in enumerate(spec.get("density", [])):
        p = f"{path}.density[{i}]"
        a, b = piece.get("a"), piece.get("b")
        if not (isinstance(a, (int, float)) and isinstance(b, (int, float)) and -r - 1e-12 <= a < b <= 0):
            issues.append((p, f"density support must satisfy -r <= a < b <= 0 with r={r}"))
            continue
        density.append((float(a), float(b), _matrix(piece.get("matrix"), shape, p + ".matrix", issues)))
    try:
        return DelayMeasure(r=r, shape=shape, atoms=tuple(atoms), density=tuple(density))
    except ValueError as exc:
        issues.append((path, str(exc)))
        return DelayMeasure.zero(r, shape)


def parse_config(path) -> RunConfig:
    """Load, validate and cross-check a JSON run configuration."""
    issues = []
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([("$", f"cannot read config: {exc}")])
    except json.JSONDecodeError as exc:
        raise ConfigError([("$", f"invalid JSON: {exc}")])
    return parse_config_dict(raw)


def parse_config_dict(raw) -> RunConfig:
    issues = []

    net_spec = raw.get("network")
    if not isinstance(net_spec, dict):
        raise ConfigError([("$.network", "missing network section")])
    n = net_spec.get("vertices")
    edges_spec = net_spec.get("edges")
    if not isinstance(n, int) or n < 1:
        issues.append(("$.network.vertices", "must be a positive integer"))
        n = 1
    if not isinstance(edges_spec, list) or not edges_spec:
        issues.append(("$.network.edges", "must be a nonempty list"))
        edges_spec = []
    m = len(edges_spec)

    edge_list, c_profiles, q_profiles = [], [], []
    weights = np.zeros((n, m))
    for j, e in enumerate(edges_spec):
        p = f"$.network.edges[{j}]"
        tail, head = e.get("tail"), e.get("head")
        if not (isinstance(tail, int) and 0 <= tail < n):
            issues.append((p + ".tail", f"vertex index out of range [0, {n})"))
            tail = 0
        if not (isinstance(head, int) and 0 <= head < n):
            issues.append((p + ".head", f"vertex index out of range [0, {n})"))
            head = 0
        w = e.get("weight")
        if not isinstance(w, (int, float)):
            issues.append((p + ".weight", "missing outgoing Kirchhoff weight"))
            w = 0.0
        edge_list.append((tail, head))
        weights[tail, j] = float(w)
        c_profiles.append(_profile(e.get("c", 1.0), p + ".c", issues))
        q_profiles.append(_profile(e.get("q", 0.0), p + ".q", issues))

    net = None
    if not issues:
        try:
            net = build_network(edge_list, weights, require_connected=bool(net_spec.get("require_connected", True)))
        except NetworkError as exc:
            issues.append(("$.network", str(exc)))
    coeffs = None
    if net is not None:
        try:
            coeffs = EdgeCoefficients(tuple(c_profiles), tuple(q_profiles))
        except NetworkError as exc:
            issues.append(("$.network.edges", str(exc)))
    if issues:
        raise ConfigError(issues)

    control_spec = raw.get("control", {}) or {}
    K_spec = control_spec.get("K")
    K = np.zeros((net.n, 0))
    if K_spec is not None:
        try:
            K = np.atleast_2d(np.asarray(K_spec, dtype=float))
        except Exception:
            issues.append(("$.control.K", "not a numeric matrix"))
        if K.shape[0] != net.n:
            issues.append(("$.control.K", f"needs {net.n} rows (one per vertex), got {K.shape[0]}"))
            K = np.zeros((net.n, 0))

    def dist_rows(key):
        spec = control_spec.get(key)
        if spec is None:
            return None, 0
        if not isinstance(spec, list) or len(spec) != m:
            issues.append((f"$.control.{key}", f"needs {m} rows (one per edge)"))
            return None, 0
        n_u = None
        rows = []
        for j, row in enumerate(spec):
            if not isinstance(row, list):
                issues.append((f"$.control.{key}[{j}]", "must be a list of profiles"))
                return None, 0
            if n_u is None:
                n_u = len(row)
            elif len(row) != n_u:
                issues.append((f"$.control.{key}[{j}]", f"row length {len(row)} != {n_u}"))
            rows.append(tuple(_profile(v, f"$.control.{key}[{j}][{i}]", issues) for i, v in enumerate(row)))
        return tuple(rows), (n_u or 0)

    K0_rows, nu0 = dist_rows("K0")
    B0_rows, nu1 = dist_rows("B0")
    n_u = max(nu0, nu1)
    if K0_rows is not None and B0_rows is not None and nu0 != nu1:
        issues.append(("$.control", f"K0 and B0 column counts differ ({nu0} vs {nu1})"))
    zero_rows = tuple(tuple(Profile.constant(0.0) for _ in range(n_u)) for _ in range(m))
    control = ControlConfig(
        K.shape[1],
        n_u,
        K,
        K0_rows if K0_rows is not None else zero_rows,
        B0_rows if B0_rows is not None else zero_rows,
    )

    delay_spec = raw.get("delays", {}) or {}
    r = delay_spec.get("r", 1.0)
    if not isinstance(r, (int, float)) or r <= 0:
        issues.append(("$.delays.r", "delay horizon must be positive"))
        r = 1.0
    r = float(r)
    bank = DelayBank(
        _measure(delay_spec.get("eta"), r, (m, m), "$.delays.eta", issues),
        _measure(delay_spec.get("gamma"), r, (m, m), "$.delays.gamma", issues),
        _measure(delay_spec.get("vartheta"), r, (m, max(n_u, 1)), "$.delays.vartheta", issues),
        _measure(delay_spec.get("nu"), r, (m, max(n_u, 1)), "$.delays.nu", issues),
    )

    def scalar(section, key, default, kind, pred, desc):
        val = (raw.get(section, {}) or {}).get(key, default)
        if not isinstance(val, kind) or not pred(val):
            issues.append((f"$.{section}.{key}", desc))
            return default
        return val

    grid_n = scalar("grid", "N", 16, int, lambda v: v >= 4, "needs an integer >= 4")
    n_theta = scalar("grid", "n_theta", 32, int, lambda v: v >= 4, "needs an integer >= 4")
    mu_count = scalar("mu", "count", 40, int, lambda v: v >= 1, "needs a positive integer")
    mu_margin = scalar("mu", "margin", 1.0, (int, float), lambda v: v > 0, "needs a positive number")
    svd_tol = scalar("tolerances", "svd", 1e-8, (int, float), lambda v: 0 < v < 1, "needs a tolerance in (0, 1)")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        issues.append(("$.seed", "needs a nonnegative integer"))
        seed = 0
    sim_dt = scalar("sim", "dt", 0.01, (int, float), lambda v: v > 0, "needs a positive step")
    sim_t = scalar("sim", "t_final", 10.0, (int, float), lambda v: v >= 0, "needs a nonnegative time")
    stride = scalar("sim", "snapshot_stride", 0, int, lambda v: v >= 0, "needs a nonnegative integer")

    if issues:
        raise ConfigError(issues)
    return RunConfig(
        net,
        coeffs,
        bank,
        control,
        grid_n,
        n_theta,
        mu_count,
        float(mu_margin),
        float(svd_tol),
        seed,
        float(sim_dt),
        float(sim_t),
        stride,
        raw,
    )
