"""Seeded samplers for path-space measures on a discrete time grid.

Four measures at desk scale: Wiener, flat Brownian bridge (pinned at 0),
Ornstein-Uhlenbeck with exact Gaussian transitions, and the Brownian bridge
on the hyperboloid model of H^n driven by the bridge SDE

    dy_t = X(y_t) o dB_t + grad log p_{T-t}(y_t, y0) dt,

integrated by geodesic Euler-Maruyama: at each step the frame maps the
Gaussian increment into the tangent space, the drift is added, the point is
moved by the exponential map and the frame is parallel-transported along.
The drift blows up like d/(T-t) + 1/sqrt(T-t) near the terminal time, so the
grid is refined geometrically toward T and the last node is snapped to the
endpoint with the pre-snap gap recorded as a diagnostic.

Noise is counter-based (Philox keyed by seed, counter blocks indexed by step),
so ensembles are bit-reproducible for a given config and independent of any
worker schedule: the value consumed for (path i, step j) sits at a fixed
counter offset.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import hyperbolic as hyp
from .hyperbolic import HeatKernelParams

MAGIC = b"PINEQENS1\n"


class SamplerError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Time grids


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing nodes 0 = t_0 < ... < t_N = T."""

    nodes: tuple

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise SamplerError("grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise SamplerError("grid must start at t = 0")
        if not np.all(np.diff(nodes) > 0):
            raise SamplerError("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", tuple(float(t) for t in nodes))

    @property
    def T(self):
        return self.nodes[-1]

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def max_step(self):
        return float(np.max(np.diff(self.nodes)))

    def array(self):
        return np.asarray(self.nodes)

    @classmethod
    def uniform(cls, T, n_steps):
        if n_steps < 1:
            raise SamplerError("need at least one step")
        return cls(tuple(T * k / n_steps for k in range(n_steps + 1)))

    @classmethod
    def with_geometric_tail(cls, T, n_steps, lam=0.5, floor=1e-6):
        """Uniform grid whose final interval [T - h, T] is subdivided at
        T - h lam^k until steps reach floor * T, resolving the 1/(T-t)
        drift singularity of bridge dynamics."""
        if not 0 < lam < 1:
            raise SamplerError("tail ratio lam must be in (0, 1)")
        base = [T * k / n_steps for k in range(n_steps)]
        h = T / n_steps
        tail = []
        k = 1
        while h * lam**k > floor * T:
            tail.append(T - h * lam**k)
            k += 1
        return cls(tuple(base + tail + [T]))

    def refined(self):
        """Dyadic refinement: insert the midpoint of every interval, halving
        the max step and the tail floor alike (for refinement studies)."""
        nodes = self.array()
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        out = np.empty(nodes.size + mids.size)
        out[0::2] = nodes
        out[1::2] = mids
        return TimeGrid(tuple(out))

    def index_of(self, t, tol=1e-12):
        nodes = self.array()
        i = int(np.argmin(np.abs(nodes - t)))
        if abs(nodes[i] - t) > tol * max(1.0, self.T):
            raise SamplerError(f"time {t} is not a grid node")
        return i


# ---------------------------------------------------------------------------
# Counter-based noise


def step_normals(seed, step, shape, stream=0):
    """Standard normals from a Philox block keyed by (seed; stream, step).

    Counter blocks for distinct (stream, step) pairs are disjoint (the low
    64-bit word would have to overflow to collide), which makes draws for
    (path, step) reproducible and schedule-independent.
    """
    bg = np.random.Philox(key=np.uint64(seed), counter=[0, stream, step, 0])
    return np.random.Generator(bg).standard_normal(shape)


# ---------------------------------------------------------------------------
# Configs and ensembles


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    n_paths: int
    grid: TimeGrid
    dim: int = 1
    x0: tuple | None = None
    y0: tuple | None = None
    drift_cap: float = 4.0
    generator_convention: str = "half_laplacian"

    def __post_init__(self):
        if self.n_paths < 1:
            raise SamplerError("n_paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise SamplerError("seed must fit in 64 bits")
        if self.x0 is not None:
            object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        if self.y0 is not None:
            object.__setattr__(self, "y0", tuple(float(v) for v in self.y0))

    def to_dict(self):
        return {
            "seed": self.seed,
            "n_paths": self.n_paths,
            "grid_nodes": list(self.grid.nodes),
            "dim": self.dim,
            "x0": list(self.x0) if self.x0 is not None else None,
            "y0": list(self.y0) if self.y0 is not None else None,
            "drift_cap": self.drift_cap,
            "generator_convention": self.generator_convention,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            seed=d["seed"],
            n_paths=d["n_paths"],
            grid=TimeGrid(tuple(d["grid_nodes"])),
            dim=d["dim"],
            x0=tuple(d["x0"]) if d.get("x0") else None,
            y0=tuple(d["y0"]) if d.get("y0") else None,
            drift_cap=d.get("drift_cap", 4.0),
            generator_convention=d.get("generator_convention", "half_laplacian"),
        )

    @property
    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class PathEnsemble:
    """A batch of discrete paths: points[path, node, coord]."""

    config: SamplerConfig
    measure_tag: str  # wiener | flat_bridge | ou | hyperbolic_bridge
    points: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    frames: np.ndarray | None = None

    @property
    def grid(self):
        return self.config.grid

    @property
    def n_paths(self):
        return self.points.shape[0]

    def path(self, i):
        return DiscretePath(
            grid=self.grid,
            points=self.points[i],
            measure_tag=self.measure_tag,
            frames=self.frames[i] if self.frames is not None else None,
        )


@dataclass
class DiscretePath:
    grid: TimeGrid
    points: np.ndarray
    measure_tag: str
    frames: np.ndarray | None = None


# ---------------------------------------------------------------------------
# Flat samplers


def sample_wiener(cfg: SamplerConfig) -> PathEnsemble:
    nodes = cfg.grid.array()
    dts = np.diff(nodes)
    xi = step_normals(cfg.seed, 0, (cfg.n_paths, dts.size, cfg.dim))
    incr = np.sqrt(dts)[None, :, None] * xi
    points = np.zeros((cfg.n_paths, nodes.size, cfg.dim))
    np.cumsum(incr, axis=1, out=points[:, 1:, :])
    if cfg.x0 is not None:
        points += np.asarray(cfg.x0)[None, None, :]
    return PathEnsemble(config=cfg, measure_tag="wiener", points=points)


def sample_flat_bridge(cfg: SamplerConfig) -> PathEnsemble:
    """Brownian bridge pinned at 0: B_t - (t/T) B_T, endpoint exactly zero."""
    if cfg.x0 is not None and any(v != 0 for v in cfg.x0):
        raise SamplerError("flat bridge is pinned at the origin")
    w = sample_wiener(replace(cfg, x0=None))
    nodes = cfg.grid.array()
    frac = (nodes / nodes[-1])[None, :, None]
    points = w.points - frac * w.points[:, -1:, :]
    return PathEnsemble(config=cfg, measure_tag="flat_bridge", points=points)


def sample_ou(cfg: SamplerConfig, start="stationary", scheme="exact") -> PathEnsemble:
    """Langevin dynamics du = dW - (1/2) u dt.

    ``exact`` uses the Gaussian transition u_{t+h} = e^{-h/2} u_t +
    sqrt(1 - e^{-h}) xi (stationary law = standard normal); ``euler`` is the
    plain Euler-Maruyama discretization, kept for scheme cross-checks.
    """
    nodes = cfg.grid.array()
    n_steps = nodes.size - 1
    points = np.empty((cfg.n_paths, nodes.size, cfg.dim))
    if start == "stationary":
        points[:, 0, :] = step_normals(cfg.seed, 0, (cfg.n_paths, cfg.dim), stream=1)
    else:
        points[:, 0, :] = np.asarray(cfg.x0 if cfg.x0 is not None else 0.0)
    for k in range(n_steps):
        h = nodes[k + 1] - nodes[k]
        xi = step_normals(cfg.seed, k, (cfg.n_paths, cfg.dim))
        u = points[:, k, :]
        if scheme == "exact":
            points[:, k + 1, :] = math.exp(-h / 2.0) * u + math.sqrt(1.0 - math.exp(-h)) * xi
        elif scheme == "euler":
            points[:, k + 1, :] = u - 0.5 * h * u + math.sqrt(h) * xi
        else:
            raise SamplerError(f"unknown OU scheme {scheme!r}")
    return PathEnsemble(config=cfg, measure_tag="ou", points=points)


# ---------------------------------------------------------------------------
# Hyperbolic bridge


def sample_hyperbolic_bridge(cfg: SamplerConfig, store_frames=False) -> PathEnsemble:
    """Geodesic Euler-Maruyama for the bridge SDE on H^n, n = cfg.dim.

    Per step: tangent increment sqrt(h) F xi + h grad log p_{T-t}(y, y0),
    exponential-map move, frame transport.  The drift is clipped at
    drift_cap * (d(y, y0)/(T-t) + 1/sqrt(T-t)) with clip events counted.
    The final node is snapped to y0; pre-snap distances are recorded.
    """
    n = cfg.dim
    if n not in (2, 3):
        raise SamplerError("hyperbolic bridge supports n = 2, 3")
    params = HeatKernelParams(n=n, generator_convention=cfg.generator_convention)
    nodes = cfg.grid.array()
    T = nodes[-1]
    x0 = np.asarray(cfg.x0, dtype=float) if cfg.x0 is not None else hyp.origin(n)
    y0 = np.asarray(cfg.y0, dtype=float) if cfg.y0 is not None else hyp.origin(n)
    for name, p in (("x0", x0), ("y0", y0)):
        if p.shape != (n + 1,) or abs(hyp.minkowski_dot(p, p) + 1.0) > 1e-8:
            raise SamplerError(f"{name} must be a point on the hyperboloid sheet of H^{n}")

    m = cfg.n_paths
    drift_eval = _make_drift(params, T, nodes)

    y = np.broadcast_to(x0, (m, n + 1)).copy()
    F = np.broadcast_to(hyp.frame_at(x0, n), (m, n, n + 1)).copy()
    points = np.empty((m, nodes.size, n + 1))
    points[:, 0, :] = y
    frames = None
    if store_frames:
        frames = np.empty((m, nodes.size, n, n + 1))
        frames[:, 0] = F

    cap_events = 0
    total_steps = 0
    for k in range(nodes.size - 1):
        t = nodes[k]
        h = nodes[k + 1] - t
        t_rem = T - t
        drift = drift_eval(t_rem, y, y0)
        # mirror of the gradient bound: |drift| <= cap (d/(T-t) + 1/sqrt(T-t))
        r = hyp.dist(y, y0)
        cap = cfg.drift_cap * (r / t_rem + 1.0 / math.sqrt(t_rem))
        mag = np.sqrt(np.maximum(hyp.minkowski_dot(drift, drift), 0.0))
        over = mag > cap
        if np.any(over):
            cap_events += int(over.sum())
            scale = np.where(over, cap / np.where(mag > 0, mag, 1.0), 1.0)
            drift = drift * scale[:, None]
        total_steps += m
        xi = step_normals(cfg.seed, k, (m, n))
        dv = math.sqrt(h) * np.einsum("pj,pjc->pc", xi, F) + h * drift
        y_new = hyp.exp_map(y, dv)
        F = np.stack(
            [hyp.parallel_transport(F[:, j, :], y, y_new) for j in range(n)], axis=1
        )
        if (k + 1) % 16 == 0:
            F = hyp.gram_schmidt_tangent(y_new, F)
        y = y_new
        points[:, k + 1, :] = y
        if store_frames:
            frames[:, k + 1] = hyp.gram_schmidt_tangent(y, F)

    presnap = hyp.dist(points[:, -1, :], y0)
    points[:, -1, :] = y0
    diagnostics = {
        "presnap_gap": presnap,
        "presnap_gap_median": float(np.median(presnap)),
        "cap_event_fraction": cap_events / max(total_steps, 1),
    }
    return PathEnsemble(
        config=cfg,
        measure_tag="hyperbolic_bridge",
        points=points,
        diagnostics=diagnostics,
        frames=frames,
    )


def _make_drift(params: HeatKernelParams, T, nodes):
    if params.n == 3:
        def drift_eval(t_rem, y, y0):
            return hyp.grad_log_heat_kernel(t_rem, y, y0, params)

        return drift_eval

    # n = 2: the radial derivative needs quadrature, so interpolate the
    # regular part g(t', r) = d/dr log p_{t'}(r) + r/t' on a (t', r) grid
    from scipy.interpolate import RectBivariateSpline

    t_lo = max(T - nodes[-2], 1e-9) * 0.5
    t_grid = np.geomspace(t_lo, T, 48)
    r_grid = np.linspace(0.0, 6.0 * math.sqrt(T) + 4.0, 96)
    vals = np.empty((t_grid.size, r_grid.size))
    for i, tp in enumerate(t_grid):
        dl = hyp.dlog_heat_kernel_dr(tp, r_grid[1:], params)
        vals[i, 1:] = dl + r_grid[1:] / tp  # regular part: the -r/t' pole removed
        vals[i, 0] = 0.0
    spline = RectBivariateSpline(np.log(t_grid), r_grid, vals, kx=3, ky=3)

    def drift_eval(t_rem, y, y0):
        r = hyp.dist(y, y0)
        reg = spline(math.log(np.clip(t_rem, t_lo, T)), r, grid=False)
        dlog = reg - r / t_rem
        coef = np.where(r > 1e-12, -dlog / np.where(r > 0, r, 1.0), 0.0)
        return coef[:, None] * hyp.log_map(y, y0)

    return drift_eval


def continuity_diagnostic(ens: PathEnsemble):
    """max over steps of jump / sqrt(h log(1/h)): a qualitative modulus-of-
    continuity check (no hard exponent asserted)."""
    nodes = ens.grid.array()
    dts = np.diff(nodes)
    scale = np.sqrt(dts * np.log(1.0 / np.minimum(dts, 0.5)))
    if ens.measure_tag == "hyperbolic_bridge":
        jumps = hyp.dist(ens.points[:, 1:, :], ens.points[:, :-1, :])
    else:
        jumps = np.linalg.norm(np.diff(ens.points, axis=1), axis=-1)
    return float((jumps / scale[None, :]).max())


# ---------------------------------------------------------------------------
# Serialization: columnar binary (header JSON + little-endian float64,
# path-major) and CSV for small runs


def save_ensemble(path, ens: PathEnsemble):
    header = {
        "format": "pathineq.ensemble.v1",
        "config": ens.config.to_dict(),
        "config_hash": ens.config.config_hash,
        "measure_tag": ens.measure_tag,
        "shape": list(ens.points.shape),
        "arrays": ["points"],
    }
    diag_arrays = {}
    for k, v in ens.diagnostics.items():
        if isinstance(v, np.ndarray):
            header.setdefault("diag_arrays", []).append([k, list(v.shape)])
            diag_arrays[k] = v
        else:
            header.setdefault("diag_scalars", {})[k] = v
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(len(blob).to_bytes(8, "little"))
        fh.write(blob)
        fh.write(np.ascontiguousarray(ens.points, dtype="<f8").tobytes())
        for k, _ in header.get("diag_arrays", []):
            fh.write(np.ascontiguousarray(diag_arrays[k], dtype="<f8").tobytes())


def load_ensemble(path) -> PathEnsemble:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise SamplerError(f"{path}: not a pathineq ensemble file")
        (hlen,) = (int.from_bytes(fh.read(8), "little"),)
        header = json.loads(fh.read(hlen))
        shape = tuple(header["shape"])
        count = int(np.prod(shape))
        points = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(shape).copy()
        diagnostics = dict(header.get("diag_scalars", {}))
        for k, shp in header.get("diag_arrays", []):
            cnt = int(np.prod(shp))
            diagnostics[k] = np.frombuffer(fh.read(cnt * 8), dtype="<f8").reshape(shp).copy()
    cfg = SamplerConfig.from_dict(header["config"])
    return PathEnsemble(
        config=cfg, measure_tag=header["measure_tag"], points=points, diagnostics=diagnostics
    )


def ensemble_to_csv(path, ens: PathEnsemble, max_paths=10_000):
    if ens.n_paths > max_paths:
        raise SamplerError(
            f"CSV export is for small runs (n_paths <= {max_paths}); use the binary format"
        )
    nodes = ens.grid.array()
    d = ens.points.shape[-1]
    with open(path, "w", newline="") as fh:
        fh.write("path,node,t," + ",".join(f"x{j}" for j in range(d)) + "\n")
        for i in range(ens.n_paths):
            for k, t in enumerate(nodes):
                coords = ",".join(repr(float(v)) for v in ens.points[i, k])
                fh.write(f"{i},{k},{t!r},{coords}\n")
