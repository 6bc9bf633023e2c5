"""Monte Carlo experiments compared bin by bin against exact and asymptotic oracles.

Empirical quantities are always densities averaged over a bin, and the matching
oracle is the same density averaged over the same bin by a small tensor
Gauss-Legendre rule.  Standard errors are Poisson, ``sqrt(count) / (samples *
bin_measure * normalisation)``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import asymptotics as asy
from .errors import ConfigError, StatisticsError
from .kernels import KernelContext, R1_exact, R2_exact
from .quadrature import gauss_legendre
from .sampler import TruncationParams, haar_eigenangles, sample_spectra

__all__ = [
    "Binning",
    "OracleSpec",
    "ExperimentConfig",
    "Histogram",
    "ComparisonReport",
    "compare",
    "run_density_experiment",
    "run_pair_correlation_experiment",
    "run_edge_experiment",
    "run_eigenangle_experiment",
]

CSV_HEADER = ["bin_center_1", "bin_center_2", "empirical", "stderr", "oracle", "zscore"]
_KINDS = ("radial", "angular", "cartesian", "polar")
_ORACLES = ("exact_finite_N", "strong_limit", "weak_limit", "sp_eigenangle", "edge_limit")


@dataclass(frozen=True)
class Binning:
    """Uniform bins.

    ``radial``: ``ranges=((r0, r1),)``; ``angular``: ``((phi0, phi1),)`` over the
    whole disk; ``cartesian``: ``((x0, x1), (y0, y1))``; ``polar``:
    ``((r0, r1), (phi0, phi1))``.  Angles are in ``[-pi, pi]``.
    """

    kind: str
    ranges: tuple
    counts: tuple

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown binning kind {self.kind!r}; expected one of {_KINDS}")
        ranges = tuple(tuple(float(v) for v in r) for r in self.ranges)
        counts = tuple(int(c) for c in self.counts)
        ndim = 2 if self.kind in ("cartesian", "polar") else 1
        if len(ranges) != ndim or len(counts) != ndim:
            raise ConfigError(f"{self.kind} binning needs {ndim} range(s) and count(s)")
        for (lo, hi), n in zip(ranges, counts):
            if not hi > lo:
                raise ConfigError(f"zero-width or inverted bin range ({lo}, {hi})")
            if n < 1:
                raise ConfigError("bin counts must be >= 1")
        object.__setattr__(self, "ranges", ranges)
        object.__setattr__(self, "counts", counts)

    @property
    def edges(self):
        return tuple(np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(self.ranges, self.counts))


@dataclass(frozen=True)
class OracleSpec:
    """Which density the Monte Carlo histogram is compared with."""

    kind: str = "exact_finite_N"
    a: float | None = None
    M: int | None = None

    def __post_init__(self):
        if self.kind not in _ORACLES:
            raise ConfigError(f"unknown oracle {self.kind!r}; expected one of {_ORACLES}")
        if self.kind == "strong_limit" and not (self.a and self.a > 0):
            raise ConfigError("strong_limit oracle needs a > 0")

    @property
    def asymptotic(self) -> bool:
        return self.kind in ("strong_limit", "weak_limit", "edge_limit")


@dataclass(frozen=True)
class ExperimentConfig:
    params: TruncationParams
    samples: int
    seed: int
    binning: Binning
    oracle: OracleSpec = field(default_factory=OracleSpec)
    workers: int = 1
    threshold: float = 0.95

    def __post_init__(self):
        if isinstance(self.samples, bool) or int(self.samples) < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.threshold <= 1:
            raise ConfigError("threshold must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("workers")  # results never depend on the worker count
        return d


@dataclass
class Histogram:
    """Bin counts with the measure of every bin and the estimator normalisation."""

    edges: tuple
    counts: np.ndarray
    measure: np.ndarray
    samples: int
    normalisation: float

    @property
    def centers(self):
        c = [0.5 * (e[1:] + e[:-1]) for e in self.edges]
        if len(c) == 1:
            return c[0], np.zeros_like(c[0])
        g1, g2 = np.meshgrid(c[0], c[1], indexing="ij")
        return g1, g2

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.samples * self.measure * self.normalisation)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(self.counts) / (self.samples * self.measure * self.normalisation)


@dataclass
class ComparisonReport:
    config: dict
    center1: np.ndarray
    center2: np.ndarray
    counts: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    oracle: np.ndarray
    zscore: np.ndarray
    summary: dict

    def to_json(self) -> str:
        per_bin = [
            {
                "center": [float(a), float(b)],
                "count": int(n),
                "empirical": float(e),
                "stderr": float(s),
                "oracle": float(o),
                "zscore": _json_float(z),
            }
            for a, b, n, e, s, o, z in zip(
                self.center1, self.center2, self.counts, self.empirical, self.stderr, self.oracle, self.zscore
            )
        ]
        doc = {"config": _jsonable(self.config), "per_bin": per_bin, "summary": _jsonable(self.summary)}
        return json.dumps(doc, sort_keys=True, indent=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in zip(self.center1, self.center2, self.empirical, self.stderr, self.oracle, self.zscore):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def _json_float(x):
    x = float(x)
    if np.isnan(x):
        return None
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _json_float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ----------------------------------------------------------------------------
# comparison


def compare(hist: Histogram, oracle, threshold: float = 0.95, config: dict | None = None) -> ComparisonReport:
    """Per-bin z-scores and summary statistics over the occupied bins.

    ``oracle`` is an array of bin-averaged values or a callable evaluated at the
    bin centres, ``oracle(c1, c2)``.  Bins where the oracle vanishes but counts
    are present get an infinite z-score and are reported as divergent.
    """
    if np.any(hist.measure <= 0):
        raise ConfigError("zero-width bin")
    c1, c2 = hist.centers
    vals = np.asarray(oracle(c1, c2) if callable(oracle) else oracle, dtype=float)
    vals = np.broadcast_to(vals, hist.counts.shape)
    emp, se = hist.density, hist.stderr
    occ = hist.counts > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(occ, (emp - vals) / np.where(occ, se, 1.0), 0.0)
    divergent = occ & (vals == 0) & (emp > 0)
    z = np.where(divergent, np.inf, z)
    zo = z[occ]
    dof = int(occ.sum())
    finite = np.isfinite(zo)
    chi2 = float(np.sum(zo[finite] ** 2)) if dof else 0.0
    frac = float(np.mean(np.abs(zo) <= 3.0)) if dof else 0.0
    summary = {
        "sup_z": float(np.max(np.abs(zo))) if dof else 0.0,
        "chi2": chi2,
        "dof": dof,
        "fraction_within_3sigma": frac,
        "divergent_bins": int(divergent.sum()),
        "threshold": threshold,
        "pass": bool(dof > 0 and frac >= threshold and not divergent.any()),
    }
    return ComparisonReport(
        config=config or {},
        center1=c1.ravel(),
        center2=c2.ravel(),
        counts=hist.counts.ravel(),
        empirical=emp.ravel(),
        stderr=se.ravel(),
        oracle=vals.ravel().copy(),
        zscore=z.ravel(),
        summary=summary,
    )


# ----------------------------------------------------------------------------
# binning helpers


def _planar_coords(binning: Binning, pts: np.ndarray):
    if binning.kind == "radial":
        return (np.abs(pts),)
    if binning.kind == "angular":
        return (np.angle(pts),)
    if binning.kind == "cartesian":
        return pts.real, pts.imag
    return np.abs(pts), np.angle(pts)


def _planar_measure(binning: Binning) -> np.ndarray:
    e = binning.edges
    if binning.kind == "radial":
        return np.pi * np.diff(e[0] ** 2)
    if binning.kind == "angular":
        return 0.5 * np.diff(e[0])
    if binning.kind == "cartesian":
        return np.outer(np.diff(e[0]), np.diff(e[1]))
    return 0.5 * np.outer(np.diff(e[0] ** 2), np.diff(e[1]))


def _histogram(binning: Binning, coords, samples: int, measure, normalisation: float) -> Histogram:
    counts, _ = np.histogramdd(np.column_stack(coords), bins=binning.edges)
    return Histogram(binning.edges, counts.astype(np.int64), measure, samples, normalisation)


def _bin_nodes(binning: Binning, n: int = 6):
    """Quadrature nodes ``z[bin..., node]`` and equal-area weights summing to one per bin."""
    e = binning.edges
    t, wt = gauss_legendre(n)
    if binning.kind == "cartesian":
        x = e[0][:-1, None] + np.diff(e[0])[:, None] * t
        y = e[1][:-1, None] + np.diff(e[1])[:, None] * t
        z = x[:, None, :, None] + 1j * y[None, :, None, :]
        w = wt[:, None] * wt[None, :]
        return z.reshape(*z.shape[:2], -1), w.ravel()
    if binning.kind == "radial":
        u0, u1, p0, p1 = e[0][:-1] ** 2, e[0][1:] ** 2, np.array([-np.pi]), np.array([np.pi])
        nphi = 4 * n
    elif binning.kind == "angular":
        u0, u1, p0, p1 = np.array([0.0]), np.array([1.0]), e[0][:-1], e[0][1:]
        nphi = n
    else:
        u0, u1, p0, p1 = e[0][:-1] ** 2, e[0][1:] ** 2, e[1][:-1], e[1][1:]
        nphi = n
    tp, wp = gauss_legendre(nphi)
    u = u0[:, None] + (u1 - u0)[:, None] * t
    phi = p0[:, None] + (p1 - p0)[:, None] * tp
    z = np.sqrt(u)[:, None, :, None] * np.exp(1j * phi)[None, :, None, :]
    w = (wt[:, None] * wp[None, :]).ravel()
    z = z.reshape(z.shape[0], z.shape[1], -1)
    if binning.kind == "radial":
        z = z[:, 0]
    elif binning.kind == "angular":
        z = z[0]
    return z, w


def _bin_average(f, z, w):
    vals = f(z.reshape(-1)).reshape(z.shape)
    return vals @ w


def _density_oracle(spec: OracleSpec, params: TruncationParams):
    N, M = params.n_keep, params.m_removed
    if spec.kind == "exact_finite_N":
        ctx = KernelContext(N, M)
        return lambda z: R1_exact(ctx, z) / N
    if spec.kind == "strong_limit":
        return lambda z: asy.density_strong(spec.a, z)
    if spec.kind == "weak_limit":
        Mw = spec.M or M

        def weak(z):
            q = N * (1.0 - np.abs(z))
            out = N * asy.weak_density_scaled(Mw, np.maximum(q, 1e-300))
            return np.where(z.imag == 0, 0.0, out)

        return weak
    raise ConfigError(f"oracle {spec.kind!r} is not a planar density oracle")


def _reflect(eigs: np.ndarray) -> np.ndarray:
    return np.concatenate([eigs, eigs.conj()], axis=1)


def _draw(cfg: ExperimentConfig):
    eigs, _ = sample_spectra(cfg.params, cfg.seed, cfg.samples, workers=cfg.workers)
    return eigs


# ----------------------------------------------------------------------------
# experiments


def run_density_experiment(cfg: ExperimentConfig) -> ComparisonReport:
    """Binned ``rho_{2N} = R_1/N`` of reflected spectra against the configured oracle.

    With an asymptotic oracle the exact finite-N comparison is run first and
    recorded under ``summary["exact_layer"]``.
    """
    b = cfg.binning
    if b.kind in ("radial", "polar") and (b.ranges[0][0] < 0 or b.ranges[0][1] > 1):
        raise ConfigError("radial bin range must lie inside [0, 1]")
    if b.kind == "cartesian":
        (x0, x1), (y0, y1) = b.ranges
        if max(abs(x0), abs(x1)) ** 2 + max(abs(y0), abs(y1)) ** 2 > 1:
            raise ConfigError("cartesian bins must lie inside the unit disk")
    if cfg.oracle.kind in ("sp_eigenangle", "edge_limit"):
        raise ConfigError(f"oracle {cfg.oracle.kind!r} does not apply to density experiments")
    pts = _reflect(_draw(cfg)).ravel()
    hist = _histogram(b, _planar_coords(b, pts), cfg.samples, _planar_measure(b), 2.0 * cfg.params.n_keep)
    z, w = _bin_nodes(b)
    exact = _bin_average(_density_oracle(OracleSpec(), cfg.params), z, w)
    exact_report = compare(hist, exact, cfg.threshold)
    if not cfg.oracle.asymptotic:
        exact_report.config = cfg.to_dict()
        return exact_report
    vals = _bin_average(_density_oracle(cfg.oracle, cfg.params), z, w)
    report = compare(hist, vals, cfg.threshold, cfg.to_dict())
    report.summary["exact_layer"] = {k: exact_report.summary[k] for k in ("sup_z", "chi2", "dof", "pass")}
    return report


def run_pair_correlation_experiment(
    cfg: ExperimentConfig,
    z0: complex,
    radii,
    ref_radius: float = 0.03,
) -> ComparisonReport:
    """Ordered-pair estimate of ``R_2(z0, .)`` in annuli ``radii[j] <= |z - z0| < radii[j+1]``.

    For every reflected eigenvalue in the disk ``|z - z0| < ref_radius`` the
    other eigenvalues (excluding itself and its own conjugate) are binned by
    separation.  Four ordered-pair densities of the reflected point set make
    one unit of ``R_2``.
    """
    z0 = complex(z0)
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size < 2 or np.any(np.diff(radii) <= 0) or radii[0] < 0:
        raise ConfigError("radii must be an increasing sequence of at least two nonnegative values")
    if abs(z0) + max(radii[-1], ref_radius) >= 1:
        raise ConfigError("annuli around z0 must lie inside the unit disk")
    N = cfg.params.n_keep
    eigs = _draw(cfg)
    pts = _reflect(eigs)  # (S, 2N); column j and j+N are conjugate partners
    in_ref = np.abs(pts - z0) < ref_radius
    if not in_ref.any():
        raise StatisticsError("no eigenvalue fell into the reference disk")
    s_idx, p_idx = np.nonzero(in_ref)
    partner = (p_idx + N) % (2 * N)
    d = np.abs(pts[s_idx] - pts[s_idx, p_idx][:, None])
    keep = np.ones_like(d, dtype=bool)
    rows = np.arange(d.shape[0])
    keep[rows, p_idx] = False
    keep[rows, partner] = False
    counts, _ = np.histogram(d[keep], bins=radii)
    ref_area = np.pi * ref_radius**2
    ann_area = np.pi * np.diff(radii**2)
    hist = Histogram((radii,), counts.astype(np.int64), ref_area * ann_area, cfg.samples, 4.0)

    ctx = KernelContext(N, cfg.params.m_removed)
    # reference disk nodes (equal area) x annulus nodes (equal area)
    t, wt = gauss_legendre(4)
    tp, wp = gauss_legendre(8, -np.pi, np.pi)
    zr = z0 + ref_radius * np.sqrt(t)[:, None] * np.exp(1j * tp)[None, :]
    wr = (wt[:, None] * wp[None, :] / (2 * np.pi)).ravel()
    zr = zr.ravel()
    ta, wa = gauss_legendre(6)
    nphi = 48
    phi = 2 * np.pi * np.arange(nphi) / nphi
    oracle = np.empty(radii.size - 1)
    for j in range(radii.size - 1):
        u = radii[j] ** 2 + (radii[j + 1] ** 2 - radii[j] ** 2) * ta
        off = (np.sqrt(u)[:, None] * np.exp(1j * phi)[None, :]).ravel()
        wo = (wa[:, None] * np.full(nphi, 1.0 / nphi)[None, :]).ravel()
        z1 = np.repeat(zr, off.size)
        z2 = z1 + np.tile(off, zr.size)
        vals = R2_exact(ctx, z1, z2).reshape(zr.size, off.size)
        oracle[j] = wr @ vals @ wo
    report = compare(hist, oracle, cfg.threshold, cfg.to_dict())
    report.config.update({"z0": [z0.real, z0.imag], "radii": radii.tolist(), "ref_radius": ref_radius})
    report.summary["reference_points"] = int(in_ref.sum())
    return report


def run_edge_experiment(cfg: ExperimentConfig, nodes: int = 4) -> ComparisonReport:
    """Density in the microscopic variables ``x + iy = N (1 - z)`` near ``z = 1``.

    ``cfg.binning`` must be cartesian in ``(x, y)``.  The exact oracle is
    ``N^{-2} R_1(1 - (x+iy)/N)``; the ``edge_limit`` oracle is the limiting edge
    density (the exact layer is then recorded as well).  Both vanish for
    ``x <= 0``, i.e. outside the disk.
    """
    b = cfg.binning
    if b.kind != "cartesian":
        raise ConfigError("edge experiment needs cartesian bins in (x, y)")
    if cfg.oracle.kind not in ("exact_finite_N", "edge_limit"):
        raise ConfigError("edge experiment supports the exact_finite_N and edge_limit oracles")
    N, M = cfg.params.n_keep, cfg.params.m_removed
    pts = _reflect(_draw(cfg)).ravel()
    xi = N * (1.0 - pts)
    hist = _histogram(b, (xi.real, xi.imag), cfg.samples, _planar_measure(b), 2.0)
    zn, w = _bin_nodes(b, nodes)
    zn = zn.reshape(-1)
    ctx = KernelContext(N, M)

    def exact(xy):
        z = 1.0 - xy / N
        out = np.zeros(xy.shape)
        ok = np.abs(z) <= 1
        out[ok] = R1_exact(ctx, z[ok]) / N**2
        return out

    def limit(xy):
        out = np.zeros(xy.shape)
        ok = xy.real > 0
        out[ok] = asy.edge_density(cfg.oracle.M or M, xy.real[ok], xy.imag[ok])
        return out

    shape = hist.counts.shape + (w.size,)
    exact_vals = exact(zn).reshape(shape) @ w
    exact_report = compare(hist, exact_vals, cfg.threshold, cfg.to_dict())
    if cfg.oracle.kind == "exact_finite_N":
        return exact_report
    report = compare(hist, limit(zn).reshape(shape) @ w, cfg.threshold, cfg.to_dict())
    report.summary["exact_layer"] = {k: exact_report.summary[k] for k in ("sup_z", "chi2", "dof", "pass")}
    return report


def run_eigenangle_experiment(
    dim: int, samples: int, seed: int, n_bins: int = 60, threshold: float = 0.95
) -> ComparisonReport:
    """Eigenangles in ``[0, pi]`` of untruncated Haar ``U(dim, H)`` against the Sp(2N) density."""
    if samples < 1:
        raise ConfigError("samples must be >= 1")
    ang = haar_eigenangles(dim, seed, samples).ravel()
    edges = np.linspace(0.0, np.pi, n_bins + 1)
    counts, _ = np.histogram(ang, bins=edges)
    hist = Histogram((edges,), counts.astype(np.int64), np.diff(edges), samples, 2.0 * dim)
    t, wt = gauss_legendre(8)
    nodes = edges[:-1, None] + np.diff(edges)[:, None] * t
    oracle = asy.sp_eigenangle_density(dim, nodes) @ wt
    config = {"dim": dim, "samples": samples, "seed": seed, "n_bins": n_bins, "oracle": "sp_eigenangle"}
    return compare(hist, oracle, threshold, config)
