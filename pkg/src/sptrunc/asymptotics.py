"""Limiting laws for truncated symplectic unitary matrices.

Regimes covered:

* strong non-unitarity, ``M = aN`` (limiting density, annulus decay rate, bulk
  pre-kernel, contour representation of the infinite series, Ginibre
  correlations after unfolding);
* weak non-unitarity, ``M`` fixed (radial profile near the unit circle,
  n-point functions, pre-kernels near ``e^{i phi0}`` and near ``z = 1``);
* reference densities of Haar symplectic unitary eigenangles.

All finite-N comparisons use the full-disk picture in which ``R_1``
integrates to ``N``; functions that also exist in the upper-half-plane picture
take a ``half_plane`` flag that multiplies an n-point quantity by ``2**n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ContourError, DomainError, ParameterError, PoleError
from .kernels import log_beta
from .quadrature import gauss_legendre, texp_moment

__all__ = [
    "StrongRegimeParams",
    "WeakRegimeParams",
    "density_strong",
    "decay_rate",
    "prekernel_strong_bulk",
    "prekernel_contour",
    "contour_admissible",
    "ginibre_corr_det",
    "h_profile",
    "weak_density_scaled",
    "weak_corr_det",
    "weak_prekernel_M1",
    "weak_prekernel_generalM",
    "edge_prekernel",
    "edge_density",
    "sp_eigenangle_density",
    "microscopic_f",
    "microscopic_f_maxima",
    "origin_density_M1",
]


def _positive_int(name, val):
    if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
        raise ParameterError(f"{name} must be a positive integer, got {val!r}")
    return int(val)


@dataclass(frozen=True)
class StrongRegimeParams:
    """``a = lim M/N`` with an optional finite ``(N, M)`` pair."""

    a: float
    n_keep: int | None = None
    m_removed: int | None = None

    def __post_init__(self):
        if not self.a > 0:
            raise ParameterError(f"a must be positive, got {self.a}")

    @classmethod
    def from_finite(cls, n_keep: int, m_removed: int) -> "StrongRegimeParams":
        return cls(m_removed / n_keep, n_keep, m_removed)

    @property
    def support_radius2(self) -> float:
        """Squared radius ``1/(1+a)`` of the limiting support."""
        return 1.0 / (1.0 + self.a)


@dataclass(frozen=True)
class WeakRegimeParams:
    """Fixed ``M`` with an optional ``N``; the eigenangle spacing is ``pi/N``."""

    M: int
    n_keep: int | None = None

    def __post_init__(self):
        _positive_int("M", self.M)
        if self.n_keep is not None:
            _positive_int("n_keep", self.n_keep)

    @property
    def spacing(self) -> float:
        if self.n_keep is None:
            raise ParameterError("spacing needs a finite n_keep")
        return np.pi / self.n_keep

    def point(self, q, phi):
        """Spectral point ``(1 - q/N) e^{i phi}``."""
        n = self.n_keep
        if n is None:
            raise ParameterError("point needs a finite n_keep")
        return (1.0 - np.asarray(q) / n) * np.exp(1j * np.asarray(phi))


# ----------------------------------------------------------------------------
# strong non-unitarity


def density_strong(a: float, z):
    """Limiting ``R_1 / N`` at ``M = aN``.

    ``a / (pi (1-|z|^2)^2)`` inside ``|z|^2 <= 1/(1+a)`` off the real axis and
    zero elsewhere.  The support boundary takes the inside value.
    """
    if not a > 0:
        raise ParameterError("a must be positive")
    z = np.asarray(z, dtype=complex)
    r2 = z.real**2 + z.imag**2
    if np.any(r2 >= 1):
        raise DomainError("density_strong needs |z| < 1")
    inside = (r2 <= 1.0 / (1.0 + a)) & (z.imag != 0)
    out = np.where(inside, a / (np.pi * (1.0 - r2) ** 2), 0.0)
    return float(out) if out.ndim == 0 else out


def decay_rate(a: float, x):
    """Exponential rate ``log[x (1-x)^a (1+a)^(1+a) / a^a]`` on ``1/(1+a) <= x < 1``."""
    if not a > 0:
        raise ParameterError("a must be positive")
    x = np.asarray(x, dtype=float)
    lo = 1.0 / (1.0 + a)
    if np.any(x < lo * (1 - 1e-15)) or np.any(x >= 1):
        raise DomainError(f"x must lie in [{lo}, 1)")
    out = np.log(x) + a * np.log1p(-x) + (1 + a) * np.log1p(a) - a * np.log(a)
    return float(out) if out.ndim == 0 else out


def prekernel_strong_bulk(M: int, u, v):
    """Large-M bulk pre-kernel ``M / (pi (u - v)) (1 - uv)^{-(2M+1)}``."""
    M = _positive_int("M", M)
    u, v = complex(u), complex(v)
    if u == v:
        raise PoleError("prekernel_strong_bulk has a pole at u = v")
    log_val = np.log(M / np.pi) - np.log(u - v) - (2 * M + 1) * np.log(1.0 - u * v)
    return complex(np.exp(log_val))


def contour_admissible(u, v, radius: float) -> bool:
    """Convergence conditions for the contour representation on ``|w| = radius``."""
    return 0 < radius < 1 and max(abs(u), abs(v)) ** 2 * (1 + radius) < 1


def prekernel_contour(M: int, u, v, radius: float = 0.4, nodes: int = 512):
    """Infinite-series pre-kernel from its contour-integral representation.

    The integrand over ``|w| = radius`` is

        (1+w)^{M+1/2} / w^{M+1} * [1 - (uv)^2 (1+w)]^{-(M+1)}
        * (v - u)[1 + uv(1+w)] / ([1 - v^2(1+w)][1 - u^2(1+w)])

    with prefactor ``M^2 B(1/2, M) / (2 pi^2 i)``, integrated by the periodic
    trapezoid rule.
    """
    M = _positive_int("M", M)
    if nodes < 64:
        raise ParameterError("nodes must be >= 64")
    u, v = complex(u), complex(v)
    if not contour_admissible(u, v, radius):
        raise ContourError(
            f"radius {radius} is not admissible for |u|={abs(u):.4f}, |v|={abs(v):.4f}; "
            "need radius < 1 and max(|u|,|v|)^2 (1+radius) < 1 -- try a smaller radius"
        )
    if u == v:
        return 0j
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    w = radius * np.exp(1j * theta)
    p = 1.0 + w
    dens = [1.0 - (u * v) ** 2 * p, 1.0 - v * v * p, 1.0 - u * u * p]
    if min(np.min(np.abs(d)) for d in dens) < 1e-8:
        raise ContourError("integrand pole within numerical distance of the contour; use a smaller radius")
    log_pref = 2 * np.log(M) + log_beta(0.5, M) - np.log(np.pi)
    f = (
        np.exp((M + 0.5) * np.log(p) - M * np.log(w) - (M + 1) * np.log(dens[0]))
        * (v - u)
        * (1.0 + u * v * p)
        / (dens[1] * dens[2])
    )
    # (1 / 2 pi i) \oint f dw/w  =  mean of f over equispaced angles
    return complex(np.exp(log_pref) * np.mean(f))


def ginibre_corr_det(ss) -> float:
    """Ginibre n-point law ``det[exp(2 pi (s_k conj(s_l) - |s_k|^2/2 - |s_l|^2/2))]``."""
    s = np.asarray(ss, dtype=complex).ravel()
    if s.size < 1:
        raise ParameterError("need at least one point")
    a2 = np.abs(s) ** 2
    G = np.exp(2.0 * np.pi * (s[:, None] * s[None, :].conj() - 0.5 * a2[:, None] - 0.5 * a2[None, :]))
    return float(max(np.linalg.det(G).real, 0.0))


# ----------------------------------------------------------------------------
# weak non-unitarity


def h_profile(M: int, r):
    """Radial profile ``h_M(r) = (4 pi r)^{M-1}/(M-1)! int_0^1 t^M e^{-4 pi r t} dt``."""
    M = _positive_int("M", M)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("h_profile needs r >= 0")
    c = 4.0 * np.pi * r
    out = c ** (M - 1) / np.exp(lgamma(M)) * texp_moment(M, c)
    return float(out) if out.ndim == 0 else out


def weak_density_scaled(M: int, q, half_plane: bool = False):
    """``lim N^{-1} rho_{2N}((1 - q/N) e^{i phi})`` for ``0 < phi < pi``.

    Equals ``(2/pi) (4q)^{2M-1}/(2M-1)! int_0^1 t^{2M} e^{-4qt} dt``; doubled
    in the upper-half-plane picture.
    """
    M = _positive_int("M", M)
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0):
        raise DomainError("q must be positive")
    out = (2.0 / np.pi) * (4.0 * q) ** (2 * M - 1) / np.exp(lgamma(2 * M)) * texp_moment(2 * M, 4.0 * q)
    if half_plane:
        out = 2.0 * out
    return float(out) if out.ndim == 0 else out


def weak_corr_det(M: int, pts, half_plane: bool = False) -> float:
    """Weak-limit ``N^{-2n} R_n`` at ``z_j = (1 - q_j/N) e^{i phi0 + i phi_j/N}``.

    ``pts`` is a sequence of ``(q_j, phi_j)`` pairs.
    """
    M = _positive_int("M", M)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    q, phi = pts[:, 0], pts[:, 1]
    if np.any(q <= 0):
        raise DomainError("all q_j must be positive")
    n = q.size
    c = 2.0 * (q[:, None] + q[None, :] - 1j * (phi[:, None] - phi[None, :]))
    G = texp_moment(2 * M, c)
    log_pre = n * np.log(2.0 / np.pi) + np.sum((2 * M - 1) * np.log(4.0 * q)) - n * lgamma(2 * M)
    val = np.exp(log_pre) * np.linalg.det(G).real
    if half_plane:
        val *= 2.0**n
    return float(max(val, 0.0))


def _check_phi0(phi0):
    if not 0 < phi0 < np.pi:
        raise DomainError("phi0 must lie in (0, pi)")


def weak_prekernel_M1(q1, q2, phi1, phi2, phi0):
    """``N^{-3} g_N(u, v)`` at ``M = 1`` for ``u ~ e^{i phi0}`` and ``v ~ e^{-i phi0}``.

    ``u = (1 - q1/N) e^{i phi0 + i phi1/N}``, ``v = (1 - q2/N) e^{-i phi0 + i phi2/N}``.
    """
    _check_phi0(phi0)
    t = q1 + q2 - 1j * (phi1 + phi2)
    return complex((1.0 - np.exp(-2 * t) * (1 + 2 * t + 2 * t * t)) / (np.pi * t**3 * 2j * np.sin(phi0)))


def weak_prekernel_generalM(M: int, q1, q2, phi1, phi2, phi0):
    """``N^{-(2M+1)} g_N(u, v)`` for any fixed ``M`` (same points as :func:`weak_prekernel_M1`)."""
    M = _positive_int("M", M)
    _check_phi0(phi0)
    t = q1 + q2 - 1j * (phi1 + phi2)
    pre = 2.0 ** (2 * M) / (np.pi * np.exp(lgamma(2 * M)) * 2j * np.sin(phi0))
    return complex(pre * texp_moment(2 * M, 2.0 * t))


def _edge_nodes(n: int):
    s, ws = gauss_legendre(n)
    return s[:, None], s[None, :], ws[:, None] * ws[None, :]


def edge_prekernel(M: int, u, v, nodes: int = 64):
    """``N^{-(2M+2)} g_N(1 - u/N, 1 - v/N)`` for ``Re u, Re v > 0``."""
    M = _positive_int("M", M)
    u, v = complex(u), complex(v)
    if u.real <= 0 or v.real <= 0:
        raise DomainError("edge_prekernel needs Re u > 0 and Re v > 0")
    s, t, w = _edge_nodes(nodes)
    f = s ** (2 * M + 1) * t**M * (np.exp(-2 * s * (u + v) + 2 * s * (1 - t) * u) - np.exp(-2 * s * (u + v) + 2 * s * (1 - t) * v))
    return complex(2.0 ** (2 * M - 1) / (np.pi * np.exp(lgamma(2 * M))) * np.sum(w * f))


def edge_density(M: int, x, y, scaled_by_pi: bool = False, nodes: int = 64):
    """Microscopic density near ``z = 1``.

    Unscaled: ``lim N^{-2} R_1(1 - (x+iy)/N)``  ==
    ``2^{4M} y x^{2M-1} / (pi Gamma(2M)) int int s^{2M+1} t^M e^{-2s(1+t)x} sin(2s(1-t)y)``.
    With ``scaled_by_pi`` the variables are measured in units of ``pi/N``,
    i.e. the point is ``1 - pi (x+iy)/N``.
    """
    M = _positive_int("M", M)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0):
        raise DomainError("edge_density needs x > 0")
    s, t, w = _edge_nodes(nodes)
    xb, yb = np.broadcast_arrays(x, y)
    xs, ys = xb.ravel()[:, None, None], yb.ravel()[:, None, None]
    if scaled_by_pi:
        pre = 2.0 ** (4 * M) * np.pi ** (2 * M - 1) / np.exp(lgamma(2 * M))
        e = -2 * np.pi * s * (1 + t) * xs
        sn = np.sin(2 * np.pi * s * (1 - t) * ys)
    else:
        pre = 2.0 ** (4 * M) / (np.pi * np.exp(lgamma(2 * M)))
        e = -2 * s * (1 + t) * xs
        sn = np.sin(2 * s * (1 - t) * ys)
    integral = np.sum(w * s ** (2 * M + 1) * t**M * np.exp(e) * sn, axis=(1, 2))
    out = (pre * ys[:, 0, 0] * xs[:, 0, 0] ** (2 * M - 1) * integral).reshape(xb.shape)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------
# reference densities


def sp_eigenangle_density(N: int, phi):
    """Eigenangle density ``(1/2pi)[1 - (1/N) sum_{j=1}^N cos(2 j phi)]`` of Haar Sp(2N)."""
    N = _positive_int("N", N)
    phi = np.asarray(phi, dtype=float)
    j = np.arange(1, N + 1)
    out = (1.0 - np.cos(2.0 * np.multiply.outer(phi, j)).sum(axis=-1) / N) / (2 * np.pi)
    return float(out) if out.ndim == 0 else out


def microscopic_f(theta):
    """``f(theta) = (1/2pi)[1 - sin(2 pi theta)/(2 pi theta)]``."""
    theta = np.asarray(theta, dtype=float)
    out = (1.0 - np.sinc(2.0 * theta)) / (2 * np.pi)
    return float(out) if out.ndim == 0 else out


def microscopic_f_maxima(count: int = 5) -> np.ndarray:
    """Positive local maxima of :func:`microscopic_f`, refined by golden-section search."""
    out = []
    for k in range(1, count + 1):
        res = minimize_scalar(
            lambda th: -microscopic_f(th),
            bracket=(k - 0.75, k - 0.25, k + 0.25),
            method="golden",
            tol=1e-12,
        )
        out.append(res.x)
    return np.array(out)


def origin_density_M1(z):
    """Weak-limit ``R_1`` near the origin at ``M = 1``.

    ``-(1/pi) d / (|1 - z^2|^2 (1 - |z|^2)^2) * [3 + 2 d / |1 - z^2|^2]`` with
    ``d = (z - z*)^2``; this is the ``M = 1`` reduction of the closed-form
    pre-kernel obtained by summing the series for ``g`` at ``N = infinity``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1):
        raise DomainError("origin_density_M1 needs |z| < 1")
    d2 = ((z - z.conj()) ** 2).real
    a2 = np.abs(1.0 - z * z) ** 2
    out = -(1.0 / np.pi) * d2 / (a2 * (1.0 - np.abs(z) ** 2) ** 2) * (3.0 + 2.0 * d2 / a2)
    return float(out) if out.ndim == 0 else out
