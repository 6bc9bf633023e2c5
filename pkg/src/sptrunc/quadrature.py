"""Fixed-node quadrature rules shared by the exact and asymptotic layers."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["gauss_legendre", "disk_nodes", "disk_integrate", "texp_moment"]


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def disk_nodes(n_r: int = 128, n_phi: int = 256, upper_half: bool = False):
    """Nodes ``z`` and weights for integrals over the unit disk.

    The radial variable is ``u = r**2`` (so ``d^2z = du dphi / 2``) with
    Gauss-Legendre nodes on ``[0, 1]``.  The angle uses the periodic trapezoid
    rule on the full disk and Gauss-Legendre on ``(0, pi)`` for the upper half.
    """
    u, wu = gauss_legendre(n_r)
    if upper_half:
        phi, wphi = gauss_legendre(n_phi, 0.0, np.pi)
    else:
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        wphi = np.full(n_phi, 2.0 * np.pi / n_phi)
    z = np.sqrt(u)[:, None] * np.exp(1j * phi)[None, :]
    w = 0.5 * wu[:, None] * wphi[None, :]
    return z, w


def disk_integrate(f, n_r: int = 128, n_phi: int = 256, upper_half: bool = False):
    """Integrate a vectorised function ``f(z)`` over the unit disk."""
    z, w = disk_nodes(n_r, n_phi, upper_half)
    return np.sum(w * f(z))


def texp_moment(k: float, c, n: int = 32, span: float = 8.0, max_panels: int = 4096):
    """``int_0^1 t**k exp(-c t) dt`` for a scalar or complex array ``c``.

    Composite Gauss-Legendre with ``n`` nodes per panel and enough equal
    panels that ``|c|`` times the panel width stays below ``span``, so both
    sharply decaying (large ``Re c``) and oscillating (large ``Im c``)
    integrands are resolved.
    """
    c = np.asarray(c)
    cmax = float(np.max(np.abs(c), initial=0.0))
    panels = int(min(max_panels, max(1, np.ceil(cmax / span))))
    x, wx = gauss_legendre(n)
    left = np.arange(panels)[:, None] / panels
    t = (left + x[None, :] / panels).ravel()
    w = np.tile(wx / panels, panels)
    return np.tensordot(np.exp(-c[..., None] * t) * t**k, w, axes=([-1], [0]))
