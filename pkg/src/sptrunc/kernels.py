"""Exact finite-N eigenvalue statistics of truncated symplectic unitary matrices.

The eigenvalue process of the ``2N x 2N`` truncation is Pfaffian.  Everything
here is driven by the scalar pre-kernel

    g_N(z, w) = (B(1/2, M)/pi) sum_{0 <= i <= k < N}
                (z^{2i} w^{2k+1} - z^{2k+1} w^{2i}) / (B(i+1, M) B(k+3/2, M))

together with the weight ``w^2(z) = (1 - |z|^2)^(2M-1)``.  The 2x2 matrix kernel
at points ``z, z'`` has entries ``g_N`` evaluated at ``(z, z')``, ``(z, z'*)``,
``(z*, z')`` and ``(z*, z'*)``.  Correlation functions follow in the
full-disk picture; pass ``half_plane=True`` for the upper-half-plane picture,
which carries an extra factor ``2**n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    NumericalConsistencyError,
    ParameterError,
)
from .quadrature import disk_integrate
from .sampler import TruncationParams

__all__ = [
    "log_beta",
    "KernelContext",
    "sop_eval",
    "sop_coeffs",
    "skew_norm",
    "skew_product_mono",
    "skew_product_quad",
    "prekernel_gN",
    "prekernel_weighted",
    "prekernel_g_inf",
    "SkewSymmetricMat",
    "pfaffian",
    "jpdf_log",
    "log_normalisation",
    "R1_exact",
    "R2_exact",
    "Rn_exact",
]

_LOG_PI = np.log(np.pi)
_CHUNK = 2048


def log_beta(p, q):
    """``log B(p, q)`` for positive arguments."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(p <= 0) or np.any(q <= 0):
        raise DomainError("log_beta needs positive arguments")
    out = gammaln(p) + gammaln(q) - gammaln(p + q)
    return float(out) if out.ndim == 0 else out


def _ratio_ladder(p0: float, q: float, n: int) -> np.ndarray:
    """``log B(p0 + j, q)`` for ``j = 0..n-1`` built from ``B(p+1,q)/B(p,q) = p/(p+q)``."""
    steps = np.log((p0 + np.arange(n - 1)) / (p0 + np.arange(n - 1) + q))
    return log_beta(p0, q) + np.concatenate([[0.0], np.cumsum(steps)])


@dataclass(frozen=True)
class KernelContext:
    """Coefficient tables for one ensemble ``(N, M)``.

    ``log_a[i] = -log B(i+1, M)`` and ``log_b[k] = log B(1/2, M) - log pi -
    log B(k+3/2, M)``, so the pre-kernel coefficient of the ``(i, k)`` term is
    ``exp(log_a[i] + log_b[k])``.  ``log_sop[k]`` holds ``log B(k+1, M)`` for
    the even skew-orthogonal polynomials.
    """

    n_keep: int
    m_removed: int
    log_a: np.ndarray = field(init=False, repr=False)
    log_b: np.ndarray = field(init=False, repr=False)
    log_sop: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        params = TruncationParams(self.n_keep, self.m_removed)
        N, M = params.n_keep, params.m_removed
        tables = {
            "log_a": -_ratio_ladder(1.0, M, N),
            "log_b": log_beta(0.5, M) - _LOG_PI - _ratio_ladder(1.5, M, N),
            "log_sop": _ratio_ladder(1.0, M, N),
        }
        for name, arr in tables.items():
            if not np.all(np.isfinite(arr)):
                raise NumericalConsistencyError(f"non-finite entries in {name}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_params(cls, params: TruncationParams) -> "KernelContext":
        return cls(params.n_keep, params.m_removed)

    @property
    def params(self) -> TruncationParams:
        return TruncationParams(self.n_keep, self.m_removed)

    def log_coeff(self, k: int, i: int) -> float:
        """``log[B(1/2,M) / (B(i+1,M) B(k+3/2,M))]`` for ``0 <= i <= k < N``."""
        if not 0 <= i <= k < self.n_keep:
            raise ParameterError(f"need 0 <= i <= k < N, got i={i}, k={k}")
        return float(self.log_a[i] + self.log_b[k] + _LOG_PI)


# ----------------------------------------------------------------------------
# skew-orthogonal polynomials


def sop_coeffs(k: int, ctx: KernelContext) -> np.ndarray:
    """Ascending monomial coefficients of the monic skew-orthogonal polynomial ``q_k``."""
    if not 0 <= k <= 2 * ctx.n_keep - 1:
        raise ParameterError(f"index k must be in [0, {2 * ctx.n_keep - 1}], got {k}")
    c = np.zeros(k + 1)
    if k % 2:
        c[k] = 1.0
    else:
        j = k // 2
        c[0::2] = np.exp(ctx.log_sop[j] - ctx.log_sop[: j + 1])
    return c


def sop_eval(k: int, ctx: KernelContext, z):
    """Value of ``q_k(z)``."""
    return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), sop_coeffs(k, ctx))


def skew_norm(k: int, M: int) -> float:
    """``r_k = <q_{2k+1}, q_{2k}>_s = -2 pi B(2k+2, 2M)``."""
    return -2.0 * np.pi * np.exp(log_beta(2 * k + 2, 2 * M))


def skew_product_mono(k: int, m: int, M: int) -> float:
    """Skew product ``<z^{k+m}, z^k>_s`` of two monomials."""
    if k < 0 or m < 0:
        raise ParameterError("k and m must be nonnegative")
    if m != 1:
        return 0.0
    return -2.0 * np.pi * np.exp(log_beta(k + 2, 2 * M))


def skew_product_quad(f, g, M: int, nodes: int = 64):
    """Skew product of two polynomials (ascending coefficients) by disk quadrature.

    ``<f, g>_s = int (z - z*) (1-|z|^2)^(2M-1) [f(z) g(z*) - g(z) f(z*)] d^2z``.
    """
    if nodes < 32:
        raise ParameterError("nodes must be >= 32")
    f = np.asarray(f)
    g = np.asarray(g)
    pv = np.polynomial.polynomial.polyval
    n_phi = max(2 * nodes, 2 * (len(f) + len(g)) + 4)

    def integrand(z):
        zc = z.conj()
        w2 = (1.0 - np.abs(z) ** 2) ** (2 * M - 1)
        return (z - zc) * w2 * (pv(z, f) * pv(zc, g) - pv(z, g) * pv(zc, f))

    val = disk_integrate(integrand, n_r=nodes, n_phi=n_phi)
    if np.iscomplexobj(f) or np.iscomplexobj(g):
        return complex(val)
    return float(val.real)


# ----------------------------------------------------------------------------
# pre-kernel


def _log_power(z):
    """Real and imaginary parts of ``Log z`` with ``Log 0 = -inf + 0i``."""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(z)), np.angle(z)


def _power_exponent(lr, th, k):
    """``k Log z`` as a complex array, with ``0 Log 0 = 0``."""
    real = np.where(k == 0, 0.0, k * np.where(np.isneginf(lr) & (k == 0), 0.0, lr))
    return real + 1j * (k * th)


def _weighted_chunk(ctx: KernelContext, z, w, lwz, lww):
    N = ctx.n_keep
    two_i = 2.0 * np.arange(N)
    lzr, lzt = (a[:, None] for a in _log_power(z))
    lwr, lwt = (a[:, None] for a in _log_power(w))
    ze = _power_exponent(lzr, lzt, two_i)
    we = _power_exponent(lwr, lwt, two_i)
    lz = lzr + 1j * lzt
    lw = lwr + 1j * lwt
    Ez = np.exp(ctx.log_a + ze + lwz[:, None])
    Ew = np.exp(ctx.log_a + we + lww[:, None])
    Fz = np.exp(ctx.log_b + ze + lz + lwz[:, None])
    Fw = np.exp(ctx.log_b + we + lw + lww[:, None])
    P = z.shape[0]
    Sz = np.zeros(P, complex)
    Sw = np.zeros(P, complex)
    cz = np.zeros(P, complex)
    cw = np.zeros(P, complex)
    tot = np.zeros(P, complex)
    ct = np.zeros(P, complex)
    for k in range(N):
        # compensated running sums over i <= k and over k
        y = Ez[:, k] - cz
        t = Sz + y
        cz = (t - Sz) - y
        Sz = t
        y = Ew[:, k] - cw
        t = Sw + y
        cw = (t - Sw) - y
        Sw = t
        y = (Fw[:, k] * Sz - Fz[:, k] * Sw) - ct
        t = tot + y
        ct = (t - tot) - y
        tot = t
    return tot


def _log_weight(z, M):
    """``(M - 1/2) log(1 - |z|^2)``, the log of ``w(z)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return (M - 0.5) * np.log1p(-np.abs(z) ** 2)


def _prekernel(ctx: KernelContext, z, w, weighted: bool):
    z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
    shape = z.shape
    z, w = z.ravel(), w.ravel()
    if weighted:
        lwz, lww = _log_weight(z, ctx.m_removed), _log_weight(w, ctx.m_removed)
    else:
        lwz = lww = np.zeros(z.shape)
    out = np.empty(z.shape, complex)
    for a in range(0, z.size, _CHUNK):
        s = slice(a, a + _CHUNK)
        out[s] = _weighted_chunk(ctx, z[s], w[s], lwz[s], lww[s])
    out = out.reshape(shape)
    return complex(out) if out.ndim == 0 else out


def prekernel_gN(ctx: KernelContext, z, w):
    """Finite-N pre-kernel ``g_N(z, w)``; broadcasts over array arguments.

    Exactly antisymmetric: swapping the arguments negates the result bit for bit.
    """
    return _prekernel(ctx, z, w, weighted=False)


def prekernel_weighted(ctx: KernelContext, z, w):
    """``w(z) w(w) g_N(z, w)`` with ``w(z) = (1-|z|^2)^(M-1/2)``, free of overflow.

    Requires ``|z|, |w| <= 1``.
    """
    return _prekernel(ctx, z, w, weighted=True)


def prekernel_g_inf(M: int, z, w, rel_tol: float = 1e-15, max_terms: int = 200_000):
    """``N -> infinity`` limit of ``g_N(z, w)``, summed until the tail is negligible."""
    z, w = complex(z), complex(w)
    if max(abs(z), abs(w)) >= 1:
        raise DomainError("prekernel_g_inf needs max(|z|, |w|) < 1")
    if z == w:
        return 0j
    N = 64
    prev = None
    while N <= max_terms:
        val = prekernel_gN(KernelContext(N, M), z, w)
        if prev is not None and abs(val - prev) <= rel_tol * abs(val):
            return val
        prev = val
        N *= 2
    raise ConvergenceError(f"g_inf did not converge within {max_terms} terms")


# ----------------------------------------------------------------------------
# Pfaffian


class SkewSymmetricMat:
    """Complex skew-symmetric matrix of even dimension, stored as its strict upper triangle."""

    __slots__ = ("_dim", "_upper")

    def __init__(self, dim: int, upper):
        if dim % 2:
            raise DimensionError(f"skew-symmetric matrix must have even dimension, got {dim}")
        upper = np.array(upper, dtype=complex).ravel()
        if upper.size != dim * (dim - 1) // 2:
            raise DimensionError("wrong number of upper-triangle entries")
        upper.setflags(write=False)
        self._dim = dim
        self._upper = upper

    @classmethod
    def from_dense(cls, A, tol: float | None = None) -> "SkewSymmetricMat":
        """Take the strict upper triangle of ``A``; optionally verify ``A + A^T = 0``."""
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"need a square matrix, got {A.shape}")
        if tol is not None and np.max(np.abs(A + A.T), initial=0.0) > tol:
            raise DomainError("matrix is not skew-symmetric")
        return cls(A.shape[0], A[np.triu_indices(A.shape[0], 1)])

    @property
    def dim(self) -> int:
        return self._dim

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self._dim, self._dim), complex)
        iu = np.triu_indices(self._dim, 1)
        A[iu] = self._upper
        return A - A.T


def pfaffian(A) -> complex:
    """Pfaffian by skew Gaussian elimination with partial pivoting.

    Accepts a :class:`SkewSymmetricMat` or a dense array (whose strict upper
    triangle is used).
    """
    if isinstance(A, SkewSymmetricMat):
        A = A.to_dense()
    else:
        A = SkewSymmetricMat.from_dense(A).to_dense()
    n = A.shape[0]
    pf = 1.0 + 0j
    for k in range(0, n - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(A[k + 1 :, k])))
        if p != k + 1:
            A[[k + 1, p], :] = A[[p, k + 1], :]
            A[:, [k + 1, p]] = A[:, [p, k + 1]]
            pf = -pf
        piv = A[k, k + 1]
        if piv == 0:
            return 0j
        pf *= piv
        if k + 2 < n:
            tau = A[k, k + 2 :] / piv
            col = A[k + 2 :, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    return complex(pf)


# ----------------------------------------------------------------------------
# joint density and correlation functions


def log_normalisation(params: TruncationParams, half_disk: bool = False) -> float:
    """``log Z_{N,M}``, with ``Z = c^N N! prod_j B(2M, 2j)``; ``c = pi`` (half disk) or ``2 pi``."""
    N, M = params.n_keep, params.m_removed
    c = np.pi if half_disk else 2.0 * np.pi
    j = np.arange(1, N + 1)
    return float(N * np.log(c) + gammaln(N + 1) + np.sum(log_beta(2 * M, 2 * j)))


def jpdf_log(params: TruncationParams, lambdas, half_disk: bool = False) -> float:
    """Log joint density of the ``N`` pair representatives.

    The default normalisation integrates to one over the full disk; with
    ``half_disk=True`` it integrates to one over the upper half disk.
    """
    lam = np.asarray(lambdas, dtype=complex).ravel()
    N, M = params.n_keep, params.m_removed
    if lam.size != N:
        raise DimensionError(f"expected {N} eigenvalues, got {lam.size}")
    if np.any(np.abs(lam) >= 1):
        raise DomainError("all eigenvalues must lie strictly inside the unit disk")
    if np.any(lam.imag == 0):
        return -np.inf
    i, j = np.triu_indices(N, 1)
    val = np.sum(np.log(np.abs(lam - lam.conj()) ** 2))
    val += np.sum(np.log(np.abs(lam[i] - lam[j].conj()) ** 2))
    val += np.sum(np.log(np.abs(lam[i] - lam[j]) ** 2))
    val += (2 * M - 1) * np.sum(np.log1p(-np.abs(lam) ** 2))
    return float(val - log_normalisation(params, half_disk))


def _check_disk(*zs):
    for z in zs:
        if np.any(np.abs(z) > 1.0 + 1e-14):
            raise DomainError("points must satisfy |z| <= 1")


def _real_part(val, what: str):
    val = np.asarray(val)
    bad = np.abs(val.imag) > 1e-10 * (1.0 + np.abs(val.real))
    if np.any(bad):
        raise NumericalConsistencyError(f"{what} has an imaginary residue {np.max(np.abs(val.imag)):.3e}")
    out = val.real
    return float(out) if out.ndim == 0 else out


def R1_exact(ctx: KernelContext, z, half_plane: bool = False):
    """One-point function ``(z - z*) w^2(z) g_N(z, z*)``; integrates to ``N`` over the disk."""
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    val = (z - z.conj()) * prekernel_weighted(ctx, z, z.conj())
    return _real_part(val * (2.0 if half_plane else 1.0), "R1")


def R2_exact(ctx: KernelContext, z1, z2, half_plane: bool = False):
    """Two-point function via the explicit expansion of the 4x4 Pfaffian."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    _check_disk(z1, z2)
    g11 = prekernel_weighted(ctx, z1, z1.conj())
    g22 = prekernel_weighted(ctx, z2, z2.conj())
    g12 = prekernel_weighted(ctx, z1, z2)
    g12c = prekernel_weighted(ctx, z1, z2.conj())
    pre = (z1 - z1.conj()) * (z2 - z2.conj())
    val = pre * (g11 * g22 - np.abs(g12) ** 2 + np.abs(g12c) ** 2)
    return _real_part(val * (4.0 if half_plane else 1.0), "R2")


def kernel_matrix(ctx: KernelContext, zs) -> SkewSymmetricMat:
    """Weighted ``2n x 2n`` skew matrix over the points ``(z_1, z_1*, ..., z_n, z_n*)``."""
    zs = np.asarray(zs, dtype=complex).ravel()
    x = np.stack([zs, zs.conj()], axis=1).ravel()
    i, j = np.triu_indices(x.size, 1)
    return SkewSymmetricMat(x.size, prekernel_weighted(ctx, x[i], x[j]))


def Rn_exact(ctx: KernelContext, zs, half_plane: bool = False) -> float:
    """``n``-point function ``prod_j (z_j - z_j*) w^2(z_j) Pf[K_N(z_k, z_l)]``."""
    zs = np.asarray(zs, dtype=complex).ravel()
    if zs.size < 1:
        raise ParameterError("need at least one point")
    _check_disk(zs)
    pre = np.prod(zs - zs.conj())
    if pre == 0:
        return 0.0
    val = pre * pfaffian(kernel_matrix(ctx, zs))
    if half_plane:
        val *= 2.0**zs.size
    return _real_part(val, "Rn")
