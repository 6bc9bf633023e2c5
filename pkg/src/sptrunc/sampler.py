"""Haar sampling on U(K, H), truncation, and paired eigenvalue extraction.

Every Monte Carlo draw owns a counter-based random stream keyed by
``(seed, stream_index)``.  A draw is therefore a pure function of that pair and
the truncation parameters, and batches can be split across workers in any way
without changing a single bit of the output.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, PairingError, ParameterError
from .quaternion import (
    QuaternionMatrix,
    complex_rep,
    default_tol,
    from_complex_rep,
    is_quaternion_real_rep,
)

__all__ = [
    "TruncationParams",
    "RngStream",
    "SpectrumSample",
    "sample_quaternion_ginibre",
    "haar_unitary_quaternion",
    "truncate_topleft",
    "eigenvalues_paired",
    "pair_conjugates",
    "pairing_tol",
    "sample_spectrum",
    "sample_spectra",
    "haar_eigenangles",
]

_MASK64 = (1 << 64) - 1
_MAX_RETRIES = 8


@dataclass(frozen=True)
class TruncationParams:
    """Ensemble parameters: keep an ``n_keep`` block of a ``n_keep + m_removed`` Haar matrix."""

    n_keep: int
    m_removed: int

    def __post_init__(self):
        for name in ("n_keep", "m_removed"):
            val = getattr(self, name)
            if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
                raise ParameterError(f"{name} must be a positive integer, got {val!r}")

    @property
    def k_total(self) -> int:
        return self.n_keep + self.m_removed


@dataclass(frozen=True)
class RngStream:
    """Key of one independent random stream.

    The stream is a Philox4x64 generator keyed by ``seed`` whose counter starts
    at ``stream_index * 2**128``, so different indices never overlap.
    """

    seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        if self.stream_index < 0:
            raise ParameterError("stream_index must be nonnegative")
        counter = [0, 0, self.stream_index & _MASK64, (self.stream_index >> 64) & _MASK64]
        return np.random.Generator(np.random.Philox(key=self.seed & _MASK64, counter=counter))


@dataclass(frozen=True)
class SpectrumSample:
    """Upper-half-plane representatives of one draw's conjugate eigenvalue pairs."""

    eigenvalues: np.ndarray
    pairing_residual: float
    seed_tag: int = -1


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_dim(dim) -> int:
    if isinstance(dim, bool) or not isinstance(dim, (int, np.integer)) or dim < 1:
        raise ParameterError(f"dim must be a positive integer, got {dim!r}")
    return int(dim)


def sample_quaternion_ginibre(dim: int, rng) -> QuaternionMatrix:
    """``dim x dim`` quaternion matrix with iid standard normal components."""
    dim = _check_dim(dim)
    return QuaternionMatrix(_as_generator(rng).standard_normal((dim, dim, 4)))


def _gram_schmidt(G: np.ndarray, passes: int = 2):
    """Quaternion Gram-Schmidt on the columns of ``G[..., K, K, 4]``.

    Classical Gram-Schmidt with ``passes - 1`` re-orthogonalisation sweeps.
    Coefficients are right multipliers, ``v <- v - u (u^dagger v)``, and
    columns are divided by their (real) norms.  The quaternion products are
    carried out through the 2x2-block representation so that they map onto
    batched matrix multiplications.  Returns ``(U, ok)`` where ``ok`` flags
    draws whose columns stayed numerically independent.
    """
    A = complex_rep(np.asarray(G, dtype=float))
    K = A.shape[-1] // 2
    Q = np.zeros_like(A)
    ok = np.ones(A.shape[:-2], dtype=bool)
    for j in range(K):
        V = A[..., :, 2 * j : 2 * j + 2]
        start = np.sqrt(0.5 * np.sum(np.abs(V) ** 2, axis=(-2, -1)))
        if j:
            prev = Q[..., :, : 2 * j]
            for _ in range(passes):
                V = V - prev @ (prev.conj().swapaxes(-1, -2) @ V)
        norm = np.sqrt(0.5 * np.sum(np.abs(V) ** 2, axis=(-2, -1)))
        ok &= norm > 1e-10 * start
        safe = np.where(norm > 0, norm, 1.0)
        Q[..., :, 2 * j : 2 * j + 2] = V / safe[..., None, None]
    return from_complex_rep(Q), ok


def haar_unitary_quaternion(dim: int, rng) -> QuaternionMatrix:
    """Haar-distributed element of U(dim, H) from Gram-Schmidt of a quaternion Ginibre draw."""
    dim = _check_dim(dim)
    gen = _as_generator(rng)
    for _ in range(_MAX_RETRIES):
        U, ok = _gram_schmidt(gen.standard_normal((dim, dim, 4)))
        if ok:
            return QuaternionMatrix(U)
    raise ArithmeticError(f"quaternion Gram-Schmidt failed {_MAX_RETRIES} times in a row")


def truncate_topleft(U: QuaternionMatrix, n_keep: int) -> np.ndarray:
    """Top-left ``2 n_keep x 2 n_keep`` block of the complex representation of ``U``."""
    dim = U.dims[0]
    if n_keep < 1 or n_keep > dim:
        raise DimensionError(f"n_keep must be in [1, {dim}], got {n_keep}")
    return complex_rep(U.data[:n_keep, :n_keep])


def pairing_tol(A) -> float:
    """Default pairing tolerance ``1e-8 (1 + max|A|)``."""
    return 100.0 * default_tol(A)


def _greedy_match(up: np.ndarray, low: np.ndarray):
    """Match ``up[a]`` to ``conj(low[b])`` greedily by distance; batched over axis 0."""
    S, n = up.shape
    D = np.abs(up[:, :, None] - low[:, None, :].conj())
    partner = np.empty((S, n), dtype=int)
    worst = np.zeros(S)
    rows = np.arange(S)
    for _ in range(n):
        flat = np.argmin(D.reshape(S, -1), axis=1)
        a, b = np.divmod(flat, n)
        worst = np.maximum(worst, D[rows, a, b])
        partner[rows, a] = b
        D[rows, a, :] = np.inf
        D[rows, :, b] = np.inf
    return partner, worst


def pair_conjugates(eigs, tol: float):
    """Group ``2N`` eigenvalues into ``N`` conjugate pairs.

    Returns ``(representatives, residual)``.  Eigenvalues with
    ``|Im| <= tol`` are snapped to the real axis and paired among themselves;
    the rest are matched greedily to the nearest conjugate.  Each
    representative is the midpoint of ``lambda`` and ``conj(partner)``.
    """
    eigs = np.asarray(eigs, dtype=complex).ravel()
    if eigs.size % 2:
        raise PairingError("odd number of eigenvalues", np.inf)
    real_mask = np.abs(eigs.imag) <= tol
    reals = np.sort(eigs[real_mask].real)
    up = eigs[~real_mask & (eigs.imag > 0)]
    low = eigs[~real_mask & (eigs.imag < 0)]
    if reals.size % 2 or up.size != low.size:
        raise PairingError(
            f"unbalanced spectrum: {up.size} upper, {low.size} lower, {reals.size} real", np.inf
        )
    reps = []
    residual = 0.0
    if up.size:
        order = np.argsort(-up.imag, kind="stable")
        up = up[order]
        partner, worst = _greedy_match(up[None, :], low[None, :])
        reps.append(0.5 * (up + low[partner[0]].conj()))
        residual = float(worst[0])
    if reals.size:
        pairs = reals.reshape(-1, 2)
        residual = max(residual, float(np.max(pairs[:, 1] - pairs[:, 0])))
        reps.append(pairs.mean(axis=1) + 0j)
    return np.concatenate(reps) if reps else np.zeros(0, complex), residual


def eigenvalues_paired(A, tol: float | None = None, seed_tag: int = -1) -> SpectrumSample:
    """Eigenvalues of a quaternion-real representation, one per conjugate pair."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise DimensionError(f"need a square matrix of even dimension, got {A.shape}")
    if tol is None:
        tol = pairing_tol(A)
    if not is_quaternion_real_rep(A, max(tol, default_tol(A))):
        raise DomainError("matrix is not the representation of a quaternion-real matrix")
    reps, residual = pair_conjugates(np.linalg.eigvals(A), tol)
    if residual > tol:
        raise PairingError(f"pairing residual {residual:.3e} exceeds tolerance {tol:.3e}", residual)
    return SpectrumSample(reps, residual, seed_tag)


def sample_spectrum(params: TruncationParams, stream: RngStream) -> SpectrumSample:
    """One truncated draw: Haar on U(N+M, H), top-left N block, paired spectrum."""
    U = haar_unitary_quaternion(params.k_total, stream)
    return eigenvalues_paired(truncate_topleft(U, params.n_keep), seed_tag=stream.stream_index)


def _batch_pair(eigs: np.ndarray, tols: np.ndarray):
    """Vectorised pairing for the generic case, per-sample fallback otherwise."""
    S, two_n = eigs.shape
    n = two_n // 2
    order = np.argsort(-eigs.imag, axis=1, kind="stable")
    srt = np.take_along_axis(eigs, order, axis=1)
    up, low = srt[:, :n], srt[:, n:]
    generic = (np.abs(eigs.imag) > tols[:, None]).all(axis=1) & (up.imag > 0).all(axis=1)
    generic &= (low.imag < 0).all(axis=1)
    reps = np.empty((S, n), dtype=complex)
    resid = np.empty(S)
    if generic.any():
        partner, worst = _greedy_match(up[generic], low[generic])
        matched = np.take_along_axis(low[generic], partner, axis=1)
        reps[generic] = 0.5 * (up[generic] + matched.conj())
        resid[generic] = worst
    for s in np.flatnonzero(~generic):
        reps[s], resid[s] = pair_conjugates(eigs[s], tols[s])
    return reps, resid


def _spectra_chunk(n_keep: int, m_removed: int, seed: int, start: int, stop: int):
    params = TruncationParams(n_keep, m_removed)
    K, N = params.k_total, params.n_keep
    G = np.stack([RngStream(seed, s).generator().standard_normal((K, K, 4)) for s in range(start, stop)])
    U, ok = _gram_schmidt(G)
    A = complex_rep(U[:, :N, :N])
    eigs = np.linalg.eigvals(A)
    tols = 1e-8 * (1.0 + np.max(np.abs(A), axis=(1, 2)))
    reps, resid = _batch_pair(eigs, tols)
    for b in np.flatnonzero(~ok):
        # probability-zero event: redo through the retrying single-draw path
        redo = sample_spectrum(params, RngStream(seed, start + b))
        reps[b], resid[b] = redo.eigenvalues, redo.pairing_residual
    bad = resid > tols
    if bad.any():
        b = int(np.flatnonzero(bad)[0])
        raise PairingError(f"sample {start + b}: pairing residual {resid[b]:.3e}", float(resid[b]))
    return reps, resid


def sample_spectra(
    params: TruncationParams,
    seed: int,
    samples: int,
    start: int = 0,
    chunk: int = 4096,
    workers: int = 1,
):
    """Draw ``samples`` spectra with stream indices ``start .. start + samples - 1``.

    Returns ``(eigenvalues, residuals)`` with shapes ``(samples, N)`` and
    ``(samples,)``.  The output does not depend on ``chunk`` or ``workers``.
    """
    if samples < 1:
        raise ParameterError(f"samples must be >= 1, got {samples}")
    bounds = [(a, min(a + chunk, start + samples)) for a in range(start, start + samples, chunk)]
    args = [(params.n_keep, params.m_removed, seed, a, b) for a, b in bounds]
    if workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_spectra_chunk, *zip(*args)))
    else:
        parts = [_spectra_chunk(*a) for a in args]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def haar_eigenangles(dim: int, seed: int, samples: int, start: int = 0, chunk: int = 256) -> np.ndarray:
    """Eigenangles in ``[0, pi]`` of untruncated Haar draws, one per conjugate pair.

    Returns an array of shape ``(samples, dim)``, ascending along each row.
    """
    dim = _check_dim(dim)
    out = []
    for a in range(start, start + samples, chunk):
        b = min(a + chunk, start + samples)
        G = np.stack([RngStream(seed, s).generator().standard_normal((dim, dim, 4)) for s in range(a, b)])
        C = complex_rep(_gram_schmidt(G)[0])
        # U is normal, so (U + U^dagger)/2 has eigenvalues cos(phi_j), each twice
        cosines = np.linalg.eigvalsh(0.5 * (C + C.conj().swapaxes(-1, -2)))
        out.append(np.arccos(np.clip(cosines[:, ::-2], -1.0, 1.0)))
    return np.concatenate(out)
