"""Self-check suites behind ``sptrunc verify``.

Each check compares a computed value against an independent oracle and yields
a :class:`CheckResult`; a suite passes iff every check does.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import asymptotics as asy
from . import kernels as K
from .quadrature import disk_integrate, gauss_legendre
from .quaternion import complex_rep
from .sampler import RngStream, TruncationParams, haar_unitary_quaternion, sample_spectra, sample_spectrum

__all__ = ["CheckResult", "SUITES", "run_suite", "run_checks"]


@dataclass
class CheckResult:
    check_name: str
    params: dict
    value: float
    oracle: float
    abs_err: float
    rel_err: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return {k: (float(v) if isinstance(v, (np.floating, np.integer)) else v) for k, v in d.items()}


def _check(name, params, value, oracle, tol, relative=False) -> CheckResult:
    value, oracle = float(value), float(oracle)
    abs_err = abs(value - oracle)
    rel_err = abs_err / abs(oracle) if oracle != 0 else (0.0 if abs_err == 0 else np.inf)
    ok = (rel_err if relative else abs_err) <= tol
    return CheckResult(name, params, value, oracle, abs_err, rel_err, bool(ok))


def _flag(name, params, ok: bool, value=0.0) -> CheckResult:
    """Boolean property check; ``value`` records the measured statistic."""
    return CheckResult(name, params, float(value), 0.0, float(value), 0.0, bool(ok))


# ----------------------------------------------------------------------------
# kernels


def kernel_checks(tol: float | None = None):
    t = (lambda d: d) if tol is None else (lambda d: tol)
    out = [
        _check("log_beta", {"p": 0.5, "q": 1}, K.log_beta(0.5, 1), np.log(2), t(1e-13)),
        _check("log_beta", {"p": 2, "q": 2}, K.log_beta(2, 2), np.log(1 / 6), t(1e-13)),
    ]
    c11 = K.KernelContext(1, 1)
    out.append(_check("R1_closed_form", {"N": 1, "M": 1, "z": "0.5i"}, K.R1_exact(c11, 0.5j), 2.25 / np.pi, t(1e-12)))
    out.append(_check("g1_closed_form", {"N": 1, "M": 1}, K.prekernel_gN(c11, 0, 0.5).real, 1.5 / np.pi, t(1e-13)))

    # normalisation Z_{1,1} against direct polar integration of the unnormalised density
    brute = disk_integrate(lambda z: np.abs(z - z.conj()) ** 2 * (1 - np.abs(z) ** 2), 32, 64)
    z_full = np.exp(K.log_normalisation(TruncationParams(1, 1)))
    out.append(_check("Z11_full_disk", {"N": 1, "M": 1}, z_full, brute.real, t(1e-12)))
    brute_half = disk_integrate(lambda z: np.abs(z - z.conj()) ** 2 * (1 - np.abs(z) ** 2), 32, 64, upper_half=True)
    z_half = np.exp(K.log_normalisation(TruncationParams(1, 1), half_disk=True))
    out.append(_check("Z11_upper_half_disk", {"N": 1, "M": 1}, z_half, brute_half.real, t(1e-12)))

    for N, M in [(3, 1), (3, 2), (2, 3)]:
        out.extend(skew_orthogonality(N, M, t(1e-7)))
    for N, M in [(1, 1), (2, 1), (3, 2), (5, 3)]:
        ctx = K.KernelContext(N, M)
        val = disk_integrate(lambda z: K.R1_exact(ctx, z)).real
        out.append(_check("R1_normalisation", {"N": N, "M": M}, val, N, t(1e-6)))

    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(200):
        n = 2 * int(rng.integers(1, 7))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A = A - A.T
        pf, det = K.pfaffian(A), np.linalg.det(A)
        worst = max(worst, abs(pf * pf - det) / abs(det))
    out.append(_check("pfaffian_squared_det", {"matrices": 200, "max_dim": 12}, worst, 0.0, t(1e-9)))

    ctx = K.KernelContext(4, 2)
    worst = 0.0
    for _ in range(50):
        z1, z2 = _random_disk(rng, 2)
        a, b = K.R2_exact(ctx, z1, z2), K.Rn_exact(ctx, [z1, z2])
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    out.append(_check("R2_vs_pfaffian", {"N": 4, "M": 2, "pairs": 50}, worst, 0.0, t(1e-10)))

    u, v = 0.3 + 0.1j, 0.2 - 0.4j
    g_inf = K.prekernel_g_inf(2, u, v)
    g_200 = K.prekernel_gN(K.KernelContext(200, 2), u, v)
    out.append(_check("g_inf_vs_gN", {"N": 200, "M": 2}, abs(g_200 - g_inf) / abs(g_inf), 0.0, t(1e-10)))

    z = 0.2 + 0.2j
    zc = z.conjugate()
    r1_inf = ((z - zc) * (1 - abs(z) ** 2) * K.prekernel_g_inf(1, z, zc)).real
    out.append(_check("origin_closed_form_M1", {"z": "0.2+0.2i"}, r1_inf, asy.origin_density_M1(z), t(1e-10), True))
    return out


def skew_orthogonality(N: int, M: int, tol: float):
    """Pairings ``<q_{2k+1}, q_{2l}> = r_k delta_kl`` and the vanishing same-parity products."""
    ctx = K.KernelContext(N, M)
    qs = [K.sop_coeffs(k, ctx) for k in range(2 * N)]
    worst = 0.0
    for a in range(2 * N):
        for b in range(a + 1, 2 * N):
            val = K.skew_product_quad(qs[b], qs[a], M)
            if b % 2 == 1 and a == b - 1:
                target = K.skew_norm(a // 2, M)
            else:
                target = 0.0
            worst = max(worst, abs(val - target) / (1.0 + abs(K.skew_norm(min(a, b) // 2, M))))
    return [_check("skew_orthogonality", {"N": N, "M": M}, worst, 0.0, tol)]


def _random_disk(rng, n):
    return np.sqrt(rng.uniform(size=n)) * 0.98 * np.exp(2j * np.pi * rng.uniform(size=n))


# ----------------------------------------------------------------------------
# sampler


def sampler_checks(tol: float | None = None):
    t = (lambda d: d) if tol is None else (lambda d: tol)
    worst = 0.0
    for s in range(100):
        C = haar_unitary_quaternion(16, RngStream(11, s)).to_complex_rep()
        worst = max(worst, np.max(np.abs(C.conj().T @ C - np.eye(32))))
    out = [_check("haar_unitarity", {"dim": 16, "draws": 100}, worst, 0.0, t(1e-10))]
    params = TruncationParams(4, 2)
    eigs, resid = sample_spectra(params, 99, 500)
    out.append(_check("pairing_residual", {"N": 4, "M": 2, "samples": 500}, resid.max(), 0.0, t(1e-8)))
    out.append(_flag("contraction", {"N": 4, "M": 2}, np.abs(eigs).max() < 1, np.abs(eigs).max()))
    a = sample_spectrum(params, RngStream(5, 17)).eigenvalues
    b = sample_spectrum(params, RngStream(5, 17)).eigenvalues
    out.append(_flag("reproducibility", {"seed": 5, "stream": 17}, np.array_equal(a, b)))
    # homomorphism of the representation on random 3x3 quaternion matrices
    rng = np.random.default_rng(3)
    from .quaternion import qmatmul

    Q1, Q2 = rng.normal(size=(3, 3, 4)), rng.normal(size=(3, 3, 4))
    err = np.max(np.abs(complex_rep(qmatmul(Q1, Q2)) - complex_rep(Q1) @ complex_rep(Q2)))
    out.append(_check("representation_homomorphism", {"dim": 3}, err, 0.0, t(1e-10)))
    return out


# ----------------------------------------------------------------------------
# asymptotics


def asymptotic_checks(tol: float | None = None):
    t = (lambda d: d) if tol is None else (lambda d: tol)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10):
        M = int(rng.integers(1, 6))
        u, v = 0.7 * _random_disk(rng, 2)
        a, b = asy.prekernel_contour(M, u, v), K.prekernel_g_inf(M, u, v)
        worst = max(worst, abs(a - b) / abs(b))
    out = [_check("contour_vs_series", {"triples": 10}, worst, 0.0, t(1e-8))]
    worst = 0.0
    for M in (1, 2, 3):
        for q in (0.3, 1.0, 3.0):
            worst = max(worst, abs(asy.weak_density_scaled(M, q, half_plane=True) - 4 / np.pi * asy.h_profile(2 * M, q / np.pi)))
    out.append(_check("weak_density_identity", {"M": [1, 2, 3], "q": [0.3, 1, 3]}, worst, 0.0, t(1e-10)))
    r = 0.1
    c = 4 * np.pi * r
    out.append(_check("h1_closed_form", {"r": r}, asy.h_profile(1, r), (1 - np.exp(-c) * (1 + c)) / c**2, t(1e-12)))
    worst = 0.0
    for x in (0.3, 0.7, 1.5):
        for y in (0.4, 1.1, 2.5):
            for M in (1, 2):
                worst = max(worst, abs(asy.edge_density(M, x, y, True) / asy.edge_density(M, np.pi * x, np.pi * y) - 1))
    out.append(_check("edge_form_ratio", {"grid": "3x3", "M": [1, 2]}, worst, 0.0, t(1e-10)))
    maxima = asy.microscopic_f_maxima()
    for k, ref in enumerate([0.715, 1.735, 2.741, 3.743, 4.745]):
        out.append(_check("f_maximum", {"k": k + 1}, maxima[k], ref, t(1e-3) if tol is None else tol))
    z = 0.3 + 0.3j
    errs = [abs(K.R1_exact(K.KernelContext(N, N), z) / N - asy.density_strong(1.0, z)) for N in (10, 20, 40)]
    out.append(_flag("strong_limit_trend", {"N": [10, 20, 40], "z": "0.3+0.3i"}, errs[0] > errs[1] > errs[2], errs[2]))
    return out


SUITES: dict[str, Callable] = {
    "kernels": kernel_checks,
    "sampler": sampler_checks,
    "asymptotics": asymptotic_checks,
}


def run_suite(name: str, tol: float | None = None, tols: dict | None = None) -> list[CheckResult]:
    """Run one suite (or ``"all"``); ``tol`` overrides the tolerances of the selected suite(s)."""
    tols = dict(tols or {})
    names = list(SUITES) if name == "all" else [name]
    if name not in SUITES and name != "all":
        raise KeyError(name)
    out = []
    for n in names:
        out.extend(SUITES[n](tols.get(n, tol)))
    return out


def run_checks(name: str, tol: float | None = None, tols: dict | None = None):
    results = run_suite(name, tol, tols)
    failed = [r.check_name for r in results if not r.passed]
    return results, failed
