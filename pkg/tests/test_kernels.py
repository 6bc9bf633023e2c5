import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sptrunc import kernels as K
from sptrunc.errors import ConvergenceError, DimensionError, DomainError, ParameterError
from sptrunc.quadrature import disk_integrate
from sptrunc.sampler import TruncationParams


def _disk(rng, n, rmax=0.95):
    return rmax * np.sqrt(rng.uniform(size=n)) * np.exp(2j * np.pi * rng.uniform(size=n))


def naive_gN(N, M, z, w, dps=30):
    """Double sum over the skew-orthogonal polynomials in the product form, in mpmath."""
    mp.mp.dps = dps
    B = lambda p, q: mp.beta(p, q)
    z, w = mp.mpc(z), mp.mpc(w)

    def q_even(k, x):
        tot = x ** (2 * k)
        for i in range(k):
            coef = mp.mpf(1)
            for j in range(i + 1, k + 1):
                coef *= B(2 * j + 1, 2 * M) / B(2 * j, 2 * M)
            tot += coef * x ** (2 * i)
        return tot

    tot = mp.mpc(0)
    for k in range(N):
        r = -2 * mp.pi * B(2 * k + 2, 2 * M)
        tot += (z ** (2 * k + 1) * q_even(k, w) - w ** (2 * k + 1) * q_even(k, z)) / r
    return complex(tot)


def test_log_beta_values():
    assert K.log_beta(0.5, 1) == pytest.approx(np.log(2), abs=1e-14)
    assert K.log_beta(2, 2) == pytest.approx(np.log(1 / 6), abs=1e-14)
    assert K.log_beta(200, 300) == pytest.approx(float(mp.log(mp.beta(200, 300))), rel=1e-13)
    with pytest.raises(DomainError):
        K.log_beta(0, 1)


def test_ratio_ladder_matches_log_beta():
    lad = K._ratio_ladder(1.5, 3, 50)
    np.testing.assert_allclose(lad, K.log_beta(1.5 + np.arange(50), 3), rtol=1e-13)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (3, 2), (5, 3), (4, 4)])
def test_prekernel_against_naive_double_sum(N, M, rng):
    ctx = K.KernelContext(N, M)
    for z, w in _disk(rng, 6).reshape(3, 2):
        ref = naive_gN(N, M, z, w)
        assert abs(K.prekernel_gN(ctx, z, w) - ref) <= 1e-12 * (1 + abs(ref))


def test_prekernel_closed_form_N1():
    ctx = K.KernelContext(1, 1)
    assert K.prekernel_gN(ctx, 0, 0.5) == pytest.approx(1.5 / np.pi, rel=1e-14)


@given(st.complex_numbers(max_magnitude=0.99), st.complex_numbers(max_magnitude=0.99), st.integers(1, 6), st.integers(1, 4))
def test_prekernel_antisymmetric(z, w, N, M):
    ctx = K.KernelContext(N, M)
    assert K.prekernel_gN(ctx, z, w) == -K.prekernel_gN(ctx, w, z)
    assert K.prekernel_gN(ctx, z, z) == 0


def test_prekernel_vectorised_and_at_origin():
    ctx = K.KernelContext(5, 2)
    z = np.array([0.0, 0.1 + 0.2j, -0.5j])
    w = np.array([0.3, 0.0, 0.7])
    vals = K.prekernel_gN(ctx, z, w)
    for a, b, v in zip(z, w, vals):
        assert v == pytest.approx(naive_gN(5, 2, a, b), rel=1e-12, abs=1e-14)


def test_g_inf_converges_and_checks_domain():
    u, v = 0.3 + 0.1j, 0.2 - 0.4j
    ref = K.prekernel_gN(K.KernelContext(400, 2), u, v)
    assert abs(K.prekernel_g_inf(2, u, v) - ref) <= 1e-13 * abs(ref)
    with pytest.raises(DomainError):
        K.prekernel_g_inf(1, 1.0, 0.2)
    with pytest.raises(ConvergenceError):
        K.prekernel_g_inf(1, 0.999, 0.999j, max_terms=100)


def test_r1_closed_form_and_zero_on_real_axis():
    ctx = K.KernelContext(1, 1)
    assert K.R1_exact(ctx, 0.5j) == pytest.approx(2.25 / np.pi, abs=1e-12)
    ctx = K.KernelContext(6, 2)
    np.testing.assert_array_equal(K.R1_exact(ctx, np.array([-0.5, 0.0, 0.7])), 0.0)
    assert K.R1_exact(ctx, 0.3 + 0.2j) > 0
    assert K.R1_exact(ctx, 0.3 + 0.2j, half_plane=True) == pytest.approx(2 * K.R1_exact(ctx, 0.3 + 0.2j))
    with pytest.raises(DomainError):
        K.R1_exact(ctx, 1.1)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (3, 2), (5, 3)])
def test_r1_integrates_to_N(N, M):
    ctx = K.KernelContext(N, M)
    assert disk_integrate(lambda z: K.R1_exact(ctx, z)).real == pytest.approx(N, abs=1e-6)


def test_r1_by_marginalising_the_joint_density():
    p = TruncationParams(2, 1)
    z = 0.3 + 0.4j
    marg = disk_integrate(lambda z2: np.exp([K.jpdf_log(p, [z, b]) for b in z2.ravel()]).reshape(z2.shape), 64, 128)
    assert K.R1_exact(K.KernelContext(2, 1), z) == pytest.approx(2 * marg.real, rel=1e-6)


def test_normalisation_small_cases():
    brute = disk_integrate(lambda z: np.abs(z - z.conj()) ** 2 * (1 - np.abs(z) ** 2), 32, 64).real
    assert np.exp(K.log_normalisation(TruncationParams(1, 1))) == pytest.approx(np.pi / 3, abs=1e-12)
    assert brute == pytest.approx(np.pi / 3, abs=1e-12)
    half = np.exp(K.log_normalisation(TruncationParams(1, 1), half_disk=True))
    assert half == pytest.approx(np.pi / 6, abs=1e-12)


def test_jpdf_edge_cases():
    p = TruncationParams(2, 1)
    assert K.jpdf_log(p, [0.1, 0.2j]) == -np.inf
    with pytest.raises(DomainError):
        K.jpdf_log(p, [1.0j, 0.2j])
    with pytest.raises(DimensionError):
        K.jpdf_log(p, [0.2j])


def test_monomial_skew_products():
    for M in (1, 2, 3):
        for k in range(4):
            for m in range(4):
                f = np.zeros(k + m + 1)
                f[k + m] = 1
                g = np.zeros(k + 1)
                g[k] = 1
                assert K.skew_product_quad(f, g, M) == pytest.approx(K.skew_product_mono(k, m, M), abs=1e-12)
    with pytest.raises(ParameterError):
        K.skew_product_quad([1.0], [0, 1.0], 1, nodes=16)


def test_sop_coefficients_match_product_form():
    N, M = 6, 3
    ctx = K.KernelContext(N, M)
    for k in range(N):
        c = K.sop_coeffs(2 * k, ctx)
        assert c[2 * k] == 1.0
        for i in range(k):
            prod = np.prod([np.exp(K.log_beta(2 * j + 1, 2 * M) - K.log_beta(2 * j, 2 * M)) for j in range(i + 1, k + 1)])
            assert c[2 * i] == pytest.approx(prod, rel=1e-13)
        np.testing.assert_array_equal(c[1::2], 0.0)
        odd = K.sop_coeffs(2 * k + 1, ctx)
        assert odd[-1] == 1.0 and np.count_nonzero(odd) == 1
    with pytest.raises(ParameterError):
        K.sop_coeffs(2 * N, ctx)


@pytest.mark.parametrize("N,M", [(3, 1), (3, 2), (2, 3)])
def test_skew_orthogonality(N, M):
    ctx = K.KernelContext(N, M)
    q = [K.sop_coeffs(k, ctx) for k in range(2 * N)]
    for a in range(2 * N):
        for b in range(2 * N):
            target = 0.0
            if a % 2 == 1 and b == a - 1:
                target = K.skew_norm(b // 2, M)
            elif b % 2 == 1 and a == b - 1:
                target = -K.skew_norm(a // 2, M)
            assert abs(K.skew_product_quad(q[a], q[b], M) - target) < 1e-7 * (1 + abs(K.skew_norm(min(a, b) // 2, M)))


@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_pfaffian_squared_is_det(half, seed):
    r = np.random.default_rng(seed)
    n = 2 * half
    A = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    A = A - A.T
    pf = K.pfaffian(A)
    det = np.linalg.det(A)
    assert abs(pf * pf - det) <= 1e-9 * abs(det)


def test_pfaffian_small_and_structured():
    assert K.pfaffian(np.array([[0, 2.0], [-2.0, 0]])) == 2.0
    a, b, c, d, e, f = 1.0, 2.0, 3.0, 4.0, 5.0, 6.0
    A = np.array([[0, a, b, c], [-a, 0, d, e], [-b, -d, 0, f], [-c, -e, -f, 0]])
    assert K.pfaffian(A) == pytest.approx(a * f - b * e + c * d)
    assert K.pfaffian(np.zeros((4, 4))) == 0
    # block-diagonal: product of blocks; a row permutation flips the sign
    A = np.zeros((4, 4))
    A[0, 1], A[2, 3] = 3.0, 5.0
    A = A - A.T
    assert K.pfaffian(A) == pytest.approx(15.0)


def test_skew_matrix_storage():
    r = np.random.default_rng(1)
    A = r.normal(size=(6, 6))
    A = A - A.T
    S = K.SkewSymmetricMat.from_dense(A, tol=1e-12)
    np.testing.assert_array_equal(S.to_dense(), A)
    with pytest.raises(DimensionError):
        K.SkewSymmetricMat(3, np.zeros(3))
    with pytest.raises(DomainError):
        K.SkewSymmetricMat.from_dense(np.ones((2, 2)), tol=1e-12)


def test_r2_matches_pfaffian_form_and_symmetry(rng):
    ctx = K.KernelContext(4, 2)
    for z1, z2 in _disk(rng, 20).reshape(10, 2):
        r2 = K.R2_exact(ctx, z1, z2)
        assert r2 == pytest.approx(K.Rn_exact(ctx, [z1, z2]), rel=1e-10)
        assert r2 == pytest.approx(K.R2_exact(ctx, z2, z1), rel=1e-12)
        assert r2 == pytest.approx(K.R2_exact(ctx, z1.conjugate(), z2), rel=1e-10)
    assert K.Rn_exact(ctx, [0.3 + 0.1j]) == pytest.approx(K.R1_exact(ctx, 0.3 + 0.1j), rel=1e-12)


def test_r2_clusters_and_marginalises():
    ctx = K.KernelContext(3, 1)
    z1 = 0.2 + 0.3j
    assert K.R2_exact(ctx, z1, z1) == pytest.approx(0.0, abs=1e-12)
    marg = disk_integrate(lambda z2: K.R2_exact(ctx, np.full(z2.shape, z1), z2), 96, 192).real
    assert marg == pytest.approx(2 * K.R1_exact(ctx, z1), rel=1e-6)


def test_rn_vanishes_with_coincident_points():
    ctx = K.KernelContext(5, 2)
    assert K.Rn_exact(ctx, [0.1 + 0.2j, 0.1 + 0.2j, -0.3 + 0.4j]) == pytest.approx(0.0, abs=1e-10)
    assert K.Rn_exact(ctx, [0.1 + 0.2j, -0.3 + 0.4j, 0.5j]) > 0


def test_large_N_is_finite():
    ctx = K.KernelContext(400, 1)
    vals = K.R1_exact(ctx, np.array([0.999 + 0.01j, 0.5 + 0.5j, 1e-3j]))
    assert np.all(np.isfinite(vals)) and np.all(vals >= 0)
