"""Real quaternions, quaternion matrices and their complex 2x2-block representation.

A quaternion ``q = alpha + beta e1 + gamma e2 + delta e3`` is stored as four
floats.  The multiplication table is ``e1^2 = e2^2 = e3^2 = e1 e2 e3 = -1``, and
the representation map is

    theta(q) = [[alpha + i beta,  gamma + i delta],
                [-gamma + i delta, alpha - i beta]]

Matrices of quaternions are numpy arrays of shape ``(rows, cols, 4)``; the
array-level helpers (:func:`qmul`, :func:`qconj`, :func:`qmatmul`) broadcast
over any leading axes so that the sampler can work on whole batches.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError

__all__ = [
    "Quaternion",
    "QuaternionMatrix",
    "quat_mul",
    "qmul",
    "qconj",
    "qmatmul",
    "complex_rep",
    "from_complex_rep",
    "to_complex_rep",
    "symplectic_unit",
    "is_quaternion_real_rep",
    "default_tol",
]


def qmul(a, b):
    """Hamilton product of quaternion arrays ``a[..., 4] * b[..., 4]``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a):
    """Quaternion conjugate (negate the e1, e2, e3 parts)."""
    out = np.array(a, dtype=float, copy=True)
    out[..., 1:] *= -1.0
    return out


# Structure constants: (a b)_r = sum_{p,q} _MUL[p, q, r] a_p b_q.
_MUL = qmul(np.eye(4)[:, None, :], np.eye(4)[None, :, :])


def qmatmul(a, b):
    """Quaternion matrix product of ``a[..., n, k, 4]`` and ``b[..., k, m, 4]``."""
    return np.einsum("...ikp,...kjq,pqr->...ijr", a, b, _MUL, optimize=True)


def complex_rep(q):
    """Complex representation of a quaternion array ``q[..., rows, cols, 4]``.

    Returns an array of shape ``(..., 2 rows, 2 cols)`` made of 2x2 blocks.
    """
    q = np.asarray(q, dtype=float)
    al, be, ga, de = np.moveaxis(q, -1, 0)
    a = al + 1j * be
    b = ga + 1j * de
    *lead, rows, cols = a.shape
    out = np.empty((*lead, rows, 2, cols, 2), dtype=complex)
    out[..., :, 0, :, 0] = a
    out[..., :, 0, :, 1] = b
    out[..., :, 1, :, 0] = -b.conj()
    out[..., :, 1, :, 1] = a.conj()
    return out.reshape(*lead, 2 * rows, 2 * cols)


def from_complex_rep(A):
    """Inverse of :func:`complex_rep` for correctly structured input.

    Each 2x2 block is projected onto the quaternion form, so a slightly
    perturbed block is mapped to the nearest quaternion.
    """
    A = np.asarray(A, dtype=complex)
    if A.shape[-1] % 2 or A.shape[-2] % 2:
        raise DimensionError(f"complex matrix must have even dimensions, got {A.shape}")
    *lead, r2, c2 = A.shape
    blocks = A.reshape(*lead, r2 // 2, 2, c2 // 2, 2)
    a = 0.5 * (blocks[..., :, 0, :, 0] + blocks[..., :, 1, :, 1].conj())
    b = 0.5 * (blocks[..., :, 0, :, 1] - blocks[..., :, 1, :, 0].conj())
    return np.stack([a.real, a.imag, b.real, b.imag], axis=-1)


@dataclass(frozen=True)
class Quaternion:
    """Real quaternion ``alpha + beta e1 + gamma e2 + delta e3``."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        a = np.asarray(arr, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    def as_array(self) -> np.ndarray:
        return np.array([self.alpha, self.beta, self.gamma, self.delta])

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.alpha, -self.beta, -self.gamma, -self.delta)

    def norm2(self) -> float:
        return self.alpha**2 + self.beta**2 + self.gamma**2 + self.delta**2

    def norm(self) -> float:
        return float(np.sqrt(self.norm2()))

    def to_complex(self) -> np.ndarray:
        """The 2x2 complex block ``theta(q)``."""
        return complex_rep(self.as_array()[None, None, :])

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if np.isscalar(other):
            return Quaternion.from_array(self.as_array() * float(other))
        return NotImplemented

    def __rmul__(self, other):
        # Real scalars commute with every quaternion.
        if np.isscalar(other):
            return self.__mul__(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(self.as_array() + other.as_array())
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(self.as_array() - other.as_array())
        return NotImplemented

    def __neg__(self):
        return Quaternion.from_array(-self.as_array())


E1 = Quaternion(0.0, 1.0, 0.0, 0.0)
E2 = Quaternion(0.0, 0.0, 1.0, 0.0)
E3 = Quaternion(0.0, 0.0, 0.0, 1.0)


def quat_mul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Product of two quaternions."""
    return Quaternion.from_array(qmul(a.as_array(), b.as_array()))


class QuaternionMatrix:
    """Dense matrix of real quaternions backed by a ``(rows, cols, 4)`` array."""

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=float)
        if arr.ndim != 3 or arr.shape[-1] != 4:
            raise DimensionError(f"expected shape (rows, cols, 4), got {arr.shape}")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "QuaternionMatrix":
        return cls(np.zeros((rows, cols, 4)))

    @classmethod
    def identity(cls, dim: int) -> "QuaternionMatrix":
        data = np.zeros((dim, dim, 4))
        data[np.arange(dim), np.arange(dim), 0] = 1.0
        return cls(data)

    @classmethod
    def from_complex(cls, A) -> "QuaternionMatrix":
        return cls(from_complex_rep(A))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dims(self) -> tuple[int, int]:
        return self._data.shape[0], self._data.shape[1]

    def __getitem__(self, idx) -> Quaternion:
        i, j = idx
        return Quaternion.from_array(self._data[i, j])

    def __matmul__(self, other: "QuaternionMatrix") -> "QuaternionMatrix":
        if self.dims[1] != other.dims[0]:
            raise DimensionError(f"cannot multiply {self.dims} by {other.dims}")
        return QuaternionMatrix(qmatmul(self._data, other._data))

    def dagger(self) -> "QuaternionMatrix":
        """Hermitian conjugate: transpose and conjugate every entry."""
        return QuaternionMatrix(qconj(self._data).transpose(1, 0, 2))

    def dual(self) -> "QuaternionMatrix":
        """Dual matrix ``(Q^R)_{kj} = conj(q_{jk})``; equals the dagger for real quaternions."""
        return self.dagger()

    def to_complex_rep(self) -> np.ndarray:
        return complex_rep(self._data)

    def max_norm(self) -> float:
        return float(np.max(np.abs(self._data))) if self._data.size else 0.0


def to_complex_rep(Q: QuaternionMatrix) -> np.ndarray:
    """Complex ``2 rows x 2 cols`` representation of a quaternion matrix."""
    return Q.to_complex_rep()


def symplectic_unit(n: int) -> np.ndarray:
    """Block-diagonal matrix ``Z`` with ``e2 = [[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def default_tol(A) -> float:
    """Scale-aware tolerance ``1e-10 (1 + max|A|)``."""
    A = np.asarray(A)
    return 1e-10 * (1.0 + (float(np.max(np.abs(A))) if A.size else 0.0))


def is_quaternion_real_rep(A, tol: float | None = None) -> bool:
    """True iff ``A`` is the complex representation of a quaternion-real matrix.

    The test is ``max|A^dagger + Z A^T Z| <= tol``.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise DimensionError(f"need a square matrix of even dimension, got {A.shape}")
    if tol is None:
        tol = default_tol(A)
    Z = symplectic_unit(A.shape[0] // 2)
    resid = A.conj().T + Z @ A.T @ Z
    return bool(np.max(np.abs(resid), initial=0.0) <= tol)
