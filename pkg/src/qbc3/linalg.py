"""Dense complex linear algebra for small qubit registers.

Vectors and matrices are plain complex ``numpy`` arrays. Every dense
operation refuses registers above :data:`MAX_DIM` so that accidental
blow-ups fail loudly instead of exhausting memory.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

MAX_DIM = 2**12

HERMITIAN_TOL = 1e-12
ORTHO_TOL = 1e-10
VERIFY_TOL = 1e-9
PSD_CLAMP = -1e-10


class RegisterTooLargeError(ValueError):
    """Raised when a dense operator would exceed :data:`MAX_DIM`."""


class NotHermitianError(ValueError):
    pass


class NotDensityOperatorError(ValueError):
    pass


def check_dim(dim: int) -> int:
    if dim > MAX_DIM:
        raise RegisterTooLargeError(f"register too large: dim {dim} > {MAX_DIM}")
    return dim


def as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def ket(*bits: int) -> np.ndarray:
    """Computational basis vector ``|b1 b2 ...>``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(str(b) for b in bits), 2) if bits else 0] = 1.0
    return v


def projector(v) -> np.ndarray:
    v = as_vector(v)
    return np.outer(v, v.conj())


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def kron(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    check_dim(a.shape[0] * b.shape[0])
    check_dim(a.shape[1] * b.shape[1])
    return np.kron(a, b)


def kron_all(*ops) -> np.ndarray:
    return reduce(kron, ops)


def herm_eig(a, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(values, vectors)`` with eigenvalues in descending order and
    the matching orthonormal eigenvectors as the columns of ``vectors``.
    """
    a = as_matrix(a)
    check_dim(a.shape[0])
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    # symmetrise away the sub-tolerance antihermitian part before solving
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def _eigvals(a, tol: float) -> np.ndarray:
    a = as_matrix(a)
    check_dim(a.shape[0])
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def trace_norm(a, tol: float = HERMITIAN_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(_eigvals(a, tol))))


def check_density(rho, tol: float = 1e-10) -> np.ndarray:
    rho = as_matrix(rho)
    if not is_hermitian(rho, max(tol, HERMITIAN_TOL)):
        raise NotDensityOperatorError("density operator must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise NotDensityOperatorError(f"trace {np.trace(rho).real!r} != 1")
    if np.min(_eigvals(rho, max(tol, HERMITIAN_TOL))) < -tol:
        raise NotDensityOperatorError("density operator has a negative eigenvalue")
    return rho


def psd_sqrt(a) -> np.ndarray:
    """Square root of a positive semidefinite matrix via its eigenbasis.

    Eigenvalues down to ``PSD_CLAMP`` are treated as roundoff and set to 0.
    """
    w, v = herm_eig(a, tol=1e-9)
    if w.size and w.min() < PSD_CLAMP:
        raise NotDensityOperatorError(f"matrix is not PSD (eigenvalue {w.min():.3e})")
    w = _floor(w)
    return (v * np.sqrt(w)) @ v.conj().T


def _floor(w: np.ndarray) -> np.ndarray:
    # eigenvalues at roundoff scale are zero; sqrt would inflate them to ~1e-8
    cut = 64 * np.finfo(float).eps * max(float(np.max(np.abs(w), initial=0.0)), 1.0)
    return np.where(w > cut, w, 0.0)


def fidelity(rho, sigma) -> float:
    """Uhlmann fidelity ``tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared)."""
    rho, sigma = check_density(rho), check_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError("density operators differ in dimension")
    r = psd_sqrt(rho)
    inner = r @ sigma @ r
    inner = (inner + inner.conj().T) / 2
    return float(np.sum(np.sqrt(_floor(np.linalg.eigvalsh(inner)))))


def partial_trace(a, dims, keep) -> np.ndarray:
    """Trace out every tensor factor of ``a`` not listed in ``keep``.

    ``dims`` gives the factor dimensions in order; the kept factors stay in
    their original order.
    """
    a = as_matrix(a)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if a.shape != (total, total):
        raise ValueError(f"dims {dims} inconsistent with matrix shape {a.shape}")
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range")
    k = len(dims)
    t = a.reshape(dims + dims)
    drop = [i for i in range(k) if i not in keep]
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:k])
    col = list(letters[k : 2 * k])
    for i in drop:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    d = int(np.prod([dims[i] for i in keep])) if keep else 1
    return np.einsum("".join(row) + "".join(col) + "->" + out, t).reshape(d, d)


@dataclass(frozen=True)
class SchmidtForm:
    """``v = sum_k coefficients[k] * left[:, k] (x) right[:, k]``."""

    coefficients: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        return self.coefficients**2

    def reconstruct(self) -> np.ndarray:
        return np.einsum("k,ak,bk->ab", self.coefficients, self.left, self.right).reshape(-1)


def schmidt(v, dim_a: int, dim_b: int) -> SchmidtForm:
    v = as_vector(v)
    if v.size != dim_a * dim_b:
        raise ValueError(f"vector of length {v.size} is not {dim_a}x{dim_b}")
    check_dim(v.size)
    if abs(np.linalg.norm(v) - 1.0) > 1e-10:
        raise ValueError("Schmidt decomposition needs a unit vector")
    u, s, vh = np.linalg.svd(v.reshape(dim_a, dim_b), full_matrices=False)
    # X = U S Vh, so v = sum_k s_k u_k (x) vh[k]
    return SchmidtForm(coefficients=s, left=u, right=vh.T)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)
