"""Dense linear algebra on bipartite matrices.

Conventions used throughout the package:

* A bipartite square matrix ``X`` on ``C^dA (x) C^dB`` is indexed as
  ``X[(i, k), (j, l)]`` with the first factor's index major.
* Vectorization is row-major, ``|A>> = sum_i A|i> (x) |i>``, so component
  ``(a, i)`` of ``vec(A)`` is ``A[a, i]``.  With this choice
  ``vec(A X B) = (A (x) B^T) vec(X)``.
* Reshuffling maps ``|i><j| (x) |k><l|`` to ``|i><k| (x) |j><l|``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "RankDeficientError",
    "kron",
    "hadamard",
    "reshuffle",
    "partial_trace",
    "partial_transpose",
    "vectorize",
    "devectorize",
    "psd_sqrt_and_inv_sqrt",
    "inv_sqrt_psd",
    "spectrum",
    "gellmann_basis",
    "schatten_norm",
    "four_matrix_trace_identity_check",
    "hermitian_part",
]


class RankDeficientError(np.linalg.LinAlgError):
    """Raised when a matrix that must be positive definite is (numerically) singular."""


def kron(A, B):
    return np.kron(A, B)


def hadamard(A, B):
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return A * B


def hermitian_part(X):
    return (X + X.conj().swapaxes(-1, -2)) / 2


def _split_square(X, dims):
    dA, dB = dims
    n = dA * dB
    if X.shape[-2:] != (n, n):
        raise ValueError(f"expected a {n}x{n} matrix for dims {dims}, got {X.shape[-2:]}")
    return X.reshape(X.shape[:-2] + (dA, dB, dA, dB))


def reshuffle(X, row_dims, col_dims=None):
    """Realign a bipartite matrix: ``X[(i,k),(j,l)] -> Y[(i,j),(k,l)]``.

    Parameters
    ----------
    X : ndarray, shape (..., m*n, p*q)
    row_dims : (m, n)
        Factor dimensions of the row index of ``X``.
    col_dims : (p, q), optional
        Factor dimensions of the column index. Defaults to ``row_dims``.

    Returns
    -------
    ndarray, shape (..., m*p, n*q)
        Applying ``reshuffle`` again with ``row_dims=(m, p)`` and
        ``col_dims=(n, q)`` recovers ``X``.

    Notes
    -----
    For a Choi matrix ``J`` on output (x) input with dimensions
    ``(d_out, d_in)``, ``reshuffle(J, (d_out, d_in))`` is the superoperator
    acting on row-major vectorized matrices.
    """
    X = np.asarray(X)
    m, n = row_dims
    p, q = col_dims if col_dims is not None else row_dims
    if X.shape[-2:] != (m * n, p * q):
        raise ValueError(
            f"matrix of shape {X.shape[-2:]} does not match dims {row_dims} x {(p, q)}"
        )
    lead = X.shape[:-2]
    T = X.reshape(lead + (m, n, p, q))
    k = len(lead)
    T = np.moveaxis(T, k + 2, k + 1)  # (m, p, n, q)
    return T.reshape(lead + (m * p, n * q))


def partial_trace(X, dims, keep):
    """Trace out one factor of a bipartite square matrix.

    ``keep`` is the index (0 or 1) of the factor that survives.
    """
    T = _split_square(np.asarray(X), dims)
    if keep == 0:
        return np.einsum("...ikjk->...ij", T)
    if keep == 1:
        return np.einsum("...kikj->...ij", T)
    raise ValueError("keep must be 0 or 1")


def partial_transpose(X, dims, which=1):
    """Transpose the indices of factor ``which`` (0 or 1) only."""
    X = np.asarray(X)
    T = _split_square(X, dims)
    k = X.ndim - 2
    if which == 0:
        T = np.swapaxes(T, k, k + 2)
    elif which == 1:
        T = np.swapaxes(T, k + 1, k + 3)
    else:
        raise ValueError("which must be 0 or 1")
    return T.reshape(X.shape)


def vectorize(A):
    """Row-major ``|A>>``; works on stacks of matrices."""
    A = np.asarray(A)
    return A.reshape(A.shape[:-2] + (A.shape[-2] * A.shape[-1],))


def devectorize(v, rows, cols):
    v = np.asarray(v)
    if v.shape[-1] != rows * cols:
        raise ValueError(f"vector of length {v.shape[-1]} cannot be reshaped to {rows}x{cols}")
    return v.reshape(v.shape[:-1] + (rows, cols))


def _check_hermitian(H, tol=1e-10):
    scale = max(np.abs(H).max(), 1.0)
    if np.abs(H - H.conj().swapaxes(-1, -2)).max() > tol * scale:
        raise ValueError("matrix is not Hermitian")


def inv_sqrt_psd(H, floor=1e-12):
    """``H^{-1/2}`` for a (stack of) Hermitian positive definite matrices.

    Eigenvalues below ``floor * max_eigenvalue`` raise :class:`RankDeficientError`.
    """
    H = np.asarray(H)
    _check_hermitian(H)
    w, V = np.linalg.eigh(hermitian_part(H))
    top = w[..., -1:]
    if np.any(top <= 0) or np.any(w < floor * top):
        raise RankDeficientError(
            f"eigenvalue below floor {floor:g} x largest; matrix is numerically singular"
        )
    return (V / np.sqrt(w)[..., None, :]) @ V.conj().swapaxes(-1, -2)


def psd_sqrt_and_inv_sqrt(H, floor=1e-12):
    """Return ``(H^{1/2}, H^{-1/2})`` for Hermitian positive definite ``H``.

    Small negative eigenvalues (round-off) are clipped to zero for the square
    root; the inverse branch raises :class:`RankDeficientError` if any
    eigenvalue lies below ``floor`` times the largest one.
    """
    H = np.asarray(H)
    _check_hermitian(H)
    w, V = np.linalg.eigh(hermitian_part(H))
    top = w[..., -1:]
    if np.any(w < -1e-10 * np.maximum(np.abs(top), 1e-300)):
        raise ValueError("matrix is not positive semidefinite")
    Vh = V.conj().swapaxes(-1, -2)
    sqrt = (V * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ Vh
    if np.any(top <= 0) or np.any(w < floor * top):
        raise RankDeficientError(
            f"eigenvalue below floor {floor:g} x largest; inverse square root undefined"
        )
    inv_sqrt = (V / np.sqrt(w)[..., None, :]) @ Vh
    return sqrt, inv_sqrt


def spectrum(X, kind="general"):
    """Eigenvalues or singular values of ``X``.

    kind : {'general', 'hermitian', 'singular'}
        ``general`` returns the full complex spectrum (unordered),
        ``hermitian`` real eigenvalues in ascending order,
        ``singular`` singular values in descending order.
    """
    X = np.asarray(X)
    if kind == "general":
        return np.linalg.eigvals(X)
    if kind == "hermitian":
        return np.linalg.eigvalsh(hermitian_part(X))
    if kind == "singular":
        return np.linalg.svd(X, compute_uv=False)
    raise ValueError(f"unknown spectrum kind {kind!r}")


def gellmann_basis(d, include_identity=False):
    """Traceless Hermitian generators of SU(d), normalized to ``Tr(L_i L_j) = d delta_ij``.

    The d-1 diagonal generators come first; then, for each pair ``j < k``,
    the symmetric and antisymmetric off-diagonal generators. For ``d = 2``
    this gives ``(sigma_z, sigma_x, sigma_y)``.

    Parameters
    ----------
    d : int
        Dimension, at least 2.
    include_identity : bool
        If True, prepend ``L_0 = I`` so the result spans all of ``M_d``.

    Returns
    -------
    ndarray, shape (d**2 - 1, d, d) or (d**2, d, d)
    """
    if d < 2:
        raise ValueError("generator basis needs d >= 2")
    gens = []
    if include_identity:
        gens.append(np.eye(d, dtype=complex))
    scale = np.sqrt(d / 2)
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1.0
        diag[l] = -l
        gens.append(np.diag(diag * np.sqrt(2 / (l * (l + 1))) * scale).astype(complex))
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=complex)
            sym[j, k] = sym[k, j] = scale
            anti = np.zeros((d, d), dtype=complex)
            anti[j, k] = -1j * scale
            anti[k, j] = 1j * scale
            gens.extend((sym, anti))
    return np.array(gens)


def schatten_norm(X, kind="trace"):
    """Schatten norm of ``X``: 'trace' (p=1), 'hs' (p=2) or 'operator' (p=inf)."""
    X = np.asarray(X)
    if kind == "trace":
        return float(np.linalg.norm(X, "nuc"))
    if kind in ("hs", "hilbert-schmidt"):
        return float(np.linalg.norm(X, "fro"))
    if kind == "operator":
        return float(np.linalg.norm(X, 2))
    raise ValueError(f"unknown norm kind {kind!r}")


def four_matrix_trace_identity_check(A, B, C, D, tol=1e-12):
    """Check ``Tr((A (x) B)(C (x) D)^R) == Tr(A C B^T D^T)`` numerically.

    Tolerance is relative to the product of the Frobenius norms.
    """
    n = A.shape[0]
    lhs = np.trace(np.kron(A, B) @ reshuffle(np.kron(C, D), (n, n)))
    rhs = np.trace(A @ C @ B.T @ D.T)
    scale = max(1.0, np.prod([np.linalg.norm(M) for M in (A, B, C, D)]))
    return bool(abs(lhs - rhs) <= tol * scale)
