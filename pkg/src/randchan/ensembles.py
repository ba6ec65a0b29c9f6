"""Seedable samplers for the random matrix ensembles used to build channels.

Every sampler takes ``rng``, which may be an int seed, an :class:`RngStream`,
a :class:`numpy.random.Generator` or None. Functions with a ``size``
argument return stacks of independent draws along a leading axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

__all__ = [
    "RngStream",
    "as_generator",
    "ginibre",
    "gue",
    "wishart",
    "haar_unitary",
    "haar_isometry",
    "dirichlet",
    "induced_state",
    "bures_state",
    "fuss_catalan_state",
]


@dataclass(frozen=True)
class RngStream:
    """A counter-based random stream: ``(seed, stream)`` fully determines the draws.

    Distinct stream indices are derived through :class:`numpy.random.SeedSequence`
    spawn keys, which gives statistically independent generators.
    """

    seed: int
    stream: int = 0

    def generator(self):
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream):
        return RngStream(self.seed, stream)


def as_generator(rng=None):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    return np.random.default_rng(rng)


def _shape(size, rows, cols):
    if size is None:
        return (rows, cols)
    if isinstance(size, int):
        return (size, rows, cols)
    return tuple(size) + (rows, cols)


def ginibre(rows, cols, field="complex", rng=None, size=None):
    """Matrices with i.i.d. standard Gaussian entries.

    Complex entries are ``(x + i y)/sqrt(2)`` with x, y standard normal, so
    ``E|G_ij|^2 = 1`` and ``E Tr(G G^dag) = rows * cols``.
    """
    if rows < 1 or cols < 1:
        raise ValueError("Ginibre dimensions must be positive")
    gen = as_generator(rng)
    shape = _shape(size, rows, cols)
    if field == "real":
        return gen.standard_normal(shape)
    if field == "complex":
        z = gen.standard_normal(shape + (2,))
        return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)
    raise ValueError(f"field must be 'real' or 'complex', got {field!r}")


def gue(d, rng=None, size=None):
    """GUE matrix ``(G + G^dag)/sqrt(2)``; ``H/sqrt(d)`` tends to the semicircle on [-2, 2]."""
    G = ginibre(d, d, rng=rng, size=size)
    return (G + G.conj().swapaxes(-1, -2)) / np.sqrt(2)


def wishart(d, s, rng=None, size=None):
    """Complex Wishart matrix ``G G^dag`` with ``G`` a d x s Ginibre matrix.

    Only integer ``s`` is supported.
    """
    if int(s) != s or s < 1:
        raise ValueError(f"Wishart parameter must be a positive integer, got {s!r}")
    G = ginibre(d, int(s), rng=rng, size=size)
    return G @ G.conj().swapaxes(-1, -2)


def _phase_fix(Q, R):
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    phase = diag / np.abs(diag)
    return Q * phase[..., None, :]


def haar_unitary(d, rng=None, size=None, dtype=np.complex128):
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix.

    The columns of Q are rescaled by the phases of ``diag(R)``; without that
    step the distribution is not Haar.

    A single large draw can be requested in ``complex64`` to halve memory; it
    is factorized in place through LAPACK.
    """
    if d < 1:
        raise ValueError("dimension must be positive")
    if size is None and np.dtype(dtype) == np.complex64:
        return _haar_unitary_inplace(d, as_generator(rng))
    G = ginibre(d, d, rng=rng, size=size)
    Q, R = np.linalg.qr(G)
    return _phase_fix(Q, R).astype(dtype, copy=False)


def _haar_unitary_inplace(d, gen):
    # Fill column blocks to keep the float64 scratch small.
    A = np.empty((d, d), dtype=np.complex64, order="F")
    block = max(1, 2**22 // max(d, 1))
    for start in range(0, d, block):
        stop = min(d, start + block)
        z = gen.standard_normal((d, stop - start, 2))
        A[:, start:stop] = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)
    qr, tau, _, info = lapack.cgeqrf(A, overwrite_a=True)
    if info != 0:
        raise np.linalg.LinAlgError(f"cgeqrf failed with info={info}")
    diag = np.diagonal(qr).copy()
    q, _, info = lapack.cungqr(qr, tau, overwrite_a=True)
    if info != 0:
        raise np.linalg.LinAlgError(f"cungqr failed with info={info}")
    q *= (diag / np.abs(diag))[None, :]
    return q


def haar_isometry(D, d, rng=None, size=None):
    """Haar isometry ``C^d -> C^D``, i.e. the first d columns of a Haar unitary.

    Computed from the reduced QR of a D x d Ginibre matrix, which has the
    same law as truncating a full Haar unitary.
    """
    if d > D:
        raise ValueError(f"isometry needs d <= D, got d={d}, D={D}")
    G = ginibre(D, d, rng=rng, size=size)
    Q, R = np.linalg.qr(G)
    return _phase_fix(Q, R)


def dirichlet(d, s, rng=None, size=None):
    """Symmetric Dirichlet(s) vectors on the simplex of dimension d.

    Normalized i.i.d. Gamma(s) variables; numpy's gamma sampler is valid for
    every ``s > 0``.
    """
    if d < 2:
        raise ValueError("simplex dimension must be at least 2")
    if s <= 0:
        raise ValueError("Dirichlet parameter must be positive")
    gen = as_generator(rng)
    shape = (d,) if size is None else (tuple(np.atleast_1d(size)) + (d,))
    g = gen.standard_gamma(s, size=shape)
    return g / g.sum(axis=-1, keepdims=True)


def _normalize_trace(W):
    tr = np.trace(W, axis1=-2, axis2=-1).real
    return W / tr[..., None, None]


def induced_state(d, s, rng=None, size=None):
    """Density matrix from the induced measure: ``W / Tr W`` with W Wishart(d, s)."""
    return _normalize_trace(wishart(d, s, rng=rng, size=size))


def bures_state(d, rng=None, size=None):
    """Bures-distributed density matrix ``X X^dag / Tr`` with ``X = (I + U) G``."""
    if d < 2:
        raise ValueError("dimension must be at least 2")
    gen = as_generator(rng)
    U = haar_unitary(d, rng=gen, size=size)
    G = ginibre(d, d, rng=gen, size=size)
    X = (np.eye(d) + U) @ G
    return _normalize_trace(X @ X.conj().swapaxes(-1, -2))


def fuss_catalan_state(d, s, rng=None, size=None):
    """Density matrix ``X X^dag / Tr`` with X a product of s square Ginibre matrices."""
    if s < 1:
        raise ValueError("order must be at least 1")
    gen = as_generator(rng)
    X = ginibre(d, d, rng=gen, size=size)
    for _ in range(s - 1):
        X = X @ ginibre(d, d, rng=gen, size=size)
    return _normalize_trace(X @ X.conj().swapaxes(-1, -2))
