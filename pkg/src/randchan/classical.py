"""Classical shadows of quantum channels: super-decoherence and stochastic matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensembles import as_generator, dirichlet, ginibre
from .linalg import gellmann_basis

__all__ = [
    "ClassicalAffineForm",
    "CovarianceReport",
    "stochastic_from_choi",
    "super_decohere",
    "decohere_interpolate",
    "random_stochastic",
    "is_bistochastic",
    "column_covariance_stats",
    "stinespring_column_covariances",
    "diagonal_generators",
    "prob_to_bloch",
    "bloch_to_prob",
    "stochastic_to_affine",
    "save_stochastic_csv",
    "load_stochastic_csv",
]


def stochastic_from_choi(J, d_in, d_out):
    """``T[a, i] = J[(a, i), (a, i)]``; works on stacks of Choi matrices."""
    diag = np.diagonal(np.asarray(J), axis1=-2, axis2=-1).real
    return diag.reshape(diag.shape[:-1] + (d_out, d_in)).copy()


def super_decohere(channel, method="choi"):
    """Column-stochastic matrix ``T[j, i] = <j|Phi(|i><i|)|j>`` of a channel.

    method : {"choi", "kraus", "definition"}
        Diagonal of the Choi matrix, ``sum_k A_k * conj(A_k)`` (Hadamard
        products), or direct action on basis projectors. All three agree.
    """
    if method == "choi":
        return stochastic_from_choi(channel.choi, channel.d_in, channel.d_out)
    if method == "kraus":
        K = channel.kraus
        return (K * K.conj()).real.sum(axis=0)
    if method == "definition":
        projectors = np.zeros((channel.d_in, channel.d_in, channel.d_in), dtype=complex)
        idx = np.arange(channel.d_in)
        projectors[idx, idx, idx] = 1
        out = channel.apply(projectors)  # (i, d_out, d_out)
        return np.diagonal(out, axis1=-2, axis2=-1).real.T.copy()
    raise ValueError(f"unknown method {method!r}")


def decohere_interpolate(J, b):
    """``J_b = b J + (1 - b) diag(J)``; b = 1 keeps J, b = 0 leaves the classical part."""
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"decoherence parameter must lie in [0, 1], got {b}")
    J = np.asarray(J)
    diag = np.diagonal(J, axis1=-2, axis2=-1)
    out = b * J
    n = J.shape[-1]
    idx = np.arange(n)
    out[..., idx, idx] = diag
    return out


def random_stochastic(d_out, d_in, column_law="uniform", s=1.0, rng=None, size=None):
    """Random column-stochastic matrix with independent columns.

    column_law : {"uniform", "dirichlet", "ginibre"}
        ``uniform`` is Dirichlet(1) (flat on the simplex); ``dirichlet`` uses
        parameter ``s``; ``ginibre`` normalizes ``|G_ji|^2`` column-wise,
        which is again Dirichlet(1).
    """
    gen = as_generator(rng)
    lead = () if size is None else tuple(np.atleast_1d(size))
    if column_law == "uniform":
        cols = dirichlet(d_out, 1.0, rng=gen, size=lead + (d_in,))
    elif column_law == "dirichlet":
        cols = dirichlet(d_out, s, rng=gen, size=lead + (d_in,))
    elif column_law == "ginibre":
        G = np.abs(ginibre(d_out, d_in, rng=gen, size=size)) ** 2
        return G / G.sum(axis=-2, keepdims=True)
    else:
        raise ValueError(f"unknown column law {column_law!r}")
    return np.swapaxes(cols, -1, -2)


def is_bistochastic(T, tol=1e-10):
    T = np.asarray(T)
    if T.shape[0] != T.shape[1]:
        return False
    rows = np.linalg.norm(T.sum(axis=1) - 1, ord=np.inf)
    cols = np.linalg.norm(T.sum(axis=0) - 1, ord=np.inf)
    return bool(max(rows, cols) <= tol)


@dataclass(frozen=True)
class CovarianceReport:
    """Entry covariances across samples, with standard errors.

    ``same_row`` pools cov[T_{j,i1}, T_{j,i2}] over j and i1 != i2;
    ``cross`` pools cov[T_{j1,i1}, T_{j2,i2}] over j1 != j2, i1 != i2.
    """

    n_samples: int
    same_row: float
    same_row_se: float
    cross: float
    cross_se: float
    matrix: np.ndarray


def _pooled(centered, pairs):
    # per-sample average of the product over the pair set, then mean and SE
    prods = np.mean([centered[:, p] * centered[:, q] for p, q in pairs], axis=0)
    n = prods.size
    return float(prods.mean() * n / (n - 1)), float(prods.std(ddof=1) / np.sqrt(n))


def column_covariance_stats(samples):
    """Covariance statistics between entries of distinct columns."""
    X = np.asarray(samples, dtype=float)
    if X.ndim != 3 or X.shape[0] < 2:
        raise ValueError("need at least two samples of equal shape (n, d_out, d_in)")
    n, d2, d1 = X.shape
    if d1 < 2:
        raise ValueError("need at least two columns")
    flat = X.reshape(n, d2 * d1)
    centered = flat - flat.mean(axis=0)
    same = [(j * d1 + i1, j * d1 + i2) for j in range(d2) for i1 in range(d1) for i2 in range(d1) if i1 != i2]
    cross = [
        (j1 * d1 + i1, j2 * d1 + i2)
        for j1 in range(d2)
        for j2 in range(d2)
        if j1 != j2
        for i1 in range(d1)
        for i2 in range(d1)
        if i1 != i2
    ]
    s, s_se = _pooled(centered, same)
    c, c_se = (np.nan, np.nan) if not cross else _pooled(centered, cross)
    return CovarianceReport(n, s, s_se, c, c_se, np.cov(flat, rowvar=False))


def stinespring_column_covariances(d_out, M):
    """Closed-form entry covariances of super-decohered Haar-isometry channels.

    Returns ``(same_row, cross)``, matching the fields of :class:`CovarianceReport`.
    """
    same = (d_out * M**2 - 1) / (d_out**3 * M**2 - d_out) - 1 / d_out**2
    cross = M**2 / ((d_out * M) ** 2 - 1) - 1 / d_out**2
    return same, cross


def diagonal_generators(d):
    """Rows are the diagonals of the d-1 diagonal generators (norm^2 = d)."""
    return np.diagonal(gellmann_basis(d)[: d - 1], axis1=-2, axis2=-1).real.copy()


def prob_to_bloch(p):
    p = np.asarray(p, dtype=float)
    return p @ diagonal_generators(p.shape[-1]).T


def bloch_to_prob(eta, d=None):
    eta = np.asarray(eta, dtype=float)
    d = eta.shape[-1] + 1 if d is None else d
    return (1.0 + eta @ diagonal_generators(d)) / d


@dataclass(frozen=True)
class ClassicalAffineForm:
    """``eta' = C eta + chi`` on classical Bloch vectors; ``matrix`` is the full d x d form."""

    matrix: np.ndarray

    @property
    def C(self):
        return self.matrix[1:, 1:]

    @property
    def chi(self):
        return self.matrix[1:, 0]

    def apply(self, eta):
        return np.asarray(eta) @ self.C.T + self.chi


def stochastic_to_affine(T):
    T = np.asarray(T, dtype=float)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ValueError(f"affine form needs a square stochastic matrix, got shape {T.shape}")
    d = T.shape[0]
    L = np.vstack([np.ones(d), diagonal_generators(d)])
    return ClassicalAffineForm(L @ T @ L.T / d)


def save_stochastic_csv(path, T):
    """Write a d_out x d_in stochastic matrix as CSV with full float precision."""
    T = np.asarray(T, dtype=float)
    header = ",".join(f"col{i}" for i in range(T.shape[1]))
    np.savetxt(path, T, delimiter=",", fmt="%.17g", header=header, comments="")


def load_stochastic_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
