"""Spectral statistics of random channels and the closed-form averages they are tested against.

Eigenvalues of a superoperator are computed from its real Bloch matrix,
which is similar to the superoperator and halves the cost of the dense
eigensolver.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import special, stats

from .channel import bloch_matrix
from .ensembles import as_generator, ginibre
from .linalg import gellmann_basis, hermitian_part, reshuffle

__all__ = [
    "SpectrumSummary",
    "InvariantStateResult",
    "PurityUnitarityEstimate",
    "DegeneratePerronError",
    "summarize_spectrum",
    "superop_spectrum",
    "choi_superop_eigenvalues",
    "stochastic_spectrum",
    "real_eigenvalue_count",
    "invariant_state",
    "deflated_singular_values",
    "haar_pure_states",
    "purity_unitarity",
    "purity_unitarity_batch",
    "purity_unitarity_oracle",
    "trace_product_oracle",
    "nonunitality_hs_oracle",
    "square_nonunitality_hs_oracle",
    "coherence_measures",
    "von_neumann_entropy",
    "non_unitality_shift",
    "moment_oracle",
    "empirical_moments",
    "exponent_fit",
    "fraction_in_disk",
    "write_spectrum_csv",
    "write_summary_json",
]

PERRON_TOL = 1e-6
REAL_TOL = 1e-9


class DegeneratePerronError(np.linalg.LinAlgError):
    """The eigenvalue 1 is not separated from the rest of the spectrum."""


@dataclass(frozen=True)
class SpectrumSummary:
    eigenvalues: np.ndarray
    perron_index: int
    gap: float
    bulk_radius: float
    real_count: int

    @property
    def perron_value(self):
        return complex(self.eigenvalues[self.perron_index])

    @property
    def perron_residual(self):
        return float(abs(self.perron_value - 1.0))

    @property
    def bulk(self):
        return np.delete(self.eigenvalues, self.perron_index)

    def as_dict(self):
        return {
            "gap": self.gap,
            "bulk_radius": self.bulk_radius,
            "real_count": self.real_count,
            "perron_residual": self.perron_residual,
        }


def summarize_spectrum(eigenvalues, perron_tol=PERRON_TOL, imag_tol=REAL_TOL):
    """Locate the eigenvalue 1 and derive gap, bulk radius and real count.

    The Perron eigenvalue is the one with the largest real part; it must lie
    within ``perron_tol`` of 1. Degenerate cases (several unimodular
    eigenvalues) are allowed here and give gap 0.
    """
    ev = np.asarray(eigenvalues, dtype=complex).ravel()
    idx = int(np.argmax(ev.real - 1e-12 * np.abs(ev.imag)))
    if abs(ev[idx] - 1.0) > perron_tol:
        raise ValueError(f"no eigenvalue within {perron_tol:g} of 1 (closest real part {ev[idx]:.6g})")
    rest = np.abs(np.delete(ev, idx))
    radius = float(rest.max()) if rest.size else 0.0
    scale = max(1.0, float(np.abs(ev).max()))
    return SpectrumSummary(
        eigenvalues=ev,
        perron_index=idx,
        gap=1.0 - radius,
        bulk_radius=radius,
        real_count=int(np.sum(np.abs(ev.imag) <= imag_tol * scale)),
    )


def choi_superop_eigenvalues(J, d):
    """Superoperator eigenvalues of a square-dimension Choi matrix (or a stack of them)."""
    J = np.asarray(J)
    if J.ndim == 3:
        return np.array([choi_superop_eigenvalues(j, d) for j in J])
    return np.linalg.eigvals(bloch_matrix(reshuffle(J, (d, d)), d))


def superop_spectrum(channel, **kw):
    """Full superoperator spectrum of a channel ``M_d -> M_d`` with derived statistics."""
    if channel.d_in != channel.d_out:
        raise ValueError("superoperator spectrum needs equal input and output dimensions")
    d = channel.d_in
    ev = np.linalg.eigvals(bloch_matrix(channel.superop, d))
    return summarize_spectrum(ev, **kw)


def stochastic_spectrum(T, **kw):
    return summarize_spectrum(np.linalg.eigvals(np.asarray(T, dtype=float)), **kw)


def real_eigenvalue_count(summary, imag_tol=REAL_TOL):
    ev = summary.eigenvalues
    scale = max(1.0, float(np.abs(ev).max()))
    return int(np.sum(np.abs(ev.imag) <= imag_tol * scale))


def fraction_in_disk(summary, radius):
    """Fraction of non-Perron eigenvalues with modulus at most ``radius``."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    bulk = np.abs(summary.bulk)
    if bulk.size == 0:
        return 1.0
    return float(np.mean(bulk <= radius))


# invariant states --------------------------------------------------------------


@dataclass(frozen=True)
class InvariantStateResult:
    state: np.ndarray
    residual: float
    distance_to_mixed: float
    method: str
    iterations: int = 0


def _finish_state(channel, X, method, iterations, negativity_floor):
    d = channel.d_in
    rho = hermitian_part(X)
    rho = rho / np.trace(rho).real
    w = np.linalg.eigvalsh(rho)
    if w[0] < -negativity_floor:
        raise ValueError(f"fixed point has eigenvalue {w[0]:.3e}; not a valid state")
    residual = float(np.linalg.norm(channel.apply(rho) - rho))
    dist = float(np.abs(np.linalg.eigvalsh(rho - np.eye(d) / d)).sum())
    return InvariantStateResult(rho, residual, dist, method, iterations)


def _invariant_by_eig(channel, gap_tol, negativity_floor):
    d = channel.d_in
    B = bloch_matrix(channel.superop, d)
    w, V = np.linalg.eig(B)
    summary = summarize_spectrum(w)
    if summary.bulk_radius > 1 - gap_tol:
        raise DegeneratePerronError(
            f"subleading eigenvalue modulus {summary.bulk_radius:.6g} too close to 1"
        )
    v = V[:, summary.perron_index]
    v = (v / v[0]).real
    L = gellmann_basis(d)
    X = (np.eye(d) + np.tensordot(v[1:], L, axes=1)) / d
    return _finish_state(channel, X, "eig", 0, negativity_floor)


def invariant_state(channel, tol=1e-12, method="auto", eig_max_dim=12, max_iter=500,
                    gap_tol=1e-6, negativity_floor=1e-8):
    """Fixed point ``rho = Phi(rho)`` of a channel ``M_d -> M_d``.

    Parameters
    ----------
    tol : float
        Power-iteration stopping threshold on ``||Phi(rho) - rho||_2``.
    method : {"auto", "eig", "power"}
        ``eig`` diagonalizes the Bloch matrix; ``power`` iterates the channel
        from the maximally mixed state. ``auto`` picks ``eig`` for
        ``d <= eig_max_dim`` and ``power`` otherwise, falling back to ``eig``
        if iteration stalls.
    gap_tol : float
        ``eig`` raises :class:`DegeneratePerronError` when the subleading
        eigenvalue modulus exceeds ``1 - gap_tol``.

    Returns
    -------
    InvariantStateResult
    """
    if channel.d_in != channel.d_out:
        raise ValueError("invariant state needs equal input and output dimensions")
    d = channel.d_in
    if method == "auto":
        method = "eig" if d <= eig_max_dim else "power"
    if method == "eig":
        return _invariant_by_eig(channel, gap_tol, negativity_floor)
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    rho = np.eye(d, dtype=complex) / d
    for it in range(1, max_iter + 1):
        nxt = channel.apply(rho)
        step = np.linalg.norm(nxt - rho)
        rho = nxt
        if step < tol:
            return _finish_state(channel, rho, "power", it, negativity_floor)
    return _invariant_by_eig(channel, gap_tol, negativity_floor)


# singular values ---------------------------------------------------------------


def deflated_singular_values(X, v):
    """Singular values of ``P X P`` with ``P = I - v v^dag``, minus the trivial zero along v.

    Returns ``n - 1`` values in descending order.
    """
    X = np.asarray(X)
    v = np.asarray(v).ravel()
    if abs(np.linalg.norm(v) - 1) > 1e-10:
        raise ValueError("deflation vector must have unit norm")
    Xv = X @ v
    vX = v.conj() @ X
    vXv = v.conj() @ Xv
    Y = X - np.outer(Xv, v.conj()) - np.outer(v, vX) + vXv * np.outer(v, v.conj())
    s = np.linalg.svd(Y, compute_uv=False)
    return s[:-1]


# purity and unitarity ------------------------------------------------------


def haar_pure_states(d, rng=None, size=None):
    """Uniformly random unit vectors in C^d."""
    z = ginibre(d, 1, rng=rng, size=size)[..., 0]
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


@dataclass(frozen=True)
class PurityUnitarityEstimate:
    purity: float
    purity_se: float
    unitarity: float
    unitarity_se: float
    n: int


def _estimate(p, u):
    n = p.size
    se = (lambda x: float(x.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"))
    return PurityUnitarityEstimate(float(p.mean()), se(p), float(u.mean()), se(u), n)


def purity_unitarity_batch(kraus, n_probe_states, rng=None):
    """Per-channel probe averages of output purity and unitarity.

    Parameters
    ----------
    kraus : ndarray, shape (n, r, d_out, d_in)
    n_probe_states : int
        Haar-random pure inputs per channel.

    Returns
    -------
    p, u : ndarray, shape (n,)
    """
    K = np.asarray(kraus)
    n, _, d2, d1 = K.shape
    psi = haar_pure_states(d1, rng=rng, size=(n, n_probe_states))
    v = np.einsum("nkai,npi->npka", K, psi, optimize=True)
    out = np.einsum("npka,npkb->npab", v, v.conj(), optimize=True)
    center = np.einsum("nkai,nkbi->nab", K, K.conj(), optimize=True) / d1
    purity = np.einsum("npab,npba->np", out, out).real
    diff = out - center[:, None]
    u = d1 / (d1 - 1) * np.einsum("npab,npba->np", diff, diff).real
    return purity.mean(axis=1), u.mean(axis=1)


def purity_unitarity(channel, n_probe_states, rng=None):
    """Monte Carlo output purity and unitarity of one channel over Haar pure inputs."""
    if n_probe_states < 1:
        raise ValueError("need at least one probe state")
    K = channel.kraus[None]
    gen = as_generator(rng)
    d1 = channel.d_in
    psi = haar_pure_states(d1, rng=gen, size=n_probe_states)
    v = np.einsum("kai,pi->pka", K[0], psi)
    out = np.einsum("pka,pkb->pab", v, v.conj())
    center = channel.apply(np.eye(d1) / d1)
    p = np.einsum("pab,pba->p", out, out).real
    diff = out - center
    u = d1 / (d1 - 1) * np.einsum("pab,pba->p", diff, diff).real
    return _estimate(p, u)


def purity_unitarity_oracle(d_out, M):
    """Ensemble averages of output purity and unitarity for Haar-isometry channels."""
    D = d_out * M
    return (d_out + M) / (D + 1), M * (d_out**2 - 1) / (D**2 - 1)


def trace_product_oracle(A, B, d_in, d_out, M):
    """Ensemble average of ``Tr Phi(A) Phi(B)`` over Haar-isometry channels with environment M."""
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != (d_in, d_in) or B.shape != (d_in, d_in):
        raise ValueError(f"A and B must be {d_in}x{d_in}")
    D = d_out * M
    num = np.trace(A) * np.trace(B) * d_out * (M**2 - 1) + np.trace(A @ B) * M * (d_out**2 - 1)
    val = num / (D**2 - 1)
    return float(val.real) if abs(val.imag) < 1e-12 * max(1.0, abs(val)) else complex(val)


def nonunitality_hs_oracle(d_in, d_out, M):
    """Ensemble average of ``||Phi(I/d_in) - I/d_out||_2^2``."""
    I = np.eye(d_in) / d_in
    return trace_product_oracle(I, I, d_in, d_out, M) - 1.0 / d_out


def square_nonunitality_hs_oracle(d, t):
    """``(d^2 - 1)(t d^2 - 1) / (d (t^2 d^6 - 1))``, the square-dimension case with ``M = t d^2``."""
    return (d**2 - 1) * (t * d**2 - 1) / (d * (t**2 * d**6 - 1))


def non_unitality_shift(channel, t):
    """Hermitian shift ``sqrt(t) d_in d_out (Phi(I/d_in) - I/d_out)``."""
    d1, d2 = channel.d_in, channel.d_out
    X = channel.apply(np.eye(d1) / d1) - np.eye(d2) / d2
    return np.sqrt(t) * d1 * d2 * hermitian_part(X)


# coherence -------------------------------------------------------------------


def von_neumann_entropy(w):
    """Natural-log entropy of a probability vector (eigenvalues); zeros contribute 0."""
    w = np.clip(np.asarray(w, dtype=float), 0, None)
    nz = w[w > 0]
    return float(-(nz * np.log(nz)).sum())


def coherence_measures(J):
    """``(C2, C1, Ce)`` coherences of a Choi matrix.

    C2 and C1 sum squared and absolute off-diagonal entries. The entropic
    coherence evaluates both entropies on ``J / Tr J`` and rescales by
    ``Tr J``; this equals ``S(diag J) - S(J)`` computed on J itself.
    """
    J = np.asarray(J)
    absJ = np.abs(J)
    diag = np.diagonal(J).real
    C2 = float((absJ**2).sum() - (diag**2).sum())
    C1 = float(absJ.sum() - np.abs(diag).sum())
    tr = diag.sum()
    S_diag = von_neumann_entropy(diag / tr)
    S_full = von_neumann_entropy(np.linalg.eigvalsh(hermitian_part(J)) / tr)
    return C2, C1, float(tr * (S_diag - S_full))


# limiting laws ---------------------------------------------------------------


def _catalan(n):
    return comb(2 * n, n) // (n + 1)


def moment_oracle(law, k, param=None):
    """Exact k-th moment of a limiting spectral law.

    law : {"semicircle", "quarter-circle", "marchenko-pastur", "fuss-catalan"}
        Semicircle of radius 2; quarter-circle density ``sqrt(4 - x^2)/pi``
        on [0, 2]; Marchenko-Pastur with ratio ``param`` (default 1);
        Fuss-Catalan of order ``param`` (default 1), both with mean 1.
    """
    if k < 0 or int(k) != k:
        raise ValueError("moment order must be a non-negative integer")
    k = int(k)
    if law == "semicircle":
        return float(_catalan(k // 2)) if k % 2 == 0 else 0.0
    if law == "quarter-circle":
        return float(2 ** (k + 1) / np.pi * special.beta((k + 1) / 2, 1.5))
    if law == "marchenko-pastur":
        c = 1.0 if param is None else float(param)
        if k == 0:
            return 1.0
        return float(sum(comb(k, j) * comb(k, j - 1) / k * c ** (j - 1) for j in range(1, k + 1)))
    if law == "fuss-catalan":
        s = 1 if param is None else int(param)
        return float(comb((s + 1) * k, k) / (s * k + 1))
    raise ValueError(f"unsupported law {law!r}")


def empirical_moments(x, orders):
    x = np.asarray(x, dtype=float).ravel()
    return [float(np.mean(x**k)) for k in orders]


def exponent_fit(pairs):
    """Least-squares slope of ``log r`` against ``log d``.

    Returns ``(alpha, stderr)``.
    """
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a sequence of (d, radius) pairs")
    d, r = arr[:, 0], arr[:, 1]
    if np.any(r <= 0) or np.any(d <= 0):
        raise ValueError("dimensions and radii must be positive")
    if np.unique(d).size < 3:
        raise ValueError("need at least three distinct dimensions")
    fit = stats.linregress(np.log(d), np.log(r))
    return float(fit.slope), float(fit.stderr)


# output formats ---------------------------------------------------------------


def write_spectrum_csv(path, spectra):
    """Write ``(sample_index, re, im)`` rows; ``spectra`` is a sequence of eigenvalue arrays."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_index", "re", "im"])
        for i, ev in enumerate(spectra):
            for z in np.asarray(ev).ravel():
                w.writerow([i, repr(float(z.real)), repr(float(z.imag))])


def write_summary_json(path, summary):
    with open(path, "w") as fh:
        json.dump(summary.as_dict(), fh, indent=2, sort_keys=True)
