"""Quantum channels: representations, conversions, affine (Bloch) forms.

The Choi matrix lives on output (x) input,

    J = sum_ij Phi(|i><j|) (x) |i><j|,

so ``J[(a, i), (b, j)] = Phi(|i><j|)[a, b]``, it has trace ``d_in``, and
trace preservation reads ``partial_trace(J, (d_out, d_in), keep=1) == I``.
The superoperator ``S = reshuffle(J, (d_out, d_in))`` acts on row-major
vectorized matrices and equals ``sum_k A_k (x) conj(A_k)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.linalg import blas

from .linalg import (
    devectorize,
    gellmann_basis,
    hermitian_part,
    partial_trace,
    partial_transpose,
    reshuffle,
    vectorize,
)

__all__ = [
    "KINDS",
    "QuantumChannel",
    "CPTPReport",
    "BlochForm",
    "FanoForm",
    "choi_from_kraus",
    "kraus_from_choi",
    "validate_cptp",
    "choi_rank",
    "apply_choi",
    "bloch_form",
    "bloch_matrix",
    "fano_form",
    "verify_fano_equivalence",
    "identity_channel",
    "depolarizing_channel",
    "unitary_channel",
    "save_channel",
    "load_channel",
]

KINDS = ("kraus", "choi", "superop", "stinespring")

KRAUS_CUTOFF = 1e-12


def _freeze(a):
    # complex64 inputs stay single precision
    a = np.array(a, dtype=a.dtype if np.iscomplexobj(a) else complex)
    a.flags.writeable = False
    return a


def choi_from_kraus(kraus):
    """``J = sum_k |A_k>><<A_k|`` for Kraus operators stacked as (..., r, d_out, d_in)."""
    X = vectorize(kraus)  # (..., r, d_out*d_in)
    X = np.swapaxes(X, -1, -2)
    return X @ X.conj().swapaxes(-1, -2)


def kraus_from_choi(J, d_out, d_in, cutoff=KRAUS_CUTOFF, tol=1e-10):
    """Minimal Kraus set from the eigendecomposition of a PSD Choi matrix.

    Eigenvalues below ``cutoff * max`` are dropped; an eigenvalue below
    ``-tol * max`` means the map is not completely positive.
    """
    w, V = np.linalg.eigh(hermitian_part(np.asarray(J)))
    top = max(w[-1], 0.0)
    if w[0] < -tol * max(top, 1.0):
        raise ValueError(f"Choi matrix has eigenvalue {w[0]:.3e}; map is not completely positive")
    keep = w > cutoff * top
    vecs = V[:, keep] * np.sqrt(w[keep])
    return devectorize(vecs.T[::-1], d_out, d_in)


@dataclass(frozen=True)
class QuantumChannel:
    """A linear map ``M_{d_in} -> M_{d_out}`` with cached representations.

    Build with one of the ``from_*`` constructors. Missing representations
    are computed on first access and memoized; stored arrays are read-only.
    ``convert`` returns a new channel with the requested representation in
    its cache.
    """

    d_in: int
    d_out: int
    _reps: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not self._reps:
            raise ValueError("a channel needs at least one representation")
        for kind in self._reps:
            if kind not in KINDS:
                raise ValueError(f"unknown representation {kind!r}")

    @classmethod
    def from_kraus(cls, kraus):
        K = np.asarray(kraus)
        if K.ndim == 2:
            K = K[None]
        if K.ndim != 3:
            raise ValueError("Kraus operators must be a (r, d_out, d_in) array")
        return cls(K.shape[2], K.shape[1], {"kraus": _freeze(K)})

    @classmethod
    def from_choi(cls, J, d_in, d_out):
        J = np.asarray(J)
        n = d_in * d_out
        if J.shape != (n, n):
            raise ValueError(f"Choi matrix must be {n}x{n}, got {J.shape}")
        return cls(d_in, d_out, {"choi": _freeze(J)})

    @classmethod
    def from_superop(cls, S, d_in, d_out):
        S = np.asarray(S)
        if S.shape != (d_out**2, d_in**2):
            raise ValueError(f"superoperator must be {d_out**2}x{d_in**2}, got {S.shape}")
        return cls(d_in, d_out, {"superop": _freeze(S)})

    @classmethod
    def from_stinespring(cls, V, d_out, env_dim):
        V = np.asarray(V)
        if V.ndim != 2 or V.shape[0] != d_out * env_dim:
            raise ValueError(f"isometry must have {d_out * env_dim} rows, got {V.shape}")
        return cls(V.shape[1], d_out, {"stinespring": _freeze(V)})

    # representations -----------------------------------------------------

    def has(self, kind):
        return kind in self._reps

    def _get(self, kind):
        if kind not in KINDS:
            raise ValueError(f"unknown representation {kind!r}")
        if kind not in self._reps:
            self._reps[kind] = _freeze(getattr(self, f"_compute_{kind}")())
        return self._reps[kind]

    def convert(self, kind):
        self._get(kind)
        return QuantumChannel(self.d_in, self.d_out, dict(self._reps))

    @property
    def kraus(self):
        return self._get("kraus")

    @property
    def choi(self):
        return self._get("choi")

    @property
    def superop(self):
        return self._get("superop")

    @property
    def stinespring(self):
        return self._get("stinespring")

    @property
    def env_dim(self):
        return self.stinespring.shape[0] // self.d_out

    def _compute_kraus(self):
        if "stinespring" in self._reps:
            V = self._reps["stinespring"]
            M = V.shape[0] // self.d_out
            return V.reshape(self.d_out, M, self.d_in).transpose(1, 0, 2)
        return kraus_from_choi(self.choi, self.d_out, self.d_in)

    def _compute_choi(self):
        if "superop" in self._reps:
            return reshuffle(self._reps["superop"], (self.d_out, self.d_out), (self.d_in, self.d_in))
        return choi_from_kraus(self.kraus)

    def _compute_superop(self):
        return reshuffle(self.choi, (self.d_out, self.d_in))

    def _compute_stinespring(self):
        K = self.kraus
        return K.transpose(1, 0, 2).reshape(self.d_out * K.shape[0], self.d_in)

    # action ----------------------------------------------------------------

    def __call__(self, X):
        return self.apply(X)

    def apply(self, X):
        """``Phi(X)`` for a matrix or a stack of matrices with shape (..., d_in, d_in)."""
        X = np.asarray(X)
        if X.shape[-2:] != (self.d_in, self.d_in):
            raise ValueError(f"input must be {self.d_in}x{self.d_in}, got {X.shape[-2:]}")
        if "superop" in self._reps and "kraus" not in self._reps:
            v = vectorize(X) @ self._reps["superop"].T
            return devectorize(v, self.d_out, self.d_out)
        K = self.kraus
        if X.ndim == 2:
            return self._apply_stacked(X)
        return np.einsum("kai,...ij,kbj->...ab", K, X, K.conj(), optimize=True)

    def _apply_stacked(self, X):
        # rows of V are (output, kraus index); V X reshaped to (d_out, r*d_in)
        # pairs with V reshaped the same way, so Phi(X) = B K^dag in one gemm
        V = self.stinespring
        r = V.shape[0] // self.d_out
        B = (V @ X).reshape(self.d_out, r * self.d_in)
        Kh = V.reshape(self.d_out, r * self.d_in)
        dtype = np.result_type(B, Kh)
        gemm = blas.get_blas_funcs("gemm", dtype=dtype)
        # Fortran-ordered transposed views avoid copies: C^T = conj(Kh) B^T
        Ct = gemm(1.0, Kh.T.astype(dtype, copy=False), B.T.astype(dtype, copy=False), trans_a=2)
        return Ct.T

    def adjoint(self):
        """The Hilbert-Schmidt adjoint map ``M_{d_out} -> M_{d_in}``."""
        return QuantumChannel.from_kraus(self.kraus.conj().transpose(0, 2, 1))

    def __repr__(self):
        return f"QuantumChannel(d_in={self.d_in}, d_out={self.d_out}, reps={sorted(self._reps)})"


def apply_choi(J, X, d_in, d_out):
    """``Phi(X) = Tr_in[J (I (x) X^T)]`` evaluated directly from the Choi matrix."""
    prod = J @ np.kron(np.eye(d_out), np.asarray(X).T)
    return partial_trace(prod, (d_out, d_in), keep=0)


@dataclass(frozen=True)
class CPTPReport:
    min_eigenvalue: float
    tp_defect: float
    unital_defect: float

    def is_cptp(self, tol=1e-10):
        return self.min_eigenvalue >= -tol and self.tp_defect <= tol

    def is_unital(self, tol=1e-10):
        return self.unital_defect <= tol


def validate_cptp(J, d_in, d_out):
    """Positivity and normalization defects of a Choi matrix.

    Defects are max-abs entry deviations of the partial traces from identity.
    The unital defect is only meaningful when ``d_in == d_out``; for
    rectangular maps it compares ``Tr_in J`` with ``(d_in/d_out) I``.
    """
    J = np.asarray(J)
    min_eig = float(np.linalg.eigvalsh(hermitian_part(J))[0])
    tp = partial_trace(J, (d_out, d_in), keep=1)
    un = partial_trace(J, (d_out, d_in), keep=0)
    return CPTPReport(
        min_eigenvalue=min_eig,
        tp_defect=float(np.abs(tp - np.eye(d_in)).max()),
        unital_defect=float(np.abs(un - (d_in / d_out) * np.eye(d_out)).max()),
    )


def choi_rank(channel, tol=1e-10):
    w = np.linalg.eigvalsh(hermitian_part(channel.choi))
    return int(np.sum(w > tol * w[-1]))


def identity_channel(d):
    return QuantumChannel.from_kraus(np.eye(d, dtype=complex)[None])


def unitary_channel(U):
    return QuantumChannel.from_kraus(np.asarray(U)[None])


def depolarizing_channel(d_in, d_out=None):
    """``X -> Tr(X) I/d_out``, with Choi matrix ``I/d_out``."""
    d_out = d_in if d_out is None else d_out
    return QuantumChannel.from_choi(np.eye(d_in * d_out, dtype=complex) / d_out, d_in, d_out)


# affine forms ---------------------------------------------------------------


@dataclass(frozen=True)
class BlochForm:
    """Real affine action ``tau' = Q tau + kappa`` on generalized Bloch vectors.

    ``matrix`` is the full (d^2 x d^2) form ``[[1, 0], [kappa, Q]]``. With
    diagonal generators first, the top-left (d-1) block of Q is the
    classical core C.
    """

    d: int
    matrix: np.ndarray

    @property
    def kappa(self):
        return self.matrix[1:, 0]

    @property
    def Q(self):
        return self.matrix[1:, 1:]

    @property
    def C(self):
        k = self.d - 1
        return self.Q[:k, :k]

    @property
    def Q1(self):
        k = self.d - 1
        return self.Q[:k, k:]

    @property
    def Q2(self):
        k = self.d - 1
        return self.Q[k:, :k]

    @property
    def QQ(self):
        k = self.d - 1
        return self.Q[k:, k:]

    @property
    def chi(self):
        return self.kappa[: self.d - 1]


@dataclass(frozen=True)
class FanoForm:
    """Expansion coefficients ``R~_ij = Tr(rho L_i (x) L_j)``, with ``L_0 = I``.

    ``a`` is the first row (Bloch vector of the second factor's reduced
    state), ``b`` the first column (first factor), ``R`` the correlation block.
    """

    matrix: np.ndarray

    @property
    def a(self):
        return self.matrix[0, 1:]

    @property
    def b(self):
        return self.matrix[1:, 0]

    @property
    def R(self):
        return self.matrix[1:, 1:]


def _basis_rows(d):
    """Sparse matrix whose rows are vec(L_i), i = 0..d^2-1 (L_0 = I)."""
    B = gellmann_basis(d, include_identity=True).reshape(d * d, d * d)
    return sp.csr_matrix(B)


def bloch_matrix(superop, d, imag_tol=1e-10):
    """Real (d^2 x d^2) matrix ``(1/d) Tr(L_i Phi(L_j))`` from a superoperator."""
    B = _basis_rows(d)
    S = np.asarray(superop)
    # conj(B) @ S @ B.T, with B sparse
    M = (B.conj() @ (B @ S.T).T) / d
    M = np.asarray(M)
    scale = max(1.0, np.abs(M).max())
    if np.abs(M.imag).max() > imag_tol * scale:
        raise ValueError("Bloch matrix has a non-negligible imaginary part; map is not Hermiticity preserving")
    return np.ascontiguousarray(M.real)


def bloch_form(channel):
    if channel.d_in != channel.d_out:
        raise ValueError("Bloch form needs equal input and output dimensions")
    return BlochForm(channel.d_in, bloch_matrix(channel.superop, channel.d_in))


def fano_form(rho, dims, imag_tol=1e-10):
    """Fano coefficients of a bipartite Hermitian matrix on ``C^dA (x) C^dB``."""
    dA, dB = dims
    rho = np.asarray(rho)
    if rho.shape != (dA * dB, dA * dB):
        raise ValueError(f"expected a {dA * dB}x{dA * dB} matrix, got {rho.shape}")
    BA = _basis_rows(dA)
    BB = _basis_rows(dB)
    # Tr(rho L_i (x) L_j) = vec(L_i^T) . rho^R . vec(L_j^T), and L^T = conj(L)
    R = reshuffle(rho, (dA, dB))
    M = np.asarray((BA.conj() @ (BB.conj() @ R.T).T))
    if np.abs(M.imag).max() > imag_tol * max(1.0, np.abs(M).max()):
        raise ValueError("Fano coefficients are not real; input is not Hermitian")
    return FanoForm(np.ascontiguousarray(M.real))


def verify_fano_equivalence(channel, tol=1e-10):
    """Bloch matrix of the channel equals the Fano matrix of ``J^{T_2}/d``."""
    d = channel.d_in
    bloch = bloch_form(channel).matrix
    J = channel.choi
    fano = fano_form(partial_transpose(J, (d, d), which=1) / d, (d, d)).matrix
    return bool(np.abs(bloch - fano).max() <= tol)


# serialization ------------------------------------------------------------

MAGIC = b"QCHN1"
_HEADER = struct.Struct("<5sIIBI")
_KIND_TAGS = {"kraus": 0, "choi": 1, "superop": 2, "stinespring": 3}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}


def save_channel(path, channel, kind=None):
    """Write a channel in the QCHN1 binary format.

    Layout (little-endian): magic ``b"QCHN1"``, ``uint32 d_in``,
    ``uint32 d_out``, ``uint8 kind`` (0 kraus, 1 choi, 2 superop,
    3 stinespring), ``uint32 count``, then the entries in row-major order as
    interleaved (re, im) float64 pairs. ``count`` is the number of Kraus
    operators, the environment dimension for a Stinespring isometry, and 1
    otherwise. Kind defaults to the first cached representation.
    """
    if kind is None:
        kind = next(k for k in KINDS if channel.has(k))
    data = np.asarray(getattr(channel, kind))
    if kind == "kraus":
        count = data.shape[0]
    elif kind == "stinespring":
        count = data.shape[0] // channel.d_out
    else:
        count = 1
    payload = np.ascontiguousarray(data, dtype="<c16").view("<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, channel.d_in, channel.d_out, _KIND_TAGS[kind], count))
        fh.write(payload.tobytes())
    return Path(path)


def load_channel(path):
    raw = Path(path).read_bytes()
    magic, d_in, d_out, tag, count = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: not a QCHN1 file")
    if tag not in _TAG_KINDS:
        raise ValueError(f"{path}: unknown representation tag {tag}")
    kind = _TAG_KINDS[tag]
    shapes = {
        "kraus": (count, d_out, d_in),
        "choi": (d_out * d_in, d_out * d_in),
        "superop": (d_out**2, d_in**2),
        "stinespring": (d_out * count, d_in),
    }
    shape = shapes[kind]
    n = int(np.prod(shape))
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * n:
        raise ValueError(f"{path}: expected {2 * n} floats, found {body.size}")
    data = body.view("<c16").reshape(shape).astype(complex)
    if kind == "kraus":
        return QuantumChannel.from_kraus(data)
    if kind == "choi":
        return QuantumChannel.from_choi(data, d_in, d_out)
    if kind == "superop":
        return QuantumChannel.from_superop(data, d_in, d_out)
    return QuantumChannel.from_stinespring(data, d_out, count)
