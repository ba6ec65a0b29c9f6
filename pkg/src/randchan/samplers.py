"""Random quantum channel ensembles.

Single-draw samplers return :class:`QuantumChannel` values. The ``*_batch``
helpers return raw stacked arrays (Kraus operators, Choi matrices or
isometries) for vectorized Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import QuantumChannel, choi_from_kraus
from .ensembles import (
    as_generator,
    bures_state,
    dirichlet,
    fuss_catalan_state,
    ginibre,
    haar_isometry,
    haar_unitary,
    induced_state,
    wishart,
)
from .linalg import inv_sqrt_psd, partial_trace, reshuffle

__all__ = [
    "EnsembleSpec",
    "SinkhornResult",
    "normalize_choi",
    "conjugate_input",
    "conjugate_output",
    "sample_choi",
    "sample_choi_batch",
    "sample_kraus",
    "sample_kraus_batch",
    "sample_stinespring",
    "sample_stinespring_batch",
    "sample_lebesgue",
    "sample_induced_choi",
    "mixed_env_choi",
    "sample_mixed_env",
    "sinkhorn_normalize",
    "sample_sinkhorn_bistochastic",
    "sample_mixed_unitary",
    "unistochastic_choi",
    "sample_unistochastic",
    "sample_dephased_povm",
    "sample",
]


def _check_env(d_in, d_out, M):
    if int(M) != M or M < 1:
        raise ValueError(f"environment size M must be a positive integer, got {M!r}")
    if M * d_out < d_in:
        raise ValueError(f"need M*d_out >= d_in, got M={M}, d_out={d_out}, d_in={d_in}")


def conjugate_input(J, A, d_out, d_in):
    """``(I (x) A) J (I (x) A)^dag`` acting on the input factor; batched over leading axes."""
    T = J.reshape(J.shape[:-2] + (d_out, d_in, d_out, d_in))
    T = np.einsum("...ij,...ajbk,...lk->...aibl", A, T, A.conj(), optimize=True)
    return T.reshape(J.shape)


def conjugate_output(J, A, d_out, d_in):
    """``(A (x) I) J (A (x) I)^dag`` acting on the output factor."""
    T = J.reshape(J.shape[:-2] + (d_out, d_in, d_out, d_in))
    T = np.einsum("...ij,...jakb,...lk->...ialb", A, T, A.conj(), optimize=True)
    return T.reshape(J.shape)


def normalize_choi(W, d_in, d_out):
    """Rescale a PSD matrix into a trace-preserving Choi matrix.

    ``J = (I (x) H^{-1/2}) W (I (x) H^{-1/2})`` with ``H = Tr_out W``.
    A numerically singular ``H`` raises :class:`RankDeficientError`.
    """
    H = partial_trace(W, (d_out, d_in), keep=1)
    return conjugate_input(W, inv_sqrt_psd(H), d_out, d_in)


# a) Wishart route -----------------------------------------------------------


def sample_choi_batch(d_in, d_out, M, n, rng=None):
    _check_env(d_in, d_out, M)
    W = wishart(d_in * d_out, int(M), rng=rng, size=n)
    return normalize_choi(W, d_in, d_out)


def sample_choi(d_in, d_out, M, rng=None):
    """Normalized Wishart(d_in*d_out, M) Choi matrix."""
    J = sample_choi_batch(d_in, d_out, M, None, rng)
    return QuantumChannel.from_choi(J, d_in, d_out)


# b) Kraus route ------------------------------------------------------------


def sample_kraus_batch(d_in, d_out, M, n, rng=None):
    """Kraus stacks of shape (n, M, d_out, d_in): ``A_i = G_i H^{-1/2}``, ``H = sum G_i^dag G_i``."""
    _check_env(d_in, d_out, M)
    lead = (int(M),) if n is None else (n, int(M))
    G = ginibre(d_out, d_in, rng=rng, size=lead)
    Gf = G.reshape(G.shape[:-3] + (int(M) * d_out, d_in))
    H = Gf.conj().swapaxes(-1, -2) @ Gf
    return (Gf @ inv_sqrt_psd(H)).reshape(G.shape)


def sample_kraus(d_in, d_out, M, rng=None):
    return QuantumChannel.from_kraus(sample_kraus_batch(d_in, d_out, M, None, rng))


# c) Stinespring route -------------------------------------------------------


def sample_stinespring_batch(d_in, d_out, M, n, rng=None):
    """Haar isometries of shape (n, d_out*M, d_in); rows indexed output-major."""
    _check_env(d_in, d_out, M)
    return haar_isometry(d_out * int(M), d_in, rng=rng, size=n)


def sample_stinespring(d_in, d_out, M, rng=None):
    V = sample_stinespring_batch(d_in, d_out, M, None, rng)
    return QuantumChannel.from_stinespring(V, d_out, int(M))


def sample_lebesgue(d_in, d_out=None, rng=None):
    """Flat measure on channels: the Kraus route with ``M = d_in * d_out``."""
    d_out = d_in if d_out is None else d_out
    return sample_kraus(d_in, d_out, d_in * d_out, rng)


# further channel families ------------------------------------------------------


def sample_induced_choi(d, state_ensemble="bures", rng=None, s=1):
    """Normalize a random d^2 x d^2 density matrix into a Choi matrix.

    ``state_ensemble`` is ``"bures"`` or ``"fuss-catalan"`` (order ``s``).
    """
    if d < 2:
        raise ValueError("dimension must be at least 2")
    gen = as_generator(rng)
    if state_ensemble == "bures":
        rho = bures_state(d * d, rng=gen)
    elif state_ensemble in ("fuss-catalan", "fuss_catalan"):
        rho = fuss_catalan_state(d * d, int(s), rng=gen)
    else:
        raise ValueError(f"unknown state ensemble {state_ensemble!r}")
    return QuantumChannel.from_choi(normalize_choi(rho, d, d), d, d)


def mixed_env_choi(d, sigma, U):
    """``J = U^R (I (x) sigma) U^R^dag`` for a unitary on system (x) environment, both of size d."""
    UR = reshuffle(U, (d, d))
    w, V = np.linalg.eigh(sigma)
    root = (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T
    # right-multiply by I (x) root, then J = Y Y^dag
    Y = (UR.reshape(d * d, d, d) @ root.astype(UR.dtype)).reshape(d * d, d * d)
    del UR
    return Y @ Y.conj().T


def sample_mixed_env(d, env="hs-random", rng=None, dtype=np.complex128, rescue_tol=1e-8):
    """Unitary coupling to an environment in a mixed state, then trace out the environment.

    Parameters
    ----------
    env : "hs-random" or ndarray
        Environment state; ``"hs-random"`` draws it from the induced measure
        with ``s = d`` (Hilbert-Schmidt measure).
    dtype : numpy complex dtype
        ``complex64`` halves memory for large d.
    rescue_tol : float
        If the raw Choi matrix misses trace preservation by more than this,
        it is renormalized once.

    Returns
    -------
    channel : QuantumChannel
    raw_tp_defect : float
        Trace-preservation defect before any renormalization.
    """
    gen = as_generator(rng)
    if isinstance(env, str):
        if env != "hs-random":
            raise ValueError(f"unknown environment spec {env!r}")
        sigma = induced_state(d, d, rng=gen)
    else:
        sigma = np.asarray(env)
        if sigma.shape != (d, d):
            raise ValueError(f"environment state must be {d}x{d}")
    U = haar_unitary(d * d, rng=gen, dtype=dtype)
    J = mixed_env_choi(d, sigma, U)
    del U
    H = partial_trace(J, (d, d), keep=1)
    defect = float(np.abs(H - np.eye(d)).max())
    if defect > rescue_tol:
        J = conjugate_input(J, inv_sqrt_psd(H.astype(complex)).astype(J.dtype), d, d)
    return QuantumChannel.from_choi(J, d, d), defect


@dataclass(frozen=True)
class SinkhornResult:
    choi: np.ndarray
    iterations: int
    tp_defect: float
    unital_defect: float
    converged: bool


def _opnorm_defect(H):
    return float(np.abs(np.linalg.eigvalsh(H - np.eye(H.shape[0]))).max())


def sinkhorn_normalize(J, d, tol=1e-10, max_iter=10_000):
    """Alternate trace-preserving and unital rescalings until both hold.

    A sweep applies the input-side rescaling and then the output-side one.
    Defects are operator-norm distances of the partial traces from identity,
    checked before every sweep, so an already bistochastic input returns
    after zero iterations. Running out of iterations raises RuntimeError.
    """
    J = np.array(J, dtype=complex)
    for it in range(max_iter + 1):
        H_in = partial_trace(J, (d, d), keep=1)
        H_out = partial_trace(J, (d, d), keep=0)
        tp, un = _opnorm_defect(H_in), _opnorm_defect(H_out)
        if tp < tol and un < tol:
            return SinkhornResult(J, it, tp, un, True)
        if it == max_iter:
            break
        J = conjugate_input(J, inv_sqrt_psd(H_in), d, d)
        J = conjugate_output(J, inv_sqrt_psd(partial_trace(J, (d, d), keep=0)), d, d)
    raise RuntimeError(
        f"Sinkhorn iteration did not converge in {max_iter} sweeps "
        f"(tp defect {tp:.3e}, unital defect {un:.3e})"
    )


def sample_sinkhorn_bistochastic(d, tol=1e-10, max_iter=10_000, rng=None):
    """Bistochastic channel from Sinkhorn-normalizing a Wishart(d^2, d^2) matrix.

    Returns the channel and the :class:`SinkhornResult`.
    """
    W = wishart(d * d, d * d, rng=rng)
    res = sinkhorn_normalize(W, d, tol=tol, max_iter=max_iter)
    return QuantumChannel.from_choi(res.choi, d, d), res


def sample_mixed_unitary(d, M, weights="uniform", rng=None, s=1.0):
    """Random mixture ``sum p_i U_i . U_i^dag`` of M Haar unitaries.

    weights : "uniform", "dirichlet" (parameter ``s``) or an explicit vector.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    gen = as_generator(rng)
    if isinstance(weights, str):
        if weights == "uniform":
            p = np.full(M, 1.0 / M)
        elif weights == "dirichlet":
            p = dirichlet(M, s, rng=gen) if M > 1 else np.ones(1)
        else:
            raise ValueError(f"unknown weight law {weights!r}")
    else:
        p = np.asarray(weights, dtype=float)
        if p.shape != (M,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
            raise ValueError("weights must be a probability vector of length M")
    U = haar_unitary(d, rng=gen, size=M)
    return QuantumChannel.from_kraus(np.sqrt(p)[:, None, None] * U)


def unistochastic_choi(U, d, M):
    """Choi matrix of ``rho -> Tr_env[U (rho (x) I/M) U^dag]`` for U on C^d (x) C^M."""
    UR = reshuffle(U, (d, M), (d, M))  # (d*d, M*M)
    return UR @ UR.conj().T / M


def sample_unistochastic(d, k=1, rng=None):
    """Unital channel from a Haar unitary coupling to a maximally mixed environment of size k*d."""
    if k < 1:
        raise ValueError("k must be at least 1")
    M = k * d
    U = haar_unitary(d * M, rng=rng)
    return QuantumChannel.from_choi(unistochastic_choi(U, d, M), d, d)


def sample_dephased_povm(d, k, n, rng=None):
    """Wishart-route channel ``M_d -> M_k`` followed by full dephasing of the output.

    The resulting Choi matrix keeps only the diagonal output blocks.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    _check_env(d, k, n)
    J = sample_choi_batch(d, k, n, None, rng)
    T = J.reshape(k, d, k, d).copy()
    mask = np.eye(k, dtype=bool)[:, None, :, None]
    T = np.where(mask, T, 0)
    return QuantumChannel.from_choi(T.reshape(k * d, k * d), d, k)


# dispatch --------------------------------------------------------------------

ENSEMBLE_KINDS = (
    "choi",
    "kraus",
    "stinespring",
    "lebesgue",
    "induced-choi",
    "mixed-env",
    "sinkhorn-bistochastic",
    "mixed-unitary",
    "unistochastic",
    "dephased-povm",
)


@dataclass(frozen=True)
class EnsembleSpec:
    """Declarative description of a channel ensemble.

    ``params`` carries kind-specific extras: ``state_ensemble`` and ``s`` for
    induced-choi, ``env`` for mixed-env, ``weights``/``s`` for mixed-unitary,
    ``k`` for unistochastic, ``k``/``n`` for dephased-povm, ``tol``/``max_iter``
    for sinkhorn-bistochastic.
    """

    kind: str
    d_in: int
    d_out: int | None = None
    M: int | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ENSEMBLE_KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {ENSEMBLE_KINDS}")
        if self.d_in < 1 or (self.d_out is not None and self.d_out < 1):
            raise ValueError("dimensions must be positive")
        if self.kind in ("choi", "kraus", "stinespring"):
            if self.M is None:
                raise ValueError(f"{self.kind} ensemble needs M")
            _check_env(self.d_in, self.dim_out, self.M)

    @property
    def dim_out(self):
        return self.d_in if self.d_out is None else self.d_out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {"kind", "d_in", "d_out", "M", "d"}
        if "d" in data and "d_in" not in data:
            data["d_in"] = data["d"]
        extras = {k: v for k, v in data.items() if k not in known}
        return cls(
            kind=data["kind"],
            d_in=int(data["d_in"]),
            d_out=None if data.get("d_out") is None else int(data["d_out"]),
            M=None if data.get("M") is None else int(data["M"]),
            params=extras,
        )


def sample(spec, rng=None):
    """Draw one channel from the ensemble described by ``spec``."""
    p = spec.params
    d1, d2 = spec.d_in, spec.dim_out
    if spec.kind == "choi":
        return sample_choi(d1, d2, spec.M, rng)
    if spec.kind == "kraus":
        return sample_kraus(d1, d2, spec.M, rng)
    if spec.kind == "stinespring":
        return sample_stinespring(d1, d2, spec.M, rng)
    if spec.kind == "lebesgue":
        return sample_lebesgue(d1, d2, rng)
    if spec.kind == "induced-choi":
        return sample_induced_choi(d1, p.get("state_ensemble", "bures"), rng, s=p.get("s", 1))
    if spec.kind == "mixed-env":
        return sample_mixed_env(d1, p.get("env", "hs-random"), rng)[0]
    if spec.kind == "sinkhorn-bistochastic":
        return sample_sinkhorn_bistochastic(d1, p.get("tol", 1e-10), p.get("max_iter", 10_000), rng)[0]
    if spec.kind == "mixed-unitary":
        return sample_mixed_unitary(d1, spec.M or 1, p.get("weights", "uniform"), rng, s=p.get("s", 1.0))
    if spec.kind == "unistochastic":
        return sample_unistochastic(d1, p.get("k", 1), rng)
    if spec.kind == "dephased-povm":
        return sample_dephased_povm(d1, p.get("k", d2), p.get("n", spec.M), rng)
    raise AssertionError(spec.kind)
