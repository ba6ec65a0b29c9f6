import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randchan.channel import (
    QuantumChannel,
    apply_choi,
    bloch_form,
    choi_rank,
    depolarizing_channel,
    fano_form,
    identity_channel,
    kraus_from_choi,
    load_channel,
    save_channel,
    unitary_channel,
    validate_cptp,
    verify_fano_equivalence,
)
from randchan.ensembles import haar_unitary, induced_state
from randchan.linalg import gellmann_basis, partial_transpose, reshuffle, vectorize
from randchan.samplers import sample_kraus, sample_kraus_batch, sample_lebesgue, sample_stinespring

SZ = np.diag([1.0, -1.0]).astype(complex)


def random_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


# construction and conversion -------------------------------------------------------


def test_identity_channel_choi():
    d = 3
    ch = identity_channel(d)
    expected = sum(np.kron(np.outer(np.eye(d)[i], np.eye(d)[j]), np.outer(np.eye(d)[i], np.eye(d)[j]))
                   for i in range(d) for j in range(d))
    assert np.allclose(ch.choi, expected)
    assert np.isclose(np.trace(ch.choi), d)
    assert choi_rank(ch) == 1


def test_round_trip_kraus_choi_kraus():
    ch = sample_kraus(3, 3, 4, rng=1)
    J = ch.choi
    again = QuantumChannel.from_kraus(kraus_from_choi(J, 3, 3))
    assert np.abs(again.choi - J).max() < 1e-10
    assert again.kraus.shape[0] == 4


def test_unitary_channel_superoperator():
    U = haar_unitary(3, rng=2)
    ch = unitary_channel(U)
    assert np.allclose(ch.superop, np.kron(U, U.conj()))
    assert np.allclose(np.abs(np.linalg.eigvals(ch.superop)), 1)


def test_conversion_graph_commutes():
    ch = sample_stinespring(2, 3, 3, rng=3)
    via_kraus = QuantumChannel.from_kraus(ch.kraus).superop
    via_choi = QuantumChannel.from_choi(ch.choi, 2, 3).superop
    via_super = QuantumChannel.from_superop(ch.superop, 2, 3).choi
    assert np.abs(via_kraus - via_choi).max() < 1e-9
    assert np.abs(via_super - ch.choi).max() < 1e-9
    back = QuantumChannel.from_superop(ch.superop, 2, 3)
    st_again = QuantumChannel.from_kraus(back.kraus).stinespring
    assert np.abs(QuantumChannel.from_stinespring(st_again, 3, back.kraus.shape[0]).choi - ch.choi).max() < 1e-9


def test_stinespring_kraus_slices():
    ch = sample_stinespring(2, 2, 3, rng=4)
    V = ch.stinespring
    for m in range(3):
        proj = np.kron(np.eye(2), np.eye(3)[m][None, :])  # (I (x) <m|)
        assert np.allclose(ch.kraus[m], proj @ V)


def test_convert_returns_new_value_and_caches():
    ch = sample_kraus(2, 2, 2, rng=5)
    conv = ch.convert("superop")
    assert conv is not ch
    assert conv.has("superop") and conv.has("kraus")
    with pytest.raises(ValueError):
        conv.superop[0, 0] = 1.0
    with pytest.raises(ValueError):
        ch.convert("bogus")


def test_constructor_errors():
    with pytest.raises(ValueError):
        QuantumChannel.from_choi(np.eye(5), 2, 2)
    with pytest.raises(ValueError):
        QuantumChannel.from_superop(np.eye(4), 2, 3)
    with pytest.raises(ValueError):
        QuantumChannel.from_stinespring(np.eye(5)[:, :2], 2, 2)
    with pytest.raises(ValueError):
        kraus_from_choi(-np.eye(4), 2, 2)


# action ----------------------------------------------------------------------------------


def test_apply_depolarizing_and_identity():
    rho = induced_state(3, 3, rng=6)
    assert np.allclose(depolarizing_channel(3).apply(rho), np.eye(3) / 3)
    X = random_matrix(np.random.default_rng(7), 3)
    assert np.allclose(identity_channel(3).apply(X), X)


def test_apply_kraus_matches_choi_route():
    rng = np.random.default_rng(8)
    ch = sample_lebesgue(3, rng=9)
    X = random_matrix(rng, 3)
    assert np.abs(ch.apply(X) - apply_choi(ch.choi, X, 3, 3)).max() < 1e-10
    sup = QuantumChannel.from_superop(ch.superop, 3, 3)
    assert np.abs(sup.apply(X) - ch.apply(X)).max() < 1e-10
    stack = np.stack([X, X.conj().T])
    assert np.allclose(ch.apply(stack)[1], ch.apply(X.conj().T))
    with pytest.raises(ValueError):
        ch.apply(np.eye(2))


def test_superop_acts_on_vectorized_input():
    ch = sample_kraus(2, 3, 2, rng=10)
    X = random_matrix(np.random.default_rng(11), 2)
    assert np.allclose(ch.superop @ vectorize(X), vectorize(ch.apply(X)))
    # reshuffled Choi applied to vec(I) reproduces vec(Phi(I))
    assert np.allclose(reshuffle(ch.choi, (3, 2)) @ vectorize(np.eye(2)), vectorize(ch.apply(np.eye(2))))


# validation and rank ----------------------------------------------------------------------


def test_validate_cptp_examples():
    ch = sample_lebesgue(3, rng=12)
    rep = validate_cptp(ch.choi, 3, 3)
    assert rep.min_eigenvalue > -1e-10 and rep.tp_defect < 1e-10 and rep.is_cptp()
    bad = validate_cptp(-np.eye(4), 2, 2)
    assert np.isclose(bad.min_eigenvalue, -1) and not bad.is_cptp()
    uni = validate_cptp(unitary_channel(haar_unitary(3, rng=13)).choi, 3, 3)
    assert uni.unital_defect < 1e-12 and uni.is_unital()


def test_choi_rank_examples():
    assert choi_rank(unitary_channel(haar_unitary(3, rng=14))) == 1
    assert choi_rank(depolarizing_channel(3)) == 9
    assert choi_rank(sample_kraus(3, 3, 5, rng=15)) == 5


def test_depolarizing_choi():
    ch = depolarizing_channel(2, 3)
    assert np.allclose(ch.choi, np.eye(6) / 3)
    rep = validate_cptp(depolarizing_channel(3).choi, 3, 3)
    assert rep.is_cptp() and rep.is_unital()


# adjoint --------------------------------------------------------------------------------


def test_adjoint():
    U = haar_unitary(3, rng=16)
    adj = unitary_channel(U).adjoint()
    X = random_matrix(np.random.default_rng(17), 3)
    assert np.allclose(adj.apply(X), U.conj().T @ X @ U)
    ch = sample_kraus(3, 2, 3, rng=18)
    A, B = random_matrix(np.random.default_rng(19), 3), random_matrix(np.random.default_rng(20), 2)
    lhs = np.trace(ch.apply(A).conj().T @ B)
    rhs = np.trace(A.conj().T @ ch.adjoint().apply(B))
    assert np.isclose(lhs, rhs)
    assert np.allclose(ch.adjoint().apply(np.eye(2)), np.eye(3))
    Y = random_matrix(np.random.default_rng(21), 3)
    assert np.allclose(depolarizing_channel(3).adjoint().apply(Y), np.trace(Y) / 3 * np.eye(3))


# Bloch and Fano forms ------------------------------------------------------------------------


def test_bloch_form_reference_channels():
    bf = bloch_form(identity_channel(3))
    assert np.allclose(bf.kappa, 0) and np.allclose(bf.Q, np.eye(8))
    bf = bloch_form(depolarizing_channel(3))
    assert np.allclose(bf.kappa, 0) and np.allclose(bf.Q, 0)


def test_bloch_form_dephasing_qubit_by_direct_traces():
    K = np.array([np.eye(2), SZ]) / np.sqrt(2)
    ch = QuantumChannel.from_kraus(K)
    L = np.concatenate([np.eye(2)[None], gellmann_basis(2)])
    direct = np.array([[np.trace(L[i] @ ch.apply(L[j])).real / 2 for j in range(4)] for i in range(4)])
    bf = bloch_form(ch)
    assert np.allclose(bf.matrix, direct)
    assert np.allclose(bf.Q, np.diag([1, 0, 0]))


def test_bloch_form_blocks_and_first_row():
    ch = sample_lebesgue(3, rng=22)
    bf = bloch_form(ch)
    assert np.allclose(bf.matrix[0], np.eye(9)[0], atol=1e-12)
    assert bf.C.shape == (2, 2) and bf.Q1.shape == (2, 6) and bf.Q2.shape == (6, 2) and bf.QQ.shape == (6, 6)
    assert bf.chi.shape == (2,)
    rebuilt = np.block([[bf.C, bf.Q1], [bf.Q2, bf.QQ]])
    assert np.array_equal(rebuilt, bf.Q)
    with pytest.raises(ValueError):
        bloch_form(sample_kraus(2, 3, 2, rng=1))


def test_bloch_affine_action():
    ch = sample_lebesgue(3, rng=23)
    bf = bloch_form(ch)
    L = gellmann_basis(3)
    rho = induced_state(3, 3, rng=24)
    tau = np.einsum("kab,ba->k", L, rho).real
    tau_out = np.einsum("kab,ba->k", L, ch.apply(rho)).real
    assert np.allclose(bf.Q @ tau + bf.kappa, tau_out, atol=1e-12)


def test_kappa_vanishes_iff_unital():
    assert np.abs(bloch_form(unitary_channel(haar_unitary(3, rng=25))).kappa).max() < 1e-10
    assert np.abs(bloch_form(sample_lebesgue(3, rng=26)).kappa).max() > 1e-3


def test_fano_form_examples():
    rA, rB = induced_state(2, 2, rng=27), induced_state(2, 2, rng=28)
    f = fano_form(np.kron(rA, rB), (2, 2))
    assert np.allclose(f.R, np.outer(f.b, f.a))
    L = gellmann_basis(2)
    assert np.allclose(f.b, np.einsum("kab,ba->k", L, rA).real)
    assert np.allclose(f.a, np.einsum("kab,ba->k", L, rB).real)
    f = fano_form(np.eye(4) / 4, (2, 2))
    assert np.allclose(f.a, 0) and np.allclose(f.b, 0) and np.allclose(f.R, 0)
    omega = np.array([1, 0, 0, 1]) / np.sqrt(2)
    f = fano_form(np.outer(omega, omega), (2, 2))
    assert np.allclose(f.R, np.diag([1, 1, -1]))
    with pytest.raises(ValueError):
        fano_form(np.eye(3), (2, 2))


def test_fano_a_vanishes_for_tp_channels():
    for seed in range(10):
        ch = sample_lebesgue(3, rng=seed)
        f = fano_form(partial_transpose(ch.choi, (3, 3), 1) / 3, (3, 3))
        assert np.abs(f.a).max() < 1e-10


def test_fano_equivalence_examples():
    assert verify_fano_equivalence(identity_channel(2))
    assert verify_fano_equivalence(sample_lebesgue(3, rng=29), tol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4), st.integers(1, 6))
def test_fano_equivalence_property(seed, d, M):
    if M * d < d:
        return
    assert verify_fano_equivalence(sample_kraus(d, d, M, rng=seed), tol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.integers(1, 4), st.integers(1, 5))
def test_sampled_channels_are_cptp_and_spectrum_in_disk(seed, d1, d2, M):
    if M * d2 < d1:
        return
    ch = sample_kraus(d1, d2, M, rng=seed)
    rep = validate_cptp(ch.choi, d1, d2)
    assert rep.min_eigenvalue > -1e-10 and rep.tp_defect < 1e-10
    assert choi_rank(ch) == min(d1 * d2, M)
    if d1 == d2:
        ev = np.linalg.eigvals(ch.superop)
        assert np.abs(ev).max() <= 1 + 1e-8
        assert np.abs(ev - 1).min() < 1e-8


# serialization ------------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["kraus", "choi", "superop", "stinespring"])
def test_qchn1_round_trip_bit_exact(tmp_path, kind):
    ch = sample_kraus(2, 3, 2, rng=30).convert(kind)
    path = tmp_path / f"c_{kind}.qchn"
    save_channel(path, ch, kind)
    raw = path.read_bytes()
    assert raw[:5] == b"QCHN1"
    back = load_channel(path)
    assert (back.d_in, back.d_out) == (2, 3)
    assert np.array_equal(getattr(back, kind), getattr(ch, kind))
    save_channel(tmp_path / "again.qchn", back, kind)
    assert (tmp_path / "again.qchn").read_bytes() == raw


def test_qchn1_rejects_garbage(tmp_path):
    p = tmp_path / "bad.qchn"
    p.write_bytes(b"NOPE!" + bytes(13))
    with pytest.raises(ValueError):
        load_channel(p)


@pytest.mark.parametrize("dtype", [np.complex128, np.complex64])
def test_apply_matches_kraus_sum_for_each_precision(dtype):
    K = sample_kraus_batch(3, 4, 5, None, 31).astype(dtype)
    ch = QuantumChannel.from_kraus(K)
    assert ch.kraus.dtype == dtype
    X = np.random.default_rng(32).standard_normal((3, 3)) + 0j
    ref = sum(A.astype(complex) @ X @ A.astype(complex).conj().T for A in K)
    tol = 1e-12 if dtype == np.complex128 else 1e-5
    assert np.abs(ch.apply(X) - ref).max() < tol
    assert np.abs(ch.apply(X.real) - ref).max() < tol
