import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randchan.channel import bloch_form, choi_from_kraus, depolarizing_channel, unitary_channel, validate_cptp
from randchan.classical import (
    bloch_to_prob,
    column_covariance_stats,
    decohere_interpolate,
    is_bistochastic,
    load_stochastic_csv,
    prob_to_bloch,
    random_stochastic,
    save_stochastic_csv,
    stinespring_column_covariances,
    stochastic_from_choi,
    stochastic_to_affine,
    super_decohere,
)
from randchan.ensembles import RngStream, dirichlet, haar_unitary
from randchan.samplers import sample_lebesgue, sample_stinespring, sample_stinespring_batch
from randchan.spectral import choi_superop_eigenvalues


def test_super_decohere_depolarizing_and_unitary():
    assert np.allclose(super_decohere(depolarizing_channel(2, 3)), 1 / 3)
    U = haar_unitary(4, rng=1)
    assert np.allclose(super_decohere(unitary_channel(U)), np.abs(U) ** 2)


def test_super_decohere_three_routes_agree():
    ch = sample_lebesgue(3, rng=2)
    a, b, c = (super_decohere(ch, m) for m in ("choi", "kraus", "definition"))
    assert np.abs(a - b).max() < 1e-12 and np.abs(a - c).max() < 1e-12
    with pytest.raises(ValueError):
        super_decohere(ch, "magic")


def test_super_decohere_rectangular():
    ch = sample_stinespring(2, 3, 2, rng=3)
    T = super_decohere(ch)
    assert T.shape == (3, 2)
    assert np.allclose(T.sum(axis=0), 1, atol=1e-12)


def test_decohere_interpolate_examples():
    ch = sample_lebesgue(3, rng=4)
    J = ch.choi
    assert np.array_equal(decohere_interpolate(J, 1.0), J)
    J0 = decohere_interpolate(J, 0.0)
    assert np.allclose(J0, np.diag(np.diag(J)))
    ev = choi_superop_eigenvalues(J0, 3)
    T_ev = np.linalg.eigvals(super_decohere(ch))
    nonzero = ev[np.abs(ev) > 1e-12]
    assert np.allclose(np.sort_complex(nonzero), np.sort_complex(T_ev[np.abs(T_ev) > 1e-12]), atol=1e-10)
    assert np.sum(np.abs(ev) <= 1e-12) >= 9 - 3
    rep = validate_cptp(decohere_interpolate(J, 0.5), 3, 3)
    assert rep.is_cptp()
    with pytest.raises(ValueError):
        decohere_interpolate(J, 1.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 1))
def test_decohered_classical_part_independent_of_b(seed, b):
    ch = sample_lebesgue(3, rng=seed)
    T = super_decohere(ch)
    assert np.allclose(stochastic_from_choi(decohere_interpolate(ch.choi, b), 3, 3), T, atol=1e-14)


def test_random_stochastic_laws():
    T = random_stochastic(4, 5, rng=5)
    assert T.shape == (4, 5)
    assert np.allclose(T.sum(axis=0), 1, atol=1e-14)
    many = random_stochastic(4, 1, rng=6, size=100_000)[:, :, 0]
    assert abs(many[:, 0].var() / (3 / (16 * 5)) - 1) < 0.03
    g = random_stochastic(4, 4, "ginibre", rng=7, size=50_000)
    assert abs(g[:, 0, 0].var() / (3 / 80) - 1) < 0.05
    dz = random_stochastic(3, 3, "dirichlet", s=9.0, rng=8, size=50_000)
    assert abs(dz[:, 0, 0].var() / (2 / 252) - 1) < 0.05
    with pytest.raises(ValueError):
        random_stochastic(3, 3, "zipf")


def test_covariance_oracle_from_sphere_moments():
    # independent route: entry moments of a uniform unit vector in C^D
    for d, M in [(2, 2), (3, 2), (2, 5)]:
        D = d * M
        same_row_second = M / (D * (D + 1)) + M * (M - 1) / (D**2 - 1)
        cross_second = M * M / (D**2 - 1)
        same, cross = stinespring_column_covariances(d, M)
        assert np.isclose(same, same_row_second - 1 / d**2)
        assert np.isclose(cross, cross_second - 1 / d**2)
    assert np.isclose(stinespring_column_covariances(2, 2)[0], -1 / 60)
    assert np.isclose(stinespring_column_covariances(2, 2)[1], 1 / 60)


def test_column_covariance_stats_stinespring():
    n = 100_000
    V = sample_stinespring_batch(2, 2, 2, n, RngStream(9, 0))
    T = (np.abs(V.reshape(n, 2, 2, 2)) ** 2).sum(axis=2)
    rep = column_covariance_stats(T)
    assert abs(rep.same_row + 1 / 60) < 3 * rep.same_row_se
    assert abs(rep.cross - 1 / 60) < 3 * rep.cross_se


def test_column_covariance_uniform_is_zero():
    rep = column_covariance_stats(random_stochastic(3, 3, rng=10, size=100_000))
    assert abs(rep.cross) < 3 * rep.cross_se
    assert abs(rep.same_row) < 3 * rep.same_row_se
    with pytest.raises(ValueError):
        column_covariance_stats(np.ones((1, 2, 2)))


def test_stinespring_columns_are_dirichlet_M():
    n, d, M = 50_000, 3, 4
    V = sample_stinespring_batch(2, d, M, n, RngStream(11, 0))
    T = (np.abs(V.reshape(n, d, M, 2)) ** 2).sum(axis=2)
    ref = dirichlet(d, M, rng=12, size=n)
    assert abs(T[:, 0, 0].mean() - 1 / d) < 0.003
    assert abs(T[:, 0, 0].var() / ref[:, 0].var() - 1) < 0.05


def test_prob_bloch_examples():
    assert np.allclose(prob_to_bloch(np.full(4, 0.25)), 0)
    p = dirichlet(5, 1.0, rng=13)
    assert np.abs(bloch_to_prob(prob_to_bloch(p)) - p).max() < 1e-12
    p2 = np.array([0.7, 0.3])
    assert np.isclose(prob_to_bloch(p2)[0], 0.4)


def test_stochastic_to_affine_examples():
    f = stochastic_to_affine(np.eye(3))
    assert np.allclose(f.C, np.eye(2)) and np.allclose(f.chi, 0)
    U = haar_unitary(4, rng=14)
    assert np.abs(stochastic_to_affine(np.abs(U) ** 2).chi).max() < 1e-12
    with pytest.raises(ValueError):
        stochastic_to_affine(np.ones((2, 3)) / 2)


def test_affine_form_reproduces_action():
    T = random_stochastic(4, 4, rng=15)
    f = stochastic_to_affine(T)
    assert np.allclose(f.matrix[0], np.eye(4)[0], atol=1e-12)
    for s in range(5):
        p = dirichlet(4, 1.0, rng=s)
        assert np.abs(f.apply(prob_to_bloch(p)) - prob_to_bloch(T @ p)).max() < 1e-12


def test_affine_C_is_block_of_channel_Q():
    ch = sample_lebesgue(3, rng=16)
    f = stochastic_to_affine(super_decohere(ch))
    bf = bloch_form(ch)
    assert np.abs(f.C - bf.C).max() < 1e-10
    assert np.abs(f.chi - bf.chi).max() < 1e-10


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 6))
def test_stochastic_spectrum_structure(seed, d):
    T = random_stochastic(d, d, rng=seed)
    ev = np.linalg.eigvals(T)
    assert np.abs(ev).max() <= 1 + 1e-10
    assert np.abs(ev - 1).min() < 1e-10
    C_ev = np.linalg.eigvals(stochastic_to_affine(T).C)
    # eigenvalues of T are {1} together with those of C
    rest = list(ev)
    rest.pop(int(np.argmin(np.abs(ev - 1))))
    assert np.allclose(np.sort_complex(np.array(rest)), np.sort_complex(C_ev), atol=1e-8)


def test_bistochastic_check():
    U = haar_unitary(3, rng=17)
    assert is_bistochastic(np.abs(U) ** 2)
    assert not is_bistochastic(random_stochastic(3, 3, rng=18))
    assert not is_bistochastic(np.ones((2, 3)) / 2)


def test_decohered_lebesgue_columns_near_dirichlet_d2():
    d = 3
    Ts = np.array([super_decohere(sample_lebesgue(d, rng=RngStream(19, i))) for i in range(5000)])
    ref = dirichlet(d, d * d, rng=20, size=5000)
    assert abs(Ts[:, 0, 0].var() / ref[:, 0].var() - 1) < 0.10


def test_csv_round_trip(tmp_path):
    T = random_stochastic(3, 2, rng=21)
    p = tmp_path / "t.csv"
    save_stochastic_csv(p, T)
    assert p.read_text().splitlines()[0] == "col0,col1"
    assert np.array_equal(load_stochastic_csv(p), T)
