import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symclone.hamiltonian import (
    QuadraticHamiltonian,
    Trajectory,
    evolve,
    generator_to_hamiltonian,
    has_real_log,
    real_generator,
    spectral_split,
    symplectic_polar,
    two_stage_clone,
    unitary_log,
)
from symclone.matfuncs import mat_exp
from symclone.reference import CLONE_MAP, ROTATION_GENERATOR, SHEAR_GENERATOR
from symclone.symplectic import (TIME_REVERSAL, clone_variant, is_generator, is_symplectic,
                                 random_symplectic, standard_form)


def maxabs(a):
    return float(np.max(np.abs(a)))


@pytest.fixture(scope="module")
def split():
    return spectral_split(CLONE_MAP)


@pytest.fixture(scope="module")
def polar():
    return symplectic_polar(CLONE_MAP)


def test_split_matches_published_tables(split):
    X, Y = split
    assert maxabs(X - SHEAR_GENERATOR) < 2e-3
    assert maxabs(Y - ROTATION_GENERATOR) < 2e-3


def test_split_reconstructs(split):
    assert maxabs(split.reconstruct() - CLONE_MAP) < 1e-10
    assert is_generator(split.X, 1e-9)
    assert is_generator(split.Y, 1e-9)


def test_split_rotation_factor_on_unit_circle(split):
    ev = np.linalg.eigvals(mat_exp(split.Y))
    assert np.allclose(np.abs(ev), 1.0, atol=1e-8)


def test_split_factors_symplectic(split):
    assert is_symplectic(mat_exp(split.X), 1e-9)
    assert is_symplectic(mat_exp(split.Y), 1e-9)


def test_polar_factor_properties(polar):
    P, U = mat_exp(polar.X), mat_exp(polar.Y)
    assert maxabs(P @ U - CLONE_MAP) < 1e-10
    assert maxabs(polar.X - polar.X.T) < 1e-12
    assert maxabs(polar.Y + polar.Y.T) < 1e-12
    assert np.linalg.eigvalsh(P)[0] > 0
    assert maxabs(U.T @ U - np.eye(6)) < 1e-9
    assert is_symplectic(P, 1e-9) and is_symplectic(U, 1e-9)
    assert is_generator(polar.X, 1e-9) and is_generator(polar.Y, 1e-9)


def test_polar_differs_from_tables(polar):
    # the published generators are not the polar factors; see the ledger
    assert maxabs(polar.X - SHEAR_GENERATOR) > 0.1


def test_identity_decomposes_to_zero():
    for f in (spectral_split, symplectic_polar):
        X, Y = f(np.eye(6))
        assert maxabs(X) < 1e-12 and maxabs(Y) < 1e-12


def test_decompositions_reject_non_symplectic():
    with pytest.raises(ValueError):
        spectral_split(2 * np.eye(2))
    with pytest.raises(ValueError):
        symplectic_polar(2 * np.eye(2))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 5000), dim=st.sampled_from([2, 4, 6]))
def test_random_decompositions_reconstruct(seed, dim):
    M = random_symplectic(dim, 0.5, seed).matrix
    for f in (spectral_split, symplectic_polar):
        X, Y = f(M)
        assert maxabs(mat_exp(X) @ mat_exp(Y) - M) <= 1e-10 * max(1.0, maxabs(M))
        assert is_generator(X, 1e-8) and is_generator(Y, 1e-8)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 5000))
def test_split_on_cloning_variants(seed):
    g = random_symplectic(4, 0.3, seed).matrix
    k = random_symplectic(2, 0.3, seed + 7).matrix
    M = clone_variant(CLONE_MAP, g, k).matrix
    X, Y = spectral_split(M)
    assert maxabs(mat_exp(X) @ mat_exp(Y) - M) <= 1e-9 * max(1.0, maxabs(M))


def test_split_negative_pair():
    M = np.diag([-2.0, -0.5])
    X, Y = spectral_split(M)
    assert maxabs(mat_exp(X) @ mat_exp(Y) - M) < 1e-14
    assert is_generator(X) and is_generator(Y)


def test_no_real_log_for_clone_map():
    rep = has_real_log(CLONE_MAP)
    assert not rep
    negs = sorted(d["eigenvalue"] for d in rep.negative_real)
    assert len(negs) == 2
    # reciprocal pair, as for any symplectic matrix
    assert abs(negs[0] * negs[1] - 1) < 1e-10
    assert all(d["jordan_blocks"] == {1: 1} for d in rep.negative_real)


def test_real_log_criterion_cases():
    assert has_real_log(np.eye(4))
    assert has_real_log(-np.eye(2))  # two 1x1 blocks at -1
    assert not has_real_log(np.diag([-2.0, -0.5]))
    assert has_real_log(np.diag([-2.0, -0.5, -2.0, -0.5]))
    J = np.array([[-1.0, 1.0], [0.0, -1.0]])
    assert not has_real_log(J)  # a single 2x2 block at -1
    with pytest.raises(ValueError):
        has_real_log(np.diag([0.0, 1.0]))


def test_real_generator_roundtrip():
    M = random_symplectic(4, 0.3, 11).matrix
    G = real_generator(M)
    assert maxabs(mat_exp(G) - M) < 1e-12
    assert is_generator(G, 1e-9)


def test_unitary_log_is_generator():
    U = mat_exp(symplectic_polar(CLONE_MAP).Y)
    Y = unitary_log(U)
    assert is_generator(Y, 1e-10)
    assert maxabs(Y + Y.T) < 1e-12
    assert maxabs(mat_exp(Y) - U) < 1e-12


def test_unitary_log_minus_identity():
    Y = unitary_log(-np.eye(4))
    assert is_generator(Y, 1e-12)
    assert maxabs(mat_exp(Y) + np.eye(4)) < 1e-14


def test_generator_to_hamiltonian_roundtrip():
    h = np.array([[2.0, 0.5], [0.5, 1.0]])
    H = QuadraticHamiltonian(h)
    G = H.generator()
    back = generator_to_hamiltonian(G)
    assert np.allclose(back.coefficients, h)
    assert H([1.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        generator_to_hamiltonian(np.eye(2))


def test_harmonic_flow_conserves_energy():
    H = QuadraticHamiltonian(np.eye(2))
    traj = evolve(H.generator(), [1.0, 0.0], 2 * np.pi, 64)
    E = H(traj.points)
    assert np.allclose(E, 0.5, atol=1e-13)
    assert np.allclose(traj.endpoint, [1.0, 0.0], atol=1e-12)


def test_two_stage_endpoint(split):
    traj = two_stage_clone([1, 1, 0, 0, 0, 0], *split, steps=50)
    assert maxabs(traj.endpoint - [1, 1, 1, 1, 1, -1]) < 1e-9
    assert traj.times[-1] == pytest.approx(2.0)
    assert len(traj.times) == 101


def test_two_stage_zero_start(split):
    traj = two_stage_clone(np.zeros(6), *split, steps=5)
    assert maxabs(traj.points) == 0


def test_trajectory_csv_and_validation():
    traj = Trajectory([0.0, 1.0], np.zeros((2, 6)))
    text = traj.to_csv().splitlines()
    assert text[0] == "t,q_s,p_s,q_t,p_t,q_m,p_m"
    assert len(text) == 3
    with pytest.raises(ValueError):
        Trajectory([1.0, 0.0], np.zeros((2, 2)))


def test_anticlone_is_time_reversed(split):
    x = np.array([0.3, -0.7, 0, 0, 0, 0])
    end = split.reconstruct() @ x
    assert np.allclose(end[4:], TIME_REVERSAL @ x[:2], atol=1e-10)
    assert np.allclose(standard_form(1) @ TIME_REVERSAL, -(TIME_REVERSAL @ standard_form(1)))
