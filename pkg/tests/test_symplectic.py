from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symclone.reference import CLONE_MAP
from symclone.symplectic import (
    TIME_REVERSAL,
    CloningChoices,
    DegenerateStepError,
    LinearMap,
    build_cloning_map,
    clone_variant,
    exact_det,
    is_antisymplectic,
    is_generator,
    is_symplectic,
    random_symplectic,
    standard_form,
    symplectic_gram_schmidt,
    symplectic_residual,
    verify_cloning,
)

J2 = np.array([[0, 1], [-1, 0]])


def test_standard_form_interleaved():
    W = standard_form(3)
    assert W.shape == (6, 6)
    assert np.array_equal(W[0:2, 0:2], J2)
    assert np.array_equal(W[2:4, 2:4], J2)
    assert np.all(W[0:2, 2:] == 0)
    assert np.array_equal(W.T, -W)


def test_standard_form_rejects_bad_size():
    with pytest.raises(ValueError):
        standard_form(0)


def test_default_map_is_reference_exactly():
    M = build_cloning_map()
    assert M.matrix.dtype.kind == "i"
    assert np.array_equal(M.matrix, CLONE_MAP)
    assert M.label == "clone-map"


def test_reference_map_exactly_symplectic():
    R = symplectic_residual(CLONE_MAP)
    assert isinstance(R, Fraction) and R == 0
    assert is_symplectic(CLONE_MAP)
    assert exact_det(CLONE_MAP) == 1


@pytest.mark.parametrize("k", [0, 1])
def test_cloning_on_basis(k):
    s = np.eye(2, dtype=np.int64)[k]
    x = np.concatenate([s, [0, 0, 0, 0]])
    assert np.array_equal(CLONE_MAP @ x, np.concatenate([s, s, TIME_REVERSAL @ s]))


def test_trace_vectors_are_columns():
    M, trace = build_cloning_map(return_trace=True)
    for j, name in enumerate(["E1", "G1", "E2", "G2", "E3", "G3"]):
        assert np.array_equal(trace[name], M.matrix[:, j]), name
    # by hand: w(e2, G1) = 1, w(e2, E1) = 0, so e2' = e2 - E1; likewise g2' = g2 - G1
    assert np.array_equal(trace["e2'"], [-1, 0, 0, 0, -1, 0])
    assert np.array_equal(trace["g2'"], [0, -1, 0, 0, 0, 1])


def test_time_reversal_is_antisymplectic():
    assert is_antisymplectic(TIME_REVERSAL)
    assert not is_symplectic(TIME_REVERSAL)
    assert is_symplectic(np.eye(2, dtype=int))
    assert not is_antisymplectic(np.eye(2, dtype=int))


def test_identity_F_rejected():
    with pytest.raises(ValueError, match="antisymplectic"):
        build_cloning_map(CloningChoices(F=np.eye(2, dtype=int)))


@pytest.mark.parametrize("F", [
    [[0, 1], [1, 0]],
    [[-1, 0], [0, 1]],
    [[1, 3], [0, -1]],
])
def test_other_antisymplectic_F(F):
    F = np.array(F)
    M = build_cloning_map(CloningChoices(F=F))
    assert verify_cloning(M, F)


def test_fractional_choice_stays_exact():
    F = np.array([[Fraction(2), 0], [0, Fraction(-1, 2)]], dtype=object)
    M = build_cloning_map(CloningChoices(F=F))
    assert verify_cloning(M, F)


def test_degenerate_step_reported():
    # E2 = G2 gives a zero pairing
    choices = CloningChoices(second_pair=((1, 0, 0, 0), (1, 0, 0, 0)))
    with pytest.raises(DegenerateStepError) as info:
        build_cloning_map(choices)
    assert info.value.step == 2


def test_gram_schmidt_orthonormalizes():
    rng = np.random.default_rng(3)
    seeds = [(rng.normal(size=4), rng.normal(size=4)) for _ in range(2)]
    B = symplectic_gram_schmidt(seeds)
    assert is_symplectic(B, 1e-9)


def test_gram_schmidt_exact_for_integers():
    seeds = [((1, 0, 1, 0), (0, 1, 0, 0)), ((0, 0, 1, 0), (0, 0, 0, 1))]
    B = symplectic_gram_schmidt(seeds)
    assert is_symplectic(B)


def test_linear_map_wrapper():
    L = LinearMap(CLONE_MAP, label="x")
    assert L.dim == 6 and L.shape == (6, 6)
    assert L.is_integral
    assert np.array_equal(np.asarray(L), CLONE_MAP)
    assert np.array_equal(L @ L, CLONE_MAP @ CLONE_MAP)


def test_is_generator():
    S = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert is_generator(standard_form(1) @ S, 1e-12)
    assert not is_generator(np.eye(2), 1e-12)


def test_float_tolerance_default():
    M = CLONE_MAP.astype(float)
    M[0, 0] += 1e-6
    assert not is_symplectic(M)
    assert is_symplectic(M, tol=1e-4)


def test_random_symplectic_even_dim_only():
    with pytest.raises(ValueError):
        random_symplectic(3)


@settings(max_examples=30, deadline=None)
@given(dim=st.sampled_from([2, 4, 6, 8]), seed=st.integers(0, 10_000),
       scale=st.floats(0.05, 1.0))
def test_random_symplectic_is_symplectic(dim, seed, scale):
    assert is_symplectic(random_symplectic(dim, scale, seed), 1e-9)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_clone_variant_clones(seed):
    g = random_symplectic(4, 0.5, seed).matrix
    k = random_symplectic(2, 0.5, seed + 1).matrix
    V = clone_variant(CLONE_MAP, g, k)
    assert verify_cloning(V, k @ TIME_REVERSAL, tol=1e-9)


def test_clone_variant_rejects_non_symplectic():
    with pytest.raises(ValueError):
        clone_variant(CLONE_MAP, np.eye(4), 2 * np.eye(2))


def test_verify_cloning_detects_wrong_map():
    assert not verify_cloning(np.eye(6, dtype=int))
    bad = CLONE_MAP.copy()
    bad[3, 5] += 1
    assert not verify_cloning(bad)
