import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levylab.errors import InvalidArgument, ResourceLimitError, SupportViolationError
from levylab.group import (
    A_GEN, B_GEN, IDENTITY, DenseAction, DirectSumAction, PartialPermutationAction, Permutation,
    PermutationAction, ReducedWord, ScalarAction, ball_enumerate, ball_size, cyclic_shift, hamming,
    integer_shift, leader_projection_mass, phi, prefix_class, prefix_mask, regular_action, sigma_eta,
)

W = ReducedWord.parse


def naive_reduce(letters):
    # repeated full passes until nothing cancels
    s = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(s) - 1):
            if s[i] == -s[i + 1]:
                del s[i:i + 2]
                changed = True
                break
    return tuple(s)


# words

def test_word_examples():
    assert A_GEN * A_GEN.inverse() == IDENTITY
    ab = W("ab")
    assert ab.inverse() == B_GEN.inverse() * A_GEN.inverse()
    assert W("aB") * W("ba") == W("aa") == A_GEN ** 2
    assert str(W("aB") * W("ba")) == "aa"


def test_unreduced_word_rejected():
    with pytest.raises(InvalidArgument):
        ReducedWord((1, -1))
    with pytest.raises(InvalidArgument):
        W("ax")


@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=14), st.lists(st.sampled_from([1, -1, 2, -2]), max_size=14))
def test_product_matches_naive_reduction(u, v):
    assert (ReducedWord.reduce(u) * ReducedWord.reduce(v)).letters == naive_reduce(u + v)


def test_associativity_over_ball2():
    B2 = ball_enumerate(2)
    for x, y, z in itertools.product(B2, repeat=3):
        assert (x * y) * z == x * (y * z)


def test_powers():
    assert W("ab") ** -2 == W("BABA")
    assert A_GEN ** 0 == IDENTITY


# balls

def test_ball_sizes():
    assert ball_enumerate(0) == [IDENTITY]
    for R in range(7):
        words = ball_enumerate(R)
        assert len(words) == ball_size(R) == 2 * 3**R - 1
        assert len(set(words)) == len(words)
    # independent count: reduced strings over 4 letters
    count = sum(1 for k in range(4) for s in itertools.product([1, -1, 2, -2], repeat=k)
                if naive_reduce(s) == s)
    assert count == ball_size(3)


def test_ball_order():
    words = ball_enumerate(3)
    assert [str(w) for w in ball_enumerate(1)] == ["e", "a", "A", "b", "B"]
    assert words == sorted(words, key=lambda w: w.sort_key())
    assert all(ReducedWord.reduce(w.letters) == w for w in words)


def test_ball_limit():
    with pytest.raises(ResourceLimitError):
        ball_enumerate(11)
    with pytest.raises(InvalidArgument):
        ball_enumerate(-1)


def test_prefix_class_examples():
    assert prefix_class(IDENTITY) == 0
    assert prefix_class(W("baab")) == 0
    assert prefix_class(W("aabA")) == 2
    assert prefix_class(W("AAA")) == -3


def test_prefix_classes_partition_balls():
    for R in range(1, 7):
        words = ball_enumerate(R)
        sizes = [prefix_mask(words, n).size for n in range(-R, R + 1)]
        assert sum(sizes) == len(words)
        idx = np.concatenate([prefix_mask(words, n) for n in range(-R, R + 1)])
        assert np.unique(idx).size == len(words)


@pytest.mark.parametrize("g", ["a", "B", "ab", "aBA"])
def test_left_multiplication_injective(g):
    words = ball_enumerate(4)
    images = [W(g) * w for w in words]
    assert len(set(images)) == len(words)


# permutations and phi

def test_hamming_metric_on_s4():
    perms = [Permutation(p) for p in itertools.permutations(range(1, 5))]
    for s, t in itertools.product(perms, repeat=2):
        assert (hamming(s, t) == 0) == (s == t)
        assert hamming(s, t) == hamming(t, s)
    for s, t, u in itertools.product(perms, repeat=3):
        assert hamming(s, u) <= hamming(s, t) + hamming(t, u)


@pytest.mark.parametrize("n", [4, 6, 10, 100])
def test_phi_values(n):
    s, t = sigma_eta(n)
    assert phi(s, t) == Fraction(2, n)
    assert phi(s * t, t * t) == 1
    assert phi(s, s) == 0


def test_sigma_eta_shape():
    s, t = sigma_eta(6)
    assert str(s) == "2 1 4 3 6 5" and str(t) == "1 2 4 3 6 5"
    with pytest.raises(InvalidArgument):
        sigma_eta(5)


def test_permutation_product_and_inverse():
    s = Permutation.parse("2 3 1")
    assert (s * s.inverse()) == Permutation.identity(3)
    assert (s * s)(1) == s(s(1)) == 3
    with pytest.raises(InvalidArgument):
        Permutation.parse("1 1 2")


# actions

def test_regular_action_examples():
    e = regular_action(IDENTITY, 3)
    X = np.random.default_rng(0).standard_normal((4, ball_size(3)))
    assert np.array_equal(e.apply(X), X)
    b = regular_action(B_GEN, 2)
    delta = np.zeros(ball_size(2))
    delta[0] = 1.0
    out = b.apply(delta)
    assert out[b.words.index(B_GEN)] == 1.0 and out.sum() == 1.0


def test_regular_action_isometric_on_support():
    a = regular_action(A_GEN, 3)
    inner = np.array([len(w) <= 2 for w in a.words])
    x = inner / np.sqrt(inner.sum())
    y = a.apply(x)
    assert np.linalg.norm(y) == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(a.apply_inverse(y), x)


def test_regular_action_refuses_outside_support():
    a = regular_action(A_GEN, 2)
    x = np.zeros(ball_size(2))
    x[a.words.index(W("ab"))] = 1.0
    with pytest.raises(SupportViolationError):
        a.apply(x)


def test_partial_permutation_validation():
    with pytest.raises(InvalidArgument):
        PartialPermutationAction([1, 1, -1])
    s = integer_shift(5)
    assert list(s.domain) == [0, 1, 2, 3]


def test_cyclic_shift_is_unitary():
    U = cyclic_shift(6).to_dense()
    assert np.allclose(U.T @ U, np.eye(6))
    x = np.arange(6.0)
    assert np.allclose(cyclic_shift(6).apply(x), np.roll(x, 1))


def test_dense_action_checks_unitarity(rng):
    with pytest.raises(InvalidArgument):
        DenseAction(np.array([[1.0, 1.0], [0.0, 1.0]]))
    Q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    g = DenseAction(Q)
    x = rng.standard_normal(4) + 0j
    assert np.allclose(g.apply_inverse(g.apply(x)), x)
    assert np.allclose(g.inverse().apply(x), Q.conj().T @ x)


def test_scalar_and_direct_sum():
    g = DirectSumAction([ScalarAction(-1, 2), PermutationAction([1, 0])])
    assert np.allclose(g.apply(np.array([1.0, 2.0, 3.0, 4.0])), [-1, -2, 4, 3])
    with pytest.raises(InvalidArgument):
        ScalarAction(2.0, 3)


# Leader masses

def test_leader_mass_examples():
    E = ([0, 3], [1, 4], [2, 5])
    assert leader_projection_mass(*E, np.eye(6)[3]) == (1.0, 0.0, 0.0)
    x = np.zeros(6)
    x[[0, 1, 2]] = 1 / np.sqrt(3)
    assert np.allclose(leader_projection_mass(*E, x), 1 / np.sqrt(3))
    with pytest.raises(InvalidArgument):
        leader_projection_mass([0], [0], [1], np.eye(3)[0])


def test_leader_min_mass_bound():
    from levylab.sphere import sample_uniform
    d = 300
    idx = np.arange(d)
    X = sample_uniform(d, 10**5, seed=8)
    masses = leader_projection_mass(idx[idx % 3 == 0], idx[idx % 3 == 1], idx[idx % 3 == 2], X) ** 2
    assert masses.shape == (10**5, 3)
    assert masses.min(axis=1).max() <= 1 / 3 + 1e-12
