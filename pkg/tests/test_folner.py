import itertools
import math

import numpy as np
import pytest

from levylab.errors import InvalidArgument, ResourceLimitError
from levylab.folner import (
    almost_invariant_vector, averaged_operator, folner_subset_search, levy_sequence_experiment, trace_commutator,
)
from levylab.group import (
    A_GEN, B_GEN, DenseAction, PermutationAction, RegularAction, ScalarAction, cyclic_shift, integer_shift,
)
from levylab.sets import Cover, WholeSphere, hemisphere
from levylab.subspace import Frame, random_frame


def f2_pair(R):
    return [RegularAction(A_GEN, R), RegularAction(B_GEN, R)]


def brute_ratio(actions, S, n):
    # direct count of |gS delta S| from the index maps
    S = set(S)
    return max(len({int(g.index_map[i]) for i in S} ^ S) for g in actions) / n


# almost-invariant vectors

def test_cyclic_shift_uniform_vector():
    res = almost_invariant_vector([cyclic_shift(12)])
    assert res.residual < 1e-8
    assert np.allclose(np.abs(res.vector), 1 / math.sqrt(12))


def test_scalar_z2_residual_two():
    res = almost_invariant_vector([ScalarAction(1, 7, "1"), ScalarAction(-1, 7, "-1")])
    assert res.residual == pytest.approx(2.0, abs=1e-12)


def test_f2_truncation_has_no_almost_invariant_vector():
    acts = f2_pair(7)
    support = np.flatnonzero([len(w) <= 6 for w in acts[0].words])
    res = almost_invariant_vector(acts, support=support)
    M = averaged_operator(acts, support)
    top = np.linalg.eigvalsh(M)[-1]
    assert top == pytest.approx(res.top_eigenvalue, abs=1e-12)
    assert top <= math.sqrt(3) / 2
    assert res.residual >= math.sqrt(2 - math.sqrt(3)) - 1e-6


def test_residual_identities(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((9, 9)) + 1j * rng.standard_normal((9, 9)))
    acts = [DenseAction(Q, "q"), cyclic_shift(9)]
    res = almost_invariant_vector(acts)
    M = averaged_operator(acts)
    xi = res.vector
    ms = 2 - 2 * np.real(np.vdot(xi, M @ xi))
    assert res.mean_square == pytest.approx(ms, abs=1e-10)
    assert res.mean_square <= res.residual ** 2 + 1e-10


def test_almost_invariant_reproducible():
    acts = f2_pair(4)
    a = almost_invariant_vector(acts).vector
    b = almost_invariant_vector(acts).vector
    assert np.array_equal(a, b)


# trace commutator

def test_commuting_action_gives_zero(rng):
    F = random_frame(8, 3, rng)
    assert trace_commutator(F, ScalarAction(-1, 8)) == pytest.approx(0.0, abs=1e-12)


def test_subset_and_dense_paths_agree(rng):
    for _ in range(100):
        d = int(rng.integers(3, 20))
        g = PermutationAction(rng.permutation(d))
        S = rng.choice(d, int(rng.integers(1, d + 1)), replace=False)
        exact = trace_commutator(S, g)
        assert isinstance(exact, int)
        assert exact == len(set(g.index_map[S].tolist()) ^ set(S.tolist()))
        assert trace_commutator(S, g, method="dense") == pytest.approx(exact, abs=1e-9)


def test_dense_rank3_bound(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12)))
    val = trace_commutator(random_frame(12, 3, rng, "complex"), DenseAction(Q))
    assert 0 <= val <= 6


def test_trace_commutator_dimension_mismatch(rng):
    with pytest.raises(InvalidArgument):
        trace_commutator(random_frame(5, 2, rng), cyclic_shift(6))


# subset search

def test_integer_shift_interval():
    res = folner_subset_search([integer_shift(100)], 20)
    assert res.max_ratio <= 0.1
    S = sorted(res.subset)
    assert S == list(range(S[0], S[0] + 20))


def test_identity_action_ratio_zero():
    res = folner_subset_search([PermutationAction(np.arange(10), "e")], 4, restarts=4)
    assert res.max_ratio == 0


def test_f2_exhaustive_vs_greedy():
    acts = f2_pair(3)
    # independent oracle: plain enumeration over the 17 words of B_2
    domain = [i for i, w in enumerate(acts[0].words) if len(w) <= 2]
    assert len(domain) == 17
    oracle = min(brute_ratio(acts, S, 4) for S in itertools.combinations(domain, 4))
    ex = folner_subset_search(acts, 4, strategy="exhaustive")
    gr = folner_subset_search(acts, 4)
    assert ex.max_ratio == oracle
    assert gr.max_ratio == ex.max_ratio
    assert ex.trace["total"] == math.comb(17, 4) == 2380


def test_greedy_never_worse_than_start():
    res = folner_subset_search(f2_pair(4), 10, restarts=12, seed=5)
    for run in res.trace["runs"]:
        assert run["final_max"] <= run["initial_max"]


def test_ratio_trend_on_amenable_groups():
    for acts in ([integer_shift(200)], [cyclic_shift(60)]):
        ratios = [folner_subset_search(acts, n, restarts=8).max_ratio for n in (5, 10, 20, 40)]
        assert all(b <= a for a, b in zip(ratios, ratios[1:]))
        assert ratios[-1] <= 0.05


def test_exhaustive_budget():
    with pytest.raises(ResourceLimitError) as info:
        folner_subset_search(f2_pair(3), 4, strategy="exhaustive", budget=100)
    assert info.value.best is not None


def test_result_json():
    res = folner_subset_search([integer_shift(30)], 5, restarts=2)
    assert '"max_ratio"' in res.to_json()


# sub-sphere pipeline

def nested(d, dims, complex_=False):
    frames = [Frame.coordinate(d, range(k)) for k in dims]
    if complex_:
        frames = [Frame(F.columns.astype(complex)) for F in frames]
    return frames


def test_levy_sequence_scalar_z2():
    d = 40
    cover = Cover([hemisphere(d, 0, 1), hemisphere(d, 0, -1)])
    rep = levy_sequence_experiment(nested(d, [5, 10, 20, 40]), [ScalarAction(-1, d, "-1")], cover, 0.1, 2000, 0)
    assert rep.ranks == [5, 10, 20, 40]
    assert rep.witness.verdict == "witness-found"
    assert abs(rep.witness.witness[0]) < 0.2
    assert all(r["-1"] == 0 for r in rep.ratios)


def test_levy_sequence_identity():
    d = 20
    cover = Cover([WholeSphere(), hemisphere(d)])
    rep = levy_sequence_experiment(nested(d, [5, 10, 20]), [ScalarAction(1, d, "e")], cover, 0.1, 500, 0)
    assert rep.selected == 0
    assert rep.witness.verdict == "witness-found"


def test_levy_sequence_circle_action():
    d = 40
    angles = 2 * math.pi * ((np.arange(1, d + 1) * math.sqrt(2)) % 1.0)
    g = DenseAction(np.diag(np.exp(1j * angles)), "rot")
    cover = Cover([hemisphere(d, 0, 1), hemisphere(d, 0, -1)])
    rep = levy_sequence_experiment(nested(d, [5, 10, 20, 40], True), [g], cover, 0.1, 1000, 0)
    assert rep.witness.verdict == "witness-found"
    assert rep.witness.epsilon == pytest.approx(0.2)
    assert rep.transport[0]["trace_distance"] == pytest.approx(0.0, abs=1e-10)


def test_levy_sequence_warns_on_bad_ranks():
    d = 10
    cover = Cover([hemisphere(d)])
    rep = levy_sequence_experiment(nested(d, [6, 4]), [ScalarAction(-1, d)], cover, 0.1, 100, 0, budget=100)
    assert rep.warnings
    with pytest.raises(InvalidArgument):
        levy_sequence_experiment([], [ScalarAction(-1, d)], cover, 0.1, 100, 0)
