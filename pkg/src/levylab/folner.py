"""Almost-invariant vectors and Folner-type projections for finite families
of unitaries, and the sub-sphere pipeline that turns Folner projections into
essential sets."""
from __future__ import annotations

import functools
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._parallel import chunk_rng
from .dynamics import EssentialityReport, search_intersection
from .errors import InvalidArgument, ResourceLimitError, SupportViolationError
from .group import UnitaryAction
from .sets import Cover
from .sphere import sample_uniform
from .subspace import Frame, build_isometry, trace_distance

EXHAUSTIVE_LIMIT = 10**6


def _compression(g: UnitaryAction, support: np.ndarray) -> np.ndarray:
    """The block of g acting from l_2(support) to l_2(support)."""
    if hasattr(g, "index_map"):
        pos = np.full(g.dim, -1)
        pos[support] = np.arange(support.size)
        img = g.index_map[support]
        rows = np.where(img >= 0, pos[np.maximum(img, 0)], -1)
        ok = rows >= 0
        M = np.zeros((support.size, support.size))
        M[rows[ok], np.flatnonzero(ok)] = 1.0
        return M
    return g.to_dense()[np.ix_(support, support)]


@dataclass
class AlmostInvariant:
    vector: np.ndarray
    residual: float          # max_g ||g xi - xi||
    top_eigenvalue: float    # of the averaged operator M
    mean_square: float       # mean_g ||g xi - xi||^2 = 2 - 2 Re<M xi, xi>
    residuals: list[float]

    def to_dict(self) -> dict:
        return dict(residual=self.residual, top_eigenvalue=self.top_eigenvalue, mean_square=self.mean_square,
                    residuals=self.residuals)


def averaged_operator(actions: Sequence[UnitaryAction], support=None) -> np.ndarray:
    """M = (1/2|F|) sum_g (g + g^-1), compressed to ``support`` if given."""
    if not actions:
        raise InvalidArgument("empty action list")
    d = actions[0].dim
    if any(g.dim != d for g in actions):
        raise InvalidArgument("actions must share one dimension")
    s = np.arange(d) if support is None else np.asarray(support, dtype=int)
    M = sum(_compression(g, s) for g in actions)
    return (M + M.conj().T) / (2 * len(actions))


def almost_invariant_vector(actions: Sequence[UnitaryAction], d: int | None = None, support=None) -> AlmostInvariant:
    """Top eigenvector of the averaged operator, embedded into C^d.

    It minimizes the mean of ||g xi - xi||^2 over the family, so its max
    residual is within a factor sqrt|F| of the best achievable.  ``support``
    restricts the search to vectors on those coordinates (needed for
    truncated regular actions) and defaults to the common domain of any
    partial actions.
    """
    if support is None and any(hasattr(g, "domain") for g in actions):
        support = functools.reduce(np.intersect1d, [g.domain for g in actions if hasattr(g, "domain")])
    M = averaged_operator(actions, support)
    dim = actions[0].dim
    if d is not None and d != dim:
        raise InvalidArgument(f"actions act on dimension {dim}, not {d}")
    s = np.arange(dim) if support is None else np.asarray(support, dtype=int)
    w, V = np.linalg.eigh(M)
    v = V[:, -1]
    j = int(np.argmax(np.abs(v)))
    v = v * (np.abs(v[j]) / v[j])  # fix the phase: largest coordinate real positive
    if not np.iscomplexobj(M):
        v = v.real
    xi = np.zeros(dim, dtype=v.dtype)
    xi[s] = v
    xi /= np.linalg.norm(xi)
    res = [float(np.linalg.norm(g.apply(xi) - xi)) for g in actions]
    return AlmostInvariant(xi, max(res), float(w[-1]), float(np.mean(np.square(res))), res)


def trace_commutator(P, g: UnitaryAction, method: str = "auto"):
    """||g P g^-1 - P||_1.

    ``P`` is a :class:`Frame` (dense path, sum of singular values) or a
    collection of coordinate indices.  For an index set S and a permutation
    action this is |gS symmetric-difference S|, returned as an int.
    """
    if method not in ("auto", "dense", "subset"):
        raise InvalidArgument(f"unknown method {method!r}")
    if isinstance(P, Frame):
        if P.d != g.dim:
            raise InvalidArgument(f"dimension mismatch: frame in {P.d}, action on {g.dim}")
        if method == "subset":
            raise InvalidArgument("subset path needs a coordinate subset")
        moved = Frame(np.asarray(g.apply(P.columns.T)).T)
        return trace_distance(moved, P)
    S = np.asarray(sorted(set(int(i) for i in P)), dtype=int)
    if S.size and (S.min() < 0 or S.max() >= g.dim):
        raise InvalidArgument("subset index outside the universe")
    if method == "dense" or not hasattr(g, "index_map"):
        return trace_commutator(Frame.coordinate(g.dim, S), g)
    img = g.index_map[S]
    if np.any(img < 0):
        raise SupportViolationError("the action moves part of the subset outside its universe")
    return int(np.setxor1d(img, S).size)


@dataclass
class FolnerSearchResult:
    subset: tuple[int, ...] | None
    frame: Frame | None
    rank: int
    ratios: dict[str, float]
    max_ratio: float
    trace: dict = field(default_factory=dict)
    actions: Sequence[UnitaryAction] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.actions is None:
            return
        P = self.frame if self.frame is not None else self.subset
        for g in self.actions:
            fresh = trace_commutator(P, g) / self.rank
            if self.frame is None and fresh != self.ratios[g.label]:
                raise InvalidArgument(f"ratio for {g.label} does not match a fresh recomputation")
            if self.frame is not None and abs(fresh - self.ratios[g.label]) > 1e-10:
                raise InvalidArgument(f"ratio for {g.label} does not match a fresh recomputation")

    def to_dict(self) -> dict:
        return dict(subset=list(self.subset) if self.subset is not None else None, rank=self.rank,
                    ratios=self.ratios, max_ratio=self.max_ratio, trace=self.trace)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class _SubsetProblem:
    """max_g |gS delta S| over n-subsets S of the common domain of the maps.

    With x the indicator of S on the domain, |gS cap S| = x^T A_g x where
    A_g[i, j] = 1 iff g(D_i) = D_j, and |gS delta S| = 2n - 2 x^T A_g x.
    """

    def __init__(self, actions: Sequence[UnitaryAction]):
        if not actions:
            raise InvalidArgument("empty action list")
        for g in actions:
            if not hasattr(g, "index_map"):
                raise InvalidArgument(f"{g.label} is not a permutation action")
        self.actions = list(actions)
        maps = np.vstack([g.index_map for g in actions])
        self.domain = np.flatnonzero((maps >= 0).all(axis=0))
        pos = np.full(maps.shape[1], -1)
        pos[self.domain] = np.arange(self.domain.size)
        self.B = []
        self.maps = []
        for g in actions:
            img = g.index_map[self.domain]
            dst = pos[img]
            A = np.zeros((self.domain.size, self.domain.size))
            ok = dst >= 0
            A[np.flatnonzero(ok), dst[ok]] = 1.0
            self.B.append(A + A.T)
            self.maps.append(dst)

    def costs(self, x: np.ndarray) -> np.ndarray:
        n = x.sum()
        return np.array([2 * n - B[x][:, x].sum() for B in self.B], dtype=int)

    @staticmethod
    def key(costs) -> tuple:
        return (int(np.max(costs)), int(np.sum(costs)))

    def grow(self, start: int, n: int) -> np.ndarray:
        x = np.zeros(self.domain.size, dtype=bool)
        x[start] = True
        for k in range(1, n):
            q = np.array([0.5 * B[x][:, x].sum() for B in self.B])
            gain = np.stack([B[:, x].sum(axis=1) + 0.5 * np.diag(B) for B in self.B])
            cost = 2 * (k + 1) - 2 * (q[:, None] + gain)
            cost[:, x] = np.inf
            score = cost.max(axis=0) * 1e6 + cost.sum(axis=0)
            x[int(np.argmin(score))] = True
        return x

    def swap_descent(self, x: np.ndarray, max_steps: int = 10**5) -> tuple[np.ndarray, int]:
        x = x.copy()
        n = int(x.sum())
        cur = self.key(self.costs(x))
        steps = 0
        while steps < max_steps:
            S, T = np.flatnonzero(x), np.flatnonzero(~x)
            if T.size == 0:
                break
            new = []
            for B in self.B:
                Bx = B[:, x].sum(axis=1)
                q = 0.5 * Bx[x].sum()
                delta = (-Bx[S][:, None] + Bx[T][None, :] + 0.5 * np.diag(B)[S][:, None]
                         + 0.5 * np.diag(B)[T][None, :] - B[np.ix_(S, T)])
                new.append(2 * n - 2 * (q + delta))
            new = np.rint(np.stack(new)).astype(np.int64)
            worst, total = new.max(axis=0), new.sum(axis=0)
            # lexicographic (max, sum); argmin picks the lowest (s, t) on ties
            flat = worst * (total.max() + 1) + total
            i = int(np.argmin(flat))
            si, ti = divmod(i, T.size)
            cand = (int(worst.flat[i]), int(total.flat[i]))
            if cand >= cur:
                break
            x[S[si]], x[T[ti]] = False, True
            cur = cand
            steps += 1
        return x, steps


def _result(problem: _SubsetProblem, x: np.ndarray, n: int, trace: dict) -> FolnerSearchResult:
    subset = tuple(int(i) for i in problem.domain[np.flatnonzero(x)])
    costs = problem.costs(x)
    ratios = {g.label: int(c) / n for g, c in zip(problem.actions, costs)}
    return FolnerSearchResult(subset, None, n, ratios, max(ratios.values()), trace, actions=problem.actions)


def folner_subset_search(actions: Sequence[UnitaryAction], n: int, strategy: str = "greedy-swap",
                         restarts: int = 32, seed: int = 0, budget: int = EXHAUSTIVE_LIMIT) -> FolnerSearchResult:
    """Find a coordinate subset S, |S| = n, minimizing max_g |gS delta S| / n.

    ``greedy-swap`` runs steepest single-element exchange (lexicographic on
    max then total cost, lowest indices first on ties) from ``restarts``
    starting sets: even restarts start from a random subset, odd ones from a
    greedily grown set around a random element.  ``exhaustive`` enumerates
    all subsets of the domain and raises :class:`ResourceLimitError` carrying
    the best subset seen once ``budget`` subsets have been examined.
    """
    problem = _SubsetProblem(actions)
    D = problem.domain.size
    if not 1 <= n <= D:
        raise InvalidArgument(f"rank {n} must lie in 1..{D} (size of the common domain)")
    if strategy == "exhaustive":
        return _exhaustive(problem, n, budget)
    if strategy != "greedy-swap":
        raise InvalidArgument(f"unknown strategy {strategy!r}")
    runs = []
    for r in range(restarts):
        rng = chunk_rng(seed, "folner", r)
        if r % 2 == 0:
            x0 = np.zeros(D, dtype=bool)
            x0[rng.choice(D, n, replace=False)] = True
            kind = "random"
        else:
            x0 = problem.grow(int(rng.integers(D)), n)
            kind = "grown"
        x, steps = problem.swap_descent(x0)
        runs.append(dict(restart=r, start=kind, initial=problem.key(problem.costs(x0)),
                         final=problem.key(problem.costs(x)), steps=steps, x=x))
    best = min(runs, key=lambda run: (run["final"], run["restart"]))
    trace = dict(strategy="greedy-swap", restarts=restarts, best_restart=best["restart"],
                 iterations=sum(run["steps"] for run in runs),
                 runs=[dict(restart=run["restart"], start=run["start"], initial_max=run["initial"][0] / n,
                            final_max=run["final"][0] / n, steps=run["steps"]) for run in runs])
    return _result(problem, best["x"], n, trace)


def _exhaustive(problem: _SubsetProblem, n: int, budget: int) -> FolnerSearchResult:
    D = problem.domain.size
    total = math.comb(D, n)
    best_key, best_combo, seen = None, None, 0
    combos = itertools.combinations(range(D), n)
    batch = 20000
    rows_all = np.arange(batch)
    while seen < min(total, budget):
        chunk = np.array(list(itertools.islice(combos, min(batch, budget - seen))), dtype=np.int64)
        if chunk.size == 0:
            break
        m = chunk.shape[0]
        member = np.zeros((m, D), dtype=bool)
        member[rows_all[:m, None], chunk] = True
        costs = []
        for dst in problem.maps:
            img = dst[chunk]
            hit = (img >= 0) & member[rows_all[:m, None], np.maximum(img, 0)]
            costs.append(2 * n - 2 * hit.sum(axis=1))
        costs = np.stack(costs)
        worst, tot = costs.max(axis=0), costs.sum(axis=0)
        i = int(np.lexsort((tot, worst))[0])
        key = (int(worst[i]), int(tot[i]))
        if best_key is None or key < best_key:
            best_key, best_combo = key, chunk[i]
        seen += m
    x = np.zeros(D, dtype=bool)
    x[best_combo] = True
    result = _result(problem, x, n, dict(strategy="exhaustive", examined=seen, total=total))
    if seen < total:
        raise ResourceLimitError(f"exhaustive search stopped after {seen} of {total} subsets", best=result)
    return result


# --- sub-sphere pipeline ---------------------------------------------------------


@dataclass
class LevySequenceReport:
    ranks: list[int]
    ratios: list[dict[str, float]]
    measures: list[list[float]]
    selected: int
    selected_label: str
    witness: EssentialityReport
    transport: list[dict]
    warnings: list[str]

    def to_dict(self) -> dict:
        return dict(ranks=self.ranks, ratios=self.ratios, measures=self.measures, selected=self.selected,
                    selected_label=self.selected_label, witness=self.witness.to_dict(), transport=self.transport,
                    warnings=self.warnings)


def levy_sequence_experiment(frames: Sequence[Frame], actions: Sequence[UnitaryAction], cover: Cover, eps: float,
                             m: int, seed: int, budget: int = 20000) -> LevySequenceReport:
    """Pick a cover element heavy on the sub-spheres S_n of a projection
    sequence, then look for a common point of its 2eps-neighbourhood images on
    the largest S_n.

    Also moves each S_n^g = g S_n back onto S_n with the frame isometry and
    reports how much of S_n^g it moves by less than eps.
    """
    if not frames:
        raise InvalidArgument("empty projection sequence")
    if not actions:
        raise InvalidArgument("empty action list")
    warnings: list[str] = []
    ranks = [F.n for F in frames]
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        warnings.append("ranks are not strictly increasing")
    ratios = [{g.label: trace_commutator(F, g) / F.n for g in actions} for F in frames]
    for g in actions:
        seq = [r[g.label] for r in ratios]
        if any(b > a + 1e-12 for a, b in zip(seq, seq[1:])):
            warnings.append(f"ratios for {g.label} are not decreasing: {seq}")

    measures = []
    for k, F in enumerate(frames):
        X = sample_uniform(F.n, m, seed, F.field, stream=f"levy-seq-{k}") @ F.columns.T
        measures.append([float(np.mean(A.contains(X))) for A in cover])
    threshold = 1.0 / len(cover)
    counts = [sum(meas[i] >= threshold for meas in measures) for i in range(len(cover))]
    selected = int(np.argmax(counts))
    A = cover.sets[selected]

    top = frames[int(np.argmax(ranks))]
    targets = [A.transformed(g) for g in actions]
    witness = search_intersection(targets, 2 * eps, top.d, budget, seed, field=top.field, frame=top,
                                  label=A.label, transform_labels=[g.label for g in actions], stream="levy-seq")

    transport = []
    for g in actions:
        moved = Frame(np.asarray(g.apply(top.columns.T)).T)
        iso = build_isometry(moved, top)
        X = sample_uniform(top.n, m, seed, top.field, stream=f"transport-{g.label}") @ moved.columns.T
        shift = np.linalg.norm(iso.apply(X) - X, axis=1)
        transport.append(dict(action=g.label, trace_distance=trace_distance(moved, top),
                              fraction_within_eps=float(np.mean(shift < eps)), max_shift=float(shift.max())))
    return LevySequenceReport(ranks, ratios, measures, selected, A.label, witness, transport, warnings)
