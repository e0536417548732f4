"""Essential sets, witness search, and the two classical counterexamples.

A set A is essential for a finite family of isometries g_1..g_k at radius eps
when the neighbourhoods g_i(O_eps(A)) = O_eps(g_i A) have a common point.
Neighbourhoods are chordal by default.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._parallel import CHUNK, chunk_rng, map_chunks, thread_count
from .errors import InvalidArgument
from .group import (A_GEN, B_GEN, RegularAction, UnitaryAction, ball_enumerate, prefix_class,
                    prefix_mask)
from .sets import Cover, MaskNormSet, SphericalSet
from .sphere import chordal_to_geodesic, real_inner, sample_uniform
from .subspace import Frame

__all__ = [
    "Cover", "SphericalSet", "EssentialityReport", "SymbolicTransform", "witness_search",
    "search_intersection", "disjoint_mask_certificate", "leader_experiment", "f2_experiment",
    "lift_cover", "lift_margin_check", "essential_element_scan", "LiftedSet",
]

VERDICTS = ("witness-found", "certificate-empty", "inconclusive")
LEADER_THRESHOLD = math.sqrt(2) / 2 - math.sqrt(3) / 3
REFINE_ROUNDS = 5
REFINE_RADIUS = 0.5


def _distances(targets: Sequence[SphericalSet], X, metric: str) -> np.ndarray:
    D = np.column_stack([np.asarray(t.distance(X), dtype=float) for t in targets])
    return chordal_to_geodesic(D) if metric == "geodesic" else D


def _encode(x: np.ndarray) -> list:
    if np.iscomplexobj(x):
        return [[float(v.real), float(v.imag)] for v in x]
    return [float(v) for v in x]


@dataclass
class EssentialityReport:
    label: str
    transforms: list[str]
    epsilon: float
    verdict: str
    samples: int
    seed: int
    witness: np.ndarray | None = None
    certificate: str | None = None
    best_score: float | None = None  # min over tried points of max_g dist(x, gA)
    metric: str = "chordal"
    targets: Sequence[SphericalSet] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise InvalidArgument(f"unknown verdict {self.verdict!r}")
        if self.verdict == "witness-found":
            if self.witness is None or self.targets is None:
                raise InvalidArgument("a witness report needs the witness and its target sets")
            x = np.asarray(self.witness)
            if abs(np.linalg.norm(x) - 1.0) > 1e-9:
                raise InvalidArgument("witness is not a unit vector")
            dist = _distances(self.targets, x[None, :], self.metric)[0]
            if not np.all(dist < self.epsilon):
                raise InvalidArgument(f"witness fails re-verification: distances {dist.tolist()}")
        if self.verdict == "certificate-empty" and not self.certificate:
            raise InvalidArgument("certificate-empty needs a certificate")

    def to_dict(self) -> dict:
        out = dict(label=self.label, transforms=list(self.transforms), epsilon=self.epsilon,
                   verdict=self.verdict)
        if self.witness is not None:
            out["witness"] = _encode(np.asarray(self.witness))
        if self.certificate is not None:
            out["certificate"] = self.certificate
        out.update(samples=self.samples, seed=self.seed, best_score=self.best_score, metric=self.metric)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class SymbolicTransform:
    """Set-level image of a coordinate bijection that has no finite unitary
    realization at the working truncation.

    Maps a :class:`MaskNormSet` with mask ``source`` to the same condition on
    the mask ``image``.
    """

    def __init__(self, source, image, label: str):
        self.source = frozenset(int(i) for i in source)
        self.image = np.asarray(sorted(int(i) for i in image), dtype=int)
        self.label = label

    def __call__(self, A: SphericalSet) -> SphericalSet:
        if not isinstance(A, MaskNormSet) or frozenset(A.mask.tolist()) != self.source:
            raise InvalidArgument(f"{self.label} is only defined on sets keyed to its source mask")
        return MaskNormSet(self.image, A.threshold, A.kind, label=f"{self.label}({A.label})")


def _image(A: SphericalSet, g) -> SphericalSet:
    if isinstance(g, SymbolicTransform):
        return g(A)
    if isinstance(g, UnitaryAction):
        return A.transformed(g)
    raise InvalidArgument(f"transform {g!r} is neither a unitary action nor a symbolic transform")


def _ge_form(t: SphericalSet, d: int | None):
    """(mask, threshold) with t = {||p_mask x|| >= threshold}, or None."""
    if not isinstance(t, MaskNormSet):
        return None
    if t.kind == "ge":
        return t.mask, t.threshold
    if d is None:
        return None
    # ||p_S x||^2 + ||p_{S^c} x||^2 = 1 inside the d coordinates
    comp = np.setdiff1d(np.arange(d), t.mask)
    return comp, math.sqrt(max(0.0, 1.0 - t.threshold**2))


def disjoint_mask_certificate(targets: Sequence[SphericalSet], eps: float, d: int | None = None) -> str | None:
    """Pigeonhole emptiness proof for intersections of mask-norm neighbourhoods.

    If x is within (chordal) eps of {||p_{S_j} y|| >= c_j} for pairwise
    disjoint S_j, then ||p_{S_j} x|| > c_j - eps, and sum_j ||p_{S_j} x||^2 <= 1.
    So sum_j (c_j - eps)_+^2 >= 1 proves the intersection empty.  Geodesic
    neighbourhoods are smaller, so the proof covers them too.
    """
    forms = [(i, _ge_form(t, d)) for i, t in enumerate(targets)]
    forms = [(i, f) for i, f in forms if f is not None and f[1] - eps > 0]
    if not forms:
        return None
    best, best_val = None, 0.0
    candidates = (itertools.chain.from_iterable(itertools.combinations(forms, r) for r in range(1, len(forms) + 1))
                  if len(forms) <= 14 else [forms])
    for combo in candidates:
        masks = [set(f[0].tolist()) for _, f in combo]
        if sum(len(m) for m in masks) != len(set().union(*masks)):
            continue
        val = sum((f[1] - eps) ** 2 for _, f in combo)
        if val > best_val:
            best, best_val = combo, val
    if best is None or best_val < 1.0:
        return None
    names = ", ".join(targets[i].label for i, _ in best)
    return (f"pairwise disjoint masks [{names}]: a common point of the {eps:g}-neighbourhoods would have "
            f"sum ||p_S x||^2 > sum (c - eps)^2 = {best_val:.6f} >= 1")


Certificate = Callable[[Sequence[SphericalSet], float, "int | None"], "str | None"]
DEFAULT_CERTIFICATES: tuple[Certificate, ...] = (disjoint_mask_certificate,)


def _cap_points(center: np.ndarray, radius: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Points at geodesic distance uniform in [0, radius) from ``center`` (a unit vector)."""
    n = center.size
    if np.iscomplexobj(center):
        Z = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    else:
        Z = rng.standard_normal((size, n))
    Z = Z - real_inner(Z, center)[:, None] * center[None, :]
    norms = np.linalg.norm(Z, axis=1, keepdims=True)
    Z = Z / np.where(norms > 0, norms, 1.0)
    t = rng.uniform(0.0, radius, size)[:, None]
    Y = np.cos(t) * center[None, :] + np.sin(t) * Z
    return Y / np.linalg.norm(Y, axis=1, keepdims=True)


def search_intersection(targets: Sequence[SphericalSet], eps: float, d: int, budget: int, seed: int, *,
                        field: str = "real", frame: Frame | None = None, metric: str = "chordal",
                        seeds: Sequence[np.ndarray] = (), certificates: Sequence[Certificate] = DEFAULT_CERTIFICATES,
                        label: str = "A", transform_labels: Sequence[str] | None = None,
                        stream: str = "witness") -> EssentialityReport:
    """Look for a point within ``eps`` of every target set.

    Registered certificates are consulted first.  Then explicit ``seeds``,
    ``budget`` uniform samples (80%), and five rounds of resampling in caps
    around the best near-miss with the cap radius halved each round.  When
    ``frame`` is given, candidates are restricted to the unit sphere of its
    range.  Returns the first witness in sample order, or an inconclusive
    report; absence of a witness is never reported as emptiness.
    """
    if not targets:
        raise InvalidArgument("no target sets")
    if eps <= 0:
        raise InvalidArgument("eps must be positive")
    if metric not in ("chordal", "geodesic"):
        raise InvalidArgument(f"unknown metric {metric!r}")
    tl = list(transform_labels) if transform_labels is not None else [t.label for t in targets]
    base = dict(label=label, transforms=tl, epsilon=float(eps), seed=seed, metric=metric, targets=list(targets))
    for cert in certificates:
        text = cert(targets, eps, d)
        if text:
            return EssentialityReport(verdict="certificate-empty", samples=0, certificate=text, **base)

    k = frame.n if frame is not None else d
    embed = (lambda C: C @ frame.columns.T) if frame is not None else (lambda C: C)

    def score(C):
        return _distances(targets, embed(C), metric).max(axis=1)

    used = 0
    best_c, best_s = None, math.inf
    if len(seeds):
        C = np.atleast_2d(np.asarray(seeds))
        if frame is not None:
            C = C @ frame.columns.conj()
        C = C / np.linalg.norm(C, axis=1, keepdims=True)
        s = score(C)
        hit = np.flatnonzero(s < eps)
        if hit.size:
            i = int(hit[0])
            return EssentialityReport(verdict="witness-found", samples=i + 1, witness=embed(C[i]),
                                      best_score=float(s[i]), **base)
        used += len(C)
        best_c, best_s = C[int(np.argmin(s))], float(s.min())

    n_refine = budget // 5 if budget >= 5 * REFINE_ROUNDS else 0
    n_uniform = budget - n_refine
    sizes = [CHUNK] * (n_uniform // CHUNK) + ([n_uniform % CHUNK] if n_uniform % CHUNK else [])
    workers = thread_count()

    def run_chunk(ci: int):
        size = sizes[ci]
        rng = chunk_rng(seed, stream, ci)
        if field == "real":
            G = rng.standard_normal((size, k))
        else:
            raw = rng.standard_normal((size, 2 * k))
            G = raw[:, :k] + 1j * raw[:, k:]
        C = G / np.linalg.norm(G, axis=1, keepdims=True)
        return C, score(C)

    for start in range(0, len(sizes), workers):
        group = range(start, min(start + workers, len(sizes)))
        results = map_chunks(lambda i, _s: run_chunk(start + i), len(group), chunk=1)
        for ci, (C, s) in zip(group, results):
            hit = np.flatnonzero(s < eps)
            if hit.size:
                i = int(hit[0])
                return EssentialityReport(verdict="witness-found", samples=used + i + 1,
                                          witness=embed(C[i]), best_score=float(s[i]), **base)
            used += len(C)
            j = int(np.argmin(s))
            if s[j] < best_s:
                best_c, best_s = C[j], float(s[j])

    radius = REFINE_RADIUS
    per_round = n_refine // REFINE_ROUNDS
    for r in range(REFINE_ROUNDS if best_c is not None and per_round else 0):
        rng = chunk_rng(seed, stream + "-refine", r)
        C = _cap_points(best_c, radius, per_round, rng)
        s = score(C)
        hit = np.flatnonzero(s < eps)
        if hit.size:
            i = int(hit[0])
            return EssentialityReport(verdict="witness-found", samples=used + i + 1, witness=embed(C[i]),
                                      best_score=float(s[i]), **base)
        used += per_round
        j = int(np.argmin(s))
        if s[j] < best_s:
            best_c, best_s = C[j], float(s[j])
        radius /= 2.0
    return EssentialityReport(verdict="inconclusive", samples=used,
                              best_score=None if math.isinf(best_s) else best_s, **base)


def witness_search(A: SphericalSet, transforms: Sequence, eps: float, d: int, budget: int, seed: int,
                   **kwargs) -> EssentialityReport:
    """Search for a common point of O_eps(g A), g in ``transforms``.

    Transforms are :class:`UnitaryAction` isometries (so g(O_eps(A)) and
    O_eps(gA) coincide) or :class:`SymbolicTransform` set maps.
    """
    if not transforms:
        raise InvalidArgument("empty transform family")
    for g in transforms:
        if isinstance(g, UnitaryAction) and g.dim != d:
            raise InvalidArgument(f"transform {g.label} acts on dimension {g.dim}, not {d}")
    targets = [_image(A, g) for g in transforms]
    kwargs.setdefault("label", A.label)
    kwargs.setdefault("transform_labels", [g.label for g in transforms])
    return search_intersection(targets, eps, d, budget, seed, **kwargs)


# --- Leader's example -------------------------------------------------------


@dataclass
class LeaderResult:
    d: int
    eps: float
    A: EssentialityReport
    B: EssentialityReport
    falsification_A: EssentialityReport
    falsification_B: EssentialityReport
    min_mass_max: float  # max over samples of min_i ||p_{E_i} x||^2 (<= 1/3)

    def to_dict(self) -> dict:
        return dict(d=self.d, epsilon=self.eps, threshold=LEADER_THRESHOLD, A=self.A.to_dict(),
                    B=self.B.to_dict(), falsification_A=self.falsification_A.to_dict(),
                    falsification_B=self.falsification_B.to_dict(), min_mass_max=self.min_mass_max)


def leader_sets(d: int):
    """A, B and the transforms phi_i (E -> E_i) and psi_i (E -> complement of E_i).

    E is the even coordinates and E_i the residues mod 3.
    """
    if d < 3 or d % 3:
        raise InvalidArgument("d must be a positive multiple of 3")
    c = math.sqrt(2) / 2
    idx = np.arange(d)
    E = idx[idx % 2 == 0]
    parts = [idx[idx % 3 == i] for i in range(3)]
    A = MaskNormSet(E, c, "ge", label="A")
    B = MaskNormSet(E, c, "le", label="B")
    phis = [SymbolicTransform(E, parts[i], f"phi{i + 1}") for i in range(3)]
    psis = [SymbolicTransform(E, np.setdiff1d(idx, parts[i]), f"psi{i + 1}") for i in range(3)]
    return A, B, phis, psis, parts


def leader_experiment(d: int, eps: float, budget: int = 10**6, seed: int = 0) -> LeaderResult:
    """Both halves of the cover {||p_E x|| >= sqrt2/2}, {<= sqrt2/2} against
    three coordinate bijections each, plus a Monte Carlo falsification run.

    For eps >= sqrt2/2 - sqrt3/3 no certificate is attempted and the verdict
    comes from the witness search alone.
    """
    A, B, phis, psis, parts = leader_sets(d)
    certs = DEFAULT_CERTIFICATES if eps < LEADER_THRESHOLD else ()
    rep_a = witness_search(A, phis, eps, d, budget, seed, certificates=certs)
    rep_b = witness_search(B, psis, eps, d, budget, seed, certificates=certs)
    fal_a = witness_search(A, phis, eps, d, budget, seed, certificates=(), stream="leader-A")
    fal_b = witness_search(B, psis, eps, d, budget, seed, certificates=(), stream="leader-B")
    X = sample_uniform(d, min(budget, 10**5), seed, stream="leader-mass")
    masses = np.column_stack([np.sum(X[:, p] ** 2, axis=1) for p in parts])
    return LeaderResult(d, eps, rep_a, rep_b, fal_a, fal_b, float(masses.min(axis=1).max()))


# --- free group example ------------------------------------------------------


@dataclass
class F2Result:
    R: int
    eps: float
    k: int
    A1: EssentialityReport
    A2: EssentialityReport
    a1_stats: dict
    a2_stats: dict

    def to_dict(self) -> dict:
        return dict(R=self.R, epsilon=self.eps, k=self.k, A1=self.A1.to_dict(), A2=self.A2.to_dict(),
                    a1_stats=self.a1_stats, a2_stats=self.a2_stats)


def _split_sample(inside: np.ndarray, outside: np.ndarray, d: int, m: int, rng, low: float, high: float):
    """Unit vectors with ||p_inside f|| uniform in [low, high], rest on ``outside``."""
    t = rng.uniform(low, high, m)
    U = np.zeros((m, d))
    U[:, inside] = rng.standard_normal((m, inside.size))
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    V = np.zeros((m, d))
    V[:, outside] = rng.standard_normal((m, outside.size))
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return t[:, None] * U + np.sqrt(1 - t**2)[:, None] * V


def f2_experiment(R: int = 6, eps: float = 1 / 12, k: int = 4, samples: int = 10**4, budget: int = 10**5,
                  seed: int = 0) -> F2Result:
    """The cover A1 = {||chi_W0 f|| <= 1/3}, A2 = {>= 1/3} of the sphere of l_2(F_2).

    Vectors live on the ball B_R.  A1 is tested against {e, b}: sampled
    f in A1 supported on B_{R-1} are moved by the regular action of b, and
    ||chi_W0 bf|| >= 2/3 gives dist(bf, A1) >= 1/3, so the eps-neighbourhoods
    are disjoint for eps < 1/6.  A2 is tested against {e, a, ..., a^k}: the
    sets W_{-1}, ..., W_{-k} are disjoint, so some ||chi_W0 a^i f|| <= 1/sqrt(k),
    which certifies disjointness when 1/sqrt(k) < 1/3 - 2 eps.
    """
    if R < 3:
        raise InvalidArgument("R must be at least 3")
    if k < 1:
        raise InvalidArgument("k must be positive")
    words = ball_enumerate(R)
    d = len(words)
    lengths = np.array([len(w) for w in words])
    W = {n: prefix_mask(words, n) for n in range(-R, R + 1)}
    third = 1.0 / 3.0
    A1 = MaskNormSet(W[0], third, "le", label="A1")
    A2 = MaskNormSet(W[0], third, "ge", label="A2")
    rng = chunk_rng(seed, "f2-samples", 0)

    # A1 branch
    b = RegularAction(B_GEN, R)
    inner = np.flatnonzero(lengths <= R - 1)
    w0 = np.intersect1d(inner, W[0])
    rest = np.setdiff1d(inner, W[0])
    F = _split_sample(w0, rest, d, samples, rng, 0.0, third)
    bF = b.apply(F)
    chi_bf = np.linalg.norm(bF[:, W[0]], axis=1)
    chi_rest = np.linalg.norm(F[:, rest], axis=1)
    dist_bf = A1.distance(bF)
    a1_stats = dict(samples=samples, min_chi_w0_bf=float(chi_bf.min()), min_chi_complement_f=float(chi_rest.min()),
                    violations=int(np.sum(chi_bf < 2 / 3)), min_dist_bf_A1=float(dist_bf.min()))
    if eps < 1 / 6:
        cert = (f"||chi_W0 bf|| >= ||chi_(F2-W0) f|| >= 2/3 and h -> ||chi_W0 h|| is 1-Lipschitz, so "
                f"dist(bA1, A1) >= 1/3 > 2*{eps:g}")
        rep1 = EssentialityReport("A1", ["e", "b"], float(eps), "certificate-empty", 0, seed, certificate=cert)
    else:
        binv = B_GEN.inverse()
        bW0 = np.flatnonzero([prefix_class(binv * w) == 0 for w in words])
        bA1 = MaskNormSet(bW0, third, "le", label="b(A1)")
        rep1 = search_intersection([A1, bA1], eps, d, budget, seed, label="A1", transform_labels=["e", "b"],
                                   stream="f2-A1")

    # A2 branch
    shifts = ["e"] + [str(A_GEN ** i) for i in range(1, k + 1)]
    a2_stats: dict = dict(samples=0, pigeonhole_bound=1 / math.sqrt(k))
    if R - k >= 0:
        inner2 = np.flatnonzero(lengths <= R - k)
        w0 = np.intersect1d(inner2, W[0])
        rest = np.setdiff1d(inner2, W[0])
        F2s = _split_sample(w0, rest, d, samples, rng, third, 1.0) if rest.size else None
        if F2s is not None:
            acts = [RegularAction(A_GEN ** i, R) for i in range(1, k + 1)]
            mins = np.min(np.column_stack([np.linalg.norm(g.apply(F2s)[:, W[0]], axis=1) for g in acts]), axis=1)
            a2_stats.update(samples=samples, max_min_chi_w0_aif=float(mins.max()),
                            violations=int(np.sum(mins > 1 / math.sqrt(k) + 1e-12)))
    if 1 / math.sqrt(k) < third - 2 * eps:
        cert = (f"W_-1..W_-{k} are disjoint, so min_i ||chi_W0 a^i f|| <= 1/sqrt({k}) < 1/3 - 2*{eps:g}; "
                f"hence O_eps(A2) and O_eps(a^i A2) are disjoint for that i")
        rep2 = EssentialityReport("A2", shifts, float(eps), "certificate-empty", 0, seed, certificate=cert)
    else:
        if R < k:
            raise InvalidArgument(f"R = {R} is too small to represent the shifts a^1..a^{k}")
        targets = [A2] + [MaskNormSet(W[i], third, "ge", label=f"a^{i}(A2)") for i in range(1, k + 1)]
        # equal mass on a^0..a^k: a structured candidate alongside random search
        spread = np.zeros(d)
        index = {w: i for i, w in enumerate(words)}
        for i in range(k + 1):
            spread[index[A_GEN ** i]] = 1.0
        rep2 = search_intersection(targets, eps, d, budget, seed, label="A2", transform_labels=shifts,
                                   seeds=[spread / np.linalg.norm(spread)], stream="f2-A2")
    return F2Result(R, float(eps), k, rep1, rep2, a1_stats, a2_stats)


# --- direct sums ---------------------------------------------------------------


HALF = math.sqrt(2) / 2


@dataclass
class LiftedSet(SphericalSet):
    """{x in S(H1 + H2) : ||pi_j x|| >= sqrt2/2 and pi_j x / ||pi_j x|| in A}."""

    base: SphericalSet
    j: int
    d1: int
    d2: int
    label: str = "lift"

    has_distance = False

    def _block(self, X):
        X = np.atleast_2d(X)
        if X.shape[1] != self.d1 + self.d2:
            raise InvalidArgument(f"expected dimension {self.d1 + self.d2}, got {X.shape[1]}")
        return X[:, :self.d1] if self.j == 1 else X[:, self.d1:]

    def contains(self, X):
        P = self._block(X)
        norms = np.linalg.norm(P, axis=1)
        ok = norms >= HALF
        out = np.zeros(P.shape[0], dtype=bool)
        if ok.any():
            out[ok] = self.base.contains(P[ok] / norms[ok, None])
        return out


def lift_cover(cover1: Cover, d1: int, d2: int, cover2: Cover | None = None) -> Cover:
    """Lift covers of S(H1) (and optionally S(H2)) to S(H1 + H2)."""
    if d1 < 1 or d2 < 0:
        raise InvalidArgument("need d1 >= 1 and d2 >= 0")
    sets: list[SphericalSet] = [LiftedSet(A, 1, d1, d2, label=f"~{A.label}") for A in cover1]
    if cover2 is not None:
        if d2 < 1:
            raise InvalidArgument("a second cover needs d2 >= 1")
        sets += [LiftedSet(A, 2, d1, d2, label=f"~{A.label}'") for A in cover2]
    return Cover(sets)


@dataclass
class LiftMarginCheck:
    samples: int
    delta: float
    eps: float
    violations: int
    worst_angle: float  # max geodesic move of the normalized projection


def lift_margin_check(d1: int, d2: int, delta: float, eps: float, m: int, seed: int, j: int = 1) -> LiftMarginCheck:
    """Moving a point y with ||pi_j y|| >= sqrt2/2 by less than ``delta``
    (geodesic) moves pi_j y / ||pi_j y|| by less than ``eps`` when
    delta < min(eps/3, pi/8); that is what keeps lifted sets inessential."""
    if not delta < min(eps / 3, math.pi / 8):
        raise InvalidArgument("delta must be below min(eps/3, pi/8)")
    d = d1 + d2
    rng = chunk_rng(seed, "lift-margin", 0)
    Y = sample_uniform(d, 2 * m + 64, seed, stream="lift-margin")

    def block(X):
        return X[:, :d1] if j == 1 else X[:, d1:]

    Y = Y[np.linalg.norm(block(Y), axis=1) >= HALF][:m]
    X = np.vstack([_cap_points(y, delta, 1, rng)[0] for y in Y])
    py, px = block(Y), block(X)
    ny, nx = np.linalg.norm(py, axis=1), np.linalg.norm(px, axis=1)
    ang = chordal_to_geodesic(np.linalg.norm(py / ny[:, None] - px / nx[:, None], axis=1))
    return LiftMarginCheck(len(Y), delta, eps, int(np.sum(ang >= eps)), float(ang.max(initial=0.0)))


# --- scanning a cover ---------------------------------------------------------------


def essential_element_scan(cover: Cover, transforms: Sequence, eps: float, d: int, budget: int, seed: int,
                           **kwargs) -> list[tuple[SphericalSet, EssentialityReport]]:
    """Witness search for every element of ``cover`` against one finite family.

    Flags which elements look essential for this family only; says nothing
    about the concentration property, which quantifies over all covers.
    """
    out = []
    for i, A in enumerate(cover):
        rep = witness_search(A, transforms, eps, d, budget, seed, stream=f"scan-{i}", **kwargs)
        out.append((A, rep))
    return out
