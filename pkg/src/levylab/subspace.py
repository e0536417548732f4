"""Pairs of equal-rank orthogonal projections: principal angles, aligned
rank-one decompositions, the frame-to-frame isometry, and proximity mass."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, RankDeficientError
from .sphere import LEVY_C1, sample_uniform

ORTHO_TOL = 1e-10
SPECTRAL_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Frame:
    """Orthonormal columns F (d x n); P = F F^H is the induced projection."""

    columns: np.ndarray

    def __post_init__(self):
        F = np.asarray(self.columns)
        if F.ndim != 2 or F.shape[1] == 0:
            raise InvalidArgument("a frame is a d x n array with n >= 1")
        if not np.iscomplexobj(F):
            F = F.astype(float)
        gram = F.conj().T @ F
        if np.abs(gram - np.eye(F.shape[1])).max() > ORTHO_TOL:
            raise InvalidArgument("frame columns are not orthonormal")
        object.__setattr__(self, "columns", F)

    @property
    def d(self) -> int:
        return self.columns.shape[0]

    @property
    def n(self) -> int:
        return self.columns.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.columns) else "real"

    @property
    def projection(self) -> np.ndarray:
        return self.columns @ self.columns.conj().T

    @classmethod
    def coordinate(cls, d: int, indices) -> "Frame":
        F = np.zeros((d, len(indices)))
        F[list(indices), np.arange(len(indices))] = 1.0
        return cls(F)

    def to_csv(self) -> str:
        """Header line ``d,n,field`` then one row per column vector (column-major)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "n", "field"])
        w.writerow([self.d, self.n, self.field])
        for col in self.columns.T:
            w.writerow([_fmt(v) for v in col])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Frame":
        rows = list(csv.reader(io.StringIO(text)))
        if len(rows) < 2 or rows[0] != ["d", "n", "field"]:
            raise InvalidArgument("frame CSV must start with the header d,n,field")
        d, n, field = int(rows[1][0]), int(rows[1][1]), rows[1][2]
        conv = complex if field == "complex" else float
        cols = [[conv(v) for v in r] for r in rows[2:]]
        if len(cols) != n or any(len(c) != d for c in cols):
            raise InvalidArgument("frame CSV body does not match its header")
        return cls(np.array(cols, dtype=complex if field == "complex" else float).T)


def _fmt(v) -> str:
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v)).strip("()")
    return repr(float(v))


def orthonormalize(vectors) -> Frame:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    ``vectors`` is a sequence of d-vectors (or a d x n array of columns).
    Raises :class:`RankDeficientError` naming the first vector that falls in
    the span of its predecessors (smallest singular value <= 1e-8 x largest).
    """
    V = _as_columns(vectors)
    s = np.linalg.svd(V, compute_uv=False)
    if s[0] == 0 or s[-1] <= 1e-8 * s[0]:
        for k in range(1, V.shape[1] + 1):
            sk = np.linalg.svd(V[:, :k], compute_uv=False)
            if sk[0] == 0 or sk[-1] <= 1e-8 * sk[0]:
                raise RankDeficientError(k - 1)
    Q = V.copy()
    for k in range(Q.shape[1]):
        for _ in range(2):
            for j in range(k):
                Q[:, k] -= (Q[:, j].conj() @ Q[:, k]) * Q[:, j]
        Q[:, k] /= np.linalg.norm(Q[:, k])
    return Frame(Q)


def _as_columns(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        V = vectors
    else:
        V = np.column_stack([np.asarray(v) for v in vectors])
    return V.astype(complex) if np.iscomplexobj(V) else V.astype(float)


def random_frame(d: int, n: int, rng: np.random.Generator, field: str = "real") -> Frame:
    G = rng.standard_normal((d, n))
    if field == "complex":
        G = G + 1j * rng.standard_normal((d, n))
    Q, _ = np.linalg.qr(G)
    return Frame(Q)


def _same_ambient(F1: Frame, F2: Frame):
    if F1.d != F2.d:
        raise InvalidArgument(f"ambient dimension mismatch: {F1.d} vs {F2.d}")


def _same_rank(F1: Frame, F2: Frame):
    _same_ambient(F1, F2)
    if F1.n != F2.n:
        raise InvalidArgument(f"rank mismatch: {F1.n} vs {F2.n}")


def trace_norm(M) -> float:
    return float(np.linalg.svd(np.asarray(M), compute_uv=False).sum())


def trace_distance(F1: Frame, F2: Frame) -> float:
    """||P1 - P2||_1, the sum of singular values of the difference."""
    _same_ambient(F1, F2)
    return trace_norm(F1.projection - F2.projection)


@dataclass(frozen=True, eq=False)
class PrincipalAngleDecomposition:
    angles: np.ndarray        # nondecreasing, in [0, pi/2]
    left: np.ndarray          # d x n, column i spans e_1^i (unit vectors of range P1)
    right: np.ndarray         # d x n, column i spans e_2^i
    pair_vectors: np.ndarray  # d x n, column i is x_i^+
    source: Frame
    target: Frame
    # frame coordinates of left/right: left = F1 @ U, right = F2 @ V
    U: np.ndarray
    V: np.ndarray

    @property
    def cosines(self) -> np.ndarray:
        return np.cos(self.angles)

    def predicted_spectrum(self) -> np.ndarray:
        """{1 + cos t_i} and {1 - cos t_i}, sorted descending."""
        c = self.cosines
        return np.sort(np.concatenate([1 + c, 1 - c]))[::-1]

    def residuals(self) -> dict:
        c = self.cosines
        return dict(
            left_orthonormality=float(np.abs(self.left.conj().T @ self.left - np.eye(len(c))).max()),
            right_orthonormality=float(np.abs(self.right.conj().T @ self.right - np.eye(len(c))).max()),
            cross=float(np.abs(self.left.conj().T @ self.right - np.diag(c)).max()),
            spectrum=spectrum_discrepancy(self),
        )

    def to_json(self) -> str:
        return json.dumps(dict(angles=[float(t) for t in self.angles], residuals=self.residuals()), indent=2)


def principal_angles(F1: Frame, F2: Frame) -> PrincipalAngleDecomposition:
    """Principal angles from the SVD of F1^H F2 (cosines clamped to [0, 1])."""
    _same_rank(F1, F2)
    U, s, Vh = np.linalg.svd(F1.columns.conj().T @ F2.columns)
    V = Vh.conj().T
    cos = np.clip(s, 0.0, 1.0)
    angles = np.arccos(cos)
    left = F1.columns @ U
    right = F2.columns @ V
    # <left_i, right_i> = s_i >= 0, so the sum bisects the pair
    plus = left + right
    plus = plus / np.linalg.norm(plus, axis=0, keepdims=True)
    return PrincipalAngleDecomposition(angles, left, right, plus, F1, F2, U, V)


def spectrum_discrepancy(pad: PrincipalAngleDecomposition) -> float:
    """Max gap between the eigenvalues of P1 + P2 and {1 +- cos t_i} padded with zeros."""
    P = pad.source.projection + pad.target.projection
    eig = np.sort(np.linalg.eigvalsh(P))[::-1]
    pred = pad.predicted_spectrum()
    d = eig.size
    if pred.size < d:
        pred = np.concatenate([pred, np.zeros(d - pred.size)])
    else:
        # d < 2n: the dropped predictions are the 1 - cos 0 = 0 of shared directions
        pred = pred[:d]
    return float(np.abs(eig - pred).max())


@dataclass(frozen=True, eq=False)
class AlignedFrames:
    first: np.ndarray   # d x n, column i spans e_1^i
    second: np.ndarray  # d x n, column i spans e_2^i

    def cross_residual(self) -> float:
        """max |<e_j^i, e_k^m>| over i != m, j, k in {1, 2}."""
        n = self.first.shape[1]
        off = ~np.eye(n, dtype=bool)
        worst = 0.0
        for A in (self.first, self.second):
            for B in (self.first, self.second):
                worst = max(worst, float(np.abs(A.conj().T @ B)[off].max(initial=0.0)))
        return worst

    def joins(self) -> tuple[np.ndarray, np.ndarray]:
        return self.first @ self.first.conj().T, self.second @ self.second.conj().T


def aligned_frames(pad: PrincipalAngleDecomposition) -> AlignedFrames:
    """Rank-one pieces e_j^i spanned by P_j x_i^+.

    P_1 x_i^+ is a positive multiple of ``left[:, i]`` (and P_2 x_i^+ of
    ``right[:, i]``) whenever cos t_i > 0.  At t_i = pi/2 the SVD still returns
    an orthonormal ``right`` column orthogonal to every other chosen direction,
    which is the fallback choice.
    """
    return AlignedFrames(pad.left.copy(), pad.right.copy())


@dataclass(frozen=True, eq=False)
class IsometryMap:
    """r : range(P1) -> range(P2); ``matrix`` maps F1-coordinates to F2-coordinates."""

    matrix: np.ndarray
    source: Frame
    target: Frame

    def apply(self, X):
        """Apply r to ambient vectors lying in range(P1)."""
        X = np.asarray(X)
        return (X @ self.source.columns.conj()) @ self.matrix.T @ self.target.columns.T

    def unitarity_residual(self) -> float:
        M = self.matrix
        return float(np.abs(M.conj().T @ M - np.eye(M.shape[0])).max())


def build_isometry(F1: Frame, F2: Frame) -> IsometryMap:
    """Direct sum of the reflections across span(x_i^+): sends e_1^i onto e_2^i.

    With F1^H F2 = U S V^H this is x = F1 U c -> F2 V c, i.e. the matrix V U^H.
    """
    pad = principal_angles(F1, F2)
    return IsometryMap(pad.V @ pad.U.conj().T, F1, F2)


@dataclass
class IsometryBoundCheck:
    samples: int
    violations: int
    sphere_violations: int
    worst_ratio: float  # max ||r(x) - x|| / (sqrt 2 dist(x, H2)); <= 1 expected


def isometry_bound_check(F1: Frame, F2: Frame, m: int, seed: int) -> IsometryBoundCheck:
    """Check ||r(x) - x|| <= sqrt(2) dist(x, H2) <= sqrt(2) dist(x, S2) on uniform x in S1."""
    r = build_isometry(F1, F2)
    X = sample_uniform(F1.n, m, seed, F1.field, stream="isometry-check") @ F1.columns.T
    moved = np.linalg.norm(r.apply(X) - X, axis=1)
    P2X = X @ F2.projection.T
    to_space = np.linalg.norm(X - P2X, axis=1)
    p_norm = np.linalg.norm(P2X, axis=1)
    safe = np.where(p_norm > 0, p_norm, 1.0)[:, None]
    to_sphere = np.where(p_norm > 0, np.linalg.norm(X - P2X / safe, axis=1), math.sqrt(2.0))
    bound = math.sqrt(2.0) * to_space
    slack = 1e-12
    viol = moved > bound + slack
    sphere_viol = to_space > to_sphere + slack
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, moved / np.where(bound > 0, bound, 1.0), 0.0)
    return IsometryBoundCheck(m, int(viol.sum()), int(sphere_viol.sum()), float(ratio.max()))


@dataclass
class ProximityMass:
    estimate: float
    stderr: float
    samples: int
    seed: int
    rank: int
    eps: float
    reference_bound: float  # 1 - sqrt(pi/8) exp(-eps^2 n / 8)
    trace_condition: bool   # ||P1 - P2||_1 < n eps
    side_condition: bool    # n < sqrt(pi/8) exp(-eps^2 (n - 1) / 2)

    @property
    def bound_applies(self) -> bool:
        return self.trace_condition and self.side_condition


def proximity_bound(n: int, eps: float) -> float:
    return 1.0 - LEVY_C1 * math.exp(-eps * eps * n / 8.0)


def proximity_mass(F1: Frame, F2: Frame, eps: float, m: int, seed: int) -> ProximityMass:
    """Monte Carlo estimate of mu{x in S1 : ||x - P2 x|| < eps}.

    The reference bound is reported alongside but not asserted: its side
    condition on n fails for every n >= 1.
    """
    _same_rank(F1, F2)
    n = F1.n
    X = sample_uniform(n, m, seed, F1.field, stream="proximity") @ F1.columns.T
    gap = np.linalg.norm(X - X @ F2.projection.T, axis=1)
    p = float(np.mean(gap < eps))
    return ProximityMass(
        estimate=p,
        stderr=math.sqrt(p * (1 - p) / m),
        samples=m,
        seed=seed,
        rank=n,
        eps=eps,
        reference_bound=proximity_bound(n, eps),
        trace_condition=trace_distance(F1, F2) < n * eps,
        side_condition=n < LEVY_C1 * math.exp(-0.5 * eps * eps * (n - 1)),
    )


def tilted_pair(n: int, theta: float) -> tuple[Frame, Frame]:
    """Frames in R^{2n} whose principal angles all equal ``theta``."""
    F1 = np.zeros((2 * n, n))
    F1[np.arange(n), np.arange(n)] = 1.0
    F2 = np.zeros((2 * n, n))
    F2[np.arange(n), np.arange(n)] = math.cos(theta)
    F2[n + np.arange(n), np.arange(n)] = math.sin(theta)
    return Frame(F1), Frame(F2)
