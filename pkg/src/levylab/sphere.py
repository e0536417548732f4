"""Uniform measure and concentration on finite-dimensional spheres.

Points of S^{d-1} are plain numpy arrays (real or complex) of unit norm; batches
are arrays of shape ``(m, d)``.  Neighbourhoods here are geodesic.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._parallel import chunk_rng, map_chunks
from .errors import InvalidArgument

LEVY_C1 = math.sqrt(math.pi / 8)
LEVY_C2 = 0.5

CURVE_HEADER = ("epsilon", "alpha", "provenance", "n", "samples", "seed")
PROVENANCES = ("exact-cap", "empirical", "levy-bound")


def unit_vector(coords) -> np.ndarray:
    """Validate and return ``coords`` as a unit vector (norm 1 within 1e-12)."""
    x = np.asarray(coords)
    if x.ndim != 1 or x.size == 0:
        raise InvalidArgument("a unit vector is a non-empty 1-d array")
    if not np.issubdtype(x.dtype, np.complexfloating):
        x = x.astype(float)
    if abs(np.linalg.norm(x) - 1.0) > 1e-12:
        raise InvalidArgument(f"vector has norm {np.linalg.norm(x)!r}, expected 1")
    return x


def sample_uniform(d: int, m: int, seed: int, field: str = "real", stream: str = "uniform") -> np.ndarray:
    """Draw ``m`` i.i.d. uniform points of the unit sphere in R^d or C^d.

    Normalized standard Gaussians.  A complex sphere of complex dimension d is
    the real sphere S^{2d-1}, so its coordinates come from 2d real Gaussians.
    """
    if d < 1 or m < 1:
        raise InvalidArgument(f"need d >= 1 and m >= 1, got d={d}, m={m}")
    if field not in ("real", "complex"):
        raise InvalidArgument(f"unknown field {field!r}")

    def draw(chunk: int, size: int) -> np.ndarray:
        rng = chunk_rng(seed, stream, chunk)
        if field == "real":
            g = rng.standard_normal((size, d))
        else:
            raw = rng.standard_normal((size, 2 * d))
            g = raw[:, :d] + 1j * raw[:, d:]
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    return np.concatenate(map_chunks(draw, m))


def real_inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise InvalidArgument(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return np.real(np.sum(x * np.conj(y), axis=-1))


def geodesic_distance(x, y):
    """Great-circle distance arccos(Re<x, y>) in [0, pi]; broadcasts over leading axes."""
    c = np.clip(real_inner(x, y), -1.0, 1.0)
    out = np.arccos(c)
    return float(out) if np.ndim(out) == 0 else out


def chordal_to_geodesic(chord):
    return 2.0 * np.arcsin(np.clip(np.asarray(chord) / 2.0, 0.0, 1.0))


def geodesic_to_chordal(angle):
    return 2.0 * np.sin(np.clip(np.asarray(angle), 0.0, math.pi) / 2.0)


def levy_bound(n: int, eps):
    """sqrt(pi/8) * exp(-eps^2 n / 2): the normal Levy bound for alpha of S^{n+1}."""
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    e = np.asarray(eps, dtype=float)
    if np.any(e < 0):
        raise InvalidArgument("eps must be nonnegative")
    out = LEVY_C1 * np.exp(-LEVY_C2 * e * e * n)
    return float(out) if out.ndim == 0 else out


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], a, b, abs_tol: float = 1e-10,
                     rel_tol: float = 1e-11, min_depth: int = 3, max_depth: int = 50) -> np.ndarray:
    """Integrate the vectorized ``f`` over each interval ``[a[i], b[i]]``.

    Batched adaptive Simpson.  Each integral gets the error budget
    ``min(abs_tol, rel_tol * |coarse estimate|)`` (coarse = 128-panel composite
    Simpson), so tiny integrals keep their relative accuracy; the budget is
    halved on every split.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    total = np.zeros(a.shape)
    lo, hi = a.ravel().copy(), b.ravel().copy()
    owner = np.arange(lo.size)
    mid = 0.5 * (lo + hi)
    flo, fmid, fhi = f(lo), f(mid), f(hi)
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    panels = np.linspace(0.0, 1.0, 257)
    pts = lo[:, None] + (hi - lo)[:, None] * panels[None, :]
    fp = f(pts.ravel()).reshape(pts.shape)
    coarse = (hi - lo) / 768.0 * (fp[:, 0] + fp[:, -1] + 4.0 * fp[:, 1::2].sum(1) + 2.0 * fp[:, 2:-1:2].sum(1))
    tol = np.maximum(np.minimum(abs_tol, rel_tol * np.abs(coarse)), 1e-300)
    flat = total.ravel()
    depth = 0
    while lo.size:
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        refined = left + right
        err = refined - whole
        done = (np.abs(err) <= 15.0 * tol) & (depth >= min_depth)
        if depth >= max_depth:
            done[:] = True
        np.add.at(flat, owner[done], refined[done] + err[done] / 15.0)
        keep = ~done
        lo, mid, hi, lm, rm = lo[keep], mid[keep], hi[keep], lm[keep], rm[keep]
        flo, fmid, fhi, flm, frm = flo[keep], fmid[keep], fhi[keep], flm[keep], frm[keep]
        left, right, tol, owner = left[keep], right[keep], tol[keep] / 2.0, owner[keep]
        # children: [lo, mid] with midpoint lm, [mid, hi] with midpoint rm
        lo, mid, hi = np.concatenate([lo, mid]), np.concatenate([lm, rm]), np.concatenate([mid, hi])
        flo, fmid, fhi = np.concatenate([flo, fmid]), np.concatenate([flm, frm]), np.concatenate([fmid, fhi])
        whole = np.concatenate([left, right])
        tol = np.concatenate([tol, tol])
        owner = np.concatenate([owner, owner])
        depth += 1
    return total


def cap_alpha_exact(n: int, eps):
    """Concentration function of S^n at geodesic radius ``eps`` (0 <= eps <= pi/2).

    With J(theta) = int_0^theta sin^{n-1} t dt, the value is
    1 - J(pi/2 + eps) / J(pi).  The tail int_{pi/2+eps}^{pi} is evaluated as
    int_0^{pi/2-eps} (same integrand by symmetry) so small values keep
    relative precision.
    """
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    e = np.asarray(eps, dtype=float)
    if np.any(e < 0) or np.any(e > math.pi / 2) or np.any(np.isnan(e)):
        raise InvalidArgument("eps must lie in [0, pi/2]")
    power = n - 1

    def integrand(t):
        return np.sin(t) ** power

    uppers = math.pi / 2 - e.ravel()
    ends = np.concatenate([[math.pi / 2], uppers])
    vals = adaptive_simpson(integrand, np.zeros(ends.size), ends)
    half = vals[0]
    out = (vals[1:] / (2.0 * half)).reshape(e.shape)
    return float(out) if out.ndim == 0 else out


@dataclass
class EmpiricalAlpha:
    mu_set: float
    mu_neighborhood: float
    alpha: float
    stderr_set: float
    stderr_neighborhood: float
    samples: int
    seed: int
    lower_bound: bool

    @property
    def stderr(self) -> float:
        return self.stderr_neighborhood


def _stderr(p: float, m: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / m)


def empirical_alpha(A, d: int, eps: float, m: int, seed: int, field: str = "real",
                    metric: str = "geodesic") -> EmpiricalAlpha:
    """Monte Carlo estimate of mu(A), mu(O_eps(A)) and alpha_hat = 1 - mu(O_eps(A)).

    ``A`` needs ``contains`` and ``distance`` (chordal) methods, e.g. a
    :class:`levylab.sets.SphericalSet`.  When mu(A) >= 1/2, alpha_hat estimates
    a lower bound on the concentration function of S^{d-1}; otherwise the
    result is flagged with ``lower_bound=False``.
    """
    if eps < 0:
        raise InvalidArgument("eps must be nonnegative")
    X = sample_uniform(d, m, seed, field, stream="empirical-alpha")
    inside = np.asarray(A.contains(X), dtype=bool)
    near = _within(A.distance(X), eps, metric)
    mu_a = float(inside.mean())
    mu_o = float(near.mean())
    return EmpiricalAlpha(mu_a, mu_o, 1.0 - mu_o, _stderr(mu_a, m), _stderr(mu_o, m), m, seed,
                          lower_bound=mu_a >= 0.5)


def _within(chord, eps, metric):
    chord = np.asarray(chord, dtype=float)
    if metric == "geodesic":
        return chordal_to_geodesic(chord) < eps
    if metric == "chordal":
        return chord < eps
    raise InvalidArgument(f"unknown metric {metric!r}")


def quadratic_functional(T, xi):
    """f_T(xi) = (T xi, xi), inner product linear in the first slot."""
    T = np.asarray(T)
    xi = np.asarray(xi)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise InvalidArgument("T must be a square matrix")
    if xi.shape[-1] != T.shape[0]:
        raise InvalidArgument(f"dimension mismatch: T is {T.shape[0]}x{T.shape[0]}, vector has {xi.shape[-1]}")
    Txi = xi @ T.T
    out = np.sum(Txi * np.conj(xi), axis=-1)
    if not np.iscomplexobj(out):
        out = out.astype(float)
    return out.item() if out.ndim == 0 else out


def mask_norm_functional(S: Sequence[int], f):
    """z_S(f) = sum over i in S of |f_i|^2."""
    f = np.asarray(f)
    d = f.shape[-1]
    idx = np.asarray(list(S), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise InvalidArgument(f"index out of range for dimension {d}")
    out = np.sum(np.abs(f[..., idx]) ** 2, axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass
class LipschitzCheck:
    pairs: int
    violations: int
    constant: float
    worst_ratio: float  # max |f(x)-f(y)| / (constant * |x-y|); <= 1 means no violation


def _lipschitz(fx, fy, X, Y, constant) -> LipschitzCheck:
    gap = np.abs(np.asarray(fx) - np.asarray(fy))
    dist = np.linalg.norm(np.asarray(X) - np.asarray(Y), axis=-1)
    bound = constant * dist
    # rounding slack only; the inequalities are exact
    viol = gap > bound + 1e-12 * (1.0 + bound)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, gap / np.where(bound > 0, bound, 1.0), 0.0)
    return LipschitzCheck(int(gap.size), int(viol.sum()), float(constant), float(ratio.max(initial=0.0)))


def check_quadratic_lipschitz(T, X, Y) -> LipschitzCheck:
    """Test |f_T(x) - f_T(y)| <= 2 ||T|| ||x - y|| on the rows of X, Y."""
    T = np.asarray(T)
    op_norm = float(np.linalg.svd(T, compute_uv=False)[0]) if T.size else 0.0
    return _lipschitz(quadratic_functional(T, X), quadratic_functional(T, Y), X, Y, 2.0 * op_norm)


def check_mask_lipschitz(S: Sequence[int], X, Y) -> LipschitzCheck:
    """Test |z_S(x) - z_S(y)| <= 2 ||x - y|| on the rows of X, Y."""
    return _lipschitz(mask_norm_functional(S, X), mask_norm_functional(S, Y), X, Y, 2.0)


@dataclass(frozen=True)
class ConcentrationCurve:
    epsilon: tuple[float, ...]
    alpha: tuple[float, ...]
    provenance: str
    n: int
    samples: int | None = None
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "epsilon", tuple(float(e) for e in self.epsilon))
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        if self.provenance not in PROVENANCES:
            raise InvalidArgument(f"unknown provenance {self.provenance!r}")
        if len(self.epsilon) != len(self.alpha):
            raise InvalidArgument("epsilon and alpha lengths differ")
        if any(b < a for a, b in zip(self.epsilon, self.epsilon[1:])) or any(e < 0 for e in self.epsilon):
            raise InvalidArgument("epsilon grid must be nonnegative and increasing")
        if any(not 0.0 <= a <= 1.0 for a in self.alpha):
            raise InvalidArgument("alpha values must lie in [0, 1]")
        if any(b > a + 1e-9 for a, b in zip(self.alpha, self.alpha[1:])):
            raise InvalidArgument("alpha must be nonincreasing in epsilon")
        if self.provenance == "exact-cap" and self.epsilon and self.epsilon[0] == 0.0 and self.alpha[0] != 0.5:
            raise InvalidArgument("exact concentration function must equal 1/2 at epsilon = 0")
        if self.provenance == "empirical" and (self.samples is None or self.seed is None):
            raise InvalidArgument("empirical curves record samples and seed")

    def rows(self) -> list[dict]:
        return [dict(epsilon=e, alpha=a, provenance=self.provenance, n=self.n,
                     samples=self.samples, seed=self.seed) for e, a in zip(self.epsilon, self.alpha)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CURVE_HEADER)
        for r in self.rows():
            w.writerow([repr(r["epsilon"]), repr(r["alpha"]), r["provenance"], r["n"],
                        "" if r["samples"] is None else r["samples"], "" if r["seed"] is None else r["seed"]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConcentrationCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            raise InvalidArgument("empty curve")
        first = rows[0]
        return cls(tuple(float(r["epsilon"]) for r in rows), tuple(float(r["alpha"]) for r in rows),
                   first["provenance"], int(first["n"]),
                   int(first["samples"]) if first["samples"] else None,
                   int(first["seed"]) if first["seed"] else None)

    def to_dict(self) -> dict:
        return dict(epsilon=list(self.epsilon), alpha=list(self.alpha), provenance=self.provenance,
                    n=self.n, samples=self.samples, seed=self.seed)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ConcentrationCurve":
        obj = json.loads(text)
        return cls(tuple(obj["epsilon"]), tuple(obj["alpha"]), obj["provenance"], obj["n"],
                   obj.get("samples"), obj.get("seed"))


def exact_curve(n: int, grid: Sequence[float]) -> ConcentrationCurve:
    return ConcentrationCurve(tuple(grid), tuple(np.atleast_1d(cap_alpha_exact(n, np.asarray(grid)))),
                              "exact-cap", n)


def levy_curve(n: int, grid: Sequence[float]) -> ConcentrationCurve:
    """Levy bound curve; ``n`` is the bound's parameter, so it bounds S^{n+1}."""
    vals = np.minimum(np.atleast_1d(levy_bound(n, np.asarray(grid))), 1.0)
    return ConcentrationCurve(tuple(grid), tuple(vals), "levy-bound", n)


def empirical_curve(d: int, grid: Sequence[float], m: int, seed: int) -> ConcentrationCurve:
    """Hemisphere-based estimate of the concentration function of S^{d-1}.

    One sample set is shared by all radii, so the curve is monotone.
    """
    grid = np.asarray(grid, dtype=float)
    X = sample_uniform(d, m, seed, stream="empirical-alpha")
    # angle below the equator x_1 = 0 for points outside {x_1 >= 0}
    depth = np.arcsin(np.clip(-np.real(X[:, 0]), 0.0, 1.0))
    alpha = [float(np.mean(depth >= e)) if e > 0 else float(np.mean(depth > 0)) for e in grid]
    return ConcentrationCurve(tuple(grid), tuple(alpha), "empirical", d - 1, samples=m, seed=seed)
