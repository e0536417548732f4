"""Free group F_2, finite permutations, and unitary actions on coordinate spaces."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument, ResourceLimitError, SupportViolationError

# letters: a = 1, a^-1 = -1, b = 2, b^-1 = -2
_CHARS = {1: "a", -1: "A", 2: "b", -2: "B"}
_CODES = {c: k for k, c in _CHARS.items()}
_RANK = {1: 0, -1: 1, 2: 2, -2: 3}
LETTERS = (1, -1, 2, -2)
BALL_LIMIT = 10


@dataclass(frozen=True)
class ReducedWord:
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        for i, x in enumerate(self.letters):
            if x not in _CHARS:
                raise InvalidArgument(f"bad letter {x!r}")
            if i and self.letters[i - 1] == -x:
                raise InvalidArgument(f"word not freely reduced at position {i}")

    @classmethod
    def reduce(cls, letters: Iterable[int]) -> "ReducedWord":
        out: list[int] = []
        for x in letters:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "ReducedWord":
        """Parse a string over a, A, b, B (capitals are inverses); 'e' or '' is the identity."""
        text = text.strip()
        if text in ("", "e", "1"):
            return cls()
        try:
            return cls.reduce(_CODES[c] for c in text)
        except KeyError as exc:
            raise InvalidArgument(f"bad letter {exc.args[0]!r} in {text!r}") from None

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        left, right = list(self.letters), list(other.letters)
        while left and right and left[-1] == -right[0]:
            left.pop()
            right.pop(0)
        return ReducedWord(tuple(left + right))

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-x for x in reversed(self.letters)))

    def __pow__(self, k: int) -> "ReducedWord":
        base = self if k >= 0 else self.inverse()
        out = ReducedWord()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return "".join(_CHARS[x] for x in self.letters) or "e"

    def sort_key(self):
        return (len(self.letters), tuple(_RANK[x] for x in self.letters))


IDENTITY = ReducedWord()
A_GEN = ReducedWord((1,))
B_GEN = ReducedWord((2,))


def word_multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    return u * v


def word_invert(u: ReducedWord) -> ReducedWord:
    return u.inverse()


@lru_cache(maxsize=None)
def _ball(R: int) -> tuple[ReducedWord, ...]:
    layer = [IDENTITY]
    out = [IDENTITY]
    for _ in range(R):
        layer = [ReducedWord(w.letters + (x,)) for w in layer for x in LETTERS
                 if not (w.letters and w.letters[-1] == -x)]
        out.extend(layer)
    return tuple(out)


def ball_enumerate(R: int, limit: int = BALL_LIMIT) -> list[ReducedWord]:
    """All reduced words of length <= R, ordered by length then lexicographically
    in a < a^-1 < b < b^-1.  There are 2 * 3**R - 1 of them."""
    if R < 0:
        raise InvalidArgument("radius must be nonnegative")
    if R > limit:
        raise ResourceLimitError(f"ball radius {R} exceeds the configured limit {limit}")
    return list(_ball(R))


def ball_size(R: int) -> int:
    return 2 * 3**R - 1


def prefix_class(w: ReducedWord) -> int:
    """The n with w in W_n: signed length of the maximal initial run of a or a^-1.

    Words that are empty or start with b^{+-1} are in W_0.
    """
    if not w.letters or abs(w.letters[0]) != 1:
        return 0
    first = w.letters[0]
    run = 0
    for x in w.letters:
        if x != first:
            break
        run += 1
    return run * first


def prefix_mask(words: Sequence[ReducedWord], n: int) -> np.ndarray:
    """Indices of ``words`` lying in W_n."""
    return np.array([i for i, w in enumerate(words) if prefix_class(w) == n], dtype=int)


# --- permutations ---------------------------------------------------------


@dataclass(frozen=True)
class Permutation:
    """Bijection of {1..n}; ``images[i - 1]`` is the image of i."""

    images: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(int(x) for x in self.images))
        if sorted(self.images) != list(range(1, len(self.images) + 1)):
            raise InvalidArgument(f"not a bijection of 1..{len(self.images)}: {self.images}")

    @classmethod
    def parse(cls, text: str) -> "Permutation":
        try:
            return cls(tuple(int(t) for t in text.split()))
        except ValueError:
            raise InvalidArgument(f"bad permutation {text!r}") from None

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "Permutation") -> "Permutation":
        # (s * t)(i) = s(t(i))
        if self.degree != other.degree:
            raise InvalidArgument("degree mismatch")
        return Permutation(tuple(self.images[j - 1] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Permutation(tuple(inv))

    def __str__(self):
        return " ".join(map(str, self.images))


def hamming(s: Permutation, t: Permutation) -> int:
    if s.degree != t.degree:
        raise InvalidArgument(f"degree mismatch: {s.degree} vs {t.degree}")
    return sum(1 for x, y in zip(s.images, t.images) if x != y)


def phi(s: Permutation, t: Permutation) -> Fraction:
    """d(s, t) / max(d(s, e), d(t, e)) for s != t, else 0 (exact)."""
    d = hamming(s, t)
    if d == 0:
        return Fraction(0)
    e = Permutation.identity(s.degree)
    return Fraction(d, max(hamming(s, e), hamming(t, e)))


def swap_pairs(n: int, start: int = 1) -> Permutation:
    """Swap 2k-1 <-> 2k for every pair with 2k-1 >= start (n even)."""
    if n < 2 or n % 2:
        raise InvalidArgument("n must be a positive even number")
    img = list(range(1, n + 1))
    for i in range(1, n, 2):
        if i >= start:
            img[i - 1], img[i] = i + 1, i
    return Permutation(tuple(img))


def sigma_eta(n: int) -> tuple[Permutation, Permutation]:
    """sigma swaps every adjacent pair; eta fixes 1, 2 and swaps the rest."""
    return swap_pairs(n, 1), swap_pairs(n, 3)


# --- unitary actions --------------------------------------------------------


class UnitaryAction:
    """Invertible norm-preserving map of C^d (or R^d) acting on the last axis."""

    dim: int
    label: str

    def apply(self, X):
        raise NotImplementedError

    def apply_inverse(self, X):
        raise NotImplementedError

    def to_dense(self) -> np.ndarray:
        return self.apply(np.eye(self.dim)).T

    def inverse(self) -> "UnitaryAction":
        return _Inverse(self)

    def _check(self, X):
        X = np.asarray(X)
        if X.shape[-1] != self.dim:
            raise InvalidArgument(f"{self.label} acts on dimension {self.dim}, got {X.shape[-1]}")
        return X


class _Inverse(UnitaryAction):
    def __init__(self, g: UnitaryAction):
        self.g, self.dim, self.label = g, g.dim, f"{g.label}^-1"

    def apply(self, X):
        return self.g.apply_inverse(X)

    def apply_inverse(self, X):
        return self.g.apply(X)

    def inverse(self):
        return self.g


class DenseAction(UnitaryAction):
    def __init__(self, matrix, label: str = "U", tol: float = 1e-10):
        U = np.asarray(matrix)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise InvalidArgument("a dense action needs a square matrix")
        if np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() > tol:
            raise InvalidArgument(f"{label} is not unitary")
        self.matrix, self.dim, self.label = U, U.shape[0], label

    def apply(self, X):
        return self._check(X) @ self.matrix.T

    def apply_inverse(self, X):
        return self._check(X) @ self.matrix.conj()

    def to_dense(self):
        return self.matrix


class PermutationAction(UnitaryAction):
    """delta_i -> delta_{image[i]} for a bijection of {0..d-1}."""

    def __init__(self, image: Sequence[int], label: str = "pi"):
        img = np.asarray(image, dtype=int)
        if sorted(img.tolist()) != list(range(img.size)):
            raise InvalidArgument(f"{label} is not a bijection of 0..{img.size - 1}")
        self.index_map = img
        self.inverse_map = np.argsort(img)
        self.dim, self.label = img.size, label

    def apply(self, X):
        X = self._check(X)
        out = np.empty_like(X)
        out[..., self.index_map] = X
        return out

    def apply_inverse(self, X):
        X = self._check(X)
        out = np.empty_like(X)
        out[..., self.inverse_map] = X
        return out


class ScalarAction(UnitaryAction):
    def __init__(self, lam: complex, dim: int, label: str | None = None):
        if abs(abs(lam) - 1.0) > 1e-12:
            raise InvalidArgument(f"|lambda| must be 1, got {abs(lam)}")
        self.lam = lam.real if isinstance(lam, complex) and lam.imag == 0 else lam
        self.dim, self.label = dim, label or f"{lam}"

    def apply(self, X):
        return self.lam * self._check(X)

    def apply_inverse(self, X):
        return np.conj(self.lam) * self._check(X)


class DirectSumAction(UnitaryAction):
    def __init__(self, parts: Sequence[UnitaryAction], label: str | None = None):
        if not parts:
            raise InvalidArgument("empty direct sum")
        self.parts = list(parts)
        self.offsets = np.cumsum([0] + [p.dim for p in self.parts])
        self.dim = int(self.offsets[-1])
        self.label = label or "(+)".join(p.label for p in self.parts)

    def _blockwise(self, X, inverse):
        X = self._check(X)
        pieces = []
        for p, lo, hi in zip(self.parts, self.offsets, self.offsets[1:]):
            block = X[..., lo:hi]
            pieces.append(p.apply_inverse(block) if inverse else p.apply(block))
        return np.concatenate(pieces, axis=-1)

    def apply(self, X):
        return self._blockwise(X, False)

    def apply_inverse(self, X):
        return self._blockwise(X, True)


class PartialPermutationAction(UnitaryAction):
    """delta_i -> delta_{index_map[i]} for an injective partial map (-1 = undefined).

    Truncation of a permutation of an infinite basis.  It is an isometry on
    vectors supported on the domain of the map (and the inverse on vectors
    supported on its range); other inputs raise :class:`SupportViolationError`
    instead of being silently truncated.
    """

    def __init__(self, index_map: Sequence[int], label: str = "pi"):
        img = np.asarray(index_map, dtype=int)
        defined = img[img >= 0]
        if defined.size != np.unique(defined).size or (defined.size and defined.max() >= img.size):
            raise InvalidArgument(f"{label} is not an injective partial map of 0..{img.size - 1}")
        inv = np.full(img.size, -1)
        inv[defined] = np.flatnonzero(img >= 0)
        self.index_map, self.inverse_map = img, inv
        self.dim, self.label = img.size, label

    @property
    def domain(self) -> np.ndarray:
        return np.flatnonzero(self.index_map >= 0)

    def _move(self, X, mapping, name):
        X = self._check(X)
        bad = mapping < 0
        if np.any(X[..., bad] != 0):
            raise SupportViolationError(f"{name} moves part of the vector outside its universe")
        ok = ~bad
        out = np.zeros_like(X)
        out[..., mapping[ok]] = X[..., ok]
        return out

    def apply(self, X):
        return self._move(X, self.index_map, self.label)

    def apply_inverse(self, X):
        return self._move(X, self.inverse_map, f"{self.label}^-1")

    def to_dense(self):
        """Partial isometry matrix; columns outside the domain are zero."""
        M = np.zeros((self.dim, self.dim))
        ok = self.index_map >= 0
        M[self.index_map[ok], np.flatnonzero(ok)] = 1.0
        return M


class RegularAction(PartialPermutationAction):
    """Left translation delta_w -> delta_{gw} on the truncated space l_2(B_R).

    Safe on vectors supported on words of length <= R - |g|.
    """

    def __init__(self, g: ReducedWord, R: int):
        self.g, self.R = g, R
        self.words = ball_enumerate(R)
        index = {w: i for i, w in enumerate(self.words)}
        super().__init__([index.get(g * w, -1) for w in self.words], label=str(g))


def regular_action(g: ReducedWord, R: int) -> RegularAction:
    return RegularAction(g, R)


def cyclic_shift(k: int) -> PermutationAction:
    return PermutationAction((np.arange(k) + 1) % k, label="shift")


def integer_shift(d: int) -> PartialPermutationAction:
    """i -> i + 1 on {0..d-1}: the generator of Z truncated to an interval."""
    return PartialPermutationAction(list(range(1, d)) + [-1], label="+1")


def leader_projection_mass(E1, E2, E3, x):
    """(||p_E1 x||, ||p_E2 x||, ||p_E3 x||) for pairwise disjoint index sets.

    ``x`` may be a batch ``(m, d)``, in which case an ``(m, 3)`` array is returned.
    """
    sets = [np.asarray(sorted(set(map(int, E))), dtype=int) for E in (E1, E2, E3)]
    for i in range(3):
        for j in range(i + 1, 3):
            if np.intersect1d(sets[i], sets[j]).size:
                raise InvalidArgument(f"E{i + 1} and E{j + 1} overlap")
    X = np.asarray(x)
    d = X.shape[-1]
    for E in sets:
        if E.size and (E.min() < 0 or E.max() >= d):
            raise InvalidArgument("index outside the ambient dimension")
    norms = np.stack([np.linalg.norm(X[..., E], axis=-1) for E in sets], axis=-1)
    if X.ndim == 1:
        return tuple(float(v) for v in norms)
    return norms
