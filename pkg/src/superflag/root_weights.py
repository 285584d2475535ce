"""Root-system arithmetic for gl_m + gl_n.

Weights live in the orthonormal basis mu_1..mu_m, lambda_1..lambda_n.  The
half-sum of positive roots has half-integer entries, so every shifted weight
is carried in doubled coordinates and stays an exact integer vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence


class DimensionError(ValueError):
    """Raised when weights of different shapes are combined."""


class NotDominantError(ValueError):
    """Raised when an operation requires a dominant weight."""


@dataclass(frozen=True, order=True)
class Weight:
    """An integral weight, split into its mu-part and lambda-part."""

    mu: tuple[int, ...]
    lam: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", tuple(int(x) for x in self.mu))
        object.__setattr__(self, "lam", tuple(int(x) for x in self.lam))

    @classmethod
    def zero(cls, m: int, n: int) -> Weight:
        return cls((0,) * m, (0,) * n)

    @classmethod
    def from_coords(cls, coords: Sequence[int], m: int) -> Weight:
        return cls(tuple(coords[:m]), tuple(coords[m:]))

    @classmethod
    def basis(cls, m: int, n: int, index: int, sign: int = 1) -> Weight:
        """Unit vector at concatenated coordinate ``index`` (mu first)."""
        coords = [0] * (m + n)
        coords[index] = sign
        return cls.from_coords(coords, m)

    @property
    def coords(self) -> tuple[int, ...]:
        return self.mu + self.lam

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.mu), len(self.lam)

    def _check(self, other: Weight) -> None:
        if self.shape != other.shape:
            raise DimensionError(f"weight shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: Weight) -> Weight:
        self._check(other)
        return Weight(
            tuple(a + b for a, b in zip(self.mu, other.mu)),
            tuple(a + b for a, b in zip(self.lam, other.lam)),
        )

    def __sub__(self, other: Weight) -> Weight:
        return self + (-other)

    def __neg__(self) -> Weight:
        return Weight(tuple(-a for a in self.mu), tuple(-a for a in self.lam))

    def scale(self, k: int) -> Weight:
        return Weight(tuple(k * a for a in self.mu), tuple(k * a for a in self.lam))

    def is_dominant(self) -> bool:
        return _weakly_decreasing(self.mu) and _weakly_decreasing(self.lam)

    def __str__(self) -> str:
        mu = ",".join(str(a) for a in self.mu)
        lam = ",".join(str(a) for a in self.lam)
        return f"({mu}|{lam})"


def _weakly_decreasing(v: Sequence[int]) -> bool:
    return all(v[i] >= v[i + 1] for i in range(len(v) - 1))


@dataclass(frozen=True)
class RootData:
    """Positive roots and doubled half-sum for gl_m + gl_n."""

    m: int
    n: int
    positive_roots: tuple[Weight, ...] = field(repr=False)
    simple_roots: tuple[Weight, ...] = field(repr=False)
    two_zeta: Weight


def build_root_data(m: int, n: int) -> RootData:
    if m < 1 or n < 0:
        raise ValueError(f"invalid dimensions m={m}, n={n}: need m >= 1, n >= 0")
    roots: list[Weight] = []
    for i in range(m):
        for j in range(i + 1, m):
            roots.append(Weight.basis(m, n, i) - Weight.basis(m, n, j))
    for p in range(n):
        for q in range(p + 1, n):
            roots.append(Weight.basis(m, n, m + p) - Weight.basis(m, n, m + q))
    simple = [Weight.basis(m, n, i) - Weight.basis(m, n, i + 1) for i in range(m - 1)]
    simple += [Weight.basis(m, n, m + p) - Weight.basis(m, n, m + p + 1) for p in range(n - 1)]
    two_zeta = Weight(
        tuple(m - 2 * i + 1 for i in range(1, m + 1)),
        tuple(n - 2 * j + 1 for j in range(1, n + 1)),
    )
    return RootData(m, n, tuple(roots), tuple(simple), two_zeta)


def pairing(a: Weight, b: Weight) -> int:
    a._check(b)
    return sum(x * y for x, y in zip(a.coords, b.coords))


class BottKind(Enum):
    SINGULAR = "singular"
    REGULAR = "regular"


@dataclass(frozen=True)
class BottClass:
    """Outcome of the Bott recipe for one highest weight.

    ``dominant_shifted`` is sorted 2(w + zeta) (doubled); ``dot_image`` is the
    undoubled integral weight w(w + zeta) - zeta, present only when regular.
    """

    kind: BottKind
    dominant_shifted: Weight
    index: int | None = None
    dot_image: Weight | None = None

    @property
    def regular(self) -> bool:
        return self.kind is BottKind.REGULAR


def _inversions(v: Sequence[int]) -> int:
    # pairs out of strictly descending order; inputs here are short
    return sum(1 for i in range(len(v)) for j in range(i + 1, len(v)) if v[i] < v[j])


def _check_shape(w: Weight, rd: RootData) -> None:
    if w.shape != (rd.m, rd.n):
        raise DimensionError(f"weight shape {w.shape} does not fit gl_{rd.m} + gl_{rd.n}")


def classify_coords(coords: Sequence[int], m: int, n: int) -> tuple[int | None, tuple[int, ...]]:
    """Fast path of :func:`classify` on a concatenated coordinate tuple.

    Returns ``(index, dot_image_coords)`` or ``(None, ())`` when singular.
    """
    mu = [2 * coords[i] + (m - 2 * i - 1) for i in range(m)]
    lam = [2 * coords[m + j] + (n - 2 * j - 1) for j in range(n)]
    if len(set(mu)) < m or len(set(lam)) < n:
        return None, ()
    index = _inversions(mu) + _inversions(lam)
    smu = sorted(mu, reverse=True)
    slam = sorted(lam, reverse=True)
    dot = tuple((smu[i] - (m - 2 * i - 1)) // 2 for i in range(m)) + tuple(
        (slam[j] - (n - 2 * j - 1)) // 2 for j in range(n)
    )
    return index, dot


def classify(w: Weight, rd: RootData) -> BottClass:
    _check_shape(w, rd)
    shifted_mu = tuple(2 * a + z for a, z in zip(w.mu, rd.two_zeta.mu))
    shifted_lam = tuple(2 * a + z for a, z in zip(w.lam, rd.two_zeta.lam))
    dominant = Weight(tuple(sorted(shifted_mu, reverse=True)), tuple(sorted(shifted_lam, reverse=True)))
    index, dot = classify_coords(w.coords, rd.m, rd.n)
    if index is None:
        return BottClass(BottKind.SINGULAR, dominant)
    return BottClass(BottKind.REGULAR, dominant, index, Weight.from_coords(dot, rd.m))


def index_by_roots(w: Weight, rd: RootData) -> int | None:
    """Root-enumeration oracle: count roots pairing negatively with w + zeta."""
    _check_shape(w, rd)
    shifted = w.scale(2) + rd.two_zeta
    values = [pairing(shifted, alpha) for alpha in rd.positive_roots]
    if any(v == 0 for v in values):
        return None
    return sum(1 for v in values if v < 0)


def weyl_dim_coords(coords: Sequence[int], m: int, n: int) -> int:
    num = 1
    den = 1
    for start, size in ((0, m), (m, n)):
        part = [2 * coords[start + i] + (size - 2 * i - 1) for i in range(size)]
        for i in range(size):
            for j in range(i + 1, size):
                num *= part[i] - part[j]
                den *= 2 * (j - i)
    value = Fraction(num, den)
    if value.denominator != 1 or value <= 0:
        raise NotDominantError(f"weyl dimension {value} is not a positive integer")
    return int(value)


def weyl_dim(w: Weight, rd: RootData) -> int:
    """Weyl dimension formula over the positive roots of gl_m + gl_n."""
    _check_shape(w, rd)
    if not w.is_dominant():
        raise NotDominantError(f"{w} is not dominant")
    result = Fraction(1)
    shifted = w.scale(2) + rd.two_zeta
    for alpha in rd.positive_roots:
        result *= Fraction(pairing(shifted, alpha), pairing(rd.two_zeta, alpha))
    assert result.denominator == 1
    return int(result)

