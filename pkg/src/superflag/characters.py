"""Formal characters of a product of general linear groups.

A character is a sparse multiset of integral weights.  Weights are keyed by
their concatenated coordinate tuple (mu-part then lambda-part); the
:class:`BlockStructure` records which coordinate ranges form GL-blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import product
from math import comb
from typing import Iterable, Iterator, Mapping

from .root_weights import NotDominantError, Weight

Coords = tuple[int, ...]


class BlockMismatchError(ValueError):
    """Raised when characters over different block structures are combined."""


class NotACharacterError(ValueError):
    """Raised when peeling meets a negative multiplicity."""


@dataclass(frozen=True)
class BlockStructure:
    """Sizes of the GL-blocks of the reductive group, mu-blocks first."""

    mu_blocks: tuple[int, ...]
    lambda_blocks: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu_blocks", tuple(self.mu_blocks))
        object.__setattr__(self, "lambda_blocks", tuple(self.lambda_blocks))
        if any(s < 0 for s in self.mu_blocks + self.lambda_blocks):
            raise ValueError("block sizes must be nonnegative")

    @property
    def m(self) -> int:
        return sum(self.mu_blocks)

    @property
    def n(self) -> int:
        return sum(self.lambda_blocks)

    @cached_property
    def ranges(self) -> tuple[tuple[int, int], ...]:
        """(start, size) of every block inside the concatenated coordinates."""
        out = []
        start = 0
        for size in self.mu_blocks + self.lambda_blocks:
            out.append((start, size))
            start += size
        return tuple(out)

    @cached_property
    def mu_offsets(self) -> tuple[int, ...]:
        return tuple(start for start, _ in self.ranges[: len(self.mu_blocks)])

    @cached_property
    def lambda_offsets(self) -> tuple[int, ...]:
        return tuple(start for start, _ in self.ranges[len(self.mu_blocks) :])

    def mu_coords(self, i: int) -> range:
        """Concatenated coordinate indices of mu-block ``i`` (1-based)."""
        start = self.mu_offsets[i - 1]
        return range(start, start + self.mu_blocks[i - 1])

    def lambda_coords(self, i: int) -> range:
        start = self.lambda_offsets[i - 1]
        return range(start, start + self.lambda_blocks[i - 1])

    def is_dominant(self, coords: Coords) -> bool:
        for start, size in self.ranges:
            for a in range(start, start + size - 1):
                if coords[a] < coords[a + 1]:
                    return False
        return True

    def refines(self, other: BlockStructure) -> bool:
        """True when every block of ``self`` sits inside a block of ``other``."""
        if (self.m, self.n) != (other.m, other.n):
            return False
        cuts = {start for start, _ in self.ranges} | {self.m + self.n}
        return all(start in cuts for start, _ in other.ranges)


class Character:
    """Sparse weight multiset of a representation of the reductive group."""

    __slots__ = ("blocks", "_entries")

    def __init__(self, blocks: BlockStructure, entries: Mapping[Coords, int] | None = None):
        self.blocks = blocks
        self._entries: dict[Coords, int] = {}
        if entries:
            size = blocks.m + blocks.n
            for w, mult in entries.items():
                if len(w) != size:
                    raise ValueError(f"weight {w} has wrong length for {blocks}")
                if mult:
                    self._entries[tuple(w)] = int(mult)

    @classmethod
    def from_weights(cls, blocks: BlockStructure, entries: Mapping[Weight, int]) -> Character:
        return cls(blocks, {w.coords: mult for w, mult in entries.items()})

    @property
    def raw(self) -> Mapping[Coords, int]:
        return self._entries

    @property
    def dim(self) -> int:
        return sum(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __iter__(self) -> Iterator[tuple[Weight, int]]:
        m = self.blocks.m
        for w in sorted(self._entries, reverse=True):
            yield Weight.from_coords(w, m), self._entries[w]

    def mult(self, w: Weight | Coords) -> int:
        key = w.coords if isinstance(w, Weight) else tuple(w)
        return self._entries.get(key, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Character):
            return NotImplemented
        return self.blocks == other.blocks and self._entries == other._entries

    def __add__(self, other: Character) -> Character:
        return direct_sum(self, other)

    def __repr__(self) -> str:
        return f"Character(dim={self.dim}, distinct={len(self)}, blocks={self.blocks})"

    def is_weyl_symmetric(self) -> bool:
        """Per-block permutation invariance, checked with adjacent swaps."""
        for w, mult in self._entries.items():
            for start, size in self.blocks.ranges:
                for a in range(start, start + size - 1):
                    if w[a] != w[a + 1]:
                        swapped = w[:a] + (w[a + 1], w[a]) + w[a + 2 :]
                        if self._entries.get(swapped, 0) != mult:
                            return False
        return True

    def with_blocks(self, blocks: BlockStructure) -> Character:
        """Restrict to a finer block structure on the same coordinates."""
        if not blocks.refines(self.blocks):
            raise BlockMismatchError(f"{blocks} does not refine {self.blocks}")
        return Character(blocks, self._entries)


def _same_blocks(a: Character, b: Character) -> None:
    if a.blocks != b.blocks:
        raise BlockMismatchError(f"{a.blocks} vs {b.blocks}")


def trivial(blocks: BlockStructure) -> Character:
    return Character(blocks, {(0,) * (blocks.m + blocks.n): 1})


def zero(blocks: BlockStructure) -> Character:
    return Character(blocks)


def dual(c: Character) -> Character:
    return Character(c.blocks, {tuple(-a for a in w): mult for w, mult in c.raw.items()})


def direct_sum(*chars: Character) -> Character:
    if not chars:
        raise ValueError("direct_sum needs at least one character")
    out: dict[Coords, int] = {}
    for c in chars:
        _same_blocks(chars[0], c)
        for w, mult in c.raw.items():
            out[w] = out.get(w, 0) + mult
    return Character(chars[0].blocks, out)


def scalar(c: Character, k: int) -> Character:
    return Character(c.blocks, {w: k * mult for w, mult in c.raw.items()})


def tensor(a: Character, b: Character) -> Character:
    _same_blocks(a, b)
    out: dict[Coords, int] = {}
    items_b = list(b.raw.items())
    for u, mu in a.raw.items():
        for v, mv in items_b:
            w = tuple(x + y for x, y in zip(u, v))
            out[w] = out.get(w, 0) + mu * mv
    return Character(a.blocks, out)


def tensor_all(chars: Iterable[Character], blocks: BlockStructure) -> Character:
    out = trivial(blocks)
    for c in chars:
        out = tensor(out, c)
    return out


def wedge(c: Character, q: int) -> Character:
    """Exterior power by dynamic programming over weight slots.

    A weight of multiplicity k spans k slots; choosing j of them contributes
    C(k, j) copies of j times that weight, so slots are grouped per weight.
    """
    if q < 0:
        raise ValueError("wedge degree must be nonnegative")
    size = c.blocks.m + c.blocks.n
    if q > c.dim:
        return zero(c.blocks)
    # layers[d] maps weight -> multiplicity of degree-d subsets seen so far
    layers: list[dict[Coords, int]] = [{(0,) * size: 1}] + [{} for _ in range(q)]
    for w, k in sorted(c.raw.items()):
        new_layers = [dict(layer) for layer in layers]
        for d in range(q + 1):
            if not layers[d]:
                continue
            for j in range(1, min(k, q - d) + 1):
                shift = tuple(j * a for a in w)
                factor = comb(k, j)
                target = new_layers[d + j]
                for u, mult in layers[d].items():
                    v = tuple(x + y for x, y in zip(u, shift))
                    target[v] = target.get(v, 0) + factor * mult
        layers = new_layers
    return Character(c.blocks, layers[q])


@lru_cache(maxsize=None)
def gl_character(hw: Coords) -> dict[Coords, int]:
    """Character of the irreducible GL_k-module with highest weight ``hw``.

    Branching GL_k -> GL_{k-1} one row at a time, i.e. summing over
    Gelfand-Tsetlin patterns with top row ``hw``.
    """
    k = len(hw)
    if k == 0:
        return {(): 1}
    if any(hw[i] < hw[i + 1] for i in range(k - 1)):
        raise NotDominantError(f"{hw} is not dominant for GL_{k}")
    total = sum(hw)
    out: dict[Coords, int] = {}
    ranges = [range(hw[i + 1], hw[i] + 1) for i in range(k - 1)]
    for row in product(*ranges):
        last = total - sum(row)
        for w, mult in gl_character(tuple(row)).items():
            key = w + (last,)
            out[key] = out.get(key, 0) + mult
    return out


def gt_pattern_count(hw: Coords) -> int:
    """Number of Gelfand-Tsetlin patterns with top row ``hw``."""
    k = len(hw)
    if k <= 1:
        return 1
    return sum(
        gt_pattern_count(row) for row in product(*[range(hw[i + 1], hw[i] + 1) for i in range(k - 1)])
    )


@lru_cache(maxsize=200_000)
def _irr_entries(blocks: BlockStructure, hw: Coords) -> tuple[tuple[Coords, int], ...]:
    pieces = [gl_character(hw[start : start + size]) for start, size in blocks.ranges]
    out: list[tuple[Coords, int]] = []
    for combo in product(*[list(p.items()) for p in pieces]):
        w: Coords = ()
        mult = 1
        for part, k in combo:
            w += part
            mult *= k
        out.append((w, mult))
    return tuple(out)


def irr_char(blocks: BlockStructure, hw: Weight | Coords) -> Character:
    key = hw.coords if isinstance(hw, Weight) else tuple(hw)
    if not blocks.is_dominant(key):
        raise NotDominantError(f"{key} is not dominant for {blocks}")
    return Character(blocks, dict(_irr_entries(blocks, key)))


@dataclass(frozen=True)
class IrrDecomposition:
    """Highest weights of the irreducible constituents with multiplicities."""

    blocks: BlockStructure
    constituents: tuple[tuple[Coords, int], ...]

    def __iter__(self) -> Iterator[tuple[Weight, int]]:
        for hw, mult in self.constituents:
            yield Weight.from_coords(hw, self.blocks.m), mult

    def __len__(self) -> int:
        return len(self.constituents)

    def as_dict(self) -> dict[Coords, int]:
        return dict(self.constituents)


def decompose(c: Character) -> IrrDecomposition:
    """Peel off irreducibles from the lexicographically largest weight down."""
    blocks = c.blocks
    remainder = dict(c.raw)
    found: list[tuple[Coords, int]] = []
    for w in sorted(c.raw, reverse=True):
        mult = remainder.get(w, 0)
        if mult == 0:
            continue
        if mult < 0:
            raise NotACharacterError(f"negative multiplicity {mult} at {w}")
        if not blocks.is_dominant(w):
            raise NotACharacterError(f"lex-maximal weight {w} is not dominant")
        found.append((w, mult))
        for u, k in _irr_entries(blocks, w):
            if u not in remainder:
                raise NotACharacterError(f"weight {u} missing while peeling {w}")
            remainder[u] -= mult * k
    leftover = {w: k for w, k in remainder.items() if k}
    if leftover:
        raise NotACharacterError(f"{len(leftover)} weights left after peeling")
    return IrrDecomposition(blocks, tuple(found))
