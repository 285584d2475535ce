"""Fiber representations of the sheaf families and the long-exact-sequence calculus.

Odd generators split as O10 -> psi and O11 -> phi along the first flag step,
and the tangent sheaf of the underlying flag manifold as Theta -> tau with
vertical part tau_v and horizontal part tau_h.  Every family cell is a
character assembled from these; the calculus chains cohomology dimensions
through short exact sequences using interval arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Mapping

from .characters import Character, direct_sum, dual, tensor, wedge, zero
from .flag_geometry import FlagType, named_rep, reductive_blocks

FAMILIES = ("O", "Av", "Ah", "A", "Cv", "Ch", "C", "Tv", "Th", "T", "Tp_grM")
SPLIT_FAMILIES = ("Av", "Ah", "Cv", "Ch", "Tv", "Th")


class _UndefinedAtR1:
    """Marker returned for vertical/horizontal families on a super-grassmannian."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED_AT_R1"

    def __bool__(self) -> bool:
        return False


UNDEFINED_AT_R1 = _UndefinedAtR1()


@dataclass(frozen=True, order=True)
class SheafId:
    """A family cell; ``q`` is None for the ungraded families O, A, C, T."""

    family: str
    p: int
    q: int | None = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise KeyError(f"unknown sheaf family {self.family!r}; expected one of {FAMILIES}")
        if self.family in SPLIT_FAMILIES and self.q is None:
            raise ValueError(f"family {self.family} needs a q index")

    def label(self) -> str:
        return f"{self.family}[{self.p}]" if self.q is None else f"{self.family}[{self.p},{self.q}]"

    @classmethod
    def parse(cls, text: str) -> SheafId:
        """Parse ``Av[0,1]`` or ``O[3]``."""
        name, _, rest = text.partition("[")
        nums = [int(x) for x in rest.rstrip("]").split(",") if x.strip()] if rest else []
        if not nums:
            raise ValueError(f"sheaf label {text!r} lacks indices")
        return cls(name, nums[0], nums[1] if len(nums) > 1 else None)


@lru_cache(maxsize=None)
def _reps(ft: FlagType) -> dict[str, Character]:
    return {name: named_rep(ft, name).character for name in ("phi", "psi", "theta", "tau", "tau_v", "tau_h")}


@lru_cache(maxsize=4096)
def _wedge(ft: FlagType, name: str, k: int) -> Character:
    c = _reps(ft)[name]
    if k < 0:
        return zero(c.blocks)
    return wedge(c, k)


def _cell(ft: FlagType, family: str, p: int, q: int) -> Character:
    reps = _reps(ft)
    if family == "Av":
        parts = [dual(reps["psi"]), _wedge(ft, "psi", p - q + 1), _wedge(ft, "phi", q)]
    elif family == "Ah":
        parts = [dual(reps["phi"]), _wedge(ft, "phi", q + 1), _wedge(ft, "psi", p - q)]
    elif family == "Cv":
        parts = [reps["tau_v"], _wedge(ft, "phi", q), _wedge(ft, "psi", p - q)]
    elif family == "Ch":
        parts = [reps["tau_h"], _wedge(ft, "phi", q), _wedge(ft, "psi", p - q)]
    else:
        raise KeyError(family)
    if any(not c for c in parts[1:]):
        return zero(reductive_blocks(ft))
    out = parts[0]
    for c in parts[1:]:
        out = tensor(out, c)
    return out


@lru_cache(maxsize=4096)
def sheaf_rep(ft: FlagType, sid: SheafId) -> Character | _UndefinedAtR1:
    """Character of the fiber representation of the sheaf ``sid`` at the origin."""
    blocks = reductive_blocks(ft)
    fam, p, q = sid.family, sid.p, sid.q
    graded = q is not None and fam in ("A", "C", "T")
    if ft.r == 1 and (fam in SPLIT_FAMILIES or graded):
        return UNDEFINED_AT_R1
    if q is not None and fam != "O" and not (-1 <= q <= p + 1):
        return zero(blocks)
    if p < -1:
        return zero(blocks)
    reps = _reps(ft)
    if fam in ("Av", "Ah", "Cv", "Ch"):
        return _cell(ft, fam, p, q)
    if fam == "Tv":
        return direct_sum(_cell(ft, "Av", p, q), _cell(ft, "Cv", p, q))
    if fam == "Th":
        return direct_sum(_cell(ft, "Ah", p, q), _cell(ft, "Ch", p, q))
    if graded:
        names = {"A": ("Av", "Ah"), "C": ("Cv", "Ch"), "T": ("Av", "Ah", "Cv", "Ch")}[fam]
        return direct_sum(*[_cell(ft, name, p, q) for name in names])
    if fam == "O":
        return _wedge(ft, "theta", p) if p >= 0 else zero(blocks)
    a = tensor(dual(reps["theta"]), _wedge(ft, "theta", p + 1)) if p + 1 >= 0 else zero(blocks)
    if fam == "A":
        return a
    c = tensor(reps["tau"], _wedge(ft, "theta", p)) if p >= 0 else zero(blocks)
    if fam == "C":
        return c
    return direct_sum(a, c)  # T and Tp_grM: the graded piece of the tangent sheaf


def fiber_family_rep(fiber: FlagType, family: str, j: int) -> Character | None:
    """Fiber sheaf whose degree-0 cohomology feeds the vertical direct image.

    ``Av``/``Cv``/``Tv`` cells with p - q = j restrict on a fiber to the
    ungraded A_j, C_j and T_j of the fiber flag supermanifold.
    """
    fam = {"Av": "A", "Cv": "C", "Tv": "T"}[family]
    if j < -1:
        return None
    return sheaf_rep(fiber, SheafId(fam, j))


# ---------------------------------------------------------------------------
# interval calculus for long exact sequences


class ContradictionError(ValueError):
    """Raised when exactness constraints leave an empty range."""


@dataclass(frozen=True)
class Range:
    """Closed integer interval; ``hi=None`` means unbounded above."""

    lo: int = 0
    hi: int | None = None

    def __post_init__(self) -> None:
        if self.lo < 0:
            object.__setattr__(self, "lo", 0)
        if self.hi is not None and self.hi < self.lo:
            raise ContradictionError(f"empty range [{self.lo}, {self.hi}]")

    @classmethod
    def exact(cls, d: int) -> Range:
        return cls(d, d)

    @property
    def is_exact(self) -> bool:
        return self.hi == self.lo

    @property
    def value(self) -> int:
        if not self.is_exact:
            raise ValueError(f"range {self} is not exact")
        return self.lo

    def __add__(self, other: Range) -> Range:
        hi = None if self.hi is None or other.hi is None else self.hi + other.hi
        return Range(self.lo + other.lo, hi)

    def intersect(self, other: Range) -> Range:
        his = [h for h in (self.hi, other.hi) if h is not None]
        return Range(max(self.lo, other.lo), min(his) if his else None)

    def contains(self, d: int) -> bool:
        return d >= self.lo and (self.hi is None or d <= self.hi)

    def __str__(self) -> str:
        if self.is_exact:
            return str(self.lo)
        return f"[{self.lo}, {'inf' if self.hi is None else self.hi}]"

    def to_json(self) -> dict[str, str | None]:
        return {"lo": str(self.lo), "hi": None if self.hi is None else str(self.hi)}


def Exact(d: int) -> Range:  # noqa: N802 - reads like a constructor
    return Range.exact(d)


UNKNOWN = Range(0, None)
ZERO = Range(0, 0)


@dataclass(frozen=True)
class LesNode:
    """Dimension ranges of H^0, H^1, H^2 of one sheaf."""

    h0: Range = UNKNOWN
    h1: Range = UNKNOWN
    h2: Range = UNKNOWN
    provenance: tuple[str, ...] = field(default=(), compare=False)

    @classmethod
    def zero(cls, note: str = "zero sheaf") -> LesNode:
        return cls(ZERO, ZERO, ZERO, (note,))

    def __add__(self, other: LesNode) -> LesNode:
        return LesNode(self.h0 + other.h0, self.h1 + other.h1, self.h2 + other.h2, self.provenance + other.provenance)

    def refine(self, other: LesNode) -> LesNode:
        return LesNode(
            self.h0.intersect(other.h0),
            self.h1.intersect(other.h1),
            self.h2.intersect(other.h2),
            self.provenance + other.provenance,
        )

    def note(self, text: str) -> LesNode:
        return replace(self, provenance=self.provenance + (text,))

    def __str__(self) -> str:
        return f"h0={self.h0}, h1={self.h1}, h2={self.h2}"


MAP_NAMES = ("i0", "p0", "delta0", "i1", "p1", "delta1", "i2")


@dataclass(frozen=True)
class ShortExact:
    """Refined nodes of 0 -> X -> Y -> Z -> 0 and the ranks of the maps."""

    sub: LesNode
    mid: LesNode
    quo: LesNode
    ranks: Mapping[str, Range]


def _sub(a: Range, b: Range) -> Range:
    """Values x with a = x + y for some y in b (before clipping at 0)."""
    lo = a.lo - (b.hi if b.hi is not None else float("inf"))
    hi = None if a.hi is None else a.hi - b.lo
    lo = 0 if lo == float("-inf") else max(0, int(lo))
    if hi is not None and hi < lo:
        raise ContradictionError("exactness leaves an empty range")
    return Range(lo, hi)


def les_chain(sub: LesNode, mid: LesNode, quo: LesNode, maps: Mapping[str, Range] | None = None) -> ShortExact:
    """Tightest ranges compatible with the long exact sequence of 0 -> X -> Y -> Z -> 0.

    The sequence 0 -> H0X -> H0Y -> H0Z -> H1X -> H1Y -> H1Z -> H2X -> H2Y is
    exact, so each term's dimension is the sum of the ranks of its incoming and
    outgoing maps.  ``maps`` optionally pins ranks of individual maps by name
    (``i0, p0, delta0, i1, p1, delta1, i2``); injectivity/surjectivity facts
    enter this way.  Bounds propagation on this chain of sum constraints is
    complete, so the returned ranges are the exact projections.
    """
    dims = [sub.h0, mid.h0, quo.h0, sub.h1, mid.h1, quo.h1, sub.h2]
    ranks = [Range(0, d.hi) for d in dims]
    for name, rng in (maps or {}).items():
        ranks[MAP_NAMES.index(name)] = ranks[MAP_NAMES.index(name)].intersect(rng)
    changed = True
    sweeps = 0
    while changed:
        changed = False
        sweeps += 1
        if sweeps > 1000:
            raise RuntimeError("range propagation did not converge")
        for i in range(7):
            incoming = ranks[i - 1] if i > 0 else ZERO
            new_d = dims[i].intersect(incoming + ranks[i])
            new_in = incoming.intersect(_sub(new_d, ranks[i]))
            new_out = ranks[i].intersect(_sub(new_d, new_in))
            if new_d != dims[i] or new_out != ranks[i] or (i > 0 and new_in != ranks[i - 1]):
                changed = True
            dims[i] = new_d
            ranks[i] = new_out
            if i > 0:
                ranks[i - 1] = new_in
    x = LesNode(dims[0], dims[3], dims[6], sub.provenance)
    h2_bound = sub.h2 + quo.h2
    y = LesNode(dims[1], dims[4], mid.h2.intersect(Range(0, h2_bound.hi)), mid.provenance)
    z = LesNode(dims[2], dims[5], quo.h2, quo.provenance)
    return ShortExact(x, y, z, dict(zip(MAP_NAMES, ranks)))


def filtration_chain(
    graded: list[LesNode],
    facts: Mapping[int, Mapping[str, Range]] | None = None,
    known: Mapping[int, LesNode] | None = None,
) -> list[LesNode]:
    """Filtered pieces F_(i) = graded[i] + F_(i+1), built from the top index down.

    ``graded[i]`` is the i-th quotient F_(i)/F_(i+1); returns the nodes of
    F_(0), ..., F_(len-1) so that the first entry is the whole object.
    ``facts[i]`` pins map ranks in the sequence 0 -> F_(i+1) -> F_(i) -> graded[i] -> 0
    and ``known[i]`` refines F_(i) before it is used further down.
    """
    facts = facts or {}
    known = known or {}
    out: list[LesNode] = [LesNode()] * len(graded)
    current = LesNode.zero("top of filtration")
    for i in range(len(graded) - 1, -1, -1):
        mid = known.get(i, LesNode())
        result = les_chain(current, mid, graded[i], facts.get(i))
        out[i] = result.mid
        current = result.mid
    return out
