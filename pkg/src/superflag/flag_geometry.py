"""Flag types, the reductive part of the isotropy group and named representations.

A flag type (m, n, k, l) describes flags of type (k|l) in C^{m|n}, with
k = (k_0, ..., k_r), k_0 = m and likewise for l.  The reductive part R of the
isotropy group is a product of GL-blocks of sizes k_{i-1} - k_i on the even
mu-side and l_{i-1} - l_i on the lambda-side (k_{r+1} = l_{r+1} = 0).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .characters import BlockStructure, Character, direct_sum, irr_char, scalar, trivial, zero


class MalformedFlagTypeError(ValueError):
    """Raised for tuples that do not describe a flag supermanifold."""


@dataclass(frozen=True)
class FlagType:
    m: int
    n: int
    k: tuple[int, ...]
    l: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "k", tuple(int(x) for x in self.k))
        object.__setattr__(self, "l", tuple(int(x) for x in self.l))

    @property
    def r(self) -> int:
        return len(self.k) - 1

    @classmethod
    def grassmannian(cls, m: int, n: int, k: int, l: int) -> FlagType:
        return cls(m, n, (m, k), (n, l))

    def label(self) -> str:
        if self.r == 1:
            return f"Gr_{{{self.m}|{self.n},{self.k[1]}|{self.l[1]}}}"
        ks = ",".join(map(str, self.k))
        ls = ",".join(map(str, self.l))
        return f"F^{{{self.m}|{self.n}}}_{{({ks})|({ls})}}"

    def key(self) -> str:
        return f"m{self.m}n{self.n}k{'-'.join(map(str, self.k))}l{'-'.join(map(str, self.l))}"


@dataclass(frozen=True)
class ValidatedFlagType:
    ft: FlagType
    generic: bool
    admissible: bool
    violated_pair: tuple[int, int] | None = None
    reason: str = ""


def forbidden_pairs(ft: FlagType) -> list[tuple[int, int]]:
    """Values of (k_r, l_r) excluded by the admissibility condition."""
    kp, lp = ft.k[-2], ft.l[-2]
    return [
        (1, lp - 1),
        (kp - 1, 1),
        (1, lp - 2),
        (kp - 2, 1),
        (2, lp - 1),
        (kp - 1, 2),
    ]


def validate_flag_type(ft: FlagType) -> ValidatedFlagType:
    if ft.m < 1 or ft.n < 1:
        raise MalformedFlagTypeError(f"need m, n >= 1, got m={ft.m}, n={ft.n}")
    if len(ft.k) != len(ft.l) or len(ft.k) < 2:
        raise MalformedFlagTypeError("k and l must have the same length r+1 >= 2")
    if ft.k[0] != ft.m or ft.l[0] != ft.n:
        raise MalformedFlagTypeError(f"k_0 must equal m and l_0 must equal n, got {ft.k[0]}, {ft.l[0]}")
    for seq in (ft.k, ft.l):
        if any(x < 0 for x in seq) or any(seq[i] < seq[i + 1] for i in range(len(seq) - 1)):
            raise MalformedFlagTypeError(f"{seq} is not a non-increasing tuple of nonnegative integers")
    sums = [a + b for a, b in zip(ft.k, ft.l)]
    if any(sums[i] <= sums[i + 1] for i in range(len(sums) - 1)) or sums[-1] == 0:
        raise MalformedFlagTypeError("the super dimensions k_s + l_s must strictly decrease and stay positive")
    generic = all(ft.k[i] > ft.k[i + 1] for i in range(ft.r)) and all(
        ft.l[i] > ft.l[i + 1] for i in range(ft.r)
    )
    generic = generic and ft.k[-1] > 0 and ft.l[-1] > 0
    if not generic:
        return ValidatedFlagType(ft, False, False, None, "type is not generic")
    pair = (ft.k[-1], ft.l[-1])
    if pair in forbidden_pairs(ft):
        return ValidatedFlagType(ft, True, False, pair, f"(k_r, l_r) = {pair} is a forbidden pair")
    return ValidatedFlagType(ft, True, True)


def reductive_blocks(ft: FlagType) -> BlockStructure:
    k = ft.k + (0,)
    l = ft.l + (0,)
    return BlockStructure(
        tuple(k[i - 1] - k[i] for i in range(1, ft.r + 2)),
        tuple(l[i - 1] - l[i] for i in range(1, ft.r + 2)),
    )


def odd_dimension(ft: FlagType) -> int:
    b = reductive_blocks(ft)
    a, c = b.mu_blocks, b.lambda_blocks
    return sum(a[i] * c[j] + c[i] * a[j] for i in range(len(a)) for j in range(i + 1, len(a)))


def even_dimension(ft: FlagType) -> int:
    b = reductive_blocks(ft)
    a, c = b.mu_blocks, b.lambda_blocks
    return sum(a[i] * a[j] + c[i] * c[j] for i in range(len(a)) for j in range(i + 1, len(a)))


# ---------------------------------------------------------------------------
# block tensor representations


def _pairs(blocks: BlockStructure, left: range, right: range, sl: int, sr: int) -> dict[tuple[int, ...], int]:
    """Weights sl*e_a + sr*e_b for a in ``left``, b in ``right``."""
    size = blocks.m + blocks.n
    out: dict[tuple[int, ...], int] = {}
    for a in left:
        for b in right:
            w = [0] * size
            w[a] += sl
            w[b] += sr
            key = tuple(w)
            out[key] = out.get(key, 0) + 1
    return out


def block_product(
    blocks: BlockStructure, left: tuple[str, int], right: tuple[str, int], dual_left: bool, dual_right: bool
) -> Character:
    """Character of X_i (x) Y_j with X, Y in {'rho', 'sigma'} and optional duals."""

    def coords(kind: str, i: int) -> range:
        return blocks.mu_coords(i) if kind == "rho" else blocks.lambda_coords(i)

    sl = -1 if dual_left else 1
    sr = -1 if dual_right else 1
    return Character(blocks, _pairs(blocks, coords(*left), coords(*right), sl, sr))


NAMED_REPS = ("phi", "psi", "theta", "tau", "tau_v", "tau_h", "nilradical", "nilradical_B")


@dataclass(frozen=True)
class NamedRep:
    id: str
    character: Character

    @property
    def dim(self) -> int:
        return self.character.dim


def _odd_pairs(blocks: BlockStructure, r: int, keep) -> Character:
    """Sum of rho_i* (x) sigma_j + sigma_i* (x) rho_j over i < j with keep(i, j)."""
    out = zero(blocks)
    for i in range(1, r + 2):
        for j in range(i + 1, r + 2):
            if keep(i, j):
                out = out + block_product(blocks, ("rho", i), ("sigma", j), True, False)
                out = out + block_product(blocks, ("sigma", i), ("rho", j), True, False)
    return out


def _even_pairs(blocks: BlockStructure, r: int, keep) -> Character:
    """Sum of rho_i (x) rho_j* + sigma_i (x) sigma_j* over i < j with keep(i, j)."""
    out = zero(blocks)
    for i in range(1, r + 2):
        for j in range(i + 1, r + 2):
            if keep(i, j):
                out = out + block_product(blocks, ("rho", i), ("rho", j), False, True)
                out = out + block_product(blocks, ("sigma", i), ("sigma", j), False, True)
    return out


def named_rep(ft: FlagType, id: str) -> NamedRep:
    blocks = reductive_blocks(ft)
    r = ft.r
    if id == "theta":
        c = _odd_pairs(blocks, r, lambda i, j: True)
    elif id == "phi":
        c = _odd_pairs(blocks, r, lambda i, j: i == 1)
    elif id == "psi":
        c = _odd_pairs(blocks, r, lambda i, j: i > 1)
    elif id == "tau":
        c = _even_pairs(blocks, r, lambda i, j: True)
    elif id == "tau_v":
        c = _even_pairs(blocks, r, lambda i, j: i > 1)
    elif id == "tau_h":
        c = _even_pairs(blocks, r, lambda i, j: i == 1)
    elif id in ("nilradical", "nilradical_B"):
        # weights -e_a + e_b with a in block p, b in block q, p < q
        keep = (lambda i, j: True) if id == "nilradical" else (lambda i, j: i == 1)
        out = zero(blocks)
        for i in range(1, r + 2):
            for j in range(i + 1, r + 2):
                if keep(i, j):
                    out = out + block_product(blocks, ("rho", i), ("rho", j), True, False)
                    out = out + block_product(blocks, ("sigma", i), ("sigma", j), True, False)
        c = out
    else:
        raise KeyError(f"unknown named representation {id!r}; expected one of {NAMED_REPS}")
    return NamedRep(id, c)


# ---------------------------------------------------------------------------
# base and fiber of the projection to the first step of the flag

PUSHFORWARD_FAMILIES = ("Av", "Cv", "Tv")


@dataclass(frozen=True)
class PushforwardData:
    """Fiber representations of the direct images along the first flag step.

    ``chi[(family, j)]`` is the R_B-character of the degree-0 fiber cohomology
    of the family cell with p - q = j, for j in {-1, 0}; every other cell has
    vanishing direct image.  The cell (p, q) then pushes forward to
    wedge^q(phi_B) (x) chi[(family, p - q)].
    """

    base: FlagType
    fiber: FlagType
    blocks: BlockStructure
    phi_B: Character
    chi: dict[tuple[str, int], Character]

    def chi_for(self, family: str, j: int) -> Character:
        return self.chi.get((family, j), zero(self.blocks))


def base_fiber_split(ft: FlagType) -> tuple[FlagType, FlagType, PushforwardData]:
    if ft.r < 2:
        raise ValueError("the base/fiber split needs a flag of length r >= 2")
    base = FlagType(ft.m, ft.n, (ft.m, ft.k[1]), (ft.n, ft.l[1]))
    fiber = FlagType(ft.k[1], ft.l[1], ft.k[1:], ft.l[1:])
    blocks = reductive_blocks(base)
    phi_B = named_rep(base, "theta").character
    size = blocks.m + blocks.n
    # rho2 / sigma2 of the base: the second mu- and lambda-blocks
    odd = block_product(blocks, ("rho", 2), ("sigma", 2), True, False) + block_product(
        blocks, ("rho", 2), ("sigma", 2), False, True
    )
    ones = scalar(trivial(blocks), 2)
    adj = zero(blocks)
    for kind, coords in (("rho", blocks.mu_coords(2)), ("sigma", blocks.lambda_coords(2))):
        if len(coords) >= 2:
            hw = [0] * size
            hw[coords[0]] = 1
            hw[coords[-1]] = -1
            adj = adj + irr_char(blocks, tuple(hw))
    chi = {
        ("Av", -1): odd,
        ("Av", 0): ones,
        ("Tv", -1): odd,
        ("Tv", 0): direct_sum(adj, ones),
        ("Cv", 0): adj,
    }
    return base, fiber, PushforwardData(base, fiber, blocks, phi_B, chi)


def fiber_embedding(ft: FlagType, fiber_coords: tuple[int, ...]) -> tuple[int, ...]:
    """Place a weight of the fiber's gl_{k1} + gl_{l1} into the last coordinates of each side."""
    k1, l1 = ft.k[1], ft.l[1]
    mu = (0,) * (ft.m - k1) + tuple(fiber_coords[:k1])
    lam = (0,) * (ft.n - l1) + tuple(fiber_coords[k1:])
    return mu + lam


def base_odd_dimension(ft: FlagType) -> int:
    return odd_dimension(FlagType(ft.m, ft.n, (ft.m, ft.k[1]), (ft.n, ft.l[1])))


def pushforward_rank(ft: FlagType, family: str, p: int, q: int) -> int:
    """Rank of the direct image of a vertical family cell along the first step.

    Equals C(odd-dim B, q) times the dimension of the degree-0 cohomology of
    the fiber with values in the matching fiber sheaf, obtained by running the
    Borel-Weil-Bott engine on the fiber.
    """
    from .bwb_engine import cohomology
    from .sheaf_catalog import fiber_family_rep

    if ft.r < 2:
        raise ValueError("pushforward_rank needs r >= 2")
    if family not in PUSHFORWARD_FAMILIES:
        raise KeyError(f"family {family!r} has no vertical direct image")
    if q < 0:
        return 0
    _, fiber, _ = base_fiber_split(ft)
    rep = fiber_family_rep(fiber, family, p - q)
    if rep is None or not rep:
        return 0
    table = cohomology(fiber, rep, exact=fiber.r == 1)
    return comb(base_odd_dimension(ft), q) * table.total(0)

