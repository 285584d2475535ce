"""Borel-Weil-Bott evaluation on flag manifolds of GL_m x GL_n."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Protocol

from .characters import Character, decompose, tensor, wedge
from .flag_geometry import (
    FlagType,
    ValidatedFlagType,
    base_fiber_split,
    odd_dimension,
    reductive_blocks,
    validate_flag_type,
)
from .root_weights import Weight, classify_coords, weyl_dim_coords
from .sheaf_catalog import (
    SPLIT_FAMILIES,
    UNDEFINED_AT_R1,
    UNKNOWN,
    ZERO,
    Exact,
    LesNode,
    Range,
    SheafId,
    filtration_chain,
    les_chain,
    sheaf_rep,
)

if TYPE_CHECKING:
    from .super_charts import CocycleResult

Coords = tuple[int, ...]


class Mode(Enum):
    EXACT = "Exact"
    UPPER_BOUND = "UpperBound"


@dataclass(frozen=True)
class CohomologyTable:
    """Per-degree G-constituents (dominant highest weight, multiplicity, dimension)."""

    m: int
    n: int
    degrees: dict[int, tuple[tuple[Coords, int, int], ...]]
    mode: Mode
    constituents: int = 0
    singular: int = 0

    def total(self, d: int) -> int:
        return sum(mult * dim for _, mult, dim in self.degrees.get(d, ()))

    def totals(self) -> dict[int, int]:
        return {d: self.total(d) for d in sorted(self.degrees)}

    def modules(self, d: int) -> list[tuple[Weight, int, int]]:
        return [(Weight.from_coords(w, self.m), mult, dim) for w, mult, dim in self.degrees.get(d, ())]

    def node(self) -> LesNode:
        """Ranges for H^0..H^2: exact values, or [0, value] for upper bounds."""
        vals = [self.total(d) for d in range(3)]
        if self.mode is Mode.EXACT:
            return LesNode(*(Range(v, v) for v in vals))
        return LesNode(*(Range(0, v) for v in vals))


def cohomology(ft: FlagType, c: Character, exact: bool = False) -> CohomologyTable:
    """Apply the Bott recipe to every R-irreducible constituent of ``c``.

    ``exact`` states that the fiber representation is completely reducible;
    otherwise the answer computed from the semisimplification is reported as
    an upper bound.
    """
    blocks = reductive_blocks(ft)
    if c.blocks != blocks:
        raise ValueError(f"character blocks {c.blocks} do not match {ft.label()}")
    m, n = ft.m, ft.n
    found: dict[int, dict[Coords, int]] = {}
    decomposition = decompose(c)
    singular = 0
    for hw, mult in decomposition.constituents:
        index, dot = classify_coords(hw, m, n)
        if index is None:
            singular += mult
            continue
        slot = found.setdefault(index, {})
        slot[dot] = slot.get(dot, 0) + mult
    degrees = {
        d: tuple((w, mult, weyl_dim_coords(w, m, n)) for w, mult in sorted(found[d].items(), reverse=True))
        for d in sorted(found)
    }
    total = sum(mult for _, mult in decomposition.constituents)
    return CohomologyTable(m, n, degrees, Mode.EXACT if exact else Mode.UPPER_BOUND, total, singular)


def invariant_dims(table: CohomologyTable) -> dict[int, int]:
    """Multiplicity of the trivial G-module in every degree."""
    zero = (0,) * (table.m + table.n)
    return {d: sum(mult for w, mult, _ in table.degrees[d] if w == zero) for d in sorted(table.degrees)}


def table_to_json(table: CohomologyTable) -> dict:
    return {
        "m": table.m,
        "n": table.n,
        "mode": table.mode.value,
        "constituents": table.constituents,
        "singular": table.singular,
        "degrees": {
            str(d): [[list(w), mult, dim] for w, mult, dim in mods] for d, mods in table.degrees.items()
        },
    }


def table_from_json(data: dict) -> CohomologyTable:
    degrees = {
        int(d): tuple((tuple(w), int(mult), int(dim)) for w, mult, dim in mods) for d, mods in data["degrees"].items()
    }
    return CohomologyTable(
        int(data["m"]), int(data["n"]), degrees, Mode(data["mode"]), int(data["constituents"]), int(data["singular"])
    )


# ---------------------------------------------------------------------------
# rigidity analysis


class Verdict(Enum):
    RIGID = "Rigid"
    NOT_PROVEN = "NotProven"
    OUTSIDE_HYPOTHESES = "OutsideHypotheses"


class OutsideHypothesesError(ValueError):
    """Raised for flag types outside the admissible range unless explicitly allowed."""


@dataclass(frozen=True)
class Assumption:
    key: str
    statement: str
    kind: str  # "external", "structural" or "computed"


ASSUMPTIONS: dict[str, Assumption] = {
    a.key: a
    for a in (
        Assumption(
            "grassmannian-semisimple",
            "On a super-grassmannian the fiber representations of O_p, A_p and C_p are completely "
            "reducible, so Borel-Weil-Bott on their characters is exact.",
            "external",
        ),
        Assumption(
            "pushforward-vertical",
            "A vertical cell (p, q) pushes forward along the first flag step to "
            "wedge^q(phi_B) (x) H^0(S, X_{S,p-q}) with the base nilradical acting trivially, "
            "and R^1 vanishes whenever the fiber H^1 does.",
            "structural",
        ),
        Assumption(
            "pullback-horizontal",
            "A horizontal cell (p, q) is the pullback of the base piece X_{B,q} tensored with "
            "wedge^{p-q} of the fiber odd tangent bundle.",
            "structural",
        ),
        Assumption(
            "a00-sections",
            "H^0(A_{0(0)}) is 2-dimensional (two independent even degree-0 fields of the odd "
            "vertical and horizontal gradings), i.e. the connecting map H^0(A_{0,-1}) -> H^1(A_{0(0)}) "
            "is not needed to produce sections.",
            "external",
        ),
        Assumption(
            "grassmannian-t2",
            "For an admissible super-grassmannian B, H^1(B, T_{B,2}) is one-dimensional.",
            "external",
        ),
        Assumption(
            "t22-cocycle",
            "H^1(T_22) is computed by invariant cochains of the base nilradical; the two-parameter "
            "candidate family spans them, so Z^1 = 0 from the chart oracle forces H^1(T_22) = 0.",
            "computed",
        ),
        Assumption(
            "fiber-recursion",
            "H^1(T^v_20) equals H^1 of the degree-2 graded tangent piece of the fiber flag supermanifold.",
            "structural",
        ),
        Assumption(
            "non-split",
            "Flag supermanifolds of admissible type are non-split, so H^1(T_2) is nonzero.",
            "external",
        ),
        Assumption(
            "pgl-codim-1",
            "H^0(T_(0)) is pgl_{m|n} and its image in H^0(T_0) has codimension 1.",
            "external",
        ),
    )
}


Cell = tuple[int, int]


@dataclass
class RigidityVerdict:
    flag_type: FlagType
    validated: ValidatedFlagType
    verdict: Verdict
    h1_T2: Range
    h1_T: Range
    h1_T2_provenance: tuple[str, ...]
    cells: dict[str, dict[Cell, LesNode]]
    pieces: dict[str, dict[int, LesNode]]
    tables: dict[str, CohomologyTable]
    cocycle: CocycleResult | None
    assumptions: tuple[Assumption, ...]
    steps: tuple[str, ...]

    @property
    def rigid(self) -> bool:
        return self.verdict is Verdict.RIGID


class CellCache(Protocol):
    def get(self, key: str) -> dict | None: ...

    def put(self, key: str, value: dict) -> None: ...


def _direct_job(args: tuple[FlagType, SheafId]) -> tuple[SheafId, CohomologyTable | None]:
    ft, sid = args
    return sid, direct_table(ft, sid)


def direct_table(ft: FlagType, sid: SheafId) -> CohomologyTable | None:
    """Bott recipe on the semisimplified fiber representation of one sheaf cell."""
    rep = sheaf_rep(ft, sid)
    if rep is UNDEFINED_AT_R1:
        return None
    return cohomology(ft, rep, exact=ft.r == 1 and sid.q is None and sid.family in ("O", "A", "C"))


def _fiber_node(fiber: FlagType, family: str, j: int) -> LesNode:
    """Cohomology ranges on the fiber of the ungraded piece matching a vertical family."""
    if j < -1:
        return LesNode.zero()
    exact = fiber.r == 1

    def node(fam: str) -> LesNode:
        return cohomology(fiber, sheaf_rep(fiber, SheafId(fam, j)), exact=exact).node()

    if family == "Av":
        return node("A")
    if family == "Cv":
        return node("C")
    return les_chain(node("A"), LesNode(), node("C")).mid


@lru_cache(maxsize=None)
def _split(ft: FlagType):
    return base_fiber_split(ft)


@lru_cache(maxsize=None)
def _base_piece(base: FlagType, family: str, q: int, t2_fact: bool) -> LesNode:
    """Exact ranges of the base pieces A_{B,q}, C_{B,q}, and T_{B,q} via its les."""

    def node(fam: str) -> LesNode:
        return cohomology(base, sheaf_rep(base, SheafId(fam, q)), exact=True).node()

    if family == "A":
        return node("A")
    if family == "C":
        return node("C")
    mid = LesNode(h1=Exact(1)) if (t2_fact and q == 2) else LesNode()
    return les_chain(node("A"), mid, node("C")).mid


def pushforward_node(ft: FlagType, sid: SheafId, t2_fact: bool = False) -> LesNode:
    """Ranges of H^0 and H^1 obtained by pushing a split cell forward to the base.

    Returns an unconstrained node when the route has nothing to say.
    """
    if ft.r < 2 or sid.q is None or sid.family not in SPLIT_FAMILIES:
        return LesNode()
    rep = sheaf_rep(ft, sid)
    if not rep:
        return LesNode.zero()
    base, fiber, data = _split(ft)
    fam, p, q = sid.family, sid.p, sid.q
    j = p - q
    if fam in ("Av", "Cv", "Tv"):
        fib = _fiber_node(fiber, fam, j)
        fiber_h1_zero = fib.h1.hi == 0
        if fib.h0.hi == 0:
            return LesNode(ZERO, ZERO if fiber_h1_zero else UNKNOWN, UNKNOWN, ("pushforward: fiber H^0 = 0",))
        chi = data.chi.get((fam, j))
        if chi is None or not fib.h0.is_exact or fib.h0.value != chi.dim:
            return LesNode()
        if q < 0:
            return LesNode.zero()
        image = tensor(wedge(data.phi_B, q), chi)
        tb = cohomology(base, image, exact=True)
        h1 = Exact(tb.total(1)) if fiber_h1_zero else Range(tb.total(1), None)
        return LesNode(Exact(tb.total(0)), h1, UNKNOWN, (f"pushforward: wedge^{q} phi_B (x) chi[{fam},{j}]",))
    # horizontal cells: pullback from the base twisted by wedge^j of the fiber odd tangent
    if j < 0:
        return LesNode.zero()
    fib = cohomology(fiber, sheaf_rep(fiber, SheafId("O", j)), exact=fiber.r == 1).node()
    if fib.h0.hi == 0:
        return LesNode(ZERO, ZERO if fib.h1.hi == 0 else UNKNOWN, UNKNOWN, ("pullback: fiber H^0 = 0",))
    if j != 0:
        return LesNode()
    base_fam = {"Ah": "A", "Ch": "C", "Th": "T"}[fam]
    piece = _base_piece(base, base_fam, q, t2_fact)
    return LesNode(piece.h0, piece.h1, UNKNOWN, (f"pullback of {base_fam}_B[{q}]",))


def _compute_tables(
    ft: FlagType, sids: list[SheafId], jobs: int, cache: CellCache | None
) -> dict[SheafId, CohomologyTable | None]:
    out: dict[SheafId, CohomologyTable | None] = {}
    todo = []
    for sid in sids:
        hit = cache.get(f"{ft.key()}/{sid.label()}") if cache is not None else None
        if hit is not None:
            out[sid] = table_from_json(hit)
        else:
            todo.append(sid)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_direct_job, [(ft, sid) for sid in todo], chunksize=8))
    else:
        results = [_direct_job((ft, sid)) for sid in todo]
    for sid, table in results:
        out[sid] = table
        if cache is not None and table is not None:
            cache.put(f"{ft.key()}/{sid.label()}", table_to_json(table))
    return out


def rigidity_report(
    ft: FlagType,
    allow_nonadmissible: bool = False,
    jobs: int = 1,
    cache: CellCache | None = None,
    cocycle: CocycleResult | None = None,
    disable: frozenset[str] = frozenset(),
) -> RigidityVerdict:
    """Decide whether H^1(T) vanishes, recording every fact the argument relies on.

    Cell values combine the direct semisimplified calculation with the
    pushforward route; pieces are assembled through long exact sequences and
    the filtrations by q and by p.  Facts named in ``disable`` are withheld,
    which shows what each one contributes.
    """
    validated = validate_flag_type(ft)
    inside = validated.admissible
    if not inside and not allow_nonadmissible:
        raise OutsideHypothesesError(f"{ft.label()} is not admissible: {validated.reason}")
    used: list[str] = []
    steps: list[str] = []

    def use(key: str) -> bool:
        if key in disable:
            return False
        if key not in used:
            used.append(key)
        return True

    N = odd_dimension(ft)
    ps = list(range(-1, N + 1))
    tables: dict[str, CohomologyTable] = {}
    cells: dict[str, dict[Cell, LesNode]] = {}
    pieces: dict[str, dict[int, LesNode]] = {"A": {}, "C": {}, "T": {}}

    if ft.r == 1:
        semisimple = use("grassmannian-semisimple")
        sids = [SheafId(fam, p) for fam in ("A", "C") for p in ps]
        computed = _compute_tables(ft, sids, jobs, cache)
        for sid, table in computed.items():
            tables[sid.label()] = table
            if not semisimple:
                table = replace(table, mode=Mode.UPPER_BOUND)
            pieces[sid.family][sid.p] = table.node().note(f"BWB {sid.label()}")
        for p in ps:
            known = LesNode()
            if p == 2 and inside and use("grassmannian-t2"):
                known = LesNode(h1=Exact(1), provenance=("super-grassmannian H^1(T_2) = C",))
            pieces["T"][p] = les_chain(pieces["A"][p], known, pieces["C"][p]).mid
        h1_t2_prov = ("external value for super-grassmannians",) if inside else ("les of A_2 and C_2",)
        cocycle_result = None
    else:
        routes = {
            fam: use("pushforward-vertical") if fam.endswith("v") else use("pullback-horizontal")
            for fam in ("Av", "Cv", "Tv", "Ah", "Ch", "Th")
        }
        if any(routes.values()):
            use("grassmannian-semisimple")  # the base and fiber of the split are super-grassmannians
        split = ("Av", "Ah", "Cv", "Ch", "Tv", "Th")
        grid = [(p, q) for p in ps for q in range(-1, p + 2)]
        sids = [SheafId(fam, p, q) for fam in split for p, q in grid]
        computed = _compute_tables(ft, sids, jobs, cache)
        t2_fact = inside and "grassmannian-t2" not in disable
        for sid, table in computed.items():
            tables[sid.label()] = table
            node = table.node().note(f"ss BWB {sid.label()}")
            if routes[sid.family]:
                node = node.refine(pushforward_node(ft, sid, t2_fact))
            cells.setdefault(sid.family, {})[(sid.p, sid.q)] = node
        if t2_fact:
            use("grassmannian-t2")
        # assemble the split cells
        for (p, q) in grid:
            av, ah, cv, ch = (cells[f][(p, q)] for f in ("Av", "Ah", "Cv", "Ch"))
            tv = les_chain(av, cells["Tv"][(p, q)], cv).mid
            th = les_chain(ah, cells["Th"][(p, q)], ch).mid
            cells["Tv"][(p, q)] = tv
            cells["Th"][(p, q)] = th
            cells.setdefault("A", {})[(p, q)] = av + ah
            cells.setdefault("C", {})[(p, q)] = les_chain(cv, LesNode(), ch).mid
        # candidate cocycle of the (2,2) cell, and the fiber recursion for (2,0)
        cocycle_result = None
        if inside and use("t22-cocycle"):
            from .super_charts import vertical_cocycle_dim

            cocycle_result = cocycle or vertical_cocycle_dim(ft, _trivial_count(ft, SheafId("T", 2, 2)))
            steps.append(
                f"chart oracle: Z^1 = {cocycle_result.z1}, B^1 = {cocycle_result.b1}, H^1 = {cocycle_result.h1}"
            )
        if inside and use("fiber-recursion"):
            _, fiber, _ = _split(ft)
            fiber_report = rigidity_report(fiber, jobs=jobs, cache=cache, disable=disable)
            for key in (a.key for a in fiber_report.assumptions):
                use(key)
            cells["Tv"][(2, 0)] = cells["Tv"][(2, 0)].refine(
                LesNode(h1=fiber_report.h1_T2, provenance=(f"fiber {fiber.label()}: H^1(T_2) = {fiber_report.h1_T2}",))
            )
            steps.append(f"fiber {fiber.label()}: H^1(T_2) = {fiber_report.h1_T2}")
        for (p, q) in grid:
            tv, th = cells["Tv"][(p, q)], cells["Th"][(p, q)]
            a, c = cells["A"][(p, q)], cells["C"][(p, q)]
            known = LesNode()
            if (p, q) == (2, 2) and cocycle_result is not None and cocycle_result.b1_exact:
                known = LesNode(h1=Exact(cocycle_result.h1), provenance=("chart cocycle oracle",))
            t = les_chain(tv, known, th).mid
            cells.setdefault("T", {})[(p, q)] = les_chain(a, t, c).mid
        # filtrations over q
        for p in ps:
            qs = list(range(-1, p + 2))
            known_a = {}
            if p == 0 and inside and use("a00-sections"):
                known_a = {1: LesNode(h0=Exact(2), provenance=("H^0(A_{0(0)}) = 2",))}
            a_chain = filtration_chain([cells["A"][(p, q)] for q in qs], known=known_a)
            c_chain = filtration_chain([cells["C"][(p, q)] for q in qs])
            t_chain = filtration_chain([cells["T"][(p, q)] for q in qs])
            pieces["A"][p] = a_chain[0]
            pieces["C"][p] = c_chain[0]
            pieces["T"][p] = les_chain(a_chain[0], t_chain[0], c_chain[0]).mid
        h1_t2_prov = (
            "filtration of T_2 over q",
            f"H^1(T_22) from the chart oracle: {cocycle_result.h1 if cocycle_result else 'not used'}",
            f"H^1(T^v_20) = {cells['Tv'][(2, 0)].h1} from the fiber",
        )
    h1_T2 = pieces["T"][2].h1
    if inside and h1_T2.hi is not None and h1_T2.hi >= 1 and use("non-split"):
        h1_T2 = h1_T2.intersect(Range(1, None))
        pieces["T"][2] = pieces["T"][2].refine(LesNode(h1=Range(1, None), provenance=("non-split",)))
        h1_t2_prov = h1_t2_prov + ("non-split: H^1(T_2) >= 1",)
    steps.append(f"H^1(T_2) = {h1_T2}")
    # main filtration T = T_(-1) > T_(0) > ... with quotients T_p
    facts = {}
    if inside and use("pgl-codim-1"):
        facts = {ps.index(0): {"delta0": Exact(1)}}
    main = filtration_chain([pieces["T"][p] for p in ps], facts=facts)
    h1_T = main[0].h1
    for p, node in zip(ps, main):
        if p <= 3:
            steps.append(f"H^1(T_({p})) = {node.h1}")
    if not inside:
        verdict = Verdict.OUTSIDE_HYPOTHESES
    elif h1_T.is_exact and h1_T.value == 0:
        verdict = Verdict.RIGID
    else:
        verdict = Verdict.NOT_PROVEN
    return RigidityVerdict(
        ft,
        validated,
        verdict,
        h1_T2,
        h1_T,
        h1_t2_prov,
        cells,
        pieces,
        tables,
        cocycle_result,
        tuple(ASSUMPTIONS[k] for k in used),
        tuple(steps),
    )


def _trivial_count(ft: FlagType, sid: SheafId) -> int:
    """Multiplicity of the trivial R-module in the fiber of a cell: bounds invariant 0-cochains."""
    rep = sheaf_rep(ft, sid)
    zero = (0,) * (ft.m + ft.n)
    return sum(mult for hw, mult in decompose(rep).constituents if hw == zero)
