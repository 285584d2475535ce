"""Coordinate-level model of a flag supermanifold.

A chart Z_I is a tuple of supermatrices Z_{I_s} of size
(k_{s-1}+l_{s-1}) x (k_s+l_s) whose rows I_s carry an identity matrix; the
other entries are free coordinates x (even rows, even columns), xi (even
rows, odd columns), eta (odd rows, even columns) and y (odd rows, odd
columns).  Functions on a chart are supercommutative polynomials with exact
rational coefficients; chart changes and the group action involve inverses
of minors and are carried out with formal inversion.

Sign conventions: odd variables are kept in increasing registry order inside
a monomial, derivatives are left derivatives, and the fundamental vector
field of L is the first-order term of z -> (1 + eps L) . z, so that its
displayed coefficients have positive sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Iterable, Iterator, Mapping, Sequence

from .flag_geometry import FlagType

# ---------------------------------------------------------------------------
# supercommutative polynomials

EvenPart = tuple[tuple[int, int], ...]  # sorted (variable index, exponent) pairs
OddPart = tuple[int, ...]  # strictly increasing odd variable indices
Monomial = tuple[EvenPart, OddPart]


@dataclass(frozen=True)
class Variable:
    name: str
    odd: bool
    kind: str = ""  # x, y, xi, eta
    step: int = 0
    row: int = 0
    col: int = 0

    def __str__(self) -> str:
        return self.name


class Registry:
    """Ordered set of even and odd variables shared by a family of polynomials."""

    def __init__(self, variables: Iterable[Variable] = ()):
        self.even: list[Variable] = []
        self.odd: list[Variable] = []
        self._index: dict[str, tuple[bool, int]] = {}
        for v in variables:
            self.add(v)

    def add(self, v: Variable) -> tuple[bool, int]:
        if v.name in self._index:
            raise ValueError(f"duplicate variable {v.name}")
        target = self.odd if v.odd else self.even
        self._index[v.name] = (v.odd, len(target))
        target.append(v)
        return self._index[v.name]

    def key(self, name: str) -> tuple[bool, int]:
        return self._index[name]

    def variable(self, key: tuple[bool, int]) -> Variable:
        odd, i = key
        return self.odd[i] if odd else self.even[i]

    def keys(self) -> list[tuple[bool, int]]:
        return [(False, i) for i in range(len(self.even))] + [(True, i) for i in range(len(self.odd))]

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def gen(self, name: str) -> SuperPolynomial:
        odd, i = self._index[name]
        return SuperPolynomial.generator(self, odd, i)


def _merge_even(a: EvenPart, b: EvenPart) -> EvenPart:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for i, e in b:
        d[i] = d.get(i, 0) + e
    return tuple(sorted(d.items()))


def _merge_odd(a: OddPart, b: OddPart) -> tuple[int, OddPart] | None:
    """Sign and sorted union of two odd monomials, or None when they overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    if set(a) & set(b):
        return None
    # sign of sorting the concatenation a + b: count pairs x in a, y in b, x > y
    swaps = 0
    for x in a:
        for y in b:
            if x > y:
                swaps += 1
    return (-1 if swaps % 2 else 1), tuple(sorted(a + b))


class SuperPolynomial:
    """Element of C[even variables] (x) Lambda[odd variables] with rational coefficients."""

    __slots__ = ("registry", "terms")

    def __init__(self, registry: Registry, terms: Mapping[Monomial, Fraction] | None = None):
        self.registry = registry
        self.terms: dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                if c:
                    self.terms[mono] = Fraction(c)

    # construction -------------------------------------------------------
    @classmethod
    def constant(cls, registry: Registry, c: int | Fraction) -> SuperPolynomial:
        return cls(registry, {((), ()): Fraction(c)})

    @classmethod
    def generator(cls, registry: Registry, odd: bool, i: int) -> SuperPolynomial:
        mono: Monomial = ((), (i,)) if odd else (((i, 1),), ())
        return cls(registry, {mono: Fraction(1)})

    @classmethod
    def monomial(cls, registry: Registry, even: Sequence[int], odd: Sequence[int], c: int | Fraction = 1) -> SuperPolynomial:
        """c * prod(x_even) * odd_0 odd_1 ... in the given (possibly unsorted) order."""
        out = cls.constant(registry, c)
        for i in even:
            out = out * cls.generator(registry, False, i)
        for j in odd:
            out = out * cls.generator(registry, True, j)
        return out

    def _new(self, terms: Mapping[Monomial, Fraction]) -> SuperPolynomial:
        return SuperPolynomial(self.registry, terms)

    def _lift(self, other: SuperPolynomial | int | Fraction) -> SuperPolynomial:
        if isinstance(other, SuperPolynomial):
            return other
        return SuperPolynomial.constant(self.registry, other)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: SuperPolynomial | int | Fraction) -> SuperPolynomial:
        other = self._lift(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, 0) + c
        return self._new(out)

    __radd__ = __add__

    def __neg__(self) -> SuperPolynomial:
        return self._new({mono: -c for mono, c in self.terms.items()})

    def __sub__(self, other: SuperPolynomial | int | Fraction) -> SuperPolynomial:
        return self + (-self._lift(other))

    def __rsub__(self, other: SuperPolynomial | int | Fraction) -> SuperPolynomial:
        return self._lift(other) - self

    def __mul__(self, other: SuperPolynomial | int | Fraction) -> SuperPolynomial:
        if not isinstance(other, SuperPolynomial):
            c = Fraction(other)
            return self._new({mono: c * v for mono, v in self.terms.items()})
        out: dict[Monomial, Fraction] = {}
        for (ea, oa), ca in self.terms.items():
            for (eb, ob), cb in other.terms.items():
                merged = _merge_odd(oa, ob)
                if merged is None:
                    continue
                sign, odd = merged
                mono = (_merge_even(ea, eb), odd)
                out[mono] = out.get(mono, 0) + sign * ca * cb
        return self._new(out)

    def __rmul__(self, other: int | Fraction) -> SuperPolynomial:
        return self * other

    def __pow__(self, k: int) -> SuperPolynomial:
        out = SuperPolynomial.constant(self.registry, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = SuperPolynomial.constant(self.registry, other)
        if not isinstance(other, SuperPolynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    # structure ----------------------------------------------------------
    def parity(self) -> int | None:
        """0 or 1 for homogeneous elements, None for mixed parity (0 counts as even)."""
        parities = {len(odd) % 2 for _, odd in self.terms}
        if not parities:
            return 0
        return parities.pop() if len(parities) == 1 else None

    def odd_degree_part(self, d: int) -> SuperPolynomial:
        return self._new({mono: c for mono, c in self.terms.items() if len(mono[1]) == d})

    def body(self) -> SuperPolynomial:
        """Component free of odd variables."""
        return self.odd_degree_part(0)

    def is_even_only(self) -> bool:
        return all(not odd for _, odd in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get(((), ()), Fraction(0))

    def is_constant(self) -> bool:
        return all(mono == ((), ()) for mono in self.terms)

    def degree(self) -> int:
        """Total degree counting every variable once."""
        return max((sum(e for _, e in ev) + len(od) for ev, od in self.terms), default=0)

    def filter(self, keep) -> SuperPolynomial:
        return self._new({mono: c for mono, c in self.terms.items() if keep(mono)})

    def derivative(self, key: tuple[bool, int]) -> SuperPolynomial:
        """Left partial derivative with respect to a registry variable."""
        odd, i = key
        out: dict[Monomial, Fraction] = {}
        for (ev, od), c in self.terms.items():
            if odd:
                if i not in od:
                    continue
                pos = od.index(i)
                sign = -1 if pos % 2 else 1
                mono = (ev, od[:pos] + od[pos + 1 :])
                out[mono] = out.get(mono, 0) + sign * c
            else:
                d = dict(ev)
                e = d.get(i, 0)
                if not e:
                    continue
                if e == 1:
                    del d[i]
                else:
                    d[i] = e - 1
                mono = (tuple(sorted(d.items())), od)
                out[mono] = out.get(mono, 0) + e * c
        return self._new(out)

    def substitute(self, values: Mapping[tuple[bool, int], SuperRational]) -> SuperRational:
        """Evaluate at rational values of the variables, respecting odd order.

        Terms are summed over one common denominator, the product of the
        distinct value denominators raised to their largest exponent.
        """
        reg = values_registry(values, self.registry)
        dens: list[SuperPolynomial] = []
        den_index: dict[tuple[bool, int], int] = {}
        for key, v in values.items():
            if v.den.is_constant() and v.den.constant_term() == 1:
                continue
            for t, d in enumerate(dens):
                if d == v.den:
                    den_index[key] = t
                    break
            else:
                den_index[key] = len(dens)
                dens.append(v.den)
        pending: list[tuple[SuperPolynomial, list[int]]] = []
        top = [0] * len(dens)
        for (ev, od), c in self.terms.items():
            num = SuperPolynomial.constant(reg, c)
            exps = [0] * len(dens)
            factors = [((False, i), e) for i, e in ev] + [((True, j), 1) for j in od]
            for key, e in factors:
                v = values[key]
                for _ in range(e):
                    num = num * v.num
                if key in den_index:
                    exps[den_index[key]] += e
            pending.append((num, exps))
            top = [max(a, b) for a, b in zip(top, exps)]
        total = SuperPolynomial(reg)
        for num, exps in pending:
            for d, have, want in zip(dens, exps, top):
                if want > have:
                    num = num * d ** (want - have)
            total = total + num
        den = SuperPolynomial.constant(reg, 1)
        for d, e in zip(dens, top):
            den = den * d**e
        return SuperRational(total, den)._norm()

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (ev, od), c in sorted(self.terms.items()):
            factors = [
                self.registry.even[i].name + (f"^{e}" if e > 1 else "") for i, e in ev
            ] + [self.registry.odd[j].name for j in od]
            body = "*".join(factors)
            if not body:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def values_registry(values: Mapping[tuple[bool, int], SuperRational], fallback: Registry) -> Registry:
    for v in values.values():
        return v.num.registry
    return fallback


# ---------------------------------------------------------------------------
# rational functions with even denominators


@dataclass(frozen=True, eq=False)
class SuperRational:
    """num / den with den free of odd variables; compared by cross-multiplication."""

    num: SuperPolynomial
    den: SuperPolynomial

    def __post_init__(self) -> None:
        if not self.den.is_even_only() or not self.den:
            raise ValueError("denominator must be a nonzero polynomial in even variables")

    @classmethod
    def from_poly(cls, p: SuperPolynomial) -> SuperRational:
        return cls(p, SuperPolynomial.constant(p.registry, 1))

    def _norm(self) -> SuperRational:
        if self.den.is_constant():
            c = self.den.constant_term()
            if c != 1:
                return SuperRational(self.num * (1 / c), SuperPolynomial.constant(self.num.registry, 1))
        return self

    def __add__(self, other: SuperRational) -> SuperRational:
        if self.den == other.den:
            return SuperRational(self.num + other.num, self.den)._norm()
        return SuperRational(self.num * other.den + other.num * self.den, self.den * other.den)._norm()

    def __neg__(self) -> SuperRational:
        return SuperRational(-self.num, self.den)

    def __sub__(self, other: SuperRational) -> SuperRational:
        return self + (-other)

    def __mul__(self, other: SuperRational) -> SuperRational:
        return SuperRational(self.num * other.num, self.den * other.den)._norm()

    def inverse_even(self) -> SuperRational:
        if not self.num.is_even_only():
            raise ValueError("only odd-free elements are inverted directly")
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return SuperRational(self.den, self.num)._norm()

    def inverse(self) -> SuperRational:
        """Inverse of an element with invertible body, via the nilpotent expansion.

        For x = (B + N) / D with B the body and N nilpotent,
        1/x = D * sum_k (-N)^k B^(K-k) / B^(K+1), where (-N)^(K+1) = 0.
        """
        body = self.num.body()
        if not body:
            raise ZeroDivisionError("element has no invertible body")
        step = -(self.num - body)
        powers = [SuperPolynomial.constant(self.num.registry, 1)]
        while True:
            nxt = powers[-1] * step
            if not nxt:
                break
            powers.append(nxt)
        top = len(powers) - 1
        num = SuperPolynomial(self.num.registry)
        for k, pw in enumerate(powers):
            num = num + pw * body ** (top - k)
        return SuperRational(self.den * num, body ** (top + 1))._norm()

    def is_zero(self) -> bool:
        return not self.num

    def body(self) -> SuperRational:
        return SuperRational(self.num.body(), self.den)

    def equals(self, other: SuperRational) -> bool:
        return self.num * other.den == other.num * self.den

    def as_polynomial(self) -> SuperPolynomial | None:
        if self.den.is_constant():
            return self.num * (1 / self.den.constant_term())
        return None

    def __str__(self) -> str:
        poly = self.as_polynomial()
        if poly is not None:
            return str(poly)
        return f"({self.num}) / ({self.den})"


# ---------------------------------------------------------------------------
# derivations


class Derivation:
    """Vector field sum_v coeff_v * d/dv with left derivatives."""

    __slots__ = ("registry", "coeffs")

    def __init__(self, registry: Registry, coeffs: Mapping[tuple[bool, int], SuperPolynomial] | None = None):
        self.registry = registry
        self.coeffs: dict[tuple[bool, int], SuperPolynomial] = {}
        for key, c in (coeffs or {}).items():
            if c:
                self.coeffs[key] = c

    def parity(self) -> int | None:
        parities = set()
        for (odd, _), c in self.coeffs.items():
            pc = c.parity()
            if pc is None:
                return None
            parities.add((pc + int(odd)) % 2)
        if not parities:
            return 0
        return parities.pop() if len(parities) == 1 else None

    def __call__(self, f: SuperPolynomial) -> SuperPolynomial:
        out = SuperPolynomial(self.registry)
        for key, c in self.coeffs.items():
            d = f.derivative(key)
            if d:
                out = out + c * d
        return out

    def __add__(self, other: Derivation) -> Derivation:
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            out[key] = out[key] + c if key in out else c
        return Derivation(self.registry, out)

    def __neg__(self) -> Derivation:
        return Derivation(self.registry, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: Derivation) -> Derivation:
        return self + (-other)

    def scale(self, c: int | Fraction) -> Derivation:
        return Derivation(self.registry, {k: v * c for k, v in self.coeffs.items()})

    def bracket(self, other: Derivation) -> Derivation:
        """Supercommutator [X, Y] = XY - (-1)^{|X||Y|} YX of homogeneous fields."""
        px, py = self.parity(), other.parity()
        if px is None or py is None:
            raise ValueError("bracket needs homogeneous derivations")
        sign = -1 if px * py else 1
        out: dict[tuple[bool, int], SuperPolynomial] = {}
        keys = set(self.coeffs) | set(other.coeffs)
        zero = SuperPolynomial(self.registry)
        for key in keys:
            value = self(other.coeffs.get(key, zero)) - other(self.coeffs.get(key, zero)) * sign
            if value:
                out[key] = value
        return Derivation(self.registry, out)

    def filter_terms(self, keep) -> Derivation:
        """Keep the terms c * mono * d/dv for which keep(key, mono) holds."""
        out = {}
        for key, c in self.coeffs.items():
            kept = c.filter(lambda mono, key=key: keep(key, mono))
            if kept:
                out[key] = kept
        return Derivation(self.registry, out)

    def restrict(self, keys: Iterable[tuple[bool, int]]) -> Derivation:
        keys = set(keys)
        return Derivation(self.registry, {k: c for k, c in self.coeffs.items() if k in keys})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for key in sorted(self.coeffs):
            parts.append(f"({self.coeffs[key]}) d/d{self.registry.variable(key).name}")
        return " + ".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# charts


@dataclass(frozen=True)
class ChartIndex:
    """Identity rows I_s = (I_{s,even}, I_{s,odd}) for s = 1..r, 1-based row numbers."""

    rows: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]


def standard_index(ft: FlagType) -> ChartIndex:
    rows = []
    for s in range(1, ft.r + 1):
        kp, ks = ft.k[s - 1], ft.k[s]
        lp, ls = ft.l[s - 1], ft.l[s]
        rows.append((tuple(range(kp - ks + 1, kp + 1)), tuple(range(lp - ls + 1, lp + 1))))
    return ChartIndex(tuple(rows))


def all_indices(ft: FlagType) -> list[ChartIndex]:
    per_step = []
    for s in range(1, ft.r + 1):
        kp, ks = ft.k[s - 1], ft.k[s]
        lp, ls = ft.l[s - 1], ft.l[s]
        per_step.append(
            [(a, b) for a in combinations(range(1, kp + 1), ks) for b in combinations(range(1, lp + 1), ls)]
        )
    return [ChartIndex(tuple(choice)) for choice in product(*per_step)]


class MalformedChartError(ValueError):
    pass


class DisjointChartsError(ValueError):
    pass


Matrix = list[list[SuperRational]]


@dataclass
class Chart:
    """Free coordinates of the chart Z_I and the matrices Z_{I_s} built from them."""

    ft: FlagType
    index: ChartIndex
    registry: Registry
    prefix: str = ""
    coords: dict[tuple[int, int, int], tuple[bool, int]] = field(default_factory=dict)  # (s, row, col) -> key

    @cached_property
    def matrices(self) -> list[list[list[SuperPolynomial]]]:
        """Z_{I_s} as nested lists of polynomials, rows and columns 0-based."""
        out = []
        for s in range(1, self.ft.r + 1):
            kp, ks, lp, ls = self.ft.k[s - 1], self.ft.k[s], self.ft.l[s - 1], self.ft.l[s]
            even_rows, odd_rows = self.index.rows[s - 1]
            ident = {r - 1: t for t, r in enumerate(even_rows)}
            ident.update({kp + r - 1: ks + t for t, r in enumerate(odd_rows)})
            mat = []
            for row in range(kp + lp):
                line = []
                for col in range(ks + ls):
                    if row in ident:
                        line.append(SuperPolynomial.constant(self.registry, 1 if ident[row] == col else 0))
                    else:
                        odd, i = self.coords[(s, row, col)]
                        line.append(SuperPolynomial.generator(self.registry, odd, i))
                mat.append(line)
            out.append(mat)
        return out

    def keys_of_step(self, s: int) -> list[tuple[bool, int]]:
        return [key for (step, _, _), key in sorted(self.coords.items()) if step == s]

    def variable(self, kind: str, s: int, i: int, j: int) -> tuple[bool, int]:
        """Registry key of the free coordinate kind^s_{ij} (1-based row and column numbers)."""
        return self.registry.key(f"{self.prefix}{kind}{s}_{i}_{j}")

    def counts(self) -> dict[int, tuple[int, int]]:
        """(even, odd) coordinate counts per step."""
        out: dict[int, list[int]] = {}
        for (s, _, _), (odd, _) in self.coords.items():
            slot = out.setdefault(s, [0, 0])
            slot[int(odd)] += 1
        return {s: (v[0], v[1]) for s, v in sorted(out.items())}


def build_chart(ft: FlagType, index: ChartIndex | None = None, registry: Registry | None = None, prefix: str = "") -> Chart:
    """Register the free entries of every Z_{I_s} outside its identity rows.

    Coordinates are named kind{s}_{i}_{j}, where i counts free rows of the
    relevant parity block and j the columns of the relevant parity block.
    """
    index = index or standard_index(ft)
    if len(index.rows) != ft.r:
        raise MalformedChartError(f"chart index needs {ft.r} steps, got {len(index.rows)}")
    registry = registry if registry is not None else Registry()
    chart = Chart(ft, index, registry, prefix)
    for s in range(1, ft.r + 1):
        kp, ks, lp, ls = ft.k[s - 1], ft.k[s], ft.l[s - 1], ft.l[s]
        even_rows, odd_rows = index.rows[s - 1]
        if (
            len(even_rows) != ks
            or len(odd_rows) != ls
            or len(set(even_rows)) != ks
            or len(set(odd_rows)) != ls
            or any(not 1 <= r <= kp for r in even_rows)
            or any(not 1 <= r <= lp for r in odd_rows)
        ):
            raise MalformedChartError(f"step {s}: rows {index.rows[s - 1]} do not fit sizes {kp}|{lp} -> {ks}|{ls}")
        free_even = [r for r in range(1, kp + 1) if r not in even_rows]
        free_odd = [r for r in range(1, lp + 1) if r not in odd_rows]
        for i, r in enumerate(free_even, start=1):
            for col in range(ks + ls):
                odd_col = col >= ks
                j = col - ks + 1 if odd_col else col + 1
                kind = "xi" if odd_col else "x"
                v = Variable(f"{prefix}{kind}{s}_{i}_{j}", odd_col, kind, s, i, j)
                chart.coords[(s, r - 1, col)] = registry.add(v)
        for i, r in enumerate(free_odd, start=1):
            for col in range(ks + ls):
                odd_col = col >= ks
                j = col - ks + 1 if odd_col else col + 1
                kind = "y" if odd_col else "eta"
                v = Variable(f"{prefix}{kind}{s}_{i}_{j}", not odd_col, kind, s, i, j)
                chart.coords[(s, kp + r - 1, col)] = registry.add(v)
    return chart


# ---------------------------------------------------------------------------
# matrix algebra over SuperRational


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    zero = _zero_like(a, b)
    out = []
    for i in range(rows):
        line = []
        for j in range(cols):
            acc = zero
            for t in range(inner):
                if a[i][t].is_zero() or b[t][j].is_zero():
                    continue
                acc = acc + a[i][t] * b[t][j]
            line.append(acc)
        out.append(line)
    return out


def _zero_like(*mats: Matrix) -> SuperRational:
    for mat in mats:
        for line in mat:
            for entry in line:
                return SuperRational.from_poly(SuperPolynomial(entry.num.registry))
    raise ValueError("empty matrices")


def _rows(mat: Matrix, rows: Sequence[int]) -> Matrix:
    return [list(mat[r]) for r in rows]


def _invert_body(mat: Matrix) -> Matrix:
    """Inverse of a matrix whose entries are free of odd variables."""
    size = len(mat)
    reg = mat[0][0].num.registry
    one = SuperRational.from_poly(SuperPolynomial.constant(reg, 1))
    zero = SuperRational.from_poly(SuperPolynomial(reg))
    work = [list(line) + [one if i == j else zero for j in range(size)] for i, line in enumerate(mat)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if not work[r][col].is_zero()), None)
        if pivot is None:
            raise DisjointChartsError("transition minor has a singular body")
        work[col], work[pivot] = work[pivot], work[col]
        inv = work[col][col].inverse_even()
        work[col] = [e * inv for e in work[col]]
        for r in range(size):
            if r != col and not work[r][col].is_zero():
                factor = work[r][col]
                work[r] = [e - factor * p for e, p in zip(work[r], work[col])]
    return [line[size:] for line in work]


def _poly_det(
    mat: list[list[SuperPolynomial]],
    rows: tuple[int, ...],
    cols: tuple[int, ...],
    memo: dict[tuple[tuple[int, ...], tuple[int, ...]], SuperPolynomial],
) -> SuperPolynomial:
    """Determinant of an odd-free polynomial minor by memoized Laplace expansion."""
    reg = mat[0][0].registry
    if not rows:
        return SuperPolynomial.constant(reg, 1)
    key = (rows, cols)
    if key in memo:
        return memo[key]
    acc = SuperPolynomial(reg)
    for idx, c in enumerate(cols):
        entry = mat[rows[0]][c]
        if not entry:
            continue
        sub = _poly_det(mat, rows[1:], cols[:idx] + cols[idx + 1 :], memo)
        if sub:
            acc = acc + entry * sub if idx % 2 == 0 else acc - entry * sub
    memo[key] = acc
    return acc


def _polynomial_inverse(mat: list[list[SuperPolynomial]], odd_count: int) -> Matrix:
    """Inverse of a polynomial supermatrix over the single denominator det(body)^(K+1).

    With B the body, N the nilpotent part and adj(B) = det(B) B^{-1}, the
    terms P_k = (-adj(B) N)^k adj(B) give M^{-1} = sum_k P_k / det(B)^{k+1}.
    """
    size = len(mat)
    reg = mat[0][0].registry
    body = [[e.body() for e in line] for line in mat]
    nil = [[mat[i][j] - body[i][j] for j in range(size)] for i in range(size)]
    memo: dict = {}
    full = tuple(range(size))
    det = _poly_det(body, full, full, memo)
    if not det:
        raise DisjointChartsError("transition minor has a singular body")
    adj = [
        [
            _poly_det(body, full[:j] + full[j + 1 :], full[:i] + full[i + 1 :], memo) * (-1 if (i + j) % 2 else 1)
            for j in range(size)
        ]
        for i in range(size)
    ]
    step = [[-e for e in line] for line in _poly_matmul(adj, nil)]
    terms = [adj]
    for _ in range(odd_count):
        nxt = _poly_matmul(step, terms[-1])
        if not any(e for line in nxt for e in line):
            break
        terms.append(nxt)
    top = len(terms) - 1
    num = [[SuperPolynomial(reg) for _ in range(size)] for _ in range(size)]
    for k, term in enumerate(terms):
        scale = det ** (top - k)
        for i in range(size):
            for j in range(size):
                if term[i][j]:
                    num[i][j] = num[i][j] + term[i][j] * scale
    den = det ** (top + 1)
    return [[SuperRational(num[i][j], den)._norm() for j in range(size)] for i in range(size)]


def formal_inverse(mat: Matrix, odd_count: int) -> Matrix:
    """Inverse via body inverse and the finite Neumann series of the nilpotent part."""
    size = len(mat)
    polys = [[e.as_polynomial() for e in line] for line in mat]
    if all(p is not None for line in polys for p in line):
        return _polynomial_inverse(polys, odd_count)  # type: ignore[arg-type]
    body = [[e.body() for e in line] for line in mat]
    nil = [[mat[i][j] - body[i][j] for j in range(size)] for i in range(size)]
    body_inv = _invert_body(body)
    step = [[-e for e in line] for line in _matmul(body_inv, nil)]
    result = body_inv
    power = body_inv
    for _ in range(odd_count):
        power = _matmul(step, power)
        if all(e.is_zero() for line in power for e in line):
            break
        result = [[a + b for a, b in zip(la, lb)] for la, lb in zip(result, power)]
    return result


def _rational_matrix(mat: list[list[SuperPolynomial]]) -> Matrix:
    return [[SuperRational.from_poly(e) for e in line] for line in mat]


def _identity_rows(ft: FlagType, index: ChartIndex, s: int) -> list[int]:
    kp = ft.k[s - 1]
    even_rows, odd_rows = index.rows[s - 1]
    return [r - 1 for r in even_rows] + [kp + r - 1 for r in odd_rows]


def transition(ft: FlagType, source: ChartIndex, target: ChartIndex, chart: Chart | None = None) -> tuple[Chart, Chart, dict[tuple[bool, int], SuperRational]]:
    """Coordinates of the chart ``target`` as functions on the chart ``source``.

    Returns (source chart, target chart, map from target registry keys to
    rational functions in the source coordinates).
    """
    chart = chart or build_chart(ft, source)
    target_chart = build_chart(ft, target, Registry(), prefix="")
    odd_count = len(chart.registry.odd)
    result: dict[tuple[bool, int], SuperRational] = {}
    previous: Matrix | None = None
    for s in range(1, ft.r + 1):
        z = _rational_matrix(chart.matrices[s - 1])
        if previous is not None:
            z = _matmul(previous, z)
        c = _rows(z, _identity_rows(ft, target, s))
        c_inv = formal_inverse(c, odd_count)
        z_target = _matmul(z, c_inv)
        for (step, row, col), key in target_chart.coords.items():
            if step == s:
                result[key] = z_target[row][col]
        previous = c
    return chart, target_chart, result


def compose_transitions(
    first: dict[tuple[bool, int], SuperRational], second: dict[tuple[bool, int], SuperRational]
) -> dict[tuple[bool, int], SuperRational]:
    """Substitute the coordinates ``first`` into the expressions ``second``."""
    out = {}
    for key, expr in second.items():
        out[key] = expr.num.substitute(first) * expr.den.substitute(first).inverse()
    return out


def transitions_agree(
    first: dict[tuple[bool, int], SuperRational],
    second: dict[tuple[bool, int], SuperRational],
    direct: dict[tuple[bool, int], SuperRational],
) -> bool:
    """Whether substituting ``first`` into ``second`` gives ``direct``, checked without inversion.

    second = n / d becomes a / d1 over b / d2 after substitution; b is even
    with invertible body, so a / d1 = (b / d2) * (p / q) is equivalent to
    a * d2 * q == p * d1 * b.
    """
    for key, target in direct.items():
        expr = second[key]
        top = expr.num.substitute(first)
        bottom = expr.den.substitute(first)
        if top.num * bottom.den * target.den != target.num * top.den * bottom.num:
            return False
    return True


# ---------------------------------------------------------------------------
# group action


def _poly_matmul(a: list[list[SuperPolynomial]], b: list[list[SuperPolynomial]]) -> list[list[SuperPolynomial]]:
    out = []
    for i in range(len(a)):
        line = []
        for j in range(len(b[0])):
            acc = None
            for t in range(len(b)):
                if not a[i][t] or not b[t][j]:
                    continue
                term = a[i][t] * b[t][j]
                acc = term if acc is None else acc + term
            line.append(acc if acc is not None else SuperPolynomial(b[0][0].registry))
        out.append(line)
    return out


def lie_parity(ft: FlagType, L: Sequence[Sequence[int | Fraction]]) -> int | None:
    m = ft.m
    size = ft.m + ft.n
    parities = {(i >= m) ^ (j >= m) for i in range(size) for j in range(size) if L[i][j]}
    if not parities:
        return 0
    return int(parities.pop()) if len(parities) == 1 else None


def fundamental_field(ft: FlagType, L: Sequence[Sequence[int | Fraction]], chart: Chart) -> Derivation:
    """First-order term of Z_1 -> (1 + eps L) Z_1 C_1^{-1}, Z_s -> C_{s-1} Z_s C_s^{-1}.

    With K_1 = rows_{I_1}(L Z_1) and K_s = rows_{I_s}(K_{s-1} Z_s), the
    variation of Z_s is K_{s-1} Z_s - Z_s' K_s (K_0 = L), where Z_s' negates the
    odd entries when L is odd (the odd parameter eps passes them).
    """
    parity = lie_parity(ft, L)
    if parity is None:
        raise ValueError("L must be homogeneous")
    reg = chart.registry
    size = ft.m + ft.n
    # gl_{m|n} indices: even coordinates first, then odd ones, matching row order of Z_1
    left = [[SuperPolynomial.constant(reg, L[i][j]) for j in range(size)] for i in range(size)]
    coeffs: dict[tuple[bool, int], SuperPolynomial] = {}
    for s in range(1, ft.r + 1):
        z = chart.matrices[s - 1]
        v = _poly_matmul(left, z)
        k = [list(v[r]) for r in _identity_rows(ft, chart.index, s)]
        ks = ft.k[s]
        if parity:
            z = [[-e if ((r >= ft.k[s - 1]) != (c >= ks)) else e for c, e in enumerate(line)] for r, line in enumerate(z)]
        zk = _poly_matmul(z, k)
        for (step, row, col), key in chart.coords.items():
            if step == s:
                value = v[row][col] - zk[row][col]
                if value:
                    coeffs[key] = value
        left = k
    return Derivation(reg, coeffs)


def elementary(ft: FlagType, i: int, j: int, c: int = 1) -> list[list[int]]:
    """Matrix unit of gl_{m|n} (0-based indices, even block first)."""
    size = ft.m + ft.n
    out = [[0] * size for _ in range(size)]
    out[i][j] = c
    return out


def supercommutator(ft: FlagType, a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> list[list[int]]:
    size = ft.m + ft.n
    pa, pb = lie_parity(ft, a), lie_parity(ft, b)
    sign = -1 if (pa and pb) else 1
    ab = [[sum(a[i][t] * b[t][j] for t in range(size)) for j in range(size)] for i in range(size)]
    ba = [[sum(b[i][t] * a[t][j] for t in range(size)) for j in range(size)] for i in range(size)]
    return [[ab[i][j] - sign * ba[i][j] for j in range(size)] for i in range(size)]


# ---------------------------------------------------------------------------
# bigrading of the retract along the first flag step


def bidegree(chart: Chart, key: tuple[bool, int], mono: Monomial) -> tuple[int, int]:
    """(p, q)-degree of the term mono * d/d(key): odd degree, and base odd degree."""
    reg = chart.registry
    odd_vars = mono[1]
    p = len(odd_vars)
    q = sum(1 for j in odd_vars if reg.odd[j].step == 1)
    v = reg.variable(key)
    if v.odd:
        p -= 1
        if v.step == 1:
            q -= 1
    return p, q


def retract_field(chart: Chart, field_: Derivation) -> Derivation:
    """Bidegree (0, 0) component: the field induced on the bigraded retract."""
    return field_.filter_terms(lambda key, mono: bidegree(chart, key, mono) == (0, 0))


def vertical_part(chart: Chart, field_: Derivation) -> Derivation:
    return field_.restrict(k for k in chart.registry.keys() if chart.registry.variable(k).step >= 2)


def horizontal_part(chart: Chart, field_: Derivation) -> Derivation:
    return field_.restrict(k for k in chart.registry.keys() if chart.registry.variable(k).step == 1)


# ---------------------------------------------------------------------------
# the invariant cochains with values in the (2,2)-graded tangent piece


def nilradical_basis(ft: FlagType) -> list[tuple[str, int, int, list[list[int]]]]:
    """Basis e_{ab} (even side) and f_{ab} (odd side) of the base nilradical."""
    m, n, k1, l1 = ft.m, ft.n, ft.k[1], ft.l[1]
    out = []
    for a in range(1, k1 + 1):
        for b in range(1, m - k1 + 1):
            out.append(("e", a, b, elementary(ft, m - k1 + a - 1, b - 1)))
    for a in range(1, l1 + 1):
        for b in range(1, n - l1 + 1):
            out.append(("f", a, b, elementary(ft, m + n - l1 + a - 1, m + b - 1)))
    return out


def cochain_values(ft: FlagType, chart: Chart) -> dict[tuple[str, int, int], Derivation]:
    """c(e_ab) = sum_ij eta1_{ia} xi1_{bj} d/dy1_{ij} and c(f_ab) = sum_ij xi1_{ia} eta1_{bj} d/dx1_{ij}."""
    reg = chart.registry
    m, n, k1, l1 = ft.m, ft.n, ft.k[1], ft.l[1]
    out: dict[tuple[str, int, int], Derivation] = {}
    for a in range(1, k1 + 1):
        for b in range(1, m - k1 + 1):
            coeffs = {}
            for i in range(1, n - l1 + 1):
                for j in range(1, l1 + 1):
                    poly = reg.gen(f"eta1_{i}_{a}") * reg.gen(f"xi1_{b}_{j}")
                    coeffs[chart.variable("y", 1, i, j)] = poly
            out[("e", a, b)] = Derivation(reg, coeffs)
    for a in range(1, l1 + 1):
        for b in range(1, n - l1 + 1):
            coeffs = {}
            for i in range(1, m - k1 + 1):
                for j in range(1, k1 + 1):
                    poly = reg.gen(f"xi1_{i}_{a}") * reg.gen(f"eta1_{b}_{j}")
                    coeffs[chart.variable("x", 1, i, j)] = poly
            out[("f", a, b)] = Derivation(reg, coeffs)
    return out


@dataclass(frozen=True)
class CocycleResult:
    z1: int
    b1: int
    h1: int
    vertical_rank: int
    full_rank: int
    equations: int
    b1_exact: bool = True


def _rank(rows: list[list[Fraction]]) -> int:
    work = [list(r) for r in rows if any(r)]
    rank = 0
    cols = len(work[0]) if work else 0
    for col in range(cols):
        pivot = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for i in range(len(work)):
            if i != rank and work[i][col]:
                f = work[i][col] / work[rank][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[rank])]
        rank += 1
    return rank


def _coefficient_rows(fields: Sequence[Derivation]) -> list[list[Fraction]]:
    """One equation per (vector-field slot, monomial): the coefficients of the parameters."""
    slots: dict[tuple[tuple[bool, int], Monomial], list[Fraction]] = {}
    for idx, fld in enumerate(fields):
        for key, poly in fld.coeffs.items():
            for mono, c in poly.terms.items():
                slots.setdefault((key, mono), [Fraction(0)] * len(fields))[idx] += c
    return list(slots.values())


class UndefinedAtR1Error(ValueError):
    """The construction needs a second flag step."""


def vertical_cocycle_dim(ft: FlagType, invariant_trivials: int | None = None) -> CocycleResult:
    """Dimension of invariant 1-cocycles in the two-parameter family a*c(e) + b*c(f).

    delta c(x, y) = x.c(y) - y.c(x) for x, y in the abelian base nilradical,
    where x acts on vector fields by bracket with its fundamental field on the
    retract.  The vertical components give linear equations in (a, b); the
    horizontal components are added for the full cocycle condition.
    ``invariant_trivials`` bounds the invariant 0-cochains (for B^1).
    """
    if ft.r < 2:
        raise UndefinedAtR1Error("undefined at r = 1: the cochain family needs a second flag step")
    chart = build_chart(ft)
    basis = nilradical_basis(ft)
    fields = {(t, a, b): retract_field(chart, fundamental_field(ft, L, chart)) for t, a, b, L in basis}
    values = cochain_values(ft, chart)
    vertical_rows: list[list[Fraction]] = []
    full_rows: list[list[Fraction]] = []
    labels = list(fields)
    for i, x in enumerate(labels):
        for y in labels[i + 1 :] + [x]:
            parts = []
            for family in ("e", "f"):
                cx = values[x] if x[0] == family else Derivation(chart.registry)
                cy = values[y] if y[0] == family else Derivation(chart.registry)
                parts.append(fields[x].bracket(cy) - fields[y].bracket(cx))
            vertical_rows += _coefficient_rows([vertical_part(chart, p) for p in parts])
            full_rows += _coefficient_rows(parts)
    v_rank = _rank(vertical_rows)
    f_rank = _rank(full_rows)
    z1 = 2 - f_rank
    if z1 == 0:
        b1, exact = 0, True
    elif invariant_trivials == 0:
        b1, exact = 0, True
    else:
        b1, exact = min(z1, invariant_trivials if invariant_trivials is not None else z1), False
    return CocycleResult(z1, b1, z1 - b1, v_rank, f_rank, len(full_rows), exact)


def iter_monomials(p: SuperPolynomial) -> Iterator[tuple[Monomial, Fraction]]:
    yield from sorted(p.terms.items())
