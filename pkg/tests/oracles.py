"""Independent reference computations used to check the package.

Each oracle takes a different route from the production code: explicit
subset enumeration, Cech cocycles on two charts, the Weyl alternating sum,
and exhaustive search over long exact sequences.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Sequence


def rank(rows: Sequence[Sequence[Fraction | int]]) -> int:
    work = [[Fraction(x) for x in r] for r in rows if any(r)]
    if not work:
        return 0
    rk, cols = 0, len(work[0])
    for col in range(cols):
        piv = next((i for i in range(rk, len(work)) if work[i][col]), None)
        if piv is None:
            continue
        work[rk], work[piv] = work[piv], work[rk]
        for i in range(len(work)):
            if i != rk and work[i][col]:
                f = work[i][col] / work[rk][col]
                work[i] = [a - f * b for a, b in zip(work[i], work[rk])]
        rk += 1
    return rk


def brute_wedge(weights: Sequence[tuple[int, ...]], q: int) -> dict[tuple[int, ...], int]:
    """Weights of wedge^q by summing every q-subset of the listed weight vectors."""
    size = len(weights[0]) if weights else 0
    out: dict[tuple[int, ...], int] = {}
    for subset in combinations(range(len(weights)), q):
        w = tuple(sum(weights[i][c] for i in subset) for c in range(size))
        out[w] = out.get(w, 0) + 1
    return out


def cech_line_bundle_p1(d: int, window: int = 12) -> tuple[int, int]:
    """(h0, h1) of O(d) on P^1 from the two-chart Cech complex.

    Sections over U0 are polynomials in z, over U1 polynomials in 1/z, and a
    section of O(d) over U1 is z^d times such a polynomial.  The complex is
    truncated to Laurent exponents in [-window, window]; window >= |d| makes
    the answer exact.
    """
    exps = range(-window, window + 1)
    c0 = [("U0", a) for a in exps if a >= 0] + [("U1", a) for a in exps if a <= d]
    c1 = list(exps)
    # differential (f, g) -> f - g on the overlap
    matrix = [[0] * len(c0) for _ in c1]
    for j, (chart, a) in enumerate(c0):
        matrix[c1.index(a)][j] = 1 if chart == "U0" else -1
    rk = rank(matrix)
    # window >= |d| keeps both ends of the window in the image, so nothing spurious survives
    return len(c0) - rk, len(c1) - rk


def alternating_multiplicity(
    entries: dict[tuple[int, ...], int], blocks: Sequence[int], hw: tuple[int, ...]
) -> int:
    """Multiplicity of V(hw) via m = sum_w sign(w) mult(hw + zeta - w zeta), zeta doubled to stay integral."""
    offsets = []
    start = 0
    for size in blocks:
        offsets.append((start, size))
        start += size
    total = 0
    perms_per_block = [list(permutations(range(size))) for size in blocks]
    for choice in product(*perms_per_block):
        sign = 1
        shift = [0] * len(hw)
        for (start, size), perm in zip(offsets, choice):
            inv = sum(1 for i in range(size) for j in range(i + 1, size) if perm[i] > perm[j])
            sign *= -1 if inv % 2 else 1
            two_zeta = [size - 2 * i - 1 for i in range(size)]
            for i in range(size):
                # (zeta - w zeta)_i with (w zeta)_i = zeta_{perm^-1(i)}
                src = perm.index(i)
                diff = two_zeta[i] - two_zeta[src]
                shift[start + i] = diff // 2
        w = tuple(h + s for h, s in zip(hw, shift))
        total += sign * entries.get(w, 0)
    return total


def les_projection(
    dims: Sequence[tuple[int, int]], pins: dict[int, tuple[int, int]] | None = None
) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """Exhaustive search over ranks r_0..r_6 of the seven-term exact sequence.

    ``dims[i] = (lo, hi)`` bounds the i-th term, d_i = r_{i-1} + r_i with
    r_{-1} = 0.  Returns the (min, max) of every term and every rank over all
    feasible assignments; raises ValueError when there is none.
    """
    pins = pins or {}
    bound = max(hi for _, hi in dims)
    feasible = []

    def extend(i: int, prev: int, ranks: list[int]) -> None:
        if i == 7:
            feasible.append(list(ranks))
            return
        lo, hi = dims[i]
        for r in range(0, bound + 1):
            d = prev + r
            if d < lo or d > hi:
                continue
            if i in pins and not pins[i][0] <= r <= pins[i][1]:
                continue
            ranks.append(r)
            extend(i + 1, r, ranks)
            ranks.pop()

    extend(0, 0, [])
    if not feasible:
        raise ValueError("no feasible assignment")
    term = []
    for i in range(7):
        vals = [(rk[i - 1] if i else 0) + rk[i] for rk in feasible]
        term.append((min(vals), max(vals)))
    ranks = [(min(rk[i] for rk in feasible), max(rk[i] for rk in feasible)) for i in range(7)]
    return term, ranks
