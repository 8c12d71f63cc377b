"""Convex polyhedra, Fourier-Motzkin projection, piecewise-affine functions.

A :class:`Polyhedron` is a conjunction of affine constraints ``e <= 0``
or ``e < 0`` over named variables.  Clock variables are implicitly
nonnegative; synthetic variables (names starting with ``$``) are
unrestricted.  Emptiness is decided exactly by eliminating every
variable and inspecting the residual constant constraints.

A :class:`PiecewiseAffineFn` is a finite list of cells, each a
polyhedron paired with an affine (possibly -oo / +oo) value, that
together cover the clock orthant.  Cells may overlap on shared
boundaries; lookups take the maximum over containing cells, so a finite
value wins against -oo on a touching boundary (sup semantics).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Optional, Sequence

from .numerics import (
    NEG_INF,
    POS_INF,
    ZERO,
    AffineExpr,
    ExtendedRational,
    ext,
    to_affine,
)


class NoCellError(LookupError):
    """A piecewise-affine function failed to cover a queried point."""


def is_clock_var(name: str) -> bool:
    return not name.startswith("$")


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    """``expr <= 0`` (non-strict) or ``expr < 0`` (strict).

    Construction rescales by a positive rational to integer
    coefficients with gcd 1, so equal half-spaces compare equal.
    """

    expr: AffineExpr
    strict: bool = False

    def __post_init__(self):
        if not self.expr.is_finite:
            raise ValueError("constraint expression must be finite")
        values = [self.expr.const.value] + list(self.expr.coeffs.values())
        denom_lcm = 1
        for v in values:
            denom_lcm = denom_lcm * v.denominator // gcd(denom_lcm, v.denominator)
        nums = [int(v * denom_lcm) for v in values]
        g = 0
        for n in nums:
            g = gcd(g, abs(n))
        factor = Fraction(denom_lcm, g if g else 1)
        if factor != 1:
            object.__setattr__(self, "expr", self.expr.scale(factor))

    def holds_at(self, valuation: Mapping[str, Fraction]) -> bool:
        v = self.expr.eval(valuation)
        return v < 0 if self.strict else v <= 0

    def negated(self) -> "Constraint":
        return Constraint(-self.expr, not self.strict)

    def is_trivially_true(self) -> bool:
        return self.expr.is_constant and (
            self.expr.const < 0 or (not self.strict and self.expr.const <= 0))

    def is_trivially_false(self) -> bool:
        return self.expr.is_constant and (
            self.expr.const > 0 or (self.strict and self.expr.const >= 0))

    def __repr__(self) -> str:
        op = "<" if self.strict else "<="
        return f"{self.expr} {op} 0"


def le(lhs, rhs) -> Constraint:
    """Constraint ``lhs <= rhs``."""
    return Constraint(to_affine(lhs) - to_affine(rhs), strict=False)


def lt(lhs, rhs) -> Constraint:
    """Constraint ``lhs < rhs``."""
    return Constraint(to_affine(lhs) - to_affine(rhs), strict=True)


def ge(lhs, rhs) -> Constraint:
    return le(rhs, lhs)


def gt(lhs, rhs) -> Constraint:
    return lt(rhs, lhs)


def eq(lhs, rhs) -> Sequence[Constraint]:
    return (le(lhs, rhs), ge(lhs, rhs))


# ---------------------------------------------------------------------------
# Polyhedra
# ---------------------------------------------------------------------------


class Polyhedron:
    """Immutable conjunction of constraints."""

    __slots__ = ("constraints", "_hash")

    def __init__(self, constraints: Iterable[Constraint] = ()):
        kept = []
        for c in constraints:
            if not c.is_trivially_true():
                kept.append(c)
        self.constraints = tuple(_prune_dominated(kept))
        self._hash = hash(self.constraints)

    @staticmethod
    def universe() -> "Polyhedron":
        return Polyhedron()

    @property
    def dimension(self) -> frozenset:
        return self.support()

    def support(self) -> frozenset:
        out = set()
        for c in self.constraints:
            out |= c.expr.support()
        return frozenset(out)

    def __eq__(self, other) -> bool:
        return isinstance(other, Polyhedron) and self.constraints == other.constraints

    def __hash__(self):
        return self._hash

    def __repr__(self) -> str:
        if not self.constraints:
            return "{true}"
        return "{" + " & ".join(repr(c) for c in self.constraints) + "}"

    def contains(self, valuation: Mapping[str, Fraction]) -> bool:
        """Exact membership; missing variables are treated as 0."""
        full = dict(valuation)
        for var in self.support():
            full.setdefault(var, Fraction(0))
        return all(c.holds_at(full) for c in self.constraints)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.constraints + other.constraints)

    def with_constraints(self, extra: Iterable[Constraint]) -> "Polyhedron":
        return Polyhedron(self.constraints + tuple(extra))

    def is_empty(self) -> bool:
        """True iff no point with nonnegative clock coordinates satisfies all
        constraints (synthetic ``$`` variables are unrestricted)."""
        return _is_empty_cached(self)

    def complement_pieces(self) -> list["Polyhedron"]:
        """A disjoint list of polyhedra covering the complement."""
        pieces = []
        prefix: list[Constraint] = []
        for c in self.constraints:
            pieces.append(Polyhedron(prefix + [c.negated()]))
            prefix.append(c)
        return [p for p in pieces if not p.is_empty()]


def _prune_dominated(constraints) -> list[Constraint]:
    """Keep only the tightest constraint per coefficient vector."""
    best = {}
    for c in constraints:
        key = tuple(c.expr.coeffs.items())
        prev = best.get(key)
        if prev is None:
            best[key] = c
            continue
        cc, pc = c.expr.const, prev.expr.const
        if cc > pc or (cc == pc and c.strict and not prev.strict):
            best[key] = c
    return list(best.values())


def fm_eliminate(p: Polyhedron, variables: Iterable[str]) -> Polyhedron:
    """Project away ``variables`` by Fourier-Motzkin elimination.

    Exact over the rationals, including strictness: a combination of a
    strict and a non-strict bound is strict.
    """
    remaining = [v for v in variables]
    constraints = list(p.constraints)
    while remaining:
        # Cheapest variable first keeps intermediate systems small.
        def cost(var):
            lo = sum(1 for c in constraints if c.expr.coeff(var) < 0)
            hi = sum(1 for c in constraints if c.expr.coeff(var) > 0)
            return lo * hi

        var = min(remaining, key=cost)
        remaining.remove(var)
        lowers, uppers, rest = [], [], []
        for c in constraints:
            k = c.expr.coeff(var)
            if k > 0:
                uppers.append(c)
            elif k < 0:
                lowers.append(c)
            else:
                rest.append(c)
        for lo in lowers:
            k_lo = lo.expr.coeff(var)
            for hi in uppers:
                k_hi = hi.expr.coeff(var)
                expr = lo.expr.scale(k_hi) - hi.expr.scale(k_lo)
                rest.append(Constraint(expr, lo.strict or hi.strict))
        constraints = Polyhedron(rest).constraints
        constraints = list(constraints)
    return Polyhedron(constraints)


def _propagate_intervals(p: Polyhedron):
    """Cheap per-variable interval propagation.

    Returns per-variable (lo, hi) ExtendedRational bounds sound for the
    polyhedron (clocks start at [0, +oo)), or None when propagation
    already proves emptiness.
    """
    bounds = {}
    for v in p.support():
        bounds[v] = (ZERO if is_clock_var(v) else NEG_INF, POS_INF)
    for _ in range(3):
        changed = False
        for c in p.constraints:
            for var, k in c.expr.coeffs.items():
                # k * var <= -(rest); bound rest optimistically.
                rest_min = c.expr.const
                broken = False
                for other, k2 in c.expr.coeffs.items():
                    if other == var:
                        continue
                    lo, hi = bounds[other]
                    end = lo if k2 > 0 else hi
                    if not end.is_finite:
                        broken = True
                        break
                    rest_min = rest_min + ext(k2) * end
                if broken:
                    continue
                limit = -rest_min / k
                lo, hi = bounds[var]
                if k > 0 and limit < hi:
                    bounds[var] = (lo, limit)
                    changed = True
                elif k < 0 and limit > lo:
                    bounds[var] = (limit, hi)
                    changed = True
                lo, hi = bounds[var]
                if lo > hi:
                    return None
        if not changed:
            break
    return bounds


def _witness_nonempty(p: Polyhedron, bounds) -> bool:
    """Try one candidate point derived from the propagated bounds."""
    point = {}
    for var, (lo, hi) in bounds.items():
        if lo.is_finite and hi.is_finite:
            point[var] = (lo.value + hi.value) / 2
        elif lo.is_finite:
            point[var] = lo.value
        elif hi.is_finite:
            point[var] = min(hi.value, Fraction(0))
        else:
            point[var] = Fraction(0)
    return all(c.holds_at(point) for c in p.constraints)


@lru_cache(maxsize=400000)
def _is_empty_cached(p: Polyhedron) -> bool:
    if not p.constraints:
        return False
    for c in p.constraints:
        if c.is_trivially_false():
            return True
    bounds = _propagate_intervals(p)
    if bounds is None:
        return True
    if _witness_nonempty(p, bounds):
        return False
    sup = p.support()
    padded = p.with_constraints(
        ge(AffineExpr.var(v), 0) for v in sup if is_clock_var(v))
    residue = fm_eliminate(padded, sorted(padded.support()))
    return any(c.is_trivially_false() for c in residue.constraints)


def is_empty(p: Polyhedron) -> bool:
    return p.is_empty()


def intersect(p: Polyhedron, q: Polyhedron) -> Polyhedron:
    return p.intersect(q)


def poly_entails(p: Polyhedron, c: Constraint) -> bool:
    """Does every point of p satisfy c?"""
    return p.with_constraints([c.negated()]).is_empty()


def refine(partition_a: Sequence[Polyhedron],
           partition_b: Sequence[Polyhedron]) -> list[Polyhedron]:
    """All nonempty pairwise intersections of two cell lists."""
    out = []
    for a in partition_a:
        for b in partition_b:
            cell = a.intersect(b)
            if not cell.is_empty():
                out.append(cell)
    return out


# ---------------------------------------------------------------------------
# Piecewise-affine functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MoveAnnotation:
    """Optimal move attached to a cell: action plus affine interval bounds."""

    action: str
    alpha: AffineExpr
    beta: AffineExpr  # +oo constant for right-unbounded intervals
    attainable: bool = True


@dataclass(frozen=True)
class Cell:
    poly: Polyhedron
    value: AffineExpr
    move: Optional[MoveAnnotation] = None


class PiecewiseAffineFn:
    """A covering of the clock orthant by polyhedral cells with affine values.

    Overlaps are permitted; on overlapping points all finite values must
    agree, and :meth:`eval` returns the maximum over containing cells so
    finite values dominate -oo on touching boundaries.
    """

    __slots__ = ("cells",)

    def __init__(self, cells: Iterable[Cell]):
        self.cells = tuple(c for c in cells if not c.poly.is_empty())

    @staticmethod
    def constant(value, move: Optional[MoveAnnotation] = None) -> "PiecewiseAffineFn":
        return PiecewiseAffineFn([Cell(Polyhedron.universe(), to_affine(value), move)])

    def eval(self, valuation: Mapping[str, Fraction]) -> ExtendedRational:
        cell = self.eval_cell(valuation)
        return cell.value.eval(valuation)

    def eval_cell(self, valuation: Mapping[str, Fraction]) -> Cell:
        """The containing cell realizing the (sup-semantics) value."""
        best = None
        best_val = None
        for cell in self.cells:
            if not cell.poly.contains(valuation):
                continue
            v = cell.value.eval(valuation)
            if best is None or v > best_val or (
                    v == best_val and best.move is None and cell.move is not None):
                best, best_val = cell, v
        if best is None:
            raise NoCellError(f"no cell covers {dict(valuation)}")
        return best

    def restrict(self, poly: Polyhedron) -> "PiecewiseAffineFn":
        """Value unchanged inside ``poly``, -oo outside."""
        cells = [Cell(c.poly.intersect(poly), c.value, c.move) for c in self.cells]
        for piece in poly.complement_pieces():
            cells.append(Cell(piece, AffineExpr(NEG_INF)))
        return PiecewiseAffineFn(cells)

    def simplify(self) -> "PiecewiseAffineFn":
        return PiecewiseAffineFn(simplify_cells(self.cells))


def _split_two(poly: Polyhedron, f: Cell, g: Cell) -> list[tuple[Polyhedron, Cell]]:
    """Split ``poly`` by the comparison of two finite affine values."""
    diff = f.value - g.value
    return [(poly.with_constraints([Constraint(diff)]), g),
            (poly.with_constraints([Constraint(-diff)]), f)]


def _merge_two(fa: PiecewiseAffineFn, fb: PiecewiseAffineFn,
               mode: str) -> PiecewiseAffineFn:
    """Pointwise max / min / mask of two complete covers.

    ``mask``: result is fa's value except where fb is -oo, which forces -oo.
    """
    out: list[Cell] = []
    for ca in fa.cells:
        for cb in fb.cells:
            poly = ca.poly.intersect(cb.poly)
            if poly.is_empty():
                continue
            va, vb = ca.value, cb.value
            if mode == "mask":
                if vb.const.is_neg_inf:
                    out.append(Cell(poly, AffineExpr(NEG_INF)))
                else:
                    out.append(Cell(poly, va, ca.move))
                continue
            want_high = mode == "max"
            if va == vb:
                out.append(Cell(poly, va, ca.move or cb.move))
            elif not va.is_finite or not vb.is_finite:
                pick_a = (va.const > vb.const) == want_high
                win = ca if pick_a else cb
                out.append(Cell(poly, win.value, win.move))
            else:
                for sub, win in _split_two(poly, ca, cb):
                    if not want_high:
                        win = cb if win is ca else ca
                    if not sub.is_empty():
                        out.append(Cell(sub, win.value, win.move))
    return PiecewiseAffineFn(out)


def _dedupe_cells(cells: Sequence[Cell]) -> list[Cell]:
    seen = set()
    out = []
    for c in cells:
        key = (c.poly, c.value, c.move)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def paf_pointwise_max(fns: Sequence[PiecewiseAffineFn]) -> PiecewiseAffineFn:
    if not fns:
        return PiecewiseAffineFn.constant(NEG_INF)
    acc = fns[0]
    for f in fns[1:]:
        acc = PiecewiseAffineFn(_dedupe_cells(_merge_two(acc, f, "max").cells))
    return acc.simplify()


def paf_pointwise_min(fns: Sequence[PiecewiseAffineFn]) -> PiecewiseAffineFn:
    if not fns:
        return PiecewiseAffineFn.constant(POS_INF)
    acc = fns[0]
    for f in fns[1:]:
        acc = PiecewiseAffineFn(_dedupe_cells(_merge_two(acc, f, "min").cells))
    return acc.simplify()


def cover_from_cell(cell: Cell, default) -> PiecewiseAffineFn:
    """Complete the single cell to a cover with ``default`` elsewhere."""
    cells = [cell]
    for piece in cell.poly.complement_pieces():
        cells.append(Cell(piece, to_affine(default)))
    return PiecewiseAffineFn(cells)


def assemble_max(cells: Sequence[Cell]) -> PiecewiseAffineFn:
    """Pointwise max of partial cells, -oo where none applies."""
    acc = PiecewiseAffineFn.constant(NEG_INF)
    for cell in _dedupe_cells(cells):
        if cell.poly.is_empty():
            continue
        merged = _merge_two(acc, cover_from_cell(cell, NEG_INF), "max")
        acc = PiecewiseAffineFn(_dedupe_cells(merged.cells))
    return acc


def assemble_min(cells: Sequence[Cell]) -> PiecewiseAffineFn:
    """Pointwise min of partial cells, +oo where none applies."""
    acc = PiecewiseAffineFn.constant(POS_INF)
    for cell in _dedupe_cells(cells):
        if cell.poly.is_empty():
            continue
        merged = _merge_two(acc, cover_from_cell(cell, POS_INF), "min")
        acc = PiecewiseAffineFn(_dedupe_cells(merged.cells))
    return acc


def mask_outside(f: PiecewiseAffineFn, region_polys: Sequence[Polyhedron]) -> PiecewiseAffineFn:
    """Force -oo outside the union of ``region_polys``."""
    reach = assemble_max([Cell(p, AffineExpr.constant(0)) for p in region_polys])
    return _merge_two(f, reach, "mask").simplify()


# ---------------------------------------------------------------------------
# Cell cleanup
# ---------------------------------------------------------------------------


def minimized(poly: Polyhedron) -> Polyhedron:
    """Drop constraints entailed by the rest (plus clock nonnegativity)."""
    cons = list(poly.constraints)
    changed = True
    while changed:
        changed = False
        for i, c in enumerate(cons):
            rest = Polyhedron(cons[:i] + cons[i + 1:])
            if poly_entails(rest, c):
                cons.pop(i)
                changed = True
                break
    return Polyhedron(cons)


def simplify_cells(cells: Sequence[Cell]) -> list[Cell]:
    """Drop empty, duplicate and subsumed cells, canonicalize the polyhedra,
    and coalesce same-value cells whose union is convex."""
    kept: list[Cell] = []
    seen = set()
    for c in cells:
        if c.poly.is_empty():
            continue
        poly = minimized(c.poly)
        key = (poly, c.value)
        if key in seen:
            continue
        seen.add(key)
        kept.append(Cell(poly, c.value, c.move))

    by_value: dict = {}
    for c in kept:
        by_value.setdefault(c.value, []).append(c)

    out: list[Cell] = []
    for value, group in by_value.items():
        # Subsumption within the group.
        group = [c for i, c in enumerate(group)
                 if not any(j != i and _contains_poly(other.poly, c.poly)
                            for j, other in enumerate(group) if j < i or j > i)]
        merged = True
        while merged and len(group) > 1:
            merged = False
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    hull = _union_hull_if_convex(group[i].poly, group[j].poly)
                    if hull is not None:
                        move = group[i].move or group[j].move
                        rest = [c for k, c in enumerate(group) if k not in (i, j)]
                        group = rest + [Cell(minimized(hull), value, move)]
                        merged = True
                        break
                if merged:
                    break
        out.extend(group)
    return out


def _contains_poly(outer: Polyhedron, inner: Polyhedron) -> bool:
    """Is inner a subset of outer (within the clock orthant)?"""
    return all(poly_entails(inner, c) for c in outer.constraints)


def _union_hull_if_convex(p: Polyhedron, q: Polyhedron) -> Optional[Polyhedron]:
    """The union as one polyhedron when it is convex, else None."""
    common = [c for c in p.constraints if poly_entails(q, c)]
    common += [c for c in q.constraints
               if c not in common and poly_entails(p, c)]
    hull = Polyhedron(common)
    for pp in p.complement_pieces():
        probe = hull.intersect(pp)
        if probe.is_empty():
            continue
        for qq in q.complement_pieces():
            if not probe.intersect(qq).is_empty():
                return None
    return hull


def _coalesce_once(cells: list[Cell]) -> Optional[list[Cell]]:
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            a, b = cells[i], cells[j]
            if a.value != b.value:
                continue
            hull = _union_hull_if_convex(a.poly, b.poly)
            if hull is None:
                continue
            move = a.move or b.move
            rest = [c for k, c in enumerate(cells) if k not in (i, j)]
            rest.append(Cell(hull, a.value, move))
            return rest
    return None


# ---------------------------------------------------------------------------
# Minimization along the diagonal delay direction
# ---------------------------------------------------------------------------


def _delay_window(poly: Polyhedron, clock_vars: Sequence[str]):
    """Bounds on d such that ``v + d*1`` satisfies ``poly``; constraints not
    moved by the delay are ignored (they constrain v, not d)."""
    lowers: list[tuple[AffineExpr, bool]] = []   # d >= expr
    uppers: list[tuple[AffineExpr, bool]] = []   # d <= expr
    for c in poly.constraints:
        k = c.expr.coeff_sum(clock_vars)
        if k != 0:
            bound = -c.expr.scale(Fraction(1, 1) / k)
            if k > 0:
                uppers.append((bound, c.strict))
            else:
                lowers.append((bound, c.strict))
    return lowers, uppers


def _shifted(poly: Polyhedron, clock_vars: Sequence[str], delay: str) -> Polyhedron:
    """The polyhedron in (v, d) space: ``v + d*1`` satisfies ``poly``."""
    d = AffineExpr.var(delay)
    out = []
    for c in poly.constraints:
        k = c.expr.coeff_sum(clock_vars)
        out.append(Constraint(c.expr + d.scale(k), c.strict))
    return Polyhedron(out)


def minimize_along_delay(f: PiecewiseAffineFn, inv: Polyhedron) -> PiecewiseAffineFn:
    """``v -> min over d >= 0 with v + d |= inv of f(v + d)``.

    The minimum ranges over delays that land in a finite or +oo cell;
    -oo cells are never selectable, and valuations from which no delay
    reaches any such cell map to -oo.  An affine value on a delay
    segment attains its minimum at an endpoint, so per visited cell the
    entry or exit delay (by slope sign) yields the candidate value.
    """
    delay = "$d"
    d_var = AffineExpr.var(delay)
    candidates: list[Cell] = []
    regions: list[Polyhedron] = []
    for cell in f.cells:
        if cell.value.const.is_neg_inf:
            continue
        clock_vars = sorted(set().union(cell.poly.support(), inv.support(),
                                        cell.value.support()))
        clock_vars = [v for v in clock_vars if is_clock_var(v)]
        window = _shifted(cell.poly.intersect(inv), clock_vars, delay)
        window = window.with_constraints([ge(d_var, 0)])
        if window.is_empty():
            continue
        region = fm_eliminate(window, [delay])
        if region.is_empty():
            continue
        regions.append(region)
        if not cell.value.is_finite:
            candidates.append(Cell(region, cell.value))
            continue
        slope = cell.value.coeff_sum(clock_vars)
        lowers, uppers = _delay_window(cell.poly.intersect(inv), clock_vars)
        lowers.append((AffineExpr.constant(0), False))
        if slope == 0:
            candidates.append(Cell(region, cell.value))
        elif slope > 0:
            for expr, region_sub in _argopt_regions(region, lowers, maximize=True):
                candidates.append(Cell(region_sub, cell.value + expr.scale(slope)))
        else:
            if not uppers:
                candidates.append(Cell(region, AffineExpr(NEG_INF)))
            else:
                for expr, region_sub in _argopt_regions(region, uppers, maximize=False):
                    candidates.append(Cell(region_sub, cell.value + expr.scale(slope)))
    result = assemble_min(candidates)
    return mask_outside(result, regions)


def _argopt_regions(base: Polyhedron, bounds: Sequence[tuple[AffineExpr, bool]],
                    maximize: bool):
    """Split ``base`` into regions where each bound realizes the max / min."""
    exprs = []
    for expr, _strict in bounds:
        if expr not in exprs:
            exprs.append(expr)
    for expr in exprs:
        extra = []
        for other in exprs:
            if other is expr:
                continue
            extra.append(ge(expr, other) if maximize else le(expr, other))
        region = base.with_constraints(extra)
        if not region.is_empty():
            yield expr, region
