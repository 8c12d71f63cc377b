"""Exact maximization of ``min(beta - alpha, a*alpha + b, c*beta + d)``.

The objective is maximized over the box domain

    D = { (alpha, beta) : m_a <= alpha <= M_a,  m_b <= beta <= M_b,
          alpha <= beta }

in two flavours:

* :func:`solve_box_concrete` with rational data, returning the maximal
  value and one maximizer;
* :func:`solve_box_symbolic` where ``b``, ``d`` and the four bounds are
  affine in the clock valuation ``v`` (the slopes ``a`` and ``c`` stay
  rational constants), returning a case list: polyhedral conditions on
  ``v``, each with an affine value and affine maximizer.

Both follow the same closed-form case analysis, keyed on the signs of
``a`` and ``c``.  The domain is normalized first (``M_a`` capped at
``M_b``, ``m_b`` raised to ``m_a``), which leaves D unchanged and makes
every min/max of bounds appearing in the case rows a plain bound.
Upper bounds may be +oo; then the corresponding slope must be zero (a
cell with an unbounded delay window carries a constant value) and the
width term drops out.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .numerics import (
    NEG_INF,
    POS_INF,
    AffineExpr,
    ExtendedRational,
    ext,
    ext_min,
    to_affine,
)
from .polyhedra import Constraint, Polyhedron, le


class EmptyDomainError(ValueError):
    pass


class NonConstantSlopeError(ValueError):
    """The slopes a, c must not depend on the valuation."""


class UnboundedSlopeError(ValueError):
    """An unbounded interval must carry a constant (zero-slope) value."""


@dataclass(frozen=True)
class Bound:
    """One side of the box: an affine expression plus a strictness flag.

    ``strict`` records that the bound stems from a strict constraint, so
    a maximizer sitting exactly on it is a supremum, not attained.
    """

    expr: AffineExpr
    strict: bool = False

    @property
    def is_pos_inf(self) -> bool:
        return self.expr.const.is_pos_inf

    @staticmethod
    def of(value, strict: bool = False) -> "Bound":
        return Bound(to_affine(value), strict)


UNBOUNDED = Bound(AffineExpr(POS_INF))


@dataclass(frozen=True)
class BoxProblem:
    a: Fraction
    c: Fraction
    b: AffineExpr            # offset of f; +oo constant allowed (forces a == 0)
    d: AffineExpr            # offset of g; +oo constant allowed (forces c == 0)
    m_alpha: Bound
    M_alpha: Bound
    m_beta: Bound
    M_beta: Bound

    def __post_init__(self):
        if not self.b.is_finite and self.a != 0:
            raise UnboundedSlopeError("infinite b requires a == 0")
        if not self.d.is_finite and self.c != 0:
            raise UnboundedSlopeError("infinite d requires c == 0")
        if self.M_beta.is_pos_inf and self.c != 0:
            raise UnboundedSlopeError("unbounded beta requires c == 0")

    @staticmethod
    def concrete(a, b, c, d, m_alpha, M_alpha, m_beta, M_beta,
                 strict=(False, False, False, False)) -> "BoxProblem":
        def bound(x, s):
            if ext(x) == POS_INF:
                return UNBOUNDED
            return Bound(to_affine(Fraction(x)), s)
        return BoxProblem(Fraction(a), Fraction(c),
                          AffineExpr(ext(b)), AffineExpr(ext(d)),
                          bound(m_alpha, strict[0]), bound(M_alpha, strict[1]),
                          bound(m_beta, strict[2]), bound(M_beta, strict[3]))


@dataclass(frozen=True)
class BoxResult:
    value: ExtendedRational
    alpha: ExtendedRational
    beta: ExtendedRational
    attainable: bool


@dataclass(frozen=True)
class OptCase:
    """One symbolic case: on ``condition``, the max is ``value`` at
    ``(alpha, beta)``."""

    condition: Polyhedron
    value: AffineExpr
    alpha: AffineExpr
    beta: AffineExpr
    attainable: bool


@dataclass(frozen=True)
class SymbolicOptResult:
    cases: tuple[OptCase, ...]


def mu_eval(p: BoxProblem, alpha, beta) -> ExtendedRational:
    """``min(beta - alpha, f(alpha), g(beta))`` for a concrete problem."""
    alpha = ext(alpha)
    beta = ext(beta)
    _require_in_domain(p, alpha, beta)
    if beta.is_pos_inf:
        width: ExtendedRational = POS_INF
        g_term = p.d.const
    else:
        width = beta - alpha
        g_term = ext(p.c) * beta + p.d.const if p.d.is_finite else p.d.const
    f_term = ext(p.a) * alpha + p.b.const if p.b.is_finite else p.b.const
    return ext_min([width, f_term, g_term])


def _require_in_domain(p: BoxProblem, alpha: ExtendedRational, beta: ExtendedRational):
    checks = [
        p.m_alpha.expr.const <= alpha,
        alpha <= p.M_alpha.expr.const,
        p.m_beta.expr.const <= beta,
        beta <= p.M_beta.expr.const,
        alpha <= beta,
    ]
    if not all(checks):
        raise EmptyDomainError(f"({alpha}, {beta}) outside the box domain")


# ---------------------------------------------------------------------------
# Concrete solver
# ---------------------------------------------------------------------------


def _normalize_concrete(p: BoxProblem):
    """Cap M_a at M_b and raise m_b to m_a; D is unchanged."""
    ma, Ma, mb, Mb = p.m_alpha, p.M_alpha, p.m_beta, p.M_beta
    if not Mb.is_pos_inf and (Ma.is_pos_inf or Ma.expr.const > Mb.expr.const):
        Ma = Mb
    elif not Ma.is_pos_inf and Ma.expr.const == Mb.expr.const:
        Ma = Bound(Ma.expr, Ma.strict or Mb.strict)
    if mb.expr.const < ma.expr.const:
        mb = ma
    elif mb.expr.const == ma.expr.const:
        mb = Bound(mb.expr, mb.strict or ma.strict)
    return ma, Ma, mb, Mb


def solve_box_concrete(p: BoxProblem) -> BoxResult:
    """Maximum of mu over D with one maximizer, by the closed-form cases.

    Raises EmptyDomainError when D is empty.  ``attainable`` is False
    when the reported maximizer touches a strict bound (the value is
    then a supremum approached arbitrarily closely).
    """
    if p.b.const.is_neg_inf or p.d.const.is_neg_inf:
        ma = p.m_alpha.expr.const
        return BoxResult(NEG_INF, ma, max(ma, p.m_beta.expr.const), False)

    ma_b, Ma_b, mb_b, Mb_b = _normalize_concrete(p)
    ma, mb = ma_b.expr.const, mb_b.expr.const
    Ma: ExtendedRational = POS_INF if Ma_b.is_pos_inf else Ma_b.expr.const
    Mb: ExtendedRational = POS_INF if Mb_b.is_pos_inf else Mb_b.expr.const
    if ma > Ma or mb > Mb or ma > Mb:
        raise EmptyDomainError("box domain is empty")

    a, c, b, d = ext(p.a), ext(p.c), p.b.const, p.d.const

    def res(value, alpha, beta, touched):
        # Row formulas may place the maximizer outside D when the objective
        # is negative; the value is still the max, so clamp the point back.
        beta = min(max(ext(beta), mb), Mb)
        alpha = min(max(ext(alpha), ma), Ma, beta)
        attainable = all(not t.strict for t in touched)
        value = ext(value)
        if attainable and value.is_finite and not beta.is_pos_inf:
            assert mu_eval(p, alpha, beta) == value
        return BoxResult(value, alpha, beta, attainable)

    if Mb.is_pos_inf:
        # Width is unbounded, g is constant; optimize f over the alpha range.
        if Ma.is_pos_inf:
            if p.a != 0:
                raise UnboundedSlopeError("unbounded alpha requires a == 0")
            return res(ext_min([b, d]), ma, POS_INF, [ma_b])
        alpha = Ma if p.a > 0 else ma
        touched = [Ma_b] if p.a > 0 else [ma_b]
        return res(ext_min([a * alpha + b, d]), alpha, POS_INF, touched)

    if p.a <= 0 and p.c >= 0:
        return res(ext_min([Mb - ma, a * ma + b, c * Mb + d]), ma, Mb, [ma_b, Mb_b])

    if p.a > 0 and p.c >= 0:
        alpha0 = (Mb - b) / (p.a + 1)
        if alpha0 <= ma:
            return res(ext_min([Mb - ma, c * Mb + d]), ma, Mb, [ma_b, Mb_b])
        if alpha0 <= Ma:
            return res(ext_min([(a * Mb + b) / (p.a + 1), c * Mb + d]),
                       alpha0, Mb, [Mb_b])
        return res(ext_min([a * Ma + b, c * Mb + d]), Ma, Mb, [Ma_b, Mb_b])

    if p.a <= 0 and p.c < 0:
        beta0 = (ma + d) / (1 - p.c)
        if Mb <= beta0:
            return res(ext_min([Mb - ma, a * ma + b]), ma, Mb, [ma_b, Mb_b])
        if mb <= beta0:
            return res(ext_min([(c * ma + d) / (1 - p.c), a * ma + b]),
                       ma, beta0, [ma_b])
        return res(ext_min([a * ma + b, c * mb + d]), ma, mb, [ma_b, mb_b])

    # a > 0 and c < 0: three corner tests, then the tripoint analysis.
    f_ur, g_ur, h_ur = a * Ma + b, c * Mb + d, Mb - Ma
    if f_ur <= g_ur and f_ur <= h_ur:
        return res(f_ur, Ma, Mb, [Ma_b, Mb_b])
    f_ll, g_ll, h_ll = a * ma + b, c * mb + d, mb - ma
    if g_ll <= f_ll and g_ll <= h_ll:
        return res(g_ll, ma, mb, [ma_b, mb_b])
    f_ul, g_ul, h_ul = a * ma + b, c * Mb + d, Mb - ma
    if h_ul <= f_ul and h_ul <= g_ul:
        return res(h_ul, ma, Mb, [ma_b, Mb_b])

    delta = (p.a + 1) * (1 - p.c) - 1      # > 0 since a > 0 > c
    t_alpha = (d - b * (1 - p.c)) / delta
    t_beta = (d * (p.a + 1) - b) / delta
    if t_beta >= Mb:
        return res((a * Mb + b) / (p.a + 1), (Mb - b) / (p.a + 1), Mb, [Mb_b])
    if t_alpha <= ma:
        return res((c * ma + d) / (1 - p.c), ma, (ma + d) / (1 - p.c), [ma_b])

    if a * d <= b * c:
        lr_alpha = min(mb, Ma)
        g1, f1, h1 = c * mb + d, a * lr_alpha + b, mb - lr_alpha
        if g1 <= f1 and g1 <= h1:
            return res(c * mb + d, (c * mb + d - b) / p.a, mb, [mb_b])
        rr_beta = max(mb, Ma)
        g2, f2, h2 = c * rr_beta + d, a * Ma + b, rr_beta - Ma
        if g2 <= f2 and g2 <= h2:
            diag = (d - b) / (p.a - p.c)
            return res((a * d - b * c) / (p.a - p.c), diag, diag, [])
        return res(a * Ma + b, Ma, (a * Ma + b - d) / p.c, [Ma_b])

    if t_beta <= mb:
        return res(c * mb + d, (1 - p.c) * mb - d, mb, [mb_b])
    if t_alpha >= Ma:
        return res(a * Ma + b, Ma, (p.a + 1) * Ma + b, [Ma_b])
    return res((a * d - b * c) / delta, t_alpha, t_beta, [])


# ---------------------------------------------------------------------------
# Symbolic solver
# ---------------------------------------------------------------------------


def _cmp(lhs: AffineExpr, rhs: AffineExpr) -> Constraint:
    """Constraint lhs <= rhs between finite affine expressions over v."""
    return le(lhs, rhs)


def _min_split(region: Polyhedron, terms: Sequence[AffineExpr]):
    """Cover ``region`` by cells on which each term realizes the min.

    Terms equal to +oo never realize the min unless all terms are +oo.
    """
    finite = []
    for t in terms:
        if t.is_finite and t not in finite:
            finite.append(t)
    if not finite:
        yield region, AffineExpr(POS_INF)
        return
    if len(finite) == 1:
        yield region, finite[0]
        return
    for t in finite:
        sub = region.with_constraints(
            _cmp(t, other) for other in finite if other is not t)
        if not sub.is_empty():
            yield sub, t


def _normalized_contexts(p: BoxProblem, context: Polyhedron):
    """Split the context so normalized bounds are single affine expressions."""
    ma, Ma, mb, Mb = p.m_alpha, p.M_alpha, p.m_beta, p.M_beta
    if Ma.is_pos_inf and not Mb.is_pos_inf:
        upper_alpha = [(Mb, None)]
    elif Mb.is_pos_inf or Ma.expr == Mb.expr:
        strict = Ma.strict or (not Mb.is_pos_inf and Ma.expr == Mb.expr and Mb.strict)
        upper_alpha = [(Bound(Ma.expr, strict) if not Ma.is_pos_inf else Ma, None)]
    else:
        upper_alpha = [(Ma, _cmp(Ma.expr, Mb.expr)), (Mb, _cmp(Mb.expr, Ma.expr))]
    if mb.expr == ma.expr:
        lower_beta = [(Bound(mb.expr, mb.strict or ma.strict), None)]
    else:
        lower_beta = [(mb, _cmp(ma.expr, mb.expr)), (ma, _cmp(mb.expr, ma.expr))]
    for Ma_n, cons_a in upper_alpha:
        for mb_n, cons_b in lower_beta:
            region = context.with_constraints(
                [c for c in (cons_a, cons_b) if c is not None])
            if not region.is_empty():
                yield replace(p, M_alpha=Ma_n, m_beta=mb_n), region


def solve_box_symbolic(p: BoxProblem, context: Polyhedron) -> SymbolicOptResult:
    """Case list covering ``context``; cases may overlap on boundaries where
    their values agree.  On each case the value and maximizer are affine.

    Valuations in the context on which D is empty (sup over nothing)
    get an explicit -oo case.
    """
    if context.is_empty():
        return SymbolicOptResult(())
    zero = AffineExpr.constant(0)
    if p.b.const.is_neg_inf or p.d.const.is_neg_inf:
        return SymbolicOptResult(
            (OptCase(context, AffineExpr(NEG_INF), zero, zero, False),))
    cases: list[OptCase] = []
    feasibility = []
    for lo, hi in ((p.m_alpha, p.M_alpha), (p.m_beta, p.M_beta),
                   (p.m_alpha, p.M_beta)):
        if not hi.is_pos_inf:
            feasibility.append(_cmp(lo.expr, hi.expr))
    feasible = context.with_constraints(feasibility)
    for piece in Polyhedron(feasibility).complement_pieces():
        dead = context.intersect(piece)
        if not dead.is_empty():
            cases.append(OptCase(dead, AffineExpr(NEG_INF), zero, zero, False))
    for q, region in _normalized_contexts(p, feasible):
        cases.extend(_solve_normalized(q, region))
    return SymbolicOptResult(tuple(c for c in cases if not c.condition.is_empty()))


def _emit(out, region, terms, alpha, beta, touched):
    attainable = all(not t.strict for t in touched)
    for sub, value in _min_split(region, terms):
        out.append(OptCase(sub, value, alpha, beta, attainable))


def _solve_normalized(p: BoxProblem, ctx: Polyhedron) -> list[OptCase]:
    a, c = p.a, p.c
    b, d = p.b, p.d
    ma, Ma, mb, Mb = p.m_alpha, p.M_alpha, p.m_beta, p.M_beta
    out: list[OptCase] = []
    inf_beta = AffineExpr(POS_INF)

    if Mb.is_pos_inf:
        if Ma.is_pos_inf:
            if a != 0:
                raise UnboundedSlopeError("unbounded alpha requires a == 0")
            _emit(out, ctx, [b, d], ma.expr, inf_beta, [ma])
        elif a > 0:
            _emit(out, ctx, [Ma.expr.scale(a) + b, d], Ma.expr, inf_beta, [Ma])
        else:
            _emit(out, ctx, [ma.expr.scale(a) + b, d], ma.expr, inf_beta, [ma])
        return out

    f_at = lambda x: x.scale(a) + b if b.is_finite else b
    g_at = lambda x: x.scale(c) + d if d.is_finite else d
    width = Mb.expr - ma.expr

    if a <= 0 and c >= 0:
        _emit(out, ctx, [width, f_at(ma.expr), g_at(Mb.expr)],
              ma.expr, Mb.expr, [ma, Mb])
        return out

    if a > 0 and c >= 0:
        # alpha0 = (Mb - b) / (a + 1); conditions scaled by a + 1 > 0.
        alpha0 = (Mb.expr - b).scale(Fraction(1, 1) / (a + 1))
        r1 = ctx.with_constraints([_cmp(alpha0, ma.expr)])
        _emit(out, r1, [width, g_at(Mb.expr)], ma.expr, Mb.expr, [ma, Mb])
        r2 = ctx.with_constraints([_cmp(ma.expr, alpha0), _cmp(alpha0, Ma.expr)])
        _emit(out, r2, [(Mb.expr.scale(a) + b).scale(Fraction(1, 1) / (a + 1)),
                        g_at(Mb.expr)], alpha0, Mb.expr, [Mb])
        r3 = ctx.with_constraints([_cmp(Ma.expr, alpha0)])
        _emit(out, r3, [f_at(Ma.expr), g_at(Mb.expr)], Ma.expr, Mb.expr, [Ma, Mb])
        return out

    if a <= 0 and c < 0:
        beta0 = (ma.expr + d).scale(Fraction(1, 1) / (1 - c))
        r1 = ctx.with_constraints([_cmp(Mb.expr, beta0)])
        _emit(out, r1, [width, f_at(ma.expr)], ma.expr, Mb.expr, [ma, Mb])
        r2 = ctx.with_constraints([_cmp(mb.expr, beta0), _cmp(beta0, Mb.expr)])
        _emit(out, r2, [(ma.expr.scale(c) + d).scale(Fraction(1, 1) / (1 - c)),
                        f_at(ma.expr)], ma.expr, beta0, [ma])
        r3 = ctx.with_constraints([_cmp(beta0, mb.expr)])
        _emit(out, r3, [f_at(ma.expr), g_at(mb.expr)], ma.expr, mb.expr, [ma, mb])
        return out

    # a > 0 and c < 0.
    f_ur, g_ur, h_ur = f_at(Ma.expr), g_at(Mb.expr), Mb.expr - Ma.expr
    f_ll, g_ll, h_ll = f_at(ma.expr), g_at(mb.expr), mb.expr - ma.expr

    r1 = ctx.with_constraints([_cmp(f_ur, g_ur), _cmp(f_ur, h_ur)])
    _emit(out, r1, [f_ur], Ma.expr, Mb.expr, [Ma, Mb])
    rests = _complement_branches(ctx, [(f_ur, g_ur), (f_ur, h_ur)])

    nxt = []
    for region in rests:
        r2 = region.with_constraints([_cmp(g_ll, f_ll), _cmp(g_ll, h_ll)])
        _emit(out, r2, [g_ll], ma.expr, mb.expr, [ma, mb])
        nxt.extend(_complement_branches(region, [(g_ll, f_ll), (g_ll, h_ll)]))
    rests = nxt

    h_ul = Mb.expr - ma.expr
    nxt = []
    for region in rests:
        r3 = region.with_constraints([_cmp(h_ul, f_ll), _cmp(h_ul, g_ur)])
        _emit(out, r3, [h_ul], ma.expr, Mb.expr, [ma, Mb])
        nxt.extend(_complement_branches(region, [(h_ul, f_ll), (h_ul, g_ur)]))
    rests = nxt

    delta = (a + 1) * (1 - c) - 1
    t_alpha = (d - b.scale(1 - c)).scale(Fraction(1, 1) / delta)
    t_beta = (d.scale(a + 1) - b).scale(Fraction(1, 1) / delta)

    nxt = []
    for region in rests:
        r4 = region.with_constraints([_cmp(Mb.expr, t_beta)])
        _emit(out, r4, [(Mb.expr.scale(a) + b).scale(Fraction(1, 1) / (a + 1))],
              (Mb.expr - b).scale(Fraction(1, 1) / (a + 1)), Mb.expr, [Mb])
        nxt.append(region.with_constraints([_cmp(t_beta, Mb.expr)]))
    rests = [r for r in nxt if not r.is_empty()]

    nxt = []
    for region in rests:
        r5 = region.with_constraints([_cmp(t_alpha, ma.expr)])
        _emit(out, r5, [(ma.expr.scale(c) + d).scale(Fraction(1, 1) / (1 - c))],
              ma.expr, (ma.expr + d).scale(Fraction(1, 1) / (1 - c)), [ma])
        nxt.append(region.with_constraints([_cmp(ma.expr, t_alpha)]))
    rests = [r for r in nxt if not r.is_empty()]

    # ad <= bc branch versus ad >= bc branch (affine in v: a, c constant).
    ad = d.scale(a)
    bc = b.scale(c)
    for region in rests:
        rle = region.with_constraints([_cmp(ad, bc)])
        if not rle.is_empty():
            out.extend(_d_low_branch(p, rle))
        rge = region.with_constraints([_cmp(bc, ad)])
        if not rge.is_empty():
            out.extend(_d_high_branch(p, rge, t_alpha, t_beta, delta))
    return out


def _complement_branches(region: Polyhedron, pairs):
    """Closed complements of a conjunction of lhs <= rhs comparisons."""
    out = []
    for lhs, rhs in pairs:
        r = region.with_constraints([_cmp(rhs, lhs)])
        if not r.is_empty():
            out.append(r)
    return out


def _d_low_branch(p: BoxProblem, ctx: Polyhedron) -> list[OptCase]:
    """Sub-cases of the a>0, c<0 block under ad <= bc."""
    a, c, b, d = p.a, p.c, p.b, p.d
    ma, Ma, mb, Mb = p.m_alpha, p.M_alpha, p.m_beta, p.M_beta
    out: list[OptCase] = []
    g_mb = mb.expr.scale(c) + d
    f_of = lambda x: x.scale(a) + b
    # The lower-right and upper-right probes involve min/max of mb and Ma.
    for first, orient in ((mb, _cmp(mb.expr, Ma.expr)), (Ma, _cmp(Ma.expr, mb.expr))):
        base = ctx.with_constraints([orient])
        if base.is_empty():
            continue
        lr_alpha = first.expr
        r6 = base.with_constraints([_cmp(g_mb, f_of(lr_alpha)),
                                    _cmp(g_mb, mb.expr - lr_alpha)])
        alpha_star = (g_mb - b).scale(Fraction(1, 1) / a)
        _emit(out, r6, [g_mb], alpha_star, mb.expr, [mb])
        rest = _complement_branches(base, [(g_mb, f_of(lr_alpha)),
                                           (g_mb, mb.expr - lr_alpha)])
        for region in rest:
            for second, orient2 in ((mb, _cmp(Ma.expr, mb.expr)),
                                    (Ma, _cmp(mb.expr, Ma.expr))):
                base2 = region.with_constraints([orient2])
                if base2.is_empty():
                    continue
                rr_beta = second.expr
                g_rr = rr_beta.scale(c) + d
                r7 = base2.with_constraints([_cmp(g_rr, f_of(Ma.expr)),
                                             _cmp(g_rr, rr_beta - Ma.expr)])
                diag = (d - b).scale(Fraction(1, 1) / (a - c))
                value7 = (d.scale(a) - b.scale(c)).scale(Fraction(1, 1) / (a - c))
                _emit(out, r7, [value7], diag, diag, [])
                rest2 = _complement_branches(base2, [(g_rr, f_of(Ma.expr)),
                                                     (g_rr, rr_beta - Ma.expr)])
                for region2 in rest2:
                    beta_star = (f_of(Ma.expr) - d).scale(Fraction(1, 1) / c)
                    _emit(out, region2, [f_of(Ma.expr)], Ma.expr, beta_star, [Ma])
    return out


def _d_high_branch(p: BoxProblem, ctx: Polyhedron,
                   t_alpha: AffineExpr, t_beta: AffineExpr,
                   delta: Fraction) -> list[OptCase]:
    """Sub-cases of the a>0, c<0 block under ad >= bc."""
    a, c, b, d = p.a, p.c, p.b, p.d
    ma, Ma, mb, Mb = p.m_alpha, p.M_alpha, p.m_beta, p.M_beta
    out: list[OptCase] = []
    r9 = ctx.with_constraints([_cmp(t_beta, mb.expr)])
    _emit(out, r9, [mb.expr.scale(c) + d],
          mb.expr.scale(1 - c) - d, mb.expr, [mb])
    rest = ctx.with_constraints([_cmp(mb.expr, t_beta)])
    if not rest.is_empty():
        r10 = rest.with_constraints([_cmp(Ma.expr, t_alpha)])
        _emit(out, r10, [Ma.expr.scale(a) + b],
              Ma.expr, Ma.expr.scale(a + 1) + b, [Ma])
        r11 = rest.with_constraints([_cmp(t_alpha, Ma.expr)])
        if not r11.is_empty():
            value = (d.scale(a) - b.scale(c)).scale(Fraction(1, 1) / delta)
            _emit(out, r11, [value], t_alpha, t_beta, [])
    return out


