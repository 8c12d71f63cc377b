"""Backward induction of the permissiveness function.

Per location the solver computes a piecewise-affine map from clock
valuations to the optimal permissiveness (the best worst-case width of
the smallest proposed delay interval), by walking the acyclic location
graph backwards from the target:

* target: constant +oo;
* player-owned location: for each outgoing transition, enumerate which
  cells of the successor function the interval endpoints land in (and,
  for non-linear automata, which cells the interval sweeps through),
  project the landing conditions onto the source valuation by
  Fourier-Motzkin elimination, refine until the interval bounds are
  affine, and maximize ``min(width, value at left endpoint, value at
  right endpoint, values swept in between)`` with the closed-form box
  optimizer; finally take the pointwise max over all candidates;
* opponent-owned location: the opponent picks delay and transition, so
  the value is the pointwise min of the successor values over every
  reachable firing point, and -oo where no firing is ever possible.

For linear automata (at most one successor per location) the successor
functions are concave, the swept interior never dips below the
endpoints, and the endpoint-pair enumeration alone is exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .model import (
    TimedAutomatonSpec,
    Transition,
    longest_path_length,
    topological_order,
    validate_solver_requirements,
)
from .numerics import (
    NEG_INF,
    POS_INF,
    AffineExpr,
    ExtendedRational,
    delay_reset_compose,
)
from .optimizer import Bound, BoxProblem, OptCase, solve_box_symbolic
from .polyhedra import (
    Cell,
    Constraint,
    MoveAnnotation,
    PiecewiseAffineFn,
    Polyhedron,
    assemble_max,
    assemble_min,
    ge,
    le,
    mask_outside,
)

ALPHA = "$a"
BETA = "$b"


@dataclass
class PermSolution:
    spec: TimedAutomatonSpec
    functions: dict
    iterations: dict

    def value(self, loc: str, valuation) -> ExtendedRational:
        return self.functions[loc].eval(valuation)


def perm_init(spec: TimedAutomatonSpec) -> dict:
    """Iteration 0: +oo at the target, -oo everywhere else."""
    out = {}
    for loc in spec.locations:
        value = POS_INF if loc == spec.target else NEG_INF
        out[loc] = PiecewiseAffineFn.constant(value)
    return out


# ---------------------------------------------------------------------------
# Landing geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _LandingCell:
    """A successor cell pulled back through the transition's reset."""

    poly: Polyhedron          # over successor valuations, within Inv(dest)
    value: AffineExpr         # +oo allowed; -oo cells are never enumerated
    slope: Fraction           # value slope along the delay after reset
    offset: AffineExpr        # value at the reset-projected source valuation


def _landing_constraints(poly: Polyhedron, reset: frozenset,
                         clocks: Sequence[str], var: str) -> list[Constraint]:
    """Constraints of ``(v + t)[reset -> 0]`` lying in ``poly``, over (v, t)."""
    t = AffineExpr.var(var)
    out = []
    for c in poly.constraints:
        dropped = c.expr.drop_vars(reset)
        k = dropped.coeff_sum(clocks)
        out.append(Constraint(dropped + t.scale(k), c.strict))
    return out


def _window_bounds(poly: Polyhedron, reset: frozenset, clocks: Sequence[str]):
    """Entry/exit delay bound candidates for the reset-projected sweep
    through ``poly``: lists of (affine expr over v, strict)."""
    lowers, uppers = [], []
    for c in poly.constraints:
        dropped = c.expr.drop_vars(reset)
        k = dropped.coeff_sum(clocks)
        if k == 0:
            continue
        bound = -dropped.scale(Fraction(1, 1) / k)
        (uppers if k > 0 else lowers).append((bound, c.strict))
    return lowers, uppers


def _guard_delay_bounds(spec: TimedAutomatonSpec, t: Transition):
    """Per-clock interval bounds of guard + source invariant as delay bound
    candidates, plus the delay constraints over (v, time var)."""
    loc = spec.locations[t.source]
    lowers, uppers = [], []
    merged = {}
    for guard in (t.guard, loc.invariant):
        for clock, (lo, hi) in guard.intervals(spec.clocks).items():
            c_lo, c_hi = merged.get(clock, (Fraction(0), POS_INF))
            merged[clock] = (max(c_lo, lo), min(c_hi, hi))
    for clock, (lo, hi) in merged.items():
        v = AffineExpr.var(clock)
        if lo > 0:
            lowers.append((AffineExpr.constant(lo) - v, False))
        if hi.is_finite:
            uppers.append((AffineExpr.constant(hi.value) - v, False))
    return lowers, uppers


def _bounds_to_constraints(var: str, lowers, uppers) -> list[Constraint]:
    t = AffineExpr.var(var)
    cons = [ge(t, 0)]
    for expr, strict in lowers:
        cons.append(Constraint(expr - t, strict))
    for expr, strict in uppers:
        cons.append(Constraint(t - expr, strict))
    return cons


def _landing_cells(spec: TimedAutomatonSpec, t: Transition,
                   f_dest: PiecewiseAffineFn) -> list[_LandingCell]:
    """Successor cells reachable through the reset (finite or +oo value),
    restricted to the destination invariant."""
    dest_inv = spec.locations[t.destination].invariant.to_poly()
    cells = []
    for cell in f_dest.cells:
        if cell.value.const.is_neg_inf:
            continue
        poly = cell.poly.intersect(dest_inv)
        on_subspace = poly.with_constraints(
            le(AffineExpr.var(c), 0) for c in t.reset)
        if on_subspace.is_empty():
            continue
        if cell.value.is_finite:
            slope, offset = delay_reset_compose(cell.value, t.reset)
        else:
            slope, offset = Fraction(0), cell.value
        cells.append(_LandingCell(poly, cell.value, slope, offset))
    return cells


# ---------------------------------------------------------------------------
# Player step
# ---------------------------------------------------------------------------


def _argmax_regions(base: Polyhedron, bounds):
    """(Bound, region) pairs where each candidate realizes the max lower
    bound; the zero bound is always a candidate."""
    return _argopt(base, bounds + [(AffineExpr.constant(0), False)], True)


def _argmin_regions(base: Polyhedron, bounds):
    """(Bound, region) pairs for the min upper bound; empty candidate list
    means the window is unbounded."""
    if not bounds:
        return [(Bound(AffineExpr(POS_INF)), base)]
    return _argopt(base, bounds, False)


def _argopt(base: Polyhedron, bounds, maximize: bool):
    unique = []
    for expr, strict in bounds:
        merged = False
        for i, (e, s) in enumerate(unique):
            if e == expr:
                unique[i] = (e, s or strict)
                merged = True
                break
        if not merged:
            unique.append((expr, strict))
    out = []
    for expr, strict in unique:
        extra = [ge(expr, other) if maximize else le(expr, other)
                 for other, _ in unique if other is not expr]
        region = base.with_constraints(extra)
        if not region.is_empty():
            out.append((Bound(expr, strict), region))
    return out


def _box_problems(region: Polyhedron, c_alpha: _LandingCell, c_beta: _LandingCell,
                  alpha_lowers, alpha_uppers, beta_lowers, beta_uppers):
    """Refine ``region`` until all four interval bounds are affine, yielding
    (subregion, BoxProblem)."""
    for m_a, r1 in _argmax_regions(region, alpha_lowers):
        for M_a, r2 in _argmin_regions(r1, alpha_uppers):
            for m_b, r3 in _argmax_regions(r2, beta_lowers):
                for M_b, r4 in _argmin_regions(r3, beta_uppers):
                    problem = BoxProblem(
                        a=c_alpha.slope, c=c_beta.slope,
                        b=c_alpha.offset, d=c_beta.offset,
                        m_alpha=m_a, M_alpha=M_a, m_beta=m_b, M_beta=M_b)
                    yield r4, problem


def _chain_cap_terms(region: Polyhedron, chain: Sequence[_LandingCell],
                     reset: frozenset, clocks: Sequence[str]):
    """Constant extra terms for the cells swept strictly between the
    endpoints: each contributes its value at the window end where the
    (affine) value is smallest, refined until that delay is affine.

    Yields (subregion, cap exprs) pairs."""
    intermediates = chain[1:-1]
    stack = [(region, [])]
    for cell in intermediates:
        if not cell.value.is_finite:
            continue  # +oo never binds the min
        lowers, uppers = _window_bounds(cell.poly, reset, clocks)
        new_stack = []
        for base, caps in stack:
            if cell.slope == 0:
                new_stack.append((base, caps + [cell.offset]))
            elif cell.slope > 0:
                for bound, sub in _argmax_regions(base, lowers):
                    cap = cell.offset + bound.expr.scale(cell.slope)
                    new_stack.append((sub, caps + [cap]))
            else:
                for bound, sub in _argmin_regions(base, uppers):
                    if bound.is_pos_inf:
                        continue  # unreachable: intermediate windows are bounded
                    cap = cell.offset + bound.expr.scale(cell.slope)
                    new_stack.append((sub, caps + [cap]))
        stack = new_stack
    return stack


def _cases_to_cells(cases: Iterable[OptCase], action: str,
                    caps: Sequence[AffineExpr] = ()) -> list[Cell]:
    from .optimizer import _min_split

    cells = []
    for case in cases:
        if case.value.const.is_neg_inf:
            continue
        move = MoveAnnotation(action, case.alpha, case.beta, case.attainable)
        if caps:
            for sub, value in _min_split(case.condition, [case.value] + list(caps)):
                cells.append(Cell(sub, value, move))
        else:
            cells.append(Cell(case.condition, case.value, move))
    return cells


def _pair_system(spec, t, c_alpha, c_beta, clocks, with_junctions: bool,
                 chain=()) -> Polyhedron:
    """The (v, delays) system: alpha lands in the first cell, beta in the
    last, both endpoint delays satisfy guard and source invariant.

    With junctions (the non-concave, branching case) consecutive chain
    cells must additionally share a junction delay between alpha and
    beta, which pins the swept cells exactly."""
    g_lowers, g_uppers = _guard_delay_bounds(spec, t)
    cons = list(_bounds_to_constraints(ALPHA, g_lowers, g_uppers))
    cons += _bounds_to_constraints(BETA, g_lowers, g_uppers)
    cons.append(le(AffineExpr.var(ALPHA), AffineExpr.var(BETA)))
    cons += _landing_constraints(c_alpha.poly, t.reset, clocks, ALPHA)
    cons += _landing_constraints(c_beta.poly, t.reset, clocks, BETA)
    if with_junctions and len(chain) > 1:
        prev = ALPHA
        for j in range(len(chain) - 1):
            gvar = f"$g{j}"
            cons.append(le(AffineExpr.var(prev), AffineExpr.var(gvar)))
            cons += _landing_constraints(chain[j].poly, t.reset, clocks, gvar)
            cons += _landing_constraints(chain[j + 1].poly, t.reset, clocks, gvar)
            prev = gvar
        cons.append(le(AffineExpr.var(prev), AffineExpr.var(BETA)))
    return Polyhedron(cons)


def _chain_prefix_feasible(spec, t, chain, clocks) -> bool:
    """Can the sweep visit these cells in order at all?  The constraint set
    only grows under extension, so an infeasible prefix prunes soundly."""
    from .polyhedra import fm_eliminate

    g_lowers, g_uppers = _guard_delay_bounds(spec, t)
    cons = []
    prev = None
    gvars = []
    for j in range(len(chain) - 1):
        gvar = f"$g{j}"
        gvars.append(gvar)
        if prev is not None:
            cons.append(le(AffineExpr.var(prev), AffineExpr.var(gvar)))
        cons += _landing_constraints(chain[j].poly, t.reset, clocks, gvar)
        cons += _landing_constraints(chain[j + 1].poly, t.reset, clocks, gvar)
        cons += _bounds_to_constraints(gvar, g_lowers, g_uppers)
        prev = gvar
    return not fm_eliminate(Polyhedron(cons), gvars).is_empty()


def _player_transition_cells(spec: TimedAutomatonSpec, t: Transition,
                             f_dest: PiecewiseAffineFn,
                             with_chains: bool) -> list[Cell]:
    """Candidate value cells for one transition of a player location."""
    from .polyhedra import fm_eliminate

    clocks = list(spec.clocks)
    landing = _landing_cells(spec, t, f_dest)
    if not landing:
        return []
    g_lowers, g_uppers = _guard_delay_bounds(spec, t)
    cells: list[Cell] = []

    def process_chain(chain):
        ca, cb = chain[0], chain[-1]
        aux = [ALPHA, BETA]
        if with_chains and len(chain) > 1:
            aux += [f"$g{j}" for j in range(len(chain) - 1)]
        system = _pair_system(spec, t, ca, cb, clocks, with_chains, chain)
        s_poly = fm_eliminate(system, aux)
        if s_poly.is_empty():
            return
        a_lo, a_up = _window_bounds(ca.poly, t.reset, clocks)
        b_lo, b_up = _window_bounds(cb.poly, t.reset, clocks)
        alpha_lowers = g_lowers + a_lo
        alpha_uppers = g_uppers + a_up
        beta_lowers = g_lowers + b_lo
        beta_uppers = g_uppers + b_up
        for region, caps in _chain_cap_terms(s_poly, chain, t.reset, clocks):
            for sub, problem in _box_problems(region, ca, cb,
                                              alpha_lowers, alpha_uppers,
                                              beta_lowers, beta_uppers):
                result = solve_box_symbolic(problem, sub)
                cells.extend(_cases_to_cells(result.cases, t.action, caps))

    if not with_chains:
        for ca, cb in itertools.product(landing, repeat=2):
            process_chain((ca, cb))
        return cells

    # Depth-first chain enumeration with prefix-feasibility pruning.
    def extend(chain, used):
        process_chain(tuple(chain))
        for idx, cell in enumerate(landing):
            if idx in used:
                continue
            candidate = chain + [cell]
            if _chain_prefix_feasible(spec, t, candidate, clocks):
                extend(candidate, used | {idx})

    for idx, cell in enumerate(landing):
        extend([cell], {idx})
    return cells


def perm_step_linear(spec: TimedAutomatonSpec, t: Transition,
                     f_dest: PiecewiseAffineFn) -> PiecewiseAffineFn:
    """One induction step across the unique transition of a linear location."""
    cells = _player_transition_cells(spec, t, f_dest, with_chains=False)
    return assemble_max(cells)


def perm_step_branching(spec: TimedAutomatonSpec, loc: str,
                        f_dests: dict) -> PiecewiseAffineFn:
    """Player step with several successors: per-transition candidates with
    swept-cell terms, then the pointwise max across transitions."""
    cells: list[Cell] = []
    for t in spec.outgoing(loc):
        cells.extend(_player_transition_cells(
            spec, t, f_dests[t.destination], with_chains=True))
    return assemble_max(cells)


# ---------------------------------------------------------------------------
# Opponent step
# ---------------------------------------------------------------------------


def _availability_cells(spec: TimedAutomatonSpec, t: Transition,
                        f_dest: PiecewiseAffineFn) -> list[Cell]:
    """Value of firing ``t`` right now, as cells over the firing valuation.

    Covers exactly the valuations where the transition is available
    (guard holds, landing satisfies the destination invariant); -oo
    successor cells are genuine here: the opponent may fire into them.
    """
    guard_poly = t.guard.to_poly()
    dest_inv = spec.locations[t.destination].invariant.to_poly()
    out = []
    for cell in f_dest.cells:
        poly = cell.poly.intersect(dest_inv)
        pulled = [Constraint(c.expr.drop_vars(t.reset), c.strict)
                  for c in poly.constraints]
        avail = guard_poly.with_constraints(pulled)
        if avail.is_empty():
            continue
        out.append(Cell(avail, cell.value.drop_vars(t.reset)))
    return out


def perm_step_opponent(spec: TimedAutomatonSpec, loc: str,
                       f_dests: dict) -> PiecewiseAffineFn:
    """Opponent step: minimum over all reachable firing choices.

    The opponent delays (within the source invariant) and fires any
    available transition; the result is the pointwise min over firing
    valuations swept by the delay, and -oo where no firing is ever
    available (the play stalls and the target is never reached).
    """
    inv_poly = spec.locations[loc].invariant.to_poly()
    avail: list[Cell] = []
    for t in spec.outgoing(loc):
        avail.extend(_availability_cells(spec, t, f_dests[t.destination]))
    candidates, regions = _delay_min_candidates(avail, inv_poly, spec.clocks)
    result = assemble_min(candidates)
    return mask_outside(result, regions)


def _delay_min_candidates(cells: Sequence[Cell], inv: Polyhedron,
                          clocks: Sequence[str]):
    """Delay-minimization candidates over ``v + d`` for each cell.

    Unlike :func:`polyhedra.minimize_along_delay`, -oo cells are
    selectable: they are genuine game values here.
    """
    from .polyhedra import fm_eliminate

    delay = "$d"
    d_var = AffineExpr.var(delay)
    candidates: list[Cell] = []
    regions: list[Polyhedron] = []
    no_reset: frozenset = frozenset()
    for cell in cells:
        window_poly = cell.poly.intersect(inv)
        shifted = Polyhedron(
            _landing_constraints(window_poly, no_reset, clocks, delay)
            + [ge(d_var, 0)])
        region = fm_eliminate(shifted, [delay])
        if region.is_empty():
            continue
        regions.append(region)
        if not cell.value.is_finite:
            candidates.append(Cell(region, cell.value))
            continue
        slope = cell.value.coeff_sum(clocks)
        lowers, uppers = _window_bounds(window_poly, no_reset, clocks)
        if slope == 0:
            candidates.append(Cell(region, cell.value))
        elif slope > 0:
            for bound, sub in _argmax_regions(region, lowers):
                candidates.append(
                    Cell(sub, cell.value + bound.expr.scale(slope)))
        else:
            for bound, sub in _argmin_regions(region, uppers):
                if bound.is_pos_inf:
                    candidates.append(Cell(sub, AffineExpr(NEG_INF)))
                else:
                    candidates.append(
                        Cell(sub, cell.value + bound.expr.scale(slope)))
    return candidates, regions


# ---------------------------------------------------------------------------
# Full computation
# ---------------------------------------------------------------------------


def _step_location(spec: TimedAutomatonSpec, loc: str, funcs: dict,
                   linear_mode: bool) -> PiecewiseAffineFn:
    if loc == spec.target:
        return funcs[loc]
    outgoing = spec.outgoing(loc)
    if not outgoing:
        return PiecewiseAffineFn.constant(NEG_INF)
    location = spec.locations[loc]
    dests = {t.destination: funcs[t.destination] for t in outgoing}
    if location.owner == "opponent":
        result = perm_step_opponent(spec, loc, dests)
    elif linear_mode:
        result = perm_step_linear(spec, outgoing[0], funcs[outgoing[0].destination])
    else:
        result = perm_step_branching(spec, loc, dests)
    return result.simplify()


def compute_permissiveness(spec: TimedAutomatonSpec,
                           max_iter: Optional[int] = None) -> PermSolution:
    """Fixpoint of the value recurrence over an acyclic model.

    Without a cap, one reverse-topological sweep computes each location
    exactly once (the sequence converges within the longest path
    length).  With ``max_iter`` the rounds are applied literally, which
    yields the iteration-``k`` approximation used by the monotonicity
    tests and the CLI's ``--max-iter``.
    """
    validate_solver_requirements(spec)
    order = topological_order(spec)
    lengths = {loc: longest_path_length(spec, loc) for loc in spec.locations}
    linear_mode = spec.is_linear() and not spec.is_game()

    if max_iter is None:
        funcs = perm_init(spec)
        for loc in reversed(order):
            if loc != spec.target:
                funcs[loc] = _step_location(spec, loc, funcs, linear_mode)
        iterations = {loc: (lengths[loc] if lengths[loc] is not None else 0)
                      for loc in spec.locations}
        return PermSolution(spec, funcs, iterations)

    funcs = perm_init(spec)
    rounds = min(max_iter, max((l for l in lengths.values() if l is not None),
                               default=0))
    for i in range(1, rounds + 1):
        prev = funcs
        funcs = {}
        for loc in spec.locations:
            length = lengths[loc]
            if loc == spec.target:
                funcs[loc] = prev[loc]
            elif length is not None and length <= i - 1:
                funcs[loc] = prev[loc]  # converged (longest path exhausted)
            else:
                funcs[loc] = _step_location(spec, loc, prev, linear_mode)
    iterations = {loc: min(max_iter, lengths[loc]) if lengths[loc] is not None
                  else 0 for loc in spec.locations}
    return PermSolution(spec, funcs, iterations)
