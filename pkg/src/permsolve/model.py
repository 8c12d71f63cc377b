"""Timed-automaton and turn-based timed-game model: types, parser, semantics.

Text format (UTF-8, line oriented, ``#`` comments)::

    clocks x y
    location l0 initial [owner player|opponent] [invariant "<guard>"]
    location lf target
    edge l0 -> lf action a [guard "<guard>"] [reset x,y]

Guards are conjunctions of ``c <= n``, ``c < n``, ``c >= n``, ``c > n``,
``c == n`` joined by ``&`` with integer n.  The solver additionally
requires non-strict comparisons and an acyclic location graph; those
checks live in :func:`validate_solver_requirements` so the brute-force
oracle can still run models with strict guards.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .numerics import POS_INF, AffineExpr, ExtendedRational, ext
from .polyhedra import Polyhedron, ge, gt, le, lt


class ModelError(ValueError):
    """Parse or validation failure; carries per-line diagnostics."""

    def __init__(self, messages: Sequence[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class SemanticsError(ValueError):
    pass


class NoSuchTransitionError(SemanticsError):
    pass


class GuardViolatedError(SemanticsError):
    pass


class InvariantViolatedError(SemanticsError):
    pass


class CycleError(ValueError):
    pass


_OPS = ("<=", ">=", "==", "<", ">")


@dataclass(frozen=True)
class GuardAtom:
    clock: str
    op: str          # one of <=, <, >=, >, ==
    bound: int

    def holds(self, value: Fraction) -> bool:
        if self.op == "<=":
            return value <= self.bound
        if self.op == "<":
            return value < self.bound
        if self.op == ">=":
            return value >= self.bound
        if self.op == ">":
            return value > self.bound
        return value == self.bound

    def is_strict(self) -> bool:
        return self.op in ("<", ">")

    def __str__(self) -> str:
        return f"{self.clock} {self.op} {self.bound}"


@dataclass(frozen=True)
class Guard:
    """Conjunction of per-clock integer comparisons."""

    atoms: tuple[GuardAtom, ...] = ()

    def holds(self, valuation: Mapping[str, Fraction]) -> bool:
        return all(a.holds(Fraction(valuation[a.clock])) for a in self.atoms)

    def intervals(self, clocks: Sequence[str]) -> dict[str, tuple[Fraction, ExtendedRational]]:
        """Closed per-clock intervals [L, U]; requires non-strict atoms."""
        out = {c: (Fraction(0), POS_INF) for c in clocks}
        for a in self.atoms:
            lo, hi = out[a.clock]
            if a.op in ("<=", "=="):
                hi = min(hi, ext(a.bound))
            if a.op in (">=", "=="):
                lo = max(lo, Fraction(a.bound))
            if a.op in ("<", ">"):
                raise ValueError(f"strict comparison {a} has no closed interval")
            out[a.clock] = (lo, hi)
        return out

    def to_poly(self) -> Polyhedron:
        cons = []
        for a in self.atoms:
            v = AffineExpr.var(a.clock)
            if a.op == "<=":
                cons.append(le(v, a.bound))
            elif a.op == "<":
                cons.append(lt(v, a.bound))
            elif a.op == ">=":
                cons.append(ge(v, a.bound))
            elif a.op == ">":
                cons.append(gt(v, a.bound))
            else:
                cons.extend([le(v, a.bound), ge(v, a.bound)])
        return Polyhedron(cons)

    def max_constant(self) -> int:
        return max((a.bound for a in self.atoms), default=0)

    def __str__(self) -> str:
        return " & ".join(map(str, self.atoms)) if self.atoms else "true"


TRUE_GUARD = Guard()


@dataclass(frozen=True)
class Location:
    id: str
    invariant: Guard = TRUE_GUARD
    owner: str = "player"      # "player" | "opponent"
    is_target: bool = False
    is_initial: bool = False


@dataclass(frozen=True)
class Transition:
    source: str
    guard: Guard
    action: str
    reset: frozenset
    destination: str


@dataclass(frozen=True)
class Config:
    location: str
    valuation: dict

    def __post_init__(self):
        object.__setattr__(self, "valuation",
                           {c: Fraction(v) for c, v in self.valuation.items()})


@dataclass
class TimedAutomatonSpec:
    clocks: tuple[str, ...]
    locations: dict[str, Location]
    transitions: list[Transition]
    target: str
    source_text: Optional[str] = None
    _out: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._out = {}
        for t in self.transitions:
            self._out.setdefault(t.source, []).append(t)

    def outgoing(self, loc: str) -> list[Transition]:
        return self._out.get(loc, [])

    def transition_for(self, loc: str, action: str) -> Optional[Transition]:
        for t in self.outgoing(loc):
            if t.action == action:
                return t
        return None

    @property
    def initial(self) -> Optional[str]:
        for loc in self.locations.values():
            if loc.is_initial:
                return loc.id
        return None

    def max_constant(self) -> int:
        m = 0
        for t in self.transitions:
            m = max(m, t.guard.max_constant())
        for loc in self.locations.values():
            m = max(m, loc.invariant.max_constant())
        return m

    def is_linear(self) -> bool:
        return all(len(self.outgoing(l)) <= 1 for l in self.locations)

    def is_game(self) -> bool:
        return any(loc.owner == "opponent" for loc in self.locations.values())

    def is_acyclic(self) -> bool:
        try:
            topological_order(self)
            return True
        except CycleError:
            return False

    def classification(self) -> str:
        if not self.is_acyclic():
            return "cyclic"
        if self.is_game():
            return "game"
        return "linear" if self.is_linear() else "acyclic branching"


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def parse_guard(text: str, clocks: Sequence[str], errors: list, line_no: int) -> Guard:
    atoms = []
    for part in text.split("&"):
        part = part.strip()
        if not part or part == "true":
            continue
        m = re.fullmatch(r"(\w+)\s*(<=|>=|==|<|>)\s*(\d+)", part)
        if not m:
            errors.append(f"line {line_no}: cannot parse guard atom '{part}'")
            continue
        clock, op, bound = m.group(1), m.group(2), int(m.group(3))
        if clock not in clocks:
            errors.append(f"line {line_no}: unknown clock '{clock}'")
            continue
        atoms.append(GuardAtom(clock, op, bound))
    return Guard(tuple(atoms))


def _split_quoted(tokens: list[str]) -> list[str]:
    """Re-join quoted spans so 'invariant "x <= 1 & y <= 2"' is one token."""
    out, buf = [], None
    for tok in tokens:
        if buf is not None:
            buf.append(tok)
            if tok.endswith('"'):
                out.append(" ".join(buf).strip('"'))
                buf = None
        elif tok.startswith('"') and not (tok.endswith('"') and len(tok) > 1):
            buf = [tok]
        elif tok.startswith('"'):
            out.append(tok.strip('"'))
        else:
            out.append(tok)
    if buf is not None:
        out.append(" ".join(buf).strip('"'))
    return out


def parse_model(text: str) -> TimedAutomatonSpec:
    """Parse and structurally validate a model description.

    Raises :class:`ModelError` with line-numbered diagnostics on
    failure.  Solver-only restrictions (acyclicity, non-strict guards)
    are checked separately by :func:`validate_solver_requirements`.
    """
    errors: list[str] = []
    clocks: tuple[str, ...] = ()
    locations: dict[str, Location] = {}
    transitions: list[Transition] = []
    pending_edges = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = _split_quoted(line.split())
        head = tokens[0]
        if head == "clocks":
            if clocks:
                errors.append(f"line {line_no}: duplicate clocks declaration")
            clocks = tuple(tokens[1:])
            if not clocks:
                errors.append(f"line {line_no}: no clocks declared")
            for c in clocks:
                if not re.fullmatch(r"[A-Za-z]\w*", c):
                    errors.append(f"line {line_no}: bad clock name '{c}'")
        elif head == "location":
            if len(tokens) < 2:
                errors.append(f"line {line_no}: location needs a name")
                continue
            name = tokens[1]
            if name in locations:
                errors.append(f"line {line_no}: duplicate location '{name}'")
            attrs = tokens[2:]
            owner, is_target, is_initial = "player", False, False
            invariant = TRUE_GUARD
            i = 0
            while i < len(attrs):
                if attrs[i] == "target":
                    is_target = True
                elif attrs[i] == "initial":
                    is_initial = True
                elif attrs[i] == "owner" and i + 1 < len(attrs):
                    i += 1
                    owner = attrs[i]
                    if owner not in ("player", "opponent"):
                        errors.append(f"line {line_no}: bad owner '{owner}'")
                elif attrs[i] == "invariant" and i + 1 < len(attrs):
                    i += 1
                    invariant = parse_guard(attrs[i], clocks, errors, line_no)
                else:
                    errors.append(f"line {line_no}: unknown attribute '{attrs[i]}'")
                i += 1
            locations[name] = Location(name, invariant, owner, is_target, is_initial)
        elif head == "edge":
            m = re.fullmatch(r"edge\s+(\w+)\s*->\s*(\w+)\s+(.*)", line)
            if not m:
                errors.append(f"line {line_no}: cannot parse edge")
                continue
            src, dst, rest = m.group(1), m.group(2), m.group(3)
            rest_tokens = _split_quoted(rest.split())
            action, guard_text, reset = None, "true", frozenset()
            i = 0
            while i < len(rest_tokens):
                if rest_tokens[i] == "action" and i + 1 < len(rest_tokens):
                    i += 1
                    action = rest_tokens[i]
                elif rest_tokens[i] == "guard" and i + 1 < len(rest_tokens):
                    i += 1
                    guard_text = rest_tokens[i]
                elif rest_tokens[i] == "reset" and i + 1 < len(rest_tokens):
                    i += 1
                    reset = frozenset(x.strip() for x in rest_tokens[i].split(","))
                else:
                    errors.append(f"line {line_no}: unknown edge attribute "
                                  f"'{rest_tokens[i]}'")
                i += 1
            if action is None:
                errors.append(f"line {line_no}: edge needs an action")
                action = "?"
            pending_edges.append((line_no, src, dst, action, guard_text, reset))
        else:
            errors.append(f"line {line_no}: unknown directive '{head}'")

    for line_no, src, dst, action, guard_text, reset in pending_edges:
        guard = parse_guard(guard_text, clocks, errors, line_no)
        for c in reset:
            if c not in clocks:
                errors.append(f"line {line_no}: unknown reset clock '{c}'")
        for name in (src, dst):
            if name not in locations:
                errors.append(f"line {line_no}: unknown location '{name}'")
        if any(t.source == src and t.action == action for t in transitions):
            errors.append(f"line {line_no}: duplicate action '{action}' "
                          f"from location '{src}'")
        transitions.append(Transition(src, guard, action, reset & set(clocks), dst))

    targets = [l.id for l in locations.values() if l.is_target]
    if len(targets) != 1:
        errors.append(f"model must declare exactly one target location "
                      f"(found {len(targets)})")
    if errors:
        raise ModelError(errors)
    return TimedAutomatonSpec(clocks, locations, transitions,
                              targets[0], source_text=text)


def validate_solver_requirements(spec: TimedAutomatonSpec, linear: bool = False):
    """Checks the symbolic solver relies on, beyond structural validity."""
    errors = []
    if not spec.is_acyclic():
        errors.append("location graph has a directed cycle")
    for t in spec.transitions:
        for atom in t.guard.atoms:
            if atom.is_strict():
                errors.append(f"strict guard '{atom}' on edge "
                              f"{t.source} -> {t.destination}")
    for loc in spec.locations.values():
        for atom in loc.invariant.atoms:
            if atom.is_strict():
                errors.append(f"strict invariant '{atom}' at {loc.id}")
    if linear and not spec.is_linear():
        errors.append("model is not linear (some location has >1 successor)")
    if errors:
        raise ModelError(errors)


# ---------------------------------------------------------------------------
# Concrete semantics
# ---------------------------------------------------------------------------


def step(spec: TimedAutomatonSpec, config: Config, delay, action: str) -> Config:
    """Delay then fire: ``(l, v) -> (l', (v + d)[r -> 0])``."""
    delay = Fraction(delay)
    loc = spec.locations[config.location]
    delayed = {c: v + delay for c, v in config.valuation.items()}
    if not loc.invariant.holds(delayed):
        raise InvariantViolatedError(
            f"delay {delay} leaves invariant of {loc.id}")
    t = spec.transition_for(config.location, action)
    if t is None:
        raise NoSuchTransitionError(f"no action '{action}' at {config.location}")
    if not t.guard.holds(delayed):
        raise GuardViolatedError(f"guard {t.guard} violated at {dict(delayed)}")
    landed = {c: (Fraction(0) if c in t.reset else v) for c, v in delayed.items()}
    dest = spec.locations[t.destination]
    if not dest.invariant.holds(landed):
        raise InvariantViolatedError(
            f"landing valuation violates invariant of {dest.id}")
    return Config(t.destination, landed)


def moves_at(spec: TimedAutomatonSpec, config: Config, action: str):
    """Maximal closed delay interval [D, E] legal for ``action``, or None.

    D maximizes the guard/invariant lower bounds (and 0), E minimizes
    the upper bounds; E may be +oo.  Requires non-strict guards.
    """
    t = spec.transition_for(config.location, action)
    if t is None:
        return None
    loc = spec.locations[config.location]
    lo = Fraction(0)
    hi: ExtendedRational = POS_INF
    for guard in (t.guard, loc.invariant):
        for clock, (l_c, u_c) in guard.intervals(spec.clocks).items():
            v = config.valuation[clock]
            lo = max(lo, l_c - v)
            hi = min(hi, u_c - ext(v))
    if hi < ext(lo):
        return None
    return (lo, hi)


def topological_order(spec: TimedAutomatonSpec) -> list[str]:
    """Location ids ordered so every edge goes forward; CycleError otherwise."""
    indeg = {l: 0 for l in spec.locations}
    for t in spec.transitions:
        indeg[t.destination] += 1
    queue = sorted(l for l, d in indeg.items() if d == 0)
    out = []
    while queue:
        node = queue.pop(0)
        out.append(node)
        for t in spec.outgoing(node):
            indeg[t.destination] -= 1
            if indeg[t.destination] == 0:
                queue.append(t.destination)
        queue.sort()
    if len(out) != len(spec.locations):
        raise CycleError("location graph has a directed cycle")
    return out


def longest_path_length(spec: TimedAutomatonSpec, loc: str) -> Optional[int]:
    """Edge count of the longest path to the target; None if unreachable."""
    order = topological_order(spec)
    dist: dict[str, Optional[int]] = {l: None for l in spec.locations}
    dist[spec.target] = 0
    for node in reversed(order):
        for t in spec.outgoing(node):
            d = dist[t.destination]
            if d is not None and (dist[node] is None or d + 1 > dist[node]):
                dist[node] = d + 1
    return dist[loc]
