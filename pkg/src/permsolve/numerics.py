"""Exact scalar and affine-expression arithmetic.

Everything downstream (polyhedra, the box optimizer, the backward
induction) manipulates two kinds of values:

* ``ExtendedRational``: an exact rational extended with -oo and +oo.
  Infinities absorb addition and comparison, but the indeterminate
  forms (oo - oo, 0 * oo) raise instead of propagating garbage.

* ``AffineExpr``: an affine function ``F0 + sum_i Fi * v_i`` over named
  variables with exact rational coefficients.  The constant term is an
  ``ExtendedRational``; an infinite constant forces all coefficients to
  zero, so the constant functions -oo and +oo are representable.

Variables are plain strings.  Names starting with ``$`` are reserved
for synthetic quantities (delay bounds, junction delays) that are not
clock variables and are not implicitly nonnegative.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction
RationalLike = Union[Fraction, int]


class IndeterminateFormError(ArithmeticError):
    """Raised for oo - oo and 0 * oo."""


class InfiniteAffineError(ValueError):
    """Raised when an operation requires a finite affine expression."""


class ExtendedRational:
    """An exact rational, or one of the two infinities.

    Internally ``_kind`` is -1 / 0 / +1 for -oo / finite / +oo, and
    ``_value`` is the reduced ``Fraction`` when finite.
    """

    __slots__ = ("_kind", "_value")

    def __init__(self, value: RationalLike = 0, _kind: int = 0):
        self._kind = _kind
        self._value = Fraction(value) if _kind == 0 else None

    @property
    def is_finite(self) -> bool:
        return self._kind == 0

    @property
    def is_pos_inf(self) -> bool:
        return self._kind > 0

    @property
    def is_neg_inf(self) -> bool:
        return self._kind < 0

    @property
    def value(self) -> Fraction:
        if self._kind != 0:
            raise InfiniteAffineError("infinite value has no rational part")
        return self._value

    def __repr__(self) -> str:
        if self._kind > 0:
            return "+inf"
        if self._kind < 0:
            return "-inf"
        return str(self._value)

    def __hash__(self):
        return hash((self._kind, self._value))

    def __eq__(self, other) -> bool:
        other = ext(other)
        return self._kind == other._kind and self._value == other._value

    def __lt__(self, other) -> bool:
        other = ext(other)
        if self._kind != other._kind:
            return self._kind < other._kind
        if self._kind != 0:
            return False
        return self._value < other._value

    def __le__(self, other) -> bool:
        other = ext(other)
        return self == other or self < other

    def __gt__(self, other) -> bool:
        return ext(other) < self

    def __ge__(self, other) -> bool:
        return ext(other) <= self

    def __neg__(self) -> "ExtendedRational":
        if self._kind != 0:
            return ExtendedRational(_kind=-self._kind)
        return ExtendedRational(-self._value)

    def __add__(self, other) -> "ExtendedRational":
        other = ext(other)
        if self._kind == 0 and other._kind == 0:
            return ExtendedRational(self._value + other._value)
        if self._kind == 0:
            return other
        if other._kind == 0:
            return self
        if self._kind != other._kind:
            raise IndeterminateFormError("oo - oo")
        return self

    __radd__ = __add__

    def __sub__(self, other) -> "ExtendedRational":
        return self + (-ext(other))

    def __rsub__(self, other) -> "ExtendedRational":
        return ext(other) + (-self)

    def __mul__(self, other) -> "ExtendedRational":
        other = ext(other)
        if self._kind == 0 and other._kind == 0:
            return ExtendedRational(self._value * other._value)
        for a, b in ((self, other), (other, self)):
            if a._kind != 0 and b == ZERO:
                raise IndeterminateFormError("0 * oo")
        sign_a = self._kind if self._kind != 0 else (1 if self._value > 0 else -1)
        sign_b = other._kind if other._kind != 0 else (1 if other._value > 0 else -1)
        return ExtendedRational(_kind=sign_a * sign_b)

    __rmul__ = __mul__

    def __truediv__(self, divisor) -> "ExtendedRational":
        divisor = Fraction(divisor)
        if divisor == 0:
            raise ZeroDivisionError("division of extended rational by zero")
        if self._kind == 0:
            return ExtendedRational(self._value / divisor)
        return ExtendedRational(_kind=self._kind if divisor > 0 else -self._kind)


def ext(x) -> ExtendedRational:
    """Coerce a Fraction / int / ExtendedRational to ExtendedRational."""
    if isinstance(x, ExtendedRational):
        return x
    return ExtendedRational(x)


POS_INF = ExtendedRational(_kind=1)
NEG_INF = ExtendedRational(_kind=-1)
ZERO = ExtendedRational(0)


def ext_min(values: Iterable[ExtendedRational]) -> ExtendedRational:
    out = None
    for v in values:
        v = ext(v)
        if out is None or v < out:
            out = v
    if out is None:
        return POS_INF
    return out


def ext_max(values: Iterable[ExtendedRational]) -> ExtendedRational:
    out = None
    for v in values:
        v = ext(v)
        if out is None or v > out:
            out = v
    if out is None:
        return NEG_INF
    return out


class AffineExpr:
    """``F0 + sum_i Fi * v_i`` with exact rational coefficients.

    Immutable and hashable; zero coefficients are dropped so equal
    functions compare equal.  An infinite constant term forces an empty
    coefficient map (the constant functions -oo / +oo).
    """

    __slots__ = ("const", "coeffs")

    def __init__(self, const: RationalLike | ExtendedRational = 0,
                 coeffs: Mapping[str, RationalLike] | None = None):
        const = ext(const)
        items = {}
        if coeffs:
            for var, c in coeffs.items():
                c = Fraction(c)
                if c != 0:
                    items[var] = c
        if not const.is_finite and items:
            raise InfiniteAffineError("infinite constant with nonzero coefficients")
        self.const = const
        self.coeffs = dict(sorted(items.items()))

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def var(name: str) -> "AffineExpr":
        return AffineExpr(0, {name: 1})

    @staticmethod
    def constant(value) -> "AffineExpr":
        return AffineExpr(ext(value))

    @property
    def is_finite(self) -> bool:
        return self.const.is_finite

    @property
    def is_constant(self) -> bool:
        return not self.coeffs

    def coeff(self, var: str) -> Fraction:
        return self.coeffs.get(var, Fraction(0))

    def support(self) -> frozenset:
        return frozenset(self.coeffs)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other) -> "AffineExpr":
        other = to_affine(other)
        if not self.const.is_finite or not other.const.is_finite:
            return AffineExpr(self.const + other.const)
        merged = dict(self.coeffs)
        for var, c in other.coeffs.items():
            merged[var] = merged.get(var, Fraction(0)) + c
        return AffineExpr(self.const + other.const, merged)

    __radd__ = __add__

    def __neg__(self) -> "AffineExpr":
        return AffineExpr(-self.const, {v: -c for v, c in self.coeffs.items()})

    def __sub__(self, other) -> "AffineExpr":
        return self + (-to_affine(other))

    def __rsub__(self, other) -> "AffineExpr":
        return to_affine(other) + (-self)

    def scale(self, factor: RationalLike) -> "AffineExpr":
        factor = Fraction(factor)
        if not self.const.is_finite:
            if factor == 0:
                raise IndeterminateFormError("0 * oo")
            const = self.const if factor > 0 else -self.const
            return AffineExpr(const)
        return AffineExpr(self.const * factor,
                          {v: c * factor for v, c in self.coeffs.items()})

    def __mul__(self, factor) -> "AffineExpr":
        return self.scale(factor)

    __rmul__ = __mul__

    def __truediv__(self, factor) -> "AffineExpr":
        return self.scale(Fraction(1, 1) / Fraction(factor))

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineExpr):
            return NotImplemented
        return self.const == other.const and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.const, tuple(self.coeffs.items())))

    def __repr__(self) -> str:
        if not self.const.is_finite:
            return repr(self.const)
        parts = []
        if self.const != ZERO or not self.coeffs:
            parts.append(str(self.const.value))
        for var, c in self.coeffs.items():
            if c == 1:
                parts.append(var)
            elif c == -1:
                parts.append(f"-{var}")
            else:
                parts.append(f"{c}*{var}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- evaluation and substitution --------------------------------------------

    def eval(self, valuation: Mapping[str, RationalLike]) -> ExtendedRational:
        """Evaluate at a valuation covering the expression's support."""
        if not self.const.is_finite:
            return self.const
        total = self.const.value
        for var, c in self.coeffs.items():
            total += c * Fraction(valuation[var])
        return ExtendedRational(total)

    def drop_vars(self, names: Iterable[str]) -> "AffineExpr":
        """The expression v -> f(v[names -> 0])."""
        names = set(names)
        return AffineExpr(self.const,
                          {v: c for v, c in self.coeffs.items() if v not in names})

    def substitute(self, var: str, replacement: "AffineExpr") -> "AffineExpr":
        """Substitute an affine expression for one variable."""
        c = self.coeff(var)
        if c == 0:
            return self
        return self.drop_vars([var]) + replacement.scale(c)

    def coeff_sum(self, names: Iterable[str] | None = None) -> Fraction:
        """Sum of coefficients, optionally restricted to ``names``."""
        if names is None:
            return sum(self.coeffs.values(), Fraction(0))
        names = set(names)
        return sum((c for v, c in self.coeffs.items() if v in names), Fraction(0))


def to_affine(x) -> AffineExpr:
    if isinstance(x, AffineExpr):
        return x
    return AffineExpr(ext(x))


def eval_affine(f: AffineExpr, valuation: Mapping[str, RationalLike]) -> ExtendedRational:
    return f.eval(valuation)


def delay_reset_compose(f: AffineExpr, reset: Iterable[str]):
    """Decompose ``f((v + t)[reset -> 0])`` as ``slope * t + offset(v)``.

    The slope is the sum of f's coefficients over the clocks that are
    not reset (resetting kills their dependence on the delay), and the
    offset is ``v -> f(v[reset -> 0])``.
    """
    if not f.const.is_finite:
        raise InfiniteAffineError("cannot decompose an infinite affine function")
    reset = set(reset)
    slope = sum((c for v, c in f.coeffs.items() if v not in reset), Fraction(0))
    return slope, f.drop_vars(reset)
