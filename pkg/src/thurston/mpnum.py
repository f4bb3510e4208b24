"""Multiprecision scalars and dense polynomial algebra.

Everything numeric in this package runs through a :class:`PrecisionContext`,
which fixes a working precision in decimal digits and a derived tolerance
``tau = 10**(-digits + GUARD_DIGITS)``.  Contexts are independent values (each
wraps its own mpmath context), so escalating precision mid-computation or
running several computations concurrently never touches shared state.

Polynomials are dense coefficient vectors in the monomial basis, ascending
powers.  Degrees in this problem domain stay small (around twelve), so the
monomial basis with generous precision is preferable to fancier bases.
The one nontrivial numerical primitive is :func:`solve_monotone`: a bracketed
bisection/Newton hybrid that inverts a polynomial on a single monotone lap,
with outward bracket doubling for laps that extend to infinity.  Bracketing
is mandatory here because targets may sit arbitrarily close to critical
values, where the derivative underflows and bare Newton crawls or escapes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from mpmath.ctx_mp import MPContext

GUARD_DIGITS = 3
MIN_DIGITS = 15

# Outward doublings allowed when bracketing a root on an unbounded lap.
BRACKET_DOUBLINGS = 200


class RootBracketError(ArithmeticError):
    """The requested target cannot be bracketed on the given lap."""


@dataclass(frozen=True)
class PrecisionContext:
    """Explicit working precision, in decimal digits.

    All scalar operations performed on values created by this context round
    to ``digits`` significant digits; ``tau`` is the coarse tolerance used
    for value comparisons and solver stopping tests.
    """

    digits: int
    mp: MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise ValueError(f"precision must be at least {MIN_DIGITS} digits, got {self.digits}")
        mp = MPContext()
        mp.dps = self.digits
        object.__setattr__(self, "mp", mp)

    @property
    def tau(self):
        return self.mp.mpf(10) ** (GUARD_DIGITS - self.digits)

    def mpf(self, value):
        """Coerce ints, floats, decimal strings, Fractions and foreign mpfs."""
        if isinstance(value, Fraction):
            return self.mp.mpf(value.numerator) / value.denominator
        return self.mp.mpf(value)

    def equal(self, a, b):
        """Tolerance-based equality at tau, relative to the larger magnitude."""
        a, b = self.mpf(a), self.mpf(b)
        return abs(a - b) <= self.tau * max(1, abs(a), abs(b))

    def format(self, value, digits=None):
        """Decimal-string form of ``value`` at ``digits`` significant digits."""
        return self.mp.nstr(self.mpf(value), digits or self.digits, strip_zeros=True)

    def sqrt(self, value):
        return self.mp.sqrt(self.mpf(value))


def set_precision(ctx: PrecisionContext, digits: int) -> PrecisionContext:
    """A fresh context at ``digits``; existing values re-round as they are used."""
    return PrecisionContext(digits)


@dataclass(frozen=True)
class Polynomial:
    """Dense real polynomial; ``coefficients[i]`` multiplies ``x**i``."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = list(self.coefficients)
        if not coeffs:
            raise ValueError("a polynomial needs at least one coefficient")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, x):
        acc = self.coefficients[-1]
        for c in reversed(self.coefficients[:-1]):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial((self.coefficients[0] * 0,))
        return Polynomial(tuple(c * (i + 1) for i, c in enumerate(self.coefficients[1:])))


def poly_from_roots(roots, multiplicities, sign, ctx: PrecisionContext) -> Polynomial:
    """Expand ``sign * prod (x - roots[i])**multiplicities[i]``.

    Roots must be strictly increasing; multiplicities are positive integers.
    """
    roots = [ctx.mpf(r) for r in roots]
    if len(roots) != len(multiplicities):
        raise ValueError("roots and multiplicities differ in length")
    if any(k < 1 for k in multiplicities):
        raise ValueError("multiplicities must be positive")
    for a, b in zip(roots, roots[1:]):
        if not a < b:
            raise ValueError("roots must be strictly increasing")
    coeffs = [ctx.mpf(sign)]
    for root, k in zip(roots, multiplicities):
        for _ in range(k):
            shifted = [c * (-root) for c in coeffs] + [coeffs[0] * 0]
            for i, c in enumerate(coeffs):
                shifted[i + 1] += c
            coeffs = shifted
    return Polynomial(tuple(coeffs))


def antiderivative(p: Polynomial, base_point, base_value) -> Polynomial:
    """The antiderivative P of p with P(base_point) = base_value."""
    zero = p.coefficients[0] * 0
    coeffs = [zero] + [c / (i + 1) for i, c in enumerate(p.coefficients)]
    raw = Polynomial(tuple(coeffs))
    constant = base_value - raw(base_point)
    return Polynomial((coeffs[0] + constant,) + tuple(coeffs[1:]))


def definite_integral(p: Polynomial, a, b):
    """Integral of p over [a, b] via the exact antiderivative."""
    zero = p.coefficients[0] * 0
    P = antiderivative(p, zero, zero)
    return P(b) - P(a)


def divide_linear(p: Polynomial, root) -> Polynomial:
    """Synthetic division by (x - root); root must actually be a root."""
    coeffs = p.coefficients
    out = [None] * (len(coeffs) - 1)
    acc = coeffs[-1]
    for i in range(len(coeffs) - 2, -1, -1):
        out[i] = acc
        acc = coeffs[i] + acc * root
    return Polynomial(tuple(out))


def affine_substitute(p: Polynomial, offset, scale) -> Polynomial:
    """The polynomial x |-> p(offset + scale * x), expanded."""
    zero = p.coefficients[0] * 0
    out = [p.coefficients[-1]]
    for c in reversed(p.coefficients[:-1]):
        nxt = [zero] * (len(out) + 1)
        for i, v in enumerate(out):
            nxt[i] += v * offset
            nxt[i + 1] += v * scale
        nxt[0] += c
        out = nxt
    return Polynomial(tuple(out))


def solve_monotone(p: Polynomial, target, lo, hi, orientation, ctx: PrecisionContext):
    """Solve p(x) = target on a monotone lap [lo, hi].

    ``lo``/``hi`` may be None for laps extending to -inf/+inf; the bracket is
    then grown outward from the finite end by doubling steps.  ``orientation``
    is +1 for increasing laps, -1 for decreasing.  The lap may contain
    isolated points of vanishing derivative (higher-order tangencies); the
    result satisfies ``|p(x) - target| <= 10 * tau * max(1, |target|)``.
    """
    target = ctx.mpf(target)
    one = ctx.mp.mpf(1)
    if lo is None and hi is None:
        raise ValueError("at least one lap end must be finite")

    def past_low(v):
        return v <= target if orientation > 0 else v >= target

    def past_high(v):
        return v >= target if orientation > 0 else v <= target

    if lo is None:
        anchor = ctx.mpf(hi)
        step = one
        lo = anchor - step
        for _ in range(BRACKET_DOUBLINGS):
            if past_low(p(lo)):
                break
            step *= 2
            lo = anchor - step
        else:
            raise RootBracketError("bracket expansion cap reached below the lap")
    else:
        lo = ctx.mpf(lo)
    if hi is None:
        anchor = lo
        step = one
        hi = anchor + step
        for _ in range(BRACKET_DOUBLINGS):
            if past_high(p(hi)):
                break
            step *= 2
            hi = anchor + step
        else:
            raise RootBracketError("bracket expansion cap reached above the lap")
    else:
        hi = ctx.mpf(hi)

    value_tol = 10 * ctx.tau * max(one, abs(target))
    flo = p(lo) - target
    fhi = p(hi) - target
    if abs(flo) <= value_tol:
        return lo
    if abs(fhi) <= value_tol:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootBracketError(
            f"target {ctx.format(target, 8)} outside lap range "
            f"[{ctx.format(p(lo), 8)}, {ctx.format(p(hi), 8)}]"
        )

    dp = p.derivative()
    x = (lo + hi) / 2
    for _ in range(300 + 4 * ctx.digits):
        fx = p(x) - target
        if abs(fx) <= value_tol:
            return x
        if (fx > 0) == (fhi > 0):
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        slope = dp(x)
        stepped = False
        if slope != 0:
            candidate = x - fx / slope
            if lo < candidate < hi:
                x = candidate
                stepped = True
        if not stepped:
            x = (lo + hi) / 2
    raise RootBracketError("root refinement failed to meet tolerance")
