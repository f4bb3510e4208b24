"""Polynomials with prescribed critical values.

Fix r distinct critical points with multiplicities k_1..k_r (as roots of the
derivative) and normalize the derivative to be monic and centered, so the
points are determined by their consecutive gaps delta_1..delta_{r-1} via
``sum k_i c_i = 0``.  The map

    Phi: (delta_1, ..., delta_{r-1})  |->  (s_1, ..., s_{r-1}),

where ``s_i = |integral of g over [c_i, c_{i+1}]|`` with
``g(x) = prod (x - c_i)**k_i``, sends gaps between critical points to gaps
between consecutive critical values.  It is a diffeomorphism of the open
positive orthant onto itself and homogeneous of degree ``1 + sum(k_i)``
(the total degree of the antiderivative), so inverting it reduces
"construct a polynomial with these critical values" to a well-behaved
root-finding problem.

The inversion runs damped Newton from a Chebyshev-flavored starting point
(gap pattern of the critical points of a first-kind Chebyshev polynomial,
rescaled by homogeneity so the largest value gap is exactly 1).  Should
Newton ever stall, a path-lifting integrator follows the straight segment
from the starting values to the requested ones and polishes the endpoint;
that route only needs the Jacobian to stay invertible, which it does on the
whole positive orthant.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mpnum import Polynomial, PrecisionContext, antiderivative, divide_linear

NEWTON_TOL_SHIFT = 6  # residual target is 10**(-digits + shift)
NEWTON_MAX_ITERATIONS = 200
NEWTON_MAX_HALVINGS = 60
CONTINUATION_STEPS = 64
CONTINUATION_MAX_REFINEMENTS = 20


class NewtonStalled(ArithmeticError):
    """Damped Newton could not reduce the residual further."""


class SingularJacobian(ArithmeticError):
    """The derivative matrix of Phi was numerically singular."""


class RealizationError(ArithmeticError):
    """The constructed polynomial failed to reproduce the requested values."""


@dataclass(frozen=True)
class PhiProblem:
    """Gaps between distinct critical points, with their multiplicities."""

    gaps: tuple
    multiplicities: tuple

    def __post_init__(self):
        gaps = tuple(self.gaps)
        mults = tuple(int(k) for k in self.multiplicities)
        object.__setattr__(self, "gaps", gaps)
        object.__setattr__(self, "multiplicities", mults)
        if len(gaps) != len(mults) - 1:
            raise ValueError("need exactly one gap less than there are critical points")
        if any(k < 1 for k in mults):
            raise ValueError("multiplicities must be positive")
        for g in gaps:
            if not g > 0:
                raise ValueError("gaps must be positive")

    @property
    def r(self) -> int:
        return len(self.multiplicities)

    def total_degree(self) -> int:
        return 1 + sum(self.multiplicities)


def centered_points(problem: PhiProblem) -> tuple:
    """Critical points with the prescribed gaps and sum k_i c_i = 0."""
    mults = problem.multiplicities
    K = sum(mults)
    first = problem.gaps[0] * 0
    for i, gap in enumerate(problem.gaps):
        first -= gap * sum(mults[i + 1:])
    first /= K
    points = [first]
    for gap in problem.gaps:
        points.append(points[-1] + gap)
    return tuple(points)


def _monic_from_points(points, mults) -> Polynomial:
    one = points[0] * 0 + 1
    coeffs = [one]
    for point, k in zip(points, mults):
        for _ in range(k):
            shifted = [c * (-point) for c in coeffs] + [points[0] * 0]
            for i, c in enumerate(coeffs):
                shifted[i + 1] += c
            coeffs = shifted
    return Polynomial(tuple(coeffs))


def _interval_sign(mults, i) -> int:
    # sign of the monic product between points i and i+1: one flip per root
    # (with multiplicity) lying to the right.
    return 1 if sum(mults[i + 1:]) % 2 == 0 else -1


def phi(problem: PhiProblem) -> tuple:
    """Value gaps s_i = |integral over [c_i, c_{i+1}] of the monic product|."""
    points = centered_points(problem)
    g = _monic_from_points(points, problem.multiplicities)
    zero = points[0] * 0
    G = antiderivative(g, zero, zero)
    values = [G(p) for p in points]
    return tuple(abs(values[i + 1] - values[i]) for i in range(problem.r - 1))


def phi_jacobian(problem: PhiProblem) -> tuple:
    """Exact partial derivatives ds_i / ddelta_j, as nested tuples.

    Differentiation passes through the centered points: moving critical point
    c_m perturbs the integrand by ``-k_m * g(x)/(x - c_m)``, a polynomial, and
    the boundary terms vanish because g is zero at both endpoints.
    """
    mults = problem.multiplicities
    r = problem.r
    K = sum(mults)
    points = centered_points(problem)
    g = _monic_from_points(points, mults)
    zero = points[0] * 0

    # d(signed integral over interval i) / d(point m)
    dS = [[None] * r for _ in range(r - 1)]
    for mi in range(r):
        q = divide_linear(g, points[mi])
        Q = antiderivative(q, zero, zero)
        ends = [Q(p) for p in points]
        for i in range(r - 1):
            dS[i][mi] = -mults[mi] * (ends[i + 1] - ends[i])

    # d(point m) / d(gap j): gaps move every point right of them, and the
    # centering constraint shifts the whole configuration back.
    rows = []
    for i in range(r - 1):
        sign = _interval_sign(mults, i)
        row = []
        for j in range(r - 1):
            shift = (zero + sum(mults[j + 1:])) / K
            acc = zero
            for mi in range(r):
                dc = (1 - shift) if mi > j else -shift
                acc = acc + dS[i][mi] * dc
            row.append(sign * acc)
        rows.append(tuple(row))
    return tuple(rows)


def chebyshev_init(r: int, multiplicities, ctx: PrecisionContext) -> tuple:
    """Starting gaps for the Newton inversion.

    Gap pattern of the critical points of the degree r+1 first-kind
    Chebyshev polynomial (scaled by 2/4**(1/r)), then rescaled by
    homogeneity so that the largest component of Phi equals one.
    """
    if r < 2:
        raise ValueError("need at least two distinct critical points")
    mp = ctx.mp
    scale = 2 / mp.mpf(4) ** (mp.mpf(1) / r)
    raw = tuple(
        abs(scale * (mp.cos((j + 1) * mp.pi / (r + 1)) - mp.cos(j * mp.pi / (r + 1))))
        for j in range(1, r)
    )
    problem = PhiProblem(raw, tuple(multiplicities))
    peak = max(phi(problem))
    factor = (1 / peak) ** (mp.mpf(1) / problem.total_degree())
    return tuple(factor * g for g in raw)


@dataclass(frozen=True)
class InversionResult:
    gaps: tuple
    iterations: int
    residuals: tuple  # max-norm residual after each accepted step


def _newton_tolerance(ctx: PrecisionContext):
    return ctx.mp.mpf(10) ** (NEWTON_TOL_SHIFT - ctx.digits)


def _residual(gaps, mults, s):
    values = phi(PhiProblem(gaps, mults))
    res = [v - t for v, t in zip(values, s)]
    return res, max(abs(x) for x in res)


def _jacobian_solve(gaps, mults, rhs, ctx):
    J = phi_jacobian(PhiProblem(gaps, mults))
    try:
        sol = ctx.mp.lu_solve(ctx.mp.matrix([list(row) for row in J]), ctx.mp.matrix(list(rhs)))
    except ZeroDivisionError as exc:
        raise SingularJacobian(str(exc)) from None
    return [sol[i] for i in range(len(rhs))]


def invert_phi(s, multiplicities, ctx: PrecisionContext, initial=None) -> InversionResult:
    """Solve Phi(gaps) = s by damped Newton from the Chebyshev start.

    Steps are halved whenever they would push a gap out of the positive
    orthant or fail to shrink the max-norm residual; exhausting the damping
    budget raises :class:`NewtonStalled`, at which point callers fall back
    to :func:`continuation_invert`.
    """
    mults = tuple(int(k) for k in multiplicities)
    s = tuple(ctx.mpf(v) for v in s)
    for v in s:
        if not v > 0:
            raise ValueError("value gaps must be positive")
    gaps = tuple(initial) if initial is not None else chebyshev_init(len(mults), mults, ctx)
    tol = _newton_tolerance(ctx)
    res, norm = _residual(gaps, mults, s)
    trace = [norm]
    for iteration in range(NEWTON_MAX_ITERATIONS):
        if norm <= tol:
            return InversionResult(tuple(gaps), iteration, tuple(trace))
        step = _jacobian_solve(gaps, mults, res, ctx)
        damping = ctx.mp.mpf(1)
        for _ in range(NEWTON_MAX_HALVINGS):
            candidate = tuple(g - damping * d for g, d in zip(gaps, step))
            if any(not g > 0 for g in candidate):
                damping /= 2
                continue
            cres, cnorm = _residual(candidate, mults, s)
            if cnorm < norm:
                gaps, res, norm = candidate, cres, cnorm
                trace.append(norm)
                break
            damping /= 2
        else:
            raise NewtonStalled(f"residual stuck at {ctx.format(norm, 6)}")
    raise NewtonStalled(f"no convergence in {NEWTON_MAX_ITERATIONS} iterations")


def continuation_invert(s, multiplicities, ctx: PrecisionContext) -> InversionResult:
    """Invert Phi by lifting the straight path from the start values to s.

    Classical fourth-order Runge-Kutta with fixed steps integrates
    ``dx/dt = Phi'(x)^{-1} (s - Phi(x0))``; if any stage leaves the positive
    orthant the step size is halved and integration restarts.  An undamped
    Newton polish finishes to the same residual contract as the Newton route.
    """
    mults = tuple(int(k) for k in multiplicities)
    s = tuple(ctx.mpf(v) for v in s)
    for v in s:
        if not v > 0:
            raise ValueError("value gaps must be positive")
    start = chebyshev_init(len(mults), mults, ctx)
    y0 = phi(PhiProblem(start, mults))
    rhs = [b - a for a, b in zip(y0, s)]

    class _LeftOrthant(Exception):
        pass

    def field(x):
        if any(not g > 0 for g in x):
            raise _LeftOrthant
        return _jacobian_solve(tuple(x), mults, rhs, ctx)

    steps = CONTINUATION_STEPS
    for _ in range(CONTINUATION_MAX_REFINEMENTS + 1):
        x = list(start)
        h = ctx.mp.mpf(1) / steps
        try:
            for _ in range(steps):
                k1 = field(x)
                k2 = field([xi + h / 2 * ki for xi, ki in zip(x, k1)])
                k3 = field([xi + h / 2 * ki for xi, ki in zip(x, k2)])
                k4 = field([xi + h * ki for xi, ki in zip(x, k3)])
                x = [
                    xi + h / 6 * (a + 2 * b + 2 * c + d)
                    for xi, a, b, c, d in zip(x, k1, k2, k3, k4)
                ]
                if any(not g > 0 for g in x):
                    raise _LeftOrthant
        except _LeftOrthant:
            steps *= 2
            continue
        break
    else:
        raise NewtonStalled("path lifting kept leaving the positive orthant")

    # Undamped Newton polish.
    gaps = tuple(x)
    tol = _newton_tolerance(ctx)
    res, norm = _residual(gaps, mults, s)
    trace = [norm]
    for iteration in range(NEWTON_MAX_ITERATIONS):
        if norm <= tol:
            return InversionResult(tuple(gaps), iteration, tuple(trace))
        step = _jacobian_solve(gaps, mults, res, ctx)
        gaps = tuple(g - d for g, d in zip(gaps, step))
        if any(not g > 0 for g in gaps):
            raise NewtonStalled("polish left the positive orthant")
        res, norm = _residual(gaps, mults, s)
        trace.append(norm)
    raise NewtonStalled("polish failed to reach tolerance")


def solve_gaps(s, multiplicities, ctx: PrecisionContext) -> InversionResult:
    """Newton inversion with the continuation fallback."""
    try:
        return invert_phi(s, multiplicities, ctx)
    except NewtonStalled:
        return continuation_invert(s, multiplicities, ctx)


@dataclass(frozen=True)
class CriticalValueSpec:
    """Prescribed values v_1..v_r at the distinct critical points, in order."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if not self.values:
            raise ValueError("need at least one critical value")

    @property
    def r(self) -> int:
        return len(self.values)

    def gaps(self) -> tuple:
        return tuple(
            abs(self.values[i + 1] - self.values[i]) for i in range(self.r - 1)
        )


@dataclass(frozen=True)
class RealizedMap:
    """A polynomial together with its (centered) critical points."""

    polynomial: Polynomial
    critical_points: tuple
    gaps: tuple
    inversion: InversionResult


def realize_critical_values(
    spec: CriticalValueSpec,
    multiplicities,
    last_lap_orientation: int,
    ctx: PrecisionContext,
) -> RealizedMap:
    """The polynomial (unique up to affine precomposition) with these values.

    The derivative is ``sigma * prod (x - c_i)**k_i`` with sigma the
    orientation of the final lap; the value differences must alternate
    consistently with the lap orientations that sigma and the multiplicity
    parities dictate.
    """
    mults = tuple(int(k) for k in multiplicities)
    values = tuple(ctx.mpf(v) for v in spec.values)
    sigma = 1 if last_lap_orientation > 0 else -1
    r = len(values)
    if len(mults) != r:
        raise ValueError("one multiplicity per critical value required")

    if r == 1:
        zero = ctx.mp.mpf(0)
        g = Polynomial((zero,) * mults[0] + (ctx.mp.mpf(sigma),))
        f = antiderivative(g, zero, values[0])
        return RealizedMap(f, (zero,), (), InversionResult((), 0, ()))

    for i in range(r - 1):
        diff = values[i + 1] - values[i]
        if diff == 0:
            raise ValueError(f"critical values {i} and {i + 1} coincide")
        expected = sigma * _interval_sign(mults, i)
        if (1 if diff > 0 else -1) != expected:
            raise ValueError(
                "critical value differences are inconsistent with the lap orientations"
            )

    inversion = solve_gaps([abs(values[i + 1] - values[i]) for i in range(r - 1)], mults, ctx)
    problem = PhiProblem(inversion.gaps, mults)
    points = centered_points(problem)
    g_monic = _monic_from_points(points, mults)
    g = Polynomial(tuple(c * sigma for c in g_monic.coefficients))
    f = antiderivative(g, points[0], values[0])

    check_tol = 100 * _newton_tolerance(ctx)
    for point, value in zip(points, values):
        if abs(f(point) - value) > check_tol * max(1, abs(value)):
            raise RealizationError(
                "constructed map misses a prescribed critical value by "
                f"{ctx.format(abs(f(point) - value), 6)}"
            )
    return RealizedMap(f, points, inversion.gaps, inversion)
