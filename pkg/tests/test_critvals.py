"""The gap map Phi, its Jacobian, inversion routes, and value realization."""

import random
from fractions import Fraction

import pytest
import sympy

from thurston import critvals, mpnum

X = sympy.symbols("x")


def ctx40():
    return mpnum.PrecisionContext(40)


def problem(ctx, gaps, mults):
    return critvals.PhiProblem(tuple(ctx.mpf(g) for g in gaps), tuple(mults))


def sympy_phi(gaps, mults):
    """Independent evaluation: place the points, integrate symbolically."""
    K = sum(mults)
    first = -sympy.Rational(sum(Fraction(g) * sum(mults[i + 1:]) for i, g in enumerate(gaps)), 1) / K
    first = sympy.nsimplify(first)
    points = [first]
    for g in gaps:
        points.append(points[-1] + sympy.nsimplify(Fraction(g)))
    g_expr = sympy.prod([(X - p) ** k for p, k in zip(points, mults)])
    out = []
    for a, b in zip(points, points[1:]):
        out.append(abs(sympy.integrate(g_expr, (X, a, b))))
    return out


# ---------------------------------------------------------------- phi

def test_phi_two_simple_points():
    ctx = ctx40()
    (s,) = critvals.phi(problem(ctx, [1], [1, 1]))
    assert ctx.equal(s, ctx.mpf(Fraction(1, 6)))
    assert sympy_phi([1], [1, 1]) == [sympy.Rational(1, 6)]


def test_phi_three_simple_points():
    ctx = ctx40()
    s = critvals.phi(problem(ctx, [1, 1], [1, 1, 1]))
    assert all(ctx.equal(v, ctx.mpf(Fraction(1, 4))) for v in s)
    assert sympy_phi([1, 1], [1, 1, 1]) == [sympy.Rational(1, 4)] * 2


def test_phi_with_multiplicity():
    ctx = ctx40()
    (s,) = critvals.phi(problem(ctx, [1], [1, 2]))
    assert ctx.equal(s, ctx.mpf(Fraction(1, 12)))
    assert sympy_phi([1], [1, 2]) == [sympy.Rational(1, 12)]


def test_phi_matches_symbolic_on_mixed_case():
    ctx = ctx40()
    gaps, mults = [Fraction(1, 2), Fraction(3, 4)], [2, 1, 3]
    got = critvals.phi(problem(ctx, gaps, mults))
    expected = sympy_phi(gaps, mults)
    for g, e in zip(got, expected):
        assert ctx.equal(g, ctx.mpf(Fraction(str(e))))


def test_phi_rejects_nonpositive_gap():
    ctx = ctx40()
    with pytest.raises(ValueError):
        problem(ctx, [0], [1, 1])
    with pytest.raises(ValueError):
        problem(ctx, [-1], [1, 1])


def test_phi_homogeneity():
    ctx = ctx40()
    rng = random.Random(7)
    for _ in range(20):
        r = rng.randint(2, 5)
        mults = [rng.randint(1, 3) for _ in range(r)]
        gaps = [ctx.mpf(rng.uniform(0.1, 2.0)) for _ in range(r - 1)]
        lam = ctx.mpf(rng.uniform(0.5, 2.0))
        d = 1 + sum(mults)
        base = critvals.phi(problem(ctx, gaps, mults))
        scaled = critvals.phi(problem(ctx, [lam * g for g in gaps], mults))
        for a, b in zip(scaled, base):
            expect = lam ** d * b
            assert abs(a - expect) <= ctx.mpf("1e-30") * max(1, abs(expect))


# ---------------------------------------------------------------- jacobian

def test_jacobian_single_gap_analytic():
    # s(delta) = delta^3 / 6, so ds/ddelta at 1 is 1/2
    ctx = ctx40()
    J = critvals.phi_jacobian(problem(ctx, [1], [1, 1]))
    assert ctx.equal(J[0][0], ctx.mpf(Fraction(1, 2)))


def test_jacobian_nonnegative_on_positive_orthant():
    ctx = ctx40()
    rng = random.Random(11)
    for _ in range(20):
        r = rng.randint(2, 5)
        mults = [rng.randint(1, 3) for _ in range(r)]
        gaps = [ctx.mpf(rng.uniform(0.05, 2.0)) for _ in range(r - 1)]
        J = critvals.phi_jacobian(problem(ctx, gaps, mults))
        for row in J:
            for entry in row:
                assert entry >= -ctx.tau


def test_jacobian_matches_central_differences():
    ctx = mpnum.PrecisionContext(30)
    h = ctx.mpf("1e-10")
    for gaps, mults in [([1, 1], [1, 1, 1]), ([Fraction(1, 2), Fraction(4, 5)], [2, 1, 2])]:
        gaps = [ctx.mpf(g) for g in gaps]
        J = critvals.phi_jacobian(problem(ctx, gaps, mults))
        for j in range(len(gaps)):
            up = list(gaps)
            down = list(gaps)
            up[j] = up[j] + h
            down[j] = down[j] - h
            fd_col = [
                (a - b) / (2 * h)
                for a, b in zip(
                    critvals.phi(problem(ctx, up, mults)),
                    critvals.phi(problem(ctx, down, mults)),
                )
            ]
            for i, fd in enumerate(fd_col):
                assert abs(J[i][j] - fd) <= ctx.mpf("1e-8")


# ---------------------------------------------------------------- starting point

def test_chebyshev_init_two_points():
    # with k=(1,1), Phi(d) = d^3/6, so the rescaled start solves d^3/6 = 1
    ctx = ctx40()
    (rho,) = critvals.chebyshev_init(2, (1, 1), ctx)
    assert ctx.equal(rho, ctx.mp.mpf(6) ** (ctx.mp.mpf(1) / 3))


def test_chebyshev_init_three_points_symmetric():
    ctx = ctx40()
    rho = critvals.chebyshev_init(3, (1, 1, 1), ctx)
    assert ctx.equal(rho[0], rho[1])
    values = critvals.phi(problem(ctx, rho, [1, 1, 1]))
    for v in values:
        assert abs(v - 1) <= ctx.mpf("1e-35")


def test_chebyshev_init_positive_and_capped():
    ctx = ctx40()
    for r, mults in [(2, (1, 2)), (4, (1, 1, 1, 1)), (5, (2, 1, 3, 1, 2))]:
        rho = critvals.chebyshev_init(r, mults, ctx)
        assert len(rho) == r - 1
        assert all(g > 0 for g in rho)
        assert max(critvals.phi(problem(ctx, rho, mults))) <= 1 + ctx.mpf("1e-30")


# ---------------------------------------------------------------- inversion

def test_invert_phi_single_gap():
    ctx = ctx40()
    res = critvals.invert_phi([Fraction(1, 6)], (1, 1), ctx)
    assert ctx.equal(res.gaps[0], 1)


def test_invert_phi_symmetric_pair():
    ctx = ctx40()
    res = critvals.invert_phi([Fraction(1, 4), Fraction(1, 4)], (1, 1, 1), ctx)
    assert ctx.equal(res.gaps[0], 1) and ctx.equal(res.gaps[1], 1)


def test_invert_phi_by_homogeneity():
    # Phi(2) = 2^3/6 = 4/3 for k=(1,1)
    ctx = ctx40()
    res = critvals.invert_phi([Fraction(4, 3)], (1, 1), ctx)
    assert ctx.equal(res.gaps[0], 2)


def test_invert_phi_residual_trace_decreases():
    ctx = ctx40()
    res = critvals.invert_phi([Fraction(1, 7), Fraction(2, 11)], (1, 2, 1), ctx)
    assert res.residuals[-1] <= ctx.mpf(10) ** (6 - ctx.digits)
    assert res.residuals[0] >= res.residuals[-1]


def test_continuation_agrees_with_newton():
    ctx = ctx40()
    newton = critvals.invert_phi([Fraction(1, 6)], (1, 1), ctx)
    lifted = critvals.continuation_invert([Fraction(1, 6)], (1, 1), ctx)
    assert abs(newton.gaps[0] - lifted.gaps[0]) <= ctx.mpf("1e-12")


def test_continuation_with_multiplicity():
    ctx = ctx40()
    res = critvals.continuation_invert([Fraction(1, 12)], (1, 2), ctx)
    assert ctx.equal(res.gaps[0], 1)


def test_inversion_round_trips():
    ctx = ctx40()
    rng = random.Random(23)
    for _ in range(10):
        r = rng.randint(2, 4)
        mults = [rng.randint(1, 3) for _ in range(r)]
        gaps = [ctx.mpf(rng.uniform(0.1, 1.0)) for _ in range(r - 1)]
        s = critvals.phi(problem(ctx, gaps, mults))
        for invert in (critvals.invert_phi, critvals.continuation_invert):
            res = invert(list(s), mults, ctx)
            for got, want in zip(res.gaps, gaps):
                assert abs(got - want) <= ctx.mpf("1e-12")


# ---------------------------------------------------------------- realization

def test_realize_recovers_known_cubic():
    # prescribe the critical values of 6x - 15x^2 + 10x^3 and compare after
    # the affine change aligning the critical points
    ctx = ctx40()
    f = mpnum.Polynomial((ctx.mp.mpf(0), ctx.mp.mpf(6), ctx.mp.mpf(-15), ctx.mp.mpf(10)))
    c1 = (5 - ctx.mp.sqrt(5)) / 10
    c2 = (5 + ctx.mp.sqrt(5)) / 10
    spec = critvals.CriticalValueSpec((f(c1), f(c2)))
    realized = critvals.realize_critical_values(spec, (1, 1), 1, ctx)
    p1, p2 = realized.critical_points
    # the affine map nu with nu(c1)=p1, nu(c2)=p2 turns realized back into f
    a = (p2 - p1) / (c2 - c1)
    b = p1 - a * c1
    pulled = mpnum.affine_substitute(realized.polynomial, b, a)
    for got, want in zip(pulled.coefficients, f.coefficients):
        assert abs(got - want) <= ctx.mpf("1e-30")


def test_realize_single_critical_point():
    ctx = ctx40()
    spec = critvals.CriticalValueSpec((ctx.mpf(Fraction(1, 2)),))
    realized = critvals.realize_critical_values(spec, (1,), -1, ctx)
    f = realized.polynomial
    assert realized.critical_points == (ctx.mp.mpf(0),)
    assert ctx.equal(f(ctx.mp.mpf(0)), ctx.mpf(Fraction(1, 2)))
    assert f.degree == 2 and f.coefficients[-1] < 0


def test_realize_quintic_multiplicities():
    # spatial order high-low-low with multiplicities (1,2,1), increasing last lap
    ctx = ctx40()
    values = (ctx.mpf("0.8"), ctx.mpf("0.45"), ctx.mpf("0.15"))
    realized = critvals.realize_critical_values(
        critvals.CriticalValueSpec(values), (1, 2, 1), 1, ctx
    )
    f = realized.polynomial
    assert f.degree == 5
    for point, value in zip(realized.critical_points, values):
        assert abs(f(point) - value) <= ctx.mpf("1e-12")
        assert abs(f.derivative()(point)) <= ctx.mpf("1e-25")


def test_realize_rejects_bad_sign_pattern():
    ctx = ctx40()
    values = (ctx.mpf("0.2"), ctx.mpf("0.5"))  # increasing, but the middle lap
    with pytest.raises(ValueError):             # must decrease when sigma=+1, k=(1,1)
        critvals.realize_critical_values(
            critvals.CriticalValueSpec(values), (1, 1), 1, ctx
        )


def test_realize_rejects_equal_adjacent_values():
    ctx = ctx40()
    values = (ctx.mpf("0.4"), ctx.mpf("0.4"))
    with pytest.raises(ValueError):
        critvals.realize_critical_values(
            critvals.CriticalValueSpec(values), (1, 1), 1, ctx
        )
