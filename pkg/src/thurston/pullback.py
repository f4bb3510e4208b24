"""The pull-back iteration.

One step, given marked points x_0..x_n and the combinatorics m:

  1. mapmake:   build the polynomial whose j-th critical value is x_{m_j}
                (one value per distinct critical index, via the gap map
                inversion in :mod:`thurston.critvals`);
  2. normalize: find the framing preimages A and B of the interval
                endpoints in the unbounded first/last laps and precompose
                with the increasing affine map sending 0 to A and 1 to B,
                so the map fixes the unit-interval framing;
  3. pullback:  move every marked point to the unique preimage of its
                image point inside its own lap (critical indices go to the
                matching critical points directly);
  4. fit:       root-mean-square mismatch eps = sqrt(sum (f(x_j) -
                x_{m_j})**2) / n at the new points.

Iterating contracts toward the unique polynomial realizing the
combinatorics.  Two failure modes are handled along the way: when eps stops
improving the working precision doubles, and when marked points pile up
(non-expansive edges of the model), the offending points are merged, the
combinatorics is simplified accordingly, and the run continues on the
simplified data.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import combinatorics as comb
from . import critvals
from .mpnum import Polynomial, PrecisionContext, affine_substitute, solve_monotone

STALL_WINDOW = 4
STALL_FACTOR = 0.5


class PullbackError(RuntimeError):
    """A step of the iteration failed; the message carries step context."""


class InvalidCombinatorics(ValueError):
    """The run was asked to start from combinatorics that fail validation."""


@dataclass(frozen=True)
class MarkedConfiguration:
    """Marked points 0 = x_0 <= ... <= x_n = 1 at some step of the run."""

    points: tuple
    step: int = 0

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise ValueError("a configuration needs at least the two endpoints")
        if not (pts[0] == 0 and pts[-1] == 1):
            raise ValueError("configuration endpoints must be exactly 0 and 1")
        for a, b in zip(pts, pts[1:]):
            if b < a:
                raise ValueError("marked points must be sorted")

    @property
    def n(self) -> int:
        return len(self.points) - 1

    def gaps(self) -> tuple:
        return tuple(b - a for a, b in zip(self.points, self.points[1:]))


@dataclass(frozen=True)
class NormalizedMap:
    polynomial: Polynomial
    critical_points: tuple  # one per critical index, inside [0, 1]
    frame_low: object  # A: preimage of the 0-endpoint target before rescaling
    frame_high: object  # B: preimage of the 1-endpoint target


@dataclass(frozen=True)
class StepRecord:
    step: int
    polynomial: Polynomial
    configuration: MarkedConfiguration
    critical_values: tuple
    fit: object
    digits: int
    frame_low: object
    frame_high: object


@dataclass(frozen=True)
class CollapseEvent:
    step: int
    groups: tuple  # index groups in the combinatorics current at that step
    before: str  # rendered combinatorics before merging
    after: str  # rendered simplified combinatorics


@dataclass(frozen=True)
class RunOptions:
    tol: str = "1e-10"
    max_iter: int = 100
    start_digits: int = 40
    max_digits: int = 640
    collapse_threshold: Optional[str] = None  # default: 1e-8 / n
    collapse_persistence: int = 3
    keep_trace: bool = False


@dataclass(frozen=True)
class RunResult:
    combinatorics: comb.Combinatorics  # final (possibly simplified)
    original: comb.Combinatorics
    polynomial: Optional[Polynomial]
    configuration: Optional[MarkedConfiguration]
    iterations: int
    fit: object
    converged: bool
    digits: int
    precision_history: tuple  # (step, digits) pairs, escalations included
    collapse_events: tuple
    residuals: tuple  # eps per completed step
    trace: tuple  # StepRecords when requested

    @property
    def collapsed(self) -> bool:
        return bool(self.collapse_events)


def init_configuration(c: comb.Combinatorics, ctx: PrecisionContext) -> MarkedConfiguration:
    """Equally spaced marked points x_j = j/n."""
    n = c.n
    return MarkedConfiguration(tuple(ctx.mp.mpf(j) / n for j in range(n + 1)), step=0)


def critical_value_vector(c: comb.Combinatorics, x: MarkedConfiguration) -> critvals.CriticalValueSpec:
    """One prescribed value per distinct critical index: v = x_{m_j}."""
    return critvals.CriticalValueSpec(tuple(x.points[c.m[j]] for j in c.critical_points()))


def _multiplicities(c: comb.Combinatorics) -> tuple:
    # multiplicity as a root of the derivative = local degree - 1
    return tuple(c.local_degree[j] - 1 for j in c.critical_points())


def mapmake(
    c: comb.Combinatorics,
    values: critvals.CriticalValueSpec,
    ctx: PrecisionContext,
) -> critvals.RealizedMap:
    """A polynomial with these critical values; critical points not yet framed."""
    sigma = comb.laps(c).last_orientation()
    return critvals.realize_critical_values(values, _multiplicities(c), sigma, ctx)


def normalize(
    c: comb.Combinatorics,
    realized: critvals.RealizedMap,
    ctx: PrecisionContext,
) -> NormalizedMap:
    """Precompose with the affine map that frames the unit interval.

    A and B solve f(A), f(B) in {0, 1} as the combinatorics demands, with A
    in the first lap and B in the last lap, both extended to infinity: the
    framing preimage may sit at (or numerically on either side of) a
    boundary critical point of odd degree, so the solve must not be fenced
    in by it.
    """
    n = c.n
    f_raw = realized.polynomial
    lap_list = comb.laps(c)
    turning = set(c.turning_points())
    crit = c.critical_points()
    turning_pts = [p for j, p in zip(crit, realized.critical_points) if j in turning]
    target_low = ctx.mp.mpf(0 if c.m[0] == 0 else 1)
    target_high = ctx.mp.mpf(0 if c.m[n] == 0 else 1)

    A = solve_monotone(f_raw, target_low, None, turning_pts[0], lap_list.laps[0].orientation, ctx)
    B = solve_monotone(f_raw, target_high, turning_pts[-1], None, lap_list.last_orientation(), ctx)
    if not B > A:
        raise PullbackError("framing points came out in the wrong order")

    scale = B - A
    f = affine_substitute(f_raw, A, scale)
    moved = tuple((p - A) / scale for p in realized.critical_points)
    return NormalizedMap(f, moved, A, B)


def pullback_step(
    c: comb.Combinatorics,
    normalized: NormalizedMap,
    prev: MarkedConfiguration,
    ctx: PrecisionContext,
) -> MarkedConfiguration:
    """Pull every marked point back through its lap.

    Critical indices take the corresponding critical points of f; the
    endpoints are pinned at 0 and 1 by the framing; every other index k
    solves f(x'_k) = prev[m_k] inside the lap that contains k.
    """
    n = c.n
    f = normalized.polynomial
    lap_list = comb.laps(c)
    zero, one = ctx.mp.mpf(0), ctx.mp.mpf(1)
    crit_at = dict(zip(c.critical_points(), normalized.critical_points))
    turning_at = {j: crit_at[j] for j in c.turning_points()}

    new = [None] * (n + 1)
    new[0], new[n] = zero, one
    for j in range(1, n):
        if j in crit_at:
            new[j] = crit_at[j]
            continue
        lap = lap_list.lap_of(j, n)
        lo = zero if lap.left is None else turning_at[lap.left]
        hi = one if lap.right is None else turning_at[lap.right]
        target = prev.points[c.m[j]]
        new[j] = solve_monotone(f, target, lo, hi, lap.orientation, ctx)

    for a, b in zip(new, new[1:]):
        if b < a:
            raise PullbackError("pulled-back configuration is out of order")
    return MarkedConfiguration(tuple(new), step=prev.step + 1)


def fit_error(c: comb.Combinatorics, f: Polynomial, x: MarkedConfiguration, ctx: PrecisionContext):
    """eps = sqrt(sum_j (f(x_j) - x_{m_j})**2) / n."""
    total = ctx.mp.mpf(0)
    for j in range(c.n + 1):
        diff = f(x.points[j]) - x.points[c.m[j]]
        total += diff * diff
    return ctx.mp.sqrt(total) / c.n


def detect_collapse(x: MarkedConfiguration, threshold) -> tuple:
    """Maximal runs of consecutive indices whose successive gaps all sit
    below ``threshold``, as tuples of indices."""
    groups = []
    current = None
    for j, gap in enumerate(x.gaps()):
        if gap < threshold:
            if current and current[-1] == j:
                current.append(j + 1)
            else:
                current = [j, j + 1]
                groups.append(current)
        else:
            current = None
    return tuple(tuple(g) for g in groups)


def _merged_configuration(x: MarkedConfiguration, groups, ctx: PrecisionContext) -> MarkedConfiguration:
    group_of = {}
    for gi, g in enumerate(groups):
        for j in g:
            group_of[j] = gi
    points = []
    seen = set()
    for j in range(x.n + 1):
        if j in group_of:
            if group_of[j] in seen:
                continue
            seen.add(group_of[j])
            g = groups[group_of[j]]
            points.append(sum(x.points[k] for k in g) / len(g))
        else:
            points.append(x.points[j])
    lo, hi = points[0], points[-1]
    span = hi - lo
    pts = [(p - lo) / span for p in points]
    pts[0], pts[-1] = ctx.mp.mpf(0), ctx.mp.mpf(1)
    return MarkedConfiguration(tuple(pts), step=x.step)


def run(c: comb.Combinatorics, options: RunOptions = RunOptions()) -> RunResult:
    """Iterate mapmake -> normalize -> pullback -> fit to convergence.

    Precision doubles (up to ``max_digits``) whenever eps fails to halve
    over a four-step window.  Gaps that stay below the collapse threshold
    for ``collapse_persistence`` consecutive steps trigger merging of the
    involved points and the run continues on the simplified combinatorics;
    reaching the fit tolerance while gaps sit below the threshold triggers
    the same merge, so a collapsing run never reports a degenerate
    configuration as its answer.
    """
    report = comb.validate(c)
    if not report.passed:
        failed = [k for k, ok in sorted(report.conditions.items()) if k != 5 and not ok]
        raise InvalidCombinatorics(f"combinatorics fails condition(s) {failed}")

    original = c
    ctx = PrecisionContext(options.start_digits)
    tol = ctx.mpf(options.tol)
    explicit_thr = options.collapse_threshold
    threshold = (
        ctx.mpf(explicit_thr) if explicit_thr is not None else ctx.mpf("1e-8") / c.n
    )
    expansive = report.expansive_edges

    x = init_configuration(c, ctx)
    residuals = []
    window = []  # eps since last escalation or merge
    precision_history = [(1, ctx.digits)]
    collapse_events = []
    trace = []
    gap_streak = {}
    f = None
    eps = None

    step = 0
    while step < options.max_iter:
        step += 1
        try:
            values = critical_value_vector(c, x)
            realized = mapmake(c, values, ctx)
            normalized = normalize(c, realized, ctx)
            new_x = pullback_step(c, normalized, x, ctx)
        except (critvals.NewtonStalled, critvals.SingularJacobian,
                critvals.RealizationError, PullbackError, ArithmeticError) as exc:
            raise PullbackError(f"step {step} ({comb.render(c)}): {exc}") from exc
        f = normalized.polynomial
        eps = fit_error(c, f, new_x, ctx)
        residuals.append(eps)
        window.append(eps)
        if options.keep_trace:
            trace.append(StepRecord(
                step=step,
                polynomial=f,
                configuration=new_x,
                critical_values=values.values,
                fit=eps,
                digits=ctx.digits,
                frame_low=normalized.frame_low,
                frame_high=normalized.frame_high,
            ))

        # Collapse bookkeeping: persistent sub-threshold gaps, or hitting the
        # tolerance while gaps are degenerate, both force a merge.
        below = {
            j for j, gap in enumerate(new_x.gaps()) if gap < threshold
        }
        gap_streak = {j: gap_streak.get(j, 0) + 1 for j in below}
        persistent = any(v >= options.collapse_persistence for v in gap_streak.values())
        if below and (persistent or eps <= tol):
            groups = detect_collapse(new_x, threshold)
            flat = [j for g in groups for j in g[:-1]]
            if expansive is not None and any(expansive[j] for j in flat):
                raise PullbackError(
                    f"step {step}: an expansive edge fell below the collapse "
                    "threshold; the configuration is numerically inconsistent"
                )
            simplified = comb.simplify(c, groups)
            sub_report = comb.validate(simplified)
            if not sub_report.passed:
                raise PullbackError(
                    f"step {step}: merged combinatorics {comb.render(simplified)} is invalid"
                )
            collapse_events.append(CollapseEvent(
                step=step,
                groups=groups,
                before=comb.render(c),
                after=comb.render(simplified),
            ))
            x = _merged_configuration(new_x, groups, ctx)
            c = simplified
            expansive = sub_report.expansive_edges
            if explicit_thr is None:
                threshold = ctx.mpf("1e-8") / c.n
            gap_streak = {}
            window = []
            continue

        if eps <= tol:
            return RunResult(
                combinatorics=c, original=original, polynomial=f,
                configuration=new_x, iterations=step, fit=eps, converged=True,
                digits=ctx.digits, precision_history=tuple(precision_history),
                collapse_events=tuple(collapse_events),
                residuals=tuple(residuals), trace=tuple(trace),
            )

        x = new_x
        if (
            len(window) > STALL_WINDOW
            and window[-1] > window[-1 - STALL_WINDOW] * STALL_FACTOR
            and ctx.digits < options.max_digits
        ):
            new_digits = min(2 * ctx.digits, options.max_digits)
            ctx = PrecisionContext(new_digits)
            tol = ctx.mpf(options.tol)
            threshold = (
                ctx.mpf(explicit_thr) if explicit_thr is not None else ctx.mpf("1e-8") / c.n
            )
            interior = tuple(ctx.mpf(p) for p in x.points[1:-1])
            x = MarkedConfiguration(
                (ctx.mp.mpf(0),) + interior + (ctx.mp.mpf(1),), step=x.step
            )
            precision_history.append((step + 1, new_digits))
            window = []

    return RunResult(
        combinatorics=c, original=original, polynomial=f, configuration=x,
        iterations=step, fit=eps, converged=False, digits=ctx.digits,
        precision_history=tuple(precision_history),
        collapse_events=tuple(collapse_events), residuals=tuple(residuals),
        trace=tuple(trace),
    )
