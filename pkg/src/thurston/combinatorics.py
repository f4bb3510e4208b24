"""Combinatorics of critically finite real maps on the interval.

The input to the whole machine is an integer sequence ``m_0..m_n`` recording
where each of ``n+1`` marked points maps (marked points are the critical and
postcritical points together with the interval endpoints), plus a local
degree ``d_j >= 1`` at every marked point.  Text form: comma-separated image
indices, with a ``^degree`` suffix wherever the degree is not the default
(2 at turning points, 1 elsewhere), e.g. ``"0,2,6^2,4,3^3,1^2,4,7"``.

This module parses and validates such sequences, builds the piecewise-linear
model map, classifies edges as expansive or not, extracts the lap structure
(maximal monotone pieces, bounded by turning points only), and performs the
point-merging simplification that describes what a non-expansive sequence
degenerates to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

_ITEM_RE = re.compile(r"^(-?\d+)(?:\^(-?\d+))?$")


class CombinatoricsError(ValueError):
    """Structurally invalid combinatorics data."""


class ParseError(CombinatoricsError):
    """Text that does not match the combinatorics grammar."""


@dataclass(frozen=True)
class Combinatorics:
    """Image indices m_0..m_n plus a local degree for each marked point."""

    m: tuple
    local_degree: tuple

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        deg = tuple(int(v) for v in self.local_degree)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "local_degree", deg)
        n = len(m) - 1
        if n < 1:
            raise CombinatoricsError("need at least two marked points")
        if len(deg) != len(m):
            raise CombinatoricsError("one local degree per marked point required")
        for j, v in enumerate(m):
            if not 0 <= v <= n:
                raise CombinatoricsError(f"image index m_{j}={v} outside 0..{n}")
        for j, d in enumerate(deg):
            if d < 1:
                raise CombinatoricsError(f"local degree at index {j} must be >= 1, got {d}")

    @property
    def n(self) -> int:
        return len(self.m) - 1

    def turning_points(self) -> tuple:
        """Interior indices where the PL graph has a local max or min."""
        m = self.m
        return tuple(
            j for j in range(1, self.n)
            if (m[j] - m[j - 1]) * (m[j + 1] - m[j]) < 0
        )

    def critical_points(self) -> tuple:
        """All indices with local degree above one, in increasing order."""
        return tuple(j for j, d in enumerate(self.local_degree) if d > 1)

    def total_degree(self) -> int:
        return 1 + sum(d - 1 for d in self.local_degree)

    def is_periodic(self, j: int) -> bool:
        """Whether j returns to itself under iteration of j -> m_j."""
        k = self.m[j]
        for _ in range(self.n + 1):
            if k == j:
                return True
            k = self.m[k]
        return False


def default_degrees(m: Sequence[int]) -> tuple:
    """Degree 2 at turning points, 1 everywhere else."""
    m = tuple(m)
    n = len(m) - 1
    turning = {
        j for j in range(1, n)
        if (m[j] - m[j - 1]) * (m[j + 1] - m[j]) < 0
    }
    return tuple(2 if j in turning else 1 for j in range(n + 1))


def parse(text: str) -> Combinatorics:
    """Parse the comma-separated text form, defaulting unstated degrees."""
    items = [item.strip() for item in text.split(",")]
    if len(items) < 2 or any(not item for item in items):
        raise ParseError(f"expected comma-separated items, got {text!r}")
    m, explicit = [], []
    for item in items:
        match = _ITEM_RE.match(item.replace(" ", ""))
        if not match:
            raise ParseError(f"bad item {item!r}")
        m.append(int(match.group(1)))
        explicit.append(int(match.group(2)) if match.group(2) else None)
    n = len(m) - 1
    for j, v in enumerate(m):
        if not 0 <= v <= n:
            raise ParseError(f"image index m_{j}={v} outside 0..{n}")
    for j, d in enumerate(explicit):
        if d is not None and d < 1:
            raise ParseError(f"explicit local degree {d} at index {j} is below 1")
    defaults = default_degrees(m)
    degrees = tuple(d if d is not None else defaults[j] for j, d in enumerate(explicit))
    return Combinatorics(tuple(m), degrees)


def render(c: Combinatorics) -> str:
    """Canonical text form; degrees appear only where they differ from default."""
    defaults = default_degrees(c.m)
    parts = []
    for j, v in enumerate(c.m):
        d = c.local_degree[j]
        parts.append(f"{v}^{d}" if d != defaults[j] else str(v))
    return ",".join(parts)


@dataclass(frozen=True)
class Lap:
    """One maximal monotone piece of the PL model, in index coordinates.

    ``left``/``right`` are turning-point indices, or None where the lap is
    unbounded (the first and last laps extend past the framing points so the
    framing preimages can be solved for without bracketing trouble).
    """

    left: Optional[int]
    right: Optional[int]
    orientation: int

    def contains_index(self, j: int, n: int) -> bool:
        lo = -1 if self.left is None else self.left
        hi = n + 1 if self.right is None else self.right
        return lo < j < hi


@dataclass(frozen=True)
class LapStructure:
    laps: tuple

    def __len__(self):
        return len(self.laps)

    def __iter__(self):
        return iter(self.laps)

    def last_orientation(self) -> int:
        return self.laps[-1].orientation

    def lap_of(self, j: int, n: int) -> Lap:
        """The lap whose open interior contains the non-turning index j."""
        for lap in self.laps:
            if lap.contains_index(j, n):
                return lap
        raise CombinatoricsError(f"index {j} is a lap boundary, not interior to a lap")


def laps(c: Combinatorics) -> LapStructure:
    """Lap decomposition; odd-degree critical points do not bound laps."""
    turning = c.turning_points()
    bounds = [None, *turning, None]
    out = []
    for left, right in zip(bounds, bounds[1:]):
        start = 0 if left is None else left
        orientation = 1 if c.m[start + 1] > c.m[start] else -1
        out.append(Lap(left, right, orientation))
    return LapStructure(tuple(out))


def pl_eval(c: Combinatorics, x) -> Fraction:
    """The rescaled PL model at x: interpolate m linearly, divided by n.

    Exact rational arithmetic, so grid points evaluate exactly.
    """
    x = Fraction(x)
    if x < 0 or x > 1:
        raise ValueError(f"PL model is defined on [0,1], got {x}")
    n = c.n
    t = n * x
    j = int(t)
    if j == n:
        return Fraction(c.m[n], n)
    frac = t - j
    return Fraction(c.m[j], n) + frac * Fraction(c.m[j + 1] - c.m[j], n)


def edge_images(c: Combinatorics) -> list:
    """For each edge [j, j+1], the set of edges its PL image covers."""
    out = []
    for j in range(c.n):
        lo, hi = sorted((c.m[j], c.m[j + 1]))
        out.append(set(range(lo, hi)))
    return out


def expansiveness(c: Combinatorics) -> tuple:
    """Per-edge expansiveness flags.

    An edge is expansive when one of its endpoints is critical, or when some
    iterated PL image of it covers an edge with a critical endpoint.  Images
    of edges are unions of consecutive edges and critical points sit at
    vertices, so reachability over the edge graph decides this exactly.
    """
    images = edge_images(c)
    critical = set(c.critical_points())

    def boundary_critical(e):
        return e in critical or (e + 1) in critical

    flags = []
    for start in range(c.n):
        if boundary_critical(start):
            flags.append(True)
            continue
        seen, frontier = set(), {start}
        hit = False
        while frontier and not hit:
            nxt = set()
            for e in frontier:
                for img in images[e]:
                    if img in seen:
                        continue
                    seen.add(img)
                    if boundary_critical(img):
                        hit = True
                        break
                    nxt.add(img)
                if hit:
                    break
            frontier = nxt
        flags.append(hit)
    return tuple(flags)


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the structural checks, plus derived data for callers.

    ``conditions`` holds pass/fail for the numbered requirements:
    1 adjacent images differ, 2 an interior turning point exists,
    3 endpoints map to endpoints, 5 interior points are critical or
    postcritical (advisory), 6 local degree parities are consistent.
    Expansiveness is reported per edge and is advisory as well: failing it
    means the iteration degenerates onto simpler combinatorics rather than
    diverging, so it produces a warning, not a hard failure.
    """

    conditions: dict
    total_degree: int
    turning_points: tuple
    critical_points: tuple
    expansive_edges: Optional[tuple]
    warnings: tuple

    @property
    def passed(self) -> bool:
        return all(self.conditions[k] for k in (1, 2, 3, 6))

    @property
    def expansive(self) -> Optional[bool]:
        if self.expansive_edges is None:
            return None
        return all(self.expansive_edges)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "conditions": {str(k): v for k, v in sorted(self.conditions.items())},
            "total_degree": self.total_degree,
            "turning_points": list(self.turning_points),
            "critical_points": list(self.critical_points),
            "expansive": self.expansive,
            "expansive_edges": None if self.expansive_edges is None else list(self.expansive_edges),
            "warnings": list(self.warnings),
        }


def validate(c: Combinatorics) -> ValidationReport:
    n = c.n
    m = c.m
    deg = c.local_degree
    turning = set(c.turning_points())
    warnings = []

    cond1 = all(m[j] != m[j + 1] for j in range(n))
    cond2 = bool(turning)
    cond3 = m[0] in (0, n) and m[n] in (0, n)

    cond6 = True
    for j in range(1, n):
        if (deg[j] % 2 == 0) != (j in turning):
            cond6 = False
    for j in (0, n):
        if deg[j] % 2 == 0:
            cond6 = False
        elif deg[j] > 1 and c.is_periodic(j):
            cond6 = False

    # Condition 5: every interior point is critical or hit by a critical orbit.
    critical = set(c.critical_points())
    postcritical = set()
    for j in critical:
        k = m[j]
        for _ in range(n + 1):
            postcritical.add(k)
            k = m[k]
    cond5 = all(j in critical or j in postcritical for j in range(1, n))
    if not cond5:
        warnings.append("some interior marked points are neither critical nor postcritical")

    edges = None
    if cond1 and cond2 and cond3:
        edges = expansiveness(c)
        for j, ok in enumerate(edges):
            if not ok:
                warnings.append(f"edge [{j},{j + 1}] is not expansive; it will collapse to a point")

    return ValidationReport(
        conditions={1: cond1, 2: cond2, 3: cond3, 5: cond5, 6: cond6},
        total_degree=c.total_degree(),
        turning_points=tuple(sorted(turning)),
        critical_points=tuple(sorted(critical)),
        expansive_edges=edges,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class MappingPattern:
    """Forward orbits of the critical points under j -> m_j.

    ``orbits`` lists, for each critical index not already visited, the chain
    of indices up to (not including) the first revisited one; ``cycles``
    holds the periodic cycles those chains run into, each rotated to start
    at its smallest index.
    """

    orbits: tuple
    cycles: tuple
    local_degree: tuple

    def render(self) -> str:
        def node(j):
            d = self.local_degree[j]
            return f"x{j}^{d}" if d > 1 else f"x{j}"

        parts = []
        for orbit, cycle in zip(self.orbits, self.cycles):
            chain = " -> ".join(node(j) for j in orbit)
            back = f"(x{cycle[0]})" if cycle else ""
            parts.append(f"{chain} -> {back}" if back else chain)
        return "; ".join(parts)


def mapping_pattern(c: Combinatorics) -> MappingPattern:
    m = c.m
    visited = set()
    orbits, cycles = [], []
    for start in c.critical_points():
        if start in visited:
            continue
        chain = []
        j = start
        local = {}
        while j not in visited and j not in local:
            local[j] = len(chain)
            chain.append(j)
            j = m[j]
        orbits.append(tuple(chain))
        if j in local:
            cycle = chain[local[j]:]
            k = cycle.index(min(cycle))
            cycles.append(tuple(cycle[k:] + cycle[:k]))
        else:
            # Ran into an earlier orbit; find the cycle it eventually reaches.
            seen_here = set()
            while j not in seen_here:
                seen_here.add(j)
                j = m[j]
            cycle = [j]
            k = m[j]
            while k != j:
                cycle.append(k)
                k = m[k]
            p = cycle.index(min(cycle))
            cycles.append(tuple(cycle[p:] + cycle[:p]))
        visited.update(chain)
    return MappingPattern(tuple(orbits), tuple(cycles), c.local_degree)


def simplify(c: Combinatorics, merge_groups) -> Combinatorics:
    """Fuse each group of consecutive marked points into a single point.

    The fused point keeps total degree: its local degree is
    ``1 + sum(d_j - 1)`` over the group.  Images must be consistent: all
    members of a group have to map into one merged point.
    """
    groups = [tuple(sorted(g)) for g in merge_groups]
    taken = set()
    for g in groups:
        if not g:
            raise CombinatoricsError("empty merge group")
        if list(g) != list(range(g[0], g[-1] + 1)):
            raise CombinatoricsError(f"merge group {g} is not consecutive")
        if taken & set(g):
            raise CombinatoricsError("merge groups overlap")
        taken |= set(g)

    n = c.n
    group_of = {}
    for gi, g in enumerate(groups):
        for j in g:
            group_of[j] = gi

    new_index = {}
    counter = -1
    seen_groups = set()
    for j in range(n + 1):
        if j in group_of:
            if group_of[j] not in seen_groups:
                seen_groups.add(group_of[j])
                counter += 1
            new_index[j] = counter
        else:
            counter += 1
            new_index[j] = counter

    new_n = counter
    new_m = [None] * (new_n + 1)
    new_deg = [1] * (new_n + 1)
    for j in range(n + 1):
        target = new_index[c.m[j]]
        k = new_index[j]
        if new_m[k] is not None and new_m[k] != target:
            raise CombinatoricsError(
                f"inconsistent merge: images of merged point {k} disagree"
            )
        new_m[k] = target
        new_deg[k] += c.local_degree[j] - 1
    return Combinatorics(tuple(new_m), tuple(new_deg))
