"""Exact geometry of the truncated cube Q_d = [0,1]^d, d <= 3.

The metric is the weighted sum d(x, y) = sum_i 2^-i |x_i - y_i|; every
quantity in this module is a `fractions.Fraction`, so all comparisons are
exact.  Rational balls in this metric are (scaled) cross-polytopes; we never
need their vertices, only distance tests against points and axis boxes,
which are coordinatewise exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Iterator, Sequence

MAX_DIM = 3

ZERO = Fraction(0)
ONE = Fraction(1)


class Verdict(Enum):
    """Outcome of a semidecision: a confirmation is final, `UNKNOWN` is not."""

    CONFIRMED = "confirmed"
    UNKNOWN = "unknown"


def weight(i: int) -> Fraction:
    return Fraction(1, 1 << i)


def frac(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions to Fraction."""
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, slots=True)
class CubePoint:
    coords: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.coords) <= MAX_DIM:
            raise ValueError(f"dimension must be 1..{MAX_DIM}, got {len(self.coords)}")
        for c in self.coords:
            if not isinstance(c, Fraction):
                raise TypeError("coordinates must be Fractions (use point())")
            if c < 0 or c > 1:
                raise ValueError(f"coordinate {c} outside [0,1]")

    @property
    def dim(self) -> int:
        return len(self.coords)


def point(*coords) -> CubePoint:
    return CubePoint(tuple(frac(c) for c in coords))


@dataclass(frozen=True, slots=True)
class RationalBall:
    center: CubePoint
    radius: Fraction
    kind: str = "open"

    def __post_init__(self) -> None:
        if self.kind not in ("open", "closed"):
            raise ValueError(f"kind must be 'open' or 'closed', got {self.kind!r}")
        if not isinstance(self.radius, Fraction):
            raise TypeError("radius must be a Fraction (use ball())")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.dim

    def closure(self) -> "RationalBall":
        return self if self.kind == "closed" else RationalBall(self.center, self.radius, "closed")

    def contains_point(self, p: CubePoint) -> bool:
        d = metric_eval(p, self.center)
        return d < self.radius if self.kind == "open" else d <= self.radius


def ball(center: CubePoint | Sequence, radius, kind: str = "open") -> RationalBall:
    if not isinstance(center, CubePoint):
        center = point(*center)
    return RationalBall(center, frac(radius), kind)


@dataclass(frozen=True, slots=True)
class Cover:
    """An ordered finite list of balls; empty only when covering the empty set."""

    balls: tuple[RationalBall, ...]

    def __post_init__(self) -> None:
        dims = {b.dim for b in self.balls}
        if len(dims) > 1:
            raise ValueError("mixed dimensions in cover")

    def __len__(self) -> int:
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)


def cover(balls) -> Cover:
    return Cover(tuple(balls))


# -- metric ------------------------------------------------------------------

def metric_eval(p: CubePoint, q: CubePoint) -> Fraction:
    if p.dim != q.dim:
        raise ValueError("dimension mismatch")
    a, b = p.coords, q.coords
    total = ZERO
    for i in range(len(a)):
        total += abs(a[i] - b[i]) / (1 << i)
    return total


def space_diameter(dim: int) -> Fraction:
    return sum((weight(i) for i in range(dim)), ZERO)


def balls_intersect(b1: RationalBall, b2: RationalBall) -> bool:
    """Open balls meet iff center distance < radius sum (the cube is convex)."""
    return metric_eval(b1.center, b2.center) < b1.radius + b2.radius


def balls_disjoint(b1: RationalBall, b2: RationalBall) -> bool:
    """Closure-disjointness: distance strictly exceeds the radius sum.

    Touching balls (distance == radius sum) share a boundary point and are
    NOT disjoint.
    """
    return metric_eval(b1.center, b2.center) > b1.radius + b2.radius


def ball_inside_ball(inner: RationalBall, outer: RationalBall) -> bool:
    """Closure of `inner` inside `outer` (strictly, when `outer` is open)."""
    d = metric_eval(inner.center, outer.center)
    if outer.kind == "open":
        return d + inner.radius < outer.radius
    return d + inner.radius <= outer.radius


def mesh(c: Cover) -> Fraction:
    """Formal mesh: max over balls of 2*radius (exact bookkeeping value)."""
    if not c.balls:
        raise ValueError("mesh of an empty cover is undefined")
    return max(2 * b.radius for b in c.balls)


def neighborhood(c: Cover, eps) -> Cover:
    """Inflate every ball's radius by eps (> 0), producing open balls.

    mesh(neighborhood(c, eps)) == mesh(c) + 2*eps holds exactly.
    """
    e = frac(eps)
    if e <= 0:
        raise ValueError("eps must be positive")
    return Cover(tuple(RationalBall(b.center, b.radius + e, "open") for b in c.balls))


# -- axis boxes ---------------------------------------------------------------

Box = tuple[tuple[Fraction, Fraction], ...]


def box_of_ball(b: RationalBall) -> Box:
    """Bounding box of the ball, clipped to the cube."""
    out = []
    for i, c in enumerate(b.center.coords):
        ext = b.radius * (1 << i)
        out.append((max(ZERO, c - ext), min(ONE, c + ext)))
    return tuple(out)


def box_dist_min(box: Box, p: CubePoint) -> Fraction:
    total = ZERO
    for i, (lo, hi) in enumerate(box):
        c = p.coords[i]
        if c < lo:
            total += (lo - c) / (1 << i)
        elif c > hi:
            total += (c - hi) / (1 << i)
    return total


def box_dist_max(box: Box, p: CubePoint) -> Fraction:
    total = ZERO
    for i, (lo, hi) in enumerate(box):
        c = p.coords[i]
        total += max(c - lo, hi - c) / (1 << i)
    return total


def box_center(box: Box) -> CubePoint:
    return CubePoint(tuple((lo + hi) / 2 for lo, hi in box))


def box_circumball(box: Box) -> RationalBall:
    """Smallest closed metric ball around the box's center containing the box."""
    c = box_center(box)
    return RationalBall(c, box_dist_max(box, c), "closed")


def split_box(box: Box) -> list[Box]:
    """Halve every axis; 2^d children in deterministic lexicographic order."""
    halves = []
    for lo, hi in box:
        mid = (lo + hi) / 2
        halves.append(((lo, mid), (mid, hi)))
    return [tuple(choice) for choice in iproduct(*halves)]


def boxes_for_grid(dim: int, k: int) -> Iterator[tuple[tuple[int, ...], Box]]:
    """All 2^k-per-axis grid cells of the cube, with their multi-indices."""
    n = 1 << k
    side = Fraction(1, n)
    for idx in iproduct(range(n), repeat=dim):
        yield idx, tuple((i * side, (i + 1) * side) for i in idx)


# -- covering semidecider ------------------------------------------------------

def covered_semidecide(target: RationalBall, c: Cover, depth_budget: int) -> Verdict:
    """Semidecide: closed ball `target` is covered by the union of `c`.

    Recursive dyadic subdivision of the target's bounding box; a cell is
    discharged when it lies inside a single cover ball or entirely outside
    the target.  Exactly-touching instances may remain UNKNOWN forever.
    Confirmations are sound and monotone in `depth_budget`.
    """
    if target.kind != "closed":
        raise ValueError("target must be a closed ball")
    if depth_budget < 0:
        raise ValueError("depth_budget must be >= 0")
    balls = [(b.center, b.radius, b.kind == "open") for b in c.balls]
    if not balls:
        return Verdict.UNKNOWN
    stack = [(box_of_ball(target), 0)]
    while stack:
        box, depth = stack.pop()
        if box_dist_min(box, target.center) > target.radius:
            continue  # outside the target
        inside = False
        touchable = False
        for ctr, rad, is_open in balls:
            if box_dist_min(box, ctr) > rad:
                continue  # this ball cannot even touch the box
            touchable = True
            dmax = box_dist_max(box, ctr)
            if dmax < rad or (not is_open and dmax == rad):
                inside = True
                break
        if inside:
            continue
        if not touchable:
            # the box meets the target but is strictly outside every cover
            # ball: an uncovered target point certainly exists, so no amount
            # of further subdivision can confirm
            return Verdict.UNKNOWN
        if depth >= depth_budget:
            return Verdict.UNKNOWN
        stack.extend((child, depth + 1) for child in split_box(box))
    return Verdict.CONFIRMED


def ball_inside_union(b: RationalBall, c: Cover, depth_budget: int) -> Verdict:
    """Closure of `b` inside the union of `c` (single-ball fast path first)."""
    closed = b.closure()
    for u in c.balls:
        if ball_inside_ball(closed, u):
            return Verdict.CONFIRMED
    return covered_semidecide(closed, c, depth_budget)


# -- dyadic utilities ----------------------------------------------------------

def v2(n: int) -> int:
    """2-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("v2(0) undefined")
    return (n & -n).bit_length() - 1


def dyadic_depth(x: Fraction) -> int:
    """Exponent k of the reduced denominator 2^k; raises if not dyadic."""
    den = x.denominator
    if den & (den - 1):
        raise ValueError(f"{x} is not dyadic")
    return den.bit_length() - 1


def is_dyadic(x: Fraction) -> bool:
    return x.denominator & (x.denominator - 1) == 0


def snap_dyadic(x: Fraction, order: int) -> Fraction:
    """Nearest multiple of 2^-order inside [0,1] (ties round up), exact."""
    scaled = x * (1 << order)
    n = (scaled.numerator * 2 + scaled.denominator) // (2 * scaled.denominator)
    n = min(max(n, 0), 1 << order)
    return Fraction(n, 1 << order)


def snap_point(p: CubePoint, order: int) -> CubePoint:
    return CubePoint(tuple(snap_dyadic(c, order) for c in p.coords))


def ball_depth(b: RationalBall) -> int:
    """Canonical dyadic depth: max of center-coordinate and radius depths."""
    d = dyadic_depth(b.radius)
    for c in b.center.coords:
        d = max(d, dyadic_depth(c))
    return d


def canonical_key(b: RationalBall):
    """Sort key realizing the canonical order (depth, lex center, radius)."""
    center_depth = max(dyadic_depth(c) for c in b.center.coords)
    return (ball_depth(b), center_depth, b.center.coords, b.radius)


def _dyadics_of_depth_leq(depth: int) -> list[Fraction]:
    n = 1 << depth
    return [Fraction(k, n) for k in range(n + 1)]


def iter_canonical_stage(dim: int, stage: int) -> Iterator[RationalBall]:
    """All open balls of canonical depth exactly `stage`, canonically ordered.

    Order within the stage is (center depth, lex center, radius); the
    generator produces it directly without materializing the stage.
    """
    n = 1 << stage
    full_radii = [Fraction(m, n) for m in range(1, n + 1)]
    odd_radii = [Fraction(m, n) for m in range(1, n + 1, 2)]
    for cdepth in range(stage + 1):
        axis = _dyadics_of_depth_leq(cdepth)
        for coords in iproduct(axis, repeat=dim):
            if max(dyadic_depth(c) for c in coords) != cdepth:
                continue
            center = CubePoint(coords)
            # ball depth must equal `stage`: if the center already has depth
            # `stage` any radius of depth <= stage works, otherwise the radius
            # itself must have depth exactly `stage` (odd numerator).
            radii = full_radii if cdepth == stage else odd_radii
            for r in radii:
                yield RationalBall(center, r, "open")


@lru_cache(maxsize=8)
def canonical_stage(dim: int, stage: int) -> tuple[RationalBall, ...]:
    """Materialized stage (small stages only; deep stages get very large)."""
    return tuple(iter_canonical_stage(dim, stage))


def canonical_balls(dim: int) -> Iterator[RationalBall]:
    """Fair total enumeration of all dyadic open balls, stage by stage."""
    stage = 0
    while True:
        yield from iter_canonical_stage(dim, stage)
        stage += 1
