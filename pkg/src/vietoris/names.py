"""Enumeration names: replayable streams of Vietoris information.

An `UpperName` is a pure position-indexed stream of finite open rational
covers of a compact set (semicomputability: every emitted cover contains the
set, and covers eventually fit inside any finite ball-union neighborhood of
it).  A `LowerName` is a stream of open balls, each intersecting the set,
eventually listing every canonical dyadic ball that does (overtness).  A
`PairName` bundles upper names for a compact pair (X, A).

Streams are pure functions of their position (memoized), so every consumer
sees identical data on replay; all semideciders in this module are sound and
monotone in the `Budget`.

Names may carry structural metadata (`meta`): a subtraction trail, a
geometry tag, or a `local` fine-cover hook.  Metadata is only ever used to
ORDER search work (e.g. where to refine, which witnesses to try first);
every confirmation is re-derived through the public stream interface, so
wrong metadata can waste time but cannot produce an unsound answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .geometry import (
    Box,
    Cover,
    CubePoint,
    MAX_DIM,
    RationalBall,
    Verdict,
    ball_inside_ball,
    balls_disjoint,
    covered_semidecide,
    frac,
    metric_eval,
)

# -- budgets -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Budget:
    """Resource bound: how many stream items may be read and how deep
    subdivision may recurse.  Semideciders are monotone in both fields."""

    stream_items: int
    subdivision_depth: int

    def __post_init__(self) -> None:
        if self.stream_items < 0 or self.subdivision_depth < 0:
            raise ValueError("budget fields must be >= 0")

    def scaled(self, mult: int) -> "Budget":
        """A generously larger budget: stream items scale linearly, the
        subdivision depth grows by log2(mult) (depth cost is exponential)."""
        if mult < 1:
            raise ValueError("mult must be >= 1")
        return Budget(self.stream_items * mult,
                      self.subdivision_depth + (mult.bit_length() - 1))


# -- names ---------------------------------------------------------------------

class UpperName:
    """Replayable stream of covers; see module docstring for the contract."""

    def __init__(self, item_fn: Callable[[int], Cover], dim: int,
                 meta: Optional[Mapping] = None) -> None:
        if not 1 <= dim <= MAX_DIM:
            raise ValueError("bad dimension")
        self._fn = item_fn
        self._cache: dict[int, Cover] = {}
        self.dim = dim
        self.meta: dict = dict(meta or {})

    def cover_at(self, t: int) -> Cover:
        if t < 0:
            raise ValueError("stream position must be >= 0")
        c = self._cache.get(t)
        if c is None:
            c = self._fn(t)
            if not isinstance(c, Cover):
                c = Cover(tuple(c))
            for b in c.balls:
                if b.dim != self.dim:
                    raise ValueError("cover dimension mismatch")
            self._cache[t] = c
        return c

    def covers(self, budget: Budget) -> Iterable[Cover]:
        for t in range(budget.stream_items):
            yield self.cover_at(t)

    def local_balls(self, stage: int, region: RationalBall) -> Optional[tuple[RationalBall, ...]]:
        """Fine-cover spatial query, if the producer supports one: the balls
        of a sound stage-`stage` cover whose closures meet `region`.  Returns
        None when unsupported."""
        hook = self.meta.get("local")
        if hook is None:
            return None
        return tuple(hook(stage, region))


class LowerName:
    """Replayable stream of open balls, each intersecting the set."""

    def __init__(self, item_fn: Callable[[int], RationalBall], dim: int,
                 meta: Optional[Mapping] = None) -> None:
        if not 1 <= dim <= MAX_DIM:
            raise ValueError("bad dimension")
        self._fn = item_fn
        self._cache: dict[int, RationalBall] = {}
        self.dim = dim
        self.meta: dict = dict(meta or {})

    def ball_at(self, t: int) -> RationalBall:
        if t < 0:
            raise ValueError("stream position must be >= 0")
        b = self._cache.get(t)
        if b is None:
            b = self._fn(t)
            self._cache[t] = b
        return b

    def balls(self, budget: Budget) -> list[RationalBall]:
        return [self.ball_at(t) for t in range(budget.stream_items)]


@dataclass(frozen=True)
class PairName:
    """Upper-name information for a compact pair (X, A), A subset of X."""

    upper_x: UpperName
    upper_a: UpperName

    def __post_init__(self) -> None:
        if self.upper_x.dim != self.upper_a.dim:
            raise ValueError("pair dimension mismatch")

    @property
    def dim(self) -> int:
        return self.upper_x.dim


def upper_from_list(covers: Sequence[Cover | Sequence[RationalBall]], dim: int,
                    meta: Optional[Mapping] = None) -> UpperName:
    """Upper name from a finite schedule; the last cover repeats forever."""
    fixed = [c if isinstance(c, Cover) else Cover(tuple(c)) for c in covers]
    if not fixed:
        raise ValueError("need at least one cover")
    return UpperName(lambda t: fixed[min(t, len(fixed) - 1)], dim, meta)


def empty_upper(dim: int) -> UpperName:
    """Upper name of the empty set: the empty cover at every position."""
    return UpperName(lambda t: Cover(()), dim, {"kind": "empty"})


# -- spatial index --------------------------------------------------------------

_SCALE = 1 << 14


class BallIndex:
    """Bucketed index over a fixed ball list for near-neighbor candidate
    queries.  Buckets use integer-floored axis-0 coordinates; the exact
    predicates are always re-checked by callers, the index only prunes."""

    __slots__ = ("balls", "_buckets", "_rmax", "_width")

    def __init__(self, balls: Sequence[RationalBall]) -> None:
        self.balls = tuple(balls)
        self._rmax = max((b.radius for b in self.balls), default=Fraction(0))
        # bucket width ~ the largest radius, floored to a power of two >= 1/256
        w = max(self._rmax, Fraction(1, 256))
        width = Fraction(1, 256)
        while width < w:
            width *= 2
        self._width = width
        self._buckets: dict[int, list[int]] = {}
        for i, b in enumerate(self.balls):
            self._buckets.setdefault(int(b.center.coords[0] / width), []).append(i)

    def near(self, center: CubePoint, reach: Fraction) -> list[RationalBall]:
        """All balls whose center's axis-0 distance to `center` can be within
        `reach + that ball's radius` (superset of the metrically-near set),
        closest-first so containment fast paths hit early.  The float sort
        key only orders candidates; every caller re-checks exactly."""
        if not self.balls:
            return []
        cf = [float(x) for x in center.coords]
        c0 = center.coords[0]
        lo = int((c0 - reach - self._rmax) / self._width) - 1
        hi = int((c0 + reach + self._rmax) / self._width) + 1
        out = []
        for k in range(lo, hi + 1):
            for i in self._buckets.get(k, ()):
                out.append(self.balls[i])
        if len(out) > 3:
            out.sort(key=lambda b: (sum(abs(float(x) - y) * 0.5 ** j
                                        for j, (x, y) in enumerate(zip(b.center.coords, cf))),
                                    b.center.coords))
        return out


def ball_inside_union_indexed(b: RationalBall, idx: BallIndex, depth: int) -> Verdict:
    """Closure of `b` inside the union of the indexed balls (sound)."""
    closed = b.closure()
    cands = idx.near(b.center, b.radius)
    nearby = []
    for u in cands:
        d = metric_eval(closed.center, u.center)
        if d + closed.radius < u.radius:
            return Verdict.CONFIRMED
        if d <= closed.radius + u.radius:
            nearby.append(u)
    if not nearby:
        return Verdict.UNKNOWN
    return covered_semidecide(closed, Cover(tuple(nearby)), depth)


# -- semideciders -----------------------------------------------------------------

def subset_semidecide(k: UpperName, u: Cover, b: Budget) -> Verdict:
    """Semidecide K subset-of union(u) from the upper name `k`.

    Confirms when some emitted cover has every ball's closure inside the
    union (per-ball `covered_semidecide` at the budget's depth).  Sound
    because every cover contains K; complete in the budget limit whenever
    the closed inflation of some cover fits in u (upper-name completeness).
    """
    idx = BallIndex(u.balls)
    # try the finest affordable stage first (coarse covers rarely fit);
    # the tried set still grows with the budget, so monotonicity holds
    for t in range(b.stream_items - 1, -1, -1):
        c = k.cover_at(t)
        ok = True
        for cb in c.balls:
            if ball_inside_union_indexed(cb, idx, b.subdivision_depth) is not Verdict.CONFIRMED:
                ok = False
                break
        if ok:
            return Verdict.CONFIRMED
    return Verdict.UNKNOWN


def disjoint_closed_semidecide(k: UpperName, b_ball: RationalBall, b: Budget) -> Verdict:
    """Semidecide closure(K) disjoint from closure(b_ball): some emitted
    cover lies ball-wise in the closed complement of b_ball (every cover
    ball's closure misses b_ball's closure)."""
    target = b_ball.closure()
    for t in range(b.stream_items - 1, -1, -1):
        c = k.cover_at(t)
        if all(balls_disjoint(cb, target) for cb in c.balls):
            return Verdict.CONFIRMED
    return Verdict.UNKNOWN


def meets_every_cover(k: UpperName, b_ball: RationalBall, b: Budget) -> bool:
    """Necessary-condition probe (NOT a semidecider): b_ball's closure meets
    every affordable cover's union.  Used only to prune hopeless work."""
    target = b_ball.closure()
    for t in range(b.stream_items):
        c = k.cover_at(t)
        if all(balls_disjoint(cb, target) for cb in c.balls):
            return False
    return True


# -- transducers -------------------------------------------------------------------

_RING_EXTRA = 4  # extra stages of refinement around a subtracted boundary


def subtract(k: UpperName, u: RationalBall) -> UpperName:
    """Upper name of K minus u (u an open ball).

    Realized by filtering each emitted cover: a ball is dropped exactly when
    its closure lies inside u.  Kept balls still cover K\\u (a ball containing
    a point outside u is never dropped), so soundness is inherited; in the
    limit the kept covers shrink onto closure(K\\u), because boundary-of-u
    points of K keep their (shrinking) covering balls.

    When the base name exposes a `local` fine-cover hook, covers are made
    ADAPTIVE: kept balls whose closure crosses the boundary sphere of u are
    replaced by the base name's finer balls near them (again filtered), so
    resolution concentrates where the subtraction creates new boundary.
    """
    if u.kind != "open":
        raise ValueError("subtract removes an open ball")
    if u.dim != k.dim:
        raise ValueError("dimension mismatch")

    def dropped(bb: RationalBall) -> bool:
        return metric_eval(bb.center, u.center) + bb.radius < u.radius

    def crosses_boundary(bb: RationalBall) -> bool:
        d = metric_eval(bb.center, u.center)
        return d - bb.radius <= u.radius and d + bb.radius >= u.radius

    base_local = k.meta.get("local")

    def item(t: int) -> Cover:
        out: list[RationalBall] = []
        seen: set = set()
        for bb in k.cover_at(t):
            if dropped(bb):
                continue
            if base_local is not None and crosses_boundary(bb) and t >= 2:
                fine = k.local_balls(t + _RING_EXTRA, bb.closure())
                added = False
                for fb in fine or ():
                    if dropped(fb):
                        continue
                    key = (fb.center.coords, fb.radius)
                    if key not in seen:
                        seen.add(key)
                        out.append(fb)
                    added = True
                if added or fine:
                    continue
            key = (bb.center.coords, bb.radius)
            if key not in seen:
                seen.add(key)
                out.append(bb)
        return Cover(tuple(out))

    meta = {
        "kind": "subtract",
        "base": k,
        "removed": tuple(k.meta.get("removed", ())) + (u,),
    }
    if "geom" in k.meta:
        meta["geom"] = k.meta["geom"]
    if base_local is not None:
        def local(stage: int, region: RationalBall):
            fine = k.local_balls(stage, region) or ()
            return tuple(fb for fb in fine if not dropped(fb))
        meta["local"] = local
    return UpperName(item, k.dim, meta)


def subtract_pair(p: PairName, u: RationalBall) -> PairName:
    return PairName(subtract(p.upper_x, u), subtract(p.upper_a, u))


def union_name(k1: UpperName, k2: UpperName) -> UpperName:
    """Upper name of the union of the two named sets (concatenated covers)."""
    if k1.dim != k2.dim:
        raise ValueError("dimension mismatch")
    def item(t: int) -> Cover:
        return Cover(tuple(k1.cover_at(t).balls) + tuple(k2.cover_at(t).balls))
    return UpperName(item, k1.dim, {"kind": "union", "parts": (k1, k2)})


def product(k1: UpperName, k2: UpperName) -> UpperName:
    """Upper name of the product set inside Q_{d1+d2}: the second factor's
    coordinates continue the weight sequence, so the ball around (c1, c2) of
    radius r1 + 2^-d1 * r2 contains B(c1,r1) x B(c2,r2) exactly."""
    d1, d2 = k1.dim, k2.dim
    if d1 + d2 > MAX_DIM:
        raise ValueError(f"product dimension {d1 + d2} exceeds {MAX_DIM}")
    shift = Fraction(1, 1 << d1)

    def item(t: int) -> Cover:
        out = []
        for b1 in k1.cover_at(t):
            for b2 in k2.cover_at(t):
                out.append(RationalBall(
                    CubePoint(b1.center.coords + b2.center.coords),
                    b1.radius + shift * b2.radius, "open"))
        return Cover(tuple(out))

    return UpperName(item, d1 + d2, {"kind": "product", "parts": (k1, k2)})


def slice_name(k: UpperName, value, *, prepend: bool = False) -> UpperName:
    """Upper name of K x {value} (or {value} x K with prepend=True).

    Appending the slice coordinate LAST leaves the factor's weights
    untouched, so radii carry over unchanged; prepending rescales by 1/2.
    """
    v = frac(value)
    if not 0 <= v <= 1:
        raise ValueError("slice value outside [0,1]")
    if k.dim + 1 > MAX_DIM:
        raise ValueError("slice exceeds max dimension")

    def item(t: int) -> Cover:
        out = []
        for b in k.cover_at(t):
            if prepend:
                out.append(RationalBall(CubePoint((v,) + b.center.coords),
                                        b.radius / 2, "open"))
            else:
                out.append(RationalBall(CubePoint(b.center.coords + (v,)),
                                        b.radius, "open"))
        return Cover(tuple(out))

    return UpperName(item, k.dim + 1, {"kind": "slice", "base": k})


def image_pl(k: UpperName, f) -> UpperName:
    """Upper name of f(K) for a PL map `f` (duck-typed: anything providing
    enclose_ball(ball, pieces_budget) -> iterable of sound image enclosures).
    Enclosures tighten with the stream position."""
    def item(t: int) -> Cover:
        out = []
        seen = set()
        for b in k.cover_at(t):
            for eb in f.enclose_ball(b, 2 + t):
                key = (eb.center.coords, eb.radius)
                if key not in seen:
                    seen.add(key)
                    out.append(eb)
        return Cover(tuple(out))
    return UpperName(item, f.codim, {"kind": "image", "base": k})


def sup_dist_semidecide(f, g, k: UpperName, q, b: Budget) -> Verdict:
    """Semidecide sup_{x in K} d(f(x), g(x)) < q from K's upper name.

    Confirms when some emitted cover has, for every ball, a certified upper
    bound below q (duck-typed f.pair_sup_below(g, ball, q, depth)).
    """
    q = frac(q)
    for t in range(b.stream_items - 1, -1, -1):
        c = k.cover_at(t)
        if all(f.pair_sup_below(g, cb, q, b.subdivision_depth) for cb in c.balls):
            return Verdict.CONFIRMED
    return Verdict.UNKNOWN


# -- the subtraction identity -----------------------------------------------------

def subset_after_subtract(k: UpperName, u: RationalBall, v: Cover, b: Budget) -> Verdict:
    """Semidecide K\\u subset-of union(v) via the subtraction identity
    K\\u ⊆ V  iff  K ⊆ u ∪ V — no subtracted name needed."""
    joined = Cover((RationalBall(u.center, u.radius, "open"),) + tuple(v.balls))
    return subset_semidecide(k, joined, b)


# -- log format --------------------------------------------------------------------

def _frac_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_ball(b: RationalBall) -> str:
    coords = ",".join(_frac_str(c) for c in b.center.coords)
    return f"{b.kind} {coords};{_frac_str(b.radius)}"


def format_cover(c: Cover) -> str:
    return " ".join(format_ball(b) for b in c.balls)


def parse_cover(line: str) -> Cover:
    toks = line.split()
    if len(toks) % 2:
        raise ValueError(f"malformed cover line: {line!r}")
    out = []
    for i in range(0, len(toks), 2):
        kind, body = toks[i], toks[i + 1]
        coords_s, _, r_s = body.partition(";")
        if not r_s:
            raise ValueError(f"malformed ball token: {body!r}")
        center = CubePoint(tuple(Fraction(c) for c in coords_s.split(",")))
        out.append(RationalBall(center, Fraction(r_s), kind))
    return Cover(tuple(out))


def log_upper(k: UpperName, items: int) -> str:
    """One emitted cover per line, in stream order."""
    return "\n".join(format_cover(k.cover_at(t)) for t in range(items))
