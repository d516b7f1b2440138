"""Curated ground-truth sets: exact membership oracles plus canonical names.

Each entry bundles three independent descriptions of one compact set:

* an exact margin oracle answering, for a rational point p and margin q > 0,
  whether the closed weighted ball B(p, q) lies inside the set, misses it
  entirely, or straddles its boundary — backed by `dist_cmp`, the exact sign
  of dist(p, X) - q;
* a canonical upper name whose covers are sound by construction (and whose
  cover balls all meet the set — centers are chosen on the set or certified
  within the radius of it);
* a canonical lower name: the round dyadic balls meeting the set, filtered
  through the oracle, breadth first.

Algebraic sets (arc, circle, disk, square, comb) get closed-form rational or
quadratic-radical comparisons.  Sets with transcendental boundary data (sine
curve, Warsaw circle, saucer) answer through verified rational enclosures of
sin refined on demand; a query whose answer ties exactly with the margin
cannot terminate and raises RuntimeError at the refinement cap instead of
guessing.

The module also provides the adversarial/limit constructions used by the
test batteries (`rc_interval_name`, `comb_adversary`, `apply_deformation`)
and `certificate_for`, which wires each reconstructible set to the
minimality certificate its reconstruction runs under.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from typing import Callable, Iterator, Optional, Sequence

from .geometry import Cover, CubePoint, RationalBall, frac, snap_dyadic, snap_point
from .homotopy import (
    PLMap,
    _s1_ring,
    en_piece,
    make_anr,
    pl_identity,
    rho,
    sqrt_bounds,
)
from .invariants import (
    Decision,
    PiPiece,
    marked_removed_confirm,
    not_quasichainable_family,
    separation_confirm,
)
from .names import Budget, LowerName, PairName, UpperName, empty_upper, image_pl
from .reconstruct import Certificate, lattice_balls

F = Fraction
ZERO = F(0)
ONE = F(1)
HALF = F(1, 2)
QUARTER = F(1, 4)

INSIDE_BY_Q = "inside_by_q"
OUTSIDE_BY_Q = "outside_by_q"
BOUNDARY_WITHIN_Q = "boundary_within_q"

KINDS = ("circle", "arc_pair", "disk_pair", "square_pair", "warsaw_circle",
         "sine_curve", "saucer_pair", "comb_pair", "empty")

# largest stream position at which canonical covers keep refining; beyond it
# they repeat (they are already far finer than any budgeted query resolves)
_RING = _s1_ring()
_RING_GAP = F(3195, 3616)   # exact over-estimate of (max weighted half-gap) * M
                            # for every subsample of the 512-point ring used here


# -- the bundle ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GroundTruthSet:
    """One curated compact set: symbolic kind, exact oracles, canonical names.

    `dist_cmp(p, q)` is the exact sign of dist_w(p, X) - q.
    `membership_margin_oracle(p, q)` returns one of the three verdict strings
    for q > 0.  `canonical_pair` carries the associated closed subpair when
    the set is studied as a pair (the second name is empty otherwise)."""

    kind: str
    dimension: int
    description: str
    dist_cmp: Callable[[CubePoint, Fraction], int]
    membership_margin_oracle: Callable[[CubePoint, Fraction], str]
    canonical_upper: UpperName
    canonical_lower: LowerName
    canonical_pair: PairName
    marked_points: Optional[tuple[CubePoint, ...]] = None


def _margin_oracle(dist_cmp, inside_test=None):
    def oracle(p: CubePoint, q) -> str:
        q = frac(q)
        if q <= 0:
            raise ValueError("margin must be positive")
        if dist_cmp(p, q) > 0:
            return OUTSIDE_BY_Q
        if inside_test is not None and inside_test(p, q):
            return INSIDE_BY_Q
        return BOUNDARY_WITHIN_Q
    return oracle


def _oracle_lower(dim: int, dist_cmp) -> LowerName:
    """Breadth-first round dyadic balls whose open ball meets the set: the
    canonical lower name, certified ball by ball through the exact oracle."""
    def gen() -> Iterator[RationalBall]:
        lv = 0
        while True:
            for u in lattice_balls(dim, lv):
                if dist_cmp(u.center, u.radius) < 0:
                    yield u
            lv += 1

    emitted: list[RationalBall] = []
    src = gen()

    def item(t: int) -> RationalBall:
        while len(emitted) <= t:
            emitted.append(next(src))
        return emitted[t]

    return LowerName(item, dim, {"kind": "canonical"})


# -- exact quadratic-radical comparisons --------------------------------------------

def _cmp_sqrt(s: Fraction, x: Fraction) -> int:
    """sign(sqrt(s) - x) for rational s >= 0."""
    if x < 0:
        return 1
    d = s - x * x
    return (d > 0) - (d < 0)


def _cmp_abs_sqrt(a: Fraction, s: Fraction, r: Fraction) -> int:
    """sign(|a - sqrt(s)| - r) for rationals a, r >= 0, s >= 0."""
    hi = _cmp_sqrt(s, a + r)
    if hi > 0:
        return 1
    lo = _cmp_sqrt(s, a - r)
    if lo < 0:
        return 1
    if hi == 0 or lo == 0:
        return 0
    return -1


def _cmp_lin_sqrt(A: Fraction, B: Fraction, s: Fraction, q: Fraction) -> int:
    """sign(A + B*sqrt(s) - q) for rationals with s >= 0."""
    t = q - A
    if B == 0:
        return (0 > t) - (0 < t)
    if B > 0:
        if t < 0:
            return 1
        d = B * B * s - t * t
    else:
        if t > 0:
            return -1
        if t == 0:
            return -1
        d = t * t - B * B * s
    return (d > 0) - (d < 0)


def _iv_abs_sqrt(a: Fraction, s: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of |a - sqrt(s)|."""
    lo, hi = sqrt_bounds(s, prec)
    if a <= lo:
        return lo - a, hi - a
    if a >= hi:
        return a - hi, a - lo
    return ZERO, max(a - lo, hi - a)


# -- circle / disk: exact weighted distance to a circle ------------------------------

def _circle_candidates(u: Fraction, v: Fraction, rho: Fraction):
    """The finitely many circle parameters that can realize
    min_theta |u - rho*cos| + |v - rho*sin|/2 for u, v >= 0: the two axis
    points, the stationary direction (2, 1)/sqrt(5), and the kinks where the
    circle crosses the vertical/horizontal lines through the point.  Each
    candidate yields (kind, payload); all are genuine circle points, so each
    value bounds the distance from above and the minimum is exact."""
    cands = [("rat", abs(u - rho) + v / 2), ("rat", u + abs(v - rho) / 2)]
    s1 = 1 if 5 * u * u >= 4 * rho * rho else -1
    s2 = 1 if 5 * v * v >= rho * rho else -1
    A = s1 * u + s2 * v / 2
    B = -(2 * s1 + F(s2, 2)) * rho / 5
    cands.append(("lin5", (A, B)))
    if u <= rho:
        cands.append(("kinku", rho * rho - u * u))
    if v <= rho:
        cands.append(("kinkv", rho * rho - v * v))
    return cands


def _circle_dist_cmp(center: Sequence[Fraction], rho: Fraction,
                     p: CubePoint, q: Fraction) -> int:
    """Exact sign(dist_w(p, circle) - q)."""
    u = abs(p.coords[0] - center[0])
    v = abs(p.coords[1] - center[1])
    signs = []
    for kind, pay in _circle_candidates(u, v, rho):
        if kind == "rat":
            d = pay - q
            signs.append((d > 0) - (d < 0))
        elif kind == "lin5":
            A, B = pay
            signs.append(_cmp_lin_sqrt(A, B, F(5), q))
        elif kind == "kinku":
            signs.append(_cmp_abs_sqrt(v, pay, 2 * q))
        else:
            signs.append(_cmp_abs_sqrt(u, pay, q))
    if any(s < 0 for s in signs):
        return -1
    if all(s > 0 for s in signs):
        return 1
    return 0


def _circle_dist_iv(center: Sequence[Fraction], rho: Fraction,
                    pxy: Sequence[Fraction], prec: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of dist_w(p, circle), width -> 0 with prec."""
    u = abs(pxy[0] - center[0])
    v = abs(pxy[1] - center[1])
    los, his = [], []
    for kind, pay in _circle_candidates(u, v, rho):
        if kind == "rat":
            los.append(pay)
            his.append(pay)
        elif kind == "lin5":
            A, B = pay
            slo, shi = sqrt_bounds(F(5), prec)
            vals = (A + B * slo, A + B * shi)
            los.append(min(vals))
            his.append(max(vals))
        elif kind == "kinku":
            lo, hi = _iv_abs_sqrt(v, pay, prec)
            los.append(lo / 2)
            his.append(hi / 2)
        else:
            lo, hi = _iv_abs_sqrt(u, pay, prec)
            los.append(lo)
            his.append(hi)
    return max(ZERO, min(los)), min(his)


# -- verified sin enclosures ---------------------------------------------------------

_PREC_CAP = 224


@lru_cache(maxsize=None)
def _atan_inv_bounds(inv: int, prec: int) -> tuple[Fraction, Fraction]:
    """Bracket arctan(1/inv) within 2^-prec (alternating odd series)."""
    x = F(1, inv)
    tol = F(1, 1 << prec)
    x2 = x * x
    term = x
    total = ZERO
    k = 0
    while True:
        total += term if k % 2 == 0 else -term
        k += 1
        term = term * x2 * (2 * k - 1) / (2 * k + 1)
        if term <= tol:
            break
    return total - term, total + term


@lru_cache(maxsize=None)
def pi_bounds(prec: int) -> tuple[Fraction, Fraction]:
    """Machin's formula: pi = 16*arctan(1/5) - 4*arctan(1/239), exact bracket."""
    a5 = _atan_inv_bounds(5, prec + 6)
    a239 = _atan_inv_bounds(239, prec + 6)
    return 16 * a5[0] - 4 * a239[1], 16 * a5[1] - 4 * a239[0]


def _sin_taylor(a: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclose sin(a) for |a| <= 4 via the Maclaurin series; the tail is
    bounded by a ratio-1/2 geometric series once terms shrink."""
    tol = F(1, 1 << (prec + 2))
    a2 = a * a
    term = a
    total = ZERO
    k = 0
    while True:
        total += term
        k += 1
        term = -term * a2 / ((2 * k) * (2 * k + 1))
        if 2 * abs(term) <= tol and (2 * k) * (2 * k + 1) >= 2 * a2:
            break
        if k > 300:
            raise RuntimeError("sin series failed to converge")
    err = 2 * abs(term)
    return total - err, total + err


def _dyadic_floor(x: Fraction, depth: int) -> Fraction:
    d = 1 << depth
    return F((x * d).numerator // (x * d).denominator, d)


def sin_bounds(x, prec: int) -> tuple[Fraction, Fraction]:
    """Sound rational enclosure of sin(x) for any rational x, width about
    2^-prec: range-reduce by a pi enclosure, round dyadically, sum the series
    at the midpoint, and widen by the Lipschitz-1 interval radius."""
    if prec > _PREC_CAP:
        raise RuntimeError("enclosure refinement exhausted")
    x = frac(x)
    neg = x < 0
    if neg:
        x = -x
    if x > 3:
        extra = (x.numerator // x.denominator).bit_length() + 4
        plo, phi = pi_bounds(prec + extra)
        k = int(x / (plo + phi) + HALF)
        r_lo, r_hi = x - k * 2 * phi, x - k * 2 * plo
    else:
        r_lo = r_hi = x
    depth = prec + 8
    r_lo = _dyadic_floor(r_lo, depth)
    r_hi = -_dyadic_floor(-r_hi, depth)
    m = (r_lo + r_hi) / 2
    slo, shi = _sin_taylor(m, prec)
    half = (r_hi - r_lo) / 2
    lo, hi = max(-ONE, slo - half), min(ONE, shi + half)
    if neg:
        lo, hi = -hi, -lo
    return lo, hi


def shat_bounds(x: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of (sin(1/x) + 1)/2 for rational x in (0, 1]."""
    lo, hi = sin_bounds(1 / frac(x), prec)
    return (lo + 1) / 2, (hi + 1) / 2


def _shat_range(a: Fraction, b: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of (sin(1/x)+1)/2 over x in [a, b], 0 < a <= b (Lipschitz-1
    in the reciprocal argument, clipped to the trivial range)."""
    w = 1 / a - 1 / b
    if w >= 7:
        return ZERO, ONE
    slo, shi = sin_bounds((1 / a + 1 / b) / 2, prec)
    lo = max(-ONE, slo - w / 2)
    hi = min(ONE, shi + w / 2)
    return (lo + 1) / 2, (hi + 1) / 2


# -- adaptive graph pieces for the oscillating curve ---------------------------------

@lru_cache(maxsize=64)
def _graph_pieces(cap: int, prec: int) -> tuple[tuple[Fraction, Fraction, Fraction, Fraction], ...]:
    """Adaptive cover of the graph x -> (sin(1/x)+1)/2 over (0, 1] by boxes
    (a, b, zlo, zhi): repeatedly halve the piece with the largest weighted box
    circumradius until `cap` pieces.  The piece at the axis keeps the full
    height range (the curve sweeps every height on the way in), so splitting
    there stalls into a thin blanket that also covers the limit segment."""
    def enclosure(a: Fraction, b: Fraction) -> tuple[Fraction, Fraction]:
        if a == 0:
            return ZERO, ONE
        return _shat_range(a, b, prec)

    def entry(a: Fraction, b: Fraction):
        zlo, zhi = enclosure(a, b)
        r = (b - a) / 2 + (zhi - zlo) / 4
        return (-r, a, b, zlo, zhi)

    heap = [entry(ZERO, ONE)]
    while len(heap) < cap:
        _, a, b, _, _ = heapq.heappop(heap)
        m = (a + b) / 2
        heapq.heappush(heap, entry(a, m))
        heapq.heappush(heap, entry(m, b))
    return tuple(sorted((a, b, zlo, zhi) for _, a, b, zlo, zhi in heap))


def _graph_balls(t: int) -> list[RationalBall]:
    """Open balls covering the oscillating graph (blanket included), centers
    certified to meet it."""
    cap = min(1 << (t + 3), 384)
    out = []
    for a, b, zlo, zhi in _graph_pieces(cap, t + 10):
        center = CubePoint(((a + b) / 2, (zlo + zhi) / 2))
        r = (b - a) / 2 + (zhi - zlo) / 4 + F(1, 1 << (t + 8))
        out.append(RationalBall(center, r, "open"))
    return out


def _segment_balls(axis_value: Fraction, lo: Fraction, hi: Fraction, n: int,
                   vertical: bool, pad: Fraction = ZERO) -> list[RationalBall]:
    """Balls along a horizontal or vertical segment, centers on the segment.
    `pad` extends the covered range beyond `hi` (for enclosure slack)."""
    span = hi - lo
    weight = F(1, 2) if vertical else ONE
    step = span / n if n else ZERO
    r = F(5, 8) * step * weight + pad if n else span * weight + pad + F(1, 64)
    out = []
    for k in range(n + 1):
        y = lo + step * k
        coords = (axis_value, y) if vertical else (y, axis_value)
        out.append(RationalBall(CubePoint(coords), r, "open"))
    return out


# -- generic interval-refined distance comparison ------------------------------------

def _cmp_from_interval(dist_iv):
    def dist_cmp(p: CubePoint, q) -> int:
        q = frac(q)
        for prec in (16, 24, 32, 48, 64, 96, 128, 192):
            lo, hi = dist_iv(p, prec)
            if lo > q:
                return 1
            if hi < q:
                return -1
            if lo == hi == q:
                return 0
        raise RuntimeError("distance query tied with the margin beyond the refinement cap")
    return dist_cmp


def _bnb(exact_upper: Fraction, seeds, lb_fn, ub_fn, split_fn, prec: int,
         rounds: int = 500) -> tuple[Fraction, Fraction]:
    """Generic branch-and-bound enclosure of a minimum distance: `seeds` are
    region descriptors, lb/ub bound the distance over a region, split refines
    one region into several.  Sound at any stopping point."""
    tol = F(1, 1 << prec)
    best = exact_upper
    heap = []
    for sd in seeds:
        lb = lb_fn(sd)
        if lb < best:
            best = min(best, ub_fn(sd))
            heapq.heappush(heap, (lb, sd))
    for _ in range(rounds + 8 * prec):
        if not heap:
            return best, best
        lb, sd = heap[0]
        if lb >= best:
            heapq.heappop(heap)
            continue
        if best - lb <= tol:
            break
        heapq.heappop(heap)
        for child in split_fn(sd):
            clb = lb_fn(child)
            if clb < best:
                best = min(best, ub_fn(child))
                heapq.heappush(heap, (clb, child))
    glb = min([best] + [item[0] for item in heap])
    return max(ZERO, glb), best


# -- sine curve ([closure of the oscillating graph]) ---------------------------------

def _graph_dist_iv(px: Fraction, py: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclose dist_w((px,py), graph-with-limit-segment)."""
    exact = px  # the limit segment {0} x [0, 1]; py is already in [0, 1]

    def lb(sd):
        a, b, zlo, zhi = sd
        dx = max(ZERO, a - px, px - b)
        dz = max(ZERO, zlo - py, py - zhi)
        return dx + dz / 2

    def ub(sd):
        a, b, zlo, zhi = sd
        if a == 0:
            return abs(px - b) + HALF / 2
        m = (a + b) / 2
        zl, zh = _shat_range(m, m, prec)
        return abs(px - m) + (abs(py - (zl + zh) / 2) + (zh - zl) / 2) / 2

    def split(sd):
        a, b, _, _ = sd
        m = (a + b) / 2
        out = []
        for aa, bb in ((a, m), (m, b)):
            if aa == 0:
                out.append((aa, bb, ZERO, ONE))
            else:
                zlo, zhi = _shat_range(aa, bb, prec + 4)
                out.append((aa, bb, zlo, zhi))
        return out

    seeds = [(ZERO, ONE, ZERO, ONE)]
    return _bnb(exact, seeds, lb, ub, split, prec)


def _sine_dist_iv(p: CubePoint, prec: int) -> tuple[Fraction, Fraction]:
    return _graph_dist_iv(p.coords[0], p.coords[1], prec)


def _sine_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t + 2, 8)
        balls = _segment_balls(ZERO, ZERO, ONE, n, vertical=True)
        balls.extend(_graph_balls(t))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "sine_curve"})


# -- Warsaw circle -------------------------------------------------------------------

def _shat1_bounds(prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of the closing height (sin(1)+1)/2."""
    return shat_bounds(ONE, prec)


def _warsaw_dist_iv(p: CubePoint, prec: int) -> tuple[Fraction, Fraction]:
    px, py = p.coords
    glo, ghi = _graph_dist_iv(px, py, prec)
    cands_lo = [glo, py / 2]          # bottom edge [0,1] x {0}
    cands_hi = [ghi, py / 2]
    hlo, hhi = _shat1_bounds(prec + 2)
    over_lo = max(ZERO, py - hhi)
    over_hi = max(ZERO, py - hlo)
    cands_lo.append((ONE - px) + over_lo / 2)
    cands_hi.append((ONE - px) + over_hi / 2)
    return min(cands_lo), min(cands_hi)


def _warsaw_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t + 2, 8)
        balls = _segment_balls(ZERO, ZERO, ONE, n, vertical=True)
        balls.extend(_segment_balls(ZERO, ZERO, ONE, n, vertical=False))
        hlo, hhi = _shat1_bounds(t + 8)
        balls.extend(_segment_balls(ONE, ZERO, hlo, n, vertical=True,
                                    pad=(hhi - hlo) / 2 + F(1, 1 << (t + 8))))
        balls.extend(_graph_balls(t))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "warsaw_circle"})


# -- saucer (revolved oscillating profile, dim 3) ------------------------------------

_SAUCER_RIM = HALF          # planar radius of the rim circle
_CENTER2 = (HALF, HALF)


def _scaled_ring(rho: Fraction, step: int) -> list[tuple[Fraction, Fraction]]:
    """Every step-th of the 512 exact circle points, scaled to radius rho."""
    lam = 4 * rho
    out = []
    for i in range(0, 512, step):
        pt = _RING[i]
        out.append((HALF + lam * (pt.coords[0] - HALF),
                    HALF + lam * (pt.coords[1] - HALF)))
    return out


def _saucer_profile(cap: int, prec: int):
    """Profile pieces (r1, r2, zlo, zhi) over planar radius r in [0, 1/2]."""
    return tuple((a / 2, b / 2, zlo, zhi) for a, b, zlo, zhi in _graph_pieces(cap, prec))


def _planar_annulus_iv(pxy, r1: Fraction, r2: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Enclosure of the weighted planar distance to the annulus r1<=|z-c|<=r2
    (nearest point lies on the nearer bounding circle, by norm convexity)."""
    dx = pxy[0] - HALF
    dy = pxy[1] - HALF
    e2 = dx * dx + dy * dy
    if r1 * r1 <= e2 <= r2 * r2:
        return ZERO, ZERO
    rr = r1 if e2 < r1 * r1 else r2
    if rr == 0:
        w = abs(dx) + abs(dy) / 2
        return w, w
    return _circle_dist_iv(_CENTER2, rr, pxy, prec)


def _saucer_dist_iv(p: CubePoint, prec: int) -> tuple[Fraction, Fraction]:
    px, py, pz = p.coords
    seg = abs(px - HALF) + abs(py - HALF) / 2   # the limit segment on the axis

    def lb(sd):
        r1, r2, zlo, zhi = sd
        plo, _ = _planar_annulus_iv((px, py), r1, r2, prec)
        return plo + max(ZERO, zlo - pz, pz - zhi) / 4

    def ub(sd):
        r1, r2, zlo, zhi = sd
        rm = (r1 + r2) / 2
        if rm == 0:
            return seg
        zl, zh = _shat_range(2 * rm, 2 * rm, prec)
        best = None
        for q in _scaled_ring(rm, 16):
            d = abs(px - q[0]) + abs(py - q[1]) / 2
            if best is None or d < best:
                best = d
        return best + (abs(pz - (zl + zh) / 2) + (zh - zl) / 2) / 4

    def split(sd):
        r1, r2, _, _ = sd
        m = (r1 + r2) / 2
        out = []
        for aa, bb in ((r1, m), (m, r2)):
            if aa == 0:
                out.append((aa, bb, ZERO, ONE))
            else:
                zlo, zhi = _shat_range(2 * aa, 2 * bb, prec + 4)
                out.append((aa, bb, zlo, zhi))
        return out

    seeds = [(ZERO, _SAUCER_RIM, ZERO, ONE)]
    return _bnb(seg, seeds, lb, ub, split, prec, rounds=700)


def _saucer_upper() -> UpperName:
    def item(t: int) -> Cover:
        cap = min(1 << (t + 2), 16)
        m_ang = min(1 << (t + 2), 48)
        balls = []
        for r1, r2, zlo, zhi in _saucer_profile(cap, t + 10):
            if r1 == 0:
                mb = min(1 << (t + 1), 16)
                rr = F(9, 8) * r2 + F(1, 8 * mb) + F(1, 1 << (t + 8))
                for k in range(mb + 1):
                    balls.append(RationalBall(
                        CubePoint((HALF, HALF, F(k, mb))), rr, "open"))
                continue
            mp = max(8, min(m_ang, -((-2 * m_ang * r2).__floor__())))
            step = max(1, 512 // mp)
            rm = (r1 + r2) / 2
            zm = (zlo + zhi) / 2
            rr = (4 * rm * _RING_GAP * step / 512
                  + F(9, 8) * (r2 - r1) / 2
                  + (zhi - zlo) / 8 + F(1, 1 << (t + 8)))
            for qx, qy in _scaled_ring(rm, step):
                balls.append(RationalBall(CubePoint((qx, qy, zm)), rr, "open"))
        return Cover(tuple(balls))
    return UpperName(item, 3, {"kind": "saucer"})


def _saucer_rim_upper() -> UpperName:
    def item(t: int) -> Cover:
        m_ang = min(1 << (t + 2), 128)
        step = 512 // m_ang
        hlo, hhi = _shat1_bounds(t + 8)
        zm = (hlo + hhi) / 2
        rr = (2 * _RING_GAP / m_ang + (hhi - hlo) / 8 + F(1, 1 << (t + 8)))
        balls = [RationalBall(CubePoint((qx, qy, zm)), rr, "open")
                 for qx, qy in _scaled_ring(_SAUCER_RIM, step)]
        return Cover(tuple(balls))
    return UpperName(item, 3, {"kind": "saucer_rim"})


def _saucer_slice_dist_iv(p: CubePoint, prec: int) -> tuple[Fraction, Fraction]:
    """The y=1/2 planar section: two mirrored profile branches plus the
    central segment, in coordinates (x, z)."""
    px, pz = p.coords
    seg = abs(px - HALF)

    def lb(sd):
        r1, r2, zlo, zhi = sd
        right = max(ZERO, (HALF + r1) - px, px - (HALF + r2))
        left = max(ZERO, (HALF - r2) - px, px - (HALF - r1))
        return min(right, left) + max(ZERO, zlo - pz, pz - zhi) / 2

    def ub(sd):
        r1, r2, _, _ = sd
        rm = (r1 + r2) / 2
        if rm == 0:
            return seg
        zl, zh = _shat_range(2 * rm, 2 * rm, prec)
        dx = min(abs(px - (HALF + rm)), abs(px - (HALF - rm)))
        return dx + (abs(pz - (zl + zh) / 2) + (zh - zl) / 2) / 2

    def split(sd):
        r1, r2, _, _ = sd
        m = (r1 + r2) / 2
        out = []
        for aa, bb in ((r1, m), (m, r2)):
            if aa == 0:
                out.append((aa, bb, ZERO, ONE))
            else:
                zlo, zhi = _shat_range(2 * aa, 2 * bb, prec + 4)
                out.append((aa, bb, zlo, zhi))
        return out

    seeds = [(ZERO, _SAUCER_RIM, ZERO, ONE)]
    return _bnb(seg, seeds, lb, ub, split, prec, rounds=700)


def _saucer_slice_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t + 2, 8)
        balls = _segment_balls(HALF, ZERO, ONE, n, vertical=True)
        cap = min(1 << (t + 3), 256)
        for r1, r2, zlo, zhi in _saucer_profile(cap, t + 10):
            rr = (r2 - r1) / 2 + (zhi - zlo) / 4 + F(1, 1 << (t + 8))
            zm = (zlo + zhi) / 2
            rm = (r1 + r2) / 2
            balls.append(RationalBall(CubePoint((HALF + rm, zm)), rr, "open"))
            balls.append(RationalBall(CubePoint((HALF - rm, zm)), rr, "open"))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "saucer_slice"})


def saucer_slice_set() -> GroundTruthSet:
    """The y = 1/2 planar section of the saucer as a 2-D ground-truth set
    (two mirrored oscillating branches joined by the central limit segment):
    what the slice renderer draws."""
    dist_cmp = _cmp_from_interval(_saucer_slice_dist_iv)
    upper = _saucer_slice_upper()
    return GroundTruthSet(
        kind="saucer_slice",
        dimension=2,
        description="y=1/2 section of the saucer: mirrored sin(1/x) fans",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, empty_upper(2)),
    )


# -- algebraic kinds ------------------------------------------------------------------

def _circle_upper(center, rho: Fraction) -> UpperName:
    def item(t: int) -> Cover:
        m = min(1 << (t + 2), 512)
        step = 512 // m
        r = 4 * rho * F(_RING_GAP.numerator, _RING_GAP.denominator * m) \
            + F(3, 1 << (t + 6))
        lam = 4 * rho
        seen = set()
        balls = []
        for i in range(0, 512, step):
            pt = _RING[i]
            raw = CubePoint((center[0] + lam * (pt.coords[0] - HALF),
                             center[1] + lam * (pt.coords[1] - HALF)))
            c = snap_point(raw, t + 4)
            if c.coords not in seen:
                seen.add(c.coords)
                balls.append(RationalBall(c, r, "open"))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "circle",
                               "geom": ("circle", center[0], center[1], rho)})


def _make_circle(params: dict) -> GroundTruthSet:
    center = tuple(frac(c) for c in params.pop("center", (HALF, HALF)))
    rho = frac(params.pop("radius", QUARTER))
    if len(center) != 2:
        raise ValueError("circle center must be planar")
    if rho <= 0:
        raise ValueError("circle radius must be positive")
    if not (0 <= center[0] - rho and center[0] + rho <= 1
            and 0 <= center[1] - rho and center[1] + rho <= 1):
        raise ValueError("circle must fit inside the cube")

    def dist_cmp(p: CubePoint, q) -> int:
        return _circle_dist_cmp(center, rho, p, frac(q))

    upper = _circle_upper(center, rho)
    return GroundTruthSet(
        kind="circle",
        dimension=2,
        description=f"circle center=({center[0]},{center[1]}) radius={rho}",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, empty_upper(2)),
    )


_DISK_CENTER = (HALF, HALF)
_DISK_RHO = QUARTER


def _interior_level(t: int) -> int:
    return min((t + 3) // 2, 5)


def _disk_upper() -> UpperName:
    band = _circle_upper(_DISK_CENTER, _DISK_RHO)

    def item(t: int) -> Cover:
        g = _interior_level(t)
        h = F(1, 1 << g)
        balls = list(band.cover_at(t))
        rr = F(7, 4) * h
        n = 1 << g
        for ix in range(n + 1):
            x = F(ix, n)
            dx2 = (x - HALF) ** 2
            for iy in range(n + 1):
                y = F(iy, n)
                if dx2 + (y - HALF) ** 2 <= _DISK_RHO * _DISK_RHO:
                    balls.append(RationalBall(CubePoint((x, y)), rr, "open"))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "disk",
                               "geom": ("disk", HALF, HALF, _DISK_RHO)})


def _disk_inside_test(p: CubePoint, q: Fraction) -> bool:
    px, py = p.coords
    rho2 = _DISK_RHO * _DISK_RHO
    for vx, vy in ((px - q, py), (px + q, py), (px, py - 2 * q), (px, py + 2 * q)):
        if (vx - HALF) ** 2 + (vy - HALF) ** 2 > rho2:
            return False
    return True


def _make_disk() -> GroundTruthSet:
    rho = _DISK_RHO

    def dist_cmp(p: CubePoint, q) -> int:
        q = frac(q)
        px, py = p.coords
        if (px - HALF) ** 2 + (py - HALF) ** 2 <= rho * rho:
            return (ZERO > q) - (ZERO < q)
        return _circle_dist_cmp(_DISK_CENTER, rho, p, q)

    upper = _disk_upper()
    boundary = _circle_upper(_DISK_CENTER, rho)
    return GroundTruthSet(
        kind="disk_pair",
        dimension=2,
        description="closed round disk center=(1/2,1/2) radius=1/4 with its boundary circle",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp, _disk_inside_test),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, boundary),
    )


def _square_upper() -> UpperName:
    def item(t: int) -> Cover:
        g = _interior_level(t)
        h = F(1, 1 << g)
        rr = F(7, 8) * h
        n = 1 << g
        balls = [RationalBall(CubePoint((F(ix, n), F(iy, n))), rr, "open")
                 for ix in range(n + 1) for iy in range(n + 1)]
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "square", "geom": ("square",)})


def _square_boundary_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t + 2, 8)
        r = F(5, 8 * n)
        seen = set()
        balls = []
        for k in range(n + 1):
            v = F(k, n)
            for coords in ((v, ZERO), (v, ONE), (ZERO, v), (ONE, v)):
                if coords not in seen:
                    seen.add(coords)
                    balls.append(RationalBall(CubePoint(coords), r, "open"))
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "square_boundary"})


def _make_square() -> GroundTruthSet:
    def dist_cmp(p: CubePoint, q) -> int:
        q = frac(q)
        return (ZERO > q) - (ZERO < q)

    upper = _square_upper()
    return GroundTruthSet(
        kind="square_pair",
        dimension=2,
        description="the full 2-cube with its topological boundary",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp, lambda p, q: True),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, _square_boundary_upper()),
    )


_ARC_MARKS = (CubePoint((QUARTER, ZERO)), CubePoint((F(3, 4), ZERO)))


def _arc_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t + 2, 9)
        balls = [RationalBall(CubePoint((QUARTER + F(k, 2 * n), ZERO)),
                              F(5, 16 * n), "open") for k in range(n + 1)]
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "arc"})


def _arc_ends_upper() -> UpperName:
    def item(t: int) -> Cover:
        r = F(1, 1 << (t + 2))
        return Cover(tuple(RationalBall(m, r, "open") for m in _ARC_MARKS))
    return UpperName(item, 2, {"kind": "arc_ends"})


def _make_arc() -> GroundTruthSet:
    def dist_cmp(p: CubePoint, q) -> int:
        q = frac(q)
        px, py = p.coords
        d = max(ZERO, abs(px - HALF) - QUARTER) + py / 2
        return (d > q) - (d < q)

    upper = _arc_upper()
    return GroundTruthSet(
        kind="arc_pair",
        dimension=2,
        description="horizontal arc [1/4,3/4] x {0} with its endpoint pair",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, _arc_ends_upper()),
        marked_points=_ARC_MARKS,
    )


def _comb_teeth(n_teeth: int) -> tuple[Fraction, ...]:
    return tuple(F(1, 1 << i) for i in range(1, n_teeth + 1))


def _comb_x_cover(t: int, teeth: Sequence[Fraction]) -> Cover:
    n = 1 << min(t + 2, 9)
    balls = [RationalBall(CubePoint((F(k, n), ZERO)), F(5, 8 * n), "open")
             for k in range(n + 1)]
    for x in teeth:
        m = max(1, int(n * x))
        h = x / m
        for k in range(m + 1):
            balls.append(RationalBall(CubePoint((x, h * k)), F(5, 16) * h, "open"))
    return Cover(tuple(balls))


def _comb_a_cover(t: int, teeth: Sequence[Fraction]) -> Cover:
    r = F(1, 1 << (t + 3))
    balls = [RationalBall(CubePoint((ZERO, ZERO)), r, "open")]
    balls.extend(RationalBall(CubePoint((x, x)), r, "open") for x in teeth)
    return Cover(tuple(balls))


def _comb_dist(p: CubePoint, teeth: Sequence[Fraction]) -> Fraction:
    px, py = p.coords
    best = py / 2 + max(ZERO, px - 1, -px)
    for x in teeth:
        best = min(best, abs(px - x) + max(ZERO, py - x) / 2)
    return best


def _make_comb(params: dict) -> GroundTruthSet:
    n_teeth = params.pop("teeth", 8)
    if not isinstance(n_teeth, int) or not 1 <= n_teeth <= 10:
        raise ValueError("teeth must be an int in 1..10")
    teeth = _comb_teeth(n_teeth)

    def dist_cmp(p: CubePoint, q) -> int:
        q = frac(q)
        d = _comb_dist(p, teeth)
        return (d > q) - (d < q)

    upper = UpperName(lambda t: _comb_x_cover(t, teeth), 2, {"kind": "comb"})
    tips = UpperName(lambda t: _comb_a_cover(t, teeth), 2, {"kind": "comb_tips"})
    marks = (CubePoint((ZERO, ZERO)),) + tuple(CubePoint((x, x)) for x in teeth)
    return GroundTruthSet(
        kind="comb_pair",
        dimension=2,
        description=f"comb with base [0,1] and {n_teeth} dyadic teeth, marked at the tips",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, tips),
        marked_points=marks,
    )


def _make_sine() -> GroundTruthSet:
    dist_cmp = _cmp_from_interval(_sine_dist_iv)
    upper = _sine_upper()
    return GroundTruthSet(
        kind="sine_curve",
        dimension=2,
        description="closure of the graph of (sin(1/x)+1)/2 over (0,1]",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, empty_upper(2)),
    )


def _make_warsaw() -> GroundTruthSet:
    dist_cmp = _cmp_from_interval(_warsaw_dist_iv)
    upper = _warsaw_upper()
    return GroundTruthSet(
        kind="warsaw_circle",
        dimension=2,
        description="oscillating graph closed up through the bottom and right edges",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(2, dist_cmp),
        canonical_pair=PairName(upper, empty_upper(2)),
    )


def _make_saucer() -> GroundTruthSet:
    dist_cmp = _cmp_from_interval(_saucer_dist_iv)
    upper = _saucer_upper()
    return GroundTruthSet(
        kind="saucer_pair",
        dimension=3,
        description="revolved oscillating profile with its rim circle at the closing height",
        dist_cmp=dist_cmp,
        membership_margin_oracle=_margin_oracle(dist_cmp),
        canonical_upper=upper,
        canonical_lower=_oracle_lower(3, dist_cmp),
        canonical_pair=PairName(upper, _saucer_rim_upper()),
    )


def make_set(kind: str, params=None) -> GroundTruthSet:
    """Build a curated ground-truth set.  `params` (a mapping) is only
    consulted where documented: circle takes center/radius, the comb takes
    teeth; anything else must come parameterless."""
    params = dict(params or {})
    if kind == "circle":
        g = _make_circle(params)
    elif kind == "arc_pair":
        g = _make_arc()
    elif kind == "disk_pair":
        g = _make_disk()
    elif kind == "square_pair":
        g = _make_square()
    elif kind == "comb_pair":
        g = _make_comb(params)
    elif kind == "sine_curve":
        g = _make_sine()
    elif kind == "warsaw_circle":
        g = _make_warsaw()
    elif kind == "saucer_pair":
        g = _make_saucer()
    else:
        raise ValueError(f"unknown kind {kind!r}; choose from {', '.join(KINDS)}")
    if params:
        raise ValueError(f"unknown parameters for {kind}: {', '.join(sorted(params))}")
    return g


# -- adversarial and limit constructions ---------------------------------------------

def rc_interval_name(drops) -> UpperName:
    """Upper name of [0, L] x {0} where L is the limit of a nonincreasing
    rational stream r_t = drops(t) in (0, 1]: stage t covers [0, r_t] at a
    resolution that deepens with t (depth min(t,8) + (t-8)//256, so very late
    stages stay affordable while the covers still converge to the limit set).
    Monotonicity is validated as observed.  The name carries upper
    information only: no stage can certify that a ball near the current right
    end meets the limit set, because the stream may still drop."""
    def item(t: int) -> Cover:
        vals = []
        for s in range(t + 1):
            v = frac(drops(s))
            if not 0 < v <= 1:
                raise ValueError("drop stream values must lie in (0, 1]")
            if vals and v > vals[-1]:
                raise ValueError("drop stream must be nonincreasing")
            vals.append(v)
        r_t = vals[-1]
        depth = min(t, 8) + max(0, t - 8) // 256
        n = 1 << depth
        last = -((-r_t * n).__floor__())    # ceil(r_t * 2^depth)
        rr = F(5, 8 * n)
        balls = [RationalBall(CubePoint((F(k, n), ZERO)), rr, "open")
                 for k in range(last + 1)]
        return Cover(tuple(balls))
    return UpperName(item, 2, {"kind": "rc_interval"})


def comb_adversary(e_enum, teeth: int = 8) -> PairName:
    """Pair name of the comb with the teeth indexed by an enumerated set
    removed in the limit: `e_enum(t)` yields an index in 1..teeth or None,
    and once index i has appeared by stage t, tooth i (and its marked tip)
    leaves all covers from stage t on.  Covers always contain the limit pair,
    so the name is sound at every stage; which teeth survive is exactly as
    hard as the enumeration's complement."""
    if not 1 <= teeth <= 10:
        raise ValueError("teeth must be 1..10")
    all_teeth = _comb_teeth(teeth)

    def revealed(t: int) -> set:
        out = set()
        for s in range(t + 1):
            v = e_enum(s)
            if v is None:
                continue
            if not isinstance(v, int) or not 1 <= v <= teeth:
                raise ValueError("enumerated tooth index out of range")
            out.add(v)
        return out

    def live(t: int) -> tuple[Fraction, ...]:
        gone = revealed(t)
        return tuple(x for i, x in enumerate(all_teeth, start=1) if i not in gone)

    x_name = UpperName(lambda t: _comb_x_cover(t, live(t)), 2, {"kind": "comb_adversary"})
    a_name = UpperName(lambda t: _comb_a_cover(t, live(t)), 2, {"kind": "comb_adversary_tips"})
    return PairName(x_name, a_name)


def apply_deformation(g: GroundTruthSet, f: PLMap, eps) -> tuple[UpperName, bool]:
    """Push the canonical upper name through a grid map and report whether
    the map is an eps-deformation (sup distance to the identity below eps,
    compared exactly)."""
    eps = frac(eps)
    near = rho(f, pl_identity(f.dim)) < eps
    return image_pl(g.canonical_upper, f), near


# -- class maps and certificates ------------------------------------------------------

@lru_cache(maxsize=1)
def arc_class_map() -> PLMap:
    """(x, y) -> (x, 1/2): exact affine map carrying the arc's endpoints onto
    the two marked points of the point-pair target."""
    vals = [(F(ints[0]), HALF) for ints in iproduct(range(2), repeat=2)]
    return PLMap(0, 2, 2, vals)


@lru_cache(maxsize=1)
def square_class_map() -> PLMap:
    """Order-5 grid map squashing the cube radially onto the marked circle
    (the center vertex picks an arbitrary circle point; it never matters on
    the boundary).  Values are dyadic roundings of the exact projection,
    well within the circle's neighborhood."""
    m = 5
    n = 1 << m
    vals = []
    for ints in iproduct(range(n + 1), repeat=2):
        dx = F(ints[0], n) - HALF
        dy = F(ints[1], n) - HALF
        if dx == 0 and dy == 0:
            vals.append((HALF + QUARTER, HALF))
            continue
        lo, hi = sqrt_bounds(dx * dx + dy * dy, 24)
        scale = 2 / (lo + hi) / 4
        vals.append((snap_dyadic(HALF + dx * scale, 10),
                     snap_dyadic(HALF + dy * scale, 10)))
    return PLMap(m, 2, 2, vals)


@lru_cache(maxsize=1)
def saucer_class_map() -> PLMap:
    """Exact affine halving of the horizontal plane toward the center: the
    radius-1/2 rim maps onto the marked circle; height is ignored."""
    vals = []
    for ints in iproduct(range(2), repeat=3):
        vals.append((QUARTER + F(ints[0]) / 2, QUARTER + F(ints[1]) / 2))
    return PLMap(0, 3, 2, vals)


def arc_piece() -> PiPiece:
    """The reconstruction piece for the arc pair: the marked endpoints stay
    joined inside the set.  The complement confirms when the surviving covers
    split them into different components, or when an endpoint's entire marked
    trace has been swallowed by the subtraction."""
    marks = _ARC_MARKS

    def complement(p: PairName, b: Budget) -> Decision:
        d = separation_confirm(p, b)
        if d.confirmed:
            return d
        return marked_removed_confirm(p.upper_a, marks, b)

    return PiPiece("marks-joined", complement)


def certificate_for(g: GroundTruthSet) -> Certificate:
    """The minimality certificate each reconstructible set runs under:
    arc -> endpoints joined (piece); circle and Warsaw circle -> not
    quasi-chainable, advice index 3 (mesh 1/8); disk, square, saucer ->
    no continuous extension of the boundary class over the whole set."""
    if g.kind == "arc_pair":
        return Certificate(piece=arc_piece())
    if g.kind in ("circle", "warsaw_circle"):
        return Certificate(family=not_quasichainable_family(), advice=3)
    if g.kind == "disk_pair":
        return Certificate(piece=en_piece(pl_identity(2), make_anr("S1")))
    if g.kind == "square_pair":
        return Certificate(piece=en_piece(square_class_map(), make_anr("S1")))
    if g.kind == "saucer_pair":
        return Certificate(piece=en_piece(saucer_class_map(), make_anr("S1")))
    raise ValueError(f"no certificate wiring for {g.kind}")
