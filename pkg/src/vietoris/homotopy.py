"""Dense PL self-maps of the cube, concrete ANR data for the 0- and 1-sphere,
and the homotopy-class numbering semideciders built on top of them.

A `PLMap` stores dyadic images of the order-n grid vertices and interpolates
over the standard simplicial subdivision of each grid cell (coordinates sorted
by decreasing fractional part).  That subdivision is compatible with dyadic
refinement, so resampling a map on a finer grid reproduces it exactly; this
makes the sup-distance `rho` of two grid maps an exact rational (max over the
common refinement's vertices).

The enumeration `dense_pl_map` lists, block by grid order, every assignment
of order-n dyadic images to order-n grid vertices.  Indices are plain (often
astronomically large) integers; density is exercised through `pl_search`,
which snaps a target to successive grid orders and certifies the distance
exactly.

All homotopy predicates are one-sided: they confirm or stay unknown, and
every confirmation is backed by an explicit PL witness that the caller can
re-check.  Witness *search* may consult name metadata (subtraction trails,
geometry tags) and caches on long-lived names; every accepted witness is
re-validated through the exact public predicates, so metadata can only waste
time, never produce an unsound confirmation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import isqrt
from typing import Callable, Iterator, Optional, Sequence

from .geometry import (
    MAX_DIM,
    ONE,
    ZERO,
    Box,
    Cover,
    CubePoint,
    RationalBall,
    Verdict,
    balls_disjoint,
    box_center,
    box_of_ball,
    dyadic_depth,
    frac,
    is_dyadic,
    metric_eval,
    point,
    snap_dyadic,
    snap_point,
    split_box,
)
from .invariants import Decision, PiPiece, UNKNOWN
from .names import (
    BallIndex,
    Budget,
    PairName,
    UpperName,
    ball_inside_union_indexed,
    disjoint_closed_semidecide,
    image_pl,
    product,
    slice_name,
    subset_semidecide,
    sup_dist_semidecide,
    union_name,
)

_GRID_ORDER_CAP = 10


def _wdist(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    """Weighted codomain distance sum_i 2^-i |u_i - v_i| on coordinate tuples."""
    total = ZERO
    for i in range(len(u)):
        total += abs(u[i] - v[i]) / (1 << i)
    return total


# -- exact square-root enclosures ------------------------------------------------

def sqrt_bounds(x: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    """Rational lo <= sqrt(x) <= hi with hi - lo <= 2^-prec, exactly."""
    if x < 0:
        raise ValueError("sqrt of a negative number")
    if x == 0:
        return ZERO, ZERO
    t = x.numerator * x.denominator
    a = isqrt(t << (2 * prec))
    den = x.denominator << prec
    lo = Fraction(a, den)
    if lo == 0:  # keep the lower bound positive for tiny x
        lo = x / Fraction(a + 1, den)
    return lo, Fraction(a + 1, den)


# -- rational interval arithmetic (just what the exit maps need) -------------------

Interval = tuple[Fraction, Fraction]


def _iv(a, b=None) -> Interval:
    a = frac(a)
    return (a, a if b is None else frac(b))


def _iadd(a: Interval, b: Interval) -> Interval:
    return (a[0] + b[0], a[1] + b[1])


def _isub(a: Interval, b: Interval) -> Interval:
    return (a[0] - b[1], a[1] - b[0])


def _imul(a: Interval, b: Interval) -> Interval:
    vals = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(vals), max(vals))


def _idiv_pos(a: Interval, b: Interval) -> Interval:
    """a / b for an interval b that is strictly positive."""
    if b[0] <= 0:
        raise ValueError("division by an interval touching zero")
    vals = (a[0] / b[0], a[0] / b[1], a[1] / b[0], a[1] / b[1])
    return (min(vals), max(vals))


def _isqrt_iv(a: Interval, prec: int) -> Interval:
    lo = sqrt_bounds(a[0], prec)[0] if a[0] > 0 else ZERO
    return (lo, sqrt_bounds(a[1], prec)[1])


# -- PL maps -----------------------------------------------------------------------

class PLMap:
    """A piecewise-affine map Q_dim -> Q_codim given by dyadic vertex images.

    Evaluation is exact rational; per-axis slope bounds (max image stretch per
    unit coordinate) are computed exactly on demand, locally per region where
    that is cheaper.  `enclose_ball` / `pair_sup_below` provide the sound image
    enclosures and sup-distance certificates the name layer builds on.
    """

    __slots__ = ("grid_order", "dim", "codim", "values", "_slopes", "_cs_cache")

    def __init__(self, grid_order: int, dim: int, codim: int,
                 values: Sequence[Sequence[Fraction]]) -> None:
        if not 0 <= grid_order <= _GRID_ORDER_CAP:
            raise ValueError(f"grid order must be 0..{_GRID_ORDER_CAP}")
        if not 1 <= dim <= MAX_DIM or not 1 <= codim <= MAX_DIM:
            raise ValueError("dimensions must be 1..%d" % MAX_DIM)
        n1 = (1 << grid_order) + 1
        if len(values) != n1 ** dim:
            raise ValueError("vertex image table has the wrong size")
        fixed = []
        for row in values:
            row = tuple(row)
            if len(row) != codim:
                raise ValueError("vertex image has the wrong dimension")
            for c in row:
                if not isinstance(c, Fraction) or not 0 <= c <= 1 or not is_dyadic(c):
                    raise ValueError("vertex images must be dyadic Fractions in [0,1]")
            fixed.append(row)
        self.grid_order = grid_order
        self.dim = dim
        self.codim = codim
        self.values = tuple(fixed)
        self._slopes: Optional[tuple[Fraction, ...]] = None
        self._cs_cache: Optional[dict] = None

    # ---- identity & hashing (used by witness dedup and tests)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PLMap) and self.grid_order == other.grid_order
                and self.dim == other.dim and self.codim == other.codim
                and self.values == other.values)

    def __hash__(self) -> int:
        return hash((self.grid_order, self.dim, self.codim, self.values))

    def __repr__(self) -> str:
        return f"PLMap(order={self.grid_order}, dim={self.dim}, codim={self.codim})"

    # ---- vertex bookkeeping

    def _value_at(self, ints: Sequence[int]) -> tuple[Fraction, ...]:
        n1 = (1 << self.grid_order) + 1
        idx = 0
        for i in ints:
            idx = idx * n1 + i
        return self.values[idx]

    def grid_vertices(self) -> Iterator[tuple[tuple[int, ...], CubePoint]]:
        n = 1 << self.grid_order
        for ints in iproduct(range(n + 1), repeat=self.dim):
            yield ints, CubePoint(tuple(Fraction(i, n) for i in ints))

    # ---- evaluation (simplicial interpolation per grid cell)

    def evaluate(self, p) -> tuple[Fraction, ...]:
        coords = p.coords if isinstance(p, CubePoint) else tuple(frac(c) for c in p)
        if len(coords) != self.dim:
            raise ValueError("dimension mismatch")
        n = 1 << self.grid_order
        base = []
        u = []
        for c in coords:
            s = c * n
            i = s.numerator // s.denominator
            if i >= n:
                i = n - 1
            base.append(i)
            u.append(s - i)
        order = sorted(range(self.dim), key=lambda j: u[j], reverse=True)
        prev = self._value_at(base)
        acc = list(prev)
        w = list(base)
        for j in order:
            w[j] += 1
            cur = self._value_at(w)
            uj = u[j]
            if uj:
                for c in range(self.codim):
                    acc[c] += uj * (cur[c] - prev[c])
            prev = cur
        return tuple(acc)

    def refine(self, new_order: int) -> "PLMap":
        """The same function resampled on a finer grid (exact)."""
        if new_order < self.grid_order:
            raise ValueError("refinement must not coarsen")
        if new_order == self.grid_order:
            return self
        n = 1 << new_order
        vals = [self.evaluate(CubePoint(tuple(Fraction(i, n) for i in ints)))
                for ints in iproduct(range(n + 1), repeat=self.dim)]
        return PLMap(new_order, self.dim, self.codim, vals)

    # ---- slope bounds

    def _cell_range(self, box: Box) -> list[tuple[int, int]]:
        n = 1 << self.grid_order
        rng = []
        for lo, hi in box:
            a = max(0, min(n - 1, (lo * n).numerator // (lo * n).denominator))
            s = hi * n
            b = s.numerator // s.denominator
            if Fraction(b) == s:
                b -= 1
            b = max(a, min(n - 1, b))
            rng.append((a, b))
        return rng

    def _slopes_over(self, rng: list[tuple[int, int]]) -> tuple[Fraction, ...]:
        """Per-axis max edge stretch over the given cell block (exact).  The
        standard subdivision's simplices take their axis-j gradients from
        axis-j cell edges, so edge stretches bound the true slopes."""
        n = 1 << self.grid_order
        out = [ZERO] * self.dim
        for ints in iproduct(*[range(a, b + 2) for a, b in rng]):
            v0 = self._value_at(ints)
            for j in range(self.dim):
                if ints[j] <= rng[j][1]:
                    nxt = list(ints)
                    nxt[j] += 1
                    d = _wdist(v0, self._value_at(nxt)) * n
                    if d > out[j]:
                        out[j] = d
        return tuple(out)

    def axis_slopes(self) -> tuple[Fraction, ...]:
        """Global per-axis slope bounds s_j: d(f x, f y) <= sum_j s_j |x_j - y_j|."""
        if self._slopes is None:
            n = 1 << self.grid_order
            full = [(0, n - 1)] * self.dim
            self._slopes = self._slopes_over(full)
        return self._slopes

    def lipschitz_bound(self) -> Fraction:
        """Exact bound L with d(f x, f y) <= L * d(x, y) in the weighted metric."""
        return max((s * (1 << j) for j, s in enumerate(self.axis_slopes())),
                   default=ZERO)

    def _local_slopes(self, box: Box) -> tuple[Fraction, ...]:
        rng = self._cell_range(box)
        cells = 1
        for a, b in rng:
            cells *= b - a + 1
        if cells > 256:
            return self.axis_slopes()
        return self._slopes_over(rng)

    def _component_slopes_over(self, rng: Sequence[tuple[int, int]]
                               ) -> tuple[tuple[Fraction, ...], ...]:
        """Per-axis tuples of per-component max edge change times n (exact);
        they bound each image coordinate's variation separately, giving an
        image box rather than an image ball."""
        n = 1 << self.grid_order
        out = [[ZERO] * self.codim for _ in range(self.dim)]
        for ints in iproduct(*[range(a, b + 2) for a, b in rng]):
            v0 = self._value_at(ints)
            for j in range(self.dim):
                if ints[j] <= rng[j][1]:
                    nxt = list(ints)
                    nxt[j] += 1
                    v1 = self._value_at(nxt)
                    row = out[j]
                    for c in range(self.codim):
                        d = abs(v1[c] - v0[c]) * n
                        if d > row[c]:
                            row[c] = d
        return tuple(tuple(r) for r in out)

    def _local_component_slopes(self, box: Box) -> tuple[tuple[Fraction, ...], ...]:
        rng = self._cell_range(box)
        cells = 1
        for a, b in rng:
            cells *= b - a + 1
        if cells > 256:
            rng = [(0, (1 << self.grid_order) - 1)] * self.dim
        key = tuple(rng)
        if self._cs_cache is None:
            self._cs_cache = {}
        hit = self._cs_cache.get(key)
        if hit is None:
            hit = self._component_slopes_over(rng)
            if len(self._cs_cache) > 4096:
                self._cs_cache.clear()
            self._cs_cache[key] = hit
        return hit

    # ---- sound image enclosures

    def enclose_box(self, box: Box) -> RationalBall:
        """A ball certainly containing f(box ∩ cube), from the center value
        and exact per-axis slope bounds over the box."""
        box = tuple((max(ZERO, lo), min(ONE, hi)) for lo, hi in box)
        center_val = self.evaluate(box_center(box))
        s = self._local_slopes(box)
        rad = sum((s[j] * (hi - lo) / 2 for j, (lo, hi) in enumerate(box)),
                  Fraction(1, 1 << 40))
        return RationalBall(CubePoint(center_val), rad, "open")

    def enclose_ball(self, b: RationalBall, pieces: int) -> list[RationalBall]:
        """Sound image enclosures of the ball (duck protocol for image_pl);
        more pieces give tighter enclosures."""
        boxes = [box_of_ball(b)]
        d = self.dim
        while len(boxes) << d <= max(1, pieces):
            boxes = [c for bx in boxes for c in split_box(bx)]
        slack = Fraction(1, 1 << (24 + max(0, pieces)))
        out = []
        for bx in boxes:
            m = box_center(bx)
            val = self.evaluate(m)
            s = self._local_slopes(bx)
            rad = sum((s[j] * (hi - lo) / 2 for j, (lo, hi) in enumerate(bx)), ZERO)
            out.append(RationalBall(CubePoint(val), rad + slack, "open"))
        return out

    def pair_sup_below(self, g: "PLMap", b: RationalBall, q, depth: int) -> bool:
        """Certify sup over the ball's box of d(f(x), g(x)) < q (sound; may
        fail to certify a true bound when the depth budget runs out)."""
        q = frac(q)
        if self is g:
            return ZERO < q
        if self.dim != g.dim or self.codim != g.codim:
            raise ValueError("map shape mismatch")
        stack = [(box_of_ball(b), depth)]
        while stack:
            bx, dep = stack.pop()
            m = box_center(bx)
            v = _wdist(self.evaluate(m), g.evaluate(m))
            if v >= q:
                return False
            sf = self._local_slopes(bx)
            sg = g._local_slopes(bx)
            bound = v
            for j, (lo, hi) in enumerate(bx):
                bound += (sf[j] + sg[j]) * (hi - lo) / 2
            if bound < q:
                continue
            if dep <= 0:
                return False
            stack.extend((c, dep - 1) for c in split_box(bx))
        return True


# -- the dense enumeration -----------------------------------------------------------

def _grid_count(n: int, dim: int) -> int:
    return ((1 << n) + 1) ** dim


def _block_size(n: int, dim: int, codim: int) -> int:
    return ((1 << n) + 1) ** (codim * _grid_count(n, dim))


def dense_pl_map(i: int, dim: int = 2, codim: Optional[int] = None) -> PLMap:
    """The i-th PL map in the fixed enumeration: blocks by grid order n, each
    block listing all assignments of order-n dyadic images to order-n grid
    vertices (big-endian digits, base 2^n + 1).  Index 0 is the constant-0
    map; the identity sits in block 0."""
    codim = dim if codim is None else codim
    if i < 0:
        raise ValueError("index must be >= 0")
    n = 0
    rest = i
    while True:
        size = _block_size(n, dim, codim)
        if rest < size:
            break
        rest -= size
        n += 1
        if n > _GRID_ORDER_CAP:
            raise ValueError("index beyond the supported grid orders")
    n1 = (1 << n) + 1
    count = codim * _grid_count(n, dim)
    digits = [0] * count
    for pos in range(count - 1, -1, -1):
        rest, d0 = divmod(rest, n1)
        digits[pos] = d0
    den = 1 << n
    values = tuple(tuple(Fraction(digits[v * codim + c], den) for c in range(codim))
                   for v in range(_grid_count(n, dim)))
    return PLMap(n, dim, codim, values)


def pl_index(m: PLMap) -> int:
    """Inverse of dense_pl_map for canonical maps (all vertex images of dyadic
    depth <= grid_order)."""
    n = m.grid_order
    den = 1 << n
    base = sum(_block_size(k, m.dim, m.codim) for k in range(n))
    n1 = den + 1
    acc = 0
    for row in m.values:
        for c in row:
            scaled = c * den
            if scaled.denominator != 1:
                raise ValueError("map is not in canonical block form")
            acc = acc * n1 + scaled.numerator
    return base + acc


def pl_identity(dim: int) -> PLMap:
    vals = [tuple(Fraction(i) for i in ints)
            for ints in iproduct(range(2), repeat=dim)]
    return PLMap(0, dim, dim, vals)


def pl_constant(value, dim: int, codim: Optional[int] = None) -> PLMap:
    coords = value.coords if isinstance(value, CubePoint) else tuple(frac(c) for c in value)
    codim = len(coords) if codim is None else codim
    if len(coords) != codim:
        raise ValueError("constant value has the wrong dimension")
    row = tuple(coords)
    return PLMap(0, dim, codim, [row] * _grid_count(0, dim))


def rho(f: PLMap, g: PLMap) -> Fraction:
    """Exact sup-distance of two grid maps over the whole cube: the distance
    is piecewise-linear on the common refinement, so the max over that grid's
    vertices is the true sup."""
    if f.dim != g.dim or f.codim != g.codim:
        raise ValueError("map shape mismatch")
    m = max(f.grid_order, g.grid_order)
    fr, gr = f.refine(m), g.refine(m)
    return max(_wdist(a, b) for a, b in zip(fr.values, gr.values))


def pl_search(target: PLMap, eps, max_order: int = 6) -> Optional[tuple[int, PLMap]]:
    """Find an enumeration index within rho-distance eps of the target by
    snapping it to successive grid orders; the distance check is exact."""
    eps = frac(eps)
    for n in range(max_order + 1):
        nn = 1 << n
        vals = [tuple(snap_dyadic(c, n) for c in
                      target.evaluate(CubePoint(tuple(Fraction(i, nn) for i in ints))))
                for ints in iproduct(range(nn + 1), repeat=target.dim)]
        cand = PLMap(n, target.dim, target.codim, vals)
        if rho(cand, target) < eps:
            return pl_index(cand), cand
    return None


# -- the S1 / S0 ANR data --------------------------------------------------------------

_S1_CENTER = (Fraction(1, 2), Fraction(1, 2))
_S1_RADIUS = Fraction(1, 4)
_S1_ETA = Fraction(1, 64)       # neighborhood ball radius
_S0_POINTS = (point("1/4", "1/2"), point("3/4", "1/2"))
_S0_ETA = Fraction(1, 16)


def circle_point(t: Fraction, left: bool = False) -> CubePoint:
    """A rational point exactly on the circle |p - center| = 1/4 via the
    tangent-half-angle parametrization; `left` mirrors to the other half."""
    t = frac(t)
    den = 1 + t * t
    c = (1 - t * t) / den
    s = 2 * t / den
    x = _S1_CENTER[0] - _S1_RADIUS * c if left else _S1_CENTER[0] + _S1_RADIUS * c
    return point(x, _S1_CENTER[1] + _S1_RADIUS * s)


@lru_cache(maxsize=1)
def _s1_ring() -> tuple[CubePoint, ...]:
    """512 rational circle points in cyclic (counterclockwise) order, spaced
    at most 1/512 apart along the circle."""
    step = Fraction(1, 128)
    right = [circle_point(-1 + k * step) for k in range(257)]
    left = [circle_point(1 - k * step, left=True) for k in range(1, 256)]
    return tuple(right + left)


@lru_cache(maxsize=1)
def _s1_tube_margin() -> Fraction:
    """eta minus the ring's covering slack: any point within this weighted
    distance of the circle lies in some open ring ball.  Slack chain: weighted
    distance is at most 9/8 of Euclidean, a circle point sits within half an
    arc of its nearest ring point, and an arc is at most 9/8 of its chord."""
    ring = _s1_ring()
    worst = ZERO
    for i, p in enumerate(ring):
        q = ring[(i + 1) % len(ring)]
        c2 = sum((x - y) ** 2 for x, y in zip(p.coords, q.coords))
        hi = sqrt_bounds(c2, 24)[1]
        if hi > worst:
            worst = hi
    return _S1_ETA - Fraction(81, 128) * worst


@dataclass(frozen=True)
class AnrData:
    """Concrete neighborhood-retract data for a target Y in the plane square.

    `retract_enclose(x, prec)` returns a rational ball certainly containing
    r(x); together with the exact `lipschitz` bound it stands in for the
    (irrational) retraction.  Invariants: (i) alpha-close maps into Y are
    homotopic, (ii) d(r(x), x) < mu on the neighborhood, (iii) d(x, y) < mu
    implies d(r(x), r(y)) < alpha.
    """

    target_id: str
    neighborhood: Cover
    mu: Fraction
    alpha: Fraction
    lipschitz: Fraction
    retract_enclose: Callable[[CubePoint, int], RationalBall] = field(repr=False)
    ball_index: BallIndex = field(repr=False, compare=False)
    circle_center: Optional[CubePoint] = None
    circle_radius: Optional[Fraction] = None
    points: tuple[CubePoint, ...] = ()
    # any point within this weighted distance of the circle lies in some
    # neighborhood ball (None for targets without a circle)
    tube_margin: Optional[Fraction] = None


def _s1_retract_enclose(x: CubePoint, prec: int) -> RationalBall:
    ux = x.coords[0] - _S1_CENTER[0]
    uy = x.coords[1] - _S1_CENTER[1]
    s = ux * ux + uy * uy
    if s == 0:
        raise ValueError("radial retraction undefined at the circle's center")
    lo, hi = sqrt_bounds(s, prec)
    inv = (1 / hi, 1 / lo)
    coords = []
    rad = ZERO
    for i, u in enumerate((ux, uy)):
        a = _S1_CENTER[i] + _S1_RADIUS * u * inv[0]
        b = _S1_CENTER[i] + _S1_RADIUS * u * inv[1]
        lo_c, hi_c = (a, b) if a <= b else (b, a)
        coords.append((lo_c + hi_c) / 2)
        rad += (hi_c - lo_c) / 2 / (1 << i)
    return RationalBall(CubePoint(tuple(coords)), max(rad, Fraction(1, 1 << (prec + 8))),
                        "closed")


def _s0_retract_enclose(x: CubePoint, prec: int) -> RationalBall:
    d0 = metric_eval(x, _S0_POINTS[0])
    d1 = metric_eval(x, _S0_POINTS[1])
    target = _S0_POINTS[0] if d0 <= d1 else _S0_POINTS[1]
    return RationalBall(target, Fraction(1, 1 << max(prec, 4)), "closed")


def make_anr(kind: str) -> AnrData:
    """Concrete AnrData: S1 is the circle of radius 1/4 at (1/2, 1/2) with an
    annular 512-ball neighborhood of radius 1/64, radial retraction with exact
    weighted Lipschitz bound 3, alpha = 1/8 and mu = alpha/3 = 1/24.  S0 is
    the two marked points with disjoint 1/16-balls and locally constant
    retraction, alpha = 1/4 (below the points' distance 1/2), mu = 1/16."""
    if kind == "S1":
        balls = tuple(RationalBall(p, _S1_ETA, "open") for p in _s1_ring())
        cov = Cover(balls)
        return AnrData("S1", cov, Fraction(1, 24), Fraction(1, 8), Fraction(3),
                       _s1_retract_enclose, BallIndex(balls),
                       circle_center=point(*_S1_CENTER), circle_radius=_S1_RADIUS,
                       tube_margin=_s1_tube_margin())
    if kind == "S0":
        balls = tuple(RationalBall(p, _S0_ETA, "open") for p in _S0_POINTS)
        cov = Cover(balls)
        return AnrData("S0", cov, Fraction(1, 16), Fraction(1, 4), Fraction(1),
                       _s0_retract_enclose, BallIndex(balls), points=_S0_POINTS)
    raise ValueError(f"unsupported ANR kind: {kind!r}")


def constant_index(a: AnrData, dim: int = 2) -> int:
    """The fixed constant map's enumeration index used by null-homotopy."""
    value = point("3/4", "1/2") if a.target_id == "S1" else _S0_POINTS[0]
    c = pl_constant(value, dim)
    need = max((dyadic_depth(x) for x in c.values[0]), default=0)
    return pl_index(c.refine(need))


# -- the numbering's semideciders ------------------------------------------------------

def _as_map(i, dim: int, codim: int = 2) -> PLMap:
    if isinstance(i, PLMap):
        return i
    return dense_pl_map(int(i), dim, codim)


def domain_semidecide(i, k: UpperName, a: AnrData, b: Budget) -> Decision:
    """Semidecide f_i(K) subset-of the ANR neighborhood from K's upper name
    (image enclosures checked against the neighborhood cover)."""
    f = _as_map(i, k.dim)
    v = subset_semidecide(image_pl(k, f), a.neighborhood, b)
    if v is Verdict.CONFIRMED:
        return Decision(Verdict.CONFIRMED, witness=f)
    return UNKNOWN


def _root_and_trail(k: UpperName) -> tuple[UpperName, tuple[RationalBall, ...]]:
    trail = tuple(k.meta.get("removed", ()))
    root = k
    while root.meta.get("kind") == "subtract" and isinstance(root.meta.get("base"), UpperName):
        root = root.meta["base"]
    return root, trail


def _ball_dropped(bb: RationalBall, u: RationalBall) -> bool:
    return metric_eval(bb.center, u.center) + bb.radius < u.radius


def _dom_check(f: PLMap, k: UpperName, a: AnrData, b: Budget) -> bool:
    """Same predicate as domain_semidecide, evaluated on the subtraction
    root's covers with trail-dropped balls skipped: the surviving root balls
    still cover K (possibly more, which only makes the test stricter, never
    unsound) and avoid materializing the dense boundary rings of subtracted
    stages.  An escape-witness cache on the root makes repeat failures cheap:
    once a cover ball's image enclosure is known to escape the neighborhood,
    any later query whose subtraction keeps that ball skips the stage."""
    root, trail = _root_and_trail(k)
    cache = root.meta.setdefault("_dom_escape", {})
    if b.stream_items <= 12:
        scan = range(b.stream_items - 1, -1, -1)
    else:
        # large budgets: the informative stages are the top two and a coarse
        # ladder; scanning every repeated tail stage would only repeat work
        scan = sorted({b.stream_items - 1, b.stream_items - 2, 10, 8, 6, 4, 2, 0},
                      reverse=True)
    for t in scan:
        hit = cache.get((id(f), t))
        if hit is not None and hit[0] is f:
            fb = hit[1]
            if not any(_ball_dropped(fb, u) for u in trail):
                continue  # the cached escaping ball survives: stage fails
        failing = None
        for cb in root.cover_at(t).balls:
            if trail and any(_ball_dropped(cb, u) for u in trail):
                continue
            ok = True
            for eb in f.enclose_ball(cb, 2 + min(t, 8)):
                if ball_inside_union_indexed(eb, a.ball_index, b.subdivision_depth) \
                        is not Verdict.CONFIRMED:
                    ok = False
                    break
            if not ok:
                failing = cb
                break
        if failing is None:
            return True
        cache[(id(f), t)] = (f, failing)
    return False


def _escape_confirm(f: PLMap, upper_a: UpperName, a: AnrData, b: Budget) -> bool:
    """Certify f(A) misses the closed neighborhood entirely (hence the index
    is outside dom, or A is empty and the class extends trivially — either
    way the no-extension piece's complement holds)."""
    img = image_pl(upper_a, f)
    for t in range(b.stream_items - 1, max(b.stream_items - 4, -1), -1):
        cover = img.cover_at(t)
        if not cover.balls:
            continue
        ok = True
        for eb in cover.balls:
            for ub in a.ball_index.near(eb.center, eb.radius):
                if not balls_disjoint(eb, ub):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return True
    return False


def _image_small_ball(k: UpperName, f: PLMap, b: Budget) -> Optional[RationalBall]:
    """A ball containing f(K), from a mid-resolution cover (None if empty)."""
    t = min(max(b.stream_items - 1, 0), 5)
    balls = image_pl(k, f).cover_at(t).balls
    if not balls:
        return None
    c0 = balls[0].center
    rad = max(metric_eval(c0, eb.center) + eb.radius for eb in balls)
    return RationalBall(c0, rad, "open")


# ---- witness builders ------------------------------------------------------------

@dataclass(frozen=True)
class _Witness:
    mapping: PLMap
    tag: str
    dom_check: Optional[Callable[[UpperName, AnrData, Budget], bool]] = None


_RAY_MIN_DEPTH = 6       # the analytic ray route needs at least this depth
_SNAP_ORDER = 9          # vertex snapping order for constructed witnesses


def _tube_dom_check(w: PLMap, kx: UpperName, a: AnrData, b: Budget,
                    stages: tuple[int, ...]) -> bool:
    """Certify w(K) lies inside the ring neighborhood via the radial route:
    enclose w over pieces of K's cover boxes and bound each piece's Euclidean
    distance band to the target circle.  Distance to a full circle has no
    tangential component, so elongated near-circular image pieces pass where
    a single bounding ball would overflow the tube.

    Subtractions are scanned through their root cover, skipping balls the
    removal trail drops: the surviving root balls still cover K (and possibly
    more, which only makes the test harder, never unsound) while avoiding the
    dense boundary rings of the subtracted stages."""
    if a.tube_margin is None or a.circle_center is None or w.codim != 2:
        return False
    root, trail = _root_and_trail(kx)
    cc = a.circle_center.coords
    for t in stages:
        if 0 <= t < b.stream_items and _tube_stage(
                w, root.cover_at(t), cc, a.circle_radius, a.tube_margin,
                2 * b.subdivision_depth, trail):
            return True
    return False


def _tube_stage(w: PLMap, cover: Cover, cc: tuple, rho: Fraction,
                margin: Fraction, depth: int,
                trail: tuple[RationalBall, ...] = ()) -> bool:
    nine8 = Fraction(9, 8)  # |.|_w <= 9/8 |.|_2 in the plane
    for cb in cover.balls:
        if any(_ball_dropped(cb, u) for u in trail):
            continue
        bx0 = tuple((max(ZERO, lo), min(ONE, hi)) for lo, hi in box_of_ball(cb))
        stack = [(bx0, depth)]
        while stack:
            bx, dep = stack.pop()
            v = w.evaluate(box_center(bx))
            sc = w._local_component_slopes(bx)
            half = [ZERO, ZERO]
            foot = [ZERO] * len(bx)
            for j, (lo, hi) in enumerate(bx):
                wd = hi - lo
                row = sc[j]
                half[0] += row[0] * wd / 2
                half[1] += row[1] * wd / 2
                foot[j] = (row[0] + row[1] / 2) * wd
            d2lo = ZERO
            d2hi = ZERO
            for i in (0, 1):
                lo_i = v[i] - half[i] - cc[i]
                hi_i = v[i] + half[i] - cc[i]
                if lo_i > 0:
                    d2lo += lo_i * lo_i
                elif hi_i < 0:
                    d2lo += hi_i * hi_i
                d2hi += max(lo_i * lo_i, hi_i * hi_i)
            clo = sqrt_bounds(d2lo, 16)[0] if d2lo > 0 else ZERO
            chi = sqrt_bounds(d2hi, 16)[1]
            if nine8 * max(chi - rho, rho - clo) < margin:
                continue
            if dep <= 0:
                return False
            j_split = max(range(len(bx)), key=foot.__getitem__)
            if foot[j_split] == 0:
                return False  # constant over the box: splitting cannot help
            lo, hi = bx[j_split]
            mid = (lo + hi) / 2
            stack.append((bx[:j_split] + ((lo, mid),) + bx[j_split + 1:], dep - 1))
            stack.append((bx[:j_split] + ((mid, hi),) + bx[j_split + 1:], dep - 1))
    return True


def _nearest_ring_index(p: CubePoint) -> int:
    ring = _s1_ring()
    best, best_d = 0, None
    for i, q in enumerate(ring):
        d = metric_eval(p, q)
        if best_d is None or d < best_d:
            best, best_d = i, d
    return best


def _rotation_map(ki: int, kj: int, dim: int) -> PLMap:
    """A cylinder map (x, tau) -> ring point, rotating the short way from ring
    index ki to kj as tau goes 0 to 1 (constant in x)."""
    ring = _s1_ring()
    size = len(ring)
    delta = (kj - ki) % size
    if delta > size // 2:
        delta -= size
    order = 3
    n = 1 << order
    slices = [snap_point(ring[(ki + (delta * j + (n // 2)) // n) % size], _SNAP_ORDER)
              for j in range(n + 1)]
    n1 = n + 1
    vals = []
    for ints in iproduct(range(n1), repeat=dim + 1):
        vals.append(slices[ints[-1]].coords)
    return PLMap(order, dim + 1, 2, vals)


def _cylinder_witnesses(meta: dict, a: AnrData, b: Budget) -> list[_Witness]:
    if a.target_id != "S1":
        return []
    f_i, f_j = meta["end_maps"]
    base = meta["base"]
    bi = _image_small_ball(base, f_i, b)
    bj = _image_small_ball(base, f_j, b)
    if bi is None or bj is None:
        return []
    if bi.radius > Fraction(1, 32) or bj.radius > Fraction(1, 32):
        return []
    ki = _nearest_ring_index(bi.center)
    kj = _nearest_ring_index(bj.center)
    w = _rotation_map(ki, kj, base.dim)

    def check(kx: UpperName, anr: AnrData, bb: Budget) -> bool:
        stages = tuple(dict.fromkeys(
            t for t in (min(bb.stream_items - 1, 4), min(bb.stream_items - 1, 5))
            if t >= 0))
        return _tube_dom_check(w, kx, anr, bb, stages)

    return [_Witness(w, "rotation path", dom_check=check)]


def _pick_ray_eye(geom: tuple, u: RationalBall) -> Optional[CubePoint]:
    """A rational eye point q for the ray-exit witness: inside the removed
    ball and strictly interior to the region, pulled toward the region's
    center when the ball's own center does not qualify."""
    p0 = u.center
    if geom[0] == "disk":
        c = (geom[1], geom[2])
        rho2 = geom[3] * geom[3]
        def interior(q):
            dx, dy = q[0] - c[0], q[1] - c[1]
            return dx * dx + dy * dy < rho2
    else:  # square
        c = (Fraction(1, 2), Fraction(1, 2))
        def interior(q):
            return all(ZERO < x < ONE for x in q)
    if interior(p0.coords):
        return p0
    dc = metric_eval(p0, CubePoint(c))
    for k in (6, 5, 4, 3):
        lam = Fraction(k, 8)
        q = tuple(cc + lam * (pc - cc) for cc, pc in zip(c, p0.coords))
        if interior(q) and (1 - lam) * dc < u.radius:
            return CubePoint(q)
    return None


def _exit_box(geom: tuple, q: CubePoint, box: Box, prec: int) -> Optional[Box]:
    """Exact interval enclosure of the ray-exit point (rays from q through the
    box, exiting the region's boundary); None when the box is too close to q
    or the geometry degenerates."""
    qx, qy = q.coords
    wx = (box[0][0] - qx, box[0][1] - qx)
    wy = (box[1][0] - qy, box[1][1] - qy)
    if geom[0] == "disk":
        cx, cy, rr = geom[1], geom[2], geom[3]
        a = _iadd(_imul(wx, wx), _imul(wy, wy))
        if a[0] <= 0:
            return None
        ex, ey = qx - cx, qy - cy
        gamma = ex * ex + ey * ey - rr * rr
        if gamma >= 0:
            return None
        bq = _imul(_iv(2), _iadd(_imul(wx, _iv(ex)), _imul(wy, _iv(ey))))
        disc = _isub(_imul(bq, bq), _imul(_iv(4 * gamma), a))
        if disc[0] <= 0:
            return None
        root = _isqrt_iv(disc, prec)
        s = _idiv_pos(_isub(root, bq), _imul(_iv(2), a))
    else:  # square: exit on the boundary of [0,1]^2
        los, his = [], []
        for q_j, w in ((qx, wx), (qy, wy)):
            if w[0] > 0:
                los.append((1 - q_j) / w[1])
                his.append((1 - q_j) / w[0])
            elif w[1] < 0:
                los.append(q_j / (-w[0]))
                his.append(q_j / (-w[1]))
            else:
                # the direction may be near-parallel to this axis: it still
                # lower-bounds the exit time by the faster of its two sides
                cand = []
                if w[1] > 0:
                    cand.append((1 - q_j) / w[1])
                if w[0] < 0:
                    cand.append(q_j / (-w[0]))
                if cand:
                    los.append(min(cand))
        if not his:
            return None
        s = (min(los), min(his))
        if s[0] <= 0:
            return None
    ex_x = _iadd(_iv(qx), _imul(s, wx))
    ex_y = _iadd(_iv(qy), _imul(s, wy))
    return (
        (max(ZERO, ex_x[0]), min(ONE, ex_x[1])),
        (max(ZERO, ex_y[0]), min(ONE, ex_y[1])),
    )


# exit enclosures wider than this (weighted diameter) mark a grid vertex as
# unusable; such vertices only occur within a hair of the eye point
_RAY_ERR = Fraction(1, 1 << 14)
_RAY_PREC = 30


@lru_cache(maxsize=8)
def _ray_witness(f_i: PLMap, geom: tuple, q: CubePoint,
                 u: RationalBall) -> Optional[_Witness]:
    """The tailored extension witness snap(f_i ∘ h_q), where h_q sends x to
    the exit of the ray from q through x on the region's boundary.  On the
    boundary h_q is the identity, so the witness tracks f_i there, and its
    values everywhere are snapped images of boundary points.

    The domain check runs the radial tube test on stages coarse enough that
    the relevant cover boxes stay clear of the eye (vertices at the eye have
    no exit and carry unusable values)."""
    m = 7  # coarser grids leave too much interpolation error against mu
    n = 1 << m
    vals = []
    for ints in iproduct(range(n + 1), repeat=2):
        v = (Fraction(ints[0], n), Fraction(ints[1], n))
        ev = _exit_box(geom, q, ((v[0], v[0]), (v[1], v[1])), _RAY_PREC)
        if ev is not None and (ev[0][1] - ev[0][0]) + (ev[1][1] - ev[1][0]) / 2 <= _RAY_ERR:
            mid = ((ev[0][0] + ev[0][1]) / 2, (ev[1][0] + ev[1][1]) / 2)
            img = f_i.evaluate(mid)
        else:
            img = f_i.evaluate(v)  # unusable vertex right at the eye
        vals.append(tuple(snap_dyadic(x, _SNAP_ORDER) for x in img))
    w_map = PLMap(m, 2, 2, vals)
    try:
        rdep = dyadic_depth(u.radius)
    except ValueError:
        rdep = 4

    def check(kx: UpperName, anr: AnrData, b: Budget) -> bool:
        stages = tuple(dict.fromkeys(
            t for t in (rdep + 3, min(b.stream_items - 1, rdep + 4)) if t >= 0))
        return _tube_dom_check(w_map, kx, anr, b, stages)

    return _Witness(w_map, "ray exit", dom_check=check)


def _ray_witnesses(f_i: PLMap, p: PairName, a: AnrData) -> list[_Witness]:
    if a.target_id != "S1" or p.dim != 2:
        return []
    meta = p.upper_x.meta
    geom = meta.get("geom")
    removed = tuple(meta.get("removed", ()))
    if geom is None or not removed or geom[0] not in ("disk", "square"):
        return []
    u = removed[-1]
    q = _pick_ray_eye(geom, u)
    if q is None:
        return []
    w = _ray_witness(f_i, geom, q, u)
    return [w] if w is not None else []


def _constant_witnesses(f_i: PLMap, p: PairName, a: AnrData, b: Budget) -> list[_Witness]:
    """Constant candidates, tried only when f_i's image over A is verifiably
    small (a constant can only win then, and the estimate must stay cheap)."""
    root_a, _ = _root_and_trail(p.upper_a)
    est_cache = root_a.meta.setdefault("_img_ball", {})
    key = id(f_i)
    if key not in est_cache:
        est_cache[key] = (f_i, _image_small_ball(root_a, f_i, b))
    est = est_cache[key][1]
    small = est is not None and est.radius <= Fraction(1, 16)
    if not small and p.upper_a is not root_a:
        t = min(max(b.stream_items - 1, 0), 4)
        if len(p.upper_a.cover_at(t).balls) <= 40:
            direct = _image_small_ball(p.upper_a, f_i, b)
            small = direct is not None and direct.radius <= Fraction(1, 16)
            est = direct if small else est
    if not small:
        return []
    out = []
    if a.target_id == "S0":
        values = list(a.points)
    else:
        values = [snap_point(_s1_ring()[k], 7) for k in range(0, 512, 64)]
        values.append(snap_point(est.center, 7))
    seen = set()
    for v in values:
        if v.coords in seen:
            continue
        seen.add(v.coords)
        out.append(_Witness(pl_constant(v, p.dim), f"constant at {v.coords}"))
    return out


def _retract_rounding_witness(f_i: PLMap, p: PairName, a: AnrData) -> list[_Witness]:
    """For the two-point target: round f_i through the locally constant
    retraction at every grid vertex.  The result is exactly S0-valued, so it
    certifies extensions over disconnected remainders where each part tracks
    one marked point."""
    if a.target_id != "S0" or p.dim > MAX_DIM:
        return []
    m = min(6, max(5, f_i.grid_order + 2))
    n = 1 << m
    vals = []
    for ints in iproduct(range(n + 1), repeat=p.dim):
        v = CubePoint(tuple(Fraction(i, n) for i in ints))
        img = f_i.evaluate(v)
        d0 = _wdist(img, a.points[0].coords)
        d1 = _wdist(img, a.points[1].coords)
        vals.append((a.points[0] if d0 <= d1 else a.points[1]).coords)
    out = [_Witness(PLMap(m, p.dim, 2, vals), "retract rounding")]
    out.extend(_split_rounding_witnesses(p, a))
    return out


def _split_rounding_witnesses(p: PairName, a: AnrData) -> list[_Witness]:
    """Locally constant candidates whose flip sits at the last removed ball's
    axis-0 coordinate rather than wherever f_i happens to cross the midline:
    a removal that disconnects the remainder leaves each part tracking one
    marked point, and only the flip cells inside the dropped region are ever
    scanned away by the domain check."""
    removed = tuple(p.upper_x.meta.get("removed", ()))
    if not removed:
        return []
    cut = removed[-1].center.coords[0]
    m = 7
    n = 1 << m
    out = []
    for lo, hi in ((a.points[0], a.points[1]), (a.points[1], a.points[0])):
        vals = [(lo if Fraction(ints[0], n) < cut else hi).coords
                for ints in iproduct(range(n + 1), repeat=p.dim)]
        out.append(_Witness(PLMap(m, p.dim, 2, vals),
                            f"retract rounding (split at {cut})"))
    return out


def _witness_schedule(f_i: PLMap, p: PairName, a: AnrData, b: Budget) -> Iterator[_Witness]:
    yield _Witness(f_i, "same map")
    meta = p.upper_x.meta
    if meta.get("kind") == "cylinder":
        yield from _cylinder_witnesses(meta, a, b)
    if b.subdivision_depth >= _RAY_MIN_DEPTH:
        yield from _ray_witnesses(f_i, p, a)
    yield from _constant_witnesses(f_i, p, a, b)
    if b.subdivision_depth >= _RAY_MIN_DEPTH:
        yield from _retract_rounding_witness(f_i, p, a)


def extension_semidecide(i, p: PairName, a: AnrData, b: Budget) -> Decision:
    """Semidecide: the class of r∘f_i on A extends continuously over X.

    Searches for a witness j with f_j(X) inside the neighborhood and
    sup_A d(f_j, f_i) < mu; a found witness is returned in the decision.
    The schedule tries f_i itself, metadata-guided candidates (rotation paths
    on cylinders, ray-exit composites on punctured regions), constants, and
    retraction roundings; every acceptance is checked exactly."""
    f_i = _as_map(i, p.dim)
    meta = p.upper_x.meta
    if meta.get("kind") == "cylinder" and "end_maps" in meta and "base" in meta:
        # A is the pair of end slices: check the end maps over the base
        # instead, avoiding enclosures dragged along the cylinder axis
        fe, ge = meta["end_maps"]
        if not (_dom_check(fe, meta["base"], a, b)
                and _dom_check(ge, meta["base"], a, b)):
            return UNKNOWN
    elif not _dom_check(f_i, p.upper_a, a, b):
        return UNKNOWN  # i must itself be in dom over A for the class to exist
    sup_b = Budget(b.stream_items, min(b.subdivision_depth, 4))
    for w in _witness_schedule(f_i, p, a, b):
        if sup_dist_semidecide(w.mapping, f_i, p.upper_a, a.mu, sup_b) is not Verdict.CONFIRMED:
            continue
        if w.dom_check is not None:
            if not w.dom_check(p.upper_x, a, b):
                continue
        elif not _dom_check(w.mapping, p.upper_x, a, b):
            continue
        return Decision(Verdict.CONFIRMED, witness=w.mapping, detail=w.tag)
    return UNKNOWN


@lru_cache(maxsize=1)
def _unit_interval_upper() -> UpperName:
    def item(t: int) -> Cover:
        n = 1 << min(t, 10)
        r = Fraction(1, n)
        return Cover(tuple(RationalBall(CubePoint((Fraction(j, n),)), r, "open")
                           for j in range(n + 1)))
    return UpperName(item, 1, {"kind": "interval"})


_BLEND_SNAP = 6  # blend values snap this fine so the blend tracks the chord


def paired_map(f_i: PLMap, f_j: PLMap) -> PLMap:
    """The canonical cylinder map: f_i on the bottom slice, f_j on the top,
    dyadically snapped linear blend in between (ends are exact)."""
    if f_i.dim != f_j.dim or f_i.codim != f_j.codim:
        raise ValueError("map shape mismatch")
    if f_i.dim + 1 > MAX_DIM:
        raise ValueError("cylinder exceeds the ambient dimension cap")
    m = max(f_i.grid_order, f_j.grid_order, 1)
    n = 1 << m
    fi, fj = f_i.refine(m), f_j.refine(m)
    snap = max(m, _BLEND_SNAP)
    n1 = n + 1
    vals = []
    for ints in iproduct(range(n1), repeat=f_i.dim + 1):
        x_idx = 0
        for v in ints[:-1]:
            x_idx = x_idx * n1 + v
        tau = Fraction(ints[-1], n)
        a_val, b_val = fi.values[x_idx], fj.values[x_idx]
        if tau == 0:
            vals.append(a_val)
        elif tau == 1:
            vals.append(b_val)
        else:
            vals.append(tuple(snap_dyadic((1 - tau) * av + tau * bv, snap)
                              for av, bv in zip(a_val, b_val)))
    return PLMap(m, f_i.dim + 1, f_i.codim, vals)


def paired_index(i: int, j: int, dim: int = 2) -> int:
    """Enumeration index of the paired cylinder map for two indices."""
    pm = paired_map(dense_pl_map(i, dim), dense_pl_map(j, dim))
    need = max(pm.grid_order,
               max(dyadic_depth(c) for row in pm.values for c in row))
    return pl_index(pm.refine(need))


def class_equal_semidecide(i, j, k: UpperName, a: AnrData, b: Budget) -> Decision:
    """Semidecide equality of the classes of indices i and j on the named set:
    the paired map on the cylinder over K must extend from the two end slices
    to the whole cylinder (a homotopy is exactly such an extension)."""
    f_i = _as_map(i, k.dim)
    f_j = _as_map(j, k.dim)
    if f_i == f_j:
        return Decision(Verdict.CONFIRMED, witness=f_i, detail="identical representatives")
    if k.dim + 1 > MAX_DIM:
        raise ValueError("cylinder exceeds the ambient dimension cap")
    cyl = product(k, _unit_interval_upper())
    cyl.meta.update(kind="cylinder", base=k, end_maps=(f_i, f_j))
    ends = union_name(slice_name(k, 0), slice_name(k, 1))
    phi = paired_map(f_i, f_j)
    d = extension_semidecide(phi, PairName(cyl, ends), a, b)
    if d.verdict is Verdict.CONFIRMED:
        return Decision(Verdict.CONFIRMED, witness=d.witness,
                        detail=f"cylinder extension: {d.detail}")
    return UNKNOWN


def null_homotopy_semidecide(i, k: UpperName, a: AnrData, b: Budget) -> Decision:
    """class_equal against the fixed constant index."""
    const = pl_constant(point("3/4", "1/2") if a.target_id == "S1" else _S0_POINTS[0],
                        k.dim)
    return class_equal_semidecide(i, const, k, a, b)


def en_piece(i, a: AnrData) -> PiPiece:
    """The no-extension piece for class i: holds on pairs (X, A) where the
    class of r∘f_i on A has no continuous extension to X.  The complement
    semidecider confirms when the image of A escapes the neighborhood
    entirely, or when the extension search succeeds."""
    if isinstance(i, PLMap):
        label = f"order-{i.grid_order} map"
    else:
        label = str(i) if i < 10 ** 9 else f"~{i % 10 ** 9}"

    def complement(p: PairName, b: Budget) -> Decision:
        f = _as_map(i, p.dim)
        if _escape_confirm(f, p.upper_a, a, b):
            return Decision(Verdict.CONFIRMED, detail="image avoids the neighborhood")
        d = extension_semidecide(f, p, a, b)
        if d.verdict is Verdict.CONFIRMED:
            return Decision(Verdict.CONFIRMED, witness=d.witness,
                            detail=f"extension: {d.detail}")
        return UNKNOWN

    return PiPiece(f"no-extension-{a.target_id}-{label}", complement)


# -- cones -------------------------------------------------------------------------

def _cone_name(k: UpperName) -> UpperName:
    """Upper name of {(lam, lam*x) : lam in [0,1], x in K} (apex always kept).

    A base ball B(c, r) crossed with a lam-cell [m-h, m+h] is transported
    into the ball around (m, m*c) of radius h + (m+h)*r/2 + h*|c|_w/2, an
    exact bound for the displayed map."""
    if k.dim + 1 > MAX_DIM:
        raise ValueError("cone exceeds the ambient dimension cap")
    apex = CubePoint((ZERO,) * (k.dim + 1))

    def item(t: int) -> Cover:
        lam_n = 1 << min(t, 5)
        h = Fraction(1, 2 * lam_n)
        out = [RationalBall(apex, Fraction(1, 1 << min(t, 10)), "open")]
        for j in range(lam_n):
            m = Fraction(2 * j + 1, 2 * lam_n)
            for bb in k.cover_at(t):
                cnorm = _wdist(bb.center.coords, (ZERO,) * k.dim)
                r = h + (m + h) * bb.radius / 2 + h * cnorm / 2
                coords = (m,) + tuple(m * c for c in bb.center.coords)
                out.append(RationalBall(CubePoint(coords), r, "open"))
        return Cover(tuple(out))

    return UpperName(item, k.dim + 1, {"kind": "cone", "base": k})


def cone_pair_name(p: PairName) -> PairName:
    """The cone pair (Cone X, X ∪ Cone A) in dimension d+1: X sits at the
    lam = 1 slice, covers are transported by (lam, x) -> (lam, lam*x)."""
    cone_x = _cone_name(p.upper_x)
    base_slice = slice_name(p.upper_x, 1, prepend=True)
    a_part = union_name(base_slice, _cone_name(p.upper_a))
    return PairName(cone_x, a_part)


# -- resolution-scale surjectivity ---------------------------------------------------

def pl_surjective_check(f: PLMap, g, resolution: int) -> Optional[RationalBall]:
    """Check that every canonical ball of radius 2^-resolution meeting the
    set also meets f(set).  Returns None when confirmed, or a witness ball
    certified (via image enclosures) to be missed by the image.

    `g` provides the exact ground truth: `g.dist_cmp(point, q)` compares the
    distance to the set with q, and `g.canonical_upper` names the set."""
    if resolution < 0 or resolution > 6:
        raise ValueError("resolution must be 0..6")
    dim = g.canonical_upper.dim
    radius = Fraction(1, 1 << resolution)
    sample_imgs: dict[int, list[tuple[CubePoint, tuple[Fraction, ...]]]] = {}

    def images(order: int):
        if order not in sample_imgs:
            n = 1 << order
            pts = []
            for ints in iproduct(range(n + 1), repeat=dim):
                pt = CubePoint(tuple(Fraction(v, n) for v in ints))
                if g.dist_cmp(pt, ZERO) == 0:
                    pts.append((pt, f.evaluate(pt)))
            sample_imgs[order] = pts
        return sample_imgs[order]

    res_n = 1 << resolution
    img_name = None
    for ints in iproduct(range(res_n + 1), repeat=dim):
        center = CubePoint(tuple(Fraction(v, res_n) for v in ints))
        if g.dist_cmp(center, radius) >= 0:
            continue  # the ball does not meet the set
        hit = False
        for order in (resolution + 1, resolution + 2, resolution + 3):
            for _, y in images(order):
                if _wdist(y, center.coords) < radius:
                    hit = True
                    break
            if hit:
                break
        if hit:
            continue
        ball = RationalBall(center, radius, "open")
        if img_name is None:
            img_name = image_pl(g.canonical_upper, f)
        if disjoint_closed_semidecide(img_name, ball,
                                      Budget(resolution + 6, 8)) is Verdict.CONFIRMED:
            return ball
        raise RuntimeError("surjectivity undecided at this resolution")
    return None
