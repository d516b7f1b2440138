"""Minimality-driven reconstruction: from upper names to lower names.

Given a pair name and a trusted minimality certificate, the engine recovers
lower Vietoris information: an open ball U meets the set exactly when the
subtracted pair (X\\U, A\\U) falls out of the certified property, and falling
out is semidecidable through the property's complement semidecider.  The
emitted ball stream is therefore sound whenever the certificate is truthful,
and complete in the budget limit.

The module also houses the tri-state renderer (inside / outside / unknown
cells certified by lower emissions and upper disjointness respectively), the
exact oracle verifier used by the test batteries, and PGM/SVG/log writers.

Certificates are trusted, not checked: an untruthful certificate (wrong
piece, wrong advice) voids the soundness contract, and the verifier exists
precisely to expose that failure mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct
from multiprocessing import get_context
from typing import Iterator, Optional, Sequence

from .geometry import Cover, CubePoint, RationalBall, Verdict, frac, metric_eval
from .invariants import Decision, PiPiece, SigmaFamily
from .names import (
    Budget,
    LowerName,
    PairName,
    UpperName,
    disjoint_closed_semidecide,
    format_ball,
    subtract_pair,
)

# -- certificates -------------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    """Trusted claim that the named pair is minimal for a property: either a
    single co-semidecidable piece, or a uniform family plus the index
    (advice) of the piece that holds.  Exactly one of the two forms."""

    piece: Optional[PiPiece] = None
    family: Optional[SigmaFamily] = None
    advice: Optional[int] = None

    def __post_init__(self) -> None:
        if self.piece is not None:
            if self.family is not None or self.advice is not None:
                raise ValueError("certificate is either a piece or family+advice")
        else:
            if self.family is None or self.advice is None:
                raise ValueError("family certificates need an advice index")
            if self.advice < 0:
                raise ValueError("advice must be >= 0")

    @property
    def active_piece(self) -> PiPiece:
        return self.piece if self.piece is not None else self.family.piece(self.advice)


# -- candidate enumeration ----------------------------------------------------------

def lattice_balls(dim: int, level: int) -> Iterator[RationalBall]:
    """The round dyadic balls of one level: radius 2^-level, centers on the
    2^-level grid, in lexicographic center order.  Level by level this is the
    engine's fair breadth-first enumeration (a basis of the cube)."""
    n = 1 << level
    r = Fraction(1, n)
    for ints in iproduct(range(n + 1), repeat=dim):
        yield RationalBall(CubePoint(tuple(Fraction(i, n) for i in ints)), r, "open")


def _candidates(dim: int, levels: int) -> list[RationalBall]:
    out: list[RationalBall] = []
    for lv in range(levels + 1):
        out.extend(lattice_balls(dim, lv))
    return out


# -- the engine ---------------------------------------------------------------------

# state handed to forked workers (fork shares memory; names hold closures and
# cannot be pickled, so the fork start method is required)
_FORK_STATE: dict = {}


def _decide_ball(p: PairName, piece: PiPiece, u: RationalBall, b: Budget) -> bool:
    return piece.complement_semidecide(subtract_pair(p, u), b).confirmed


def _fork_decide(idx: int) -> bool:
    st = _FORK_STATE
    u = st["cands"][idx]
    if disjoint_closed_semidecide(st["p"].upper_x, u, st["b"]) is Verdict.CONFIRMED:
        return st["rep"]
    return _decide_ball(st["p"], st["piece"], u, st["b"])


def _emissions(p: PairName, piece: PiPiece, b: Budget, levels: int,
               workers: Optional[int]) -> tuple[RationalBall, ...]:
    """One full-budget complement query per candidate ball, in canonical
    order.  Because the semideciders are budget-monotone, a single pass at
    the full budget decides everything any dovetailed slicing of the same
    budget could, so the dovetailing is collapsed into this pass.

    Fast path: when the candidate's closure is certified disjoint from X,
    subtracting it drops nothing from either name (every canonical cover
    ball meets the set), so the query must equal the one-time decision on
    the untouched pair and is not recomputed."""
    cands = _candidates(p.dim, levels)
    rep = piece.complement_semidecide(p, b).confirmed
    if workers and workers > 1:
        _FORK_STATE.update(p=p, piece=piece, b=b, cands=cands, rep=rep)
        try:
            with get_context("fork").Pool(workers) as pool:
                flags = pool.map(_fork_decide, range(len(cands)),
                                 chunksize=max(1, len(cands) // (4 * workers)))
        finally:
            _FORK_STATE.clear()
    else:
        flags = []
        for u in cands:
            if disjoint_closed_semidecide(p.upper_x, u, b) is Verdict.CONFIRMED:
                flags.append(rep)
            else:
                flags.append(_decide_ball(p, piece, u, b))
    return tuple(u for u, ok in zip(cands, flags) if ok)


def reconstruct_lower(p: PairName, c: Certificate, b: Budget,
                      levels: Optional[int] = None,
                      workers: Optional[int] = None) -> LowerName:
    """Recover a lower name from an upper pair name and a minimality
    certificate.

    For each candidate ball U (breadth-first round dyadic balls through
    `levels`, default the budget's subdivision depth), the certified
    property's complement is semidecided on (X\\U, A\\U); confirmations are
    emitted in canonical order.  Under a truthful certificate every emission
    meets the set; wrong certificates void that guarantee.

    The result carries its complete finite emission tuple in
    meta["emitted"]; the stream itself repeats the emissions cyclically
    (every item meets the set, so repetition keeps the stream total without
    weakening its information).  Parallel workers fork, decide candidate
    balls independently, and merge in canonical order, so the output is
    scheduler-independent.
    """
    emitted = _emissions(p, c.active_piece, b, b.subdivision_depth if levels is None else levels,
                         workers)

    def item(t: int) -> RationalBall:
        if not emitted:
            raise ValueError("no emissions at this budget; the stream is empty")
        return emitted[t % len(emitted)]

    return LowerName(item, p.dim, {"kind": "reconstructed", "emitted": emitted})


def reconstruct_with_advice(p: PairName, f: SigmaFamily, n: int, b: Budget,
                            levels: Optional[int] = None,
                            workers: Optional[int] = None) -> LowerName:
    """reconstruct_lower with the advice-indexed piece of the family."""
    return reconstruct_lower(p, Certificate(family=f, advice=n), b, levels, workers)


def advice_reject_stream(p: PairName, f: SigmaFamily, b: Budget) -> Iterator[int]:
    """Enumerate indices n whose piece provably does NOT hold for the pair
    (the complement semidecider confirms on the full pair).  Sound always;
    complete in the budget limit.  The budget bounds both the indices tried
    and each query."""
    for n in range(b.stream_items):
        if f.piece(n).complement_semidecide(p, b).confirmed:
            yield n


# -- rasters ------------------------------------------------------------------------

OUTSIDE_CELL = 0
UNKNOWN_CELL = 128
INSIDE_CELL = 255


@dataclass(frozen=True)
class Raster:
    """2^k-per-axis tri-state grid.  cells[iy][ix] covers the square
    [ix*2^-k, (ix+1)*2^-k] x [iy*2^-k, (iy+1)*2^-k] (row 0 at the bottom);
    values are the PGM gray levels 0 (outside), 128 (unknown), 255 (inside).
    Inside cells were certified by an emitted lower ball, outside cells by
    an upper-name disjointness certificate; a cell is never both (inside is
    decided first and outside only attempted on the remainder)."""

    resolution: int
    cells: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = 1 << self.resolution
        if len(self.cells) != n or any(len(row) != n for row in self.cells):
            raise ValueError("raster grid size mismatch")

    @property
    def side(self) -> int:
        return 1 << self.resolution

    def counts(self) -> dict[int, int]:
        out = {OUTSIDE_CELL: 0, UNKNOWN_CELL: 0, INSIDE_CELL: 0}
        for row in self.cells:
            for v in row:
                out[v] += 1
        return out

    def decided_fraction(self) -> Fraction:
        c = self.counts()
        total = self.side * self.side
        return Fraction(c[OUTSIDE_CELL] + c[INSIDE_CELL], total)


def cell_center(k: int, ix: int, iy: int) -> CubePoint:
    n = 1 << k
    return CubePoint((Fraction(2 * ix + 1, 2 * n), Fraction(2 * iy + 1, 2 * n)))


def cell_circumradius(k: int) -> Fraction:
    """Exact weighted circumradius of a 2-D grid cell of side 2^-k."""
    return Fraction(3, 1 << (k + 2))


def cell_inflation(k: int) -> Fraction:
    """Painting tolerance: an emitted ball within this closed weighted
    distance of the cell center certifies set points near the cell."""
    return Fraction(3, 1 << k)


def _paint_balls(lower: LowerName, k: int, b: Budget) -> list[RationalBall]:
    fin = lower.meta.get("emitted")
    if fin is not None:
        return list(fin)
    return lower.balls(Budget(b.stream_items << k, b.subdivision_depth))


def render(upper: UpperName, lower: LowerName, k: int, b: Budget) -> Raster:
    """Tri-state raster of the named set at resolution k.

    Per cell: inside_confirmed when some emitted lower ball lies within the
    cell's closed inflation (the ball meets the set, so the set comes within
    3*2^-k of the cell center); otherwise outside_confirmed when the upper
    name certifies closed disjointness from the cell's closed circumball;
    otherwise unknown.  Reconstructed lower names expose their complete
    finite emission set; other lower names contribute a budget-scaled prefix
    (stream_items * 2^k balls).  Deterministic given budgets."""
    if k < 1:
        raise ValueError("resolution must be >= 1")
    if upper.dim != 2 or lower.dim != 2:
        raise ValueError("rasters are 2-D; slice higher-dimensional sets first")
    n = 1 << k
    inflate = cell_inflation(k)
    circum = cell_circumradius(k)
    paint = []
    seen = set()
    for pb in _paint_balls(lower, k, b):
        key = (pb.center.coords, pb.radius)
        if key not in seen:
            seen.add(key)
            paint.append(pb)
    rows = []
    for iy in range(n):
        row = []
        for ix in range(n):
            center = cell_center(k, ix, iy)
            if any(metric_eval(center, pb.center) + pb.radius <= inflate for pb in paint):
                row.append(INSIDE_CELL)
            elif disjoint_closed_semidecide(
                    upper, RationalBall(center, circum, "closed"), b) is Verdict.CONFIRMED:
                row.append(OUTSIDE_CELL)
            else:
                row.append(UNKNOWN_CELL)
        rows.append(tuple(row))
    return Raster(k, tuple(rows))


# -- verification -------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyReport:
    misclassified: tuple[tuple[int, int], ...]   # (ix, iy) of wrong decided cells
    coverage: Fraction                           # decided fraction

    @property
    def clean(self) -> bool:
        return not self.misclassified


def verify_against_oracle(r: Raster, g) -> VerifyReport:
    """Check every decided cell against the exact margin oracle of a ground
    truth set `g` (anything with `dimension` and `membership_margin_oracle`).

    An inside cell is wrong exactly when the set stays farther than the
    painting tolerance from its center; an outside cell is wrong exactly
    when the set reaches into its closed circumball.  Both checks are the
    oracle's outside_by_q answer at the matching exact radius, so verified
    rasters agree with the renderer's own certificates."""
    if g.dimension != 2:
        raise ValueError("oracle verification is 2-D")
    k = r.resolution
    inflate = cell_inflation(k)
    circum = cell_circumradius(k)
    bad = []
    decided = 0
    for iy in range(r.side):
        for ix in range(r.side):
            v = r.cells[iy][ix]
            if v == UNKNOWN_CELL:
                continue
            decided += 1
            center = cell_center(k, ix, iy)
            if v == INSIDE_CELL:
                if g.membership_margin_oracle(center, inflate) == "outside_by_q":
                    bad.append((ix, iy))
            else:
                if g.membership_margin_oracle(center, circum) != "outside_by_q":
                    bad.append((ix, iy))
    return VerifyReport(tuple(bad), Fraction(decided, r.side * r.side))


# -- writers ------------------------------------------------------------------------

def raster_to_pgm(r: Raster) -> str:
    """Plain PGM (P2), one raster row per line, top image row = top of the
    cube (cells row iy = side-1)."""
    lines = ["P2", f"{r.side} {r.side}", "255"]
    for iy in range(r.side - 1, -1, -1):
        lines.append(" ".join(str(v) for v in r.cells[iy]))
    return "\n".join(lines) + "\n"


_SVG_FILL = {OUTSIDE_CELL: "#000000", UNKNOWN_CELL: "#808080", INSIDE_CELL: "#ffffff"}


def raster_to_svg(r: Raster, scale: int = 8) -> str:
    """One rect per cell, y flipped so the cube's y axis points up."""
    side = r.side * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" '
           f'viewBox="0 0 {side} {side}">']
    for iy in range(r.side):
        for ix in range(r.side):
            fill = _SVG_FILL[r.cells[iy][ix]]
            out.append(f'<rect x="{ix * scale}" y="{(r.side - 1 - iy) * scale}" '
                       f'width="{scale}" height="{scale}" fill="{fill}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def lower_log(lower: LowerName, items: Optional[int] = None) -> str:
    """One emitted ball per line in the names module's line format.  For
    reconstructed names the complete emission set is logged; otherwise
    `items` leading stream balls."""
    fin = lower.meta.get("emitted")
    if fin is not None:
        balls: Sequence[RationalBall] = fin
    else:
        if items is None:
            raise ValueError("items is required for open-ended lower names")
        balls = [lower.ball_at(t) for t in range(items)]
    return "\n".join(format_ball(bb) for bb in balls)
