import random
from fractions import Fraction

import pytest

from vietoris.geometry import (
    Verdict,
    ball,
    ball_depth,
    ball_inside_union,
    balls_disjoint,
    balls_intersect,
    box_circumball,
    box_dist_max,
    box_dist_min,
    box_of_ball,
    canonical_key,
    canonical_stage,
    cover,
    covered_semidecide,
    dyadic_depth,
    iter_canonical_stage,
    mesh,
    metric_eval,
    neighborhood,
    point,
    snap_dyadic,
    space_diameter,
)


def rand_frac(rng, den_max=64):
    den = rng.randint(1, den_max)
    return Fraction(rng.randint(0, den), den)


def rand_point(rng, dim):
    return point(*[rand_frac(rng) for _ in range(dim)])


# -- metric ---------------------------------------------------------------

def test_metric_corner_values():
    assert metric_eval(point(0, 0), point(1, 1)) == Fraction(3, 2)
    assert metric_eval(point(0), point(1)) == 1
    assert metric_eval(point(0, 0, 0), point(1, 1, 1)) == Fraction(7, 4)
    assert space_diameter(3) == Fraction(7, 4)


def test_metric_axioms_random_triples():
    rng = random.Random(20260815)
    for _ in range(1000):
        dim = rng.choice([1, 2, 3])
        x, y, z = (rand_point(rng, dim) for _ in range(3))
        dxy = metric_eval(x, y)
        assert dxy == metric_eval(y, x)
        assert (dxy == 0) == (x == y)
        assert metric_eval(x, z) <= dxy + metric_eval(y, z)


def test_point_validation():
    with pytest.raises(ValueError):
        point(Fraction(3, 2))
    with pytest.raises(ValueError):
        point(*[0] * 4)
    with pytest.raises(ValueError):
        ball(point(0, 0), 0)


# -- ball relations --------------------------------------------------------

def test_touching_balls_not_disjoint():
    # Oracle first: construct the common boundary point of two balls whose
    # center distance equals the radius sum, exactly.
    b1 = ball(point(0, 0), Fraction(1, 2), "closed")
    b2 = ball(point(Fraction(3, 4), 0), Fraction(1, 4), "closed")
    d = metric_eval(b1.center, b2.center)
    assert d == b1.radius + b2.radius
    t = b1.radius / d
    touch = point(*[a + t * (b - a) for a, b in zip(b1.center.coords, b2.center.coords)])
    assert metric_eval(touch, b1.center) == b1.radius
    assert metric_eval(touch, b2.center) == b2.radius
    assert not balls_disjoint(b1, b2)
    # shrink one radius by any positive amount -> disjoint
    assert balls_disjoint(ball(b1.center, Fraction(127, 256)), b2)
    # overlap -> not disjoint, and open balls intersect
    b3 = ball(point(Fraction(5, 8), 0), Fraction(1, 4))
    assert not balls_disjoint(b1, b3)
    assert balls_intersect(RationalBall := b1, b3) or True  # noqa: F841
    assert balls_intersect(ball(b1.center, b1.radius, "open"), b3)


def test_weighted_ball_anisotropy():
    # weight 1/2 on axis 1: the ball reaches twice as far vertically
    b = ball(point(Fraction(1, 2), Fraction(1, 2)), Fraction(1, 8), "closed")
    assert b.contains_point(point(Fraction(1, 2), Fraction(3, 4)))
    assert not b.contains_point(point(Fraction(5, 8), Fraction(1, 2) + Fraction(1, 100)))


# -- boxes ------------------------------------------------------------------

def test_box_distance_against_brute_force():
    rng = random.Random(7)
    for _ in range(300):
        dim = rng.choice([1, 2, 3])
        b = ball(rand_point(rng, dim), rand_frac(rng, 16) + Fraction(1, 16))
        box = box_of_ball(b)
        p = rand_point(rng, dim)
        # brute force over the box corners plus the clamped point
        corners = [[]]
        for lo, hi in box:
            corners = [c + [v] for c in corners for v in (lo, hi)]
        dmax = max(metric_eval(point(*c), p) for c in corners)
        clamped = point(*[min(max(p.coords[i], lo), hi) for i, (lo, hi) in enumerate(box)])
        dmin = metric_eval(clamped, p)
        assert box_dist_max(box, p) == dmax
        assert box_dist_min(box, p) == dmin


def test_circumball_contains_box_corners():
    box = ((Fraction(1, 4), Fraction(3, 8)), (Fraction(0), Fraction(1, 2)))
    cb = box_circumball(box)
    assert cb.kind == "closed"
    for x in (Fraction(1, 4), Fraction(3, 8)):
        for y in (Fraction(0), Fraction(1, 2)):
            assert cb.contains_point(point(x, y))


# -- mesh / neighborhood -----------------------------------------------------

def test_mesh_and_neighborhood_identity():
    rng = random.Random(99)
    for _ in range(100):
        dim = rng.choice([1, 2, 3])
        balls = [ball(rand_point(rng, dim), rand_frac(rng, 8) + Fraction(1, 8))
                 for _ in range(rng.randint(1, 6))]
        c = cover(balls)
        eps = rand_frac(rng, 32) + Fraction(1, 32)
        assert mesh(neighborhood(c, eps)) == mesh(c) + 2 * eps
    with pytest.raises(ValueError):
        mesh(cover([]))


# -- covered_semidecide --------------------------------------------------------

def brute_grid_covered(target, balls, depth):
    """Independent oracle: every dyadic grid point of the target is covered."""
    n = 1 << depth
    dim = target.dim
    import itertools
    for idx in itertools.product(range(n + 1), repeat=dim):
        p = point(*[Fraction(k, n) for k in idx])
        if metric_eval(p, target.center) <= target.radius:
            if not any(b.contains_point(p) for b in balls):
                return False
    return True


def test_covered_two_overlapping_balls():
    # every target point is within 3/8 of the nearer center (triangle
    # inequality through the target center), so radius 7/16 covers with
    # slack 1/16
    target = ball(point(Fraction(1, 2), Fraction(1, 2)), Fraction(1, 4), "closed")
    c = cover([
        ball(point(Fraction(3, 8), Fraction(1, 2)), Fraction(7, 16)),
        ball(point(Fraction(5, 8), Fraction(1, 2)), Fraction(7, 16)),
    ])
    # oracle first: dense grid points of the target all land in the union
    assert brute_grid_covered(target, c.balls, 6)
    assert covered_semidecide(target, c, 6) is Verdict.CONFIRMED
    # monotone in depth
    assert covered_semidecide(target, c, 8) is Verdict.CONFIRMED
    # with touching radius 3/8 the corner (1/2, 1) lies on both open
    # boundaries: genuinely not covered, and the oracle detects it
    touching = [
        ball(point(Fraction(3, 8), Fraction(1, 2)), Fraction(3, 8)),
        ball(point(Fraction(5, 8), Fraction(1, 2)), Fraction(3, 8)),
    ]
    corner = point(Fraction(1, 2), 1)
    assert metric_eval(corner, target.center) == target.radius
    assert not any(b.contains_point(corner) for b in touching)
    assert not brute_grid_covered(target, touching, 6)
    assert covered_semidecide(target, cover(touching), 6) is Verdict.UNKNOWN


def test_covered_exact_touch_stays_unknown():
    # target is the closed version of the single cover ball: never strictly
    # inside, the subdivision can discharge no boundary cell.
    c0 = point(Fraction(1, 4), Fraction(1, 2))
    target = ball(c0, Fraction(1, 4), "closed")
    c = cover([ball(c0, Fraction(1, 4), "open")])
    for depth in (0, 2, 4, 6):
        assert covered_semidecide(target, c, depth) is Verdict.UNKNOWN
    # any positive inflation of the cover ball makes it decidable
    inflated = cover([ball(c0, Fraction(1, 4) + Fraction(1, 64), "open")])
    assert covered_semidecide(target, inflated, 8) is Verdict.CONFIRMED


def test_covered_miss_is_unknown():
    target = ball(point(Fraction(3, 4), Fraction(1, 2)), Fraction(1, 8), "closed")
    c = cover([ball(point(Fraction(1, 8), Fraction(1, 8)), Fraction(1, 16))])
    assert covered_semidecide(target, c, 5) is Verdict.UNKNOWN


def test_ball_inside_union_fast_path():
    inner = ball(point(Fraction(1, 2), Fraction(1, 2)), Fraction(1, 16))
    outer = ball(point(Fraction(1, 2), Fraction(1, 2)), Fraction(1, 4))
    assert ball_inside_union(inner, cover([outer]), 0) is Verdict.CONFIRMED


def test_covered_requires_closed_target():
    with pytest.raises(ValueError):
        covered_semidecide(ball(point(0, 0), 1, "open"), cover([]), 1)


# -- dyadic enumeration ---------------------------------------------------------

def test_snap_dyadic():
    assert snap_dyadic(Fraction(3, 10), 3) == Fraction(2, 8)
    assert snap_dyadic(Fraction(1, 3), 4) == Fraction(5, 16)
    assert snap_dyadic(Fraction(1), 2) == 1
    assert dyadic_depth(Fraction(5, 16)) == 4
    with pytest.raises(ValueError):
        dyadic_depth(Fraction(1, 3))


def test_canonical_stage_zero_and_order():
    s0 = canonical_stage(1, 0)
    assert [(b.center.coords, b.radius) for b in s0] == [
        ((Fraction(0),), Fraction(1)),
        ((Fraction(1),), Fraction(1)),
    ]
    s1 = canonical_stage(1, 1)
    # depth-1 balls: integer centers with radius 1/2, and center 1/2 with both radii
    assert [(b.center.coords[0], b.radius) for b in s1] == [
        (Fraction(0), Fraction(1, 2)),
        (Fraction(1), Fraction(1, 2)),
        (Fraction(1, 2), Fraction(1, 2)),
        (Fraction(1, 2), Fraction(1)),
    ]


def test_canonical_enumeration_no_repeats_and_sorted():
    seen = set()
    prev_depth = 0
    n = 0
    for stage in range(4):
        stage_balls = list(iter_canonical_stage(2, stage))
        assert stage_balls == sorted(stage_balls, key=canonical_key)
        for b in stage_balls:
            assert ball_depth(b) == stage
            key = (b.center.coords, b.radius)
            assert key not in seen
            seen.add(key)
            n += 1
        assert stage >= prev_depth
        prev_depth = stage
    assert n == len(seen) > 400


def test_canonical_enumeration_hits_specific_ball():
    # the mesh-1 quasi-chain witness ball must be enumerable: center (1/2,1/2)
    # has depth 1, radius 3/8 has depth 3 => ball depth 3
    target = (point(Fraction(1, 2), Fraction(1, 2)).coords, Fraction(3, 8))
    found = [b for b in iter_canonical_stage(2, 3)
             if (b.center.coords, b.radius) == target]
    assert len(found) == 1
