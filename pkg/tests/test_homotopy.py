"""Grid maps, their dense enumeration, and the homotopy-class semideciders.

The sup-distance and degree assertions run against independent oracles first
(breakpoint enumeration for 1-d composites, exact ray-crossing winding counts
in tests/_winding.py); the semidecider scenarios then reuse those oracles to
cross-check every returned witness.
"""

import random
from fractions import Fraction as F

import pytest

from _winding import circle_samples, winding_number
from vietoris.geometry import (
    Cover,
    RationalBall,
    Verdict,
    ball,
    balls_disjoint,
    metric_eval,
    point,
    snap_point,
)
from vietoris.names import (
    Budget,
    PairName,
    UpperName,
    empty_upper,
    subtract,
    upper_from_list,
)
from vietoris.homotopy import (
    PLMap,
    circle_point,
    class_equal_semidecide,
    cone_pair_name,
    constant_index,
    dense_pl_map,
    domain_semidecide,
    en_piece,
    extension_semidecide,
    make_anr,
    null_homotopy_semidecide,
    paired_index,
    paired_map,
    pl_constant,
    pl_identity,
    pl_index,
    pl_search,
    pl_surjective_check,
    rho,
    sqrt_bounds,
)

ZERO, ONE, HALF, RHO = F(0), F(1), F(1, 2), F(1, 4)


def wdiff(u, v):
    """The weighted metric, written out independently of the library."""
    return sum(abs(x - y) / (1 << i) for i, (x, y) in enumerate(zip(u, v)))


def rand_map(rng, dim, codim, order, depth):
    den = 1 << depth
    count = ((1 << order) + 1) ** dim
    return PLMap(order, dim, codim,
                 [tuple(F(rng.randint(0, den), den) for _ in range(codim))
                  for _ in range(count)])


def rand_pt(rng, dim):
    return tuple(F(rng.randint(0, 97), 97) for _ in range(dim))


# -- winding oracle self-tests -------------------------------------------------------

def test_circle_samples_sit_on_the_marked_circle():
    pts = circle_samples(64)
    assert len(pts) == len(set(pts)) == 128
    for k, (x, y) in enumerate(pts):
        assert (x - HALF) ** 2 + (y - HALF) ** 2 == RHO * RHO
        nx, ny = pts[(k + 1) % len(pts)]
        assert (nx - x) ** 2 + (ny - y) ** 2 <= F(1, 64 * 64)


def test_winding_oracle_on_reference_maps():
    assert winding_number(pl_identity(2)) == 1
    assert winding_number(pl_constant(point(F(3, 4), HALF), 2)) == 0
    # the vertical mirror reverses orientation
    mirror = PLMap(0, 2, 2, [(ZERO, ONE), (ZERO, ZERO), (ONE, ONE), (ONE, ZERO)])
    assert winding_number(mirror) == -1


def test_winding_oracle_refuses_center_hits():
    with pytest.raises(RuntimeError):
        winding_number(pl_constant(point(HALF, HALF), 2))


# -- evaluation against hand values --------------------------------------------------

def test_evaluate_matches_hand_values_dim1():
    f = PLMap(1, 1, 1, [(ZERO,), (HALF,), (RHO,)])
    for x, want in [(ZERO, ZERO), (F(1, 4), F(1, 4)), (HALF, HALF),
                    (F(5, 8), F(7, 16)), (F(3, 4), F(3, 8)), (ONE, RHO)]:
        assert f.evaluate((x,)) == (want,)


def test_evaluate_matches_hand_values_dim2():
    # the "roof" over the diagonal: 0 at (0,0) and (1,1), 1/2 on the others
    f = PLMap(0, 2, 1, [(ZERO,), (HALF,), (HALF,), (ZERO,)])
    for p, want in [((F(3, 4), F(1, 4)), F(1, 4)), ((F(1, 4), F(3, 4)), F(1, 4)),
                    ((HALF, HALF), ZERO), ((HALF, ZERO), F(1, 4)),
                    ((ONE, ONE), ZERO), ((F(1, 3), F(1, 9)), F(1, 9))]:
        assert f.evaluate(p) == (want,)


def test_identity_evaluates_exactly():
    rng = random.Random(7)
    fid = pl_identity(2)
    for _ in range(20):
        p = rand_pt(rng, 2)
        assert fid.evaluate(p) == p


def test_refinement_battery():
    rng = random.Random(8)
    for _ in range(60):
        dim = rng.randint(1, 2)
        f = rand_map(rng, dim, rng.randint(1, 2), rng.randint(0, 2), rng.randint(0, 4))
        g = f.refine(f.grid_order + rng.randint(1, 2))
        for _ in range(5):
            p = rand_pt(rng, dim)
            assert f.evaluate(p) == g.evaluate(p)
        assert rho(f, g) == 0
        # resampling the same function never worsens the slope bounds
        assert g.lipschitz_bound() <= f.lipschitz_bound()
    with pytest.raises(ValueError):
        pl_identity(2).refine(1).refine(0)


# -- the sup distance, against a breakpoint oracle -----------------------------------

def grid_nodes(m):
    n = 1 << m.grid_order
    return [F(i, n) for i in range(n + 1)]


def sup_composite_diff(f, g, h):
    """Exact sup_x d(f(h(x)), g(h(x))) for 1-d maps.  The composite difference
    is piecewise affine with kinks only at h's nodes and at h-preimages of f's
    and g's nodes (found per h-cell by an exact linear solve), and a convex
    piecewise-affine function attains its max at a kink."""
    breaks = set(grid_nodes(h))
    targets = sorted(set(grid_nodes(f)) | set(grid_nodes(g)))
    nh = 1 << h.grid_order
    for i in range(nh):
        x0, x1 = F(i, nh), F(i + 1, nh)
        y0 = h.evaluate((x0,))[0]
        y1 = h.evaluate((x1,))[0]
        if y0 == y1:
            continue
        for yt in targets:
            x = x0 + (yt - y0) * (x1 - x0) / (y1 - y0)
            if x0 <= x <= x1:
                breaks.add(x)
    return max(wdiff(f.evaluate(h.evaluate((x,))), g.evaluate(h.evaluate((x,))))
               for x in breaks)


def test_breakpoint_oracle_hand_case():
    fid = pl_identity(1)
    rev = PLMap(0, 1, 1, [(ONE,), (ZERO,)])
    hat = PLMap(1, 1, 1, [(ZERO,), (ONE,), (ZERO,)])
    assert sup_composite_diff(fid, rev, hat) == 1
    assert sup_composite_diff(fid, rev, pl_constant((HALF,), 1)) == 0
    # brute-force confirmation on a dense rational sample
    assert max(abs(2 * hat.evaluate((F(k, 101),))[0] - 1)
               for k in range(102)) <= 1


def test_rho_equals_breakpoint_oracle_through_identity():
    rng = random.Random(40)
    h = pl_identity(1)
    for _ in range(200):
        codim = rng.randint(1, 2)
        f = rand_map(rng, 1, codim, rng.randint(0, 3), rng.randint(0, 4))
        g = rand_map(rng, 1, codim, rng.randint(0, 3), rng.randint(0, 4))
        assert sup_composite_diff(f, g, h) == rho(f, g)


def test_rho_dominates_composites():
    rng = random.Random(41)
    for _ in range(300):
        codim = rng.randint(1, 2)
        f = rand_map(rng, 1, codim, rng.randint(0, 3), rng.randint(0, 3))
        g = rand_map(rng, 1, codim, rng.randint(0, 3), rng.randint(0, 3))
        h = rand_map(rng, 1, 1, rng.randint(0, 3), rng.randint(0, 3))
        assert sup_composite_diff(f, g, h) <= rho(f, g)


def test_rho_hand_values_and_validation():
    fid = pl_identity(1)
    rev = PLMap(0, 1, 1, [(ONE,), (ZERO,)])
    halfmap = PLMap(0, 1, 1, [(ZERO,), (HALF,)])
    assert rho(fid, rev) == 1
    assert rho(fid, halfmap) == HALF
    assert rho(fid, fid) == 0
    with pytest.raises(ValueError):
        rho(fid, pl_identity(2))


def test_rho_two_sided_bracket_dim2():
    rng = random.Random(42)
    for _ in range(25):
        f = rand_map(rng, 2, 2, rng.randint(0, 2), rng.randint(0, 3))
        g = rand_map(rng, 2, 2, rng.randint(0, 2), rng.randint(0, 3))
        r = rho(f, g)
        for _ in range(20):
            p = rand_pt(rng, 2)
            assert wdiff(f.evaluate(p), g.evaluate(p)) <= r
        order = max(f.grid_order, g.grid_order) + 2
        n = 1 << order
        gm = max(wdiff(f.evaluate((F(i, n), F(j, n))), g.evaluate((F(i, n), F(j, n))))
                 for i in range(n + 1) for j in range(n + 1))
        # any cube point is within 3/(4n) of a grid sample in the weighted
        # metric, and the pointwise distance is (Lf+Lg)-Lipschitz
        slack = (f.lipschitz_bound() + g.lipschitz_bound()) * F(3, 4 * n)
        assert gm <= r <= gm + slack


# -- slope bounds and image enclosures -----------------------------------------------

def test_lipschitz_and_axis_slopes_sound():
    rng = random.Random(43)
    for _ in range(30):
        dim = rng.randint(1, 2)
        f = rand_map(rng, dim, rng.randint(1, 2), rng.randint(0, 2), rng.randint(0, 4))
        lb = f.lipschitz_bound()
        s = f.axis_slopes()
        for _ in range(10):
            p, q = rand_pt(rng, dim), rand_pt(rng, dim)
            assert wdiff(f.evaluate(p), f.evaluate(q)) <= lb * wdiff(p, q)
            j = rng.randrange(dim)
            t = F(rng.randint(0, 13), 13)
            q2 = tuple(t if k == j else x for k, x in enumerate(p))
            assert wdiff(f.evaluate(p), f.evaluate(q2)) <= s[j] * abs(p[j] - t)


def test_enclose_ball_battery():
    rng = random.Random(44)
    for _ in range(25):
        f = rand_map(rng, 2, 2, rng.randint(0, 2), rng.randint(0, 3))
        c = rand_pt(rng, 2)
        b = ball(point(*c), F(rng.randint(1, 16), 64))
        encl = f.enclose_ball(b, rng.randint(1, 9))
        for _ in range(20):
            p = tuple(min(ONE, max(ZERO, c[k] + F(rng.randint(-99, 99), 99)
                                   * b.radius * (1 << k)))
                      for k in range(2))
            img = point(*f.evaluate(p))
            assert any(metric_eval(e.center, img) < e.radius for e in encl)


def test_pair_sup_below_certificates_hold():
    rng = random.Random(45)
    hits = 0
    for _ in range(40):
        f = rand_map(rng, 2, 2, rng.randint(0, 2), rng.randint(0, 3))
        g = rand_map(rng, 2, 2, rng.randint(0, 2), rng.randint(0, 3))
        c = rand_pt(rng, 2)
        b = ball(point(*c), F(rng.randint(1, 4), 128))
        q = wdiff(f.evaluate(c), g.evaluate(c)) + F(1, 1 << rng.randint(1, 4))
        if f.pair_sup_below(g, b, q, 7):
            hits += 1
            for _ in range(15):
                p = tuple(min(ONE, max(ZERO, c[k] + F(rng.randint(-99, 99), 99)
                                       * b.radius * (1 << k)))
                          for k in range(2))
                assert wdiff(f.evaluate(p), g.evaluate(p)) < q
    assert hits >= 25  # the battery must not be vacuous


def test_sqrt_bounds_battery():
    rng = random.Random(5)
    for _ in range(200):
        x = F(rng.randint(0, 4 << 20), rng.randint(1, 1 << 20))
        lo, hi = sqrt_bounds(x, 20)
        assert lo * lo <= x <= hi * hi
        assert hi - lo <= F(1, 1 << 20)
        if x > 0:
            assert lo > 0
    assert sqrt_bounds(F(9, 64), 10)[0] <= F(3, 8) <= sqrt_bounds(F(9, 64), 10)[1]
    with pytest.raises(ValueError):
        sqrt_bounds(F(-1), 4)


# -- the dense enumeration ------------------------------------------------------------

def test_enumeration_block_layout():
    assert dense_pl_map(0, 2) == pl_constant((ZERO, ZERO), 2)
    assert dense_pl_map(1, 1, 1) == pl_identity(1)
    assert pl_index(pl_identity(2)) == 27
    assert dense_pl_map(27, 2) == pl_identity(2)
    # the first index past block 0 in d=1 is the all-zero order-1 map
    first = dense_pl_map(4, 1, 1)
    assert first.grid_order == 1
    assert first.values == ((ZERO,), (ZERO,), (ZERO,))
    with pytest.raises(ValueError):
        dense_pl_map(-1)
    with pytest.raises(ValueError):
        pl_index(PLMap(0, 1, 1, [(F(1, 4),), (ZERO,)]))  # off-lattice values


def test_enumeration_roundtrip_battery():
    rng = random.Random(46)
    for dim, codim in [(1, 1), (2, 2), (1, 2), (2, 1)]:
        for _ in range(60):
            i = rng.randrange(10 ** rng.randint(1, 8))
            assert pl_index(dense_pl_map(i, dim, codim)) == i


def test_pl_search_approximates_the_halving_map():
    # x/2 needs vertex depth order+1, so no snap is exact; order 3 is the
    # first whose rounding error max|snap - x/2| = 1/16 beats eps = 1/8
    target = PLMap(1, 1, 1, [(ZERO,), (F(1, 4),), (HALF,)])
    idx, cand = pl_search(target, F(1, 8))
    assert cand.grid_order == 3
    assert rho(cand, target) == F(1, 16)
    assert dense_pl_map(idx, 1, 1) == cand
    assert pl_search(target, F(1, 8), max_order=0) is None


def test_pl_search_density_battery():
    rng = random.Random(47)
    for _ in range(20):
        order = rng.randint(0, 3)
        f = rand_map(rng, 1, rng.randint(1, 2), order, order)
        eps = F(1, 1 << rng.randint(1, 4))
        idx, cand = pl_search(f, eps)
        assert rho(cand, f) < eps
        assert dense_pl_map(idx, 1, cand.codim) == cand


# -- the concrete neighborhood-retract data -------------------------------------------

ANR = make_anr("S1")


def rand_tangent(rng):
    return F(rng.randint(-999, 999), 1000)


def near_circle_point(rng, slack):
    """A rational point within weighted distance < `slack` of the circle."""
    q = circle_point(rand_tangent(rng), left=rng.random() < 0.5)
    u = F(rng.randint(0, 99), 99)
    lam = F(rng.randint(0, 98), 99)
    dx = lam * slack * u * (1 if rng.random() < 0.5 else -1)
    dy = 2 * lam * slack * (1 - u) * (1 if rng.random() < 0.5 else -1)
    return point(q.coords[0] + dx, q.coords[1] + dy)


def in_neighborhood(a, p):
    return any(metric_eval(p, nb.center) < nb.radius
               for nb in a.ball_index.near(p, F(1, 64)))


def test_s1_data_shape():
    assert ANR.target_id == "S1"
    assert len(ANR.neighborhood.balls) == 512
    assert ANR.lipschitz * ANR.mu <= ANR.alpha
    assert ANR.circle_center == point(HALF, HALF)
    assert ANR.circle_radius == RHO
    assert F(1, 128) < ANR.tube_margin < F(1, 64)
    for nb in ANR.neighborhood.balls:
        # every neighborhood ball is centered exactly on the circle
        dx = nb.center.coords[0] - HALF
        dy = nb.center.coords[1] - HALF
        assert dx * dx + dy * dy == RHO * RHO
        assert nb.radius == F(1, 64)


def test_s1_tube_margin_certifies_membership():
    rng = random.Random(48)
    for _ in range(200):
        p = near_circle_point(rng, ANR.tube_margin)
        assert in_neighborhood(ANR, p)


def test_s1_retraction_fixes_circle_and_stays_close():
    for k in range(-8, 9):
        q = circle_point(F(k, 8))
        re = ANR.retract_enclose(q, 20)
        assert metric_eval(re.center, q) <= re.radius
    # exact hand values on horizontal / vertical rays
    re = ANR.retract_enclose(point(F(7, 8), HALF), 20)
    assert metric_eval(re.center, point(F(3, 4), HALF)) <= re.radius
    re = ANR.retract_enclose(point(HALF, F(3, 16)), 20)
    assert metric_eval(re.center, point(HALF, RHO)) <= re.radius
    with pytest.raises(ValueError):
        ANR.retract_enclose(point(HALF, HALF), 16)


def test_s1_retraction_displacement_below_mu():
    rng = random.Random(49)
    for _ in range(300):
        p = near_circle_point(rng, F(1, 64))
        if not in_neighborhood(ANR, p):
            continue
        re = ANR.retract_enclose(p, 16)
        assert metric_eval(re.center, p) + re.radius < ANR.mu


def test_s1_retraction_lipschitz_within_alpha():
    rng = random.Random(50)
    for _ in range(300):
        p = near_circle_point(rng, F(1, 64))
        q = near_circle_point(rng, F(1, 64))
        if metric_eval(p, q) >= F(1, 48):
            continue
        rp = ANR.retract_enclose(p, 18)
        rq = ANR.retract_enclose(q, 18)
        assert metric_eval(rp.center, rq.center) + rp.radius + rq.radius < ANR.alpha


def test_s0_data_shape():
    s0 = make_anr("S0")
    assert s0.points == (point(F(1, 4), HALF), point(F(3, 4), HALF))
    assert metric_eval(*s0.points) == HALF
    assert s0.alpha < metric_eval(*s0.points)
    b0, b1 = s0.neighborhood.balls
    assert balls_disjoint(b0, b1)
    re = s0.retract_enclose(point(F(1, 4) + F(1, 32), HALF + F(1, 100)), 16)
    assert re.center == s0.points[0]
    with pytest.raises(ValueError):
        make_anr("S2")


def test_constant_index_roundtrip():
    cidx = constant_index(ANR)
    back = dense_pl_map(cidx, 2)
    rng = random.Random(51)
    for _ in range(10):
        assert back.evaluate(rand_pt(rng, 2)) == (F(3, 4), HALF)


# -- inline names for the scenario tests ----------------------------------------------

GEOM = ("disk", HALF, HALF, RHO)


def disk_cover(t):
    n = 1 << t
    r = F(1, n)
    out = []
    for i in range(n + 1):
        for j in range(n + 1):
            x, y = F(i, n), F(j, n)
            dx, dy = x - HALF, y - HALF
            if dx * dx + dy * dy <= (RHO + r) ** 2:
                out.append(ball(point(x, y), r))
    return Cover(tuple(out))


def circle_cover(t):
    n = 1 << t
    r = F(1, n)
    out = []
    for i in range(n + 1):
        for j in range(n + 1):
            x, y = F(i, n), F(j, n)
            dx, dy = x - HALF, y - HALF
            d2 = dx * dx + dy * dy
            lo = RHO - r if RHO > r else ZERO
            if lo * lo <= d2 <= (RHO + r) ** 2:
                out.append(ball(point(x, y), r))
    return Cover(tuple(out))


DISK = UpperName(disk_cover, 2, {"geom": GEOM})
CIRC = UpperName(circle_cover, 2, {"geom": ("circle", HALF, HALF, RHO)})
HOLE = ball(point(HALF, HALF), F(1, 8))
PUNCT = subtract(DISK, HOLE)
FID = pl_identity(2)
C_BOT = pl_constant(point(HALF, RHO), 2)                       # bottom of the circle
C_SIDE = pl_constant(snap_point(circle_point(F(-1, 2)), 7), 2)  # an eighth away
B98 = Budget(9, 8)
B76 = Budget(7, 6)

_decided = {}


def decided(key):
    if key not in _decided:
        runs = {
            "annulus": lambda: extension_semidecide(
                FID, PairName(PUNCT, CIRC), ANR, B98),
            "disk": lambda: extension_semidecide(
                FID, PairName(DISK, CIRC), ANR, B98),
            "const_ext": lambda: extension_semidecide(
                pl_constant(point(F(3, 4), HALF), 2), PairName(DISK, CIRC), ANR, B98),
            "rotation": lambda: class_equal_semidecide(
                C_BOT, C_SIDE, CIRC, ANR, B76),
            "null_const": lambda: null_homotopy_semidecide(C_BOT, CIRC, ANR, B76),
            "null_id": lambda: null_homotopy_semidecide(FID, CIRC, ANR, B76),
        }
        _decided[key] = runs[key]()
    return _decided[key]


# -- dom -------------------------------------------------------------------------------

def test_domain_identity_on_circle_confirmed():
    d = domain_semidecide(FID, CIRC, ANR, B98)
    assert d.confirmed
    assert d.witness == FID


def test_domain_perturbed_identity_confirmed():
    bump = list(FID.refine(1).values)
    bump[4] = (HALF + F(1, 512), HALF)  # nudge the center vertex
    f = PLMap(1, 2, 2, bump)
    assert rho(f, FID) == F(1, 512)
    assert domain_semidecide(f, CIRC, ANR, B98).confirmed


def test_domain_constants():
    assert domain_semidecide(pl_constant(point(F(3, 4), HALF), 2),
                             CIRC, ANR, Budget(3, 4)).confirmed
    assert not domain_semidecide(pl_constant(point(HALF, HALF), 2),
                                 CIRC, ANR, Budget(6, 5)).confirmed


def test_domain_center_constant_unknown_survives_10x_budget():
    pre = upper_from_list([circle_cover(t) for t in range(8)], 2)
    d = domain_semidecide(pl_constant(point(HALF, HALF), 2),
                          pre, ANR, Budget(6, 5).scaled(10))
    assert not d.confirmed


def test_domain_zero_budget_unknown():
    assert not domain_semidecide(FID, CIRC, ANR, Budget(0, 3)).confirmed


# -- extension --------------------------------------------------------------------------

def test_extension_constant_class_extends_by_itself():
    d = decided("const_ext")
    assert d.confirmed
    assert d.detail == "same map"


def test_extension_over_annulus_via_ray_exit():
    d = decided("annulus")
    assert d.confirmed
    assert d.detail == "ray exit"
    assert isinstance(d.witness, PLMap)
    # the witness agrees with the identity on the marked circle within mu
    for k in range(-4, 5):
        q = circle_point(F(k, 4))
        assert wdiff(d.witness.evaluate(q), q.coords) < ANR.mu


def test_extension_over_full_disk_unknown():
    assert not decided("disk").confirmed


def test_extension_unknown_at_shallow_depth():
    assert not extension_semidecide(FID, PairName(PUNCT, CIRC), ANR,
                                    Budget(7, 5)).confirmed


def test_extension_over_full_disk_unknown_at_10x_budget():
    pre_disk = upper_from_list([disk_cover(t) for t in range(10)], 2,
                               meta={"geom": GEOM})
    pre_circ = upper_from_list([circle_cover(t) for t in range(10)], 2)
    d = extension_semidecide(FID, PairName(pre_disk, pre_circ), ANR, B98.scaled(10))
    assert not d.confirmed


def test_extension_s0_retract_rounding():
    s0 = make_anr("S0")
    marked = [(F(1, 4), HALF), (F(3, 4), HALF)]
    pts = upper_from_list(
        [Cover(tuple(ball(point(*p), 2 * F(1, 1 << t)) for p in marked))
         for t in range(9)], 2)

    def segs_cover(t):
        n = 1 << t
        out = []
        for a, b2 in [(F(1, 8), F(3, 8)), (F(5, 8), F(7, 8))]:
            i = 0
            while a + F(i, n) <= b2:
                out.append(ball(point(a + F(i, n), HALF), 2 * F(1, n)))
                i += 1
        return Cover(tuple(out))

    segs = upper_from_list([segs_cover(t) for t in range(9)], 2)
    d = extension_semidecide(FID, PairName(segs, pts), s0, Budget(8, 6))
    assert d.confirmed
    assert d.detail == "retract rounding"
    assert set(d.witness.values) <= {p.coords for p in s0.points}


# -- class equality and null-homotopy ----------------------------------------------------

def test_class_equal_identical_representatives():
    d = class_equal_semidecide(27, pl_identity(2), CIRC, ANR, Budget(1, 1))
    assert d.confirmed
    assert d.detail == "identical representatives"


def test_class_equal_constants_via_rotation():
    d = decided("rotation")
    assert d.confirmed
    assert d.detail == "cylinder extension: rotation path"
    assert d.witness.dim == 3


def test_null_homotopy_of_constant_confirmed():
    d = decided("null_const")
    assert d.confirmed
    assert "rotation path" in d.detail


def test_null_homotopy_of_identity_unknown():
    # the identity has winding 1 around the center; no budget may confirm
    assert not decided("null_id").confirmed


def test_class_equal_rejects_cylinder_beyond_max_dim():
    k3 = upper_from_list([Cover((ball(point(HALF, HALF, HALF), RHO),))], 3)
    with pytest.raises(ValueError):
        class_equal_semidecide(0, 1, k3, ANR, Budget(1, 1))


def test_confirmed_witnesses_respect_winding():
    assert winding_number(decided("annulus").witness) == 1
    assert winding_number(decided("const_ext").witness) == 0
    # end maps of the confirmed rotation cylinder are constants: winding 0
    assert winding_number(C_BOT) == winding_number(C_SIDE) == 0


# -- the paired cylinder map -------------------------------------------------------------

def test_paired_map_blends_between_exact_ends():
    pm = paired_map(C_BOT, C_SIDE)
    assert pm.dim == 3 and pm.grid_order == 1
    va, vb = C_BOT.values[0], C_SIDE.values[0]
    rng = random.Random(52)
    for _ in range(10):
        x, y = rand_pt(rng, 2)
        assert pm.evaluate((x, y, ZERO)) == va
        assert pm.evaluate((x, y, ONE)) == vb
    mid = pm.evaluate((HALF, HALF, HALF))
    for c, a, b2 in zip(mid, va, vb):
        assert abs(c - (a + b2) / 2) <= F(1, 128)
        assert c.denominator <= 64  # blend values are snapped dyadics


def test_paired_map_validation():
    with pytest.raises(ValueError):
        paired_map(pl_identity(1), pl_identity(2))
    with pytest.raises(ValueError):
        paired_map(pl_constant((HALF, HALF), 3, codim=2),
                   pl_constant((HALF, HALF), 3, codim=2))


def test_paired_index_roundtrip():
    fi = dense_pl_map(1, 1, 1)  # the identity on [0,1]
    fj = dense_pl_map(2, 1, 1)  # the reversal
    pm = paired_map(fi, fj)
    idx = paired_index(1, 2, dim=1)
    assert dense_pl_map(idx, 2, 1) == pm.refine(pm.grid_order)
    assert rho(dense_pl_map(idx, 2, 1), pm) == 0


# -- the no-extension pieces --------------------------------------------------------------

def test_en_piece_labels():
    assert en_piece(3, ANR).id == "no-extension-S1-3"
    assert en_piece(FID, ANR).id == "no-extension-S1-order-0 map"


def test_en_piece_confirms_annulus_by_extension():
    d = en_piece(FID, ANR).complement_semidecide(PairName(PUNCT, CIRC), B98)
    assert d.confirmed
    assert d.detail == "extension: ray exit"


def test_en_piece_full_disk_stays_unknown():
    d = en_piece(FID, ANR).complement_semidecide(PairName(DISK, CIRC), B98)
    assert not d.confirmed


def test_en_piece_confirms_when_image_escapes():
    far = pl_constant(point(HALF, HALF), 2)
    d = en_piece(far, ANR).complement_semidecide(PairName(DISK, CIRC), Budget(5, 5))
    assert d.confirmed
    assert d.detail == "image avoids the neighborhood"


# -- cones ---------------------------------------------------------------------------------

def covered(cov, p):
    return any(metric_eval(b.center, p) < b.radius for b in cov.balls)


def seg_wdist(p, a, b):
    """Exact weighted distance from p to the segment [a, b]: the objective is
    convex piecewise-affine in the parameter, so the min sits at a kink."""
    cands = {ZERO, ONE}
    for ai, bi, pi in zip(a, b, p):
        if ai != bi:
            lam = F(pi - ai, 1) / (bi - ai)
            if 0 < lam < 1:
                cands.add(lam)
    return min(wdiff(p, tuple(ai + lam * (bi - ai) for ai, bi in zip(a, b)))
               for lam in cands)


def test_cone_of_two_points_is_the_v():
    marked = [(F(1, 4), HALF), (F(3, 4), HALF)]
    pts = upper_from_list(
        [Cover(tuple(ball(point(*p), 2 * F(1, 1 << t)) for p in marked))
         for t in range(9)], 2)
    pair = cone_pair_name(PairName(pts, pts))
    cx = pair.upper_x
    assert cx.dim == 3
    apex = (ZERO, ZERO, ZERO)
    tips = [(ONE, F(1, 4), HALF), (ONE, F(3, 4), HALF)]
    for t in (3, 6):
        cov = cx.cover_at(t)
        for k in range(9):
            lam = F(k, 8)
            for tip in tips:
                assert covered(cov, point(*(lam * c for c in tip)))
    # every ball the name emits sits on the V itself
    for b in cx.cover_at(5).balls:
        assert min(seg_wdist(b.center.coords, apex, tip) for tip in tips) == 0
    off = point(HALF, HALF, F(1, 4))
    assert not covered(cx.cover_at(6), off)
    # the pair's A-part keeps the base slice and the cone of A
    cov_a = pair.upper_a.cover_at(4)
    assert covered(cov_a, point(ZERO, ZERO, ZERO))
    assert covered(cov_a, point(ONE, F(1, 4), HALF))


def test_cone_of_empty_is_the_apex():
    pair = cone_pair_name(PairName(empty_upper(2), empty_upper(2)))
    cov = pair.upper_x.cover_at(5)
    assert len(cov.balls) == 1
    assert cov.balls[0].center == point(ZERO, ZERO, ZERO)
    assert cov.balls[0].radius == F(1, 32)


def test_cone_rejects_dimension_overflow():
    k3 = upper_from_list([Cover((ball(point(HALF, HALF, HALF), RHO),))], 3)
    with pytest.raises(ValueError):
        cone_pair_name(PairName(k3, k3))


# -- resolution-scale surjectivity ----------------------------------------------------------

class SquareTruth:
    """Exact ground truth for the full unit square, duck-typed for the
    surjectivity check: the distance to the set is identically zero."""

    def __init__(self):
        self.canonical_upper = upper_from_list(
            [self._grid(t) for t in range(8)], 2)

    @staticmethod
    def _grid(t):
        n = 1 << min(t, 6)
        return Cover(tuple(ball(point(F(i, n), F(j, n)), F(2, n))
                           for i in range(n + 1) for j in range(n + 1)))

    def dist_cmp(self, pt, q):
        return (0 > q) - (0 < q)


def test_surjectivity_identity_passes():
    assert pl_surjective_check(pl_identity(2), SquareTruth(), 3) is None


def test_surjectivity_shrunk_map_yields_certified_witness():
    f = PLMap(0, 2, 2, [(F(1, 8), F(1, 8)), (F(1, 8), F(5, 8)),
                        (F(5, 8), F(1, 8)), (F(5, 8), F(5, 8))])
    w = pl_surjective_check(f, SquareTruth(), 2)
    assert w is not None
    assert w.radius == F(1, 4)
    # the witness ball really misses the image square [1/8, 5/8]^2
    gap = ZERO
    for k, c in enumerate(w.center.coords):
        gap += max(ZERO, F(1, 8) - c, c - F(5, 8)) / (1 << k)
    assert gap >= w.radius


def test_surjectivity_resolution_validation():
    with pytest.raises(ValueError):
        pl_surjective_check(pl_identity(2), SquareTruth(), 7)
    with pytest.raises(ValueError):
        pl_surjective_check(pl_identity(2), SquareTruth(), -1)
