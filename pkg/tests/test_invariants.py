"""Invariant semideciders: chain search, separation, nerve, integer homology."""

import math
import random
from collections import Counter
from fractions import Fraction as F

import pytest
import sympy
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from vietoris.geometry import Verdict, ball, balls_disjoint, cover, point
from vietoris.names import Budget, PairName, empty_upper, upper_from_list
from vietoris.invariants import (
    PiPiece,
    SigmaFamily,
    SimplicialComplex,
    homology,
    marked_removed_confirm,
    nerve,
    not_quasichainable_family,
    quasi_chain_confirm,
    separation_confirm,
    smith_normal_form,
)

SEG_A, SEG_B, SEG_Y = F(1, 4), F(3, 4), F(1, 2)


# -- inline names -----------------------------------------------------------------

def seg_covers(a, b, y, tmax):
    """Covers of the segment [a,b] x {y}: grid marks at 2^-t, radius 2*2^-t."""
    out = []
    for t in range(tmax + 1):
        step = F(1, 1 << t)
        i0, i1 = math.floor(a / step), math.ceil(b / step)
        out.append(cover(tuple(ball(point(i * step, y), 2 * step)
                               for i in range(i0, i1 + 1))))
    return out


def seg_name(a=SEG_A, b=SEG_B, y=SEG_Y, tmax=9):
    return upper_from_list(seg_covers(a, b, y, tmax), 2)


def merged_covers(list_a, list_b):
    return [cover(tuple(ca.balls) + tuple(cb.balls)) for ca, cb in zip(list_a, list_b)]


def points_covers(pts, tmax):
    return [cover(tuple(ball(point(*p), 2 * F(1, 1 << t)) for p in pts))
            for t in range(tmax + 1)]


# -- exact chain-coverage oracle (independent of the searcher) ---------------------

def seg_footprints(balls_, y):
    """Open x-intervals in which each open ball covers points of y-slice."""
    out = []
    for bl in balls_:
        dy = abs(bl.center.coords[1] - y) / 2
        if bl.radius > dy:
            half = bl.radius - dy
            out.append((bl.center.coords[0] - half, bl.center.coords[0] + half))
    return out


def covers_closed_interval(intervals, a, b):
    """Exact sweep: is [a,b] inside the union of the open intervals?"""
    cur = a
    for _ in range(len(intervals) + 1):
        if cur > b:
            return True
        nxt = None
        for lo, hi in intervals:
            if lo < cur < hi and (nxt is None or hi > nxt):
                nxt = hi
        if nxt is None:
            return False
        cur = nxt
    return cur > b


def test_coverage_oracle_sanity():
    assert covers_closed_interval([(F(0), F(1, 2)), (F(1, 4), F(1))], F(1, 8), F(3, 4))
    # touching open intervals leave the junction point uncovered
    assert not covers_closed_interval([(F(0), F(1, 2)), (F(1, 2), F(1))], F(1, 4), F(3, 4))
    assert not covers_closed_interval([(F(1, 4), F(1, 2))], F(1, 4), F(1, 2))


# -- quasi-chains -------------------------------------------------------------------

def assert_valid_chain(balls_, eps):
    assert max(2 * bl.radius for bl in balls_) < eps
    for i in range(len(balls_)):
        for j in range(i + 2, len(balls_)):
            assert balls_disjoint(balls_[i], balls_[j])


def test_quasi_chain_confirms_segment():
    d = quasi_chain_confirm(seg_name(), F(1, 4), Budget(10, 8))
    assert d.confirmed
    balls_ = list(d.witness.balls)
    assert_valid_chain(balls_, F(1, 4))
    # the witness really covers the segment: exact footprint sweep
    assert covers_closed_interval(seg_footprints(balls_, SEG_Y), SEG_A, SEG_B)


def test_quasi_chain_budget_monotone():
    assert quasi_chain_confirm(seg_name(), F(1, 4), Budget(12, 9)).confirmed


def test_quasi_chain_insufficient_budget_unknown():
    assert not quasi_chain_confirm(seg_name(), F(1, 4), Budget(4, 4)).confirmed


def test_quasi_chain_empty_set():
    d = quasi_chain_confirm(empty_upper(2), F(1, 8), Budget(4, 4))
    assert d.confirmed


def test_quasi_chain_eps_validation():
    with pytest.raises(ValueError):
        quasi_chain_confirm(seg_name(), 0, Budget(4, 4))


def test_not_quasichainable_family_plumbing():
    fam = not_quasichainable_family()
    assert fam.piece(2) is fam.piece(2)
    with pytest.raises(ValueError):
        fam.piece(-1)
    pair = PairName(seg_name(), seg_name())
    d = fam.piece(2).complement_semidecide(pair, Budget(10, 8))
    assert d.confirmed
    assert_valid_chain(list(d.witness.balls), F(1, 4))


# -- separation ---------------------------------------------------------------------

def two_segment_name(tmax=6):
    return upper_from_list(
        merged_covers(seg_covers(F(1, 8), F(3, 8), SEG_Y, tmax),
                      seg_covers(F(5, 8), F(7, 8), SEG_Y, tmax)), 2)


def test_separation_confirms_split_pair():
    x = two_segment_name()
    a = upper_from_list(points_covers([(F(1, 4), SEG_Y), (F(3, 4), SEG_Y)], 6), 2)
    d = separation_confirm(PairName(x, a), Budget(7, 6))
    assert d.confirmed
    c1, c2 = d.witness
    assert c1.balls and c2.balls
    for b1 in c1.balls:
        for b2 in c2.balls:
            assert balls_disjoint(b1, b2)


def test_separation_unknown_when_ambient_connected():
    x = seg_name(tmax=6)
    a = upper_from_list(points_covers([(F(1, 4), SEG_Y), (F(3, 4), SEG_Y)], 6), 2)
    assert not separation_confirm(PairName(x, a), Budget(7, 6)).confirmed


def test_separation_unknown_for_wrong_cluster_counts():
    x = two_segment_name()
    one = upper_from_list(points_covers([(F(1, 4), SEG_Y)], 6), 2)
    three = upper_from_list(
        points_covers([(F(1, 8), SEG_Y), (F(1, 2), SEG_Y), (F(7, 8), SEG_Y)], 6), 2)
    assert not separation_confirm(PairName(x, one), Budget(7, 6)).confirmed
    assert not separation_confirm(PairName(x, three), Budget(7, 6)).confirmed


def test_marked_removed():
    present_only_left = upper_from_list(points_covers([(F(1, 4), SEG_Y)], 6), 2)
    marked = (point(F(1, 4), SEG_Y), point(F(3, 4), SEG_Y))
    d = marked_removed_confirm(present_only_left, marked, Budget(7, 6))
    assert d.confirmed
    assert d.witness == point(F(3, 4), SEG_Y)
    both = upper_from_list(points_covers([(F(1, 4), SEG_Y), (F(3, 4), SEG_Y)], 6), 2)
    assert not marked_removed_confirm(both, marked, Budget(7, 6)).confirmed


# -- nerve --------------------------------------------------------------------------

def test_nerve_of_ball_path():
    balls_ = tuple(ball(point(F(i, 8), F(1, 2)), F(5, 64)) for i in range(1, 8))
    sc = nerve(cover(balls_))
    assert sc.edges == tuple((i, i + 1) for i in range(6))
    assert sc.triangles == ()
    assert homology(sc, 0) == (1, ())
    assert homology(sc, 1) == (0, ())


def test_nerve_of_ball_cycle():
    centers = [(F(1, 4), F(1, 4)), (F(3, 4), F(1, 4)), (F(3, 4), F(3, 4)), (F(1, 4), F(3, 4))]
    sc = nerve(cover(tuple(ball(point(*c), F(9, 32)) for c in centers)))
    assert sc.edges == ((0, 1), (0, 3), (1, 2), (2, 3))
    assert sc.triangles == ()
    assert homology(sc, 1) == (1, ())


def test_nerve_finds_triple_overlap():
    balls_ = (ball(point(F(1, 2), F(1, 2)), F(1, 8)),
              ball(point(F(9, 16), F(1, 2)), F(1, 8)),
              ball(point(F(1, 2), F(9, 16)), F(1, 8)))
    sc = nerve(cover(balls_))
    assert sc.triangles == ((0, 1, 2),)
    assert homology(sc, 1) == (0, ())


# -- simplicial complexes and homology ----------------------------------------------

def matmul(a, b):
    return [[sum(a[i][t] * b[t][j] for t in range(len(b)))
             for j in range(len(b[0]))] for i in range(len(a))]


def test_complex_validation():
    with pytest.raises(ValueError):
        SimplicialComplex(3, ((1, 0),), ())
    with pytest.raises(ValueError):
        SimplicialComplex(3, ((0, 1), (0, 2)), ((0, 1, 2),))  # (1,2) missing


def test_homology_four_cycle():
    sc = SimplicialComplex(4, ((0, 1), (0, 3), (1, 2), (2, 3)), ())
    assert homology(sc, 0) == (1, ())
    assert homology(sc, 1) == (1, ())
    assert homology(sc, 2) == (0, ())


def test_homology_filled_triangle():
    sc = SimplicialComplex(3, ((0, 1), (0, 2), (1, 2)), ((0, 1, 2),))
    assert homology(sc, 0) == (1, ())
    assert homology(sc, 1) == (0, ())
    assert homology(sc, 2) == (0, ())


def test_homology_tetrahedron_boundary():
    edges = tuple((i, j) for i in range(4) for j in range(i + 1, 4))
    faces = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))
    sc = SimplicialComplex(4, edges, faces)
    assert homology(sc, 0) == (1, ())
    assert homology(sc, 1) == (0, ())
    assert homology(sc, 2) == (1, ())


def test_homology_two_components():
    sc = SimplicialComplex(5, ((0, 1), (0, 3), (1, 2), (2, 3)), ())
    assert homology(sc, 0) == (2, ())


RP2_FACES = ((0, 1, 3), (0, 1, 5), (0, 2, 3), (0, 2, 4), (0, 4, 5),
             (1, 2, 4), (1, 2, 5), (1, 3, 4), (2, 3, 5), (3, 4, 5))


def test_homology_projective_plane_torsion():
    edges = tuple((i, j) for i in range(6) for j in range(i + 1, 6))
    # structural certificate that the face list is a closed surface with
    # Euler characteristic 1: every one of the 15 edges lies in exactly 2 faces
    cnt = Counter()
    for a, b, c in RP2_FACES:
        cnt[(a, b)] += 1
        cnt[(a, c)] += 1
        cnt[(b, c)] += 1
    assert len(edges) == 15
    assert all(cnt[e] == 2 for e in edges)
    assert 6 - 15 + len(RP2_FACES) == 1
    sc = SimplicialComplex(6, edges, RP2_FACES)
    assert homology(sc, 0) == (1, ())
    assert homology(sc, 1) == (0, (2,))
    assert homology(sc, 2) == (0, ())


def test_smith_normal_form_battery_against_oracle():
    rng = random.Random(20260815)
    for _ in range(100):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        m = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        u, s, v = smith_normal_form(m)
        assert matmul(matmul(u, s), v) == m
        assert abs(sympy.Matrix(u).det()) == 1
        assert abs(sympy.Matrix(v).det()) == 1
        diag = [s[i][i] for i in range(min(rows, cols))]
        for i in range(rows):
            for j in range(cols):
                if i != j:
                    assert s[i][j] == 0
        nz = [d for d in diag if d]
        assert all(d > 0 for d in nz)
        assert diag[:len(nz)] == nz
        for x, y in zip(nz, nz[1:]):
            assert y % x == 0
        expect = sympy_snf(sympy.Matrix(m), domain=sympy.ZZ)
        exp_nz = sorted(abs(int(expect[i, i]))
                        for i in range(min(rows, cols)) if expect[i, i] != 0)
        assert sorted(nz) == exp_nz


def random_complex(rng):
    n = rng.randint(3, 8)
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n)
                  if rng.random() < 0.55)
    eset = set(edges)
    tris = tuple((i, j, k) for (i, j) in edges for k in range(j + 1, n)
                 if (i, k) in eset and (j, k) in eset and rng.random() < 0.5)
    return SimplicialComplex(n, edges, tris)


def graph_components(n, edges):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    return len({find(i) for i in range(n)})


def test_boundary_and_euler_battery():
    rng = random.Random(77)
    for _ in range(100):
        sc = random_complex(rng)
        if sc.edges and sc.triangles:
            prod = matmul(sc.boundary_1(), sc.boundary_2())
            assert all(x == 0 for row in prod for x in row)
        b0, t0 = homology(sc, 0)
        assert t0 == ()
        assert b0 == graph_components(sc.n_vertices, sc.edges)
        b1, _ = homology(sc, 1)
        b2, t2 = homology(sc, 2)
        assert t2 == ()
        assert b0 - b1 + b2 == sc.n_vertices - len(sc.edges) + len(sc.triangles)


def test_piece_and_family_plumbing():
    calls = []

    def make(n):
        calls.append(n)
        return PiPiece(f"p{n}", lambda pair, b: None)

    fam = SigmaFamily("demo", make)
    fam.piece(3)
    fam.piece(3)
    assert calls == [3]
