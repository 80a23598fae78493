import math

import numpy as np
import pytest

from moebius_ptolemy import model_space as ms
from moebius_ptolemy.errors import DegenerateInputError, InputError, PreconditionError
from moebius_ptolemy.model_space import INFINITY


def e(i, n=2):
    v = np.zeros(n)
    v[i] = 1.0
    return v


def close_pt(p, q, tol=1e-12):
    if ms.is_infinity(p) or ms.is_infinity(q):
        return ms.is_infinity(p) and ms.is_infinity(q)
    return np.linalg.norm(np.asarray(p) - np.asarray(q)) <= tol


def test_chordal_distance_examples():
    assert ms.chordal_distance(np.zeros(2), INFINITY) == pytest.approx(2.0)
    assert ms.chordal_distance(np.zeros(2), e(0)) == pytest.approx(math.sqrt(2))
    assert ms.chordal_distance(e(1), e(1)) == 0
    assert ms.chordal_distance(INFINITY, INFINITY) == 0


def test_chordal_matrix_matches_scalar():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(6, 3))
    mask = np.zeros(6, bool)
    mask[2] = True
    D = ms.chordal_matrix(X, mask)
    pts = [INFINITY if m else x for x, m in zip(X, mask)]
    for i in range(6):
        for j in range(6):
            assert D[i, j] == pytest.approx(ms.chordal_distance(pts[i], pts[j]), abs=1e-15)


def test_apply_examples():
    inv = ms.unit_inversion(np.zeros(2))
    assert np.allclose(ms.apply(inv, np.array([2.0, 0])), [0.5, 0])
    assert ms.apply(inv, np.zeros(2)) is INFINITY
    assert np.allclose(ms.apply(inv, INFINITY), 0)
    assert np.allclose(ms.apply(ms.identity(2), np.array([3.0, 4])), [3, 4])


def test_group_operations():
    rng = np.random.default_rng(1)
    P = ms.probe_points(3, 10, seed=2)
    for _ in range(5):
        m = ms.random_map_word(3, 4, rng)
        assert ms.max_action_gap(ms.compose(m, ms.inverse(m)), ms.identity(3), P) <= 1e-12
    t = ms.inverse(ms.translation(np.array([1.0, 2, 3])))
    assert np.allclose(ms.apply(t, np.zeros(3)), [-1, -2, -3])
    u = ms.unit_inversion(np.array([1.0, 0, 0]))
    assert ms.max_action_gap(ms.compose(u, u), ms.identity(3), P) <= 1e-12


def test_inverting_factor_inverse_keeps_scale():
    f = ms.MoebiusMapNF(np.array([1.0, 0]), True, np.eye(2), 4.0, np.array([0.0, 2]))
    g = f.inverse()
    assert g.lam == 4.0
    x = np.array([0.3, -1.2])
    assert np.allclose(g(f(x)), x)


def test_normal_form_rejects_bad_parts():
    with pytest.raises(InputError):
        ms.MoebiusMapNF(np.zeros(2), False, np.array([[1.0, 1], [0, 1]]), 1.0, np.zeros(2))
    with pytest.raises(InputError):
        ms.MoebiusMapNF(np.zeros(2), False, np.eye(2), 0.0, np.zeros(2))


def test_map_word_json_round_trip():
    rng = np.random.default_rng(3)
    m = ms.random_map_word(2, 3, rng)
    back = ms.MapWord.from_list(m.to_list())
    assert ms.max_action_gap(m, back, ms.probe_points(2, 10)) == 0.0
    assert set(m.to_list()[0]) == {"a", "invert", "A", "lambda", "b"}


def test_normalize_and_reduce_agree_with_word():
    rng = np.random.default_rng(4)
    P = ms.probe_points(3, 10, seed=1)
    for _ in range(10):
        m = ms.random_map_word(3, 3, rng)
        nf = ms.normalize(m)
        assert ms.max_action_gap(m, ms.MapWord((nf,)), P) <= 1e-8
        assert ms.max_action_gap(m, ms.reduce_word(m), P) <= 1e-9


def test_homothety_reduces_to_similarity():
    h = ms.reduce_word(ms.homothety(np.array([1.0, 2]), 9.0))
    assert len(h) == 1 and not h.factors[0].invert
    assert h.factors[0].lam == pytest.approx(9.0)


def test_crt_invariance_under_maps():
    rng = np.random.default_rng(5)
    pts = [rng.normal(size=3) for _ in range(3)] + [INFINITY]
    base = ms.chordal_crt(pts)
    for _ in range(10):
        m = ms.random_map_word(3, 4, rng)
        assert base.distance(ms.chordal_crt([ms.apply(m, p) for p in pts])) <= 1e-9


def test_unit_sphere_inversion_axioms():
    phi = ms.strong_inversion(np.zeros(2), INFINITY, radius=1.0)
    x = np.array([3.0, 4.0])
    assert np.allclose(ms.apply(phi, x), x / 25)
    t = np.linspace(0, 2 * np.pi, 7)
    for p in np.stack([np.cos(t), np.sin(t)], axis=1):
        assert np.allclose(ms.apply(phi, p), p)
    assert ms.apply(phi, np.zeros(2)) is INFINITY
    assert np.allclose(ms.apply(phi, INFINITY), 0)
    img = ms.apply(phi, np.array([2.0, 2.0]))
    assert abs(img[0] - img[1]) < 1e-15  # stays on the line through 0


def test_strong_inversion_is_involution():
    phi = ms.strong_inversion(np.array([1.0, -1, 0.5]), np.array([0.0, 2, 0]), radius=0.7)
    P = ms.probe_points(3, 20, seed=9)
    assert ms.max_action_gap(ms.compose(phi, phi), ms.identity(3), P) <= 1e-12


def test_strong_inversion_with_witness():
    phi = ms.strong_inversion(np.zeros(2), 2 * e(0), witness=e(0))
    assert close_pt(ms.apply(phi, np.zeros(2)), 2 * e(0), 1e-12)
    assert close_pt(ms.apply(phi, 2 * e(0)), np.zeros(2), 1e-12)
    assert close_pt(ms.apply(phi, e(0)), e(0), 1e-12)


def test_strong_inversion_errors():
    with pytest.raises(InputError):
        ms.strong_inversion(np.zeros(2), np.zeros(2), radius=1.0)
    with pytest.raises(InputError):
        ms.strong_inversion(np.zeros(2), INFINITY, witness=np.zeros(2))


def test_verify_s_inversion_controls():
    om, om2 = np.zeros(2), INFINITY
    sphere = ms.sphere_points(om, om2, 1.0, 30)
    circles = ms.circles_through_poles(om, om2, 5)
    good = ms.verify_s_inversion(ms.strong_inversion(om, om2, radius=1.0), om, om2, sphere, circles)
    assert good.ok
    bad = ms.verify_s_inversion(ms.homothety(om, 4.0), om, om2, sphere, circles)
    assert not bad.passed["involution"]
    refl = ms.verify_s_inversion(ms.hyperplane_reflection(e(1), np.zeros(2)), om, om2, sphere, circles)
    assert not refl.passed["pole_swap"]


def test_homothety_examples():
    h = ms.homothety(np.zeros(2), 4.0)
    assert np.allclose(ms.apply(h, e(0)), 4 * e(0))
    assert len(h) == 2  # two inversions
    P = ms.probe_points(2, 10)
    assert ms.max_action_gap(ms.homothety(np.zeros(2), 1.0), ms.identity(2), P) <= 1e-12
    with pytest.raises(InputError):
        ms.homothety(np.zeros(2), -1.0)


def test_transit_homothety():
    line = ms.circle_through(np.zeros(2), e(0), INFINITY)
    h, lam = ms.transit_homothety(line, INFINITY, np.zeros(2), e(0), 3 * e(0))
    assert lam == pytest.approx(3.0)
    assert np.allclose(ms.apply(h, e(0)), 3 * e(0))
    h, lam = ms.transit_homothety(line, INFINITY, np.zeros(2), e(0), e(0))
    assert lam == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        ms.transit_homothety(line, INFINITY, np.zeros(2), e(0), -e(0))


def test_shift_approx_translation():
    sa = ms.shift_approx(np.zeros(2), e(0))
    y = np.array([0.3, -2.0])
    for lam, w in zip(sa.schedule, sa.words):
        assert np.allclose(ms.apply(w, y), y + (1 - lam) * e(0), atol=1e-11)
    assert np.allclose(ms.apply(sa.limit, y), y + e(0), atol=1e-12)
    assert sa.limit_gap <= 1e-10


def test_shift_approx_identity_and_errors():
    x = np.array([1.0, 1.0])
    sa = ms.shift_approx(x, x)
    P = ms.probe_points(2, 5)
    for w in sa.words:
        assert ms.max_action_gap(w, ms.identity(2), P) <= 1e-12
    with pytest.raises(InputError):
        ms.shift_approx(np.zeros(2), e(0), schedule=[0.5, 0.6, 0.1])


def test_shift_with_finite_omega():
    om = np.array([5.0, 5.0])
    sa = ms.shift_approx(np.zeros(2), e(0), omega=om)
    assert close_pt(ms.apply(sa.limit, np.zeros(2)), e(0), 1e-9)
    assert close_pt(ms.apply(sa.limit, om), om, 1e-9)


def test_circle_through_examples():
    line = ms.circle_through(np.zeros(2), e(0), 2 * e(0))
    assert isinstance(line, ms.LineWithInfinity) and abs(abs(line.direction @ e(0)) - 1) < 1e-15
    c = ms.circle_through(np.zeros(2), e(0), e(1))
    assert np.allclose(c.center, [0.5, 0.5]) and c.radius == pytest.approx(math.sqrt(2) / 2)
    line = ms.circle_through(np.zeros(2), e(0), INFINITY)
    assert isinstance(line, ms.LineWithInfinity)
    with pytest.raises(DegenerateInputError):
        ms.circle_through(np.zeros(2), np.zeros(2), e(0))


def test_map_circle_examples():
    inv = ms.unit_inversion(np.zeros(2))
    line = ms.circle_through(e(0), e(0) + e(1), INFINITY)
    img = ms.map_circle(inv, line)
    assert isinstance(img, ms.Circle)
    assert np.allclose(img.center, [0.5, 0]) and img.radius == pytest.approx(0.5)
    through = ms.circle_through(np.zeros(2), e(0) + e(1), INFINITY)
    assert ms.same_circle(ms.map_circle(inv, through), through)
    c = ms.circle_through(np.zeros(2), e(0), e(1))
    moved = ms.map_circle(ms.translation(np.array([2.0, 3])), c)
    assert moved.radius == pytest.approx(c.radius) and np.allclose(moved.center, c.center + [2, 3])


def test_intersect_circles_examples():
    c1 = ms.circle_through(e(0), e(1), -e(0))
    c2 = ms.circle_through(np.zeros(2), 2 * e(0), e(0) + e(1))
    pts = ms.intersect_circles(c1, c2)
    assert len(pts) == 2
    want = [np.array([0.5, -math.sqrt(3) / 2]), np.array([0.5, math.sqrt(3) / 2])]
    for p, q in zip(pts, want):
        assert np.allclose(p, q)
    l1 = ms.circle_through(np.zeros(2), e(0), INFINITY)
    l2 = ms.circle_through(e(1), e(0) + e(1), INFINITY)
    assert ms.intersect_circles(l1, l2) == [INFINITY]
    small = ms.circle_through(e(0), e(1), -e(0))
    big = ms.circle_through(2 * e(0), 2 * e(1), -2 * e(0))
    assert ms.intersect_circles(small, big) == []
    with pytest.raises(DegenerateInputError):
        ms.intersect_circles(small, ms.circle_through(-e(1), e(0), e(1)))


def test_intersect_crossing_lines_meet_twice():
    l1 = ms.circle_through(np.zeros(2), e(0), INFINITY)
    l2 = ms.circle_through(np.zeros(2), e(1), INFINITY)
    pts = ms.intersect_circles(l1, l2)
    assert len(pts) == 2 and any(ms.is_infinity(p) for p in pts)


def test_ptolemy_equality_examples():
    c = ms.circle_through(e(0), e(1), -e(0))
    pts = [e(0), e(1), -e(0), -e(1)]
    assert ms.verify_ptolemy_equality(c, pts) <= 1e-15
    line = ms.circle_through(np.zeros(1), np.ones(1), INFINITY)
    assert ms.verify_ptolemy_equality(line, [np.zeros(1), np.ones(1), 3 * np.ones(1), INFINITY]) <= 1e-15
    rng = np.random.default_rng(7)
    m = ms.random_map_word(2, 3, rng)
    assert ms.verify_ptolemy_equality(ms.map_circle(m, c), [ms.apply(m, p) for p in pts]) <= 1e-10


def test_ptolemy_equality_rejects_points_off_circle():
    c = ms.circle_through(e(0), e(1), -e(0))
    with pytest.raises(PreconditionError):
        ms.verify_ptolemy_equality(c, [e(0), e(1), -e(0), 2 * e(1)])


def test_dimension_cap():
    from moebius_ptolemy.coordinatization import build_chart
    from moebius_ptolemy.suites import Config

    with pytest.raises(InputError):
        Config(dim=ms.MAX_DIM + 1)
    with pytest.raises(InputError):
        build_chart(ms.MAX_DIM + 1)
