import math

import numpy as np
import pytest

from moebius_ptolemy import busemann as bz
from moebius_ptolemy import model_space as ms
from moebius_ptolemy.errors import InputError, PreconditionError

XAXIS = bz.ParamLine(np.zeros(2), np.array([1.0, 0.0]))


def test_param_line_normalizes_direction():
    line = bz.ParamLine(np.zeros(2), np.array([3.0, 4.0]))
    assert np.linalg.norm(line.direction) == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(line(5.0), [3, 4])
    with pytest.raises(InputError):
        bz.ParamLine(np.zeros(2), np.zeros(2))


@pytest.mark.parametrize("x, want", [((0.0, 1.0), 0.0), ((1.0, 1.0), -1.0), ((2.5, 0.0), -2.5)])
def test_limit_and_closed_form(x, want):
    b = bz.BusemannFn(XAXIS)
    assert bz.busemann_value_limit(XAXIS, np.array(x), 1e6) == pytest.approx(want, abs=1e-5)
    assert bz.busemann_closed(b, np.array(x)) == pytest.approx(want, abs=1e-15)
    assert b(np.array(x)) == bz.busemann_closed(b, np.array(x))


def test_limit_is_monotone_and_within_bound():
    x = np.array([2.0, -3.0])
    b = bz.BusemannFn(XAXIS)
    vals = [bz.busemann_value_limit(XAXIS, x, t) for t in (10.0, 100.0, 1000.0, 1e4)]
    assert all(v2 <= v1 + 1e-12 for v1, v2 in zip(vals, vals[1:]))
    for t in (10.0, 100.0, 1e4):
        assert abs(bz.busemann_value_limit(XAXIS, x, t) - b(x)) <= bz.limit_error_bound(XAXIS, x, t) + 1e-12


def test_busemann_on_line_and_flatness():
    b = bz.BusemannFn(XAXIS)
    assert b(XAXIS(4.0)) == -4.0
    assert b(np.zeros(2)) == 0
    rng = np.random.default_rng(0)
    for x in rng.normal(size=(20, 2)) * 5:
        assert abs(b(x) + b.opposite()(x)) <= 1e-12


def test_parallel_line_through():
    par = bz.parallel_line_through(XAXIS, np.array([0.0, 1.0]))
    assert np.allclose(par(2.0), [2, 1])
    same = bz.parallel_line_through(XAXIS, np.array([3.0, 0.0]))
    assert XAXIS.distance_to(same(10.0)) == 0
    assert bz.are_busemann_parallel(XAXIS, par)
    assert bz.check_sublinear_divergence(XAXIS, par, 1e6) <= 1e-6


def test_sublinear_divergence_examples():
    par = bz.ParamLine(np.array([0.0, 5.0]), np.array([1.0, 0.0]))
    assert bz.check_sublinear_divergence(XAXIS, par, 1e4) <= 5 / 1e4 + 1e-15
    perp = bz.ParamLine(np.zeros(2), np.array([0.0, 1.0]))
    assert bz.check_sublinear_divergence(XAXIS, perp, 1e6) == pytest.approx(math.sqrt(2))
    assert bz.check_sublinear_divergence(XAXIS, XAXIS, 1e6) == 0
    with pytest.raises(InputError):
        bz.check_sublinear_divergence(XAXIS, perp, 10.0)


def test_foliation_round_trip():
    line = bz.ParamLine(np.array([1.0, 2, 3]), np.array([1.0, 1, 0]))
    rng = np.random.default_rng(1)
    b = bz.BusemannFn(line)
    for x in rng.normal(size=(30, 3)) * 4:
        t, z = bz.foliation_coordinates(line, x)
        assert abs(b(z)) <= 1e-12
        assert np.linalg.norm(bz.foliation_point(line, t, z) - x) <= 1e-12


def test_phi_t_example():
    for t in (10.0, 1e3, 1e6):
        img = ms.apply(bz.phi_t(XAXIS, t), np.array([1.0, 0.0]))
        assert np.allclose(img, [-t / (t - 1), 0], rtol=1e-12)
    img = ms.apply(bz.phi_t(XAXIS, 1e6), np.array([0.0, 1.0]))
    assert np.linalg.norm(img - [0, 1]) <= 2e-6


def test_horosphere_symmetry_limit_converges():
    res = bz.horosphere_symmetry_limit(XAXIS)
    assert res.error_at(1e6) <= 1e-4
    assert max(res.ratios()) <= 0.6
    assert res.fixed_residual <= 1e-6
    assert res.isometry_distortion <= 1e-10
    assert np.allclose(ms.apply(res.limit, np.array([1.0, 0.0])), [-1, 0])
    assert np.allclose(ms.apply(res.limit, np.array([0.0, 1.0])), [0, 1])
    table = res.table()
    assert len(table) == len(res.ts) and set(table[0]) == {"t", "error"}


def test_horosphere_symmetry_limit_rejects_short_schedule():
    from moebius_ptolemy.errors import ConvergenceError

    with pytest.raises((ConvergenceError, InputError)):
        bz.horosphere_symmetry_limit(XAXIS, steps=2)


def test_projection_examples():
    chart = bz.ProjectionChart.of(XAXIS)
    x = np.array([0.0, 3.0])
    assert np.array_equal(bz.project(chart, x), x)
    y = np.array([2.0, -1.0])
    p = bz.project(chart, y)
    assert np.allclose(bz.project(chart, p), p)
    perp = bz.ParamLine(np.zeros(2), np.array([0.0, 1.0]))
    assert bz.projection_alpha(chart, perp) == pytest.approx(1.0)
    th = math.pi / 6
    tilted = bz.ParamLine(np.zeros(2), np.array([math.cos(th), math.sin(th)]))
    assert bz.projection_alpha(chart, tilted) == pytest.approx(0.5)
    rep = bz.check_projected_line(chart, tilted, np.linspace(-3, 3, 7))
    assert rep.collinearity <= 1e-12 and rep.alpha_residual <= 1e-12


def test_homogen_ratios():
    chart = bz.ProjectionChart.of(XAXIS)
    th = math.pi / 6
    tilted = bz.ParamLine(np.zeros(2), np.array([math.cos(th), math.sin(th)]))
    rep = bz.homogen_ratio_check(chart, tilted, 0.0, 1.0, 2.0)
    assert rep.ratios == pytest.approx([0.5] * 3)
    perp = bz.ParamLine(np.zeros(2), np.array([0.0, 1.0]))
    assert bz.homogen_ratio_check(chart, perp, 0.0, 1.0, 2.0).ratios == pytest.approx([1.0] * 3)
    degenerate = bz.homogen_ratio_check(chart, XAXIS, 0.0, 1.0, 2.0)
    assert degenerate.degenerate and degenerate.ratios == pytest.approx([0.0] * 3)


def test_a_shift():
    sh = bz.a_shift(XAXIS, 2.0)
    assert len(sh) == 2
    assert np.allclose(ms.apply(sh, np.array([0.5, 7.0])), [2.5, 7.0])
    rng = np.random.default_rng(3)
    back = bz.a_shift(XAXIS.reversed(), 2.0)
    for p in rng.normal(size=(10, 2)) * 3:
        assert np.linalg.norm(ms.apply(sh, p) - p) == pytest.approx(2.0)
        assert np.allclose(ms.apply(back, ms.apply(sh, p)), p)
    with pytest.raises(InputError):
        bz.a_shift(XAXIS, 0.0)


def test_lemma_3eq_rectangle():
    l2 = bz.ParamLine(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    x, y = np.zeros(2), np.array([2.0, 0.0])
    x2, y2 = np.array([0.0, 1.0]), np.array([2.0, 1.0])
    rep = bz.lemma_3eq_suite(XAXIS, l2, x, y, x2, y2)
    assert rep.ok
    assert set(rep.residuals) == {"xy=x'y'", "xx'=yy'", "xy'=yx'", "x'y>=xx'", "diamond"}
    assert bz.lemma_3eq_suite(XAXIS, l2, x, x, x2, x2).ok


def test_lemma_3eq_needs_matched_values():
    l2 = bz.ParamLine(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        bz.lemma_3eq_suite(XAXIS, l2, np.zeros(2), np.array([2.0, 0]), np.array([0.5, 1.0]), np.array([2.0, 1.0]))


def test_matched_configurations_pass():
    rng = np.random.default_rng(8)
    for _ in range(50):
        assert bz.lemma_3eq_suite(*bz.matched_configuration(3, rng)).ok
