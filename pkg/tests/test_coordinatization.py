import math

import numpy as np
import pytest

from moebius_ptolemy import coordinatization as co
from moebius_ptolemy import model_space as ms
from moebius_ptolemy.busemann import ParamLine
from moebius_ptolemy.errors import DescentTerminated, InputError


def test_descend_in_three_space():
    step = co.descend(co.Subspace.full(3))
    assert step.dim == 3
    assert np.allclose(step.line.direction, [1, 0, 0])
    assert np.allclose(step.unit_point, [1, 0, 0])
    assert step.horosphere.contains(np.array([0.0, 5.0, -2.0]))
    assert not step.horosphere.contains(np.array([0.1, 0.0, 0.0]))
    assert step.next_subspace.dim == 2
    assert abs(step.next_line.direction @ step.line.direction) < 1e-15


def test_descend_bottom_of_chain():
    last = co.descend(co.Subspace.full(1))
    assert last.terminal and last.next_subspace.dim == 0
    with pytest.raises(DescentTerminated):
        co.descend(last.next_subspace)


def test_descend_rejects_line_outside_subspace():
    with pytest.raises(InputError):
        co.descend(co.Subspace.full(2), ParamLine(np.array([1.0, 1.0]), np.array([1.0, 0.0])))


def test_build_chart_small_cases():
    chart, steps = co.build_chart(1)
    assert chart.dimension == 1 and len(steps) == 1
    assert np.allclose(chart.coordinates(np.array([2.5])), [2.5])
    chart, _ = co.build_chart(2)
    assert np.allclose(np.abs(chart.directions[1]), [0, 1])
    assert chart.to_dict()["dimension"] == 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_unit_points_and_descent_length(n):
    chart, steps = co.build_chart(n)
    assert len(steps) == n
    units = [s.unit_point for s in steps]
    for i, a in enumerate(units):
        assert abs(np.linalg.norm(a - chart.origin) - 1) <= 1e-12
        for b in units[i + 1:]:
            assert abs(np.linalg.norm(a - b) - math.sqrt(2)) <= 1e-12


def test_chart_with_custom_origin_and_direction():
    o = np.array([1.0, -2.0, 0.5])
    chart, steps = co.build_chart(3, origin=o, first_direction=np.array([1.0, 1.0, 1.0]))
    assert np.allclose(chart.directions @ chart.directions.T, np.eye(3), atol=1e-12)
    assert np.allclose(chart.coordinates(o), 0)
    x = np.array([3.0, 1.0, -1.0])
    assert np.linalg.norm(chart.point(chart.coordinates(x)) - x) <= 1e-12


def test_busemann_coordinate_sign():
    chart, _ = co.build_chart(2)
    x = chart.line(0)(3.0)
    assert chart.busemann_coordinates(x)[0] == pytest.approx(-3.0)


def test_componentwise_reconstruction_and_horospheres():
    chart, _ = co.build_chart(4)
    rng = np.random.default_rng(0)
    for x in rng.normal(size=(10, 4)) * 3:
        parts = sum(chart.component(x, i) - chart.origin for i in range(4)) + chart.origin
        assert np.linalg.norm(parts - x) <= 1e-12
        assert np.linalg.norm(co.horosphere_intersection(chart, x) - x) <= 1e-12


def test_translation_map():
    chart, _ = co.build_chart(2)
    T = co.translation_map(chart, np.array([1.0, 2.0]))
    y = np.array([0.3, -0.4])
    assert np.allclose(ms.apply(T, y), y + [1, 2])
    rep = co.translation_isometry_check(chart, np.zeros(2), [(np.ones(2), -np.ones(2))])
    assert rep.distortion == 0
    rng = np.random.default_rng(1)
    pairs = [(rng.normal(size=2), rng.normal(size=2)) for _ in range(100)]
    assert co.translation_isometry_check(chart, np.array([1.0, 2.0]), pairs).distortion <= 1e-10


def test_homothety_scaling():
    chart, _ = co.build_chart(3)
    e1 = np.array([1.0, 0, 0])
    assert co.homothety_scaling_check(chart, 1.0, [e1]).residual <= 1e-15
    assert co.homothety_scaling_check(chart, 4.0, [e1]).residual <= 1e-14
    rng = np.random.default_rng(2)
    rep = co.homothety_scaling_check(chart, 3.0, list(rng.normal(size=(10, 3))))
    assert rep.residual <= 1e-10 and rep.norm_ratio_residual <= 1e-12
    with pytest.raises(InputError):
        co.homothety_scaling_check(chart, 0.0, [e1])


def test_norm_axioms():
    chart, _ = co.build_chart(2)
    assert chart.norm(chart.origin) == 0
    assert chart.norm(chart.add(np.array([1.0, 0]), np.array([0.0, 1]))) == pytest.approx(math.sqrt(2))
    rng = np.random.default_rng(3)
    rep = co.norm_axiom_check(chart, list(rng.normal(size=(15, 2))))
    assert rep.zero_ok and rep.triangle_violation == 0
    assert rep.homogeneity <= 1e-12 and rep.metric_residual <= 1e-12 and rep.symmetry <= 1e-12


def test_schoenberg_examples():
    chart, _ = co.build_chart(3)
    rng = np.random.default_rng(4)
    ok = co.schoenberg_check(co.chart_norm(chart), list(rng.normal(size=(10, 3))), 3)
    assert ok.passed and ok.defect <= 1e-9
    assert np.allclose(ok.gram, np.eye(3))
    l1 = co.schoenberg_check(lambda v: float(np.sum(np.abs(v))), [np.array([1.0, 0]), np.array([0.0, 1])], 2)
    assert l1.defect == pytest.approx(4.0) and not l1.passed
    one, _ = co.build_chart(1)
    assert co.schoenberg_check(co.chart_norm(one), [np.array([2.0]), np.array([-0.5])], 1).defect <= 1e-15


def test_inner_product_distance_recovers_metric():
    chart, _ = co.build_chart(3)
    G = np.eye(3)
    x, y = np.array([1.0, 2, 3]), np.array([-1.0, 0, 4])
    assert co.inner_product_distance(chart, G, x, y) == pytest.approx(np.linalg.norm(x - y), rel=1e-12)
