from fractions import Fraction

import numpy as np
import pytest

from moebius_ptolemy.core_metric import (
    INF,
    ExtendedMetricSpace,
    MetricSphereSpec,
    from_points,
    is_inf,
    metric_inversion,
    metric_sphere,
    rescale,
    validate,
)
from moebius_ptolemy.cross_ratio import EXHAUSTIVE, admissible_quadruples, crt, is_ptolemy, moebius_equivalent
from moebius_ptolemy.errors import InputError, PreconditionError


def line_space(with_omega=False):
    ids = ["o", "a", "b"]
    D = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    if with_omega:
        ids.append("w")
        for row in D:
            row.append(INF)
        D.append([INF, INF, INF, 0])
        return ExtendedMetricSpace(tuple(ids), D, "w")
    return ExtendedMetricSpace(tuple(ids), D)


def test_collinear_points_validate():
    assert validate(line_space()).ok


def test_symmetry_violation_reported_with_witness():
    s = ExtendedMetricSpace(("a", "b", "c"), [[0, 1, 1], [2, 0, 1], [1, 1, 0]])
    rep = validate(s)
    sym = [v for v in rep.violations if v.axiom == "symmetry"]
    assert sym and set(sym[0].witness) == {"a", "b"}


def test_finite_distance_to_omega_is_a_violation():
    s = ExtendedMetricSpace(("a", "b", "w"), [[0, 1, INF], [1, 0, 5], [INF, 5, 0]], "w")
    assert any(v.axiom == "infinite-point" for v in validate(s).violations)


def test_triangle_violation_found():
    s = ExtendedMetricSpace(("a", "b", "c"), [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    tri = [v for v in validate(s).violations if v.axiom == "triangle"]
    assert tri and tri[0].witness == ("a", "b", "c")


def test_sampled_triangle_mode_above_threshold():
    rng = np.random.default_rng(3)
    s = from_points(list(rng.normal(size=(30, 2))) + [None])
    rep = validate(s, sample_above=10, samples=2000)
    assert rep.ok and rep.triangle_mode.startswith("sample")


@pytest.mark.parametrize("table", [
    [[0, 1], [1, 0], [1, 1]],
    [[0, -1], [-1, 0]],
    [[0, float("nan")], [1, 0]],
    [[0, float("inf")], [float("inf"), 0]],
])
def test_malformed_tables_rejected(table):
    with pytest.raises(InputError):
        ExtendedMetricSpace(("a", "b"), table)


def test_inversion_formula():
    inv = metric_inversion(line_space(), "o", 1)
    assert inv.d("a", "b") == pytest.approx(0.5)
    assert is_inf(inv.d("a", "o"))
    assert inv.d("o", "o") == 0
    assert inv.infinite_point == "o"


def test_inversion_limit_convention_for_old_omega():
    inv = metric_inversion(line_space(with_omega=True), "o", 1)
    assert inv.d("w", "a") == 1
    assert inv.d("w", "b") == pytest.approx(0.5)


def test_inversion_at_omega_or_missing_point_rejected():
    s = line_space(with_omega=True)
    with pytest.raises(InputError):
        metric_inversion(s, "w")
    with pytest.raises(InputError):
        metric_inversion(s, "zz")
    with pytest.raises(InputError):
        metric_inversion(s, "o", 0)


def test_inversion_is_involutive():
    rng = np.random.default_rng(0)
    s = from_points(list(rng.normal(size=(8, 3))) + [None], infinite_point=None)
    r = 1.7
    back = metric_inversion(metric_inversion(s, s.point_ids[2], r), s.infinite_point, r)
    for i in range(len(s)):
        for j in range(len(s)):
            a, b = s.distances[i][j], back.distances[i][j]
            if is_inf(a):
                assert is_inf(b)
            else:
                assert b == pytest.approx(a, rel=1e-12, abs=1e-15)


def test_inversion_exact_arithmetic():
    s = ExtendedMetricSpace(("o", "a", "b"), [[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    inv = metric_inversion(s, "o", Fraction(1))
    assert inv.d("a", "b") == Fraction(1, 2)


def test_inversion_preserves_crt_and_ptolemy():
    rng = np.random.default_rng(1)
    s = from_points(list(rng.normal(size=(6, 2))) + [None])
    inv = metric_inversion(s, s.point_ids[0], 0.8)
    for q in admissible_quadruples(s.point_ids):
        assert crt(s, q).distance(crt(inv, q)) <= 1e-12
    assert is_ptolemy(inv, EXHAUSTIVE, 1e-12).passed


def test_rescale():
    s = ExtendedMetricSpace(("a", "b"), [[0, 3], [3, 0]])
    assert rescale(s, 2).d("a", "b") == 6
    assert rescale(s, 1) == s
    with pytest.raises(InputError):
        rescale(s, 0)
    assert moebius_equivalent(line_space(), rescale(line_space(), 5)).discrepancy == 0


def grid_space():
    pts = {"o": (0.0, 0.0)}
    for k in range(8):
        t = 2 * np.pi * k / 8
        pts[f"u{k}"] = (np.cos(t), np.sin(t))
        pts[f"v{k}"] = (2 * np.cos(t), 2 * np.sin(t))
    ids = list(pts) + ["w"]
    return from_points([np.array(p) for p in pts.values()] + [None], ids)


def test_metric_sphere_radius_and_witness():
    s = grid_space()
    unit = metric_sphere(s, MetricSphereSpec("o", "w", radius=1.0))
    assert unit == {f"u{k}" for k in range(8)}
    assert metric_sphere(s, MetricSphereSpec("o", "w", witness="v3")) == {f"v{k}" for k in range(8)}
    assert metric_sphere(s, MetricSphereSpec("o", "w", radius=5.0)) == set()


def test_metric_sphere_needs_far_point_at_infinity():
    s = grid_space()
    with pytest.raises(PreconditionError):
        metric_sphere(s, MetricSphereSpec("o", "u1", radius=1.0))
    with pytest.raises(InputError):
        MetricSphereSpec("o", "o", radius=1.0)
