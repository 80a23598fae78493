"""Finite extended metric spaces.

A space is a finite set of point ids, a symmetric distance table and at most
one infinitely remote point ``omega``.  Distances are plain numbers (float,
int or :class:`fractions.Fraction`) or the :data:`INF` sentinel; IEEE
infinities never appear in a table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import InputError, PreconditionError

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-15
TRIANGLE_SAMPLE_THRESHOLD = 200


class Infinite:
    """The extended distance value ``∞``."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (Infinite, ())


INF = Infinite()


def is_inf(value) -> bool:
    return value is INF


def tolerance(scale, rel_tol=DEFAULT_REL_TOL, abs_tol=DEFAULT_ABS_TOL) -> float:
    """Relative tolerance at ``scale`` with an absolute floor."""
    return max(rel_tol * abs(float(scale)), abs_tol)


def close(a, b, rel_tol=DEFAULT_REL_TOL, abs_tol=DEFAULT_ABS_TOL) -> bool:
    if is_inf(a) or is_inf(b):
        return a is b
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a == b or abs(a - b) <= tolerance(max(abs(a), abs(b)), rel_tol, abs_tol)
    return abs(a - b) <= tolerance(max(abs(a), abs(b)), rel_tol, abs_tol)


@dataclass(frozen=True)
class ExtendedMetricSpace:
    point_ids: tuple
    distances: tuple
    infinite_point: Hashable | None = None
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "point_ids", tuple(self.point_ids))
        object.__setattr__(self, "distances", tuple(tuple(row) for row in self.distances))
        n = len(self.point_ids)
        if len(set(self.point_ids)) != n:
            raise InputError("point ids must be unique")
        if len(self.distances) != n or any(len(row) != n for row in self.distances):
            raise InputError(f"distance table must be {n}x{n}")
        for row in self.distances:
            for v in row:
                if is_inf(v):
                    continue
                if not isinstance(v, Real) or isinstance(v, bool):
                    raise InputError(f"non-numeric distance entry {v!r}")
                if v != v or v in (float("inf"), float("-inf")):
                    raise InputError("NaN or IEEE infinity in distance table; use INF")
                if v < 0:
                    raise InputError(f"negative distance entry {v!r}")
        if self.infinite_point is not None and self.infinite_point not in self.point_ids:
            raise InputError(f"infinite point {self.infinite_point!r} is not a point of the space")
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(self.point_ids)})

    def __len__(self):
        return len(self.point_ids)

    def index(self, pid) -> int:
        try:
            return self._index[pid]
        except KeyError:
            raise InputError(f"unknown point id {pid!r}") from None

    def d(self, x, y):
        return self.distances[self.index(x)][self.index(y)]

    @property
    def finite_ids(self) -> tuple:
        """Ids of X_omega, the points other than the infinite one."""
        return tuple(p for p in self.point_ids if p != self.infinite_point)

    @property
    def is_exact(self) -> bool:
        return all(is_inf(v) or isinstance(v, (int, Fraction)) for row in self.distances for v in row)

    def submatrix(self, ids: Sequence) -> np.ndarray:
        idx = [self.index(p) for p in ids]
        return np.array([[float(self.distances[i][j]) for j in idx] for i in idx], dtype=float)


@dataclass(frozen=True)
class MetricSphereSpec:
    center: Hashable
    far_point: Hashable
    radius: float | None = None
    witness: Hashable | None = None

    def __post_init__(self):
        if self.center == self.far_point:
            raise InputError("sphere center and far point must differ")
        if (self.radius is None) == (self.witness is None):
            raise InputError("give exactly one of radius or witness")
        if self.radius is not None and not self.radius > 0:
            raise InputError("sphere radius must be positive")


@dataclass(frozen=True)
class Violation:
    axiom: str
    witness: tuple
    detail: str = ""

    def to_dict(self):
        return {"axiom": self.axiom, "witness": [str(w) for w in self.witness], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    triangle_mode: str = "exhaustive"

    @property
    def ok(self) -> bool:
        return not self.violations

    def merge(self, other: "ValidationReport") -> "ValidationReport":
        mode = self.triangle_mode if self.triangle_mode == other.triangle_mode else "mixed"
        return ValidationReport(self.violations + other.violations, mode)

    def to_dict(self):
        return {
            "ok": self.ok,
            "triangle_mode": self.triangle_mode,
            "violations": [v.to_dict() for v in self.violations],
        }


def validate(
    space: ExtendedMetricSpace,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    sample_above: int = TRIANGLE_SAMPLE_THRESHOLD,
    samples: int = 200_000,
    seed: int = 0,
) -> ValidationReport:
    """Check every extended-metric axiom and list the violations found."""
    ids = space.point_ids
    omega = space.infinite_point
    D = space.distances
    out = []

    for i, p in enumerate(ids):
        if is_inf(D[i][i]) or D[i][i] != 0:
            out.append(Violation("zero-diagonal", (p,), f"d({p},{p})={D[i][i]!r}"))

    for i, j in itertools.combinations(range(len(ids)), 2):
        a, b = D[i][j], D[j][i]
        if not close(a, b, rel_tol, abs_tol):
            out.append(Violation("symmetry", (ids[i], ids[j]), f"{a!r} != {b!r}"))
        pair_has_omega = omega is not None and omega in (ids[i], ids[j])
        for v in (a, b):
            if pair_has_omega and not is_inf(v):
                out.append(Violation("infinite-point", (ids[i], ids[j]), f"finite distance {v!r} to omega"))
                break
            if not pair_has_omega and is_inf(v):
                out.append(Violation("infinite-distance", (ids[i], ids[j]), "INF between points of X_omega"))
                break
            if not pair_has_omega and v == 0:
                out.append(Violation("separation", (ids[i], ids[j]), "distinct points at distance 0"))
                break

    finite = [k for k, p in enumerate(ids) if p != omega]
    if len(finite) >= 3 and not any(v.axiom == "infinite-distance" for v in out):
        M = np.array([[float(D[i][j]) for j in finite] for i in finite])
        M = 0.5 * (M + M.T)
        mode = "exhaustive" if len(finite) <= sample_above else "sample"
        bad = _triangle_violations(M, rel_tol, abs_tol, mode, samples, seed)
        out.extend(
            Violation("triangle", (ids[finite[a]], ids[finite[b]], ids[finite[c]]),
                      f"d({ids[finite[a]]},{ids[finite[c]]}) exceeds the path through {ids[finite[b]]}")
            for a, b, c in bad
        )
        return ValidationReport(out, mode)
    return ValidationReport(out)


def _triangle_violations(M, rel_tol, abs_tol, mode, samples, seed):
    n = len(M)
    if mode == "exhaustive":
        hits = []
        for b in range(n):
            via = M[:, b, None] + M[None, b, :]
            slack = np.maximum(rel_tol * np.maximum(via, M), abs_tol)
            hits.extend((int(a), b, int(c)) for a, c in np.argwhere(M - via > slack) if a < c)
        return sorted(hits)
    rng = np.random.Generator(np.random.Philox(seed))
    tri = rng.integers(0, n, size=(samples, 3))
    a, b, c = tri.T
    via = M[a, b] + M[b, c]
    direct = M[a, c]
    slack = np.maximum(rel_tol * np.maximum(via, direct), abs_tol)
    found = {(int(x), int(y), int(z)) for x, y, z in tri[direct - via > slack]}
    return sorted(t for t in found if t[0] < t[2])


def _check_positive(name, value):
    if is_inf(value) or not value > 0:
        raise InputError(f"{name} must be a positive real, got {value!r}")


def metric_inversion(space: ExtendedMetricSpace, z, r=1) -> ExtendedMetricSpace:
    """Metric inversion of radius ``r`` at ``z``; ``z`` becomes the infinite point.

    For a point ``x`` other than ``z`` the distance to the old infinite point
    is set to ``r**2 / d(z, x)``, the only value that keeps every cross-ratio
    triple unchanged.
    """
    _check_positive("inversion radius", r)
    zi = space.index(z)
    omega = space.infinite_point
    if z == omega:
        raise InputError("cannot invert at the infinite point; use rescale instead")
    r2 = r * r
    ids = space.point_ids
    D = space.distances
    n = len(ids)
    for k in range(n):
        if k != zi and not is_inf(D[zi][k]) and D[zi][k] == 0:
            raise InputError(f"d({z},{ids[k]}) = 0 for distinct points")
    table = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            x, y = ids[i], ids[j]
            if zi in (i, j):
                v = INF
            elif x == omega:
                v = r2 / D[zi][j]
            elif y == omega:
                v = r2 / D[zi][i]
            else:
                v = r2 * D[i][j] / (D[zi][i] * D[zi][j])
            table[i][j] = table[j][i] = v
    return ExtendedMetricSpace(ids, table, z)


def rescale(space: ExtendedMetricSpace, lam) -> ExtendedMetricSpace:
    _check_positive("scale factor", lam)
    table = [[v if is_inf(v) else v * lam for v in row] for row in space.distances]
    return ExtendedMetricSpace(space.point_ids, table, space.infinite_point)


def metric_sphere(space: ExtendedMetricSpace, spec: MetricSphereSpec,
                  rel_tol: float = DEFAULT_REL_TOL, abs_tol: float = DEFAULT_ABS_TOL) -> frozenset:
    """Points at distance exactly ``r`` from ``spec.center``.

    The space must already use a metric whose infinite point is
    ``spec.far_point`` (apply :func:`metric_inversion` first otherwise).
    """
    if space.infinite_point != spec.far_point:
        raise PreconditionError(
            f"far point {spec.far_point!r} is not the infinite point of the space; "
            "apply metric_inversion at it first"
        )
    ci = space.index(spec.center)
    if spec.witness is not None:
        radius = space.distances[ci][space.index(spec.witness)]
    else:
        radius = spec.radius
    row = space.distances[ci]
    return frozenset(
        p for p, v in zip(space.point_ids, row)
        if not is_inf(v) and p != spec.center and close(v, radius, rel_tol, abs_tol)
    )


def from_points(points: Sequence, ids: Iterable | None = None, infinite_point=None,
                metric=None) -> ExtendedMetricSpace:
    """Build a space from coordinates; ``None`` entries denote the infinite point.

    ``metric`` defaults to the Euclidean distance.
    """
    pts = list(points)
    ids = tuple(range(len(pts))) if ids is None else tuple(ids)
    if metric is None:
        def metric(a, b):
            return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))
    omega = None
    for pid, p in zip(ids, pts):
        if p is None:
            if omega is not None:
                raise InputError("at most one infinite point")
            omega = pid
    if infinite_point is not None and infinite_point != omega:
        raise InputError("infinite_point does not match the None entry")
    n = len(pts)
    table = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if pts[i] is None or pts[j] is None:
                v = INF
            else:
                v = metric(pts[i], pts[j])
            table[i][j] = table[j][i] = v
    return ExtendedMetricSpace(ids, table, omega)
