"""Busemann functions, horospheres and the constructions built on them.

Everything here lives in X_omega = R^n with omega = ∞.  Closed forms are the
computational path; the limit definitions are kept as independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, InputError, PreconditionError
from .model_space import (
    INFINITY,
    MapWord,
    apply,
    apply_array,
    compose,
    hyperplane_reflection,
    probe_points,
    strong_inversion,
)


@dataclass(frozen=True)
class ParamLine:
    """Unit speed line c(t) = base + t * direction."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.direction, float)
        nu = float(np.linalg.norm(u))
        if nu == 0:
            raise InputError("line direction must be nonzero")
        if abs(nu - 1.0) > 1e-12:
            u = u / nu
        object.__setattr__(self, "base", np.asarray(self.base, float))
        object.__setattr__(self, "direction", u)

    @property
    def dim(self):
        return len(self.base)

    def __call__(self, t):
        return self.base + t * self.direction

    def param_of(self, x) -> float:
        return float((np.asarray(x, float) - self.base) @ self.direction)

    def distance_to(self, x) -> float:
        x = np.asarray(x, float)
        return float(np.linalg.norm(x - self(self.param_of(x))))

    def reparametrized_at(self, z, tol: float = 1e-9) -> "ParamLine":
        """Same line and orientation with c(0) = z."""
        if self.distance_to(z) > tol * (1.0 + float(np.linalg.norm(z))):
            raise PreconditionError("point is not on the line")
        return ParamLine(self(self.param_of(z)), self.direction)

    def reversed(self) -> "ParamLine":
        return ParamLine(self.base, -self.direction)


@dataclass(frozen=True)
class BusemannFn:
    """b(x) = lim_{t -> ±inf} |x c(t)| - |x0 c(t)|, with x0 the line's base."""

    line: ParamLine
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise InputError("sign must be +1 or -1")

    def __call__(self, x) -> float:
        return busemann_closed(self, x)

    def opposite(self) -> "BusemannFn":
        return BusemannFn(self.line, -self.sign)


def busemann_value_limit(line: ParamLine, x, t: float, sign: int = 1) -> float:
    """|x c(±t)| - t, the finite-t stage of the Busemann limit."""
    if not t > 0:
        raise InputError("t must be positive")
    x = np.asarray(x, float)
    return float(np.linalg.norm(x - line(sign * t))) - t


def limit_error_bound(line: ParamLine, x, t: float) -> float:
    """Bound |x - x0|^2 / (2t) on the gap to the limit, valid for t >= 2|x - x0|."""
    r = float(np.linalg.norm(np.asarray(x, float) - line.base))
    return r * r / (2.0 * t)


def busemann_closed(b: BusemannFn, x) -> float:
    x = np.asarray(x, float)
    return -float((x - b.line.base) @ (b.sign * b.line.direction))


@dataclass(frozen=True)
class Horosphere:
    """Level set {x : b(x) = level}; a hyperplane orthogonal to the line."""

    fn: BusemannFn
    level: float

    @classmethod
    def through(cls, fn: BusemannFn, z) -> "Horosphere":
        return cls(fn, fn(z))

    @property
    def normal(self):
        return self.fn.line.direction

    def residual(self, x) -> float:
        return abs(self.fn(x) - self.level)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.residual(x) <= tol * (1.0 + float(np.linalg.norm(x)))

    def foot(self, x):
        """Closest point of the horosphere (along the parallel line through x)."""
        x = np.asarray(x, float)
        u = self.fn.line.direction
        return x + (self.fn(x) - self.level) * self.fn.sign * u

    def sample(self, count: int, seed: int = 0, radius: float = 3.0) -> np.ndarray:
        P = probe_points(self.fn.line.dim, count, seed=seed, radius=radius) + self.fn.line.base
        return np.array([self.foot(p) for p in P])


def parallel_line_through(line: ParamLine, x) -> ParamLine:
    return ParamLine(np.asarray(x, float), line.direction)


def are_busemann_parallel(l1: ParamLine, l2: ParamLine, tol: float = 1e-12) -> bool:
    return abs(abs(float(l1.direction @ l2.direction)) - 1.0) <= tol


def check_sublinear_divergence(l1: ParamLine, l2: ParamLine, t_max: float = 1e6) -> float:
    """|c(t) c'(t)| / t at t = t_max."""
    if t_max < 1e3:
        raise InputError("t_max must be at least 1e3")
    return float(np.linalg.norm(l1(t_max) - l2(t_max))) / t_max


def foliation_coordinates(line: ParamLine, x) -> tuple[float, np.ndarray]:
    """(t, z) with z on the horosphere through line.base and c_z(t) = x.

    The parallel line c_z is parametrised so that b(c_z(t)) = -t for the
    Busemann function b of ``line`` vanishing at ``line.base``.
    """
    x = np.asarray(x, float)
    t = line.param_of(x)
    return t, x - t * line.direction


def foliation_point(line: ParamLine, t: float, z) -> np.ndarray:
    return np.asarray(z, float) + t * line.direction


# ---------------------------------------------------------------------------
# horosphere symmetries


def horosphere_symmetry(line: ParamLine, z) -> MapWord:
    """Exact symmetry in the horosphere of ``line`` through ``z``."""
    return hyperplane_reflection(line.direction, z)


def phi_t(line: ParamLine, t: float) -> MapWord:
    """Strong inversion swapping ∞ and c(t) that fixes {x : |x c(t)| = t}."""
    return strong_inversion(line(t), INFINITY, radius=t)


@dataclass
class HorosphereLimit:
    ts: list
    errors: list
    cauchy: list
    richardson_gap: float
    fixed_residual: float
    isometry_distortion: float
    limit: MapWord
    words: list = field(repr=False, default_factory=list)

    def error_at(self, t: float) -> float:
        return self.errors[self.ts.index(t)]

    def ratios(self) -> list:
        return [b / a for a, b in zip(self.errors, self.errors[1:])]

    def table(self) -> list:
        return [{"t": t, "error": e} for t, e in zip(self.ts, self.errors)]


def horosphere_symmetry_limit(line: ParamLine, z=None, t0: float = 1e6 / 2 ** 10, steps: int = 15,
                              probes: np.ndarray | None = None, fixed_probes: np.ndarray | None = None,
                              snap_tol: float = 1e-6) -> HorosphereLimit:
    """Follow phi_t for t = t0 * 2**k and fit its limit.

    Errors are measured against the reflection in H_z.  The limit is
    estimated by Richardson extrapolation of the last two stages (the
    error decays like 1/t), checked against the reflection and then
    snapped to it.
    """
    if z is not None:
        line = line.reparametrized_at(z)
    z = line.base
    n = line.dim
    if steps < 3:
        raise ConvergenceError("need at least three schedule steps")
    if probes is None:
        probes = z + ball_points(n, 64, radius=10.0, seed=3)
    if fixed_probes is None:
        fixed_probes = Horosphere.through(BusemannFn(line), z).sample(32, seed=5, radius=10.0)
    reflection = horosphere_symmetry(line, z)
    R_probes, _ = apply_array(reflection, probes)
    ts = [t0 * 2.0 ** k for k in range(steps)]
    words, errors, stages, fixed_stages = [], [], [], []
    for t in ts:
        w = phi_t(line, t)
        words.append(w)
        Y, mask = apply_array(w, probes)
        F, fmask = apply_array(w, fixed_probes)
        if mask.any() or fmask.any():
            raise ConvergenceError("schedule starts too early: a probe hits the pole")
        stages.append(Y)
        fixed_stages.append(F)
        errors.append(float(np.max(np.linalg.norm(Y - R_probes, axis=1))))
    cauchy = [float(np.max(np.linalg.norm(stages[k] - stages[k - 1], axis=1))) for k in range(1, steps)]
    tail = cauchy[-3:]
    if not all(b < a for a, b in zip(tail, tail[1:])):
        raise ConvergenceError("Cauchy differences are not decreasing")
    est = 2.0 * stages[-1] - stages[-2]
    gap = float(np.max(np.linalg.norm(est - R_probes, axis=1)))
    scale = 1.0 + float(np.max(np.linalg.norm(probes - z, axis=1)))
    if gap > snap_tol * scale:
        raise ConvergenceError(f"extrapolated limit is {gap:.3g} away from the horosphere reflection")
    fixed_est = 2.0 * fixed_stages[-1] - fixed_stages[-2]
    fixed_residual = float(np.max(np.linalg.norm(fixed_est - fixed_probes, axis=1)))
    Dp = np.linalg.norm(probes[:, None] - probes[None], axis=-1)
    De = np.linalg.norm(R_probes[:, None] - R_probes[None], axis=-1)
    distortion = float(np.max(np.abs(Dp - De)))
    return HorosphereLimit(ts, errors, cauchy, gap, fixed_residual, distortion, reflection, words)


def ball_points(n: int, count: int, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """Uniform samples of the open ball of the given radius about 0."""
    rng = np.random.Generator(np.random.Philox(seed))
    d = rng.normal(size=(count, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / n)
    return d * r[:, None]


def a_shift(line: ParamLine, a: float) -> MapWord:
    """phi_y ∘ phi_x for the horosphere symmetries at x = c(0), y = c(a/2)."""
    if not a > 0:
        raise InputError("shift length must be positive")
    return compose(horosphere_symmetry(line, line(a / 2.0)), horosphere_symmetry(line, line(0.0)))


# ---------------------------------------------------------------------------
# projection onto a horosphere


@dataclass(frozen=True)
class ProjectionChart:
    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.direction, float)
        object.__setattr__(self, "origin", np.asarray(self.origin, float))
        object.__setattr__(self, "direction", u / np.linalg.norm(u))

    @classmethod
    def of(cls, line: ParamLine) -> "ProjectionChart":
        return cls(line.base, line.direction)


def project(chart: ProjectionChart, x) -> np.ndarray:
    """H_o ∩ (line through x Busemann parallel to the reference line)."""
    x = np.asarray(x, float)
    u = chart.direction
    return x - float((x - chart.origin) @ u) * u


def projection_alpha(chart: ProjectionChart, other: ParamLine) -> float:
    """|o z'| / |o z| with z = c'(1) on a line through o and z' its projection."""
    other = other.reparametrized_at(chart.origin)
    zz = other(1.0)
    return float(np.linalg.norm(project(chart, zz) - chart.origin) / np.linalg.norm(zz - chart.origin))


@dataclass
class ProjectionReport:
    alpha: float
    alpha_residual: float
    collinearity: float
    degenerate: bool


def check_projected_line(chart: ProjectionChart, other: ParamLine, ts: Sequence[float]) -> ProjectionReport:
    """Check that pi_o(other) is a line traversed at constant speed alpha."""
    other = other.reparametrized_at(chart.origin)
    alpha = projection_alpha(chart, other)
    P = np.array([project(chart, other(t)) for t in ts])
    ts = np.asarray(ts, float)
    worst = 0.0
    for i in range(len(ts)):
        for j in range(i + 1, len(ts)):
            d = float(np.linalg.norm(P[i] - P[j]))
            worst = max(worst, abs(d - alpha * abs(ts[i] - ts[j])) / max(abs(ts[i] - ts[j]), 1e-300))
    span = P[np.argmax(ts)] - P[np.argmin(ts)]
    ns = float(np.linalg.norm(span))
    if ns == 0.0:
        return ProjectionReport(alpha, worst, 0.0, True)
    u = span / ns
    W = P - P[np.argmin(ts)]
    off = W - np.outer(W @ u, u)
    collinearity = float(np.max(np.linalg.norm(off, axis=1))) / ns
    return ProjectionReport(alpha, worst, collinearity, False)


@dataclass
class HomogenReport:
    ratios: tuple
    spread: float
    degenerate: bool


def homogen_ratio_check(chart: ProjectionChart, other: ParamLine, t1: float, t2: float, t3: float) -> HomogenReport:
    """The three ratios |pi(x_i) pi(x_j)| / |x_i x_j| for x_i = c'(t_i)."""
    if len({t1, t2, t3}) < 3:
        raise InputError("parameters must be distinct")
    other = other.reparametrized_at(chart.origin)
    xs = [other(t) for t in sorted((t1, t2, t3))]
    ps = [project(chart, x) for x in xs]
    ratios = tuple(
        float(np.linalg.norm(ps[i] - ps[j]) / np.linalg.norm(xs[i] - xs[j]))
        for i, j in ((0, 1), (1, 2), (0, 2))
    )
    return HomogenReport(ratios, max(ratios) - min(ratios), max(ratios) == 0.0)


# ---------------------------------------------------------------------------
# metric relations between parallel lines


def _dist(p, q) -> float:
    return float(np.linalg.norm(np.asarray(p, float) - np.asarray(q, float)))


def _rel(a: float, b: float, floor: float = 1e-300) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


@dataclass
class Lemma3eqReport:
    residuals: dict
    tol: float

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def lemma_3eq_suite(line: ParamLine, line2: ParamLine, x, y, x2, y2, tol: float = 1e-10) -> Lemma3eqReport:
    """Relations between matched point pairs on two Busemann parallel lines."""
    if not are_busemann_parallel(line, line2, 1e-12):
        raise PreconditionError("lines are not Busemann parallel")
    b = BusemannFn(line)
    pts = [np.asarray(p, float) for p in (x, y, x2, y2)]
    x, y, x2, y2 = pts
    scale = 1.0 + max(float(np.linalg.norm(p)) for p in pts)
    for p, l in ((x, line), (y, line), (x2, line2), (y2, line2)):
        if l.distance_to(p) > 1e-9 * scale:
            raise PreconditionError("point does not lie on its line")
    if abs(b(x) - b(x2)) > 1e-12 * scale or abs(b(y) - b(y2)) > 1e-12 * scale:
        raise PreconditionError("Busemann values are not matched")
    xy, x2y2 = _dist(x, y), _dist(x2, y2)
    xx2, yy2 = _dist(x, x2), _dist(y, y2)
    xy2, yx2 = _dist(x, y2), _dist(y, x2)
    sq = max(yx2 ** 2, 1e-300)
    res = {
        "xy=x'y'": _rel(xy, x2y2) if max(xy, x2y2) > 0 else 0.0,
        "xx'=yy'": _rel(xx2, yy2) if max(xx2, yy2) > 0 else 0.0,
        "xy'=yx'": _rel(xy2, yx2) if max(xy2, yx2) > 0 else 0.0,
        "x'y>=xx'": max(0.0, xx2 - yx2) / max(xx2, 1e-300),
        "diamond": max(0.0, yx2 ** 2 - xy ** 2 - xx2 ** 2) / sq,
    }
    return Lemma3eqReport(res, tol)


def matched_configuration(n: int, rng: np.random.Generator, spread: float = 3.0):
    """Random parallel lines with x, y on one and x', y' on the other, b-matched."""
    u = rng.normal(size=n)
    u /= np.linalg.norm(u)
    base = rng.normal(size=n) * spread
    offset = rng.normal(size=n) * spread
    offset -= (offset @ u) * u
    l1 = ParamLine(base, u)
    l2 = ParamLine(base + offset + rng.normal() * spread * u, u)
    s, t = rng.normal(size=2) * spread
    x, y = l1(s), l1(t)
    # same Busemann values means the same parameter relative to H through base
    x2 = x + offset
    y2 = y + offset
    return l1, l2, x, y, x2, y2
