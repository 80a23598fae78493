"""Coordinates on X_omega from a descending chain of horospheres.

Starting from a line through o, each step keeps the horosphere through o,
picks the next line inside it as the projection of a non-parallel line, and
records a unit point.  The resulting directions give a linear chart in which
translations are compositions of a-shifts and homotheties are scalings; the
induced norm is then tested against the parallelogram law.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .busemann import BusemannFn, Horosphere, ParamLine, ProjectionChart, a_shift, project
from .errors import DescentTerminated, InputError
from .model_space import MAX_DIM, MapWord, apply, compose, homothety, identity


@dataclass(frozen=True)
class Subspace:
    """Affine subspace o + span(basis) standing in for X^k minus omega."""

    origin: np.ndarray
    basis: np.ndarray  # (n, k), orthonormal columns

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def full(cls, n: int, origin=None) -> "Subspace":
        o = np.zeros(n) if origin is None else np.asarray(origin, float)
        return cls(o, np.eye(n))


@dataclass(frozen=True)
class FlagStep:
    dim: int
    line: ParamLine
    origin: np.ndarray
    unit_point: np.ndarray
    horosphere: Horosphere
    next_subspace: Subspace
    witness_line: ParamLine | None
    next_line: ParamLine | None

    @property
    def terminal(self) -> bool:
        return self.next_line is None


def _orthonormal_complement(V: np.ndarray, u: np.ndarray) -> np.ndarray:
    W = V - np.outer(u, u @ V)
    U, S, _ = np.linalg.svd(W, full_matrices=False)
    keep = S > 1e-10
    return U[:, keep][:, : V.shape[1] - 1]


def descend(sub: Subspace, line: ParamLine | None = None) -> FlagStep:
    """One step of the descent X^k ⊃ X^{k+1} = H_o ∪ {omega}.

    The next line is the projection to H_o of the first basis direction that
    is not parallel to the current line.
    """
    k = sub.dim
    if k == 0:
        raise DescentTerminated("subspace is a single point; the chain has ended")
    o = sub.origin
    if line is None:
        line = ParamLine(o, sub.basis[:, 0])
    u = line.direction
    inside = sub.basis @ (sub.basis.T @ u)
    if np.linalg.norm(inside - u) > 1e-10 or np.linalg.norm(line.base - o) > 1e-10 * (1 + np.linalg.norm(o)):
        raise InputError("line must pass through the origin inside the subspace")
    H = Horosphere.through(BusemannFn(line), o)
    nxt = Subspace(o, _orthonormal_complement(sub.basis, u))
    witness = next_line = None
    if k > 1:
        for j in range(k):
            w = sub.basis[:, j]
            if abs(abs(float(w @ u)) - 1.0) > 1e-9:
                witness = ParamLine(o, w)
                break
        chart = ProjectionChart(o, u)
        d = project(chart, o + witness.direction) - o
        next_line = ParamLine(o, d / np.linalg.norm(d))
    return FlagStep(k, line, o, o + u, H, nxt, witness, next_line)


@dataclass(frozen=True)
class CoordinateChart:
    origin: np.ndarray
    directions: np.ndarray  # (N+1, n), rows u_0..u_N
    sign: int = -1  # Busemann coordinate b_i = sign * <x - o, u_i>

    @property
    def dimension(self) -> int:
        return self.directions.shape[0]

    def coordinates(self, x) -> np.ndarray:
        return self.directions @ (np.asarray(x, float) - self.origin)

    def busemann_coordinates(self, x) -> np.ndarray:
        return self.sign * self.coordinates(x)

    def point(self, coords) -> np.ndarray:
        return self.origin + self.directions.T @ np.asarray(coords, float)

    def component(self, x, i: int) -> np.ndarray:
        """The point x(i): only the i-th coordinate of x kept."""
        c = np.zeros(self.dimension)
        c[i] = self.coordinates(x)[i]
        return self.point(c)

    def add(self, x, y) -> np.ndarray:
        return self.point(self.coordinates(x) + self.coordinates(y))

    def sub(self, x, y) -> np.ndarray:
        return self.point(self.coordinates(x) - self.coordinates(y))

    def scale(self, k: float, x) -> np.ndarray:
        return self.point(k * self.coordinates(x))

    def norm(self, x) -> float:
        """nu(x) = |o x|."""
        return float(np.linalg.norm(np.asarray(x, float) - self.origin))

    def line(self, i: int) -> ParamLine:
        return ParamLine(self.origin, self.directions[i])

    def to_dict(self):
        return {
            "origin": self.origin.tolist(),
            "directions": self.directions.tolist(),
            "dimension": self.dimension,
            "sign": self.sign,
        }


def build_chart(n: int, origin=None, first_direction=None) -> tuple[CoordinateChart, list]:
    if not 1 <= n <= MAX_DIM:
        raise InputError(f"dimension must be in 1..{MAX_DIM}")
    sub = Subspace.full(n, origin)
    line = None if first_direction is None else ParamLine(sub.origin, first_direction)
    steps = []
    while True:
        try:
            step = descend(sub, line)
        except DescentTerminated:
            break
        steps.append(step)
        sub, line = step.next_subspace, step.next_line
    dirs = np.array([s.line.direction for s in steps])
    return CoordinateChart(sub.origin, dirs), steps


def translation_map(chart: CoordinateChart, x) -> MapWord:
    """T_x as the composition of per-axis a-shifts."""
    word = identity(len(chart.origin))
    for i, c in enumerate(chart.coordinates(x)):
        if c == 0:
            continue
        line = chart.line(i) if c > 0 else chart.line(i).reversed()
        word = compose(a_shift(line, abs(float(c))), word)
    return word


@dataclass
class TranslationReport:
    distortion: float
    addition_residual: float


def translation_isometry_check(chart: CoordinateChart, x, pairs: Sequence) -> TranslationReport:
    T = translation_map(chart, x)
    distortion = addition = 0.0
    for y, z in pairs:
        Ty, Tz = apply(T, y), apply(T, z)
        distortion = max(distortion, abs(float(np.linalg.norm(Ty - Tz)) - float(np.linalg.norm(np.asarray(y) - z))))
        addition = max(addition, float(np.linalg.norm(Ty - chart.add(x, y))))
    return TranslationReport(distortion, addition)


@dataclass
class ScalingReport:
    residual: float
    norm_ratio_residual: float


def homothety_scaling_check(chart: CoordinateChart, k: float, probes: Sequence) -> ScalingReport:
    """Compare the homothety h_k (two strong inversions) with x -> kx."""
    if not k > 0:
        raise InputError("scaling factor must be positive")
    h = homothety(chart.origin, k)
    res = ratio = 0.0
    for x in probes:
        res = max(res, float(np.linalg.norm(apply(h, x) - chart.scale(k, x))))
        nx = chart.norm(x)
        if nx > 0:
            ratio = max(ratio, abs(chart.norm(chart.scale(k, x)) / nx - k) / k)
    return ScalingReport(res, ratio)


@dataclass
class NormReport:
    zero_ok: bool
    triangle_violation: float
    homogeneity: float
    symmetry: float
    metric_residual: float


def norm_axiom_check(chart: CoordinateChart, probes: Sequence,
                     factors: Sequence[float] = (-3.0, -1.0, -0.5, 0.0, 0.25, 2.0, 7.0)) -> NormReport:
    nu = chart.norm
    probes = [np.asarray(p, float) for p in probes]
    zero_ok = nu(chart.origin) == 0.0 and all(nu(p) > 0 for p in probes if np.any(p != chart.origin))
    tri = hom = sym = met = 0.0
    for x, y in itertools.combinations(probes, 2):
        tri = max(tri, nu(chart.add(x, y)) - nu(x) - nu(y))
        met = max(met, abs(float(np.linalg.norm(x - y)) - nu(chart.sub(y, x))))
    for x in probes:
        sym = max(sym, abs(nu(chart.scale(-1.0, x)) - nu(x)))
        for k in factors:
            hom = max(hom, abs(nu(chart.scale(k, x)) - abs(k) * nu(x)))
    return NormReport(zero_ok, max(tri, 0.0), hom, sym, met)


@dataclass
class SchoenbergReport:
    defect: float
    gram_min_eigenvalue: float
    gram: np.ndarray
    passed: bool


def schoenberg_check(norm: Callable, samples: Sequence, dim: int | None = None, tol: float = 1e-9) -> SchoenbergReport:
    """Parallelogram-law defect and the polarisation Gram matrix of a norm."""
    samples = [np.asarray(s, float) for s in samples]
    if dim is None:
        dim = len(samples[0])
    defect = 0.0
    for x, y in itertools.combinations_with_replacement(samples, 2):
        defect = max(defect, abs(norm(x + y) ** 2 + norm(x - y) ** 2 - 2 * norm(x) ** 2 - 2 * norm(y) ** 2))
    E = np.eye(dim)
    G = np.array([[(norm(E[i] + E[j]) ** 2 - norm(E[i] - E[j]) ** 2) / 4.0 for j in range(dim)] for i in range(dim)])
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (G + G.T))))
    return SchoenbergReport(defect, min_eig, G, defect <= tol and min_eig >= -tol)


def chart_norm(chart: CoordinateChart) -> Callable:
    return lambda c: chart.norm(chart.point(c))


def inner_product_distance(chart: CoordinateChart, gram: np.ndarray, x, y) -> float:
    d = chart.coordinates(y) - chart.coordinates(x)
    return float(np.sqrt(max(d @ gram @ d, 0.0)))


def horosphere_intersection(chart: CoordinateChart, x) -> np.ndarray:
    """The unique point y with b_i(y) = b_i(x) for every i."""
    b = chart.busemann_coordinates(x)
    M = chart.sign * chart.directions
    return chart.origin + np.linalg.solve(M, b)
