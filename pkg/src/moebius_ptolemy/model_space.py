"""The model space R^n ∪ {∞} with explicit Moebius maps.

Maps are kept as words of normal-form factors

    f(x) = b + lam * A @ J(x - a),   J(v) = v / |v|^2 if invert else v,

applied right to left.  Equality of maps is checked by their action on
seeded probe sets rather than by symbolic normalisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cross_ratio import CrossRatioTriple, PAIRINGS
from .errors import ConvergenceError, DegenerateInputError, InputError, PreconditionError

MAX_DIM = 8


class PointAtInfinity:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (PointAtInfinity, ())


INFINITY = PointAtInfinity()


def is_infinity(x) -> bool:
    return x is INFINITY


def as_point(x):
    if x is None or is_infinity(x) or (isinstance(x, str) and x.lower() in ("inf", "infinity", "∞")):
        return INFINITY
    return np.asarray(x, dtype=float).reshape(-1)


def same_point(x, y, tol=1e-12) -> bool:
    if is_infinity(x) or is_infinity(y):
        return is_infinity(x) and is_infinity(y)
    return chordal_distance(x, y) <= tol


def chordal_distance(x, y) -> float:
    """Chordal (stereographic sphere) distance on R^n ∪ {∞}."""
    if is_infinity(x) and is_infinity(y):
        return 0.0
    if is_infinity(x):
        x, y = y, x
    x = np.asarray(x, float)
    if is_infinity(y):
        return 2.0 / math.sqrt(1.0 + float(x @ x))
    y = np.asarray(y, float)
    diff = x - y
    return 2.0 * math.sqrt(float(diff @ diff)) / math.sqrt((1.0 + float(x @ x)) * (1.0 + float(y @ y)))


def chordal_matrix(X: np.ndarray, inf_mask: np.ndarray | None = None) -> np.ndarray:
    X = np.asarray(X, float)
    if inf_mask is None:
        inf_mask = np.zeros(len(X), bool)
    Xf = np.where(inf_mask[:, None], 0.0, X)
    sq = np.einsum("ij,ij->i", Xf, Xf)
    diff = np.linalg.norm(Xf[:, None, :] - Xf[None, :, :], axis=-1)
    w = np.sqrt(1.0 + sq)
    D = 2.0 * diff / (w[:, None] * w[None, :])
    to_inf = 2.0 / w
    D[inf_mask, :] = to_inf[None, :]
    D[:, inf_mask] = to_inf[:, None]
    D[np.ix_(inf_mask, inf_mask)] = 0.0
    np.fill_diagonal(D, 0.0)
    return D


def chordal_crt(points: Sequence) -> CrossRatioTriple:
    """Cross-ratio triple of four model points in the chordal metric."""
    p = [as_point(x) for x in points]
    raw = [chordal_distance(p[i], p[j]) * chordal_distance(p[k], p[l]) for (i, j), (k, l) in PAIRINGS]
    return CrossRatioTriple.from_raw(*raw)


# ---------------------------------------------------------------------------
# normal-form factors and words


@dataclass(frozen=True)
class MoebiusMapNF:
    a: np.ndarray
    invert: bool
    A: np.ndarray
    lam: float
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, float).reshape(-1)
        b = np.asarray(self.b, float).reshape(-1)
        A = np.asarray(self.A, float)
        n = len(a)
        if b.shape != (n,) or A.shape != (n, n):
            raise InputError("normal form parts have inconsistent dimensions")
        if not self.lam > 0:
            raise InputError("normal form scale must be positive")
        if np.max(np.abs(A.T @ A - np.eye(n))) > 1e-12 * max(1, n):
            raise InputError("normal form rotation is not orthogonal")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "invert", bool(self.invert))

    @property
    def dim(self) -> int:
        return len(self.a)

    def __call__(self, x):
        if is_infinity(x):
            return self.b.copy() if self.invert else INFINITY
        v = np.asarray(x, float) - self.a
        if self.invert:
            nrm2 = float(v @ v)
            if nrm2 == 0.0:
                return INFINITY
            v = v / nrm2
        return self.b + self.lam * (self.A @ v)

    def apply_array(self, X: np.ndarray, inf_mask: np.ndarray):
        V = X - self.a
        out_inf = np.zeros(len(X), bool)
        if self.invert:
            nrm2 = np.einsum("ij,ij->i", V, V)
            hit = (nrm2 == 0.0) & ~inf_mask
            safe = np.where(nrm2 == 0.0, 1.0, nrm2)
            V = V / safe[:, None]
            Y = self.b + self.lam * V @ self.A.T
            Y[inf_mask] = self.b
            Y[hit] = 0.0
            out_inf = hit
        else:
            Y = self.b + self.lam * V @ self.A.T
            Y[inf_mask] = 0.0
            out_inf = inf_mask.copy()
        return Y, out_inf

    def inverse(self) -> "MoebiusMapNF":
        if self.invert:
            # J(v / lam) = lam * J(v), so the scale is unchanged
            return MoebiusMapNF(self.b, True, self.A.T, self.lam, self.a)
        return MoebiusMapNF(self.b, False, self.A.T, 1.0 / self.lam, self.a)

    def to_dict(self):
        return {
            "a": self.a.tolist(),
            "invert": self.invert,
            "A": self.A.tolist(),
            "lambda": self.lam,
            "b": self.b.tolist(),
        }

    @classmethod
    def from_dict(cls, d) -> "MoebiusMapNF":
        try:
            return cls(d["a"], d["invert"], d["A"], d["lambda"], d["b"])
        except KeyError as exc:
            raise InputError(f"map factor missing key {exc}") from None


@dataclass(frozen=True)
class MapWord:
    """Composition of normal-form factors; the last factor is applied first."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise InputError("a map word must be nonempty")
        if len({f.dim for f in factors}) != 1:
            raise InputError("all factors of a word must share a dimension")
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return self.factors[0].dim

    def __call__(self, x):
        return apply(self, x)

    def __len__(self):
        return len(self.factors)

    def to_list(self):
        return [f.to_dict() for f in self.factors]

    @classmethod
    def from_list(cls, items) -> "MapWord":
        return cls(tuple(MoebiusMapNF.from_dict(d) for d in items))


def _word(*factors) -> MapWord:
    return MapWord(tuple(factors))


def apply(m: MapWord, x):
    x = as_point(x)
    if not is_infinity(x) and len(x) != m.dim:
        raise InputError(f"point has dimension {len(x)}, map has {m.dim}")
    for f in reversed(m.factors):
        x = f(x)
    return x


def apply_array(m: MapWord, X: np.ndarray, inf_mask: np.ndarray | None = None):
    """Vectorised :func:`apply`; returns ``(Y, inf_mask)``."""
    X = np.array(X, dtype=float, ndmin=2)
    mask = np.zeros(len(X), bool) if inf_mask is None else np.asarray(inf_mask, bool).copy()
    X[mask] = 0.0
    for f in reversed(m.factors):
        X, mask = f.apply_array(X, mask)
    return X, mask


def compose(*words: MapWord) -> MapWord:
    """``compose(f, g)(x) == f(g(x))``."""
    return MapWord(tuple(fac for w in words for fac in w.factors))


def inverse(m: MapWord) -> MapWord:
    return MapWord(tuple(f.inverse() for f in reversed(m.factors)))


def identity(n: int) -> MapWord:
    return _word(MoebiusMapNF(np.zeros(n), False, np.eye(n), 1.0, np.zeros(n)))


def translation(v) -> MapWord:
    v = np.asarray(v, float)
    return _word(MoebiusMapNF(np.zeros_like(v), False, np.eye(len(v)), 1.0, v))


def linear_isometry(A, center=None) -> MapWord:
    A = np.asarray(A, float)
    c = np.zeros(len(A)) if center is None else np.asarray(center, float)
    return _word(MoebiusMapNF(c, False, A, 1.0, c))


def similarity(lam: float, center) -> MapWord:
    c = np.asarray(center, float)
    return _word(MoebiusMapNF(c, False, np.eye(len(c)), lam, c))


def sphere_inversion(center, r: float) -> MapWord:
    """Classical inversion in the sphere of radius ``r`` about ``center``."""
    c = np.asarray(center, float)
    if not r > 0:
        raise InputError("inversion radius must be positive")
    return _word(MoebiusMapNF(c, True, np.eye(len(c)), r * r, c))


def unit_inversion(center) -> MapWord:
    return sphere_inversion(center, 1.0)


def hyperplane_reflection(normal, point) -> MapWord:
    """Reflection in the hyperplane through ``point`` orthogonal to ``normal``."""
    u = np.asarray(normal, float)
    u = u / np.linalg.norm(u)
    p = np.asarray(point, float)
    A = np.eye(len(u)) - 2.0 * np.outer(u, u)
    return _word(MoebiusMapNF(p, False, A, 1.0, p))


def normalize(m: MapWord) -> MoebiusMapNF:
    """Collapse a word to a single normal-form factor by probing its action."""
    n = m.dim
    pole = apply(inverse(m), INFINITY)
    E = np.eye(n)
    if is_infinity(pole):
        b = np.asarray(apply(m, np.zeros(n)))
        a = np.zeros(n)
        cols = np.stack([np.asarray(apply(m, E[i])) - b for i in range(n)], axis=1)
        invert = False
    else:
        b = np.asarray(apply(m, INFINITY))
        a = pole
        cols = np.stack([np.asarray(apply(m, pole + E[i])) - b for i in range(n)], axis=1)
        invert = True
    lam = float(np.mean(np.linalg.norm(cols, axis=0)))
    U, _, Vt = np.linalg.svd(cols / lam)
    return MoebiusMapNF(a, invert, U @ Vt, lam, b)


def compose_nf(f: MoebiusMapNF, g: MoebiusMapNF, tol: float = 1e-12) -> MoebiusMapNF | None:
    """Closed-form normal form of f∘g, or None when it needs two inversions.

    Uses J(cAv) = J(v)·A/c for orthogonal A and J∘J = id.
    """
    if not f.invert:
        return MoebiusMapNF(g.a, g.invert, f.A @ g.A, f.lam * g.lam, f.b + f.lam * (f.A @ (g.b - f.a)))
    if not g.invert:
        a = g.a - (g.A.T @ (g.b - f.a)) / g.lam
        return MoebiusMapNF(a, True, f.A @ g.A, f.lam / g.lam, f.b)
    if np.linalg.norm(f.a - g.b) <= tol * (1.0 + np.linalg.norm(f.a)):
        return MoebiusMapNF(g.a, False, f.A @ g.A, f.lam / g.lam, f.b)
    return None


def reduce_word(m: MapWord) -> MapWord:
    """Fold adjacent factors symbolically wherever the product stays in normal form."""
    out: list[MoebiusMapNF] = []
    for g in reversed(m.factors):  # innermost first
        if out:
            fg = compose_nf(g, out[-1])
            if fg is not None:
                out[-1] = fg
                continue
        out.append(g)
    return MapWord(tuple(reversed(out)))


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def random_map_word(n: int, length: int, rng: np.random.Generator) -> MapWord:
    """Random word mixing translations, rotations, scalings and inversions."""
    factors = []
    for _ in range(length):
        kind = int(rng.integers(0, 4))
        if kind == 0:
            factors.extend(translation(rng.normal(size=n)).factors)
        elif kind == 1:
            factors.extend(linear_isometry(random_orthogonal(n, rng), rng.normal(size=n)).factors)
        elif kind == 2:
            factors.extend(similarity(float(np.exp(rng.uniform(-1, 1))), rng.normal(size=n)).factors)
        else:
            factors.extend(sphere_inversion(rng.normal(size=n), float(np.exp(rng.uniform(-1, 1)))).factors)
    return MapWord(tuple(factors))


def probe_points(n: int, count: int, seed: int = 0, radius: float = 3.0) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.normal(size=(count, n)) * (radius / math.sqrt(n))


def max_action_gap(m1: MapWord, m2: MapWord, probes: np.ndarray) -> float:
    """Largest chordal distance between the images of the probes."""
    gap = 0.0
    for p in probes:
        gap = max(gap, chordal_distance(apply(m1, p), apply(m2, p)))
    return gap


# ---------------------------------------------------------------------------
# metrics of the standard Moebius structure with a prescribed infinite point


def pole_chart(far) -> MapWord | None:
    """Unit inversion at ``far`` (``None`` when ``far`` is already ∞).

    Euclidean distances of chart images form the metric of the class whose
    infinite point is ``far``.
    """
    far = as_point(far)
    return None if is_infinity(far) else unit_inversion(far)


def to_chart(chart, x):
    return as_point(x) if chart is None else apply(chart, x)


def pole_distance(x, y, far=INFINITY) -> float:
    """Distance in the metric of the class whose infinite point is ``far``."""
    chart = pole_chart(far)
    gx, gy = to_chart(chart, x), to_chart(chart, y)
    if is_infinity(gx) or is_infinity(gy):
        return 0.0 if (is_infinity(gx) and is_infinity(gy)) else math.inf
    return float(np.linalg.norm(gx - gy))


def _conjugate(chart, word: MapWord) -> MapWord:
    return word if chart is None else compose(chart, word, chart)


def _distinct(x, y, what="points"):
    if same_point(x, y, 0.0):
        raise DegenerateInputError(f"{what} must be distinct")


def strong_inversion(omega, omega_prime, radius: float | None = None, witness=None) -> MapWord:
    """The strong space inversion swapping ``omega`` and ``omega_prime``.

    The fixed sphere is the sphere about ``omega`` of the given ``radius`` in
    the metric whose infinite point is ``omega_prime``, or the one through
    ``witness``.
    """
    omega, omega_prime = as_point(omega), as_point(omega_prime)
    _distinct(omega, omega_prime, "poles")
    if (radius is None) == (witness is None):
        raise InputError("give exactly one of radius or witness")
    chart = pole_chart(omega_prime)
    center = to_chart(chart, omega)
    if witness is not None:
        witness = as_point(witness)
        if same_point(witness, omega, 0.0) or same_point(witness, omega_prime, 0.0):
            raise DegenerateInputError("witness coincides with a pole")
        radius = float(np.linalg.norm(to_chart(chart, witness) - center))
    if not radius > 0:
        raise InputError("sphere radius must be positive")
    return _conjugate(chart, sphere_inversion(center, radius))


def sphere_points(omega, omega_prime, radius: float, count: int, seed: int = 0) -> list:
    """Samples of the metric sphere about ``omega`` with far point ``omega_prime``."""
    omega, omega_prime = as_point(omega), as_point(omega_prime)
    chart = pole_chart(omega_prime)
    center = to_chart(chart, omega)
    n = len(center)
    rng = np.random.Generator(np.random.Philox(seed))
    dirs = rng.normal(size=(count, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    pts = center + radius * dirs
    return [to_chart(chart, p) for p in pts]


def homothety(o, lam: float, omega=INFINITY, r1: float = 1.0) -> MapWord:
    """Homothety with center ``o`` and coefficient ``lam``, built as phi2∘phi1."""
    if not lam > 0:
        raise InputError("homothety coefficient must be positive")
    phi1 = strong_inversion(o, omega, radius=r1)
    phi2 = strong_inversion(o, omega, radius=r1 * math.sqrt(lam))
    return compose(phi2, phi1)


def transit_homothety(sigma, omega, omega_prime, x, x_prime) -> tuple[MapWord, float]:
    """Homothety centred at ``omega_prime`` moving ``x`` to ``x_prime`` along ``sigma``.

    Both points must lie on the same arc of ``sigma`` minus the two poles.
    Returns the map and its coefficient.
    """
    omega, omega_prime = as_point(omega), as_point(omega_prime)
    x, x_prime = as_point(x), as_point(x_prime)
    for p in (omega, omega_prime, x, x_prime):
        if sigma.distance_to(p) > 1e-9:
            raise PreconditionError(f"point {p!r} is not on the circle")
    chart = pole_chart(omega)
    c, gx, gx2 = to_chart(chart, omega_prime), to_chart(chart, x), to_chart(chart, x_prime)
    if any(is_infinity(p) for p in (c, gx, gx2)) or same_point(x, omega_prime, 0.0) or same_point(x_prime, omega_prime, 0.0):
        raise PreconditionError("x and x' must differ from both poles")
    v, v2 = gx - c, gx2 - c
    if float(v @ v2) <= 0.0:
        raise PreconditionError("x and x' lie on different arcs; no such homothety exists")
    lam = float(np.linalg.norm(v2) / np.linalg.norm(v))
    return homothety(omega_prime, lam, omega), lam


@dataclass
class ShiftApprox:
    words: list
    schedule: list
    cauchy: list
    limit: MapWord
    limit_gap: float


def shift_approx(x, x_prime, omega=INFINITY, schedule: Sequence[float] | None = None,
                 probes: np.ndarray | None = None, tol: float = 1e-9) -> ShiftApprox:
    """Compositions eta_n = h'_n ∘ h_n and their fitted limit isometry.

    ``h_n`` has center ``x`` and coefficient ``1/lam_n``; ``h'_n`` has center
    ``x_prime`` and coefficient ``lam_n``.
    """
    x, x_prime, omega = as_point(x), as_point(x_prime), as_point(omega)
    if same_point(x, omega, 0.0) or same_point(x_prime, omega, 0.0):
        raise PreconditionError("shift endpoints must differ from omega")
    if schedule is None:
        schedule = [2.0 ** -k for k in range(1, 13)]
    schedule = [float(s) for s in schedule]
    if len(schedule) < 3 or any(s <= 0 for s in schedule) or any(b >= a for a, b in zip(schedule, schedule[1:])):
        raise InputError("schedule must be a positive, strictly decreasing sequence of length >= 3")
    words = [compose(homothety(x_prime, lam, omega), homothety(x, 1.0 / lam, omega)) for lam in schedule]

    chart = pole_chart(omega)
    gx, gx2 = to_chart(chart, x), to_chart(chart, x_prime)
    n = len(gx)
    if probes is None:
        probes = gx + probe_points(n, 12, seed=7, radius=1.0)
    # images in chart coordinates, where every eta_n is a Euclidean isometry
    images = []
    for w in words:
        cw = _conjugate(chart, w)
        Y, mask = apply_array(cw, probes)
        if mask.any():
            raise ConvergenceError("probe mapped to omega")
        images.append(Y)
    images = np.array(images)
    cauchy = [float(np.max(np.linalg.norm(images[k] - images[k - 1], axis=1))) for k in range(1, len(images))]
    tail = cauchy[-3:]
    settled = max(tail) <= tol * (1.0 + float(np.max(np.linalg.norm(images[-1], axis=1))))
    if not settled and not all(b < a for a, b in zip(tail, tail[1:])):
        raise ConvergenceError("Cauchy differences are not decreasing; extend the schedule")

    limit_images = _aitken(images[-3], images[-2], images[-1])
    R, t = _fit_isometry(probes, limit_images)
    # snap: the limit must send x to x'
    t_snap = gx2 - R @ gx
    limit_chart = _word(MoebiusMapNF(np.zeros(n), False, R, 1.0, t_snap))
    snapped = probes @ R.T + t_snap
    gap = float(np.max(np.linalg.norm(snapped - limit_images, axis=1)))
    scale = 1.0 + float(np.max(np.linalg.norm(limit_images, axis=1)))
    if gap > max(1e-6 * scale, tol):
        raise ConvergenceError(f"fitted limit misses the extrapolated images by {gap:.3g}")
    return ShiftApprox(words, schedule, cauchy, _conjugate(chart, limit_chart), gap)


def _aitken(p0, p1, p2):
    d1 = p1 - p0
    d2 = p2 - p1
    denom = d2 - d1
    safe = np.abs(denom) > 1e-14 * (1.0 + np.abs(p2))
    est = p2 - np.where(safe, d2 * d2 / np.where(safe, denom, 1.0), 0.0)
    return est


def _fit_isometry(P, Q):
    """Least-squares orthogonal R and translation t with Q ≈ P R^T + t."""
    pc, qc = P.mean(axis=0), Q.mean(axis=0)
    H = (P - pc).T @ (Q - qc)
    U, _, Vt = np.linalg.svd(H)
    R = (U @ Vt).T
    return R, qc - R @ pc


# ---------------------------------------------------------------------------
# circles and lines


@dataclass(frozen=True)
class Circle:
    center: np.ndarray
    radius: float
    e1: np.ndarray
    e2: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, float)
        e1, e2 = np.asarray(self.e1, float), np.asarray(self.e2, float)
        if not self.radius > 0:
            raise InputError("circle radius must be positive")
        G = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
        if np.max(np.abs(G - np.eye(2))) > 1e-12:
            raise InputError("circle plane vectors must be orthonormal")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "e1", e1)
        object.__setattr__(self, "e2", e2)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return len(self.center)

    def point_at(self, theta: float):
        return self.center + self.radius * (math.cos(theta) * self.e1 + math.sin(theta) * self.e2)

    def sample(self, count: int, offset: float = 0.0) -> list:
        return [self.point_at(offset + 2 * math.pi * k / count) for k in range(count)]

    def nearest(self, p):
        w = p - self.center
        w = (w @ self.e1) * self.e1 + (w @ self.e2) * self.e2
        nw = np.linalg.norm(w)
        u = self.e1 if nw == 0 else w / nw
        return self.center + self.radius * u

    def distance_to(self, p) -> float:
        p = as_point(p)
        if is_infinity(p):
            far = self.nearest(self.center + (self.center if np.any(self.center) else self.e1))
            return chordal_distance(INFINITY, far)
        return chordal_distance(p, self.nearest(p))

    def order_key(self, p) -> float:
        w = as_point(p) - self.center
        return math.atan2(float(w @ self.e2), float(w @ self.e1)) % (2 * math.pi)

    def to_dict(self):
        return {"type": "circle", "center": self.center.tolist(), "radius": self.radius,
                "plane": [self.e1.tolist(), self.e2.tolist()]}


@dataclass(frozen=True)
class LineWithInfinity:
    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, float)
        if abs(float(d @ d) - 1.0) > 1e-12:
            raise InputError("line direction must be a unit vector")
        object.__setattr__(self, "base", np.asarray(self.base, float))
        object.__setattr__(self, "direction", d)

    @property
    def dim(self):
        return len(self.base)

    def point_at(self, t: float):
        return self.base + t * self.direction

    def sample(self, count: int, offset: float = 0.0) -> list:
        # tangent spacing spreads the samples over the whole line
        ts = [math.tan(math.pi * ((k + 0.5) / count - 0.5) + offset) for k in range(count)]
        return [self.point_at(t) for t in ts]

    def nearest(self, p):
        return self.base + float((p - self.base) @ self.direction) * self.direction

    def distance_to(self, p) -> float:
        p = as_point(p)
        if is_infinity(p):
            return 0.0
        return chordal_distance(p, self.nearest(p))

    def order_key(self, p) -> float:
        p = as_point(p)
        if is_infinity(p):
            return math.inf
        return float((p - self.base) @ self.direction)

    def to_dict(self):
        return {"type": "line", "base": self.base.tolist(), "direction": self.direction.tolist()}


CircleOrLine = Circle | LineWithInfinity


def circle_from_dict(d) -> CircleOrLine:
    if d.get("type") == "circle":
        e1, e2 = d["plane"]
        return Circle(d["center"], d["radius"], e1, e2)
    if d.get("type") == "line":
        return LineWithInfinity(d["base"], d["direction"])
    raise InputError(f"unknown circle type {d.get('type')!r}")


def circle_through(p, q, r, rel_tol: float = 1e-12) -> CircleOrLine:
    """The unique circle or line (with ∞) through three distinct points."""
    p, q, r = as_point(p), as_point(q), as_point(r)
    pts = [p, q, r]
    for i in range(3):
        for j in range(i + 1, 3):
            if same_point(pts[i], pts[j], 0.0):
                raise DegenerateInputError("circle_through needs three distinct points")
    finite = [x for x in pts if not is_infinity(x)]
    if len(finite) == 2:
        u = finite[1] - finite[0]
        return LineWithInfinity(finite[0], u / np.linalg.norm(u))
    u, w = q - p, r - p
    lu = float(np.linalg.norm(u))
    e1 = u / lu
    wx = float(w @ e1)
    wperp = w - wx * e1
    wy = float(np.linalg.norm(wperp))
    if wy <= rel_tol * max(lu, float(np.linalg.norm(w))):
        return LineWithInfinity(p, e1)
    e2 = wperp / wy
    e2 = e2 - float(e2 @ e1) * e1  # second pass; wperp can lose orthogonality to rounding
    e2 /= np.linalg.norm(e2)
    cx = lu / 2.0
    cy = (wx * wx + wy * wy - lu * wx) / (2.0 * wy)
    return Circle(p + cx * e1 + cy * e2, math.hypot(cx, cy), e1, e2)


def _spread_triple(points):
    best, best_area = None, -1.0
    k = len(points)
    for i in range(k):
        for j in range(i + 1, k):
            for l in range(j + 1, k):
                u, w = points[j] - points[i], points[l] - points[i]
                area = float(np.sqrt(max((u @ u) * (w @ w) - (u @ w) ** 2, 0.0)))
                if area > best_area:
                    best, best_area = (points[i], points[j], points[l]), area
    return best


def map_circle(m: MapWord, c: CircleOrLine, tol: float = 1e-10) -> CircleOrLine:
    """Image of a circle or line under a Moebius map."""
    pole = apply(inverse(m), INFINITY)
    through_pole = (is_infinity(pole) and isinstance(c, LineWithInfinity)) or (
        not is_infinity(pole) and c.distance_to(pole) <= 1e-12
    )
    samples = c.sample(12, offset=0.1)
    if isinstance(c, LineWithInfinity):
        samples.append(INFINITY)
    images = [apply(m, s) for s in samples]
    finite = [y for y in images if not is_infinity(y)]
    if through_pole:
        finite.sort(key=lambda y: float(y @ y))
        a = finite[0]
        rest = [y for y in finite[1:] if float(y @ y) <= 100.0 * (1.0 + float(a @ a))] or finite[1:]
        b = max(rest, key=lambda y: float(np.linalg.norm(y - a)))
        image = circle_through(a, b, INFINITY)
    else:
        image = circle_through(*_spread_triple(finite))
    check = [apply(m, s) for s in c.sample(10, offset=0.37)]
    worst = max(image.distance_to(y) for y in check)
    if worst > tol:
        raise DegenerateInputError(f"mapped circle failed validation (residual {worst:.3g})")
    return image


def same_circle(c1: CircleOrLine, c2: CircleOrLine, tol: float = 1e-10) -> bool:
    if type(c1) is not type(c2):
        return False
    return all(c2.distance_to(p) <= tol for p in c1.sample(8, offset=0.2)) and all(
        c1.distance_to(p) <= tol for p in c2.sample(8, offset=0.3)
    )


def _linear_conditions(circ: Circle, other: CircleOrLine):
    """Conditions on (cos t, sin t) for circ.point_at(t) to lie on ``other``.

    Lengths are divided by ``circ.radius`` so that the system is unitless.
    """
    R = circ.radius
    c = circ.center / R
    E = np.stack([circ.e1, circ.e2], axis=1)
    n = len(c)
    if isinstance(other, Circle):
        c2 = other.center / R
        F = np.stack([other.e1, other.e2], axis=1)
        P = np.eye(n) - F @ F.T
        rows = [P @ E]
        rhs = [-(P @ (c - c2))]
        dc = c - c2
        rows.append((2.0 * (dc @ E))[None, :])
        rhs.append(np.array([(other.radius / R) ** 2 - dc @ dc - 1.0]))
    else:
        b = other.base / R
        d = other.direction
        P = np.eye(n) - np.outer(d, d)
        rows = [P @ E]
        rhs = [-(P @ (c - b))]
    return np.vstack(rows), np.concatenate(rhs)


def _solve_on_unit_circle(M, k, tol=1e-9):
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    smax = float(S[0]) if len(S) else 0.0
    kscale = 1.0 + float(np.max(np.abs(k)))
    rank = int(np.sum(S > tol * max(smax, 1.0)))
    sol, *_ = np.linalg.lstsq(M, k, rcond=None)
    if rank == 0:
        if np.max(np.abs(k)) <= tol * kscale:
            raise DegenerateInputError("the two circles coincide")
        return []
    base = Vt[:rank].T @ ((U[:, :rank].T @ k) / S[:rank])
    if np.linalg.norm(M @ base - k) > 1e-7 * kscale:
        return []
    if rank == 2:
        if abs(float(base @ base) - 1.0) <= 1e-7:
            return [base / np.linalg.norm(base)]
        return []
    null = Vt[1]
    # |base + s*null|^2 = 1 with base orthogonal to null
    disc = 1.0 - float(base @ base)
    if disc < -1e-9:
        return []
    if disc <= 1e-12:
        return [base / np.linalg.norm(base)]
    s = math.sqrt(disc)
    return [base + s * null, base - s * null]


def intersect_circles(c1: CircleOrLine, c2: CircleOrLine) -> list:
    """Common points of two distinct circles/lines (at most two)."""
    if isinstance(c1, LineWithInfinity) and isinstance(c2, LineWithInfinity):
        d1, d2 = c1.direction, c2.direction
        M = np.stack([d1, -d2], axis=1)
        rhs = c2.base - c1.base
        st, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        cosang = abs(float(d1 @ d2))
        scale = 1.0 + float(np.linalg.norm(c1.base)) + float(np.linalg.norm(c2.base))
        if cosang >= 1.0 - 1e-14:
            off = rhs - float(rhs @ d1) * d1
            if np.linalg.norm(off) <= 1e-12 * scale:
                raise DegenerateInputError("the two lines coincide")
            return [INFINITY]
        p = c1.point_at(float(st[0]))
        q = c2.point_at(float(st[1]))
        if np.linalg.norm(p - q) <= 1e-9 * scale:
            return [INFINITY, 0.5 * (p + q)]
        return [INFINITY]
    if isinstance(c1, LineWithInfinity):
        c1, c2 = c2, c1
    M, k = _linear_conditions(c1, c2)
    sols = _solve_on_unit_circle(M, k)
    pts = [c1.center + c1.radius * (s[0] * c1.e1 + s[1] * c1.e2) for s in sols]
    if len(pts) == 2 and np.linalg.norm(pts[0] - pts[1]) <= 1e-12 * (c1.radius + np.linalg.norm(c1.center)):
        pts = pts[:1]
    return sorted(pts, key=lambda p: tuple(np.round(p, 12)))


def verify_ptolemy_equality(c: CircleOrLine, points: Sequence, tol: float = 1e-9) -> float:
    """Relative residual of the Ptolemy equality for four points on ``c``.

    The separating pairing comes from the cyclic order of the points along
    ``c``; distances are chordal.
    """
    pts = [as_point(p) for p in points]
    if len(pts) != 4:
        raise InputError("need exactly four points")
    for i in range(4):
        for j in range(i + 1, 4):
            if same_point(pts[i], pts[j], 0.0):
                raise DegenerateInputError("points must be distinct")
    for p in pts:
        if c.distance_to(p) > tol:
            raise PreconditionError("point is not on the circle")
    s = sorted(pts, key=c.order_key)
    d = chordal_distance
    lhs = d(s[0], s[2]) * d(s[1], s[3])
    rhs = d(s[0], s[1]) * d(s[2], s[3]) + d(s[0], s[3]) * d(s[1], s[2])
    return abs(lhs - rhs) / lhs


# ---------------------------------------------------------------------------
# axiom checks for strong inversions


@dataclass
class AxiomReport:
    involution: float
    pole_swap: float
    sphere_fixed: float
    circles_preserved: float
    tol: float

    @property
    def results(self) -> dict:
        return {
            "involution": self.involution,
            "pole_swap": self.pole_swap,
            "sphere_fixed": self.sphere_fixed,
            "circles_preserved": self.circles_preserved,
        }

    @property
    def passed(self) -> dict:
        return {k: v <= self.tol for k, v in self.results.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())


def circles_through_poles(omega, omega_prime, count: int, seed: int = 0) -> list:
    omega, omega_prime = as_point(omega), as_point(omega_prime)
    n = len(omega) if not is_infinity(omega) else len(omega_prime)
    rng = np.random.Generator(np.random.Philox(seed))
    out = []
    while len(out) < count:
        p = rng.normal(size=n) * 2.0
        try:
            out.append(circle_through(omega, omega_prime, p))
        except DegenerateInputError:
            continue
    return out


def verify_s_inversion(m: MapWord, omega, omega_prime, sphere_sample: Sequence, circles: Sequence,
                       probes: np.ndarray | None = None, tol: float = 1e-10, per_circle: int = 12) -> AxiomReport:
    """Measure how far ``m`` is from satisfying the four strong-inversion axioms."""
    omega, omega_prime = as_point(omega), as_point(omega_prime)
    if probes is None:
        probes = probe_points(m.dim, 20, seed=11)
    test_pts = list(probes) + list(sphere_sample) + [omega, omega_prime]
    inv = max(chordal_distance(apply(m, apply(m, p)), as_point(p)) for p in test_pts)
    swap = max(chordal_distance(apply(m, omega), omega_prime), chordal_distance(apply(m, omega_prime), omega))
    fixed = max((chordal_distance(apply(m, p), as_point(p)) for p in sphere_sample), default=0.0)
    circ = 0.0
    for sigma in circles:
        for p in sigma.sample(per_circle, offset=0.05):
            circ = max(circ, sigma.distance_to(apply(m, p)))
    return AxiomReport(inv, swap, fixed, circ, tol)
