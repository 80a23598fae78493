"""Verification suites: each one exercises a family of statements and reports
one record per check with its measured residual."""

from __future__ import annotations

import math
import os
import zlib
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import busemann as bz
from . import coordinatization as co
from . import model_space as ms
from .core_metric import (
    ExtendedMetricSpace,
    INF,
    from_points,
    metric_inversion,
    rescale,
    validate,
)
from .cross_ratio import EXHAUSTIVE, Sample, crt, crt_matrix, is_ptolemy, moebius_equivalent, admissible_quadruples
from .errors import InputError

ENV_PREFIX = "MOEBIUS_PTOLEMY_"


@dataclass
class Config:
    tolerance_rel: float = 1e-9
    tolerance_abs: float = 1e-15
    seed: int = 0
    dim: int = 3
    mode: object = EXHAUSTIVE
    t0: float = 1e6 / 2 ** 10
    steps: int = 15
    arithmetic: str = "float"

    def __post_init__(self):
        if not (self.tolerance_rel > 0 and self.tolerance_abs > 0):
            raise InputError("tolerances must be positive")
        if not 1 <= self.dim <= ms.MAX_DIM:
            raise InputError(f"dimension must be in 1..{ms.MAX_DIM}")
        if self.arithmetic not in ("float", "exact"):
            raise InputError("arithmetic must be 'float' or 'exact'")
        if self.steps < 3 or not self.t0 > 0:
            raise InputError("schedule needs t0 > 0 and at least 3 steps")

    @classmethod
    def from_env(cls, **overrides) -> "Config":
        env = {}
        casts = {"TOLERANCE": ("tolerance_rel", float), "TOLERANCE_ABS": ("tolerance_abs", float),
                 "SEED": ("seed", int), "DIM": ("dim", int), "MODE": ("mode", parse_mode),
                 "T0": ("t0", float), "STEPS": ("steps", int), "ARITHMETIC": ("arithmetic", str)}
        for key, (name, cast) in casts.items():
            raw = os.environ.get(ENV_PREFIX + key)
            if raw is not None:
                try:
                    env[name] = cast(raw)
                except ValueError:
                    raise InputError(f"bad value for {ENV_PREFIX + key}: {raw!r}") from None
        env.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**env)

    def to_dict(self):
        d = asdict(self)
        d["mode"] = "exhaustive" if self.mode == EXHAUSTIVE else f"sample:{self.mode.count}"
        return d


def parse_mode(text: str):
    if text == "exhaustive":
        return EXHAUSTIVE
    if text.startswith("sample"):
        _, _, count = text.partition(":")
        try:
            return Sample(int(count or 1000))
        except ValueError:
            raise InputError(f"bad sample count in mode {text!r}") from None
    raise InputError(f"unknown mode {text!r}")


@dataclass
class Check:
    name: str
    anchor: str
    value: float
    threshold: float
    relation: str = "<="
    witness: object = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        v = float(self.value)
        if math.isnan(v):
            return False
        if self.relation == "<=":
            return v <= self.threshold
        if self.relation == ">=":
            return v >= self.threshold
        if self.relation == "==":
            return self.value == self.threshold
        raise ValueError(self.relation)

    def to_dict(self):
        return {
            "name": self.name,
            "anchor": self.anchor,
            "value": self.value,
            "threshold": self.threshold,
            "relation": self.relation,
            "passed": self.passed,
            "witness": self.witness,
            "details": self.details,
        }


@dataclass
class SuiteReport:
    suite: str
    checks: list
    config: dict
    error: str | None = None

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "pass" if all(c.passed for c in self.checks) else "fail"

    @property
    def exit_code(self) -> int:
        return {"pass": 0, "fail": 1, "error": 2}[self.status]

    def to_dict(self):
        failed = sum(not c.passed for c in self.checks)
        d = {
            "suite": self.suite,
            "status": self.status,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "totals": {"checks": len(self.checks), "passed": len(self.checks) - failed, "failed": failed},
        }
        if self.error is not None:
            d["error"] = self.error
        return d

    def to_text(self) -> str:
        lines = [f"suite {self.suite}: {self.status.upper()}"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {float(c.value):.3e} {c.relation} {float(c.threshold):.3e}  ({c.anchor})")
        if self.error:
            lines.append(f"  error: {self.error}")
        return "\n".join(lines) + "\n"


def _rng(config: Config, suite: str) -> np.random.Generator:
    key = zlib.crc32(suite.encode())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, key])))


# ---------------------------------------------------------------------------
# fixtures


def l1_square_space() -> ExtendedMetricSpace:
    """Corners of the unit square with the L1 metric, exact arithmetic."""
    ids = ("a", "b", "c", "d")  # (0,0), (1,0), (1,1), (0,1)
    pts = [(0, 0), (1, 0), (1, 1), (0, 1)]
    table = [[Fraction(abs(p[0] - q[0]) + abs(p[1] - q[1])) for q in pts] for p in pts]
    return ExtendedMetricSpace(ids, table)


def euclidean_space(n: int, count: int, rng, with_infinity: bool = True) -> ExtendedMetricSpace:
    pts = list(rng.normal(size=(count, n)))
    ids = [f"p{i}" for i in range(count)]
    if with_infinity:
        pts.append(None)
        ids.append("inf")
    return from_points(pts, ids)


def chordal_space(points, ids) -> ExtendedMetricSpace:
    pts = [ms.as_point(p) for p in points]
    table = [[ms.chordal_distance(p, q) for q in pts] for p in pts]
    return ExtendedMetricSpace(tuple(ids), table)


# ---------------------------------------------------------------------------
# suites


def suite_metric_axioms(config, rng, space=None):
    checks = []
    if space is not None:
        rep = validate(space, config.tolerance_rel, config.tolerance_abs)
        checks.append(Check("input space is an extended metric", "extended metric axioms",
                            len(rep.violations), 0, witness=[v.to_dict() for v in rep.violations[:10]]))
        return checks
    euc = euclidean_space(config.dim, 20, rng)
    rep = validate(euc)
    checks.append(Check("euclidean sample validates", "extended metric axioms", len(rep.violations), 0))
    asym = ExtendedMetricSpace(("a", "b", "c"), [[0, 1, 1], [2, 0, 1], [1, 1, 0]])
    found = any(v.axiom == "symmetry" for v in validate(asym).violations)
    checks.append(Check("asymmetric table rejected", "symmetry of d", int(found), 1, "=="))
    bad_omega = ExtendedMetricSpace(("a", "b", "w"), [[0, 1, 5], [1, 0, INF], [5, INF, 0]], "w")
    found = any(v.axiom == "infinite-point" for v in validate(bad_omega).violations)
    checks.append(Check("finite distance to omega rejected", "d(x, omega) = inf", int(found), 1, "=="))
    z = euc.finite_ids[0]
    r = float(np.exp(rng.uniform(-1, 1)))
    inv = metric_inversion(euc, z, r)
    back = metric_inversion(inv, euc.infinite_point, r)
    worst = 0.0
    for i, p in enumerate(euc.point_ids):
        for j, q in enumerate(euc.point_ids):
            a, b = euc.distances[i][j], back.distances[i][j]
            if a is INF or b is INF:
                worst = max(worst, 0.0 if a is b else math.inf)
            elif max(a, b) > 0:
                worst = max(worst, abs(a - b) / max(a, b))
    checks.append(Check("metric inversion is an involution", "metric inversion d_z", worst, 1e-12))
    checks.append(Check("inverted space validates", "metric inversion keeps the Moebius class",
                        len(validate(inv).violations), 0))
    rep_in = is_ptolemy(euc, EXHAUSTIVE, 1e-12)
    rep_out = is_ptolemy(inv, EXHAUSTIVE, 1e-12)
    checks.append(Check("Ptolemy property preserved by inversion", "Ptolemy iff invariant under metric inversions",
                        max(float(rep_in.max_defect), float(rep_out.max_defect)), 1e-12))
    return checks


def _random_model_points(n, count, rng, with_infinity=True):
    X = rng.normal(size=(count, n)) * 2.0
    mask = np.zeros(count, bool)
    if with_infinity:
        mask[0] = True
        X[0] = 0.0
    return X, mask


def _random_quads(m, count, rng):
    out = []
    while len(out) < count:
        q = rng.integers(0, m, size=4)
        _, counts = np.unique(q, return_counts=True)
        if counts.max() < 3:
            out.append(q)
    return np.array(out)


def suite_crt_invariance(config, rng, space=None):
    checks = []
    n = config.dim
    X, mask = _random_model_points(n, 60, rng)
    quads = _random_quads(len(X), 1000, rng)
    base = crt_matrix(ms.chordal_matrix(X, mask), quads)
    worst, witness = 0.0, None
    for k in range(50):
        word = ms.random_map_word(n, int(rng.integers(1, 5)), rng)
        Y, ymask = ms.apply_array(word, X, mask)
        moved = crt_matrix(ms.chordal_matrix(Y, ymask), quads)
        gap = np.max(np.abs(moved - base), axis=1)
        i = int(np.argmax(gap))
        if gap[i] > worst:
            worst, witness = float(gap[i]), {"word": k, "quadruple": quads[i].tolist()}
    checks.append(Check("crt preserved by random Moebius words", "Moebius maps preserve cross-ratio triples",
                        worst, 1e-9, witness=witness, details={"quadruples": 1000, "words": 50}))

    # Euclidean extended metric and chordal metric define the same structure
    pts = [None] + list(rng.normal(size=(9, 2)) * 1.5)
    ids = [f"q{i}" for i in range(10)]
    euc = from_points(pts, ids)
    cho = chordal_space(pts, ids)
    res = moebius_equivalent(euc, cho, mode=EXHAUSTIVE, tol=1e-9)
    checks.append(Check("euclidean and chordal metrics equivalent", "Moebius equivalence of metrics",
                        res.discrepancy, 1e-9, details={"scanned": res.scanned}))
    signs = rng.choice([-1.0, 1.0], size=(10, 10))
    signs = np.triu(signs, 1)
    signs = signs + signs.T
    table = [[cho.distances[i][j] * (1.0 + 0.01 * signs[i][j]) for j in range(10)] for i in range(10)]
    pert = ExtendedMetricSpace(tuple(ids), table)
    res = moebius_equivalent(cho, pert, mode=EXHAUSTIVE, tol=1e-9)
    checks.append(Check("1% perturbation flagged", "Moebius equivalence of metrics",
                        res.discrepancy, 1e-3, ">=", witness=[str(w) for w in res.witness]))

    small = euclidean_space(n, 7, rng)
    z = small.finite_ids[1]
    inv = metric_inversion(small, z, 0.7)
    worst = 0.0
    for q in admissible_quadruples(small.point_ids):
        worst = max(worst, crt(small, q).distance(crt(inv, q)))
    checks.append(Check("crt preserved by metric inversion", "metric inversion keeps the Moebius class",
                        worst, 1e-12))
    scaled = rescale(small, 3.5)
    worst = max(crt(small, q).distance(crt(scaled, q)) for q in admissible_quadruples(small.point_ids))
    checks.append(Check("crt preserved by rescaling", "proportional metrics are Moebius equivalent", worst, 1e-15))
    return checks


def suite_ptolemy(config, rng, space=None):
    if space is not None:
        mode = config.mode
        rep = is_ptolemy(space, mode, config.tolerance_rel)
        return [Check("input space Ptolemy certification", "Ptolemy property", rep.max_defect if rep.max_defect is not None else 0.0,
                      config.tolerance_rel, witness=None if rep.witness is None else [str(w) for w in rep.witness],
                      details={"scanned": rep.scanned,
                               "max_defect_exact": str(rep.max_defect) if isinstance(rep.max_defect, Fraction) else None})]
    checks = []
    euc = euclidean_space(2, 12, rng)
    rep = is_ptolemy(euc, EXHAUSTIVE, 1e-12)
    checks.append(Check("euclidean plane with infinity is Ptolemy", "Ptolemy property", float(rep.max_defect), 1e-12,
                        witness=[str(w) for w in rep.witness], details={"scanned": rep.scanned}))
    rep = is_ptolemy(l1_square_space(), EXHAUSTIVE, 0)
    checks.append(Check("L1 square defect is exactly 1/2", "Ptolemy property", rep.max_defect, Fraction(1, 2), "==",
                        witness=[str(w) for w in rep.witness], details={"status": "pass" if rep.passed else "fail"}))
    return checks


def suite_inversion_lemmas(config, rng, space=None):
    w1 = w2 = 0.0
    for i in range(1000):
        n = 1 + i % 5
        r = float(np.exp(rng.uniform(-1, 1)))
        o, x, y = rng.normal(size=n), rng.normal(size=n) * 2, rng.normal(size=n) * 2
        if i % 2 == 0:
            far = ms.INFINITY
        else:
            # sample in the chart of the far pole so the omega-metric is well conditioned
            far = rng.normal(size=n) * 2
            chart = ms.pole_chart(far)
            o, x, y = (ms.to_chart(chart, p) for p in (o, x, y))
        phi = ms.strong_inversion(o, far, radius=r)
        d = lambda p, q: ms.pole_distance(p, q, far)
        px, py = ms.apply(phi, x), ms.apply(phi, y)
        w1 = max(w1, abs(d(o, x) * d(o, px) - r * r) / (r * r))
        expected = r * r * d(x, y) / (d(o, x) * d(o, y))
        w2 = max(w2, abs(d(px, py) - expected) / expected)
    return [
        Check("|ox|·|o phi(x)| = r^2", "inversion distance identity for s-inversions", w1, 1e-10,
              details={"samples": 1000}),
        Check("|phi(x)phi(y)| = r^2 |xy| / (|ox||oy|)", "inversion distortion identity for s-inversions", w2, 1e-10,
              details={"samples": 1000}),
    ]


def _pole_configs(n, rng):
    out = [(np.zeros(n), ms.INFINITY), (ms.INFINITY, rng.normal(size=n))]
    for _ in range(4):
        out.append((rng.normal(size=n), rng.normal(size=n) * 2))
    out.append((rng.normal(size=n), ms.INFINITY))
    return out


def suite_s_inversion_axioms(config, rng, space=None):
    n = config.dim
    checks = []
    worst = {"involution": 0.0, "pole_swap": 0.0, "sphere_fixed": 0.0, "circles_preserved": 0.0}
    uniq = 0.0
    for k, (om, om2) in enumerate(_pole_configs(n, rng)):
        r = float(np.exp(rng.uniform(-1, 1)))
        phi = ms.strong_inversion(om, om2, radius=r)
        sphere = ms.sphere_points(om, om2, r, 100, seed=int(rng.integers(1 << 31)))
        circles = ms.circles_through_poles(om, om2, 20, seed=int(rng.integers(1 << 31)))
        rep = ms.verify_s_inversion(phi, om, om2, sphere, circles, tol=1e-10)
        for key, v in rep.results.items():
            worst[key] = max(worst[key], v)
        # the same sphere seen from the other pole
        other = ms.strong_inversion(om2, om, witness=sphere[0])
        uniq = max(uniq, ms.max_action_gap(phi, other, ms.probe_points(n, 20, seed=k)))
    anchors = {
        "involution": "s-inversion axiom: phi^2 = id",
        "pole_swap": "s-inversion axiom: phi swaps the poles",
        "sphere_fixed": "s-inversion axiom: S fixed pointwise",
        "circles_preserved": "s-inversion axiom: circles through the poles preserved",
    }
    for key, v in worst.items():
        checks.append(Check(f"constructed inversions: {key}", anchors[key], v, 1e-10))
    checks.append(Check("construction independent of pole order", "uniqueness of the strong inversion (model space)",
                        uniq, 1e-9))
    om, om2 = np.zeros(n), ms.INFINITY
    sphere = ms.sphere_points(om, om2, 1.0, 20)
    circles = ms.circles_through_poles(om, om2, 5)
    rep = ms.verify_s_inversion(ms.homothety(om, 4.0), om, om2, sphere, circles)
    checks.append(Check("homothety is not an involution", "s-inversion axiom: phi^2 = id", rep.involution, 1e-3, ">="))
    refl = ms.hyperplane_reflection(np.eye(n)[0], np.zeros(n))
    rep = ms.verify_s_inversion(refl, om, om2, sphere, circles)
    checks.append(Check("reflection through the poles does not swap them", "s-inversion axiom: phi swaps the poles",
                        rep.pole_swap, 1e-3, ">="))
    return checks


def suite_homothety(config, rng, space=None):
    n = config.dim
    checks = []
    for lam in (0.1, 1.0, 4.0, 100.0):
        o = rng.normal(size=n)
        h = ms.homothety(o, lam)
        X = rng.normal(size=(1000, n)) * 3
        Y = rng.normal(size=(1000, n)) * 3
        hX, _ = ms.apply_array(h, X)
        hY, _ = ms.apply_array(h, Y)
        dist = np.linalg.norm(X - Y, axis=1)
        res = float(np.max(np.abs(np.linalg.norm(hX - hY, axis=1) - lam * dist) / (lam * dist)))
        checks.append(Check(f"|h(x)h(y)| = lambda|xy| (lambda={lam:g})", "homothety scales distances by lambda",
                            res, 1e-10, details={"pairs": 1000, "factors": len(h)}))
        fix = max(float(np.linalg.norm(ms.apply(h, o) - o)), 0.0 if ms.apply(h, ms.INFINITY) is ms.INFINITY else math.inf)
        checks.append(Check(f"h fixes o and infinity (lambda={lam:g})", "homothety fixes its center and omega",
                            fix, 1e-12 * (1 + float(np.linalg.norm(o)))))
        circ = 0.0
        for sigma in ms.circles_through_poles(o, ms.INFINITY, 10, seed=int(rng.integers(1 << 31))):
            for p in sigma.sample(8, 0.3):
                circ = max(circ, sigma.distance_to(ms.apply(h, p)))
        checks.append(Check(f"h preserves circles through o, infinity (lambda={lam:g})",
                            "homothety preserves circles through center and omega", circ, 1e-10))
    # horospheres of lines through o go to horospheres
    hor = 0.0
    for _ in range(10):
        o = rng.normal(size=n)
        lam = float(np.exp(rng.uniform(-2, 2)))
        h = ms.homothety(o, lam)
        line = bz.ParamLine(o, rng.normal(size=n))
        z = line(float(rng.normal() * 3))
        H = bz.Horosphere.through(bz.BusemannFn(line), z)
        target = bz.Horosphere.through(bz.BusemannFn(line), ms.apply(h, z))
        img, _ = ms.apply_array(h, H.sample(20, seed=int(rng.integers(1 << 31))))
        hor = max(hor, max(abs(target.residual(p)) for p in img))
    checks.append(Check("h(H_z) lies in H_h(z)", "homotheties preserve the horosphere foliation", hor, 1e-10))
    # finite omega: distances of the metric with infinite point omega scale by lambda
    worst = 0.0
    for _ in range(50):
        o, om = rng.normal(size=n), rng.normal(size=n) * 2
        lam = float(np.exp(rng.uniform(-2, 2)))
        h = ms.homothety(o, lam, om)
        x, y = rng.normal(size=n), rng.normal(size=n)
        d0 = ms.pole_distance(x, y, om)
        worst = max(worst, abs(ms.pole_distance(ms.apply(h, x), ms.apply(h, y), om) - lam * d0) / (lam * d0))
    checks.append(Check("homothety with finite omega scales the omega-metric", "homothety scales distances by lambda",
                        worst, 1e-9))
    # transit along a circle through two poles
    worst = 0.0
    for _ in range(20):
        om, om2 = rng.normal(size=n), rng.normal(size=n)
        sigma = ms.circle_through(om, om2, rng.normal(size=n))
        chart = ms.pole_chart(om)
        c = ms.to_chart(chart, om2)
        d = ms.to_chart(chart, sigma.sample(1, 1.0)[0]) - c
        d = d / np.linalg.norm(d)
        x = ms.to_chart(chart, c + 0.7 * d)
        x2 = ms.to_chart(chart, c + 2.9 * d)
        h, lam = ms.transit_homothety(sigma, om, om2, x, x2)
        worst = max(worst, ms.chordal_distance(ms.apply(h, x), x2))
    checks.append(Check("transit homothety moves x to x'", "homothety along an arc between the poles", worst, 1e-10))
    return checks


def suite_shift_limit(config, rng, space=None):
    n = config.dim
    checks = []
    closed = nf_gap = distortion = hit = 0.0
    par = 0.0
    for _ in range(5):
        x, x2 = rng.normal(size=n), rng.normal(size=n)
        sa = ms.shift_approx(x, x2)
        P = rng.normal(size=(20, n)) * 3
        for lam, w in zip(sa.schedule, sa.words):
            red = ms.reduce_word(w)
            if len(red) != 1:
                nf_gap = math.inf
                continue
            Y, _ = ms.apply_array(red, P)
            closed = max(closed, float(np.max(np.linalg.norm(Y - (P + (1 - lam) * (x2 - x)), axis=1))))
            nf = red.factors[0]
            nf_gap = max(nf_gap, float(np.max(np.abs(nf.A - np.eye(n)))), abs(nf.lam - 1.0),
                          float(np.max(np.abs(nf.b - nf.a - (1 - lam) * (x2 - x)))), float(nf.invert))
        L, _ = ms.apply_array(sa.limit, P)
        Dp = np.linalg.norm(P[:, None] - P[None], axis=-1)
        Dl = np.linalg.norm(L[:, None] - L[None], axis=-1)
        distortion = max(distortion, float(np.max(np.abs(Dp - Dl))))
        hit = max(hit, float(np.linalg.norm(ms.apply(sa.limit, x) - x2)))
        for _ in range(10):
            line = bz.ParamLine(rng.normal(size=n), rng.normal(size=n))
            a, b = ms.apply(sa.limit, line(0.0)), ms.apply(sa.limit, line(1.0))
            moved = bz.ParamLine(a, b - a)
            par = max(par, abs(abs(float(moved.direction @ line.direction)) - 1.0))
    checks.append(Check("eta_n(y) = y + (1 - lambda_n)(x' - x)", "shifts as limits of homothety compositions",
                        closed, 1e-12))
    checks.append(Check("reduced eta_n is the translation by (1 - lambda_n)(x' - x)",
                        "shifts as limits of homothety compositions", nf_gap, 1e-10))
    checks.append(Check("fitted limit is an isometry", "a shift is an isometry of X_omega", distortion, 1e-10))
    checks.append(Check("fitted limit sends x to x'", "a shift moves x to x'", hit, 1e-10))
    checks.append(Check("shift moves lines to Busemann parallel lines", "shifts preserve Busemann parallelism",
                        par, 1e-10, details={"lines": 50}))
    return checks


def suite_horosphere_symmetry(config, rng, space=None):
    n = config.dim
    line = bz.ParamLine(rng.normal(size=n), rng.normal(size=n))
    res = bz.horosphere_symmetry_limit(line, t0=config.t0, steps=config.steps)
    checks = []
    if 1e6 in res.ts:
        checks.append(Check("phi_t vs horosphere reflection at t = 1e6", "phi_t subconverge to the horosphere symmetry",
                            res.error_at(1e6), 1e-4, details={"table": res.table()}))
    checks.append(Check("error(2t) / error(t)", "phi_t subconverge to the horosphere symmetry", max(res.ratios()), 0.6))
    checks.append(Check("horosphere points fixed by the limit", "the limit symmetry fixes H_z pointwise",
                        res.fixed_residual, 1e-6))
    checks.append(Check("limit symmetry is an isometry", "the limit symmetry is an isometry of X_omega",
                        res.isometry_distortion, 1e-10))
    checks.append(Check("extrapolated limit matches the reflection", "phi_t subconverge to the horosphere symmetry",
                        res.richardson_gap, 1e-6))
    b = bz.BusemannFn(line)
    bm = b.opposite()
    spread = swap = 0.0
    for level in rng.normal(size=5) * 3:
        H = bz.Horosphere(b, float(level))
        S = H.sample(20, seed=int(rng.integers(1 << 31)))
        img, _ = ms.apply_array(res.limit, S)
        vals = np.array([b(p) for p in img])
        spread = max(spread, float(vals.max() - vals.min()))
        swap = max(swap, max(abs(b(p) - bm(q)) for p, q in zip(S, img)))
    checks.append(Check("symmetry maps horospheres to horospheres", "image of a horosphere is a horosphere",
                        spread, 1e-10))
    checks.append(Check("b+(x) = b-(phi(x))", "Busemann flatness via the horosphere symmetry", swap, 1e-10))
    return checks


def suite_busemann(config, rng, space=None):
    n = config.dim
    checks = []
    worst_gap = worst_bound = mono = flat = fol = par = 0.0
    for _ in range(20):
        line = bz.ParamLine(rng.normal(size=n), rng.normal(size=n))
        b = bz.BusemannFn(line)
        for x in line.base + bz.ball_points(n, 20, radius=10.0, seed=int(rng.integers(1 << 31))):
            lim = bz.busemann_value_limit(line, x, 1e6)
            worst_gap = max(worst_gap, abs(lim - b(x)))
            worst_bound = max(worst_bound, abs(lim - b(x)) - bz.limit_error_bound(line, x, 1e6) - 1e-9)
            vals = [bz.busemann_value_limit(line, x, t) for t in (1e1, 1e2, 1e3, 1e4)]
            mono = max(mono, max(v2 - v1 for v1, v2 in zip(vals, vals[1:])))
            flat = max(flat, abs(b(x) + b.opposite()(x)))
            t, z = bz.foliation_coordinates(line, x)
            fol = max(fol, float(np.linalg.norm(bz.foliation_point(line, t, z) - x)),
                      abs(b(z)))
        other = bz.parallel_line_through(line, rng.normal(size=n) * 3)
        b2 = bz.BusemannFn(other)
        diffs = [b(p) - b2(p) for p in rng.normal(size=(10, n)) * 3]
        par = max(par, max(diffs) - min(diffs))
    checks.append(Check("closed form vs limit at t = 1e6", "Busemann function as a limit", worst_gap, 1e-4))
    checks.append(Check("limit gap within |x - x0|^2 / 2t", "Busemann function as a limit", max(worst_bound, 0.0), 0.0))
    checks.append(Check("|x c(t)| - t nonincreasing in t", "Busemann function as a limit", max(mono, 0.0), 1e-9))
    checks.append(Check("b+ + b- = 0", "Busemann flatness", flat, 1e-12))
    checks.append(Check("foliation (t, z) -> c_z(t) round trip", "parallel lines foliate X_omega", fol, 1e-12))
    checks.append(Check("parallel lines share Busemann functions", "Busemann parallel lines", par, 1e-12))
    pmax, nmin = 0.0, math.inf
    for _ in range(50):
        line = bz.ParamLine(rng.normal(size=n), rng.normal(size=n))
        pmax = max(pmax, bz.check_sublinear_divergence(line, bz.parallel_line_through(line, rng.normal(size=n) * 5), 1e6))
        while True:
            u = rng.normal(size=n)
            u /= np.linalg.norm(u)
            if np.linalg.norm(u - line.direction) >= 0.5:
                break
        other = bz.ParamLine(rng.normal(size=n), u)
        nmin = min(nmin, bz.check_sublinear_divergence(line, other, 1e6))
    checks.append(Check("parallel lines: |c(t)c'(t)|/t small", "sublinear divergence of parallel lines", pmax, 1e-2))
    if n > 1:
        checks.append(Check("non-parallel lines: |c(t)c'(t)|/t large", "sublinear divergence of parallel lines",
                            nmin, 0.5, ">="))
    return checks


def suite_projection(config, rng, space=None):
    n = max(config.dim, 2)
    coll = alpha_res = alpha_oracle = hom = 0.0
    for _ in range(50):
        o = rng.normal(size=n)
        u = rng.normal(size=n)
        chart = bz.ProjectionChart(o, u)
        w = rng.normal(size=n)
        other = bz.ParamLine(o, w)
        rep = bz.check_projected_line(chart, other, np.linspace(-5, 5, 11))
        coll = max(coll, rep.collinearity)
        alpha_res = max(alpha_res, rep.alpha_residual)
        cos = float(chart.direction @ other.direction)
        alpha_oracle = max(alpha_oracle, abs(rep.alpha - math.sqrt(max(1 - cos * cos, 0.0))))
        t = np.sort(rng.normal(size=3) * 3)
        hr = bz.homogen_ratio_check(chart, other, *t)
        hom = max(hom, hr.spread)
    return [
        Check("projected line is collinear", "projection of a line to a horosphere is a line", coll, 1e-9),
        Check("projected distances equal alpha|t - t'|", "projection of a line to a horosphere is a line",
              alpha_res, 1e-9),
        Check("alpha equals |sin(angle)|", "projection of a line to a horosphere is a line", alpha_oracle, 1e-9),
        Check("three projection ratios agree", "projection ratios are homogeneous", hom, 1e-10),
    ]


def suite_lemma_3eq(config, rng, space=None):
    n = max(config.dim, 2)
    worst = {}
    for _ in range(500):
        rep = bz.lemma_3eq_suite(*bz.matched_configuration(n, rng))
        for k, v in rep.residuals.items():
            worst[k] = max(worst.get(k, 0.0), v)
    return [Check(k, "metric relations between Busemann parallel lines", v, 1e-10, details={"configurations": 500})
            for k, v in worst.items()]


def _random_circle(n, rng, through=()):
    pts = list(through)
    while len(pts) < 3:
        pts.append(rng.normal(size=n) * 2)
    return ms.circle_through(*pts)


def suite_circle_two_points(config, rng, space=None):
    n = max(config.dim, 2)
    most = 0
    on_both = 0.0
    recovered = 0.0
    for i in range(1000):
        kind = i % 4
        if kind == 0:
            p, q = rng.normal(size=n), rng.normal(size=n)
            c1, c2 = _random_circle(n, rng, (p, q)), _random_circle(n, rng, (p, q))
        elif kind == 1:
            c1, c2 = _random_circle(n, rng), _random_circle(n, rng)
        elif kind == 2:
            p = rng.normal(size=n)
            c1 = _random_circle(n, rng, (p,))
            c2 = ms.circle_through(p, rng.normal(size=n), ms.INFINITY)
        else:
            c1 = ms.circle_through(rng.normal(size=n), rng.normal(size=n), ms.INFINITY)
            c2 = ms.circle_through(rng.normal(size=n), rng.normal(size=n), ms.INFINITY)
        if ms.same_circle(c1, c2):
            continue
        pts = ms.intersect_circles(c1, c2)
        most = max(most, len(pts))
        for x in pts:
            on_both = max(on_both, c1.distance_to(x), c2.distance_to(x))
        if kind == 0:
            recovered = max(recovered, max(min(ms.chordal_distance(x, y) for y in pts) for x in (p, q)))
    return [
        Check("at most two common points", "distinct circles share at most two points", most, 2,
              details={"pairs": 1000}),
        Check("intersection points lie on both circles", "distinct circles share at most two points", on_both, 1e-9),
        Check("constructed common points recovered", "distinct circles share at most two points", recovered, 1e-7),
    ]


def suite_ptolemy_equality(config, rng, space=None):
    n = max(config.dim, 2)
    worst = image = 0.0
    for i in range(500):
        if i % 5 == 4:
            c = ms.circle_through(rng.normal(size=n), rng.normal(size=n), ms.INFINITY)
            ts = rng.normal(size=3) * 3
            pts = [c.point_at(t) for t in ts] + [ms.INFINITY]
        else:
            c = _random_circle(n, rng)
            pts = [c.point_at(t) for t in rng.uniform(0, 2 * math.pi, size=4)]
        worst = max(worst, ms.verify_ptolemy_equality(c, pts))
        if i % 10 == 0:
            w = ms.random_map_word(n, 3, rng)
            c2 = ms.map_circle(w, c)
            image = max(image, ms.verify_ptolemy_equality(c2, [ms.apply(w, p) for p in pts]))
    return [
        Check("Ptolemy equality on circles", "Ptolemy equality on Ptolemy circles", worst, 1e-10,
              details={"configurations": 500}),
        Check("Ptolemy equality on Moebius images", "Ptolemy equality on Ptolemy circles", image, 1e-10),
    ]


def coordinatization_checks(n, rng):
    chart, steps = co.build_chart(n)
    checks = []
    tag = f" (n={n})"
    checks.append(Check("descent length" + tag, "the descent terminates after n steps", len(steps), n, "=="))
    units = [s.unit_point for s in steps]
    unit_norm = max(abs(float(np.linalg.norm(x - chart.origin)) - 1.0) for x in units)
    pair = max((abs(float(np.linalg.norm(a - b)) - math.sqrt(2)) for i, a in enumerate(units) for b in units[i + 1:]),
               default=0.0)
    checks.append(Check("unit points at distance 1 from o" + tag, "unit points x_i with |x_i o| = 1", unit_norm, 1e-12))
    checks.append(Check("unit points pairwise sqrt(2) apart" + tag, "unit points pairwise at least 1 apart", pair, 1e-12))
    P = rng.normal(size=(30, n)) * 3
    rt = max(float(np.linalg.norm(chart.point(chart.coordinates(x)) - x)) for x in P)
    recon = max(float(np.linalg.norm(chart.origin + sum(chart.component(x, i) - chart.origin for i in range(n)) - x))
                for x in P)
    inter = max(float(np.linalg.norm(co.horosphere_intersection(chart, x) - x)) for x in P)
    checks.append(Check("chart round trip" + tag, "coordinates give a bijection", rt, 1e-12))
    checks.append(Check("x = x(0) + ... + x(N)" + tag, "coordinates give a bijection", recon, 1e-12))
    checks.append(Check("x is the intersection of its horospheres" + tag, "coordinates give a bijection", inter, 1e-12))
    sch = co.schoenberg_check(co.chart_norm(chart), list(rng.normal(size=(20, n)) * 3), n)
    metric = 0.0
    for x, y in zip(P, P[::-1]):
        d = float(np.linalg.norm(x - y))
        if d > 0:
            metric = max(metric, abs(co.inner_product_distance(chart, sch.gram, x, y) - d) / d)
    checks.append(Check("recovered metric vs ambient" + tag, "X is Moebius equivalent to extended Euclidean space",
                        metric, 1e-9))
    checks.append(Check("parallelogram defect" + tag, "a Ptolemy normed space is an inner product space", sch.defect, 1e-9))
    checks.append(Check("Gram matrix positive semidefinite" + tag, "a Ptolemy normed space is an inner product space",
                        sch.gram_min_eigenvalue, -1e-9, ">="))
    tr = co.translation_isometry_check(chart, rng.normal(size=n) * 2, [(rng.normal(size=n), rng.normal(size=n)) for _ in range(100)])
    checks.append(Check("T_x is an isometry" + tag, "T_x is a composition of a-shifts and an isometry", tr.distortion, 1e-10))
    checks.append(Check("T_x(y) = x + y" + tag, "T_x is a composition of a-shifts and an isometry", tr.addition_residual, 1e-10))
    sc = max(co.homothety_scaling_check(chart, k, P[:10]).residual for k in (0.5, 3.0, 4.0))
    checks.append(Check("h_k(x) = kx" + tag, "homotheties about o are scalings", sc, 1e-10))
    nr = co.norm_axiom_check(chart, P[:12])
    checks.append(Check("nu(x) = 0 only at o" + tag, "nu is a norm", int(nr.zero_ok), 1, "=="))
    checks.append(Check("nu triangle inequality" + tag, "nu is a norm", nr.triangle_violation, 1e-12))
    checks.append(Check("nu(kx) = |k| nu(x)" + tag, "nu is a norm", nr.homogeneity, 1e-12))
    checks.append(Check("|xy| = nu(y - x)" + tag, "nu induces the metric", nr.metric_residual, 1e-12))
    return checks


def suite_coordinatization(config, rng, space=None):
    checks = []
    for n in range(1, config.dim + 1):
        checks.extend(coordinatization_checks(n, rng))
    return checks


def suite_schoenberg(config, rng, space=None):
    n = config.dim
    chart, _ = co.build_chart(n)
    sch = co.schoenberg_check(co.chart_norm(chart), list(rng.normal(size=(30, n)) * 3), n)
    l1 = co.schoenberg_check(lambda v: float(np.sum(np.abs(v))), [np.array([1.0, 0.0]), np.array([0.0, 1.0])], 2)
    one, _ = co.build_chart(1)
    sch1 = co.schoenberg_check(co.chart_norm(one), list(rng.normal(size=(10, 1))), 1)
    return [
        Check("chart norm satisfies the parallelogram law", "a Ptolemy normed space is an inner product space",
              sch.defect, 1e-9),
        Check("L1 norm violates the parallelogram law", "a Ptolemy normed space is an inner product space",
              l1.defect, 4.0, ">=", details={"passed": l1.passed}),
        Check("one-dimensional chart is Euclidean", "a Ptolemy normed space is an inner product space",
              sch1.defect, 1e-12),
    ]


SUITES = {
    "metric-axioms": suite_metric_axioms,
    "crt-invariance": suite_crt_invariance,
    "ptolemy": suite_ptolemy,
    "inversion-lemmas": suite_inversion_lemmas,
    "s-inversion-axioms": suite_s_inversion_axioms,
    "homothety": suite_homothety,
    "shift-limit": suite_shift_limit,
    "circle-two-points": suite_circle_two_points,
    "ptolemy-equality": suite_ptolemy_equality,
    "busemann": suite_busemann,
    "horosphere-symmetry": suite_horosphere_symmetry,
    "projection": suite_projection,
    "lemma-3eq": suite_lemma_3eq,
    "coordinatization": suite_coordinatization,
    "schoenberg": suite_schoenberg,
}


def run_suite(name: str, config: Config | None = None, space: ExtendedMetricSpace | None = None) -> SuiteReport:
    """Run one named suite; deterministic in (name, config, space)."""
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
    config = config or Config()
    rng = _rng(config, name)
    try:
        checks = SUITES[name](config, rng, space)
    except (InputError, ValueError, ArithmeticError) as exc:
        return SuiteReport(name, [], config.to_dict(), error=f"{type(exc).__name__}: {exc}")
    return SuiteReport(name, checks, config.to_dict())
