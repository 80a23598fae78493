"""Cross-ratio triples, the Ptolemy property and Moebius equivalence of metrics."""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .core_metric import DEFAULT_REL_TOL, ExtendedMetricSpace, is_inf
from .errors import AdmissibilityError, InputError

# index pairs whose distance products give the three crt entries
PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


@dataclass(frozen=True)
class Sample:
    """Random scan of ``count`` admissible quadruples."""

    count: int
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise InputError("sample count must be >= 1")

    def describe(self):
        return {"kind": "sample", "count": self.count, "seed": self.seed}


EXHAUSTIVE = "exhaustive"


def _describe_mode(mode):
    return {"kind": "exhaustive"} if mode == EXHAUSTIVE else mode.describe()


@dataclass(frozen=True)
class CrossRatioTriple:
    """Point of RP^2 in canonical form: nonnegative, largest entry exactly 1."""

    a: object
    b: object
    c: object

    @classmethod
    def from_raw(cls, a, b, c) -> "CrossRatioTriple":
        m = max(a, b, c)
        if m <= 0:
            raise InputError("cross-ratio triple with all entries zero")
        if isinstance(m, (int, Fraction)) and all(isinstance(v, (int, Fraction)) for v in (a, b, c)):
            return cls(Fraction(a) / m, Fraction(b) / m, Fraction(c) / m)
        return cls(a / m, b / m, c / m)

    @property
    def entries(self) -> tuple:
        return (self.a, self.b, self.c)

    def __iter__(self):
        return iter(self.entries)

    def distance(self, other: "CrossRatioTriple") -> float:
        """Largest entrywise difference of the canonical forms."""
        return max(abs(float(x) - float(y)) for x, y in zip(self, other))

    def permuted(self, perm: Sequence[int]) -> "CrossRatioTriple":
        e = self.entries
        return CrossRatioTriple.from_raw(*(e[i] for i in pairing_permutation(perm)))

    def __repr__(self):
        return f"({self.a}:{self.b}:{self.c})"


def is_admissible(q: Sequence) -> bool:
    if len(q) != 4:
        return False
    return max(Counter(q).values()) < 3


def _factor(space, p, q, omega):
    if omega is not None and omega in (p, q):
        # d(omega, omega) = 0; any factor d(x, omega) cancels between entries
        return 0 if p == q else 1
    v = space.d(p, q)
    if is_inf(v):
        raise InputError(f"INF distance between finite points {p!r}, {q!r}")
    return v


def crt(space: ExtendedMetricSpace, q: Sequence) -> CrossRatioTriple:
    """Cross-ratio triple (d(x,y)d(z,u) : d(x,z)d(y,u) : d(x,u)d(y,z))."""
    if not is_admissible(q):
        raise AdmissibilityError(f"quadruple {tuple(q)!r} is not admissible")
    omega = space.infinite_point
    exact = space.is_exact
    raw = []
    for (i, j), (k, l) in PAIRINGS:
        v = _factor(space, q[i], q[j], omega) * _factor(space, q[k], q[l], omega)
        raw.append(v if exact else float(v))
    return CrossRatioTriple.from_raw(*raw)


def pairing_permutation(perm: Sequence[int]) -> tuple:
    """How relabelling a quadruple by ``perm`` permutes the three crt entries.

    Entry ``k`` of the relabelled triple equals entry ``result[k]`` of the
    original one, where the relabelled quadruple is ``(q[perm[0]], ...)``.
    """
    out = []
    for (i, j), (k, l) in PAIRINGS:
        pair = frozenset((frozenset((perm[i], perm[j])), frozenset((perm[k], perm[l]))))
        for idx, ((a, b), (c, d)) in enumerate(PAIRINGS):
            if pair == frozenset((frozenset((a, b)), frozenset((c, d)))):
                out.append(idx)
                break
    return tuple(out)


def ptolemy_defect(t: CrossRatioTriple):
    """Largest triangle-inequality residual; <= 0 iff the triple is Ptolemy."""
    a, b, c = t.entries
    return max(a - b - c, b - a - c, c - a - b)


def admissible_quadruples(ids: Sequence) -> Iterator[tuple]:
    """All admissible quadruples up to relabelling (sorted index multisets)."""
    for combo in itertools.combinations_with_replacement(range(len(ids)), 4):
        if max(Counter(combo).values()) < 3:
            yield tuple(ids[i] for i in combo)


def sampled_quadruples(ids: Sequence, count: int, seed: int) -> Iterator[tuple]:
    rng = np.random.Generator(np.random.Philox(seed))
    n = len(ids)
    if n < 2:
        return
    produced = 0
    while produced < count:
        for row in rng.integers(0, n, size=(max(count - produced, 16), 4)):
            q = tuple(ids[int(i)] for i in row)
            if is_admissible(q):
                yield q
                produced += 1
                if produced == count:
                    return


def scan_quadruples(ids: Sequence, mode) -> Iterator[tuple]:
    if mode == EXHAUSTIVE:
        return admissible_quadruples(ids)
    if isinstance(mode, Sample):
        return sampled_quadruples(ids, mode.count, mode.seed)
    raise InputError(f"unknown scan mode {mode!r}")


def _num(v):
    return float(v)


@dataclass
class PtolemyReport:
    passed: bool
    max_defect: object
    witness: tuple | None
    scanned: int
    mode: object
    tol: float

    def to_dict(self):
        d = {
            "suite": "ptolemy",
            "status": "pass" if self.passed else "fail",
            "max_defect": _num(self.max_defect) if self.max_defect is not None else None,
            "witness": None if self.witness is None else [str(w) for w in self.witness],
            "scanned": self.scanned,
            "mode": _describe_mode(self.mode),
            "tolerance": self.tol,
        }
        if isinstance(self.max_defect, Fraction):
            d["max_defect_exact"] = str(self.max_defect)
        return d

    @property
    def exit_code(self):
        return 0 if self.passed else 1


def is_ptolemy(space: ExtendedMetricSpace, mode=EXHAUSTIVE, tol: float = DEFAULT_REL_TOL) -> PtolemyReport:
    """Scan admissible quadruples and report the worst Ptolemy defect."""
    worst, witness, scanned = None, None, 0
    for q in scan_quadruples(space.point_ids, mode):
        defect = ptolemy_defect(crt(space, q))
        scanned += 1
        if worst is None or defect > worst:
            worst, witness = defect, q
    passed = worst is None or worst <= tol
    return PtolemyReport(passed, worst, witness, scanned, mode, tol)


@dataclass
class EquivalenceResult:
    equivalent: bool
    discrepancy: float
    witness: tuple | None
    scanned: int
    mode: object
    tol: float

    def __bool__(self):
        return self.equivalent

    def to_dict(self):
        return {
            "suite": "equivalence",
            "status": "pass" if self.equivalent else "fail",
            "discrepancy": self.discrepancy,
            "witness": None if self.witness is None else [str(w) for w in self.witness],
            "scanned": self.scanned,
            "mode": _describe_mode(self.mode),
            "tolerance": self.tol,
        }


def moebius_equivalent(a: ExtendedMetricSpace, b: ExtendedMetricSpace, correspondence: dict | None = None,
                       mode=EXHAUSTIVE, tol: float = DEFAULT_REL_TOL) -> EquivalenceResult:
    """Compare cross-ratio triples of two metrics under a point correspondence.

    ``correspondence`` maps ids of ``a`` to ids of ``b``; the identity map is
    used when omitted.
    """
    if len(a) != len(b):
        raise InputError(f"spaces have {len(a)} and {len(b)} points")
    if correspondence is None:
        correspondence = {p: p for p in a.point_ids}
    if set(correspondence) != set(a.point_ids) or set(correspondence.values()) != set(b.point_ids):
        raise InputError("correspondence must be a bijection between the point sets")
    worst, witness, scanned = 0.0, None, 0
    for q in scan_quadruples(a.point_ids, mode):
        diff = crt(a, q).distance(crt(b, tuple(correspondence[p] for p in q)))
        scanned += 1
        if witness is None or diff > worst:
            worst, witness = diff, q
    return EquivalenceResult(worst <= tol, worst, witness, scanned, mode, tol)


def crt_matrix(D: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """Canonical crt entries for many quadruples of a finite metric.

    ``D`` is a dense float distance matrix without infinite entries and
    ``quads`` an ``(m, 4)`` integer array; returns an ``(m, 3)`` array.
    """
    quads = np.asarray(quads)
    cols = []
    for (i, j), (k, l) in PAIRINGS:
        cols.append(D[quads[:, i], quads[:, j]] * D[quads[:, k], quads[:, l]])
    raw = np.stack(cols, axis=1)
    return raw / raw.max(axis=1, keepdims=True)
