"""Exhaustive and Monte Carlo classification of quotients by odd relation tuples.

Predictions are exact rationals. A class with d = n gets the per-class count
formula; a class with d = m' < n is predicted from level m' (same depth) and
scaled by the restriction factor C_n^2 / (C_{m'}^2 C_{n-m'}).
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .fp import check_odd_prime
from .group import (
    SigmaGroup,
    Subgroup,
    generator_rank,
    is_totally_odd,
    normal_closure,
    quotient,
    relation_rank,
    subgroup_generated,
    trivial_group,
)
from .iso import DEFAULT_AUT_CAP, Classifier, sigma_aut_order
from .magnus import DEFAULT_SIZE_CAP, CapExceeded, enumerate_group
from .measure import mu_n_class_count, mu_n_restriction_factor

CHUNK = 8192
DEFAULT_TUPLE_CAP = 10 ** 6
SAMPLERS = ("odd-list", "twisted")


@dataclass(frozen=True)
class ExperimentSpec:
    p: int
    n: int
    depth: int
    mode: str = "exhaustive"
    samples: int = 0
    seed: int | None = None
    sampler: str = "odd-list"
    workers: int = 1
    size_cap: int = DEFAULT_SIZE_CAP
    aut_cap: int = DEFAULT_AUT_CAP
    tuple_cap: int = DEFAULT_TUPLE_CAP

    def validate(self) -> None:
        check_odd_prime(self.p)
        if self.n < 1 or self.depth < 2:
            raise ValueError("need n >= 1 and depth >= 2")
        if self.mode not in ("exhaustive", "monte-carlo"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "monte-carlo":
            if self.samples < 1:
                raise ValueError("monte-carlo mode needs samples >= 1")
            if self.seed is None:
                raise ValueError("monte-carlo mode needs a seed")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class ClassRecord:
    label: str
    observed: int
    m: int | None
    d: int
    aut_order: int | None
    probability: Fraction | None
    expected: float | None
    sigma_dev: float | None
    order: int = 0

    def to_json(self) -> dict:
        out = asdict(self)
        out["probability"] = None if self.probability is None else str(self.probability)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ClassRecord":
        obj = dict(obj)
        if obj.get("probability") is not None:
            obj["probability"] = Fraction(obj["probability"])
        return cls(**obj)


@dataclass
class FrequencyReport:
    spec: ExperimentSpec
    classes: list[ClassRecord]
    totals: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "spec": asdict(self.spec),
            "classes": [c.to_json() for c in self.classes],
            "totals": self.totals,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, obj: dict) -> "FrequencyReport":
        return cls(ExperimentSpec(**obj["spec"]), [ClassRecord.from_json(c) for c in obj["classes"]],
                   dict(obj["totals"]))

    def to_text(self) -> str:
        hdr = f"{'order':>6} {'d':>2} {'m':>2} {'aut':>8} {'observed':>9} {'expected':>12} {'dev':>7}  label"
        lines = [f"p={self.spec.p} n={self.spec.n} depth={self.spec.depth} mode={self.spec.mode}"
                 f" (predictions are for the depth-{self.spec.depth} truncation)", hdr]
        for c in self.classes:
            exp = "-" if c.expected is None else f"{c.expected:.4f}".rstrip("0").rstrip(".")
            dev = "-" if c.sigma_dev is None else f"{c.sigma_dev:+.2f}"
            m = "-" if c.m is None else str(c.m)
            aut = "-" if c.aut_order is None else str(c.aut_order)
            lines.append(f"{c.order:>6} {c.d:>2} {m:>2} {aut:>8} {c.observed:>9} {exp:>12} {dev:>7}  {c.label}")
        lines.append("totals: " + ", ".join(f"{k}={v}" for k, v in sorted(self.totals.items())))
        return "\n".join(lines)


# ---- sampling -------------------------------------------------------------------

def chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based Philox stream keyed by (master seed, chunk index)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chunk)])))


def sample_odd(G: SigmaGroup, rng: np.random.Generator, size: int | tuple = 1,
               method: str = "odd-list") -> np.ndarray:
    """Uniform draws from G^-, either from the odd list or as g sigma(g)^-1."""
    if method == "odd-list":
        odd = G.odd_elements
        return odd[rng.integers(0, odd.size, size=size)]
    if method == "twisted":
        g = rng.integers(0, G.order, size=size)
        return G.mul[g, G.inv[G.sigma[g]]].astype(np.int64)
    raise ValueError(f"unknown sampler {method!r}")


# ---- per-level classification ------------------------------------------------------

@dataclass
class _ClassInfo:
    label: str
    d: int
    m: int
    order: int
    weak_schur_ok: bool
    aut_order: int | None = None


def _full_rank_test(G: SigmaGroup):
    """Return f(rels) -> True iff the relations span G/Fr(G); then N_r = G."""
    Q, proj = quotient(G, G.frattini, check=False)
    d = generator_rank(G)

    def test(rels) -> bool:
        if len(rels) < d:
            return False
        return subgroup_generated(Q, proj[np.asarray(rels, dtype=np.int64)]).order == Q.order

    return test


class Level:
    """F_{n,depth} together with caches from relation sets to classes."""

    def __init__(self, p: int, n: int, depth: int, classifier: Classifier, size_cap: int = DEFAULT_SIZE_CAP):
        self.p, self.n, self.depth = p, n, depth
        self.G = enumerate_group(p, n, depth, size_cap) if n > 0 else trivial_group(p)
        self.classifier = classifier
        self._by_set: dict[tuple[int, ...], bytes] = {}
        self._by_n: dict[bytes, _ClassInfo] = {}
        self._masks: dict[bytes, np.ndarray] = {}
        self._full = _full_rank_test(self.G)
        full = self.G.full()
        self._full_key = full.key()
        self._masks[self._full_key] = full.mask

    def closure_key(self, rels: Iterable[int]) -> bytes:
        key = tuple(sorted(set(int(r) for r in rels) - {0}))
        nk = self._by_set.get(key)
        if nk is None and self._full(key):
            nk = self._by_set[key] = self._full_key
        if nk is None:
            N = normal_closure(self.G, key)
            nk = N.key()
            self._masks.setdefault(nk, N.mask)
            self._by_set[key] = nk
        return nk

    def add_mask(self, nk: bytes, mask: np.ndarray) -> None:
        self._masks.setdefault(nk, mask)

    def info(self, nk: bytes) -> _ClassInfo:
        inf = self._by_n.get(nk)
        if inf is None:
            N = Subgroup(self._masks[nk])
            Q, _ = quotient(self.G, N)
            lab = self.classifier.label(Q)
            d = generator_rank(Q)
            FQ, _ = quotient(Q, Q.frattini, check=False)
            inf = _ClassInfo(lab, d, relation_rank(self.G, N), Q.order, is_totally_odd(FQ))
            self._by_n[nk] = inf
        return inf

    def quotient_group(self, label: str) -> SigmaGroup:
        return self.classifier.representative(label)


@dataclass
class Prediction:
    probability: Fraction
    d: int
    m: int | None
    aut_order: int | None
    order: int


def _top_classes(level: Level, aut_cap: int) -> tuple[dict[str, Prediction], dict[str, int]]:
    """Classes with d = n at this level: formula probabilities and enumerated counts."""
    G, n, p = level.G, level.n, level.p
    if n == 0:
        lab = level.classifier.label(trivial_group(p))
        return {lab: Prediction(Fraction(1), 0, 0, 1, 1)}, {lab: 1}
    fr_odd = np.flatnonzero(G.odd_mask & G.frattini.mask)
    odd_size = int(G.odd_mask.sum())
    counts: Counter = Counter()
    for tup in itertools.product(fr_odd.tolist(), repeat=n):
        counts[level.closure_key(tup)] += 1
    by_label: Counter = Counter()
    preds: dict[str, Prediction] = {}
    for nk, c in counts.items():
        inf = level.info(nk)
        by_label[inf.label] += c
        if inf.label in preds:
            continue
        if inf.aut_order is None:
            inf.aut_order = sigma_aut_order(level.quotient_group(inf.label), aut_cap)
        cnt = mu_n_class_count(p, n, odd_size, inf.m, inf.aut_order)
        preds[inf.label] = Prediction(Fraction(cnt, odd_size ** n), n, inf.m, inf.aut_order, inf.order)
    return preds, dict(by_label)


def predict(p: int, n: int, depth: int, classifier: Classifier, aut_cap: int = DEFAULT_AUT_CAP,
            size_cap: int = DEFAULT_SIZE_CAP, levels: dict | None = None) -> tuple[dict[str, Prediction], dict]:
    """Exact class probabilities for relation n-tuples at the given depth.

    Returns (predictions, diagnostics); diagnostics records, per level m', the
    formula count and the enumerated count of every d = m' class.
    """
    levels = {} if levels is None else levels
    preds: dict[str, Prediction] = {}
    diag = {}
    for mp in range(n + 1):
        lvl = levels.get(mp)
        if lvl is None:
            lvl = levels[mp] = Level(p, mp, depth, classifier, size_cap)
        top, enumerated = _top_classes(lvl, aut_cap)
        factor = mu_n_restriction_factor(p, n, mp)
        odd_pow = int(lvl.G.odd_mask.sum()) ** mp
        fr_pow = int((lvl.G.odd_mask & lvl.G.frattini.mask).sum()) ** mp
        diag[mp] = {
            lab: {"formula_count": int(pr.probability * odd_pow), "enumerated": enumerated.get(lab, 0)}
            for lab, pr in top.items()
        }
        diag[mp]["_frattini_tuples"] = fr_pow
        for lab, pr in top.items():
            if lab in preds:
                raise AssertionError(f"class {lab} predicted at two levels")
            preds[lab] = Prediction(pr.probability * factor, pr.d, pr.m if mp == n else None,
                                    pr.aut_order, pr.order)
    total = sum((pr.probability for pr in preds.values()), Fraction(0))
    if total != 1:
        raise AssertionError(f"predicted probabilities sum to {total}, not 1")
    return preds, diag


# ---- running ---------------------------------------------------------------------

_WORKER_GROUPS: dict = {}


def _mc_chunk(args) -> list[tuple[bytes, int, bytes]]:
    p, n, depth, size_cap, seed, chunk, count, sampler = args
    key = (p, n, depth)
    G = _WORKER_GROUPS.get(key)
    if G is None:
        G = _WORKER_GROUPS[key] = enumerate_group(p, n, depth, size_cap)
    rng = chunk_rng(seed, chunk)
    draws = sample_odd(G, rng, (count, n), sampler)
    full_test = _WORKER_GROUPS.get(key + ("full",))
    if full_test is None:
        full_test = _WORKER_GROUPS[key + ("full",)] = _full_rank_test(G)
    closures: dict[tuple[int, ...], Subgroup] = {}
    tally: Counter = Counter()
    full = G.full()
    for row in draws:
        k = tuple(sorted(set(int(x) for x in row) - {0}))
        if full_test(k):
            closures.setdefault((-1,), full)
            tally[full.key()] += 1
            continue
        N = closures.get(k)
        if N is None:
            N = closures[k] = normal_closure(G, k)
        tally[N.key()] += 1
    masks = {N.key(): np.packbits(N.mask).tobytes() for N in closures.values()}
    return [(k, c, masks[k]) for k, c in sorted(tally.items())]


def _sample_counts(spec: ExperimentSpec, level: Level) -> Counter:
    nchunks = math.ceil(spec.samples / CHUNK)
    jobs = [(spec.p, spec.n, spec.depth, spec.size_cap, spec.seed, c,
             min(CHUNK, spec.samples - c * CHUNK), spec.sampler) for c in range(nchunks)]
    _WORKER_GROUPS[(spec.p, spec.n, spec.depth)] = level.G
    if spec.workers > 1 and nchunks > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as ex:
            results = list(ex.map(_mc_chunk, jobs))
    else:
        results = [_mc_chunk(j) for j in jobs]
    counts: Counter = Counter()
    for res in results:
        for nk, c, packed in res:
            counts[nk] += c
            mask = np.unpackbits(np.frombuffer(packed, dtype=np.uint8))[:level.G.order].astype(bool)
            level.add_mask(nk, mask)
    return counts


def run_experiment(spec: ExperimentSpec, classifier: Classifier | None = None,
                   levels: dict | None = None) -> FrequencyReport:
    """Classify all (or sampled) relation tuples and attach exact predictions.

    Passing the same `classifier` and `levels` dict to several runs shares
    labels and cached automorphism counts between them.
    """
    spec.validate()
    if levels is not None and classifier is None:
        raise ValueError("shared levels need a shared classifier")
    clf = classifier or Classifier()
    levels = {} if levels is None else levels
    lkey = (spec.p, spec.depth)
    per_depth = levels.setdefault(lkey, {})
    level = per_depth.get(spec.n)
    if level is None:
        level = per_depth[spec.n] = Level(spec.p, spec.n, spec.depth, clf, spec.size_cap)
    G = level.G
    odd = G.odd_elements
    if spec.mode == "exhaustive":
        total = odd.size ** spec.n
        if total > spec.tuple_cap:
            raise CapExceeded(f"{total} tuples exceed the tuple cap {spec.tuple_cap}")
        counts: Counter = Counter()
        for tup in itertools.product(odd.tolist(), repeat=spec.n):
            counts[level.closure_key(tup)] += 1
    else:
        total = spec.samples
        counts = _sample_counts(spec, level)
    observed: Counter = Counter()
    info_by_label: dict[str, _ClassInfo] = {}
    weak_schur_ok = True
    for nk, c in counts.items():
        inf = level.info(nk)
        observed[inf.label] += c
        info_by_label.setdefault(inf.label, inf)
        weak_schur_ok &= inf.weak_schur_ok
    preds, diag = predict(spec.p, spec.n, spec.depth, clf, spec.aut_cap, spec.size_cap, per_depth)
    records = []
    for lab in sorted(set(observed) | set(preds), key=lambda s: (-observed.get(s, 0), s)):
        pr = preds.get(lab)
        inf = info_by_label.get(lab)
        obs = observed.get(lab, 0)
        if pr is None:
            records.append(ClassRecord(lab, obs, inf.m, inf.d, None, None, None, None, inf.order))
            continue
        q = pr.probability
        exp = float(q * total)
        sd = math.sqrt(total * float(q) * (1 - float(q)))
        dev = (obs - exp) / sd if sd > 0 else (0.0 if obs == exp else math.inf)
        m = pr.m if pr.m is not None else (inf.m if inf is not None else None)
        records.append(ClassRecord(lab, obs, m, pr.d, pr.aut_order, q, exp, dev, pr.order))
    formula_ok = all(v["formula_count"] == v["enumerated"]
                     for lvl in diag.values() for k, v in lvl.items() if not k.startswith("_"))
    totals = {
        "tuples" if spec.mode == "exhaustive" else "samples": total,
        "observed_sum": sum(observed.values()),
        "classes_observed": len(observed),
        "classes_predicted": len(preds),
        "unpredicted_classes": sorted(set(observed) - set(preds)),
        "weak_schur_shadow": weak_schur_ok,
        "top_level_counts_match": formula_ok,
        "depth": spec.depth,
    }
    return FrequencyReport(spec, records, totals)


@dataclass
class Verdict:
    passed: bool
    failures: list[str]

    def __bool__(self) -> bool:
        return self.passed


def compare(report: FrequencyReport, tolerance_sigma: float = 4.0) -> Verdict:
    """Exact equality (exhaustive) or |obs - Nq| <= tol * sqrt(Nq(1-q)) (Monte Carlo)."""
    fails = []
    total = report.totals.get("tuples", report.totals.get("samples"))
    for c in report.classes:
        if c.probability is None:
            fails.append(f"{c.label}: no prediction available")
            continue
        if report.spec.mode == "exhaustive":
            exp = c.probability * total
            if exp.denominator != 1 or exp.numerator != c.observed:
                fails.append(f"{c.label}: observed {c.observed}, predicted {exp}")
        else:
            q = float(c.probability)
            bound = tolerance_sigma * math.sqrt(total * q * (1 - q))
            if abs(c.observed - total * q) > bound:
                fails.append(f"{c.label}: observed {c.observed}, expected {total * q:.2f} (bound {bound:.2f})")
    if report.totals.get("observed_sum") != total:
        fails.append("observed counts do not sum to the total")
    if not report.totals.get("weak_schur_shadow", True):
        fails.append("a quotient has a mod-Frattini quotient that is not totally odd")
    if not report.totals.get("top_level_counts_match", True):
        fails.append("enumerated d = n class counts differ from the count formula")
    return Verdict(not fails, fails)


def compare_samplers(a: FrequencyReport, b: FrequencyReport, tolerance_sigma: float = 4.0) -> Verdict:
    """Two-sample check per class: |f_a - f_b| <= tol * sqrt(q(1-q)(1/N_a + 1/N_b))."""
    na, nb = a.totals["samples"], b.totals["samples"]
    ca = {c.label: c for c in a.classes}
    cb = {c.label: c for c in b.classes}
    fails = []
    for lab in sorted(set(ca) | set(cb)):
        oa = ca[lab].observed if lab in ca else 0
        ob = cb[lab].observed if lab in cb else 0
        src = ca.get(lab) or cb.get(lab)
        q = float(src.probability) if src.probability is not None else (oa + ob) / (na + nb)
        sd = math.sqrt(q * (1 - q) * (1 / na + 1 / nb))
        if abs(oa / na - ob / nb) > tolerance_sigma * sd:
            fails.append(f"{lab}: {oa}/{na} vs {ob}/{nb}")
    return Verdict(not fails, fails)
