"""Splits, hedge-stratified sampling, and evaluation/agreement metrics:
Pearson r, binary F1, Krippendorff's alpha.

All randomness is driven by explicit seeds and splits are persisted as id
lists (split.json) so every evaluation is replayable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import ASPECTS, DataError
from .lexicon import Lexicon, count_hedges, load_hedges

DEFAULT_PROPORTIONS = (0.5, 0.35, 0.15)  # no hedges / one hedge / 2+ hedges
ASPECT_EVAL_CLASSES = ("certain", "uncertain")


class ZeroVarianceError(ValueError):
    """Pearson r is undefined: one of the inputs has no variance."""


class StratumError(ValueError):
    """A sampling stratum has too few members."""


class AgreementError(ValueError):
    """No pairable values for Krippendorff's alpha."""


# -- splits --------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    random_test: tuple[str, ...] = ()

    def __post_init__(self):
        sets = [set(self.train), set(self.val), set(self.test)]
        total = sum(len(s) for s in sets)
        if len(set().union(*sets)) != total:
            raise DataError("train/val/test must be disjoint")

    @property
    def full_test(self) -> tuple[str, ...]:
        """Evaluation set: frozen test partition plus the random sample."""
        return self.test + tuple(i for i in self.random_test if i not in self.test)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "train": list(self.train),
            "val": list(self.val),
            "test": list(self.test),
            "random_test": list(self.random_test),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SplitSpec":
        return cls(
            seed=int(d["seed"]),
            train=tuple(d["train"]),
            val=tuple(d["val"]),
            test=tuple(d["test"]),
            random_test=tuple(d.get("random_test", ())),
        )

    def save(self, path, manifest: dict | None = None) -> None:
        payload = self.to_dict()
        if manifest is not None:
            payload["_manifest"] = manifest
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "SplitSpec":
        return cls.from_dict(json.loads(Path(path).read_text("utf-8")))


def make_split(ids, seed: int, random_test=()) -> SplitSpec:
    """Deterministic 8:1:1 split (each partition within one item of n/10)."""
    ids = list(ids)
    if len(ids) != len(set(ids)):
        raise DataError("split ids must be unique")
    rng = random.Random(seed)
    rng.shuffle(ids)
    n = len(ids)
    n_val = round(n / 10)
    n_test = round(n / 10)
    val = tuple(ids[:n_val])
    test = tuple(ids[n_val:n_val + n_test])
    train = tuple(ids[n_val + n_test:])
    return SplitSpec(seed=seed, train=train, val=val, test=test,
                     random_test=tuple(random_test))


# -- stratified sampling ---------------------------------------------------------

@dataclass(frozen=True)
class StratifiedSample:
    findings: tuple
    stratum_counts: tuple[int, int, int]  # (no hedges, one hedge, 2+ hedges)


def stratum_sizes(n: int, proportions=DEFAULT_PROPORTIONS) -> list[int]:
    """round(n*p) per stratum, adjusted to sum to n by nudging the stratum
    whose count is farthest above (or below) its exact target."""
    targets = [n * p for p in proportions]
    counts = [round(t) for t in targets]
    while sum(counts) > n:
        errs = [c - t for c, t in zip(counts, targets)]
        counts[errs.index(max(errs))] -= 1
    while sum(counts) < n:
        errs = [c - t for c, t in zip(counts, targets)]
        counts[errs.index(min(errs))] += 1
    return counts


def stratified_hedge_sample(findings, n: int, proportions=DEFAULT_PROPORTIONS,
                            seed: int = 0,
                            hedge_lexicon: Lexicon | None = None) -> StratifiedSample:
    """Sample n findings with fixed proportions of 0 / 1 / 2+ hedge strata,
    uniformly without replacement within each stratum."""
    if hedge_lexicon is None:
        hedge_lexicon = load_hedges()
    strata = {0: [], 1: [], 2: []}
    for f in findings:
        h = count_hedges(f.text, hedge_lexicon)
        strata[min(h, 2)].append(f)
    counts = stratum_sizes(n, proportions)
    names = ("no-hedge", "one-hedge", "2+-hedge")
    for key, want in zip((0, 1, 2), counts):
        if len(strata[key]) < want:
            raise StratumError(
                f"{names[key]} stratum has {len(strata[key])} findings, "
                f"need {want}")
    rng = random.Random(seed)
    sampled = []
    for key, want in zip((0, 1, 2), counts):
        sampled.extend(rng.sample(strata[key], want))
    return StratifiedSample(findings=tuple(sampled),
                            stratum_counts=tuple(counts))


# -- metrics ---------------------------------------------------------------------

def pearson_r(xs, ys) -> float:
    """Sample Pearson correlation; raises ZeroVarianceError instead of NaN."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError("pearson_r needs two equal-length vectors")
    if x.size < 2:
        raise DataError("pearson_r needs at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(np.dot(xc, xc)))
    sy = float(np.sqrt(np.dot(yc, yc)))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVarianceError("zero variance input to pearson_r")
    return float(np.dot(xc, yc) / (sx * sy))


def binary_f1(gold, pred, positive_class) -> float:
    """F1 of the one-vs-rest reduction for positive_class (0 when undefined)."""
    if len(gold) != len(pred):
        raise DataError("label lists must have the same length")
    tp = sum(1 for g, p in zip(gold, pred) if g == positive_class and p == positive_class)
    fp = sum(1 for g, p in zip(gold, pred) if g != positive_class and p == positive_class)
    fn = sum(1 for g, p in zip(gold, pred) if g == positive_class and p != positive_class)
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def krippendorff_alpha(items: dict, metric: str = "interval") -> float:
    """Krippendorff's alpha over `items`: item id -> list of ratings.

    alpha = 1 - D_o/D_e computed from the coincidence matrix; items with a
    single rating are unpairable and ignored (missing-data handling). metric
    is "interval" (squared difference, Likert) or "nominal" (mismatch,
    aspect labels).
    """
    if metric not in ("interval", "nominal"):
        raise DataError(f"unknown metric {metric!r}")
    units = {k: list(v) for k, v in items.items() if len(v) >= 2}
    n = sum(len(v) for v in units.values())
    if n == 0:
        raise AgreementError("no pairable values")

    values = sorted({v for ratings in units.values() for v in ratings}, key=str)
    index = {v: i for i, v in enumerate(values)}
    k = len(values)
    coincidence = np.zeros((k, k))
    for ratings in units.values():
        m = len(ratings)
        for i, a in enumerate(ratings):
            for j, b in enumerate(ratings):
                if i != j:
                    coincidence[index[a], index[b]] += 1.0 / (m - 1)

    if metric == "interval":
        vals = np.array([float(v) for v in values])
        delta = (vals[:, None] - vals[None, :]) ** 2
    else:
        delta = 1.0 - np.eye(k)

    n_c = coincidence.sum(axis=1)
    d_o = float((coincidence * delta).sum()) / n
    d_e = float((np.outer(n_c, n_c) * delta).sum()) / (n * (n - 1))
    if d_e == 0.0:
        return 1.0  # no expected disagreement: annotators are unanimous
    return 1.0 - d_o / d_e


def alpha_from_annotations(records, task: str) -> float:
    """Agreement for one annotation task over AnnotationRecords.

    task="sentence" -> interval alpha over likert ratings; task=<aspect name>
    -> nominal alpha over that aspect's labels.
    """
    items: dict[str, list] = {}
    if task == "sentence":
        for r in records:
            if r.kind == "sentence_level":
                items.setdefault(r.finding_id, []).append(float(r.likert))
        return krippendorff_alpha(items, metric="interval")
    if task not in ASPECTS:
        raise DataError(f"unknown agreement task {task!r}")
    for r in records:
        if r.kind == "aspect_level":
            items.setdefault(r.finding_id, []).append(r.aspect_map[task])
    return krippendorff_alpha(items, metric="nominal")


# -- model evaluation --------------------------------------------------------------

@dataclass(frozen=True)
class SentenceEval:
    r_full_test: float
    r_random_set: float
    n_full_test: int
    n_random_set: int


def _paired(model, findings_by_id, gold, ids):
    xs, ys = [], []
    for fid in ids:
        finding = findings_by_id.get(fid)
        value = gold.get(fid)
        if finding is None or value is None:
            continue
        xs.append(model.score(finding).sentence_certainty)
        ys.append(value)
    return xs, ys


def evaluate_sentence(model, split: SplitSpec, findings, gold: dict) -> SentenceEval:
    """Pearson r of model predictions against gold on the full test set
    (test + random) and on the random set alone."""
    findings_by_id = {f.finding_id: f for f in findings}
    full_pred, full_gold = _paired(model, findings_by_id, gold, split.full_test)
    rand_pred, rand_gold = _paired(model, findings_by_id, gold, split.random_test)
    return SentenceEval(
        r_full_test=pearson_r(full_pred, full_gold),
        r_random_set=pearson_r(rand_pred, rand_gold),
        n_full_test=len(full_pred),
        n_random_set=len(rand_pred),
    )


@dataclass(frozen=True)
class AspectEval:
    cells: tuple[tuple[str, str, float], ...]  # (aspect, class, f1)
    mean_f1: float

    def cell(self, aspect: str, cls: str) -> float:
        for a, c, f in self.cells:
            if a == aspect and c == cls:
                return f
        raise KeyError((aspect, cls))


def evaluate_aspects(model, split: SplitSpec, findings, gold_aspects: dict,
                     ids=None) -> AspectEval:
    """Binary F1 per (aspect, certain/uncertain) cell on the full test set;
    mean is the unweighted average over the 12 reported cells."""
    findings_by_id = {f.finding_id: f for f in findings}
    use_ids = [fid for fid in (ids if ids is not None else split.full_test)
               if fid in findings_by_id and fid in gold_aspects]
    gold_rows = [gold_aspects[fid] for fid in use_ids]
    pred_rows = [model.score(findings_by_id[fid]).aspect_map for fid in use_ids]
    cells = []
    for aspect in ASPECTS:
        g = [row[aspect] for row in gold_rows]
        p = [row[aspect] for row in pred_rows]
        for cls in ASPECT_EVAL_CLASSES:
            cells.append((aspect, cls, binary_f1(g, p, cls)))
    mean = sum(f for _, _, f in cells) / len(cells) if cells else 0.0
    return AspectEval(cells=tuple(cells), mean_f1=mean)


def rank_for_annotation(model, findings) -> list:
    """Rank findings for a phase-2-style relabeling pass: ascending model
    confidence (prediction distance from the scale midpoint), ties by id.
    Provided as a ranking utility only; no automated resampling loop."""
    scored = []
    for f in findings:
        pred = model.score(f).sentence_certainty
        scored.append((abs(pred - 3.5), f.finding_id, f))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [f for _, _, f in scored]
