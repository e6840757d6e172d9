"""Statistical layer: Flesch readability, OLS with one-hot fixed effects and
averaged marginal effects, the five research-question regressions, and the
descriptive hedge/aspect analyses.

Regression outputs are tidy: one CSV row per term (term, coef, se, t, p,
ci_lo, ci_hi) and one margins CSV row per (variable, level).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import linalg as sla
from scipy import stats as sstats

from .corpus import ASPECTS, DataError
from .evalkit import pearson_r
from .extraction import split_sentences
from .lexicon import Lexicon, count_hedges, count_syllables, load_hedges, tokenize

Z95 = 1.96  # normal-approximation 95% interval half-width multiplier


class RankDeficiencyError(ValueError):
    """The design matrix is rank deficient; carries the collinear columns."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


# -- readability -----------------------------------------------------------------

def flesch_reading_ease(text: str) -> float:
    """206.835 - 1.015*(words/sentences) - 84.6*(syllables/words).

    Words are tokenizer tokens, sentences come from the shared splitter, and
    syllables use the vowel-run heuristic.
    """
    words = tokenize(text)
    sentences = split_sentences(text)
    if not words or not sentences:
        raise DataError("flesch_reading_ease needs at least one word")
    syllables = sum(count_syllables(w) for w in words)
    n_words = len(words)
    n_sents = len(sentences)
    return 206.835 - 1.015 * (n_words / n_sents) - 84.6 * (syllables / n_words)


# -- design matrices ---------------------------------------------------------------

@dataclass(frozen=True)
class Design:
    """Dense design matrix with an intercept column plus metadata needed to
    rebuild counterfactual rows for marginal effects."""

    matrix: np.ndarray
    columns: tuple[str, ...]
    continuous: tuple[str, ...]
    categorical: dict  # name -> (levels tuple incl. reference, reference level)
    rows: tuple  # the raw row dicts that survived filtering
    n_dropped: int


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return False


def build_design(rows, continuous, categorical, reference_overrides=None) -> Design:
    """One-hot encode categoricals (reference level = most frequent, ties
    lexicographic; overridable per variable for focal-term reporting) and
    assemble [intercept | continuous | dummies].

    Rows missing any used variable are dropped and counted.
    """
    used = list(continuous) + list(categorical)
    kept = [r for r in rows if not any(_is_missing(r.get(v)) for v in used)]
    n_dropped = len(rows) - len(kept)
    if not kept:
        raise DataError("no usable rows after dropping missing values")
    reference_overrides = reference_overrides or {}

    cat_meta = {}
    for name in categorical:
        counts: dict[str, int] = {}
        for r in kept:
            lvl = str(r[name])
            counts[lvl] = counts.get(lvl, 0) + 1
        levels = tuple(sorted(counts))
        if len(levels) < 2:
            raise DataError(f"categorical {name!r} has a single observed level")
        if name in reference_overrides:
            reference = str(reference_overrides[name])
            if reference not in counts:
                raise DataError(
                    f"reference level {reference!r} not observed for {name!r}")
        else:
            # reference = most frequent level, ties to the lexicographically first
            best = max(counts.values())
            reference = sorted(l for l in levels if counts[l] == best)[0]
        cat_meta[name] = (levels, reference)

    columns = ["intercept"] + list(continuous)
    for name in categorical:
        levels, reference = cat_meta[name]
        columns.extend(f"{name}={lvl}" for lvl in levels if lvl != reference)

    X = np.zeros((len(kept), len(columns)))
    X[:, 0] = 1.0
    for j, name in enumerate(continuous, start=1):
        X[:, j] = [float(r[name]) for r in kept]
    col = 1 + len(continuous)
    for name in categorical:
        levels, reference = cat_meta[name]
        for lvl in levels:
            if lvl == reference:
                continue
            X[:, col] = [1.0 if str(r[name]) == lvl else 0.0 for r in kept]
            col += 1
    return Design(matrix=X, columns=tuple(columns),
                  continuous=tuple(continuous), categorical=cat_meta,
                  rows=tuple(kept), n_dropped=n_dropped)


# -- OLS ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TermStat:
    term: str
    coef: float
    se: float
    t: float
    p: float
    ci_lo: float
    ci_hi: float


@dataclass(frozen=True)
class RegressionResult:
    name: str
    terms: tuple[TermStat, ...]
    n_obs: int
    n_dropped: int
    r_squared: float
    df_resid: int
    robust: bool
    design: Design = field(repr=False)
    beta: np.ndarray = field(repr=False)
    cov: np.ndarray = field(repr=False)

    def coef(self, term: str) -> TermStat:
        for t in self.terms:
            if t.term == term:
                return t
        raise KeyError(term)


def ols_fit(design: Design, y, name: str = "ols", robust: bool = False) -> RegressionResult:
    """OLS via QR with pivoting; rank deficiency raises RankDeficiencyError
    naming the collinear columns. Classical SEs by default, HC1 with
    robust=True. CIs are coef +- 1.96*SE."""
    X = design.matrix
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if y.shape != (n,):
        raise DataError("y length must match design rows")
    if n <= k:
        raise DataError(f"{name}: need more observations ({n}) than parameters ({k})")

    _, R, piv = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag.max() * max(n, k) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    if rank < k:
        bad = [design.columns[j] for j in piv[rank:]]
        raise RankDeficiencyError(
            f"{name}: design is rank deficient; collinear columns: {bad}",
            columns=bad)

    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    rss = float(resid @ resid)
    df_resid = n - k
    xtx_inv = np.linalg.inv(X.T @ X)
    if robust:
        meat = (X * (resid ** 2)[:, None]).T @ X
        cov = xtx_inv @ meat @ xtx_inv * (n / df_resid)
    else:
        sigma2 = rss / df_resid
        cov = xtx_inv * sigma2
    se = np.sqrt(np.diag(cov))
    tvals = np.divide(beta, se, out=np.zeros_like(beta), where=se > 0)
    pvals = 2.0 * sstats.t.sf(np.abs(tvals), df_resid)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 0.0

    terms = tuple(
        TermStat(term=c, coef=float(b), se=float(s), t=float(tv), p=float(pv),
                 ci_lo=float(b - Z95 * s), ci_hi=float(b + Z95 * s))
        for c, b, s, tv, pv in zip(design.columns, beta, se, tvals, pvals)
    )
    return RegressionResult(name=name, terms=terms, n_obs=n,
                            n_dropped=design.n_dropped, r_squared=r2,
                            df_resid=df_resid, robust=robust, design=design,
                            beta=beta, cov=cov)


@dataclass(frozen=True)
class MarginRow:
    variable: str
    level: str | None
    margin: float
    ci_lo: float
    ci_hi: float
    n: int


def _counterfactual_matrix(design: Design, variable: str, level: str) -> np.ndarray:
    levels, reference = design.categorical[variable]
    X = design.matrix.copy()
    for lvl in levels:
        if lvl == reference:
            continue
        j = design.columns.index(f"{variable}={lvl}")
        X[:, j] = 1.0 if lvl == level else 0.0
    return X


def marginal_effects(result: RegressionResult, variable: str) -> list[MarginRow]:
    """Averaged marginal effects.

    Categorical: the sample-average prediction with `variable` set to each
    level in turn, CI by the delta method on the linear predictor.
    Continuous: the slope (its coefficient) with its own CI.
    """
    design = result.design
    if variable in design.categorical:
        rows = []
        levels, _ = design.categorical[variable]
        for level in levels:
            Xcf = _counterfactual_matrix(design, variable, level)
            c = Xcf.mean(axis=0)
            margin = float(c @ result.beta)
            se = float(np.sqrt(c @ result.cov @ c))
            n_level = sum(1 for r in design.rows if str(r[variable]) == level)
            rows.append(MarginRow(variable=variable, level=level, margin=margin,
                                  ci_lo=margin - Z95 * se, ci_hi=margin + Z95 * se,
                                  n=n_level))
        return rows
    if variable in design.continuous:
        stat = result.coef(variable)
        return [MarginRow(variable=variable, level=None, margin=stat.coef,
                          ci_lo=stat.ci_lo, ci_hi=stat.ci_hi, n=result.n_obs)]
    raise DataError(f"variable {variable!r} is not in the fitted design")


# -- research-question regressions ---------------------------------------------------

@dataclass(frozen=True)
class RegressionSpecDef:
    name: str
    dependent: str
    predictors: tuple  # (name, "continuous" | "categorical")
    fixed_effects: tuple[str, ...]
    sample_filter: str


BASE_CONTROLS = (
    ("author_rank", "continuous"),
    ("affiliation_rank", "continuous"),
    ("journal_impact", "continuous"),
    ("length", "continuous"),
    ("flesch", "continuous"),
)

REGRESSION_SPECS = {
    "rq1": RegressionSpecDef(
        name="rq1", dependent="certainty",
        predictors=(("source", "categorical"),) + BASE_CONTROLS,
        fixed_effects=("field",),
        sample_filter="findings in matched news-abstract pairs"),
    "rq2": RegressionSpecDef(
        name="rq2", dependent="aspect certainty (two binary encodings per aspect)",
        predictors=(("source", "categorical"),) + BASE_CONTROLS,
        fixed_effects=("field",),
        sample_filter="findings in matched news-abstract pairs"),
    "rq3": RegressionSpecDef(
        name="rq3", dependent="news finding certainty",
        predictors=tuple((f"abs_{a}", "categorical") for a in ASPECTS)
        + (("abs_certainty", "continuous"),) + BASE_CONTROLS,
        fixed_effects=("field", "outlet"),
        sample_filter="matched pairs with scores on both sides"),
    "rq4": RegressionSpecDef(
        name="rq4", dependent="certainty",
        predictors=(("journal_impact", "continuous"),
                    ("num_authors", "continuous"),
                    ("author_rank", "continuous"),
                    ("affiliation_rank", "continuous"),
                    ("length", "continuous"), ("flesch", "continuous")),
        fixed_effects=("field",),
        sample_filter="all scored findings, abstract- and news-side fits"),
    "rq5": RegressionSpecDef(
        name="rq5", dependent="certainty",
        predictors=(("num_authors", "continuous"),
                    ("journal_impact", "continuous"),
                    ("author_rank", "continuous"),
                    ("affiliation_rank", "continuous"),
                    ("length", "continuous"), ("flesch", "continuous")),
        fixed_effects=("field",),
        sample_filter="all scored findings, abstract- and news-side fits"),
}


@dataclass(frozen=True)
class RQInputs:
    findings_by_id: dict
    scores_by_id: dict  # finding_id -> CertaintyScore
    papers_by_doi: dict
    articles_by_id: dict
    pairs: tuple = ()


@dataclass(frozen=True)
class RQReport:
    results: tuple[RegressionResult, ...]
    margins: tuple  # (result_name, tuple[MarginRow, ...])
    dropped_missing_metadata: int


def _finding_row(finding, inputs: RQInputs, hedge_lexicon=None) -> dict | None:
    score = inputs.scores_by_id.get(finding.finding_id)
    paper = inputs.papers_by_doi.get(finding.origin_doi)
    if score is None or paper is None:
        return None
    row = {
        "finding_id": finding.finding_id,
        "certainty": score.sentence_certainty,
        "source": finding.source,
        "field": paper.field,
        "author_rank": paper.author_rank,
        "affiliation_rank": paper.affiliation_rank,
        "journal_impact": paper.journal_impact_factor,
        "num_authors": paper.num_authors,
        "length": len(tokenize(finding.text)),
        "flesch": flesch_reading_ease(finding.text),
    }
    for aspect in ASPECTS:
        row[f"aspect_{aspect}"] = score.aspect_map[aspect]
    if finding.source == "news" and finding.origin_article_id is not None:
        article = inputs.articles_by_id.get(finding.origin_article_id)
        row["outlet"] = article.outlet if article else None
    return row


def _paired_rows(inputs: RQInputs):
    """One row per distinct finding appearing in a matched pair."""
    rows = []
    dropped = 0
    seen = set()
    for pair in inputs.pairs:
        for fid in (pair.news_finding_id, pair.abstract_finding_id):
            if fid in seen:
                continue
            seen.add(fid)
            finding = inputs.findings_by_id.get(fid)
            row = _finding_row(finding, inputs) if finding else None
            if row is None:
                dropped += 1
                continue
            rows.append(row)
    return rows, dropped


def quantile_buckets(values, n_buckets: int = 5, prefix: str = "q") -> list[str]:
    """Label each value with its quantile bucket (q1 = lowest)."""
    arr = np.asarray(values, dtype=float)
    edges = np.quantile(arr, np.linspace(0, 1, n_buckets + 1)[1:-1])
    labels = []
    for v in arr:
        bucket = int(np.searchsorted(edges, v, side="right")) + 1
        labels.append(f"{prefix}{bucket}")
    return labels


def run_rq(spec_name: str, inputs: RQInputs, robust: bool = False) -> RQReport:
    """Fit the documented design(s) for one research question.

    rq1: certainty ~ source + controls over matched-pair findings.
    rq2: per aspect, two linear-probability models (certain-vs-rest and
         uncertain-vs-rest) on the same design.
    rq3: news certainty ~ abstract aspect labels + abstract certainty +
         controls + outlet fixed effects, one row per matched pair.
    rq4/rq5: certainty ~ journal impact + team size + controls over all
         scored abstract findings and news findings (separate fits); rq4 adds
         a quantile-bucketed journal-impact variant and reports margins for
         the impact factor, rq5 reports margins for the author count.
    """
    if spec_name not in REGRESSION_SPECS:
        raise DataError(f"unknown regression spec {spec_name!r}")
    results: list[RegressionResult] = []
    margins: list = []
    dropped = 0

    if spec_name in ("rq1", "rq2"):
        rows, dropped = _paired_rows(inputs)
        continuous = [n for n, _ in BASE_CONTROLS]
        # the abstract side is the baseline so the reported focal term is the
        # news effect, matching how the source contrast is framed
        refs = {"source": "abstract"}
        if spec_name == "rq1":
            design = build_design(rows, continuous, ["source", "field"],
                                  reference_overrides=refs)
            y = [r["certainty"] for r in design.rows]
            result = ols_fit(design, y, name="rq1", robust=robust)
            results.append(result)
            margins.append(("rq1", tuple(marginal_effects(result, "source"))))
        else:
            for aspect in ASPECTS:
                design = build_design(rows, continuous, ["source", "field"],
                                      reference_overrides=refs)
                for cls in ("certain", "uncertain"):
                    y = [1.0 if r[f"aspect_{aspect}"] == cls else 0.0
                         for r in design.rows]
                    if len(set(y)) < 2:
                        continue  # class absent in the sample: cell omitted
                    name = f"rq2:{aspect}:{cls}"
                    result = ols_fit(design, y, name=name, robust=robust)
                    results.append(result)
                    margins.append((name, tuple(marginal_effects(result, "source"))))

    elif spec_name == "rq3":
        rows = []
        for pair in inputs.pairs:
            news = inputs.findings_by_id.get(pair.news_finding_id)
            abstract = inputs.findings_by_id.get(pair.abstract_finding_id)
            news_row = _finding_row(news, inputs) if news else None
            abs_score = inputs.scores_by_id.get(pair.abstract_finding_id)
            if news_row is None or abs_score is None:
                dropped += 1
                continue
            row = dict(news_row)
            row["abs_certainty"] = abs_score.sentence_certainty
            for aspect in ASPECTS:
                row[f"abs_{aspect}"] = abs_score.aspect_map[aspect]
            rows.append(row)
        continuous = ["abs_certainty"] + [n for n, _ in BASE_CONTROLS]
        categorical = []
        for aspect in ASPECTS:
            observed = {r[f"abs_{aspect}"] for r in rows}
            if len(observed) >= 2:
                categorical.append(f"abs_{aspect}")
        design = build_design(rows, continuous, categorical + ["field", "outlet"])
        y = [r["certainty"] for r in design.rows]
        result = ols_fit(design, y, name="rq3", robust=robust)
        results.append(result)
        for var in categorical:
            margins.append((f"rq3:{var}", tuple(marginal_effects(result, var))))

    elif spec_name in ("rq4", "rq5"):
        focus = "journal_impact" if spec_name == "rq4" else "num_authors"
        for source in ("abstract", "news"):
            rows = []
            for finding in inputs.findings_by_id.values():
                if finding.source != source:
                    continue
                row = _finding_row(finding, inputs)
                if row is None:
                    dropped += 1
                    continue
                rows.append(row)
            if not rows:
                continue
            continuous = ["journal_impact", "num_authors", "author_rank",
                          "affiliation_rank", "length", "flesch"]
            categorical = ["field"] + (["outlet"] if source == "news" else [])
            name = f"{spec_name}:{source}"
            design = build_design(rows, continuous, categorical)
            y = [r["certainty"] for r in design.rows]
            result = ols_fit(design, y, name=name, robust=robust)
            results.append(result)
            margins.append((f"{name}:{focus}",
                            tuple(marginal_effects(result, focus))))
            if spec_name == "rq4":
                # bucketed variant for the marginal-effect plot
                buckets = quantile_buckets([r["journal_impact"] for r in rows])
                brows = [dict(r, if_bucket=b) for r, b in zip(rows, buckets)]
                bname = f"{name}:if-buckets"
                try:
                    bdesign = build_design(
                        brows,
                        ["num_authors", "author_rank", "affiliation_rank",
                         "length", "flesch"],
                        ["if_bucket"] + categorical)
                    by = [r["certainty"] for r in bdesign.rows]
                    bresult = ols_fit(bdesign, by, name=bname, robust=robust)
                    results.append(bresult)
                    margins.append((bname,
                                    tuple(marginal_effects(bresult, "if_bucket"))))
                except (DataError, RankDeficiencyError):
                    pass  # degenerate impact-factor distribution: skip variant

    return RQReport(results=tuple(results), margins=tuple(margins),
                    dropped_missing_metadata=dropped)


# -- descriptive analyses (Fig 2 / Fig 3 style) ----------------------------------------

@dataclass(frozen=True)
class HedgeCurvePoint:
    hedge_count: int
    n: int
    mean_certainty: float


@dataclass(frozen=True)
class HedgeCurve:
    points: tuple[HedgeCurvePoint, ...]
    pearson_r: float
    n: int


def hedge_certainty_curve(findings, gold_sentence: dict,
                          hedge_lexicon: Lexicon | None = None) -> HedgeCurve:
    """Mean gold certainty per hedge count plus the Pearson r over the raw
    (hedge count, gold) points."""
    if hedge_lexicon is None:
        hedge_lexicon = load_hedges()
    hs, ys = [], []
    for f in findings:
        gold = gold_sentence.get(f.finding_id)
        if gold is None:
            continue
        hs.append(count_hedges(f.text, hedge_lexicon))
        ys.append(gold)
    if not hs:
        raise DataError("no annotated findings for the hedge curve")
    groups: dict[int, list[float]] = {}
    for h, y in zip(hs, ys):
        groups.setdefault(h, []).append(y)
    points = tuple(
        HedgeCurvePoint(hedge_count=h, n=len(v), mean_certainty=sum(v) / len(v))
        for h, v in sorted(groups.items())
    )
    return HedgeCurve(points=points, pearson_r=pearson_r(hs, ys), n=len(hs))


@dataclass(frozen=True)
class AssociationCell:
    aspect: str
    label: str
    n: int
    mean_certainty: float
    ci_lo: float
    ci_hi: float
    relative: float  # versus the subset mean


@dataclass(frozen=True)
class AspectAssociation:
    cells: tuple[AssociationCell, ...]
    omitted: tuple[tuple[str, str], ...]  # (aspect, label) groups with no members
    subset_mean: float
    n: int


def aspect_sentence_association(gold_sentence: dict, gold_aspects: dict
                                ) -> AspectAssociation:
    """Mean sentence certainty conditioned on each aspect being labeled
    certain vs uncertain, over findings labeled at both levels."""
    ids = [fid for fid in gold_sentence if fid in gold_aspects]
    if not ids:
        raise DataError("no findings labeled at both levels")
    overall = [gold_sentence[fid] for fid in ids]
    subset_mean = sum(overall) / len(overall)
    cells = []
    omitted = []
    for aspect in ASPECTS:
        for label in ("certain", "uncertain"):
            values = [gold_sentence[fid] for fid in ids
                      if gold_aspects[fid][aspect] == label]
            if not values:
                omitted.append((aspect, label))
                continue
            mean = sum(values) / len(values)
            if len(values) > 1:
                sd = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
                half = Z95 * sd / math.sqrt(len(values))
            else:
                half = float("nan")
            cells.append(AssociationCell(
                aspect=aspect, label=label, n=len(values), mean_certainty=mean,
                ci_lo=mean - half, ci_hi=mean + half,
                relative=mean - subset_mean))
    return AspectAssociation(cells=tuple(cells), omitted=tuple(omitted),
                             subset_mean=subset_mean, n=len(ids))


# -- tidy output -----------------------------------------------------------------------

def _write_csv(path, header, rows, manifest: dict | None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if manifest is not None:
            fh.write("# manifest: "
                     + json.dumps(manifest, ensure_ascii=False, sort_keys=True)
                     + "\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_regression_csv(result: RegressionResult, path, manifest=None) -> None:
    _write_csv(path, ["term", "coef", "se", "t", "p", "ci_lo", "ci_hi"],
               [[t.term, f"{t.coef:.10g}", f"{t.se:.10g}", f"{t.t:.10g}",
                 f"{t.p:.10g}", f"{t.ci_lo:.10g}", f"{t.ci_hi:.10g}"]
                for t in result.terms],
               manifest)


def write_margins_csv(margin_rows, path, manifest=None) -> None:
    _write_csv(path, ["variable", "level", "margin", "ci_lo", "ci_hi", "n"],
               [[m.variable, "" if m.level is None else m.level,
                 f"{m.margin:.10g}", f"{m.ci_lo:.10g}", f"{m.ci_hi:.10g}", m.n]
                for m in margin_rows],
               manifest)


def write_hedge_curve_csv(curve: HedgeCurve, path, manifest=None) -> None:
    rows = [[p.hedge_count, p.n, f"{p.mean_certainty:.10g}"] for p in curve.points]
    rows.append(["pearson_r", curve.n, f"{curve.pearson_r:.10g}"])
    _write_csv(path, ["hedge_count", "n", "mean_certainty"], rows, manifest)


def write_association_csv(assoc: AspectAssociation, path, manifest=None) -> None:
    rows = [[c.aspect, c.label, c.n, f"{c.mean_certainty:.10g}",
             f"{c.ci_lo:.10g}", f"{c.ci_hi:.10g}", f"{c.relative:.10g}"]
            for c in assoc.cells]
    for aspect, label in assoc.omitted:
        rows.append([aspect, label, 0, "", "", "", ""])
    _write_csv(path, ["aspect", "label", "n", "mean_certainty", "ci_lo",
                      "ci_hi", "relative"], rows, manifest)


def write_svg_bars(path, title: str, labels, values, manifest: dict | None = None,
                   width: int = 640, height: int = 320) -> None:
    """Minimal static SVG bar chart (no plotting dependency)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = [float(v) for v in values]
    lo = min(0.0, min(values)) if values else 0.0
    hi = max(0.0, max(values)) if values else 1.0
    span = (hi - lo) or 1.0
    margin, plot_h = 40, height - 80
    bar_w = (width - 2 * margin) / max(len(values), 1)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}">']
    if manifest is not None:
        blob = json.dumps(manifest, ensure_ascii=False, sort_keys=True)
        parts.append(f"<!-- manifest: {blob} -->")
    parts.append(f'<text x="{width / 2}" y="20" text-anchor="middle" '
                 f'font-size="14">{title}</text>')
    zero_y = margin + plot_h * (hi / span)
    for i, (label, v) in enumerate(zip(labels, values)):
        x = margin + i * bar_w
        h = abs(v) / span * plot_h
        y = zero_y - h if v >= 0 else zero_y
        parts.append(f'<rect x="{x + 2:.1f}" y="{y:.1f}" '
                     f'width="{bar_w - 4:.1f}" height="{h:.1f}" fill="#4878b0"/>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{height - 22}" '
                     f'text-anchor="middle" font-size="10">{label}</text>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
