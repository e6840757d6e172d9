"""Certainty scorers behind one interface: a hedge-count linear model, a
bag-of-words ridge model (sentence regression head + one-vs-rest aspect
heads), and a client for the external neural scorer wire protocol.

Wire protocol (line-delimited JSON over a subprocess's stdio or TCP):
  request:  {"id": "<string>", "text": "<finding text>"}
  response: {"id": "<string>", "sentence_certainty": <float>,
             "aspects": {"number": ..., "extent": ..., "probability": ...,
                         "framing": ..., "condition": ..., "suggestion": ...}}
Aspect values are exactly "not_present" | "certain" | "uncertain".
"""

from __future__ import annotations

import json
import queue
import socket
import subprocess
import threading
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve

from . import __version__
from .corpus import ASPECTS, ASPECT_LABELS, DataError
from .lexicon import Lexicon, count_hedges, load_hedges, tokenize

SCALE_MIN, SCALE_MAX = 1.0, 6.0

# argmax ties go to the higher-priority label
_ASPECT_PRIORITY = {"not_present": 0, "certain": 1, "uncertain": 2}


def clamp_certainty(value: float) -> float:
    return min(max(float(value), SCALE_MIN), SCALE_MAX)


@dataclass(frozen=True)
class CertaintyScore:
    finding_id: str
    sentence_certainty: float  # in [1, 6]
    aspects: tuple[tuple[str, str], ...]
    scorer_id: str
    scorer_version: str

    def __post_init__(self):
        got = tuple(sorted(a for a, _ in self.aspects))
        if got != tuple(sorted(ASPECTS)):
            raise DataError(f"score for {self.finding_id} needs all six aspects")
        for _, label in self.aspects:
            if label not in ASPECT_LABELS:
                raise DataError(f"bad aspect label {label!r}")
        if not SCALE_MIN <= self.sentence_certainty <= SCALE_MAX:
            raise DataError("sentence_certainty must be clamped to [1, 6]")

    @property
    def aspect_map(self) -> dict:
        return dict(self.aspects)

    def to_dict(self) -> dict:
        return {
            "finding_id": self.finding_id,
            "sentence_certainty": self.sentence_certainty,
            "aspects": dict(self.aspects),
            "scorer_id": self.scorer_id,
            "scorer_version": self.scorer_version,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertaintyScore":
        return cls(
            finding_id=d["finding_id"],
            sentence_certainty=float(d["sentence_certainty"]),
            aspects=tuple(sorted(d["aspects"].items())),
            scorer_id=d.get("scorer_id", "unknown"),
            scorer_version=d.get("scorer_version", "unknown"),
        )


def _all_not_present() -> tuple:
    return tuple((a, "not_present") for a in sorted(ASPECTS))


class DegenerateFitError(ValueError):
    """The training data cannot identify the model (e.g. constant feature)."""


# -- hedge-count linear model ---------------------------------------------------

@dataclass(frozen=True)
class HedgeLinearModel:
    """certainty = intercept + slope * hedge_count, clamped to [1, 6].

    Sentence-level only; aspect slots are emitted as not_present.
    """

    slope: float
    intercept: float
    hedge_lexicon: Lexicon

    scorer_id = "hedge-linear"

    def predict(self, text: str) -> float:
        h = count_hedges(text, self.hedge_lexicon)
        return clamp_certainty(self.intercept + self.slope * h)

    def score(self, finding) -> CertaintyScore:
        return CertaintyScore(
            finding_id=finding.finding_id,
            sentence_certainty=self.predict(finding.text),
            aspects=_all_not_present(),
            scorer_id=self.scorer_id,
            scorer_version=__version__,
        )


def fit_hedge_model(train, hedge_lexicon: Lexicon | None = None) -> HedgeLinearModel:
    """Least-squares slope and intercept on the single hedge-count feature.

    `train` is a sequence of (hedge_count, gold_score) pairs.
    """
    if hedge_lexicon is None:
        hedge_lexicon = load_hedges()
    pts = [(float(h), float(y)) for h, y in train]
    if len(pts) < 2:
        raise DegenerateFitError("need at least 2 training points")
    h = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    var = float(((h - h.mean()) ** 2).sum())
    if var == 0.0:
        raise DegenerateFitError("all hedge counts are equal; slope undefined")
    slope = float(((h - h.mean()) * (y - y.mean())).sum() / var)
    intercept = float(y.mean() - slope * h.mean())
    return HedgeLinearModel(slope=slope, intercept=intercept,
                            hedge_lexicon=hedge_lexicon)


# -- bag-of-words ridge model ---------------------------------------------------

DEFAULT_VOCAB_CAPACITY = 40000
DEFAULT_RIDGE_PENALTY = 1.0


def ngrams(text: str) -> list[str]:
    """Unigrams, bigrams, trigrams over the shared tokenizer, joined by "_"."""
    toks = tokenize(text)
    out = list(toks)
    out.extend("_".join(toks[i:i + 2]) for i in range(len(toks) - 1))
    out.extend("_".join(toks[i:i + 3]) for i in range(len(toks) - 2))
    return out


def build_vocabulary(texts, capacity: int = DEFAULT_VOCAB_CAPACITY) -> dict:
    """Top-`capacity` n-grams by document frequency, ties lexicographic."""
    df: dict[str, int] = {}
    for text in texts:
        for g in set(ngrams(text)):
            df[g] = df.get(g, 0) + 1
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))[:capacity]
    return {g: i for i, (g, _) in enumerate(ranked)}


def featurize(texts, vocabulary: dict) -> sp.csr_matrix:
    """Sparse n-gram count matrix; out-of-vocabulary n-grams contribute 0."""
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    for text in texts:
        row: dict[int, float] = {}
        for g in ngrams(text):
            idx = vocabulary.get(g)
            if idx is not None:
                row[idx] = row.get(idx, 0.0) + 1.0
        for idx in sorted(row):
            indices.append(idx)
            data.append(row[idx])
        indptr.append(len(indices))
    return sp.csr_matrix((data, indices, indptr),
                         shape=(len(texts), len(vocabulary)))


def ridge_fit(X: sp.spmatrix, y, penalty: float, sample_weight=None):
    """Ridge regression with unpenalized intercept (weighted centering).

    Solves the primal normal equations when features <= samples and the
    exactly equivalent dual Gram system otherwise, both via SPD Cholesky.
    y may be (n,) for one target or (n, k) for k targets sharing one
    factorization. Returns (weights, intercept) with matching shapes.
    """
    X = sp.csr_matrix(X, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = y[:, None] if single else y
    n, p = X.shape
    if n == 0:
        raise DegenerateFitError("empty training set")
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, dtype=float)
    if w.shape != (n,) or np.any(w < 0) or w.sum() == 0:
        raise DegenerateFitError("bad sample weights")
    wsum = w.sum()
    x_mean = np.asarray(X.multiply(w[:, None]).sum(axis=0)).ravel() / wsum
    y_mean = (w @ Y) / wsum
    Yc = Y - y_mean
    sw = np.sqrt(w)

    if p <= n:
        # primal: (Xc' W Xc + penalty I) B = Xc' W Yc
        Xd = X.toarray() - x_mean
        A = (Xd * w[:, None]).T @ Xd + penalty * np.eye(p)
        B = cho_solve(cho_factor(A), (Xd * w[:, None]).T @ Yc)
    else:
        # dual: B = Xc' Ws (Ws Xc Xc' Ws + penalty I)^-1 Ws Yc,  Ws = sqrt(W)
        Xxt = (X @ X.T).toarray()
        xm = X @ x_mean
        Kc = Xxt - xm[:, None] - xm[None, :] + float(np.dot(x_mean, x_mean))
        K = Kc * np.outer(sw, sw) + penalty * np.eye(n)
        alpha = cho_solve(cho_factor(K), sw[:, None] * Yc)
        B = (X.T @ (sw[:, None] * alpha)) - np.outer(x_mean, sw @ alpha)
    intercepts = y_mean - x_mean @ B
    if single:
        return np.asarray(B[:, 0]).ravel(), float(intercepts[0])
    return np.asarray(B), np.asarray(intercepts)


@dataclass(frozen=True)
class BowModel:
    """Ridge on unigram/bigram/trigram counts: a sentence regression head plus
    one-vs-rest heads per (aspect, class)."""

    vocabulary: dict
    sentence_weights: np.ndarray
    sentence_intercept: float
    aspect_weights: dict  # aspect -> class -> (weights, intercept)
    ridge_penalty: float
    vocab_capacity: int

    scorer_id = "bow-ridge"

    def _features(self, text: str) -> sp.csr_matrix:
        return featurize([text], self.vocabulary)

    def predict(self, text: str) -> float:
        x = self._features(text)
        raw = float((x @ self.sentence_weights)[0]) + self.sentence_intercept
        return clamp_certainty(raw)

    def aspect_scores(self, text: str) -> dict:
        x = self._features(text)
        out = {}
        for aspect, heads in self.aspect_weights.items():
            out[aspect] = {
                cls: float((x @ wvec)[0]) + b for cls, (wvec, b) in heads.items()
            }
        return out

    def predict_aspects(self, text: str) -> dict:
        decided = {}
        for aspect, scores in self.aspect_scores(text).items():
            best = max(scores.items(),
                       key=lambda kv: (kv[1], _ASPECT_PRIORITY[kv[0]]))
            decided[aspect] = best[0]
        return decided

    def confidence(self, text: str) -> float:
        return abs(self.predict(text) - (SCALE_MIN + SCALE_MAX) / 2)

    def score(self, finding) -> CertaintyScore:
        return CertaintyScore(
            finding_id=finding.finding_id,
            sentence_certainty=self.predict(finding.text),
            aspects=tuple(sorted(self.predict_aspects(finding.text).items())),
            scorer_id=self.scorer_id,
            scorer_version=__version__,
        )

    def save(self, path) -> None:
        """Write the model as a zip of .npy arrays with zeroed zip timestamps,
        so identical models produce byte-identical files."""
        import io
        import zipfile

        heads = {}
        aspect_mat = []
        order = []
        for aspect in sorted(self.aspect_weights):
            for cls in sorted(self.aspect_weights[aspect]):
                wvec, b = self.aspect_weights[aspect][cls]
                order.append([aspect, cls, b])
                aspect_mat.append(np.asarray(wvec, dtype=float))
        heads["order"] = order
        vocab_items = sorted(self.vocabulary.items(), key=lambda kv: kv[1])
        arrays = {
            "meta": np.frombuffer(json.dumps({
                "ridge_penalty": self.ridge_penalty,
                "vocab_capacity": self.vocab_capacity,
                "sentence_intercept": self.sentence_intercept,
                "heads": heads,
                "version": __version__,
            }, sort_keys=True).encode("utf-8"), dtype=np.uint8),
            "vocab": np.array([g for g, _ in vocab_items], dtype=object),
            "sentence_weights": np.asarray(self.sentence_weights, dtype=float),
            "aspect_weights": (np.array(aspect_mat) if aspect_mat
                               else np.zeros((0, len(vocab_items)))),
        }
        with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as zf:
            for name in sorted(arrays):
                buf = io.BytesIO()
                np.lib.format.write_array(buf, np.asanyarray(arrays[name]),
                                          allow_pickle=True)
                info = zipfile.ZipInfo(f"{name}.npy", date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, buf.getvalue())

    @classmethod
    def load(cls, path) -> "BowModel":
        with np.load(path, allow_pickle=True) as z:
            meta = json.loads(bytes(z["meta"]).decode("utf-8"))
            vocab = {g: i for i, g in enumerate(z["vocab"].tolist())}
            sentence_weights = z["sentence_weights"]
            aspect_mat = z["aspect_weights"]
        aspect_weights: dict = {}
        for row, (aspect, label, b) in zip(aspect_mat, meta["heads"]["order"]):
            aspect_weights.setdefault(aspect, {})[label] = (row, float(b))
        return cls(
            vocabulary=vocab,
            sentence_weights=sentence_weights,
            sentence_intercept=float(meta["sentence_intercept"]),
            aspect_weights=aspect_weights,
            ridge_penalty=float(meta["ridge_penalty"]),
            vocab_capacity=int(meta["vocab_capacity"]),
        )


def fit_bow(findings, sentence_gold: dict, aspect_gold: dict | None = None,
            ridge_penalty: float = DEFAULT_RIDGE_PENALTY,
            vocab_capacity: int = DEFAULT_VOCAB_CAPACITY,
            sample_weight: dict | None = None) -> BowModel:
    """Fit the BoW model on training findings.

    The vocabulary is built from every training text; the sentence head uses
    findings with sentence gold; each (aspect, class) head is one-vs-rest
    ridge on findings with aspect gold. Deterministic given the data.
    """
    findings = list(findings)
    if not findings:
        raise DegenerateFitError("empty training set")
    texts = [f.text for f in findings]
    vocabulary = build_vocabulary(texts, vocab_capacity)
    X = featurize(texts, vocabulary)
    weights = np.array([
        1.0 if sample_weight is None else float(sample_weight.get(f.finding_id, 1.0))
        for f in findings
    ])

    sent_rows = [i for i, f in enumerate(findings) if f.finding_id in sentence_gold]
    if not sent_rows:
        raise DegenerateFitError("no sentence-level gold in the training set")
    y = np.array([sentence_gold[findings[i].finding_id] for i in sent_rows])
    sw, sb = ridge_fit(X[sent_rows], y, ridge_penalty, weights[sent_rows])

    aspect_weights: dict = {}
    if aspect_gold:
        asp_rows = [i for i, f in enumerate(findings) if f.finding_id in aspect_gold]
        if asp_rows:
            Xa = X[asp_rows]
            wa = weights[asp_rows]
            # all 18 one-vs-rest heads share one factorization
            targets = np.empty((len(asp_rows), len(ASPECTS) * len(ASPECT_LABELS)))
            col = 0
            order = []
            for aspect in ASPECTS:
                labels = [aspect_gold[findings[i].finding_id][aspect] for i in asp_rows]
                for cls in ASPECT_LABELS:
                    targets[:, col] = [1.0 if lbl == cls else -1.0 for lbl in labels]
                    order.append((aspect, cls))
                    col += 1
            W, intercepts = ridge_fit(Xa, targets, ridge_penalty, wa)
            for j, (aspect, cls) in enumerate(order):
                aspect_weights.setdefault(aspect, {})[cls] = (W[:, j],
                                                              float(intercepts[j]))

    return BowModel(
        vocabulary=vocabulary,
        sentence_weights=sw,
        sentence_intercept=sb,
        aspect_weights=aspect_weights,
        ridge_penalty=ridge_penalty,
        vocab_capacity=vocab_capacity,
    )


# -- external scorer client -----------------------------------------------------

class ScorerTransportError(RuntimeError):
    """Base class for external-scorer failures; never produces a fake score."""


class ScorerTimeoutError(ScorerTransportError):
    pass


class MalformedResponseError(ScorerTransportError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class IdMismatchError(ScorerTransportError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class ScorerClampWarning(UserWarning):
    pass


class _StdioTransport:
    def __init__(self, command):
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1)

    def send(self, line: str) -> None:
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ScorerTransportError(f"scorer process closed stdin: {exc}") from exc

    def readline(self):
        return self.proc.stdout.readline()

    def close(self):
        try:
            self.proc.stdin.close()
        except OSError:
            pass
        self.proc.terminate()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()


class _TcpTransport:
    def __init__(self, address):
        host, _, port = address.rpartition(":")
        try:
            self.sock = socket.create_connection((host or "127.0.0.1", int(port)),
                                                 timeout=30)
        except OSError as exc:
            raise ScorerTransportError(f"cannot connect to {address}: {exc}") from exc
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.writer = self.sock.makefile("w", encoding="utf-8")

    def send(self, line: str) -> None:
        try:
            self.writer.write(line + "\n")
            self.writer.flush()
        except OSError as exc:
            raise ScorerTransportError(f"socket write failed: {exc}") from exc

    def readline(self):
        return self.reader.readline()

    def close(self):
        for closer in (self.reader.close, self.writer.close, self.sock.close):
            try:
                closer()
            except OSError:
                pass


def _parse_response(line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"response is not JSON: {exc.msg}", payload=line)
    if not isinstance(obj, dict) or "id" not in obj:
        raise MalformedResponseError("response missing id", payload=line)
    if "sentence_certainty" not in obj or not isinstance(
            obj.get("aspects"), dict):
        raise MalformedResponseError(
            f"response for id {obj.get('id')!r} missing fields", payload=line)
    got = set(obj["aspects"])
    if got != set(ASPECTS):
        raise MalformedResponseError(
            f"response for id {obj['id']!r} has aspect keys {sorted(got)}",
            payload=line)
    for aspect, label in obj["aspects"].items():
        if label not in ASPECT_LABELS:
            raise MalformedResponseError(
                f"response for id {obj['id']!r} has bad label {label!r} "
                f"for {aspect}", payload=line)
    return obj


class ExternalScorer:
    """Client for the line-delimited JSON wire protocol.

    Issues up to `max_in_flight` outstanding requests, tolerates out-of-order
    responses, and reassembles results in input order. Transport failures
    raise typed errors carrying the offending payload.
    """

    scorer_id = "external"

    def __init__(self, command=None, address=None, timeout: float = 30.0,
                 max_in_flight: int = 32):
        if (command is None) == (address is None):
            raise ValueError("provide exactly one of command/address")
        self._command = command
        self._address = address
        self.timeout = timeout
        self.max_in_flight = max(1, int(max_in_flight))

    def _open(self):
        if self._command is not None:
            return _StdioTransport(self._command)
        return _TcpTransport(self._address)

    def score_findings(self, findings) -> list[CertaintyScore]:
        findings = list(findings)
        ids = [f.finding_id for f in findings]
        if len(set(ids)) != len(ids):
            raise DataError("duplicate finding ids in external scoring batch")
        if not findings:
            return []
        transport = self._open()
        lines: queue.Queue = queue.Queue()

        def reader():
            while True:
                try:
                    line = transport.readline()
                except (OSError, ValueError):
                    lines.put(None)
                    return
                if line == "" or line is None:
                    lines.put(None)
                    return
                if line.strip():
                    lines.put(line)

        thread = threading.Thread(target=reader, daemon=True)
        thread.start()
        results: dict[str, CertaintyScore] = {}
        pending: set[str] = set()
        try:
            next_to_send = 0
            while len(results) < len(findings):
                while (next_to_send < len(findings)
                       and len(pending) < self.max_in_flight):
                    f = findings[next_to_send]
                    transport.send(json.dumps(
                        {"id": f.finding_id, "text": f.text},
                        ensure_ascii=False))
                    pending.add(f.finding_id)
                    next_to_send += 1
                try:
                    line = lines.get(timeout=self.timeout)
                except queue.Empty:
                    raise ScorerTimeoutError(
                        f"no response within {self.timeout}s; "
                        f"pending ids: {sorted(pending)[:5]}")
                if line is None:
                    raise ScorerTransportError(
                        f"scorer stream closed with {len(pending)} responses pending")
                obj = _parse_response(line)
                rid = obj["id"]
                if rid not in pending:
                    raise IdMismatchError(
                        f"response id {rid!r} was not requested or already "
                        f"answered", payload=line)
                pending.discard(rid)
                raw = float(obj["sentence_certainty"])
                value = clamp_certainty(raw)
                if value != raw:
                    warnings.warn(
                        f"sentence_certainty {raw} for id {rid!r} clamped to "
                        f"{value}", ScorerClampWarning)
                results[rid] = CertaintyScore(
                    finding_id=rid,
                    sentence_certainty=value,
                    aspects=tuple(sorted(obj["aspects"].items())),
                    scorer_id=self.scorer_id,
                    scorer_version=str(obj.get("version", "unknown")),
                )
        finally:
            transport.close()
        return [results[fid] for fid in ids]


def score_external(findings, command=None, address=None, timeout: float = 30.0,
                   max_in_flight: int = 32) -> list[CertaintyScore]:
    client = ExternalScorer(command=command, address=address, timeout=timeout,
                            max_in_flight=max_in_flight)
    return client.score_findings(findings)


# -- score file io ----------------------------------------------------------------

def write_scores(path, scores, manifest: dict | None = None) -> None:
    from .corpus import write_jsonl
    write_jsonl(path, (s.to_dict() for s in scores), manifest)


def read_scores(path) -> list[CertaintyScore]:
    from pathlib import Path

    from .corpus import _iter_jsonl
    out = []
    for line_no, obj, err in _iter_jsonl(Path(path)):
        if err:
            raise DataError(f"{path}:{line_no}: {err}")
        out.append(CertaintyScore.from_dict(obj))
    return out
