"""Deterministic stub implementation of the external scorer wire protocol.

A keyword heuristic stands in for the real neural scorer so the client,
the CLI `score --external` path, and protocol conformance tests can run
without any model. Misbehavior modes let tests exercise client error paths.

Run as a module:
    python -m scicert.stub_scorer --transport stdio
    python -m scicert.stub_scorer --transport tcp --port 8765
"""

from __future__ import annotations

import argparse
import json
import socket
import sys

from .corpus import ASPECTS
from .lexicon import load_hedges, tokenize

_UNCERTAIN_CUES = {
    "unclear", "unknown", "preliminary", "tentative", "inconclusive",
    "unconfirmed", "hypothesize", "speculate",
}
_CERTAIN_CUES = {
    "demonstrate", "demonstrates", "confirmed", "confirm", "clearly",
    "definitively", "conclusive", "robust", "established",
}

_ASPECT_CUES = {
    "number": ({"percent", "percentage"}, {"approximately", "roughly", "about"}),
    "extent": ({"increase", "decrease", "reduction"}, {"moderate", "slight"}),
    "probability": ({"associated", "linked"}, {"possibly", "chance", "probably"}),
    "framing": ({"conclude", "demonstrate"}, {"hypothesize", "speculate", "suspect"}),
    "condition": ({"among", "during"}, {"if", "unless"}),
    "suggestion": ({"recommend", "recommended"}, {"needed", "should"}),
}


class StubModel:
    """Hedge-count heuristic with keyword-driven aspect labels."""

    def __init__(self):
        self.hedges = load_hedges()

    def respond(self, request: dict) -> dict:
        text = str(request.get("text", ""))
        toks = set(tokenize(text))
        h = self.hedges.count(text)
        value = 5.0 - 0.7 * h
        value -= 0.9 * len(toks & _UNCERTAIN_CUES)
        value += 0.5 * len(toks & _CERTAIN_CUES)
        value = min(max(value, 1.0), 6.0)
        aspects = {}
        for aspect, (certain_cues, uncertain_cues) in _ASPECT_CUES.items():
            if toks & uncertain_cues:
                aspects[aspect] = "uncertain"
            elif toks & certain_cues:
                aspects[aspect] = "certain"
            else:
                aspects[aspect] = "not_present"
        return {
            "id": request.get("id"),
            "sentence_certainty": value,
            "aspects": aspects,
        }


def _mangle(response: dict, mode: str, counter: int) -> dict:
    if mode == "out-of-range" and counter % 3 == 0:
        response = dict(response)
        response["sentence_certainty"] = 7.2
    elif mode == "missing-aspect" and counter % 3 == 0:
        response = dict(response)
        aspects = dict(response["aspects"])
        aspects.pop(ASPECTS[0])
        response["aspects"] = aspects
    elif mode == "wrong-id" and counter % 3 == 0:
        response = dict(response)
        response["id"] = f"bogus-{counter}"
    elif mode == "not-json" and counter % 3 == 0:
        return None  # caller writes garbage instead
    return response


def serve_stream(reader, writer, misbehave: str = "none", batch_delay: int = 0):
    """Answer protocol requests on a line stream until EOF.

    batch_delay > 0 holds back that many responses and emits them in reverse,
    exercising the client's out-of-order handling.
    """
    model = StubModel()
    counter = 0
    held = []

    def emit(obj):
        if obj is None:
            writer.write("this is not json\n")
        else:
            writer.write(json.dumps(obj, ensure_ascii=False) + "\n")

    for line in reader:
        line = line.strip()
        if not line:
            continue
        counter += 1
        try:
            request = json.loads(line)
            if not isinstance(request, dict) or "id" not in request:
                raise ValueError("request must be an object with an id")
        except ValueError as exc:
            emit({"error": f"bad request: {exc}"})
            writer.flush()
            continue
        response = _mangle(model.respond(request), misbehave, counter)
        if batch_delay > 0:
            held.append(response)
            if len(held) >= batch_delay:
                for r in reversed(held):
                    emit(r)
                held.clear()
            writer.flush()
            continue
        emit(response)
        writer.flush()
    for r in reversed(held):
        emit(r)
    writer.flush()


def serve_tcp(port: int, misbehave: str = "none", batch_delay: int = 0,
              max_connections: int = 1):
    server = socket.create_server(("127.0.0.1", port))
    try:
        for _ in range(max_connections):
            conn, _addr = server.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8")
                writer = conn.makefile("w", encoding="utf-8")
                serve_stream(reader, writer, misbehave, batch_delay)
                writer.close()
    finally:
        server.close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--misbehave", default="none",
                        choices=("none", "out-of-range", "missing-aspect",
                                 "wrong-id", "not-json"))
    parser.add_argument("--batch-delay", type=int, default=0)
    args = parser.parse_args(argv)
    if args.transport == "stdio":
        serve_stream(sys.stdin, sys.stdout, args.misbehave, args.batch_delay)
    else:
        serve_tcp(args.port, args.misbehave, args.batch_delay)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
