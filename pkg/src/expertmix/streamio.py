"""Stream files and run logs.

Stream file (plain text, whitespace separated, one row per line)::

    stream <version> <N> <D> <T>
    p <D numbers>        } N prediction rows
    o <D numbers>        } 1 outcome row       -- repeated T times

Numbers are written with ``repr``, the shortest decimal that parses back
to the same float64.

Run log: JSON Lines, one ``{"type": "round", ...}`` object per round
followed by a single ``{"type": "report", ...}`` line.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .aggregator import RoundRecord
from .diagnostics import RegretReport
from .errors import StreamParseError
from .scenarios import Stream

MAGIC = "stream"
VERSION = 1


def _row(tag: str, values) -> str:
    return " ".join([tag] + [repr(float(x)) for x in values])


def write_stream(path, stream: Stream) -> None:
    lines = [f"{MAGIC} {VERSION} {stream.num_experts} {stream.dimension} {len(stream)}"]
    for preds, outcome in stream:
        lines.extend(_row("p", p) for p in preds)
        lines.append(_row("o", outcome))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_numbers(tokens, dim, lineno):
    if len(tokens) != dim:
        raise StreamParseError(f"expected {dim} numbers, found {len(tokens)}", lineno)
    try:
        vals = [float(x) for x in tokens]
    except ValueError as exc:
        raise StreamParseError(str(exc), lineno) from None
    if not all(math.isfinite(v) for v in vals):
        raise StreamParseError("non-finite value", lineno)
    return vals


def read_stream(path) -> Stream:
    with open(path) as fh:
        lines = [(i, ln.split()) for i, ln in enumerate(fh, start=1)]
    lines = [(i, tok) for i, tok in lines if tok]
    if not lines:
        raise StreamParseError("empty file", 1)
    lineno, head = lines[0]
    if len(head) != 5 or head[0] != MAGIC:
        raise StreamParseError("header must be 'stream <version> <N> <D> <T>'", lineno)
    try:
        version, N, D, T = (int(x) for x in head[1:])
    except ValueError:
        raise StreamParseError("header counts must be integers", lineno) from None
    if version != VERSION:
        raise StreamParseError(f"unsupported stream version {version}", lineno)
    if N < 1 or D < 1 or T < 0:
        raise StreamParseError("header needs N >= 1, D >= 1, T >= 0", lineno)

    P = np.empty((T, N, D))
    O = np.empty((T, D))
    pos = 1
    for t in range(T):
        n = 0
        while pos < len(lines) and lines[pos][1][0] == "p":
            lineno, tok = lines[pos]
            if n == N:
                raise StreamParseError(f"round {t + 1} has more than {N} prediction rows", lineno)
            P[t, n] = _parse_numbers(tok[1:], D, lineno)
            n += 1
            pos += 1
        if pos >= len(lines):
            raise StreamParseError(f"round {t + 1} is incomplete: file ends early", lines[-1][0])
        lineno, tok = lines[pos]
        if tok[0] != "o":
            raise StreamParseError(f"round {t + 1}: unexpected row tag {tok[0]!r}", lineno)
        if n != N:
            raise StreamParseError(f"round {t + 1} has {n} prediction rows, expected {N}", lineno)
        O[t] = _parse_numbers(tok[1:], D, lineno)
        pos += 1
    if pos != len(lines):
        raise StreamParseError(f"trailing content after {T} rounds", lines[pos][0])
    return Stream(P, O)


def dump_run_log(path, records: Sequence[RoundRecord], report: RegretReport) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), allow_nan=False) + "\n")
        fh.write(json.dumps(report.to_dict(), allow_nan=False) + "\n")


def load_run_log(path):
    """Return ``(records, stored_report)``; a missing or partial report line is an error."""
    records = []
    report = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if report is not None:
                raise StreamParseError("content after the report line", lineno)
            try:
                obj = json.loads(line)
                kind = obj["type"]
                if kind == "round":
                    records.append(RoundRecord.from_dict(obj))
                elif kind == "report":
                    report = RegretReport.from_dict(obj)
                else:
                    raise StreamParseError(f"unknown line type {kind!r}", lineno)
            except StreamParseError:
                raise
            except (ValueError, KeyError, TypeError) as exc:
                raise StreamParseError(f"unreadable log line ({exc})", lineno) from None
    if report is None:
        raise StreamParseError("log has no report line (truncated?)")
    if report.rounds != len(records):
        raise StreamParseError(f"report covers {report.rounds} rounds but log holds {len(records)}")
    return records, report
