"""Deterministic JSON, CSV and JSON-lines artifacts."""
from __future__ import annotations

import csv
import io
import json
import math
import sys

import numpy as np

from .correlation import ParsevalReport
from .errors import ArtifactIOError, ContractViolation
from .projection import ProjectedKernel, SpectrumReport
from .sampler import LiftReport, LiftSamples

FORMATS = ("json", "csv")
PARSEVAL_COLUMNS = ["m", "level", "rank", "lhs", "rhs", "gap", "tail_bound"]


def fmt_number(x) -> str:
    """17 significant digits, '.' separator; integers stay integers."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".17g")
    return str(x)


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def to_json(report) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"


def _table(report) -> tuple[list, list]:
    if isinstance(report, ParsevalReport):
        report = [report]
    if isinstance(report, list) and report and all(isinstance(r, ParsevalReport) for r in report):
        return PARSEVAL_COLUMNS, [[getattr(r, c) for c in PARSEVAL_COLUMNS] for r in report]
    if isinstance(report, ProjectedKernel):
        return report.csv_rows()
    if isinstance(report, SpectrumReport):
        rows = [[k, float(a), float(b)] for k, (a, b) in enumerate(zip(report.projected, report.nystrom))]
        return ["k", "projected", "nystrom"], rows
    if isinstance(report, LiftReport):
        header = ["cells", "empirical", "stderr", "analytic", "truncated", "tail_bound", "tolerance", "passed"]
        rows = []
        for c in report.checks:
            d = c.to_dict()
            cells = " ".join(f"[{fmt_number(lo)},{fmt_number(hi)})" for lo, hi in c.cells)
            rows.append([cells] + [d[h] for h in header[1:]])
        return header, rows
    d = _plain(report)
    if isinstance(d, dict):
        return ["key", "value"], [[k, json.dumps(v, sort_keys=True)] for k, v in sorted(d.items())]
    raise ContractViolation(f"no CSV layout for {type(report).__name__}")


def to_csv(report) -> str:
    header, rows = _table(report)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_number(v) for v in row])
    return buf.getvalue()


def render(report, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(report)
    if fmt == "csv":
        return to_csv(report)
    raise ContractViolation(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")


def write_text(text: str, path) -> None:
    """Write to ``path``; '-' or None means stdout."""
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ArtifactIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_report(report, fmt: str = "json", path=None) -> str:
    text = render(report, fmt)
    write_text(text, path)
    return text


def sample_lines(samples: LiftSamples):
    """One JSON object per sample: label multiset, marks and cell counts."""
    labels = [b.label() for b in samples.proj.indices]
    for s in range(samples.n):
        a, b = samples.offsets[s], samples.offsets[s + 1]
        rec = {
            "counts": [int(v) for v in samples.cell_counts[s]],
            "indices": [labels[p] for p in samples.point_labels[a:b]],
            "points": [float(x) for x in samples.points[a:b]],
        }
        yield json.dumps(rec, sort_keys=True)


def emit_samples(samples: LiftSamples, path=None) -> str:
    text = "".join(line + "\n" for line in sample_lines(samples))
    write_text(text, path)
    return text
