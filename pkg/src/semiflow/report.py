"""Versioned report documents: assembly, JSON/text rendering, CSV curves, schema check."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from functools import lru_cache
from importlib import resources
from typing import Any, Dict, Iterable, List, Optional, Sequence

import jsonschema
import numpy as np

from . import __version__
from .classifier import RegularityReport
from .spectrum import SpectrumSpec, serialize_spectrum_spec
from .verifier import ProbeConfig, ProbeResult

FORMAT = "semiflow-report"
FORMAT_VERSION = "1.0"


def jsonable(obj: Any) -> Any:
    """Plain JSON values; non-finite floats become ``"inf"``, ``"-inf"``, ``"nan"``."""
    if isinstance(obj, enum.Enum):
        return jsonable(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_doc"):
        return jsonable(obj.to_doc())
    return str(obj)


def build_report(spec: SpectrumSpec, report: RegularityReport, *, seed: int,
                 probes: Sequence[ProbeResult] = (), config: Optional[ProbeConfig] = None,
                 source: Optional[str] = None) -> Dict[str, Any]:
    verdicts = [v.to_dict() for v in report.verdicts.values()]
    disagreements = sorted(
        f"{p.name}:{k}" for p in probes for k, a in p.verdict_agreement.items() if a.status == "fail")
    doc = {
        "format": FORMAT,
        "version": FORMAT_VERSION,
        "tool_version": __version__,
        "label": spec.label,
        "source": source,
        "spec_echo": serialize_spectrum_spec(spec),
        "verdicts": verdicts,
        "witnesses": {v.key: v.witness for v in report.verdicts.values()},
        "consistency": [c.to_dict() for c in report.consistency],
        "probes": [p.to_dict() for p in probes],
        "environment": {
            "seed": seed,
            "betas": list(report.betas),
            "schedules": config.to_dict() if config is not None else None,
        },
        "summary": {
            "indeterminate_count": report.indeterminate_count,
            "inconsistencies": [c.name for c in report.failures],
            "disagreements": disagreements,
        },
    }
    return jsonable(doc)


def to_json(doc: Dict[str, Any]) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


@lru_cache(maxsize=None)
def report_schema(version: str = FORMAT_VERSION) -> Dict[str, Any]:
    text = resources.files("semiflow").joinpath("schemas", f"report-{version}.json").read_text()
    return json.loads(text)


def validate_report(doc: Dict[str, Any]) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``doc`` matches its declared version."""
    version = doc.get("version", FORMAT_VERSION) if isinstance(doc, dict) else FORMAT_VERSION
    try:
        schema = report_schema(version)
    except FileNotFoundError:
        raise jsonschema.ValidationError(f"unknown report version {version!r}") from None
    jsonschema.validate(doc, schema)


def _fmt_answer(v: Dict[str, Any], witness: Dict[str, Any]) -> str:
    keys = ("omega", "a", "b", "t0", "radius", "reason")
    bits = [f"{k}={witness[k]}" for k in keys if k in witness and not isinstance(witness[k], (dict, list))]
    return f"{v['answer']:<13} {'; '.join(bits)}"


def render_text(doc: Dict[str, Any]) -> str:
    out = io.StringIO()
    out.write(f"{doc['format']} {doc['version']}  label={doc['label']!s}\n")
    out.write("verdicts:\n")
    for v in doc["verdicts"]:
        out.write(f"  {v['key']:<32} {_fmt_answer(v, doc['witnesses'].get(v['key'], {}))}\n")
    out.write("consistency:\n")
    for c in doc["consistency"]:
        out.write(f"  [{c['status']}] {c['name']}\n")
    for p in doc["probes"]:
        out.write(f"probe {p['name']}:\n")
        for k, a in sorted(p["verdict_agreement"].items()):
            out.write(f"  {k:<32} {a['status']:<8} {a['detail']}\n")
    s = doc["summary"]
    out.write(f"indeterminate={s['indeterminate_count']} inconsistencies={len(s['inconsistencies'])} "
              f"disagreements={len(s['disagreements'])}\n")
    return out.getvalue()


CSV_HEADER = ("series", "t_or_h_or_N", "value")


def curves_to_csv(probes: Iterable[ProbeResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for p in probes:
        for series, x, y in p.csv_rows():
            w.writerow((f"{p.name}.{series}", repr(float(x)), repr(float(y))))
    return buf.getvalue()


def summary_rows(docs: Sequence[Dict[str, Any]]) -> List[List[str]]:
    """One row per report, one column per verdict key (union over reports)."""
    keys: List[str] = []
    for d in docs:
        for v in d["verdicts"]:
            if v["key"] not in keys:
                keys.append(v["key"])
    rows = [["label", *keys, "inconsistencies", "disagreements"]]
    for d in docs:
        answers = {v["key"]: v["answer"] for v in d["verdicts"]}
        rows.append([str(d["label"]), *(answers.get(k, "-") for k in keys),
                     str(len(d["summary"]["inconsistencies"])), str(len(d["summary"]["disagreements"]))])
    return rows
