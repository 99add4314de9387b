"""Command line front end: ``semiflow {classify,probe,report,demo-suite}``.

Exit codes: 0 ok, 1 implication violation or probe disagreement, 2 input
error, 3 probe requested on a spectrum without a finite truncation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import jsonschema

from . import __version__
from .classifier import DEFAULT_BETAS, full_report
from .corpus import corpus
from .report import (
    FORMAT_VERSION,
    build_report,
    curves_to_csv,
    render_text,
    summary_rows,
    to_json,
    validate_report,
)
from .spectrum import SpecError, SpectrumSpec, parse_spectrum_spec
from .verifier import ProbeConfig, cross_validate

EXIT_OK, EXIT_INCONSISTENT, EXIT_INPUT, EXIT_CAPABILITY = 0, 1, 2, 3
DEFAULT_SEED = 0


def default_seed() -> int:
    raw = os.environ.get("SEMIFLOW_SEED")
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"semiflow: SEMIFLOW_SEED must be an integer, got {raw!r}") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of reals, got {text!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


@dataclass
class RunManifest:
    inputs: List[Path]
    command: str
    config: ProbeConfig
    betas: tuple = DEFAULT_BETAS
    out: Optional[Path] = None
    fmt: str = "json"
    version: str = FORMAT_VERSION
    jobs: int = 1


@dataclass
class Outcome:
    code: int = EXIT_OK
    messages: List[str] = field(default_factory=list)
    text: str = ""


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_spec(path: Path) -> SpectrumSpec:
    if not path.is_file():
        raise FileNotFoundError(f"{path}: file not found")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: invalid JSON: {exc}") from None
    if isinstance(doc, dict) and "label" not in doc:
        doc = {**doc, "label": path.stem}
    try:
        return parse_spectrum_spec(doc)
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


def _emit(m: RunManifest, stem: str, doc: dict, csv_text: Optional[str]) -> str:
    body = to_json(doc) if m.fmt == "json" else render_text(doc)
    if m.out is not None:
        atomic_write(m.out / f"{stem}.report.{'json' if m.fmt == 'json' else 'txt'}", body)
        if csv_text is not None:
            atomic_write(m.out / f"{stem}.curves.csv", csv_text)
    return body


def _run_one(m: RunManifest, spec: SpectrumSpec, stem: str, source: Optional[str], probe: bool) -> Outcome:
    out = Outcome()
    report = full_report(spec, m.betas, strict=False)
    probes = []
    if probe:
        if spec.regions or spec.is_empty:
            out.code = EXIT_CAPABILITY
            out.messages.append(f"{stem}: probes require point spectra")
            return out
        probes = [cross_validate(spec, report, m.config)]
    doc = build_report(spec, report, seed=m.config.seed, probes=probes,
                       config=m.config if probe else None, source=source)
    validate_report(doc)
    out.text = _emit(m, stem, doc, curves_to_csv(probes) if probe else None)
    if report.failures:
        out.code = EXIT_INCONSISTENT
        out.messages.append(f"{stem}: implication violated: " + ", ".join(c.name for c in report.failures))
    if doc["summary"]["disagreements"]:
        out.code = EXIT_INCONSISTENT
        out.messages.append(f"{stem}: classifier/probe disagreement: " + ", ".join(doc["summary"]["disagreements"]))
    if report.indeterminate_count:
        out.messages.append(f"{stem}: warning: {report.indeterminate_count} indeterminate verdict(s)")
    return out


def _combine(outcomes: Sequence[Outcome]) -> int:
    codes = {o.code for o in outcomes}
    for code in (EXIT_INPUT, EXIT_CAPABILITY, EXIT_INCONSISTENT):
        if code in codes:
            return code
    return EXIT_OK


def _finish(outcomes: Sequence[Outcome], to_stdout: bool) -> int:
    for o in outcomes:
        if to_stdout and o.text:
            sys.stdout.write(o.text)
        for msg in o.messages:
            print(msg, file=sys.stderr)
    return _combine(outcomes)


def run_specs(m: RunManifest, probe: bool) -> int:
    def task(path: Path) -> Outcome:
        try:
            spec = load_spec(path)
        except (FileNotFoundError, SpecError) as exc:
            return Outcome(EXIT_INPUT, [str(exc)])
        return _run_one(m, spec, path.stem, str(path), probe)

    with ThreadPoolExecutor(max_workers=max(1, m.jobs)) as pool:
        outcomes = list(pool.map(task, m.inputs))
    return _finish(outcomes, m.out is None)


def format_table(rows: List[List[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)


def run_report(m: RunManifest) -> int:
    docs, errors = [], []
    for path in m.inputs:
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            validate_report(doc)
            docs.append(doc)
        except FileNotFoundError:
            errors.append(f"{path}: file not found")
        except (json.JSONDecodeError, jsonschema.ValidationError) as exc:
            errors.append(f"{path}: not a valid report: {getattr(exc, 'message', exc)}")
    for e in errors:
        print(e, file=sys.stderr)
    if errors:
        return EXIT_INPUT
    rows = summary_rows(docs)
    text = format_table(rows) if m.fmt == "text" else json.dumps({"rows": rows}, indent=2, sort_keys=True) + "\n"
    if m.out is not None:
        atomic_write(m.out / f"summary.{'txt' if m.fmt == 'text' else 'json'}", text)
    else:
        sys.stdout.write(text)
    bad = any(d["summary"]["inconsistencies"] or d["summary"]["disagreements"] for d in docs)
    return EXIT_INCONSISTENT if bad else EXIT_OK


def run_demo_suite(m: RunManifest) -> int:
    outcomes, docs = [], []
    for name, spec in corpus().items():
        probe = spec.is_point_spectrum and not spec.is_empty
        o = _run_one(m, spec, name, None, probe)
        outcomes.append(o)
        if m.fmt == "json":
            docs.append(json.loads(o.text))
    table = format_table(summary_rows(docs)) if docs else ""
    if m.out is not None and table:
        atomic_write(m.out / "summary.txt", table)
    for o in outcomes:
        for msg in o.messages:
            print(msg, file=sys.stderr)
    if m.out is None:
        sys.stdout.write(table if m.fmt == "json" else "".join(o.text for o in outcomes))
    return _combine(outcomes)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semiflow", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--beta", type=_float_list, help="Gevrey orders, e.g. 1,2")
    common.add_argument("--N", type=_int_list, help="truncation sizes, increasing")
    common.add_argument("--t-max", type=float, help="horizon for the growth-bound estimate")
    common.add_argument("--h", type=_float_list, help="step sizes, decreasing")
    common.add_argument("--tol", type=float, help="absolute probe tolerance")
    common.add_argument("--seed", type=int, help="RNG seed (default: $SEMIFLOW_SEED or 0)")
    common.add_argument("--kappa", type=float, help="condition number of twisted realizations")
    common.add_argument("--out", type=Path, help="output directory (default: stdout)")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--jobs", type=int, default=1, help="inputs processed concurrently")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("classify", "classify spectrum files"),
                        ("probe", "classify and cross-validate on truncations"),
                        ("report", "merge report files into a summary table")):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("inputs", nargs="+", type=Path)
    sub.add_parser("demo-suite", parents=[common], help="run the built-in corpus")
    return p


def manifest_from_args(args: argparse.Namespace) -> RunManifest:
    base = ProbeConfig()
    config = ProbeConfig(
        t_grid=base.t_grid,
        h_schedule=tuple(args.h) if args.h else base.h_schedule,
        N_schedule=tuple(args.N) if args.N else base.N_schedule,
        tolerance=args.tol if args.tol is not None else base.tolerance,
        seed=args.seed if args.seed is not None else default_seed(),
        t_max=args.t_max if args.t_max is not None else base.t_max,
        kappa=args.kappa if args.kappa is not None else base.kappa,
    )
    betas = tuple(args.beta) if args.beta else DEFAULT_BETAS
    if any(b < 1 for b in betas):
        raise ValueError("Gevrey orders must be >= 1")
    return RunManifest(inputs=list(getattr(args, "inputs", [])), command=args.command, config=config,
                       betas=betas, out=args.out, fmt=args.format, jobs=args.jobs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        m = manifest_from_args(args)
    except ValueError as exc:
        print(f"semiflow: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if m.command == "classify":
        return run_specs(m, probe=False)
    if m.command == "probe":
        return run_specs(m, probe=True)
    if m.command == "report":
        return run_report(m)
    return run_demo_suite(m)


if __name__ == "__main__":
    sys.exit(main())
