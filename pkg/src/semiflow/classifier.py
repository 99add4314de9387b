"""Decision procedures for the regularity classes of the generated semigroup.

Each classifier answers yes / no / indeterminate with a witness: the
parameters (omega, a, b, t0) that satisfy the defining spectral inclusion for a
yes, or the concrete obstruction for a no.  :func:`full_report` runs them all
and checks the implication chain between the classes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from .spectrum import (
    INFINITE,
    LOG_BOUNDARY,
    Answer,
    Boundary,
    HalfPlane,
    SpectrumSpec,
    feasible_slope,
    is_bounded,
    region_offset,
    spectral_bound,
    superlevel_bounded,
)

DEFAULT_BETAS = (1.0, 1.5, 2.0, 3.0)
SLOPE_SAMPLES = (0.5, 1.0, 2.0, 4.0, 8.0)


class Kind(str, enum.Enum):
    GENERATES = "Generates"
    IMMEDIATE_NORM_CONTINUOUS = "ImmediateNormContinuous"
    EVENTUALLY_DIFFERENTIABLE = "EventuallyDifferentiable"
    IMMEDIATELY_DIFFERENTIABLE = "ImmediatelyDifferentiable"
    GEVREY_ROUMIEU = "GevreyRoumieu"
    GEVREY_BEURLING = "GevreyBeurling"
    ANALYTIC = "Analytic"
    IMMEDIATELY_COMPACT_SEMIGROUP = "ImmediatelyCompactSemigroup"
    COMPACT_OPERATOR = "CompactOperator"


class InconsistencyError(RuntimeError):
    """Verdicts violate an implication that must hold between regularity classes."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class RegularityVerdict:
    kind: Kind
    answer: Answer
    witness: Dict[str, Any] = field(default_factory=dict)
    beta: Optional[float] = None

    @property
    def key(self) -> str:
        if self.beta is None:
            return self.kind.value
        return f"{self.kind.value}({self.beta:g})"

    @property
    def yes(self) -> bool:
        return self.answer is Answer.YES

    @property
    def no(self) -> bool:
        return self.answer is Answer.NO

    def to_dict(self) -> Dict[str, Any]:
        out = {"kind": self.kind.value, "key": self.key, "answer": self.answer.value}
        if self.beta is not None:
            out["beta"] = self.beta
        return out


@dataclass(frozen=True)
class ConsistencyCheck:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""

    def to_dict(self):
        return {"name": self.name, "status": self.status, "detail": self.detail}


@dataclass(frozen=True)
class RegularityReport:
    verdicts: Dict[str, RegularityVerdict]
    consistency: List[ConsistencyCheck]
    betas: tuple = DEFAULT_BETAS

    def __getitem__(self, key: str) -> RegularityVerdict:
        return self.verdicts[key]

    @property
    def indeterminate_count(self) -> int:
        return sum(v.answer is Answer.INDETERMINATE for v in self.verdicts.values())

    @property
    def failures(self) -> List[ConsistencyCheck]:
        return [c for c in self.consistency if c.status == "fail"]


def _verdict(kind, yes, witness, beta=None) -> RegularityVerdict:
    return RegularityVerdict(kind, Answer.YES if yes else Answer.NO, witness, beta)


# ---------------------------------------------------------------------------
# Generation and norm continuity
# ---------------------------------------------------------------------------

def classify_generation(spec: SpectrumSpec) -> RegularityVerdict:
    s = spectral_bound(spec)
    if spec.is_empty:
        return _verdict(Kind.GENERATES, True, {"omega": 0.0, "spectral_bound": s, "note": "empty spectrum"})
    if s < math.inf:
        return _verdict(Kind.GENERATES, True, {"omega": s, "spectral_bound": s})
    return _verdict(Kind.GENERATES, False, {"spectral_bound": s, "reason": "Re is unbounded above on the spectrum"})


def classify_immediate_norm_continuity(spec: SpectrumSpec) -> RegularityVerdict:
    kind = Kind.IMMEDIATE_NORM_CONTINUOUS
    gen = classify_generation(spec)
    if not gen.yes:
        return _verdict(kind, False, {"reason": "does not generate a C0-semigroup"})

    witness_b = None
    reason = ""
    for j, tail in enumerate(spec.tails):
        lim = tail.re.limit()
        if lim == -math.inf or math.isfinite(tail.im.abs_limit()):
            continue
        witness_b, reason = lim - 1.0, f"tails[{j}]: Re -> {lim:g} while |Im| -> oo"
        break
    if witness_b is None:
        for k, r in enumerate(spec.region_members()):
            if isinstance(r, HalfPlane):
                witness_b, reason = r.omega - 1.0, f"region[{k}]: half-plane strip of unbounded height"
                break
    if witness_b is None:
        return _verdict(kind, True, {"omega": gen.witness["omega"], "reason": "every superlevel set is bounded"})
    check = superlevel_bounded(spec, witness_b)
    if not check.no:
        raise InconsistencyError(f"norm-continuity witness b={witness_b} is not a counterexample")
    return _verdict(kind, False, {"b": witness_b, "reason": reason, "superlevel": check.witness})


# ---------------------------------------------------------------------------
# Differentiability and Gevrey classes
# ---------------------------------------------------------------------------

def _offsets(spec, boundary, slopes=SLOPE_SAMPLES):
    return {f"{b:g}": region_offset(spec, boundary, b)[0] for b in slopes}


def classify_differentiability(spec: SpectrumSpec, mode: str = "eventual") -> RegularityVerdict:
    """``mode='eventual'``: some log region ``Re <= min(omega, a - b ln|Im|)`` contains
    the spectrum, with onset ``t0 = 1/b`` for the largest feasible ``b``.
    ``mode='immediate'``: every slope ``b > 0`` is feasible.
    """
    if mode not in ("eventual", "immediate"):
        raise ValueError(f"mode must be 'eventual' or 'immediate', got {mode!r}")
    kind = Kind.EVENTUALLY_DIFFERENTIABLE if mode == "eventual" else Kind.IMMEDIATELY_DIFFERENTIABLE
    gen = classify_generation(spec)
    if not gen.yes:
        return _verdict(kind, False, {"reason": "does not generate a C0-semigroup"})
    omega = gen.witness["omega"]
    bmax, closed, why = feasible_slope(spec, LOG_BOUNDARY)

    if mode == "immediate":
        if bmax == math.inf:
            return _verdict(kind, True, {"omega": omega, "a_of_b": _offsets(spec, LOG_BOUNDARY)})
        bad = 2.0 * bmax if bmax > 0 else 1.0
        return _verdict(kind, False, {"b": bad, "max_feasible_slope": bmax, "reason": why})

    if bmax <= 0:
        return _verdict(kind, False, {"max_feasible_slope": 0.0, "reason": why})
    if bmax == math.inf:
        return _verdict(kind, True, {
            "omega": omega, "b": math.inf, "t0": 0.0, "attained": True,
            "a_of_b": _offsets(spec, LOG_BOUNDARY),
        })
    b = bmax if closed else 0.5 * bmax
    a, _ = region_offset(spec, LOG_BOUNDARY, b)
    return _verdict(kind, True, {
        "omega": omega, "a": a, "b": b, "t0": 1.0 / b,
        "max_feasible_slope": bmax, "attained": closed, "reason": why,
    })


def classify_gevrey(spec: SpectrumSpec, beta: float, mode: str = "roumieu") -> RegularityVerdict:
    """Power-region inclusion ``Re <= a - b|Im|^(1/beta)``: for some ``b`` (Roumieu)
    or for every ``b`` (Beurling)."""
    if mode not in ("roumieu", "beurling"):
        raise ValueError(f"mode must be 'roumieu' or 'beurling', got {mode!r}")
    if mode == "roumieu" and not beta >= 1:
        raise ValueError(f"Roumieu Gevrey order must satisfy beta >= 1, got {beta}")
    if mode == "beurling" and not beta > 1:
        raise ValueError(f"Beurling Gevrey order must satisfy beta > 1, got {beta}")
    beta = float(beta)
    kind = Kind.GEVREY_ROUMIEU if mode == "roumieu" else Kind.GEVREY_BEURLING
    boundary = Boundary(beta)
    bmax, closed, why = feasible_slope(spec, boundary)

    if mode == "beurling":
        if bmax == math.inf:
            return _verdict(kind, True, {"a_of_b": _offsets(spec, boundary)}, beta)
        bad = 2.0 * bmax if bmax > 0 else 1.0
        return _verdict(kind, False, {"b": bad, "max_feasible_slope": bmax, "reason": why}, beta)

    if bmax <= 0:
        return _verdict(kind, False, {"max_feasible_slope": 0.0, "reason": why}, beta)
    if bmax == math.inf:
        b = 1.0
    else:
        b = bmax if closed else 0.5 * bmax
    a, _ = region_offset(spec, boundary, b)
    return _verdict(kind, True, {"a": a, "b": b, "max_feasible_slope": bmax, "reason": why}, beta)


def classify_analytic(spec: SpectrumSpec) -> RegularityVerdict:
    v = classify_gevrey(spec, 1.0, "roumieu")
    return RegularityVerdict(Kind.ANALYTIC, v.answer, v.witness)


# ---------------------------------------------------------------------------
# Compactness
# ---------------------------------------------------------------------------

def _finite_mults(spec, nonzero_only=False):
    for z, m in spec.finite_points:
        if m == INFINITE and not (nonzero_only and z == 0):
            return False
    return all(t.mult != INFINITE for t in spec.tails)


def classify_compactness(spec: SpectrumSpec, target: str = "semigroup") -> RegularityVerdict:
    """``target='semigroup'``: immediately compact semigroup; ``'operator'``: compact ``A``."""
    if target == "semigroup":
        conditions = {
            "pure_point": spec.is_point_spectrum,
            "finite_multiplicities": _finite_mults(spec),
            "countably_infinite": any(not t.degenerate for t in spec.tails),
            "no_finite_limit_points": all(t.modulus_limit() == math.inf for t in spec.tails),
            "re_to_minus_infinity": all(t.re.limit() == -math.inf for t in spec.tails),
        }
        ok = all(conditions.values())
        witness = {"conditions": conditions}
        if not ok:
            witness["failed"] = [k for k, v in conditions.items() if not v]
            if is_bounded(spec):
                witness["note"] = "bounded generator cannot generate a compact semigroup in infinite dimensions"
        return _verdict(Kind.IMMEDIATELY_COMPACT_SEMIGROUP, ok, witness)

    if target != "operator":
        raise ValueError(f"target must be 'operator' or 'semigroup', got {target!r}")
    kind = Kind.COMPACT_OPERATOR
    if spec.is_empty:
        return _verdict(kind, False, {"reason": "empty spectrum belongs to an unbounded operator"})
    zero_only = (
        spec.is_point_spectrum
        and all(z == 0 for z, _ in spec.finite_points)
        and all(t.re.is_zero and t.im.is_zero for t in spec.tails)
    )
    if zero_only:
        return _verdict(kind, True, {"note": "zero operator: compact, excluded from the A != 0 characterization"})
    conditions = {
        "pure_point": spec.is_point_spectrum,
        "nonzero_finite_multiplicities": _finite_mults(spec, nonzero_only=True),
        "tails_converge_to_zero": all(t.modulus_limit() == 0.0 for t in spec.tails),
        # infinite-dimensional space: 0 belongs to the spectrum of a compact operator
        "contains_zero": any(z == 0 for z, _ in spec.finite_points) or bool(spec.tails),
    }
    ok = all(conditions.values())
    witness = {"conditions": conditions}
    if not ok:
        witness["failed"] = [k for k, v in conditions.items() if not v]
    return _verdict(kind, ok, witness)


# ---------------------------------------------------------------------------
# Full report
# ---------------------------------------------------------------------------

def _implies(name, a: RegularityVerdict, b: RegularityVerdict) -> ConsistencyCheck:
    if a.answer is Answer.INDETERMINATE or b.answer is Answer.INDETERMINATE:
        return ConsistencyCheck(name, "skipped", "indeterminate premise or conclusion")
    if a.yes and not b.yes:
        return ConsistencyCheck(name, "fail", f"{a.key}=yes but {b.key}={b.answer.value}")
    return ConsistencyCheck(name, "pass")


def consistency_checks(verdicts: Dict[str, RegularityVerdict], spec: SpectrumSpec, betas) -> List[ConsistencyCheck]:
    v = verdicts
    out = []
    an = v[Kind.ANALYTIC.value]
    for beta in betas:
        out.append(_implies(f"Analytic => GevreyRoumieu({beta:g})", an, v[f"GevreyRoumieu({beta:g})"]))
    if 1.0 in betas:
        r1 = v["GevreyRoumieu(1)"]
        out.append(_implies("GevreyRoumieu(1) => Analytic", r1, an))
    for beta in betas:
        rb = v[f"GevreyRoumieu({beta:g})"]
        if beta > 1:
            out.append(_implies(f"GevreyBeurling({beta:g}) => GevreyRoumieu({beta:g})", v[f"GevreyBeurling({beta:g})"], rb))
        for beta2 in betas:
            if beta2 > beta and beta2 > 1:
                out.append(_implies(
                    f"GevreyRoumieu({beta:g}) => GevreyBeurling({beta2:g})", rb, v[f"GevreyBeurling({beta2:g})"]))
        out.append(_implies(f"GevreyRoumieu({beta:g}) => ImmediatelyDifferentiable", rb,
                            v[Kind.IMMEDIATELY_DIFFERENTIABLE.value]))
    chain = [
        Kind.IMMEDIATELY_DIFFERENTIABLE, Kind.EVENTUALLY_DIFFERENTIABLE,
        Kind.IMMEDIATE_NORM_CONTINUOUS, Kind.GENERATES,
    ]
    for lo, hi in zip(chain, chain[1:]):
        out.append(_implies(f"{lo.value} => {hi.value}", v[lo.value], v[hi.value]))
    out.append(_implies("ImmediatelyCompactSemigroup => ImmediateNormContinuous",
                        v[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value], v[Kind.IMMEDIATE_NORM_CONTINUOUS.value]))

    compact = v[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value]
    if is_bounded(spec):
        status = "pass" if not compact.yes else "fail"
        out.append(ConsistencyCheck("bounded spectrum => not ImmediatelyCompactSemigroup", status,
                                    "" if status == "pass" else "compact verdict for a bounded generator"))
    else:
        out.append(ConsistencyCheck("bounded spectrum => not ImmediatelyCompactSemigroup", "pass", "spectrum unbounded"))

    ed = v[Kind.EVENTUALLY_DIFFERENTIABLE.value]
    if ed.yes:
        b, t0 = ed.witness["b"], ed.witness["t0"]
        expected = 0.0 if b == math.inf else 1.0 / b
        ok = math.isclose(t0, expected, rel_tol=1e-12, abs_tol=0.0)
        out.append(ConsistencyCheck("EventuallyDifferentiable witness t0 = 1/b", "pass" if ok else "fail",
                                    f"b={b}, t0={t0}"))
    else:
        out.append(ConsistencyCheck("EventuallyDifferentiable witness t0 = 1/b", "skipped", "no witness"))
    return out


def full_report(spec: SpectrumSpec, betas: Sequence[float] = DEFAULT_BETAS, strict: bool = True) -> RegularityReport:
    """Run every classifier and check the implication chain.

    Raises :class:`InconsistencyError` when ``strict`` and any implication fails.
    """
    betas = tuple(sorted({float(b) for b in betas}))
    if any(b < 1 for b in betas):
        raise ValueError("Gevrey orders must be >= 1")
    verdicts: List[RegularityVerdict] = [
        classify_generation(spec),
        classify_immediate_norm_continuity(spec),
        classify_differentiability(spec, "eventual"),
        classify_differentiability(spec, "immediate"),
        classify_analytic(spec),
    ]
    for beta in betas:
        verdicts.append(classify_gevrey(spec, beta, "roumieu"))
    for beta in betas:
        if beta > 1:
            verdicts.append(classify_gevrey(spec, beta, "beurling"))
    verdicts.append(classify_compactness(spec, "semigroup"))
    verdicts.append(classify_compactness(spec, "operator"))
    by_key = {v.key: v for v in verdicts}
    report = RegularityReport(by_key, consistency_checks(by_key, spec, betas), betas)
    if strict and report.failures:
        names = ", ".join(c.name for c in report.failures)
        raise InconsistencyError(f"implication violated: {names}", report)
    return report
