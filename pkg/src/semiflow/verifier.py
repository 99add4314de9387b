"""Numeric probes checking classifier verdicts on growing truncations.

Probes run on diagonal realizations in log-modulus arithmetic, so spectra
with ``|Im lambda_n|`` far beyond double range (``e^n``, ``2^n``) stay
usable: whenever ``e^{t Re lambda}`` underflows the phase is irrelevant.
Twisted realizations appear only in the growth-bound and spectral-mapping
probes, where the similarity distortion is part of the assertion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la
from scipy.optimize import linear_sum_assignment

from .classifier import Kind, RegularityReport, full_report
from .opcalc import (
    DENSE_CAP,
    SimilarityConfig,
    _exp,
    build_truncation,
    expanded_eigenvalues,
    operator_norm,
    semigroup_at,
)
from .spectrum import Answer, SpecError, SpectrumSpec, available_dimension, spectral_bound

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


def _default_t_grid():
    return tuple(round(0.1 * k, 10) for k in range(51))


@dataclass(frozen=True)
class ProbeConfig:
    t_grid: Tuple[float, ...] = field(default_factory=_default_t_grid)
    h_schedule: Tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4)
    N_schedule: Tuple[int, ...] = (64, 256, 1024)
    tolerance: float = 1e-8
    seed: int = 0
    t_max: float = 10.0
    kappa: Optional[float] = 10.0
    margin: float = 0.1
    divergence_factor: float = 1.5
    ranks: Tuple[int, ...] = (1, 2, 5, 10, 20)

    def __post_init__(self):
        for name in ("t_grid", "h_schedule", "N_schedule", "ranks"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.t_grid or list(self.t_grid) != sorted(self.t_grid) or min(self.t_grid) < 0:
            raise ValueError("t_grid must be a nonempty sorted list of reals >= 0")
        h = self.h_schedule
        if not h or min(h) <= 0 or any(a <= b for a, b in zip(h, h[1:])):
            raise ValueError("h_schedule must be nonempty, positive and strictly decreasing")
        Ns = self.N_schedule
        if not Ns or min(Ns) < 1 or any(a >= b for a, b in zip(Ns, Ns[1:])):
            raise ValueError("N_schedule must be nonempty, positive and strictly increasing")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not self.t_max > 0:
            raise ValueError("t_max must be > 0")
        if self.kappa is not None and not self.kappa >= 1:
            raise ValueError("kappa must be >= 1")
        if not self.ranks or list(self.ranks) != sorted(set(self.ranks)) or min(self.ranks) < 1:
            raise ValueError("ranks must be increasing positive integers")

    def to_dict(self):
        return {
            "t_grid": list(self.t_grid), "h_schedule": list(self.h_schedule),
            "N_schedule": list(self.N_schedule), "tolerance": self.tolerance, "seed": self.seed,
            "t_max": self.t_max, "kappa": self.kappa, "margin": self.margin,
            "divergence_factor": self.divergence_factor, "ranks": list(self.ranks),
        }


@dataclass(frozen=True)
class Agreement:
    status: str
    detail: str

    def to_dict(self):
        return {"status": self.status, "detail": self.detail}


@dataclass
class ProbeResult:
    name: str
    curves: Dict[str, List[Tuple[float, float]]] = field(default_factory=dict)
    estimates: Dict[str, object] = field(default_factory=dict)
    verdict_agreement: Dict[str, Agreement] = field(default_factory=dict)
    observations: Dict[str, object] = field(default_factory=dict)

    @property
    def disagreements(self) -> Dict[str, Agreement]:
        return {k: a for k, a in self.verdict_agreement.items() if a.status == FAIL}

    def to_dict(self):
        return {
            "name": self.name,
            "curves": {k: [[x, y] for x, y in v] for k, v in self.curves.items()},
            "estimates": dict(self.estimates),
            "verdict_agreement": {k: a.to_dict() for k, a in self.verdict_agreement.items()},
            "observations": dict(self.observations),
        }

    def csv_rows(self):
        for series, pts in self.curves.items():
            for x, y in pts:
                yield series, x, y


def _require_points(spec: SpectrumSpec):
    if spec.regions:
        raise SpecError("probes require point spectra")
    if spec.is_empty:
        raise SpecError("probes require a nonempty spectrum")


def _dimension(spec: SpectrumSpec, N: int) -> int:
    return int(min(N, available_dimension(spec)))


def _compare(expected: Answer, observed: Optional[bool], what: str, evidence: str) -> Agreement:
    if expected is Answer.INDETERMINATE:
        return Agreement(SKIPPED, f"classifier indeterminate for {what}; {evidence}")
    if observed is None:
        return Agreement(SKIPPED, f"probe inconclusive for {what}; {evidence}")
    ok = observed == (expected is Answer.YES)
    return Agreement(PASS if ok else FAIL,
                     f"classifier {expected.value}, probe {'yes' if observed else 'no'} for {what}; {evidence}")


def _merge(parts: Sequence[Agreement]) -> Agreement:
    if not parts:
        return Agreement(SKIPPED, "no probe")
    if any(p.status == FAIL for p in parts):
        status = FAIL
    elif any(p.status == PASS for p in parts):
        status = PASS
    else:
        status = SKIPPED
    return Agreement(status, " | ".join(p.detail for p in parts))


# ---------------------------------------------------------------------------
# Norm continuity
# ---------------------------------------------------------------------------

def _increment_moduli(lam: np.ndarray, ts: np.ndarray, h: float) -> np.ndarray:
    """``max_k |e^{t lambda_k}| |e^{h lambda_k} - 1|`` for each ``t``."""
    with np.errstate(all="ignore"):
        step = np.abs(_exp(h * lam) - 1.0)
        # phase lost to overflow: fall back to the triangle bound
        step = np.where(np.isfinite(step), step, 1.0 + np.exp(h * lam.real))
        out = np.empty(ts.size)
        for i, t in enumerate(ts):
            damp = np.exp(t * lam.real)
            out[i] = float(np.max(np.where(damp == 0, 0.0, damp * step)))
    return out


def norm_continuity_probe(spec: SpectrumSpec, config: ProbeConfig = ProbeConfig(),
                          verdict: Optional[Answer] = None) -> ProbeResult:
    """``max_t ||T(t+h) - T(t)||`` with truncation size ``N = ceil(pi/h)``.

    Per sampled ``t > 0`` the modulus counts as decaying when its log-log
    slope in ``h`` is at least 0.01 (or it is already below ``tol * max||T||``),
    and as stalled when the last value keeps 90% of the first.
    """
    _require_points(spec)
    res = ProbeResult("norm_continuity")
    ts = np.array([t for t in config.t_grid if t > 0])
    if ts.size == 0:
        res.verdict_agreement[Kind.IMMEDIATE_NORM_CONTINUOUS.value] = Agreement(SKIPPED, "no t > 0 in t_grid")
        return res
    Ns = [_dimension(spec, math.ceil(math.pi / h)) for h in config.h_schedule]
    lam, _ = expanded_eigenvalues(spec, max(Ns))
    with np.errstate(all="ignore"):
        norm_T = float(max(np.max(np.exp(t * lam.real)) for t in ts))
    floor = config.tolerance * norm_T

    table = np.array([_increment_moduli(lam[:N], ts, h) for h, N in zip(config.h_schedule, Ns)])
    overall = table.max(axis=1)
    res.curves["modulus_vs_h"] = [(h, float(m)) for h, m in zip(config.h_schedule, overall)]
    res.curves["N_vs_h"] = [(h, float(N)) for h, N in zip(config.h_schedule, Ns)]
    for t, col in zip(ts, table.T):
        res.curves[f"modulus_t={t:g}"] = [(h, float(m)) for h, m in zip(config.h_schedule, col)]

    h0, h1 = config.h_schedule[0], config.h_schedule[-1]
    decade = math.log(h0 / h1) if h0 != h1 else 1.0
    decaying, stalled = [], []
    for t, col in zip(ts, table.T):
        first, last = col[0], col[-1]
        if last <= floor:
            decaying.append(t)
            continue
        slope = math.log(first / last) / decade if first > 0 else 0.0
        if last >= 0.9 * first:
            stalled.append((t, float(first), float(last)))
        elif slope >= 0.01:
            decaying.append(t)
    if stalled:
        observed = False
        t, first, last = stalled[0]
        evidence = (f"at t={t:g} modulus {first:.6g} -> {last:.6g} over h {h0:g} -> {h1:g}, "
                    f"stays >= 0.9*first and >= tol*max||T|| = {floor:.3g}")
    elif len(decaying) == ts.size:
        observed = True
        evidence = f"moduli decay at every sampled t > 0; max at h={h1:g} is {overall[-1]:.3g}"
    else:
        observed = None
        evidence = "moduli neither stall nor decay at every sampled t"

    if stalled:
        # doubling N beyond pi/h must not restore continuity
        N2 = _dimension(spec, 2 * Ns[-1])
        lam2, _ = expanded_eigenvalues(spec, N2)
        t = stalled[0][0]
        m2 = float(_increment_moduli(lam2, np.array([t]), h1)[0])
        res.observations["doubling_N"] = {"N": N2, "t": t, "modulus": m2,
                                          "stable": bool(m2 >= 0.9 * stalled[0][1])}
    res.estimates["continuity_modulus"] = float(overall[-1])
    res.estimates["max_norm_T"] = norm_T
    res.observations["probe_says_continuous"] = observed
    if verdict is not None:
        res.verdict_agreement[Kind.IMMEDIATE_NORM_CONTINUOUS.value] = _compare(
            verdict, observed, "immediate norm continuity", evidence)
    else:
        res.observations["evidence"] = evidence
    return res


# ---------------------------------------------------------------------------
# Differentiability
# ---------------------------------------------------------------------------

def derivative_norm(lam: np.ndarray, log_abs: np.ndarray, t: float) -> float:
    """``||A T(t)|| = max_k |lambda_k| e^{t Re lambda_k}`` on a diagonal truncation."""
    with np.errstate(all="ignore"):
        logs = log_abs + t * lam.real
    logs = logs[~np.isnan(logs)]
    if logs.size == 0:
        return 0.0
    top = float(np.max(logs))
    return math.inf if top > 709 else math.exp(top)


def finite_difference_defect(lam: np.ndarray, t: float, h: float) -> float:
    """``||(T(t+h) - T(t))/h - A T(t)||`` on a diagonal truncation."""
    with np.errstate(all="ignore"):
        damp = np.exp(t * lam.real)
        e = _exp(t * lam)
        d = np.abs(e * ((_exp(h * lam) - 1.0) / h - lam))
    d = np.where(damp == 0, 0.0, d)
    return float(np.max(d))


def differentiability_probe(spec: SpectrumSpec, config: ProbeConfig = ProbeConfig(), t_star: float = 1.0,
                            expected: Optional[Answer] = None) -> ProbeResult:
    """Boundedness of ``||A T(t_star)||`` across the N schedule.

    Divergent when every step of the schedule multiplies it by at least
    ``divergence_factor``; bounded when the last step changes it by at most 5%.
    """
    if not t_star > 0:
        raise ValueError(f"t_star must be > 0, got {t_star}")
    _require_points(spec)
    res = ProbeResult("differentiability")
    Ns = sorted({_dimension(spec, N) for N in config.N_schedule})
    lam, logs = expanded_eigenvalues(spec, Ns[-1])
    D = [derivative_norm(lam[:N], logs[:N], t_star) for N in Ns]
    res.curves[f"derivative_norm_t={t_star:g}"] = [(float(N), d) for N, d in zip(Ns, D)]
    ratios = [b / a if a > 0 else math.inf for a, b in zip(D, D[1:])]
    if len(Ns) == 1 or (ratios and ratios[-1] <= 1.05):
        observed = True
    elif len(ratios) >= 2 and all(r >= config.divergence_factor for r in ratios):
        observed = False
    else:
        observed = None
    evidence = (f"||A T({t_star:g})|| over N={Ns}: " + ", ".join(f"{d:.6g}" for d in D)
                + (f"; step ratios {', '.join(f'{r:.4g}' for r in ratios)}" if ratios else ""))

    N0 = Ns[0]
    defects = [(h, finite_difference_defect(lam[:N0], t_star, h)) for h in config.h_schedule]
    res.curves[f"fd_defect_t={t_star:g}_N={N0}"] = defects
    res.estimates["derivative_defect"] = defects[-1][1]
    res.estimates["derivative_norm"] = D[-1]
    res.observations["fd_defect_decreasing"] = bool(defects[-1][1] <= defects[0][1])
    res.observations["probe_says_differentiable"] = observed
    res.observations["t_star"] = t_star
    if expected is not None:
        res.verdict_agreement["differentiable_at_t"] = _compare(
            expected, observed, f"differentiability at t={t_star:g}", evidence)
    else:
        res.observations["evidence"] = evidence
    return res


# ---------------------------------------------------------------------------
# Compactness
# ---------------------------------------------------------------------------

def compactness_probe(spec: SpectrumSpec, config: ProbeConfig = ProbeConfig(), t_star: float = 1.0,
                      verdict: Optional[Answer] = None) -> ProbeResult:
    """Rank-r approximation error ``sigma_{r+1}(T(t_star))`` over ranks and truncations."""
    _require_points(spec)
    res = ProbeResult("compactness")
    if not spec.tails:
        if verdict is not None:
            res.verdict_agreement[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value] = Agreement(
                SKIPPED, "finite spectrum: every truncation is finite rank, nothing to observe")
        return res
    Ns = sorted({_dimension(spec, N) for N in config.N_schedule})
    lam, _ = expanded_eigenvalues(spec, Ns[-1])
    ranks = [r for r in config.ranks if r < Ns[0]]
    tails = {}
    for N in Ns:
        with np.errstate(under="ignore"):
            sv = np.sort(np.exp(t_star * lam[:N].real))[::-1]
        tails[N] = [float(sv[r]) for r in ranks]
        res.curves[f"rank_tail_N={N}"] = [(float(r), v) for r, v in zip(ranks, tails[N])]
    last = tails[Ns[-1]]
    observed: Optional[bool]
    if len(ranks) < 2:
        observed = None
    elif last[-1] <= 0.25 * last[0]:
        observed = True
    elif last[-1] >= 0.5 * last[0]:
        observed = False
    else:
        observed = None
    growth = max(tails[N][-1] for N in Ns) - tails[Ns[0]][-1]
    res.estimates["rank_tail"] = last[-1] if last else float("nan")
    res.observations["probe_says_compact"] = observed
    res.observations["tail_growth_across_N"] = growth
    evidence = (f"sigma_(r+1)(T({t_star:g})) at N={Ns[-1]}: r={ranks[0] if ranks else '-'} -> "
                f"{last[0] if last else float('nan'):.6g}, r={ranks[-1] if ranks else '-'} -> "
                f"{last[-1] if last else float('nan'):.6g}")
    if verdict is not None:
        res.verdict_agreement[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value] = _compare(
            verdict, observed, "compactness of T(t)", evidence)
    return res


# ---------------------------------------------------------------------------
# Growth bound and spectral mapping
# ---------------------------------------------------------------------------

def growth_vs_spectral_probe(spec: SpectrumSpec, config: ProbeConfig = ProbeConfig()) -> ProbeResult:
    """``omega_hat = ln||T(t_max)|| / t_max`` against the truncated spectral bound."""
    _require_points(spec)
    res = ProbeResult("growth_vs_spectral")
    tm = config.t_max
    N = _dimension(spec, config.N_schedule[-1])
    lam, _ = expanded_eigenvalues(spec, N)
    s = float(np.max(lam.real))
    omega = float(np.max(tm * lam.real)) / tm  # ln of a diagonal norm, taken exactly
    diff = abs(omega - s)
    ok = diff <= config.tolerance
    checks = [Agreement(PASS if ok else FAIL,
                        f"diagonal N={N}: |omega_hat - s| = |{omega:.12g} - {s:.12g}| = {diff:.3g} "
                        f"<= ln(1)/{tm:g} + {config.tolerance:g}")]
    res.estimates.update(growth_bound=omega, spectral_bound=s, spectral_bound_full=spectral_bound(spec))

    if config.kappa is not None:
        Nt = min(_dimension(spec, config.N_schedule[0]), DENSE_CAP)
        try:
            op = build_truncation(spec, Nt, SimilarityConfig(config.seed, config.kappa))
        except SpecError as exc:
            checks.append(Agreement(SKIPPED, f"twisted realization unavailable: {exc}"))
        else:
            st = float(np.max(op.eigenvalues.real))
            nT = operator_norm(semigroup_at(op, tm))
            omega_t = math.log(nT) / tm if nT > 0 else -math.inf
            Mc = op.certified_bound
            bound = math.log(Mc) / tm + config.tolerance
            d = abs(omega_t - st)
            checks.append(Agreement(PASS if d <= bound else FAIL,
                                    f"twisted kappa={config.kappa:g} N={Nt}: |omega_hat - s| = {d:.3g} <= "
                                    f"ln(M={Mc:.6g})/{tm:g} + tol = {bound:.3g}"))
            # the estimate alone bounds the gap only when phases cannot add up on the line Re = s
            res.observations["within_ln_M_hat"] = bool(d <= math.log(op.measure_bound) / tm + config.tolerance)
            sandwich = []
            worst = True
            for t in config.t_grid:
                nt = operator_norm(semigroup_at(op, t))
                ref = math.exp(t * st)
                sandwich.append((t, nt))
                if ref > 0 and not (ref / config.kappa * (1 - 1e-10) <= nt <= Mc * ref * (1 + 1e-10)):
                    worst = False
            res.curves["twisted_norm_T"] = sandwich
            checks.append(Agreement(PASS if worst else FAIL,
                                    f"sandwich kappa^-1 e^(st) <= ||T(t)|| <= {Mc:.6g} e^(st) on t_grid"))
            res.estimates.update(growth_bound_twisted=omega_t, measure_bound=op.measure_bound,
                                 certified_bound=Mc)
    res.verdict_agreement[Kind.GENERATES.value] = _merge(checks)
    return res


def _match(a: np.ndarray, b: np.ndarray) -> float:
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if r.size else 0.0


def spectral_mapping_probe(spec: SpectrumSpec, config: ProbeConfig = ProbeConfig(),
                           t_star: float = 1.0) -> ProbeResult:
    """Eigenvalues of ``T(t_star)`` against ``{e^{t_star lambda_k}}``, matched optimally."""
    _require_points(spec)
    if not t_star >= 0:
        raise ValueError("t_star must be >= 0")
    res = ProbeResult("spectral_mapping")
    N = _dimension(spec, config.N_schedule[0])
    variants = [("diagonal", None)]
    if config.kappa is not None:
        variants.append((f"twisted kappa={config.kappa:g}", SimilarityConfig(config.seed, config.kappa)))
    checks = []
    for name, sim in variants:
        try:
            op = build_truncation(spec, N, sim)
        except SpecError as exc:
            checks.append(Agreement(SKIPPED, f"{name}: {exc}"))
            continue
        T = semigroup_at(op, t_star)
        got = la.eigvals(T)
        want = _exp(t_star * op.eigenvalues)
        err = _match(got, want)
        tol = config.tolerance * N
        res.estimates[f"mapping_error[{name}]"] = err
        checks.append(Agreement(PASS if err <= tol else FAIL,
                                f"{name} N={N} t={t_star:g}: max matched |mu - e^(t lambda)| = {err:.3g} "
                                f"<= {tol:.3g}"))
    res.verdict_agreement["SpectralMapping"] = _merge(checks)
    return res


# ---------------------------------------------------------------------------
# Cross validation
# ---------------------------------------------------------------------------

MAPPING_TIMES = (0.0, 0.5, 1.0, 3.0)


def cross_validate(spec: SpectrumSpec, report: Optional[RegularityReport] = None,
                   config: ProbeConfig = ProbeConfig()) -> ProbeResult:
    """Run every probe and compare with the classifier on yes and no instances."""
    if report is None:
        report = full_report(spec, strict=False)
    out = ProbeResult("cross_validate")
    kinds = [Kind.GENERATES, Kind.IMMEDIATE_NORM_CONTINUOUS, Kind.EVENTUALLY_DIFFERENTIABLE,
             Kind.IMMEDIATELY_DIFFERENTIABLE, Kind.IMMEDIATELY_COMPACT_SEMIGROUP, "SpectralMapping"]
    names = [k.value if isinstance(k, Kind) else k for k in kinds]

    if spec.regions or spec.is_empty:
        why = "region parts" if spec.regions else "empty spectrum"
        for n in names:
            out.verdict_agreement[n] = Agreement(SKIPPED, f"no truncation: {why}")
        return out
    if not report[Kind.GENERATES.value].yes:
        for n in names:
            out.verdict_agreement[n] = Agreement(SKIPPED, "no C0-semigroup to probe")
        return out

    def absorb(prefix: str, r: ProbeResult):
        for k, v in r.curves.items():
            out.curves[f"{prefix}.{k}"] = v
        for k, v in r.estimates.items():
            out.estimates[f"{prefix}.{k}"] = v
        for k, v in r.observations.items():
            out.observations[f"{prefix}.{k}"] = v

    g = growth_vs_spectral_probe(spec, config)
    absorb("growth", g)
    out.verdict_agreement[Kind.GENERATES.value] = g.verdict_agreement[Kind.GENERATES.value]

    nc = norm_continuity_probe(spec, config, report[Kind.IMMEDIATE_NORM_CONTINUOUS.value].answer)
    absorb("norm_continuity", nc)
    out.verdict_agreement[Kind.IMMEDIATE_NORM_CONTINUOUS.value] = nc.verdict_agreement[
        Kind.IMMEDIATE_NORM_CONTINUOUS.value]

    ev = report[Kind.EVENTUALLY_DIFFERENTIABLE.value]
    im = report[Kind.IMMEDIATELY_DIFFERENTIABLE.value]
    ev_checks, im_checks = [], []
    if ev.answer is Answer.INDETERMINATE:
        ev_checks.append(Agreement(SKIPPED, "classifier indeterminate"))
    elif ev.yes:
        t0 = float(ev.witness["t0"])
        if t0 > 0:
            plan = [(1.5 * t0, Answer.YES, ev_checks)]
            if math.isfinite(ev.witness.get("max_feasible_slope", math.inf)):
                plan.append((0.5 * t0, Answer.NO, ev_checks))
                plan.append((0.5 * t0, im.answer, im_checks))
        else:
            plan = [(0.1, Answer.YES, ev_checks), (1.0, Answer.YES, ev_checks), (0.1, im.answer, im_checks)]
        for t, want, sink in plan:
            d = differentiability_probe(spec, config, t, want)
            absorb(f"differentiability@{t:g}", d)
            sink.append(d.verdict_agreement["differentiable_at_t"])
    else:
        for t in (1.0, 5.0):
            d = differentiability_probe(spec, config, t, Answer.NO)
            absorb(f"differentiability@{t:g}", d)
            ev_checks.append(d.verdict_agreement["differentiable_at_t"])
        d = differentiability_probe(spec, config, 1.0, im.answer)
        im_checks.append(d.verdict_agreement["differentiable_at_t"])
    out.verdict_agreement[Kind.EVENTUALLY_DIFFERENTIABLE.value] = _merge(ev_checks)
    out.verdict_agreement[Kind.IMMEDIATELY_DIFFERENTIABLE.value] = _merge(im_checks)

    cp = compactness_probe(spec, config, 1.0, report[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value].answer)
    absorb("compactness", cp)
    out.verdict_agreement[Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value] = cp.verdict_agreement[
        Kind.IMMEDIATELY_COMPACT_SEMIGROUP.value]

    maps = []
    for t in MAPPING_TIMES:
        sm = spectral_mapping_probe(spec, config, t)
        absorb(f"spectral_mapping@{t:g}", sm)
        maps.append(sm.verdict_agreement["SpectralMapping"])
    out.verdict_agreement["SpectralMapping"] = _merge(maps)
    return out
