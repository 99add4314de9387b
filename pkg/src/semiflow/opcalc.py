"""Finite-dimensional scalar type spectral operators and their Borel calculus.

A truncation is ``A = S D S^-1`` with ``D`` diagonal (``S = I`` for the
normal realization).  Spectral projections are ``E({lambda}) = S P S^-1``
with ``P`` a coordinate projection, and ``F(A) = S F(D) S^-1``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from .asymptotics import Expansion, summable_exp
from .spectrum import (
    Answer,
    Decision,
    GrowthTerm,
    Region,
    SpecError,
    SpectrumSpec,
    TailFamily,
)

DENSE_CAP = 2048
RANDOM_SUBSETS = 1000


class CalculusError(ValueError):
    """Borel function undefined on the spectrum (e.g. resolvent at an eigenvalue)."""


# ---------------------------------------------------------------------------
# Truncations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityConfig:
    seed: int = 0
    kappa: float = 10.0

    def __post_init__(self):
        if not self.kappa >= 1:
            raise ValueError(f"target condition number must be >= 1, got {self.kappa}")


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    eigenvalues: np.ndarray
    log_abs: np.ndarray
    similarity: Optional[SimilarityConfig] = None
    S: Optional[np.ndarray] = None
    S_inv: Optional[np.ndarray] = None
    measure_bound: float = 1.0
    label: str = ""

    @property
    def N(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def is_diagonal(self) -> bool:
        return self.S is None

    @property
    def condition(self) -> float:
        if self.S is None:
            return 1.0
        s = np.linalg.svd(self.S, compute_uv=False)
        return float(s[0] / s[-1])

    @property
    def certified_bound(self) -> float:
        """Upper bound for ``sup ||E(delta)||``: ``||S|| ||S^-1||`` dominates every projection."""
        return max(self.measure_bound, self.condition)

    def matrix(self) -> np.ndarray:
        return apply_borel_function(self, Identity())


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def expanded_eigenvalues(spec: SpectrumSpec, N: int) -> Tuple[np.ndarray, np.ndarray]:
    """First ``N`` eigenvalues with multiplicity, taking one copy per source per round.

    Sources are the finite points (in order) and the tail families; a tail
    yields ``lambda_{n0}`` ``mult`` times, then ``lambda_{n0+1}`` and so on.
    Round-robin order keeps every source represented in small truncations.
    """
    if spec.regions:
        raise SpecError("not a point spectrum: region parts have no finite truncation")
    vals, logs = [], []
    finite_left = [m for _, m in spec.finite_points]
    tail_cols = []
    for t in spec.tails:
        n = t.indices(N)
        tail_cols.append((t.values(n), t.log_abs_values(n)))
    tail_pos = [0] * len(spec.tails)
    tail_rep = [0] * len(spec.tails)
    while len(vals) < N:
        progressed = False
        for i, (z, _) in enumerate(spec.finite_points):
            if len(vals) >= N:
                break
            if finite_left[i] > 0:
                vals.append(z)
                logs.append(math.log(abs(z)) if z != 0 else -math.inf)
                finite_left[i] -= 1
                progressed = True
        for j, t in enumerate(spec.tails):
            if len(vals) >= N:
                break
            k = tail_pos[j]
            vals.append(tail_cols[j][0][k])
            logs.append(tail_cols[j][1][k])
            tail_rep[j] += 1
            if tail_rep[j] >= t.mult:
                tail_pos[j], tail_rep[j] = k + 1, 0
            progressed = True
        if not progressed:
            raise SpecError(f"spectrum supplies only {len(vals)} eigenvalues, {N} requested")
    return np.asarray(vals, dtype=complex), np.asarray(logs, dtype=float)


def _random_orthogonal(rng: np.random.Generator, N: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((N, N)))
    return q * np.sign(np.diag(r))


def similarity_matrix(N: int, config: SimilarityConfig) -> np.ndarray:
    """``Q1 diag(1 .. kappa geometric) Q2`` with seeded orthogonal factors; condition ``kappa``."""
    rng = np.random.default_rng(config.seed)
    q1 = _random_orthogonal(rng, N)
    q2 = _random_orthogonal(rng, N)
    sv = np.geomspace(1.0, config.kappa, N) if N > 1 else np.ones(1)
    return (q1 * sv) @ q2


def build_truncation(spec: SpectrumSpec, N: int, similarity: Optional[SimilarityConfig] = None,
                     label: Optional[str] = None) -> TruncatedOperator:
    """``N``-dimensional realization of the spectrum, diagonal or similarity-twisted."""
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError(f"truncation dimension must be a positive integer, got {N!r}")
    vals, logs = expanded_eigenvalues(spec, int(N))
    if not np.all(np.isfinite(vals)):
        raise SpecError("truncation contains eigenvalues that overflow double precision")
    op = TruncatedOperator(_frozen(vals), _frozen(logs), label=spec.label if label is None else label)
    if similarity is None:
        return op
    if N > DENSE_CAP:
        raise ValueError(f"twisted truncations are dense; N is capped at {DENSE_CAP}")
    S = similarity_matrix(int(N), similarity)
    op = replace(op, similarity=similarity, S=_frozen(S), S_inv=_frozen(np.linalg.inv(S)))
    return replace(op, measure_bound=estimate_spectral_measure_bound(op))


def from_eigenvalues(eigenvalues: Sequence[complex], similarity: Optional[SimilarityConfig] = None,
                     label: str = "") -> TruncatedOperator:
    """Truncation with explicitly listed eigenvalues."""
    pts = tuple((complex(z), 1) for z in eigenvalues)
    return build_truncation(SpectrumSpec(finite_points=pts, label=label), len(pts), similarity)


# ---------------------------------------------------------------------------
# Borel functions
# ---------------------------------------------------------------------------

def _exp(z: np.ndarray) -> np.ndarray:
    """``e^z`` that returns 0 when the modulus underflows, whatever the phase."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore", under="ignore"):
        mod = np.exp(z.real)
        out = mod * (np.cos(z.imag) + 1j * np.sin(z.imag))
    return np.where(mod == 0, 0.0, out)


class CalcFunction:
    """Borel function of the grammar: evaluation plus growth along a tail family."""

    def __call__(self, lam: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def log_abs_expansion(self, tail: TailFamily) -> Optional[Expansion]:
        """Expansion of ``ln |F(lambda_n)|``, ``None`` if not decidable from the grammar."""
        raise NotImplementedError

    def __mul__(self, other: "CalcFunction") -> "Product":
        return Product((self, other))


@dataclass(frozen=True)
class Identity(CalcFunction):
    def __call__(self, lam):
        return np.asarray(lam, dtype=complex)

    def log_abs_expansion(self, tail):
        return tail.log_abs_expansion()


@dataclass(frozen=True)
class Exp(CalcFunction):
    """``e^{t lambda}``, ``t >= 0``."""

    t: float = 1.0

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"Exp requires t >= 0, got {self.t}")

    def __call__(self, lam):
        return _exp(self.t * np.asarray(lam, dtype=complex))

    def log_abs_expansion(self, tail):
        return tail.re.expansion().scaled(self.t)


@dataclass(frozen=True)
class LambdaExp(CalcFunction):
    """``lambda e^{t lambda}``: the derivative ``A T(t)`` of the semigroup."""

    t: float = 1.0

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"LambdaExp requires t >= 0, got {self.t}")

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        e = _exp(self.t * lam)
        return np.where(e == 0, 0.0, lam * e)

    def log_abs_expansion(self, tail):
        base = tail.log_abs_expansion()
        if base is None:
            return None
        return base + tail.re.expansion().scaled(self.t)


@dataclass(frozen=True)
class Polynomial(CalcFunction):
    """``sum coeffs[k] lambda^k``."""

    coeffs: Tuple[complex, ...] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(np.asarray(lam, dtype=complex), self.coeffs)

    def log_abs_expansion(self, tail):
        nz = [k for k, c in enumerate(self.coeffs) if c != 0]
        if not nz:
            return None
        if not math.isinf(tail.modulus_limit()):
            return Expansion.constant(0.0) if _bounded_values(self, tail) else None
        d = nz[-1]
        base = tail.log_abs_expansion()
        return base.scaled(d) + Expansion.constant(math.log(abs(self.coeffs[d])))


@dataclass(frozen=True)
class Indicator(CalcFunction):
    """Characteristic function of ``region`` (of its complement when ``complement``)."""

    region: Region
    complement: bool = False

    def __call__(self, lam):
        inside = self.region.contains(np.asarray(lam, dtype=complex))
        return np.where(inside != self.complement, 1.0 + 0j, 0.0 + 0j)

    def log_abs_expansion(self, tail):
        return Expansion.constant(0.0)


@dataclass(frozen=True)
class Resolvent(CalcFunction):
    """``1 / (lambda - mu)``."""

    mu: complex

    def __post_init__(self):
        object.__setattr__(self, "mu", complex(self.mu))

    def __call__(self, lam):
        d = np.asarray(lam, dtype=complex) - self.mu
        if np.any(d == 0):
            raise CalculusError(f"resolvent point {self.mu} lies in the spectrum")
        return 1.0 / d

    def log_abs_expansion(self, tail):
        if math.isinf(tail.modulus_limit()):
            return -tail.log_abs_expansion()
        return Expansion.constant(0.0) if _bounded_values(self, tail) else None


@dataclass(frozen=True)
class Product(CalcFunction):
    factors: Tuple[CalcFunction, ...]

    def __call__(self, lam):
        out = np.ones(np.shape(lam), dtype=complex)
        for f in self.factors:
            out = out * f(lam)
        return out

    def log_abs_expansion(self, tail):
        total = Expansion.constant(0.0)
        for f in self.factors:
            e = f.log_abs_expansion(tail)
            if e is None:
                return None
            total = total + e
        return total


def _bounded_values(F: CalcFunction, tail: TailFamily) -> bool:
    """Bounded tail (finite limit): check ``F`` stays finite along it and at its limits."""
    if not math.isfinite(tail.modulus_limit()):
        return False
    n = tail.indices(10_000)
    with np.errstate(all="ignore"):
        try:
            v = F(tail.values(n))
        except CalculusError:
            return False
    lim_re, lim_im = tail.re.limit(), tail.im.limit()
    limits = [complex(lim_re, lim_im), complex(lim_re, -lim_im)]
    with np.errstate(all="ignore"):
        try:
            lv = F(np.array(limits))
        except CalculusError:
            return False
    return bool(np.all(np.isfinite(v)) and np.all(np.isfinite(lv)))


# ---------------------------------------------------------------------------
# Applying functions
# ---------------------------------------------------------------------------

def function_values(op: TruncatedOperator, F: CalcFunction) -> np.ndarray:
    vals = F(op.eigenvalues)
    if not np.all(np.isfinite(vals)):
        raise CalculusError("Borel function is not finite on the truncated spectrum")
    return vals


def apply_borel_function(op: TruncatedOperator, F: CalcFunction) -> np.ndarray:
    """Dense matrix ``F(A) = S F(D) S^-1``."""
    vals = function_values(op, F)
    if op.is_diagonal:
        if op.N > DENSE_CAP:
            raise ValueError(f"dense matrices are capped at N = {DENSE_CAP}; use diagonal_norm")
        out = np.diag(vals)
    else:
        out = (op.S * vals) @ op.S_inv
    return _frozen(out)


def semigroup_at(op: TruncatedOperator, t: float) -> np.ndarray:
    """``T(t) = e^{tA}``."""
    if not t >= 0:
        raise ValueError(f"semigroup is defined for t >= 0 only, got {t}")
    return apply_borel_function(op, Exp(t))


def operator_norm(m: np.ndarray) -> float:
    """Largest singular value."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def diagonal_norm(op: TruncatedOperator, F: CalcFunction) -> float:
    """``||F(A)||`` for a diagonal realization: ``max_k |F(lambda_k)|`` without forming F(A)."""
    if not op.is_diagonal:
        raise ValueError("diagonal_norm requires a diagonal realization")
    return float(np.max(np.abs(function_values(op, F))))


# ---------------------------------------------------------------------------
# Spectral measure
# ---------------------------------------------------------------------------

def atoms(op: TruncatedOperator):
    """Distinct eigenvalues and, for each, the coordinates carrying it."""
    vals, inverse = np.unique(op.eigenvalues, return_inverse=True)
    groups = [np.flatnonzero(inverse == k) for k in range(vals.size)]
    return vals, groups


def spectral_projection(op: TruncatedOperator, selector) -> np.ndarray:
    """``E_A(delta)`` for a region or a boolean predicate on eigenvalues."""
    if isinstance(selector, Region):
        mask = selector.contains(op.eigenvalues)
    else:
        mask = np.asarray(selector(op.eigenvalues), dtype=bool)
    if op.is_diagonal:
        return _frozen(np.diag(mask.astype(complex)))
    return _frozen((op.S[:, mask]) @ op.S_inv[mask, :])


class _ProjectionNorms:
    """``||S P_delta S^-1||`` via Gram blocks: ``lambda_max(G1[d,d] G2[d,d])``."""

    def __init__(self, S, S_inv):
        self.N = S.shape[0]
        self.G1 = S.conj().T @ S
        self.G2 = S_inv @ S_inv.conj().T

    def __call__(self, mask: np.ndarray) -> float:
        k = int(mask.sum())
        if k == 0:
            return 0.0
        if k == self.N:
            return 1.0
        if k > self.N // 2:
            mask = ~mask  # ||P|| = ||I - P|| for a nontrivial idempotent
        idx = np.flatnonzero(mask)
        L = np.linalg.cholesky(self.G1[np.ix_(idx, idx)])
        M = L.conj().T @ self.G2[np.ix_(idx, idx)] @ L
        top = la.eigh(M, eigvals_only=True, subset_by_index=[len(idx) - 1, len(idx) - 1])[0]
        return float(math.sqrt(max(top, 0.0)))


def estimate_spectral_measure_bound(op: TruncatedOperator, n_random: int = RANDOM_SUBSETS,
                                    seed: Optional[int] = None) -> float:
    """Lower estimate of ``sup_delta ||E_A(delta)||`` over singletons, Re-ordered
    prefix sets and seeded random subsets; exactly 1 for diagonal realizations."""
    if op.is_diagonal:
        return 1.0
    if seed is None:
        seed = op.similarity.seed if op.similarity is not None else 0
    norms = _ProjectionNorms(op.S, op.S_inv)
    vals, groups = atoms(op)
    A = len(groups)

    def mask_of(chosen):
        m = np.zeros(op.N, dtype=bool)
        for k in chosen:
            m[groups[k]] = True
        return m

    best = 1.0
    for k in range(A):
        best = max(best, norms(mask_of([k])))
    order = np.argsort(-vals.real, kind="stable")
    for j in range(1, A):
        best = max(best, norms(mask_of(order[:j])))
    rng = np.random.default_rng([seed, 0x5EED])
    for _ in range(n_random):
        chosen = np.flatnonzero(rng.random(A) < 0.5)
        best = max(best, norms(mask_of(chosen)))
    return float(best)


@dataclass(frozen=True)
class TotalVariationResult:
    masses: Tuple[float, ...]
    total: float


@dataclass(frozen=True)
class CalculusBoundCheck:
    M: float
    sup_F: float
    norm_FA: float
    tv: TotalVariationResult
    tv_rhs: float
    delta_lhs: float
    delta_rhs: float
    boundedop_lower_pass: bool
    boundedop_upper_pass: bool
    tv_pass: bool
    delta_pass: bool
    ratios: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.boundedop_lower_pass and self.boundedop_upper_pass and self.tv_pass and self.delta_pass


def total_variation(op: TruncatedOperator, f: np.ndarray, g: np.ndarray) -> TotalVariationResult:
    """Atomic total variation of ``<E_A(.) f, g*>``: masses ``|<E({lambda_k}) f, g*>|``."""
    f = np.asarray(f, dtype=complex)
    g = np.asarray(g, dtype=complex)
    y = f if op.is_diagonal else op.S_inv @ f
    w = g.conj() if op.is_diagonal else g.conj() @ op.S
    contrib = w * y
    _, groups = atoms(op)
    masses = tuple(float(abs(contrib[idx].sum())) for idx in groups)
    return TotalVariationResult(masses, float(sum(masses)))


def check_calculus_bounds(op: TruncatedOperator, F: CalcFunction, f, g, delta: Region,
                          M: Optional[float] = None, rtol: Optional[float] = None) -> CalculusBoundCheck:
    """Evaluate the three spectral-measure inequalities on an atomic measure.

    ``sup|F| <= ||F(A)|| <= 4M sup|F|``; ``v(f,g*,sigma) <= 4M ||f|| ||g*||``;
    ``int_delta |F| dv <= 4M ||E(delta) F(A) f|| ||g*||``.  ``M`` defaults to
    the estimate stored on the operator; ess sup is a plain sup on atoms.
    """
    return calculus_bound_suite(op, F, [(f, g)], delta, M, rtol)[0]


def calculus_bound_suite(op: TruncatedOperator, F: CalcFunction, pairs, delta: Region,
                         M: Optional[float] = None, rtol: Optional[float] = None) -> List[CalculusBoundCheck]:
    """:func:`check_calculus_bounds` for many ``(f, g)`` pairs, forming ``F(A)`` once."""
    M = op.measure_bound if M is None else M
    rtol = 1e-10 * op.N if rtol is None else rtol
    vals = function_values(op, F)
    sup_F = float(np.max(np.abs(vals)))
    norm_FA = float(np.max(np.abs(vals))) if op.is_diagonal and op.N > DENSE_CAP else operator_norm(
        apply_borel_function(op, F))
    atom_vals, groups = atoms(op)
    in_delta = delta.contains(atom_vals)
    absF = np.array([abs(vals[idx[0]]) for idx in groups])
    mask = delta.contains(op.eigenvalues)
    slack = 1 + rtol
    out = []
    for f, g in pairs:
        f = np.asarray(f, dtype=complex)
        g = np.asarray(g, dtype=complex)
        tv = total_variation(op, f, g)
        nf, ng = float(np.linalg.norm(f)), float(np.linalg.norm(g))
        tv_rhs = 4 * M * nf * ng
        delta_lhs = float(np.sum(absF[in_delta] * np.asarray(tv.masses)[in_delta]))
        if op.is_diagonal:
            EFf = np.where(mask, vals * f, 0)
        else:
            y = op.S_inv @ f
            EFf = op.S[:, mask] @ (vals[mask] * y[mask])
        delta_rhs = 4 * M * float(np.linalg.norm(EFf)) * ng
        out.append(CalculusBoundCheck(
            M=M, sup_F=sup_F, norm_FA=norm_FA, tv=tv, tv_rhs=tv_rhs,
            delta_lhs=delta_lhs, delta_rhs=delta_rhs,
            boundedop_lower_pass=sup_F <= norm_FA * slack,
            boundedop_upper_pass=norm_FA <= 4 * M * sup_F * slack,
            tv_pass=tv.total <= tv_rhs * slack,
            delta_pass=delta_lhs <= delta_rhs * slack,
            ratios={
                "norm_over_sup": norm_FA / sup_F if sup_F else float("nan"),
                "tv_over_bound": tv.total / tv_rhs if tv_rhs else float("nan"),
                "delta_over_bound": delta_lhs / delta_rhs if delta_rhs else float("nan"),
            },
        ))
    return out


# ---------------------------------------------------------------------------
# Domains, tail bound, residual spectrum
# ---------------------------------------------------------------------------

def domain_membership(spec: SpectrumSpec, F: CalcFunction, coeffs: GrowthTerm) -> Decision:
    """Is ``f = sum f_n e_n`` with ``|f_n| = coeffs(n)`` in the domain of ``F(A)``?

    Orthonormal-eigenbasis reading: decide ``sum |F(lambda_n)|^2 |f_n|^2 < oo``.
    """
    if spec.regions:
        raise SpecError("domain membership needs a point spectrum")
    log_f = coeffs.log_abs_expansion()
    if log_f is not None:
        ok, why = summable_exp(log_f.scaled(2.0))
        if not ok:
            raise ValueError(f"coefficients are not square-summable: {why}")
    chain = {}
    for j, tail in enumerate(spec.tails):
        if log_f is None:
            chain[f"tails[{j}]"] = "f_n = 0"
            continue
        logF = F.log_abs_expansion(tail)
        if logF is None:
            return Decision(Answer.INDETERMINATE, {
                "part": f"tails[{j}]", "reason": "growth of F along the tail not decidable from the grammar",
            })
        if logF.bounded_above():
            chain[f"tails[{j}]"] = "F bounded on the tail; f square-summable"
            continue
        ok, why = summable_exp((logF + log_f).scaled(2.0))
        chain[f"tails[{j}]"] = why
        if not ok:
            return Decision(Answer.NO, {"part": f"tails[{j}]", "divergent_minorant": why, "chain": chain})
    return Decision(Answer.YES, {"chain": chain})


def tail_bound(M: float, t0: float, n: float) -> float:
    """``4 M e^{-t0 n}``: uniform bound on ``||T(t) - T(t) E({Re >= -n})||`` for ``t >= t0``."""
    if not M >= 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if not t0 > 0:
        raise ValueError(f"t0 must be > 0, got {t0}")
    return 4.0 * M * math.exp(-t0 * n)


def truncation_error(op: TruncatedOperator, n: float, t_grid: Sequence[float]) -> float:
    """``max_t ||T(t) - T(t) E_A({Re >= -n})||`` over ``t_grid``."""
    keep = op.eigenvalues.real < -n
    best = 0.0
    for t in t_grid:
        if op.is_diagonal:
            vals = np.abs(_exp(t * op.eigenvalues))[keep]
            v = float(vals.max()) if vals.size else 0.0
        else:
            vals = np.where(keep, _exp(t * op.eigenvalues), 0)
            v = operator_norm((op.S * vals) @ op.S_inv)
        best = max(best, v)
    return best


def residual_spectrum_check(op: TruncatedOperator, probes: Sequence[complex] = (), tol: float = 1e-8):
    """For each eigenvalue ``A - lambda I`` must be non-injective, for each probe
    point off the spectrum it must be onto; returns rows ``(point, smin, status)``."""
    A = op.matrix()
    scale = max(1.0, operator_norm(A))
    rows = []
    vals, _ = atoms(op)
    for lam in list(vals) + [complex(p) for p in probes]:
        smin = float(np.linalg.svd(A - lam * np.eye(op.N), compute_uv=False)[-1])
        if smin <= tol * scale:
            status = "point"
        else:
            status = "resolvent"  # injective and, in finite dimension, onto
        rows.append((complex(lam), smin, status))
    return rows


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major CSV with ``re,im`` cell pairs."""
    buf = io.StringIO()
    for row in np.asarray(m, dtype=complex):
        buf.write(",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row))
        buf.write("\n")
    return buf.getvalue()
