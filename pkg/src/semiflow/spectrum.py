"""Declarative spectra and the geometric predicates quantified over them.

A spectrum is described by three kinds of parts:

* finite points with multiplicities,
* tail families ``lambda_n = re(n) + i * sign(n) * im(n)``, ``n >= n0``, where
  ``re`` and ``im`` are single :class:`GrowthTerm` s,
* region primitives (half-plane, log region, power region, horizontal strip,
  finite unions).

Every region used by the regularity characterizations has the form
``Re z <= a - b * phi(|Im z|)`` with ``phi = ln`` (log regions) or
``phi(y) = y**(1/beta)`` (power regions).  For such a family and a fixed slope
``b`` the smallest admissible ``a`` is the *offset*
``sup_{z in spectrum} Re z + b * phi(|Im z|)``; containment is then
``offset <= a``, and the quantifiers "there exists b" / "for every b" reduce to
the *feasible slope* ``sup {b > 0 : offset(b) < oo}``.  Both are decided from
the asymptotic expansions in :mod:`semiflow.asymptotics`; suprema of the
exact sequences are evaluated numerically on a dense prefix plus a geometric
grid and combined with the exact limit.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .asymptotics import (
    LINEAR,
    LOG,
    LOGLOG,
    ZERO,
    Expansion,
    compare_scales,
    scale_sign,
    scale_times,
)

INFINITE = math.inf

Multiplicity = Union[int, float]

DENSE_PREFIX = 100_000
GEOMETRIC_MAX = 1e15
CONTAIN_RTOL = 1e-12


class SpecError(ValueError):
    """Spectrum document violates the schema or a parameter constraint."""


class Answer(str, enum.Enum):
    YES = "yes"
    NO = "no"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Decision:
    """Tri-state outcome of a predicate with its supporting witness."""

    answer: Answer
    witness: Dict[str, Any] = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.answer is Answer.YES

    @property
    def no(self) -> bool:
        return self.answer is Answer.NO


# ---------------------------------------------------------------------------
# Grammar
# ---------------------------------------------------------------------------

_TERM_KINDS = ("constant", "power", "log", "exp")


@dataclass(frozen=True)
class GrowthTerm:
    """``c``, ``c*n^p``, ``c*ln(n+1)^p`` or ``c*e^(r n)`` (``p`` holds ``r`` for exp)."""

    kind: str
    c: float
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in _TERM_KINDS:
            raise SpecError(f"unknown growth term kind {self.kind!r}")
        if not (math.isfinite(self.c) and math.isfinite(self.p)):
            raise SpecError(f"GrowthTerm parameters must be finite, got c={self.c}, p={self.p}")

    @classmethod
    def constant(cls, c: float) -> "GrowthTerm":
        return cls("constant", float(c))

    @classmethod
    def power(cls, c: float, p: float) -> "GrowthTerm":
        return cls("power", float(c), float(p))

    @classmethod
    def log(cls, c: float, p: float) -> "GrowthTerm":
        return cls("log", float(c), float(p))

    @classmethod
    def exp(cls, c: float, r: float) -> "GrowthTerm":
        return cls("exp", float(c), float(r))

    @property
    def scale(self):
        if self.kind == "power":
            return (0.0, self.p, 0.0, 0.0)
        if self.kind == "log":
            return (0.0, 0.0, self.p, 0.0)
        if self.kind == "exp":
            return (self.p, 0.0, 0.0, 0.0)
        return ZERO

    @property
    def is_zero(self) -> bool:
        return self.c == 0.0

    @property
    def is_constant(self) -> bool:
        return self.is_zero or scale_sign(self.scale) == 0

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            if self.kind == "power":
                return self.c * np.power(n, self.p)
            if self.kind == "log":
                return self.c * np.power(np.log1p(n), self.p)
            if self.kind == "exp":
                return self.c * np.exp(self.p * n)
            return np.full(n.shape, self.c)

    def log_abs(self, n):
        """``ln |term(n)|`` evaluated without forming the term (no overflow)."""
        n = np.asarray(n, dtype=float)
        if self.is_zero:
            return np.full(n.shape, -np.inf)
        base = math.log(abs(self.c))
        if self.kind == "power":
            return base + self.p * np.log(n)
        if self.kind == "log":
            return base + self.p * np.log(np.log1p(n))
        if self.kind == "exp":
            return base + self.p * n
        return np.full(n.shape, base)

    def expansion(self) -> Expansion:
        return Expansion.monomial(self.scale, self.c)

    def log_abs_expansion(self) -> Optional[Expansion]:
        """Expansion of ``ln |term|``; ``None`` for the zero term (identically -oo)."""
        if self.is_zero:
            return None
        out = Expansion.constant(math.log(abs(self.c)))
        if self.kind == "power":
            out = out + Expansion.monomial(LOG, self.p)
        elif self.kind == "log":
            out = out + Expansion.monomial(LOGLOG, self.p)
        elif self.kind == "exp":
            out = out + Expansion.monomial(LINEAR, self.p)
        return out

    def pow_abs_expansion(self, alpha: float) -> Expansion:
        """Expansion of ``|term| ** alpha``."""
        if self.is_zero:
            return Expansion({})
        return Expansion.monomial(scale_times(self.scale, alpha), abs(self.c) ** alpha)

    def limit(self) -> float:
        return self.expansion().limit()

    def abs_limit(self) -> float:
        return abs(self.limit()) if not self.is_zero else 0.0

    def sup(self, n0: int) -> float:
        """``sup_{n >= n0}`` of the (monotone) term."""
        first = float(self(n0))
        return max(first, self.limit())

    def inf(self, n0: int) -> float:
        first = float(self(n0))
        return min(first, self.limit())

    def to_doc(self):
        if self.kind == "constant":
            return {"constant": {"c": self.c}}
        key = "r" if self.kind == "exp" else "p"
        return {self.kind: {"c": self.c, key: self.p}}

    def describe(self) -> str:
        if self.kind == "constant":
            return f"{self.c:g}"
        if self.kind == "power":
            return f"{self.c:g}*n^{self.p:g}"
        if self.kind == "log":
            return f"{self.c:g}*ln(n+1)^{self.p:g}"
        return f"{self.c:g}*e^({self.p:g}n)"


_IM_SIGNS = ("+", "-", "alternating")


@dataclass(frozen=True)
class TailFamily:
    re: GrowthTerm
    im: GrowthTerm
    im_sign: str = "+"
    n0: int = 1
    mult: Multiplicity = 1

    def __post_init__(self):
        if self.im_sign not in _IM_SIGNS:
            raise SpecError(f"TailFamily.im_sign must be one of {_IM_SIGNS}, got {self.im_sign!r}")
        if not isinstance(self.n0, (int, np.integer)) or self.n0 < 1:
            raise SpecError(f"TailFamily.n0 must be a positive integer, got {self.n0!r}")
        _check_mult(self.mult, "TailFamily.mult")

    def indices(self, count: int) -> np.ndarray:
        return np.arange(self.n0, self.n0 + count, dtype=float)

    def re_values(self, n) -> np.ndarray:
        return self.re(n)

    def abs_im_values(self, n) -> np.ndarray:
        return np.abs(self.im(n))

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        im = self.im(n)
        if self.im_sign == "-":
            im = -im
        elif self.im_sign == "alternating":
            im = np.where((n - self.n0) % 2 == 0, im, -im)
        out = np.empty(np.shape(n), dtype=complex)
        out.real = self.re(n)
        out.imag = im  # no 1j * inf, which would poison the real part with nan
        return out

    def log_abs_values(self, n) -> np.ndarray:
        """``ln |lambda_n|`` from the analytic log-moduli of both parts."""
        return 0.5 * np.logaddexp(2.0 * self.re.log_abs(n), 2.0 * self.im.log_abs(n))

    @property
    def degenerate(self) -> bool:
        """Both parts constant: the family repeats (at most two) points forever."""
        return self.re.is_constant and self.im.is_constant

    def abs_expansion(self) -> Expansion:
        """Expansion of the dominant part of ``|lambda_n|`` (up to a bounded factor)."""
        a, b = self.re, self.im
        if a.is_zero:
            return b.pow_abs_expansion(1.0)
        if b.is_zero:
            return a.pow_abs_expansion(1.0)
        order = compare_scales(a.scale, b.scale)
        if order > 0:
            return a.pow_abs_expansion(1.0)
        if order < 0:
            return b.pow_abs_expansion(1.0)
        return Expansion.monomial(a.scale, math.hypot(a.c, b.c))

    def log_abs_expansion(self) -> Optional[Expansion]:
        a, b = self.re, self.im
        if a.is_zero and b.is_zero:
            return None
        if a.is_zero:
            return b.log_abs_expansion()
        if b.is_zero:
            return a.log_abs_expansion()
        order = compare_scales(a.scale, b.scale)
        if order > 0:
            return a.log_abs_expansion()
        if order < 0:
            return b.log_abs_expansion()
        return GrowthTerm(a.kind, math.hypot(a.c, b.c), a.p).log_abs_expansion()

    def modulus_limit(self) -> float:
        return self.abs_expansion().limit()

    def to_doc(self):
        return {
            "re": self.re.to_doc(),
            "im": self.im.to_doc(),
            "im_sign": self.im_sign,
            "n0": int(self.n0),
            "mult": _mult_doc(self.mult),
        }

    def describe(self) -> str:
        sign = {"+": "+", "-": "-", "alternating": "+/-"}[self.im_sign]
        return f"{self.re.describe()} {sign} i*{self.im.describe()}, n>={self.n0}"


def _check_mult(mult, where):
    if mult == INFINITE:
        return
    if isinstance(mult, bool) or not isinstance(mult, (int, np.integer)) or mult < 1:
        raise SpecError(f"{where} must be a positive integer or 'inf', got {mult!r}")


def _mult_doc(mult):
    return "inf" if mult == INFINITE else int(mult)


# ---------------------------------------------------------------------------
# Regions
# ---------------------------------------------------------------------------

class Region:
    """Closed subset of the complex plane described by parameters."""

    def contains(self, z) -> np.ndarray:
        raise NotImplementedError

    def to_doc(self):
        raise NotImplementedError

    def members(self) -> Tuple["Region", ...]:
        return (self,)


@dataclass(frozen=True)
class HalfPlane(Region):
    """``{Re z <= omega}``."""

    omega: float

    def __post_init__(self):
        _finite(self.omega, "HalfPlane.omega")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return z.real <= self.omega

    def to_doc(self):
        return {"half_plane": {"omega": self.omega}}


@dataclass(frozen=True)
class LogRegion(Region):
    """``{Re z <= a - b ln|Im z|}``; the real axis is unconstrained."""

    a: float
    b: float

    def __post_init__(self):
        _finite(self.a, "LogRegion.a")
        _finite(self.b, "LogRegion.b")
        if not self.b > 0:
            raise SpecError("LogRegion.b must be > 0")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        y = np.abs(z.imag)
        with np.errstate(divide="ignore"):
            bound = self.a - self.b * np.log(y)
        return (y == 0) | (z.real <= bound)

    def to_doc(self):
        return {"log": {"a": self.a, "b": self.b}}


@dataclass(frozen=True)
class PowerRegion(Region):
    """``{Re z <= a - b |Im z|^(1/beta)}``."""

    a: float
    b: float
    beta: float = 1.0

    def __post_init__(self):
        _finite(self.a, "PowerRegion.a")
        _finite(self.b, "PowerRegion.b")
        _finite(self.beta, "PowerRegion.beta")
        if not self.b > 0:
            raise SpecError("PowerRegion.b must be > 0")
        if not self.beta >= 1:
            raise SpecError("PowerRegion.beta must be >= 1")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return z.real <= self.a - self.b * np.abs(z.imag) ** (1.0 / self.beta)

    def to_doc(self):
        return {"power": {"a": self.a, "b": self.b, "beta": self.beta}}


@dataclass(frozen=True)
class HorizontalStrip(Region):
    """``{|Im z| <= h}``."""

    h: float

    def __post_init__(self):
        _finite(self.h, "HorizontalStrip.h")
        if not self.h > 0:
            raise SpecError("HorizontalStrip.h must be > 0")

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(z.imag) <= self.h

    def to_doc(self):
        return {"strip": {"h": self.h}}


@dataclass(frozen=True)
class FiniteUnion(Region):
    parts: Tuple[Region, ...]

    def __post_init__(self):
        if not self.parts:
            raise SpecError("FiniteUnion must be nonempty")
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=bool)
        for part in self.parts:
            out |= part.contains(z)
        return out

    def members(self):
        out = []
        for part in self.parts:
            out.extend(part.members())
        return tuple(out)

    def to_doc(self):
        return {"union": [p.to_doc() for p in self.parts]}


def _finite(x, where):
    if not isinstance(x, (int, float, np.floating, np.integer)) or isinstance(x, bool):
        raise SpecError(f"{where} must be a real number, got {x!r}")
    if not math.isfinite(x):
        raise SpecError(f"{where} must be finite, got {x!r}")


# ---------------------------------------------------------------------------
# Spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumSpec:
    finite_points: Tuple[Tuple[complex, Multiplicity], ...] = ()
    tails: Tuple[TailFamily, ...] = ()
    regions: Tuple[Region, ...] = ()
    label: str = ""

    def __post_init__(self):
        pts = []
        for z, m in self.finite_points:
            z = complex(z)
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise SpecError(f"finite point {z!r} must have finite components")
            _check_mult(m, "finite point mult")
            pts.append((z, m))
        object.__setattr__(self, "finite_points", tuple(pts))
        object.__setattr__(self, "tails", tuple(self.tails))
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def is_empty(self) -> bool:
        return not (self.finite_points or self.tails or self.regions)

    @property
    def is_point_spectrum(self) -> bool:
        return not self.regions

    def region_members(self) -> Tuple[Region, ...]:
        out = []
        for r in self.regions:
            out.extend(r.members())
        return tuple(out)

    def finite_array(self) -> np.ndarray:
        return np.array([z for z, _ in self.finite_points], dtype=complex)


# ---------------------------------------------------------------------------
# Parsing / serialization
# ---------------------------------------------------------------------------

_TOP_KEYS = {"label", "finite", "tails", "regions"}


def _num(doc, key, where, default=None):
    if key not in doc:
        if default is None:
            raise SpecError(f"{where}.{key} is required")
        return default
    val = doc[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise SpecError(f"{where}.{key} must be a number, got {val!r}")
    if not math.isfinite(val):
        raise SpecError(f"{where}.{key} must be finite")
    return float(val)


def _mult(doc, where):
    val = doc.get("mult", 1)
    if val == "inf":
        return INFINITE
    if isinstance(val, bool) or not isinstance(val, int) or val < 1:
        raise SpecError(f"{where}.mult must be a positive integer or \"inf\", got {val!r}")
    return val


def _only_keys(doc, allowed, where):
    if not isinstance(doc, dict):
        raise SpecError(f"{where} must be an object, got {type(doc).__name__}")
    extra = set(doc) - set(allowed)
    if extra:
        raise SpecError(f"{where}: unknown key(s) {sorted(extra)}")


def _parse_term(doc, where) -> GrowthTerm:
    if isinstance(doc, (int, float)) and not isinstance(doc, bool):
        return GrowthTerm.constant(_num({"c": doc}, "c", where))
    _only_keys(doc, _TERM_KINDS, where)
    if len(doc) != 1:
        raise SpecError(f"{where} must have exactly one of {list(_TERM_KINDS)}")
    (kind, body), = doc.items()
    sub = f"{where}.{kind}"
    if kind == "constant":
        if isinstance(body, (int, float)) and not isinstance(body, bool):
            body = {"c": body}
        _only_keys(body, ("c",), sub)
        return GrowthTerm.constant(_num(body, "c", sub))
    if kind == "exp":
        _only_keys(body, ("c", "r"), sub)
        return GrowthTerm.exp(_num(body, "c", sub), _num(body, "r", sub))
    _only_keys(body, ("c", "p"), sub)
    return GrowthTerm(kind, _num(body, "c", sub), _num(body, "p", sub))


def _parse_region(doc, where) -> Region:
    kinds = ("half_plane", "log", "power", "strip", "union")
    _only_keys(doc, kinds, where)
    if len(doc) != 1:
        raise SpecError(f"{where} must have exactly one of {list(kinds)}")
    (kind, body), = doc.items()
    sub = f"{where}.{kind}"
    try:
        if kind == "half_plane":
            _only_keys(body, ("omega",), sub)
            return HalfPlane(_num(body, "omega", sub))
        if kind == "log":
            _only_keys(body, ("a", "b"), sub)
            return LogRegion(_num(body, "a", sub), _num(body, "b", sub))
        if kind == "power":
            _only_keys(body, ("a", "b", "beta"), sub)
            return PowerRegion(_num(body, "a", sub), _num(body, "b", sub), _num(body, "beta", sub, 1.0))
        if kind == "strip":
            _only_keys(body, ("h",), sub)
            return HorizontalStrip(_num(body, "h", sub))
    except SpecError as exc:
        raise SpecError(f"{exc} (at {sub})") from None
    if not isinstance(body, list):
        raise SpecError(f"{sub} must be an array")
    if not body:
        raise SpecError(f"FiniteUnion must be nonempty (at {sub})")
    return FiniteUnion(tuple(_parse_region(r, f"{sub}[{i}]") for i, r in enumerate(body)))


def parse_spectrum_spec(document) -> SpectrumSpec:
    """Build a :class:`SpectrumSpec` from a JSON string or already-decoded mapping."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SpecError(f"not valid JSON: {exc}") from None
    _only_keys(document, _TOP_KEYS, "spectrum")
    label = document.get("label", "")
    if not isinstance(label, str):
        raise SpecError("label must be a string")

    finite = []
    for i, pt in enumerate(document.get("finite", [])):
        where = f"finite[{i}]"
        _only_keys(pt, ("re", "im", "mult"), where)
        finite.append((complex(_num(pt, "re", where), _num(pt, "im", where, 0.0)), _mult(pt, where)))

    tails = []
    for i, t in enumerate(document.get("tails", [])):
        where = f"tails[{i}]"
        _only_keys(t, ("re", "im", "im_sign", "n0", "mult"), where)
        if "re" not in t:
            raise SpecError(f"{where}.re is required")
        n0 = t.get("n0", 1)
        if isinstance(n0, bool) or not isinstance(n0, int) or n0 < 1:
            raise SpecError(f"{where}.n0 must be a positive integer, got {n0!r}")
        sign = t.get("im_sign", "+")
        if sign not in _IM_SIGNS:
            raise SpecError(f"{where}.im_sign must be one of {list(_IM_SIGNS)}")
        tails.append(TailFamily(
            re=_parse_term(t["re"], f"{where}.re"),
            im=_parse_term(t.get("im", 0.0), f"{where}.im"),
            im_sign=sign,
            n0=n0,
            mult=_mult(t, where),
        ))

    regions = [_parse_region(r, f"regions[{i}]") for i, r in enumerate(document.get("regions", []))]
    return SpectrumSpec(tuple(finite), tuple(tails), tuple(regions), label)


def serialize_spectrum_spec(spec: SpectrumSpec) -> Dict[str, Any]:
    return {
        "label": spec.label,
        "finite": [{"re": z.real, "im": z.imag, "mult": _mult_doc(m)} for z, m in spec.finite_points],
        "tails": [t.to_doc() for t in spec.tails],
        "regions": [r.to_doc() for r in spec.regions],
    }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_eigenvalues(spec: SpectrumSpec, N: int) -> List[Tuple[complex, Multiplicity]]:
    """Finite points, then the first ``N`` terms of every tail in index order.

    Terms of several tails are interleaved by index (``n0``, then ``n0 + 1``
    ...), so the result for ``N`` is a prefix of the result for ``N + 1``.
    """
    if spec.regions:
        raise SpecError("not a point spectrum: region parts cannot be sampled")
    if N < 0:
        raise SpecError("N must be nonnegative")
    out = list(spec.finite_points)
    if spec.tails and N:
        cols = [t.values(t.indices(N)) for t in spec.tails]
        for k in range(N):
            for t, col in zip(spec.tails, cols):
                out.append((complex(col[k]), t.mult))
    return out


def point_sources(spec: SpectrumSpec) -> List[Tuple[str, Any]]:
    return [("finite", i) for i in range(len(spec.finite_points))] + [("tail", j) for j in range(len(spec.tails))]


def available_dimension(spec: SpectrumSpec) -> float:
    """Number of eigenvalues (with multiplicity) the spectrum can supply."""
    if spec.tails or any(m == INFINITE for _, m in spec.finite_points):
        return math.inf
    return float(sum(m for _, m in spec.finite_points))


def _sample_grid(n0: int, dense: int = DENSE_PREFIX) -> np.ndarray:
    head = np.arange(n0, n0 + dense, dtype=float)
    tail = np.unique(np.round(np.geomspace(n0 + dense, GEOMETRIC_MAX, 400)))
    return np.concatenate([head, tail])


# ---------------------------------------------------------------------------
# Spectral bound, superlevel sets
# ---------------------------------------------------------------------------

def spectral_bound(spec: SpectrumSpec) -> float:
    """``sup Re`` over the described set; ``-inf`` for the empty spectrum."""
    best = -math.inf
    for z, _ in spec.finite_points:
        best = max(best, z.real)
    for t in spec.tails:
        best = max(best, t.re.sup(t.n0))
    for r in spec.region_members():
        if isinstance(r, HalfPlane):
            best = max(best, r.omega)
        elif isinstance(r, PowerRegion):
            best = max(best, r.a)
        else:
            best = math.inf
    return best


def sup_abs_imag(spec: SpectrumSpec) -> float:
    best = -math.inf
    for z, _ in spec.finite_points:
        best = max(best, abs(z.imag))
    for t in spec.tails:
        best = max(best, abs(float(t.im(t.n0))), t.im.abs_limit())
    for r in spec.region_members():
        best = max(best, r.h if isinstance(r, HorizontalStrip) else math.inf)
    return best


def is_bounded(spec: SpectrumSpec) -> bool:
    if spec.regions:
        return False
    return all(math.isfinite(t.modulus_limit()) for t in spec.tails)


def _last_index_at_least(term: GrowthTerm, n0: int, b: float) -> int:
    """Largest ``n >= n0`` with ``term(n) >= b``; ``n0 - 1`` if none.

    The term is monotone and eventually below ``b``.
    """
    if float(term(n0)) < b:
        return n0 - 1
    lo, hi = n0, n0 + 1
    while float(term(hi)) >= b:
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if float(term(mid)) >= b:
            lo = mid
        else:
            hi = mid
    return lo


def _prefix_radius(tail: TailFamily, last: int) -> float:
    """``max |lambda_n|`` over ``n0 <= n <= last``; monotone parts peak at an endpoint."""
    ends = np.array([tail.n0, last], dtype=float)
    with np.errstate(over="ignore"):
        re = float(np.max(np.exp(tail.re.log_abs(ends))))
        im = float(np.max(np.exp(tail.im.log_abs(ends))))
    return math.hypot(re, im)


def _tail_superlevel(tail: TailFamily, b: float) -> Tuple[bool, Dict[str, Any]]:
    R = tail.re
    lim = R.limit()
    if lim == math.inf:
        return False, {"reason": "Re lambda_n -> +oo", "tail": tail.describe()}
    if lim == -math.inf:
        last = _last_index_at_least(R, tail.n0, b)
        if last < tail.n0:
            return True, {"radius": 0.0, "indices": []}
        return True, {"radius": _prefix_radius(tail, last), "indices": [tail.n0, last]}
    # Re lambda_n converges monotonically to a finite limit
    eventually_in = lim > b or (lim == b and (R.is_constant or R.c > 0))
    im_lim = tail.im.abs_limit()
    if not eventually_in:
        # Re is monotone and ends below b: only a finite prefix qualifies
        last = _last_index_at_least(R, tail.n0, b)
        if last < tail.n0:
            return True, {"radius": 0.0, "indices": []}
        return True, {"radius": _prefix_radius(tail, last), "indices": [tail.n0, last]}
    if math.isfinite(im_lim):
        radius = math.hypot(max(abs(float(R(tail.n0))), abs(lim)), max(abs(float(tail.im(tail.n0))), im_lim))
        return True, {"radius": radius, "reason": "tail is a bounded set"}
    return False, {
        "reason": f"Re lambda_n -> {lim:g} >= {b:g} while |Im lambda_n| -> oo",
        "tail": tail.describe(),
    }


def superlevel_bounded(spec: SpectrumSpec, b: float) -> Decision:
    """Is ``{lambda in spectrum : Re lambda >= b}`` bounded?"""
    radius = 0.0
    for z, _ in spec.finite_points:
        if z.real >= b:
            radius = max(radius, abs(z))
    for j, tail in enumerate(spec.tails):
        ok, info = _tail_superlevel(tail, b)
        if not ok:
            return Decision(Answer.NO, {"part": f"tails[{j}]", **info})
        radius = max(radius, info.get("radius", 0.0))
    for k, r in enumerate(spec.region_members()):
        part = f"region[{k}]"
        if isinstance(r, HalfPlane):
            if b <= r.omega:
                return Decision(Answer.NO, {"part": part, "reason": f"ray Re = {r.omega:g}, |Im| -> oo"})
        elif isinstance(r, PowerRegion):
            if b <= r.a:
                y = ((r.a - b) / r.b) ** r.beta
                radius = max(radius, math.hypot(max(abs(b), abs(r.a)), y))
        elif isinstance(r, LogRegion):
            return Decision(Answer.NO, {"part": part, "reason": "real axis is unconstrained: Re -> +oo at Im = 0"})
        elif isinstance(r, HorizontalStrip):
            return Decision(Answer.NO, {"part": part, "reason": "strip contains Re -> +oo"})
    return Decision(Answer.YES, {"radius": radius})


# ---------------------------------------------------------------------------
# Offsets and feasible slopes for log / power region families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Boundary:
    """Region family ``Re <= a - b * phi(|Im|)``; ``beta=None`` means ``phi = ln``."""

    beta: Optional[float] = None

    @property
    def is_log(self) -> bool:
        return self.beta is None

    def phi(self, y):
        y = np.asarray(y, dtype=float)
        if self.is_log:
            with np.errstate(divide="ignore"):
                return np.log(y)
        return y ** (1.0 / self.beta)

    def region(self, a: float, b: float) -> Region:
        return LogRegion(a, b) if self.is_log else PowerRegion(a, b, self.beta)

    def tail_phi(self, tail: TailFamily, n) -> np.ndarray:
        if self.is_log:
            return tail.im.log_abs(n)
        with np.errstate(over="ignore"):
            direct = np.abs(tail.im(n)) ** (1.0 / self.beta)
        # exp(log/beta) loses absolute accuracy at large n, where Re may cancel it exactly
        return np.where(np.isfinite(direct), direct, np.exp(tail.im.log_abs(n) / self.beta))

    def tail_phi_expansion(self, tail: TailFamily) -> Optional[Expansion]:
        if self.is_log:
            return tail.im.log_abs_expansion()
        return tail.im.pow_abs_expansion(1.0 / self.beta)

    def describe(self) -> str:
        return "log" if self.is_log else f"power(beta={self.beta:g})"


LOG_BOUNDARY = Boundary(None)


def _tail_required(tail: TailFamily, boundary: Boundary, b: float, n) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return tail.re(n) + b * boundary.tail_phi(tail, n)


def _tail_offset(tail: TailFamily, boundary: Boundary, b: float) -> Tuple[float, Dict[str, Any]]:
    phi = boundary.tail_phi_expansion(tail)
    if phi is None:
        # Im identically 0: log boundary is +oo there, no constraint
        return -math.inf, {"reason": "Im = 0, log boundary unconstrained"}
    g = tail.re.expansion() + phi.scaled(b)
    lim = g.limit()
    if lim == math.inf:
        return math.inf, {"reason": f"Re + b*phi(|Im|) ~ {g.describe()} -> +oo"}
    n = _sample_grid(tail.n0)
    vals = _tail_required(tail, boundary, b, n)
    vals = vals[np.isfinite(vals)]
    sampled = float(np.max(vals)) if vals.size else -math.inf
    return max(sampled, lim), {"sampled_max": sampled, "limit": lim}


def _tail_slope(tail: TailFamily, boundary: Boundary) -> Tuple[float, bool, str]:
    """Feasible slope ``b*`` with closedness flag and explanation."""
    R = tail.re.expansion()
    if not R.bounded_above():
        return 0.0, False, "Re lambda_n -> +oo"
    phi = boundary.tail_phi_expansion(tail)
    if phi is None or phi.bounded_above():
        return math.inf, True, "phi(|Im|) bounded above"
    sc_phi, kappa = phi.top()
    top_r = R.top()
    if top_r is None or compare_scales(top_r[0], sc_phi) < 0:
        return 0.0, False, f"b*phi(|Im|) ~ {format_top(sc_phi, kappa)} dominates Re for every b > 0"
    sc_r, c_r = top_r
    if compare_scales(sc_r, sc_phi) > 0:
        return math.inf, True, f"Re ~ {format_top(sc_r, c_r)} dominates phi(|Im|)"
    bstar = -c_r / kappa
    if bstar <= 0:
        return 0.0, False, "leading terms have the same sign"
    closed = (R + phi.scaled(bstar)).bounded_above()
    return bstar, closed, f"leading terms {format_top(sc_r, c_r)} vs b*{format_top(sc_phi, kappa)} cancel at b = {bstar:g}"


def format_top(scale, coeff) -> str:
    from .asymptotics import format_scale

    return f"{coeff:g}*{format_scale(scale)}"


def _power_in_power(a0, b0, beta0, b, beta) -> float:
    """``sup_{y >= 0} a0 - b0 y^(1/beta0) + b y^(1/beta)``."""
    al, al0 = 1.0 / beta, 1.0 / beta0
    if math.isclose(al, al0, rel_tol=1e-12):
        return a0 if b <= b0 * (1 + 1e-12) else math.inf
    if al > al0:
        return math.inf
    u = (b * al / (b0 * al0)) ** (1.0 / (al0 - al))
    return a0 + b * u ** al * (1.0 - al / al0)


def _power_in_log(a0, b0, beta0, b) -> float:
    """``sup_{y > 0} a0 - b0 y^(1/beta0) + b ln y``."""
    k = b * beta0
    return a0 - k + k * math.log(k / b0)


def _region_offset(r: Region, boundary: Boundary, b: float) -> float:
    if isinstance(r, PowerRegion):
        if boundary.is_log:
            return _power_in_log(r.a, r.b, r.beta, b)
        return _power_in_power(r.a, r.b, r.beta, b, boundary.beta)
    if isinstance(r, LogRegion) and boundary.is_log and math.isclose(r.b, b, rel_tol=1e-12):
        return r.a
    return math.inf


def _region_slope(r: Region, boundary: Boundary) -> float:
    if isinstance(r, PowerRegion):
        if boundary.is_log or r.beta < boundary.beta:
            return math.inf
        if math.isclose(r.beta, boundary.beta, rel_tol=1e-12):
            return r.b
    return 0.0


def region_offset(spec: SpectrumSpec, boundary: Boundary, b: float) -> Tuple[float, Dict[str, Any]]:
    """Smallest ``a`` with ``spectrum <= {Re <= a - b*phi(|Im|)}`` (``+inf`` if none).

    Returns the value and per-part contributions.
    """
    parts: Dict[str, Any] = {}
    best = -math.inf
    pts = spec.finite_array()
    if pts.size:
        with np.errstate(divide="ignore"):
            req = pts.real + b * boundary.phi(np.abs(pts.imag))
        v = float(np.max(req))
        parts["finite"] = v
        best = max(best, v)
    for j, tail in enumerate(spec.tails):
        v, info = _tail_offset(tail, boundary, b)
        parts[f"tails[{j}]"] = {"value": v, **info}
        best = max(best, v)
    for k, r in enumerate(spec.region_members()):
        v = _region_offset(r, boundary, b)
        parts[f"region[{k}]"] = v
        best = max(best, v)
    return best, parts


def feasible_slope(spec: SpectrumSpec, boundary: Boundary) -> Tuple[float, bool, Dict[str, str]]:
    """``sup {b > 0 : region_offset(spec, boundary, b) < oo}`` and whether it is attained.

    Finite points never restrict the slope; the empty spectrum admits every b.
    """
    best, closed = math.inf, True
    why: Dict[str, str] = {}
    for j, tail in enumerate(spec.tails):
        s, c, msg = _tail_slope(tail, boundary)
        why[f"tails[{j}]"] = msg
        if s < best or (s == best and not c):
            best, closed = s, c
    for k, r in enumerate(spec.region_members()):
        s = _region_slope(r, boundary)
        why[f"region[{k}]"] = f"{type(r).__name__} admits slopes up to {s:g}"
        if s < best:
            best, closed = s, True
    return best, closed, why


# ---------------------------------------------------------------------------
# Region containment
# ---------------------------------------------------------------------------

def _extreme_points(r: Region) -> np.ndarray:
    """Boundary and ray samples on which any violation of a target region shows."""
    ys = np.concatenate([[0.0], np.geomspace(1e-12, 1e12, 241)])
    big = np.geomspace(1.0, 1e12, 25)
    if isinstance(r, HalfPlane):
        pts = r.omega + 1j * ys
    elif isinstance(r, LogRegion):
        with np.errstate(divide="ignore"):
            pts = (r.a - r.b * np.log(ys[1:])) + 1j * ys[1:]
        pts = np.concatenate([pts, r.a + big])
    elif isinstance(r, PowerRegion):
        pts = (r.a - r.b * ys ** (1.0 / r.beta)) + 1j * ys
    elif isinstance(r, HorizontalStrip):
        pts = np.concatenate([big + 1j * r.h, -big + 1j * r.h, big])
    else:
        pts = np.concatenate([_extreme_points(m) for m in r.members()])
    return np.concatenate([pts, np.conj(pts)])


def _point_witness(z: complex, part: str, **extra) -> Dict[str, Any]:
    return {"part": part, "point": {"re": z.real, "im": z.imag}, **extra}


def _find_violation(spec: SpectrumSpec, region: Region) -> Optional[Dict[str, Any]]:
    for i, (z, _) in enumerate(spec.finite_points):
        if not region.contains(z):
            return _point_witness(z, f"finite[{i}]")
    for j, tail in enumerate(spec.tails):
        n = _sample_grid(tail.n0)
        z = tail.values(n)
        finite = np.isfinite(z)
        bad = finite & ~region.contains(np.where(finite, z, 0))
        if bad.any():
            k = int(np.argmax(bad))
            return _point_witness(complex(z[k]), f"tails[{j}]", index=int(n[k]))
    for k, r in enumerate(spec.region_members()):
        pts = _extreme_points(r)
        pts = pts[np.isfinite(pts)]
        bad = ~region.contains(pts)
        if bad.any():
            return _point_witness(complex(pts[int(np.argmax(bad))]), f"region[{k}]")
    return None


def _tol(a: float) -> float:
    return CONTAIN_RTOL * max(1.0, abs(a))


def _single_containment(spec: SpectrumSpec, region: Region) -> Decision:
    if isinstance(region, HalfPlane):
        s = spectral_bound(spec)
        if s <= region.omega + _tol(region.omega):
            return Decision(Answer.YES, {"spectral_bound": s, "omega": region.omega})
        found = _find_violation(spec, region)
        return Decision(Answer.NO, found or {"spectral_bound": s, "omega": region.omega})
    if isinstance(region, HorizontalStrip):
        h = sup_abs_imag(spec)
        if h <= region.h + _tol(region.h):
            return Decision(Answer.YES, {"sup_abs_im": h, "h": region.h})
        found = _find_violation(spec, region)
        return Decision(Answer.NO, found or {"sup_abs_im": h, "h": region.h})
    boundary = LOG_BOUNDARY if isinstance(region, LogRegion) else Boundary(region.beta)
    offset, parts = region_offset(spec, boundary, region.b)
    if offset <= region.a + _tol(region.a):
        return Decision(Answer.YES, {"required_a": offset, "a": region.a, "b": region.b})
    found = _find_violation(spec, region)
    if found is None:
        found = {"reason": "inequality fails asymptotically", "required_a": offset, "parts": parts}
    return Decision(Answer.NO, found)


def region_containment(spec: SpectrumSpec, region: Region) -> Decision:
    """Is every point of the described spectrum inside ``region``?"""
    if not isinstance(region, FiniteUnion):
        return _single_containment(spec, region)
    members = region.members()
    # each spectral part must sit in one member; otherwise look for a point outside all
    pieces = [SpectrumSpec(finite_points=(p,)) for p in spec.finite_points]
    pieces += [SpectrumSpec(tails=(t,)) for t in spec.tails]
    pieces += [SpectrumSpec(regions=(r,)) for r in spec.region_members()]
    unresolved = []
    for i, piece in enumerate(pieces):
        if not any(_single_containment(piece, m).yes for m in members):
            unresolved.append(i)
    if not unresolved:
        return Decision(Answer.YES, {"members": len(members)})
    found = _find_violation(spec, region)
    if found is not None:
        return Decision(Answer.NO, found)
    return Decision(Answer.INDETERMINATE, {
        "reason": "a spectral part is split across union members; no sampled point lies outside",
        "parts": unresolved,
    })
