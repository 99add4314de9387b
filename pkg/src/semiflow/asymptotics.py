"""Asymptotic order comparison for sequences built from the tail grammar.

A *scale* is a 4-tuple ``(r, p, q, s)`` standing for the monomial

    e^{r n} * n^p * (ln n)^q * (ln ln n)^s

and scales are ordered lexicographically, which is exactly their order of
growth as ``n -> oo``.  An :class:`Expansion` is a finite sum of such
monomials with real coefficients.  Everything the classifiers need
(boundedness from above, limits, summability of ``exp(G(n))``) reduces to
reading off the dominant monomial of an expansion.

``ln(n + 1)`` is identified with ``ln n`` here.  The difference is ``o(1)``
for every power of the logarithm used by the grammar, so limits, divergence
and summability are unaffected; suprema are always computed numerically from
the exact sequence values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple

Scale = Tuple[float, float, float, float]

ZERO: Scale = (0.0, 0.0, 0.0, 0.0)
LINEAR: Scale = (0.0, 1.0, 0.0, 0.0)  # n
LOG: Scale = (0.0, 0.0, 1.0, 0.0)  # ln n
LOGLOG: Scale = (0.0, 0.0, 0.0, 1.0)  # ln ln n

# relative size below which a cancelled coefficient counts as exactly zero
CANCEL_RTOL = 1e-12
_SCALE_DIGITS = 12


def _norm_scale(scale: Iterable[float]) -> Scale:
    return tuple(round(float(x), _SCALE_DIGITS) + 0.0 for x in scale)  # type: ignore[return-value]


def compare_scales(a: Scale, b: Scale) -> int:
    """Return -1, 0 or 1 as monomial ``a`` grows slower, alike or faster than ``b``."""
    a, b = _norm_scale(a), _norm_scale(b)
    return (a > b) - (a < b)


def scale_sign(scale: Scale) -> int:
    """+1 if the monomial tends to infinity, 0 if constant, -1 if it tends to zero."""
    return compare_scales(scale, ZERO)


def scale_times(scale: Scale, k: float) -> Scale:
    """Scale of ``monomial ** k``."""
    return _norm_scale(k * x for x in scale)


@dataclass(frozen=True)
class Expansion:
    """Finite sum ``sum c_i * monomial(scale_i)``."""

    terms: Dict[Scale, float] = field(default_factory=dict)

    @classmethod
    def monomial(cls, scale: Scale, coeff: float) -> "Expansion":
        if coeff == 0.0:
            return cls({})
        return cls({_norm_scale(scale): float(coeff)})

    @classmethod
    def constant(cls, value: float) -> "Expansion":
        return cls.monomial(ZERO, value)

    def __add__(self, other: "Expansion") -> "Expansion":
        out = dict(self.terms)
        for sc, c in other.terms.items():
            prev = out.get(sc, 0.0)
            total = prev + c
            if abs(total) <= CANCEL_RTOL * max(abs(prev), abs(c)):
                out.pop(sc, None)
            else:
                out[sc] = total
        return Expansion(out)

    def scaled(self, k: float) -> "Expansion":
        if k == 0.0:
            return Expansion({})
        return Expansion({sc: k * c for sc, c in self.terms.items()})

    def __neg__(self) -> "Expansion":
        return self.scaled(-1.0)

    def __sub__(self, other: "Expansion") -> "Expansion":
        return self + (-other)

    def ordered(self):
        """Terms sorted from the fastest-growing monomial downwards."""
        return sorted(self.terms.items(), key=lambda kv: kv[0], reverse=True)

    def top(self) -> Optional[Tuple[Scale, float]]:
        items = self.ordered()
        return items[0] if items else None

    def coeff(self, scale: Scale) -> float:
        return self.terms.get(_norm_scale(scale), 0.0)

    def limit(self) -> float:
        """Limit as ``n -> oo``; always exists for a finite sum of monomials."""
        top = self.top()
        if top is None:
            return 0.0
        sc, c = top
        if scale_sign(sc) > 0:
            return math.copysign(math.inf, c)
        return self.coeff(ZERO)

    def bounded_above(self) -> bool:
        return self.limit() < math.inf

    def bounded_below(self) -> bool:
        return self.limit() > -math.inf

    def describe(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c:.6g}*{format_scale(sc)}" for sc, c in self.ordered())


def format_scale(scale: Scale) -> str:
    r, p, q, s = scale
    parts = []
    if r:
        parts.append(f"e^({r:g}n)")
    if p:
        parts.append("n" if p == 1 else f"n^{p:g}")
    if q:
        parts.append("ln(n)" if q == 1 else f"ln(n)^{q:g}")
    if s:
        parts.append("lnln(n)" if s == 1 else f"lnln(n)^{s:g}")
    return "*".join(parts) if parts else "1"


def summable_exp(log_terms: Expansion) -> Tuple[bool, str]:
    """Decide whether ``sum_n exp(G(n))`` converges, ``G`` given as an expansion.

    Comparison against ``ln n`` (and then ``ln ln n``) is the Cauchy
    condensation / Bertrand scale: ``exp(-k ln n)`` is summable iff ``k > 1``.
    """
    top = log_terms.top()
    if top is None or scale_sign(top[0]) <= 0:
        return False, f"G(n) -> {log_terms.limit():g}; general term does not tend to 0"
    sc, c = top
    order = compare_scales(sc, LOG)
    if order > 0:
        if c < 0:
            return True, f"G(n) ~ {c:g}*{format_scale(sc)} beats -ln(n); geometric-type decay"
        return False, f"G(n) ~ {c:g}*{format_scale(sc)} -> +oo"
    if order < 0:
        return False, f"|G(n)| = o(ln n) (dominant {format_scale(sc)}); terms >= 1/n eventually"
    # exactly c * ln n at the top
    if math.isclose(c, -1.0, rel_tol=CANCEL_RTOL):
        rest = [(sc2, c2) for sc2, c2 in log_terms.ordered()[1:]]
        nxt = rest[0] if rest else None
        if nxt is None or compare_scales(nxt[0], LOGLOG) < 0:
            return False, "G(n) ~ -ln(n) + O(1); harmonic-type divergence"
        sc2, c2 = nxt
        if compare_scales(sc2, LOGLOG) > 0:
            ok = c2 < 0
            word = "converges" if ok else "diverges"
            return ok, f"G(n) ~ -ln(n) + {c2:g}*{format_scale(sc2)}; condensed series {word}"
        if c2 < -1:
            return True, f"G(n) ~ -ln(n) + {c2:g}*lnln(n); Bertrand series, exponent {-c2:g} > 1"
        return False, f"G(n) ~ -ln(n) + {c2:g}*lnln(n); Bertrand series diverges"
    if c < -1:
        return True, f"G(n) ~ {c:g}*ln(n); p-series with p = {-c:g} > 1"
    return False, f"G(n) ~ {c:g}*ln(n); p-series with p = {-c:g} <= 1"
