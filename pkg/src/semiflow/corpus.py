"""Built-in spectra spanning yes and no instances of every regularity class."""

from __future__ import annotations

from typing import Dict

from .spectrum import SpectrumSpec, parse_spectrum_spec


def _tail(re, im, **kw):
    return {"re": re, "im": im, **kw}


def _pw(c, p):
    return {"power": {"c": c, "p": p}}


def _lg(c, p):
    return {"log": {"c": c, "p": p}}


def _ex(c, r):
    return {"exp": {"c": c, "r": r}}


CORPUS_DOCS: Dict[str, dict] = {
    "sector": {"tails": [_tail(_pw(-1, 1), _pw(1, 1))]},
    "logline": {"tails": [_tail(_lg(-1, 1), _pw(1, 1))]},
    "vertline": {"tails": [_tail(-1.0, _pw(1, 1))]},
    "superexp": {"tails": [_tail(_pw(-1, 2), _ex(1, 1))]},
    "dyadic": {"tails": [_tail(_pw(-1, 1), _ex(1, 0.6931471805599453))]},
    "parabolic": {"tails": [_tail(_pw(-1, 2), _pw(1, 1), im_sign="alternating")]},
    "gevrey2": {"tails": [_tail(_pw(-1, 1), _pw(1, 2))]},
    "sqlogline": {"tails": [_tail(_lg(-1, 1), _pw(1, 2))]},
    "selfadjoint": {"tails": [_tail(_pw(-1, 1), 0.0)]},
    "finite-two": {"finite": [{"re": -1, "im": 0, "mult": 1}, {"re": -2, "im": 3, "mult": 1}]},
    "zero": {"finite": [{"re": 0, "im": 0, "mult": 1}]},
    "compact-op": {"finite": [{"re": 0, "im": 0, "mult": 1}], "tails": [_tail(_pw(1, -1), 0.0)]},
    "inf-mult": {"finite": [{"re": -1, "im": 0, "mult": "inf"}], "tails": [_tail(_pw(-1, 1), 0.0)]},
    "unstable": {"tails": [_tail(_pw(1, 1), _pw(1, 1))]},
    "halfplane": {"regions": [{"half_plane": {"omega": 0}}]},
    "sector-region": {"regions": [{"power": {"a": 0, "b": 1, "beta": 1}}]},
    "strip": {"regions": [{"strip": {"h": 1}}]},
    "empty": {},
}

for _name, _doc in CORPUS_DOCS.items():
    _doc.setdefault("label", _name)


def corpus() -> Dict[str, SpectrumSpec]:
    """Fresh parsed copies of the built-in spectra, in a fixed order."""
    return {name: parse_spectrum_spec(doc) for name, doc in CORPUS_DOCS.items()}


def point_corpus() -> Dict[str, SpectrumSpec]:
    return {k: v for k, v in corpus().items() if v.is_point_spectrum and not v.is_empty}
