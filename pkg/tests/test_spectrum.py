import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiflow.corpus import corpus
from semiflow.spectrum import (
    INFINITE,
    Answer,
    FiniteUnion,
    GrowthTerm,
    HalfPlane,
    HorizontalStrip,
    LogRegion,
    PowerRegion,
    SpecError,
    SpectrumSpec,
    TailFamily,
    parse_spectrum_spec,
    region_containment,
    sample_eigenvalues,
    serialize_spectrum_spec,
    spectral_bound,
    superlevel_bounded,
)

SECTOR = {"tails": [{"re": {"power": {"c": -1, "p": 1}}, "im": {"power": {"c": 1, "p": 1}}, "n0": 1, "mult": 1}]}


def pw(c, p):
    return {"power": {"c": c, "p": p}}


# -- parsing ----------------------------------------------------------------

def test_parse_single_point():
    spec = parse_spectrum_spec({"finite": [{"re": -1, "im": 0, "mult": 1}]})
    assert spec.finite_points == ((complex(-1, 0), 1),)
    assert not spec.tails and not spec.regions


def test_parse_tail_evaluates_grammar():
    spec = parse_spectrum_spec(SECTOR)
    n = np.arange(1, 6)
    assert np.array_equal(spec.tails[0].values(n), -n + 1j * n)


def test_parse_accepts_json_text_and_inf_multiplicity():
    spec = parse_spectrum_spec('{"finite": [{"re": -1, "im": 0, "mult": "inf"}]}')
    assert spec.finite_points[0][1] == INFINITE


@pytest.mark.parametrize("doc, fragment", [
    ({"regions": [{"log": {"a": 0, "b": -1}}]}, "LogRegion.b must be > 0"),
    ({"regions": [{"power": {"a": 0, "b": 1, "beta": 0.5}}]}, "beta"),
    ({"regions": [{"strip": {"h": 0}}]}, "h"),
    ({"regions": [{"union": []}]}, "union"),
    ({"finite": [{"re": -1, "im": 0, "mult": 0}]}, "mult"),
    ({"tails": [{"re": pw(-1, 1), "im": pw(1, 1), "n0": 0}]}, "n0"),
    ({"tails": [{"re": pw(-1, 1), "im": pw(1, 1), "im_sign": "?"}]}, "im_sign"),
    ({"bogus": 1}, "bogus"),
])
def test_parse_diagnostics_name_field(doc, fragment):
    with pytest.raises(SpecError, match=fragment):
        parse_spectrum_spec(doc)


terms = st.one_of(
    st.builds(lambda c: {"constant": {"c": c}}, st.floats(-5, 5)),
    st.builds(lambda c, p: {"power": {"c": c, "p": p}}, st.floats(-5, 5), st.floats(0, 3)),
    st.builds(lambda c, p: {"log": {"c": c, "p": p}}, st.floats(-5, 5), st.floats(0, 3)),
    st.builds(lambda c, r: {"exp": {"c": c, "r": r}}, st.floats(-5, 5), st.floats(-2, 2)),
)
tails = st.builds(lambda re, im, s, n0, m: {"re": re, "im": im, "im_sign": s, "n0": n0, "mult": m},
                  terms, terms, st.sampled_from(["+", "-", "alternating"]), st.integers(1, 5),
                  st.one_of(st.integers(1, 3), st.just("inf")))
points = st.builds(lambda re, im, m: {"re": re, "im": im, "mult": m},
                   st.floats(-10, 10), st.floats(-10, 10), st.one_of(st.integers(1, 3), st.just("inf")))
regions = st.one_of(
    st.builds(lambda w: {"half_plane": {"omega": w}}, st.floats(-5, 5)),
    st.builds(lambda a, b: {"log": {"a": a, "b": b}}, st.floats(-5, 5), st.floats(0.1, 5)),
    st.builds(lambda a, b, be: {"power": {"a": a, "b": b, "beta": be}},
              st.floats(-5, 5), st.floats(0.1, 5), st.floats(1, 4)),
    st.builds(lambda h: {"strip": {"h": h}}, st.floats(0.1, 5)),
)
docs = st.fixed_dictionaries({
    "finite": st.lists(points, max_size=3),
    "tails": st.lists(tails, max_size=2),
    "regions": st.lists(regions, max_size=2),
    "label": st.text(max_size=5),
})


@given(docs)
def test_round_trip(doc):
    spec = parse_spectrum_spec(doc)
    assert parse_spectrum_spec(serialize_spectrum_spec(spec)) == spec


# -- sampling ---------------------------------------------------------------

def test_sample_examples():
    spec = SpectrumSpec(tails=(TailFamily(GrowthTerm.power(-1, 1), GrowthTerm.constant(0)),))
    assert [z for z, _ in sample_eigenvalues(spec, 3)] == [-1, -2, -3]
    spec = parse_spectrum_spec({"finite": [{"re": 0, "im": 0, "mult": 1}], **SECTOR})
    assert [z for z, _ in sample_eigenvalues(spec, 2)] == [0, -1 + 1j, -2 + 2j]
    with pytest.raises(SpecError, match="not a point spectrum"):
        sample_eigenvalues(parse_spectrum_spec({"regions": [{"half_plane": {"omega": 0}}]}), 5)


@given(docs.map(lambda d: {**d, "regions": []}), st.integers(1, 30))
def test_sampling_is_prefix_stable(doc, N):
    spec = parse_spectrum_spec(doc)
    a, b = sample_eigenvalues(spec, N), sample_eigenvalues(spec, N + 1)
    assert [repr(x) for x in a] == [repr(x) for x in b[:len(a)]]


# -- spectral bound ---------------------------------------------------------

def test_spectral_bound_examples():
    finite = parse_spectrum_spec({"finite": [{"re": -1, "im": 0, "mult": 1}, {"re": -2, "im": 3, "mult": 1}]})
    assert spectral_bound(finite) == -1
    assert spectral_bound(SpectrumSpec()) == -math.inf
    logline = corpus()["logline"]
    n = np.arange(1, 10**6 + 1)
    oracle = float(np.max(-np.log(n + 1.0)))
    assert spectral_bound(logline) == pytest.approx(oracle, rel=1e-15)
    assert spectral_bound(logline) == pytest.approx(-math.log(2), rel=1e-15)


def test_spectral_bound_of_regions():
    assert spectral_bound(parse_spectrum_spec({"regions": [{"half_plane": {"omega": 3}}]})) == 3
    assert spectral_bound(parse_spectrum_spec({"regions": [{"power": {"a": 2, "b": 1, "beta": 2}}]})) == 2
    assert spectral_bound(parse_spectrum_spec({"regions": [{"log": {"a": 0, "b": 1}}]})) == math.inf
    assert spectral_bound(corpus()["unstable"]) == math.inf


# -- superlevel sets --------------------------------------------------------

def test_superlevel_examples():
    d = superlevel_bounded(corpus()["vertline"], -2)
    assert d.no and "tails[0]" in d.witness["part"]
    d = superlevel_bounded(parse_spectrum_spec(SECTOR), -5)
    assert d.yes
    assert d.witness["radius"] >= max(abs(complex(-n, n)) for n in range(1, 6)) - 1e-12


def test_superlevel_of_log_region_is_unbounded():
    # the real axis is unconstrained in a log region, so Re is unbounded above near Im = 0
    region = LogRegion(0.0, 1.0)
    d = superlevel_bounded(parse_spectrum_spec({"regions": [{"log": {"a": 0, "b": 1}}]}), -3)
    assert d.no
    for re in (10.0, 100.0, 700.0):
        y = math.exp(-re) * 0.5
        assert region.contains(complex(re, y))


@settings(deadline=None, max_examples=40)
@given(st.sampled_from(sorted(corpus())), st.floats(-20, 20), st.floats(0, 10))
def test_superlevel_monotone(name, b, step):
    spec = corpus()[name]
    if superlevel_bounded(spec, b).yes:
        assert superlevel_bounded(spec, b + step).yes


# -- containment ------------------------------------------------------------

def test_containment_examples():
    assert region_containment(parse_spectrum_spec(SECTOR), PowerRegion(0, 1, 1)).yes
    d = region_containment(parse_spectrum_spec({"regions": [{"half_plane": {"omega": 0}}]}), LogRegion(0, 1))
    assert d.no
    z = complex(d.witness["point"]["re"], d.witness["point"]["im"])
    assert not LogRegion(0, 1).contains(z)
    d = region_containment(parse_spectrum_spec({"regions": [{"log": {"a": 0, "b": 2}}]}), LogRegion(1, 1))
    assert d.no
    z = complex(d.witness["point"]["re"], d.witness["point"]["im"])
    assert LogRegion(0, 2).contains(z) and not LogRegion(1, 1).contains(z)
    assert abs(z.imag) < math.exp(-1)


def test_oracle_minimizer_for_log_regions():
    # (1 - ln y) - (-2 ln y) = 1 + ln y < 0 exactly for y < 1/e
    y = np.geomspace(1e-6, 10, 10_001)
    gap = (1 - np.log(y)) - (-2 * np.log(y))
    assert y[gap < 0].max() < math.exp(-1) <= y[gap >= 0].min()


def test_union_and_strip_containment():
    strip = parse_spectrum_spec({"regions": [{"strip": {"h": 1}}]})
    assert region_containment(strip, HorizontalStrip(2)).yes
    assert region_containment(strip, HorizontalStrip(0.5)).no
    finite = parse_spectrum_spec({"finite": [{"re": -1, "im": 0, "mult": 1}, {"re": 5, "im": 0, "mult": 1}]})
    union = FiniteUnion((HalfPlane(-0.5), PowerRegion(6, 1, 1)))
    assert region_containment(finite, union).yes
    assert region_containment(finite, FiniteUnion((HalfPlane(-0.5), PowerRegion(4, 1, 1)))).no


@settings(deadline=None, max_examples=30)
@given(st.floats(0.2, 5), st.floats(1, 4), st.floats(0, 3))
def test_power_region_nesting_on_large_imaginary_parts(b, beta1, extra):
    beta2 = beta1 + extra
    tail = TailFamily(GrowthTerm.power(-b, 1.0 / beta1), GrowthTerm.power(1, 1))  # |Im| >= 1
    assert region_containment(SpectrumSpec(tails=(tail,)), PowerRegion(0, b, beta2)).yes


@settings(deadline=None, max_examples=25)
@given(st.sampled_from(sorted(corpus())), st.floats(-5, 5))
def test_half_plane_containment_bounds_spectral_bound(name, omega):
    spec = corpus()[name]
    if region_containment(spec, HalfPlane(omega)).yes:
        assert spectral_bound(spec) <= omega + 1e-12


TARGETS = [HalfPlane(-1.0), LogRegion(0.0, 1.0), LogRegion(0.0, 2.0), PowerRegion(0.0, 1.0, 1.0),
           PowerRegion(1.0, 0.5, 2.0), HorizontalStrip(3.0)]


@pytest.mark.parametrize("name", [k for k, v in corpus().items() if v.is_point_spectrum and not v.is_empty])
def test_oracle_equivalence_on_samples(name):
    spec = corpus()[name]
    pts = np.array([z for z, _ in sample_eigenvalues(spec, 10**5)])
    pts = pts[np.isfinite(pts)]
    for target in TARGETS:
        d = region_containment(spec, target)
        inside = target.contains(pts)
        if d.yes:
            # tolerance for rounding at boundary points
            assert np.all(inside | (pts.real <= _boundary(target, pts) + 1e-9 * (1 + np.abs(pts.real))))
        assert d.answer is not Answer.INDETERMINATE


def _boundary(region, z):
    y = np.abs(z.imag)
    with np.errstate(divide="ignore"):
        if isinstance(region, HalfPlane):
            return np.full(z.shape, region.omega)
        if isinstance(region, LogRegion):
            return np.where(y == 0, np.inf, region.a - region.b * np.log(y))
        if isinstance(region, PowerRegion):
            return region.a - region.b * y ** (1 / region.beta)
    return np.where(y <= region.h, np.inf, -np.inf)
