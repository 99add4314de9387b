import math

import numpy as np
import pytest

from semiflow.classifier import full_report
from semiflow.corpus import corpus, point_corpus
from semiflow.opcalc import expanded_eigenvalues
from semiflow.spectrum import Answer, SpecError, parse_spectrum_spec
from semiflow.verifier import (
    ProbeConfig,
    compactness_probe,
    cross_validate,
    differentiability_probe,
    finite_difference_defect,
    growth_vs_spectral_probe,
    norm_continuity_probe,
    spectral_mapping_probe,
)

C = corpus()


def test_config_validation():
    for bad in ({"t_grid": ()}, {"t_grid": (1.0, 0.5)}, {"h_schedule": (0.1, 0.2)},
                {"N_schedule": (64, 64)}, {"tolerance": 0}, {"t_max": -1}, {"kappa": 0.5},
                {"ranks": (2, 1)}):
        with pytest.raises(ValueError):
            ProbeConfig(**bad)
    assert ProbeConfig().to_dict()["N_schedule"] == [64, 256, 1024]


def test_probes_reject_regions():
    with pytest.raises(SpecError):
        norm_continuity_probe(C["halfplane"])
    with pytest.raises(SpecError):
        compactness_probe(C["empty"])


def test_zero_generator_has_zero_modulus():
    r = norm_continuity_probe(C["zero"], ProbeConfig(t_grid=(0.5, 1.0)))
    assert r.estimates["continuity_modulus"] == 0.0


def test_vertical_line_modulus_matches_direct_evaluation():
    h = math.pi / 100
    cfg = ProbeConfig(t_grid=(1.0,), h_schedule=(h,))
    r = norm_continuity_probe(C["vertline"], cfg)
    N = int(r.curves["N_vs_h"][0][1])
    n = np.arange(1, N + 1)
    oracle = np.max(math.exp(-1) * np.abs(np.exp(h * (-1 + 1j * n)) - 1))
    assert r.estimates["continuity_modulus"] == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(math.exp(-1) * abs(math.exp(-h) * -1 - 1), rel=1e-12)
    assert r.estimates["continuity_modulus"] == pytest.approx(0.724, abs=5e-4)


def test_norm_continuity_verdicts_agree():
    v = norm_continuity_probe(C["vertline"], verdict=Answer.NO)
    assert v.verdict_agreement["ImmediateNormContinuous"].status == "pass"
    assert v.observations["doubling_N"]["stable"]
    s = norm_continuity_probe(C["sector"], verdict=Answer.YES)
    assert s.verdict_agreement["ImmediateNormContinuous"].status == "pass"


def test_log_line_derivative_bounded_after_onset_and_diverging_before():
    late = differentiability_probe(C["logline"], t_star=1.5, expected=Answer.YES)
    early = differentiability_probe(C["logline"], t_star=0.5, expected=Answer.NO)
    assert late.observations["probe_says_differentiable"] is True
    assert early.observations["probe_says_differentiable"] is False
    # oracle: |lambda_n| e^{t Re lambda_n} = |-ln(n+1) + i n| (n+1)^{-t}
    for res, t in ((late, 1.5), (early, 0.5)):
        N = 1024
        n = np.arange(1, N + 1, dtype=float)
        oracle = np.max(np.abs(-np.log1p(n) + 1j * n) * (n + 1) ** -t)
        assert res.estimates["derivative_norm"] == pytest.approx(oracle, rel=1e-10)


def test_finite_difference_defect_small():
    lam = np.array([-1.0, -2.0], dtype=complex)
    assert finite_difference_defect(lam, 1.0, 1e-6) <= 1e-5


def test_compactness_rank_tail():
    r = compactness_probe(C["selfadjoint"], ProbeConfig(ranks=(1, 5)), verdict=Answer.YES)
    # singular values e^{-k}; sigma_6 = e^{-6}
    assert r.estimates["rank_tail"] == pytest.approx(math.exp(-6))
    assert r.verdict_agreement["ImmediatelyCompactSemigroup"].status == "pass"
    v = compactness_probe(C["vertline"], verdict=Answer.NO)
    assert v.verdict_agreement["ImmediatelyCompactSemigroup"].status == "pass"


def test_finite_spectrum_compactness_skipped():
    r = compactness_probe(C["finite-two"], verdict=Answer.NO)
    assert r.verdict_agreement["ImmediatelyCompactSemigroup"].status == "skipped"


def test_growth_bound_matches_spectral_bound():
    r = growth_vs_spectral_probe(C["sector"])
    assert r.estimates["growth_bound"] == pytest.approx(-1.0)
    assert r.verdict_agreement["Generates"].status == "pass"
    assert r.estimates["certified_bound"] >= r.estimates["measure_bound"] >= 1.0


def test_spectral_mapping_holds_on_truncations():
    for name in ("finite-two", "parabolic", "vertline"):
        for t in (0.0, 1.0):
            r = spectral_mapping_probe(C[name], t_star=t)
            assert r.verdict_agreement["SpectralMapping"].status == "pass", name


def test_spectral_mapping_oracle_on_two_points():
    r = spectral_mapping_probe(C["finite-two"], ProbeConfig(kappa=None), t_star=1.0)
    assert r.estimates["mapping_error[diagonal]"] < 1e-14
    lam, _ = expanded_eigenvalues(C["finite-two"], 2)
    assert sorted(np.abs(np.exp(lam))) == pytest.approx(sorted([math.exp(-1), math.exp(-2)]))


@pytest.mark.parametrize("name", sorted(point_corpus()))
def test_cross_validate_has_no_disagreement(name):
    r = cross_validate(C[name])
    assert not r.disagreements, {k: a.detail for k, a in r.disagreements.items()}


def test_cross_validate_skips_regions_and_non_generators():
    r = cross_validate(C["halfplane"])
    assert {a.status for a in r.verdict_agreement.values()} == {"skipped"}
    r = cross_validate(C["unstable"])
    assert {a.status for a in r.verdict_agreement.values()} == {"skipped"}


def test_cross_validate_detects_wrong_verdict():
    spec = C["vertline"]
    report = full_report(spec)
    forged = report.verdicts["ImmediateNormContinuous"].__class__(
        report.verdicts["ImmediateNormContinuous"].kind, Answer.YES, {})
    report.verdicts["ImmediateNormContinuous"] = forged
    r = cross_validate(spec, report)
    assert "ImmediateNormContinuous" in r.disagreements


def test_probe_is_deterministic():
    a = cross_validate(parse_spectrum_spec({"tails": [{"re": -1.0, "im": {"power": {"c": 1, "p": 1}}}]}))
    b = cross_validate(C["vertline"])
    assert a.to_dict()["curves"] == b.to_dict()["curves"]
