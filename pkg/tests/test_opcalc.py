import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiflow.corpus import corpus
from semiflow.opcalc import (
    CalculusError,
    Exp,
    Identity,
    Indicator,
    LambdaExp,
    Polynomial,
    Resolvent,
    SimilarityConfig,
    apply_borel_function,
    build_truncation,
    check_calculus_bounds,
    domain_membership,
    estimate_spectral_measure_bound,
    expanded_eigenvalues,
    from_eigenvalues,
    matrix_to_csv,
    operator_norm,
    residual_spectrum_check,
    semigroup_at,
    spectral_projection,
    tail_bound,
    total_variation,
    truncation_error,
)
from semiflow.spectrum import Answer, GrowthTerm, HalfPlane, SpecError

C = corpus()
TWIST = SimilarityConfig(seed=0, kappa=10.0)


def test_twisted_build_condition_and_measure_bound():
    op = build_truncation(C["sector"], 64, TWIST)
    assert op.N == 64 and not op.is_diagonal
    assert 9.5 <= op.condition <= 10.5
    assert 1.0 <= op.measure_bound <= 10.5
    assert op.certified_bound == max(op.measure_bound, op.condition)


def test_build_errors():
    with pytest.raises(ValueError):
        build_truncation(C["sector"], 0)
    with pytest.raises(SpecError):
        build_truncation(C["halfplane"], 8)
    with pytest.raises(SpecError):
        build_truncation(C["finite-two"], 5)
    with pytest.raises(ValueError):
        SimilarityConfig(kappa=0.5)


def test_expansion_is_prefix_stable():
    a, _ = expanded_eigenvalues(C["inf-mult"], 40)
    b, _ = expanded_eigenvalues(C["inf-mult"], 80)
    assert np.array_equal(a, b[:40])


def test_identity_and_indicator():
    op = from_eigenvalues([-1, -2])
    assert np.allclose(apply_borel_function(op, Identity()), np.diag([-1, -2]))
    # HalfPlane(w) is {Re <= w}; its complement picks -1
    assert np.allclose(apply_borel_function(op, Indicator(HalfPlane(-1.5))), np.diag([0, 1]))
    assert np.allclose(apply_borel_function(op, Indicator(HalfPlane(-1.5), complement=True)), np.diag([1, 0]))


def test_resolvent():
    op = from_eigenvalues([-1, -2])
    assert np.allclose(apply_borel_function(op, Resolvent(0)), np.diag([-1, -0.5]))
    with pytest.raises(CalculusError):
        apply_borel_function(op, Resolvent(-2))


def test_semigroup_euler_and_identity():
    op = from_eigenvalues([1j * math.pi])
    assert semigroup_at(op, 1.0)[0, 0] == pytest.approx(-1.0)
    tw = build_truncation(C["sector"], 16, TWIST)
    assert np.allclose(semigroup_at(tw, 0.0), np.eye(16))
    with pytest.raises(ValueError):
        semigroup_at(tw, -0.1)


def test_twisted_semigroup_matches_expm():
    from scipy.linalg import expm

    op = build_truncation(C["parabolic"], 12, TWIST)
    assert np.allclose(semigroup_at(op, 0.3), expm(0.3 * op.matrix()), atol=1e-9)


@settings(deadline=None, max_examples=25)
@given(st.floats(0, 3), st.floats(0, 3))
def test_semigroup_law(s, t):
    op = build_truncation(C["logline"], 24, TWIST)
    lhs = semigroup_at(op, s + t)
    rhs = semigroup_at(op, s) @ semigroup_at(op, t)
    assert np.allclose(lhs, rhs, atol=1e-9 * max(1.0, operator_norm(lhs)))


def test_operator_norm_is_spectral_norm():
    m = np.array([[1, 2], [3, 4]], dtype=complex)
    assert operator_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0])


def test_measure_bound_against_exhaustive_subsets():
    for seed in range(3):
        op = build_truncation(C["selfadjoint"], 8, SimilarityConfig(seed=seed, kappa=10.0))
        exact = 1.0
        for mask in itertools.product([False, True], repeat=8):
            m = np.array(mask)
            if m.any() and not m.all():
                P = op.S[:, m] @ op.S_inv[m, :]
                exact = max(exact, np.linalg.norm(P, 2))
        est = estimate_spectral_measure_bound(op, seed=seed)
        # 1000 random subsets over 256 candidates find the maximum
        assert est == pytest.approx(exact, rel=1e-9)


def test_diagonal_measure_bound_is_one():
    assert estimate_spectral_measure_bound(build_truncation(C["sector"], 32)) == 1.0


def test_projection_idempotent_and_bounded():
    op = build_truncation(C["sector"], 32, TWIST)
    P = spectral_projection(op, HalfPlane(-10))
    assert np.allclose(P @ P, P, atol=1e-10)
    assert operator_norm(P) <= op.certified_bound * (1 + 1e-10)


def test_multiplicativity():
    op = build_truncation(C["gevrey2"], 32, TWIST)
    F, G = Exp(0.5), Polynomial((1.0, 2.0, 0.5))
    FG = apply_borel_function(op, F * G)
    prod = apply_borel_function(op, F) @ apply_borel_function(op, G)
    assert operator_norm(FG - prod) <= 1e-10 * op.N * max(1.0, operator_norm(FG))


def test_diagonal_realization_is_exact():
    op = build_truncation(C["sector"], 10)
    vals = op.eigenvalues
    assert np.array_equal(np.diag(apply_borel_function(op, Exp(1.0))), np.exp(vals))


def test_calculus_bounds_examples():
    rng = np.random.default_rng(1)
    for sim in (None, TWIST):
        op = build_truncation(C["sector"], 64, sim)
        for F in (Identity(), Exp(1.0), LambdaExp(0.5), Resolvent(1.0), Indicator(HalfPlane(-5))):
            f = rng.normal(size=64) + 1j * rng.normal(size=64)
            g = rng.normal(size=64) + 1j * rng.normal(size=64)
            chk = check_calculus_bounds(op, F, f, g, HalfPlane(-3), M=op.certified_bound)
            assert chk.passed, (F, chk)


def test_total_variation_diagonal_oracle():
    op = from_eigenvalues([-1, -2, -1])
    f, g = np.array([1, 2, 3]), np.array([1j, 1, 1])
    tv = total_variation(op, f, g)
    # atoms -2 and -1 in sorted order; -1 carries coordinates 0 and 2
    assert tv.masses == pytest.approx((2.0, abs(-1j + 3)))


def test_domain_membership_examples():
    sa = C["selfadjoint"]
    assert domain_membership(sa, Identity(), GrowthTerm.power(1, -1)).answer is Answer.NO
    assert domain_membership(sa, Identity(), GrowthTerm.power(1, -2)).answer is Answer.YES
    d = domain_membership(C["logline"], LambdaExp(1.0), GrowthTerm.power(1, -1))
    assert d.answer is Answer.YES
    # oracle: |lambda e^lambda|^2 / n^2 ~ n^2/(n+1)^2 / n^2, partial sums level off
    n = np.arange(1, 10**6 + 1, dtype=float)
    lam = -np.log1p(n) + 1j * n
    terms = np.abs(lam * np.exp(lam)) ** 2 / n**2
    assert np.sum(terms[10**5:]) < 1e-5
    with pytest.raises(ValueError):
        domain_membership(sa, Identity(), GrowthTerm.power(1, -0.5))


def test_tail_bound_and_truncation_error():
    assert tail_bound(1.0, 1.0, 10) == pytest.approx(4 * math.exp(-10))
    assert tail_bound(1.0, 1.0, 10) == pytest.approx(1.8160e-4, rel=1e-4)
    op = build_truncation(C["selfadjoint"], 64)
    assert truncation_error(op, 10, [1.0, 2.0]) == pytest.approx(math.exp(-11))
    with pytest.raises(ValueError):
        tail_bound(0.5, 1.0, 1)


def test_residual_spectrum_is_empty():
    op = build_truncation(C["finite-two"], 2, TWIST)
    rows = residual_spectrum_check(op, probes=[0.5, 1j])
    assert [r[2] for r in rows] == ["point", "point", "resolvent", "resolvent"]


def test_matrix_csv_format():
    text = matrix_to_csv(np.array([[1 + 2j, 0], [0.5, -1j]]))
    assert text.splitlines() == ["1.0,2.0,0.0,0.0", "0.5,0.0,-0.0,-1.0"]
