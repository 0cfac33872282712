import math

import numpy as np
import pytest

from critsds import maps
from critsds.maps import (AffineFamily, Dist, ExpConjReflectedFamily,
                          GaltonWatsonFamily, GoldieMaxFamily,
                          GoldieSqrtFamily, IntervalMixFamily, MapSample,
                          ReflectedStepFamily, apply_map, envelope_check,
                          family_from_config, goldie_sqrt_derivative_check,
                          gw_envelope_constant, uniqueness_criterion_audit)


def rng_for(seed):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


ALL_FAMILIES = [
    AffineFamily(),
    GoldieMaxFamily(),
    GoldieSqrtFamily(),
    ReflectedStepFamily(),
    ExpConjReflectedFamily(),
    IntervalMixFamily(),
]


# ---------------------------------------------------------------------------
# sampling and envelopes

def test_affine_deterministic_sample():
    fam = AffineFamily(Dist.constant(math.log(2)), Dist.constant(3.0))
    m = fam.sample_map(rng_for(0))
    assert m.A == 2.0 and m.B == 3.0 and m.alpha == 0.0
    assert float(m.evaluate(1.0)) == 5.0


def test_goldie_max_handmade_envelope():
    # max(x, 2): |psi(x) - x| <= 2 (1 + 1) on a grid
    m = MapSample("goldie_max", lambda x: np.maximum(np.asarray(x, float), 2.0),
                  A=1.0, B=2.0, alpha=0.0, domain=maps.HALF_LINE)
    rep = envelope_check(m, np.linspace(0, 1000, 2001))
    assert rep.holds


def test_gw_point_mass_is_translation():
    fam = GaltonWatsonFamily(((1.0, Dist.constant(1.0), Dist.constant(5.0)),))
    m = fam.sample_map(rng_for(1))
    assert m.A == 1.0
    xs = np.arange(50)
    assert np.array_equal(np.asarray(m.evaluate(xs)), xs + 5.0)


def test_apply_domain_checked():
    fam = AffineFamily(Dist.constant(math.log(2)), Dist.constant(3.0))
    m = fam.sample_map(rng_for(0))
    assert apply_map(m, 1.0) == 5.0
    with pytest.raises(ValueError):
        apply_map(m, -1.0)  # half-line domain


def test_apply_goldie_sqrt_at_zero():
    m = MapSample("goldie_sqrt",
                  lambda x: np.sqrt(np.asarray(x, float) ** 2 + 1.0),
                  A=1.0, B=1.0, alpha=0.0, domain=maps.HALF_LINE,
                  params=(1.0, 0.0, 1.0))
    assert apply_map(m, 0.0) == 1.0


def test_apply_reflected_step():
    fam = ReflectedStepFamily(Dist.constant(3.0))
    m = fam.sample_map(rng_for(2))
    assert apply_map(m, 1.0) == 2.0


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.name)
def test_envelope_holds_on_samples(fam):
    rng = rng_for(42)
    if fam.domain == maps.REALS:
        grid = np.concatenate([-np.logspace(5, -2, 40), [0.0], np.logspace(-2, 5, 40)])
    else:
        grid = np.concatenate([[0.0], np.logspace(-2, 6, 60)])
    for _ in range(200):
        m = fam.sample_map(rng)
        rep = envelope_check(m, grid)
        assert rep.holds, (fam.name, m.params, rep)


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.name)
def test_single_b_envelope_for_sandwich(fam):
    """The alpha = 0 families satisfy the stronger |psi - Ax| <= B bound
    that the envelope recursions rely on."""
    rng = rng_for(43)
    if fam.domain == maps.REALS:
        grid = np.concatenate([-np.logspace(5, -2, 40), [0.0], np.logspace(-2, 5, 40)])
    else:
        grid = np.concatenate([[0.0], np.logspace(-2, 6, 60)])
    for _ in range(100):
        m = fam.sample_map(rng)
        err = np.abs(np.asarray(m.evaluate(grid), float) - m.A * grid)
        # absolute slack covers float cancellation when psi(x) ~ A x ~ 1e6
        assert float(err.max()) <= m.B * (1 + 1e-9) + 1e-7, (fam.name, m.params)


def test_envelope_check_flags_wrong_slope():
    fam = AffineFamily(Dist.constant(0.0), Dist.constant(2.0))
    m = fam.sample_map(rng_for(3))
    wrong = MapSample(m.family, m.evaluate, A=m.A + 0.1, B=m.B, alpha=0.0,
                      domain=m.domain)
    grid = np.linspace(0, 1e6, 101)
    rep = envelope_check(wrong, grid)
    assert not rep.holds
    assert rep.worst_x == grid.max()
    # |b - 0.1 x| - B(1+1) at the grid max
    assert rep.max_violation == pytest.approx(0.1 * grid.max() - 2 - 2 * m.B, rel=1e-6)


def test_affine_slope_is_morphism():
    fam = AffineFamily()
    rng = rng_for(5)
    for _ in range(50):
        m1, m2 = fam.sample_map(rng), fam.sample_map(rng)
        comp = lambda x: m1.evaluate(m2.evaluate(x))
        x = 1e9
        slope = float(comp(x)) / x
        assert slope == pytest.approx(m1.A * m2.A, rel=1e-6)


@pytest.mark.parametrize("fam", [GoldieMaxFamily(), GoldieSqrtFamily()],
                         ids=["goldie_max", "goldie_sqrt"])
def test_goldie_families_monotone(fam):
    rng = rng_for(6)
    grid = np.linspace(0, 100, 401)
    for _ in range(50):
        m = fam.sample_map(rng)
        vals = np.asarray(m.evaluate(grid))
        assert (np.diff(vals) >= -1e-12).all()


def test_gw_conditional_mean():
    fam = GaltonWatsonFamily(
        ((1.0, Dist.two_point(0.0, 0.5, 2.0), Dist.constant(1.0)),))
    rng = rng_for(7)
    x = 400
    vals = np.array([float(fam.sample_map(rng).evaluate(x)) for _ in range(400)])
    se = vals.std(ddof=1) / math.sqrt(len(vals))
    # E psi(x) = i + A x with A = 1
    assert abs(vals.mean() - (1 + 1.0 * x)) <= 3 * se


# ---------------------------------------------------------------------------
# derivative check

def test_goldie_sqrt_derivative_closed_form():
    m = MapSample("goldie_sqrt",
                  lambda x: np.sqrt(np.asarray(x, float) ** 2 + 1.0),
                  A=1.0, B=1.0, alpha=0.0, domain=maps.HALF_LINE,
                  params=(1.0, 0.0, 1.0))
    grid = np.linspace(0, 100, 301)
    assert goldie_sqrt_derivative_check(m, grid)
    # oracle: the analytic slope x / sqrt(x^2 + 1) increases to A = 1
    slopes = grid / np.sqrt(grid**2 + 1)
    assert (np.diff(slopes) >= 0).all() and slopes.max() <= 1.0


def test_goldie_sqrt_derivative_linear_case():
    m = MapSample("goldie_sqrt", lambda x: 2.0 * np.asarray(x, float),
                  A=2.0, B=1.0, alpha=0.0, domain=maps.HALF_LINE,
                  params=(2.0, 0.0, 0.0))
    assert goldie_sqrt_derivative_check(m, np.linspace(0, 10, 50))
    assert goldie_sqrt_derivative_check(m, np.array([1.0]))  # vacuous


def test_goldie_sqrt_derivative_requires_discriminant():
    m = MapSample("goldie_sqrt",
                  lambda x: np.sqrt(np.asarray(x, float) ** 2 + 5 * np.asarray(x, float) + 1),
                  A=1.0, B=5.0, alpha=0.0, domain=maps.HALF_LINE,
                  params=(1.0, 5.0, 1.0))
    with pytest.raises(ValueError):
        goldie_sqrt_derivative_check(m, np.linspace(0, 10, 20))


# ---------------------------------------------------------------------------
# uniqueness criterion audit

def test_uniqueness_audit_goldie_max_passes():
    fam = GoldieMaxFamily(c=Dist.uniform(1.0, 2.0))
    grid = np.concatenate([[0.0], np.logspace(-2, 4, 41)])
    audit = uniqueness_criterion_audit(fam, 300, grid, seed=8)
    assert audit.all_pass
    # psi(x) >= B + C >= C >= 1, so beta = 1 certifies with full probability
    assert audit.cond1_scan[1.0] == 1.0
    assert audit.cond1_beta >= 1.0


def test_uniqueness_audit_reflected_fails_sandwich():
    fam = ReflectedStepFamily(Dist.constant(3.0))
    grid = np.concatenate([[0.0], np.logspace(-2, 3, 31)])
    audit = uniqueness_criterion_audit(fam, 100, grid, seed=9)
    assert not audit.cond2_pass  # |x - u| < x for x > u/2 breaks A x <= psi
    assert audit.cond2_violations > 0


def test_uniqueness_audit_needs_half_line():
    with pytest.raises(ValueError):
        uniqueness_criterion_audit(IntervalMixFamily(), 10, np.linspace(0, 1, 5), 0)


# ---------------------------------------------------------------------------
# Galton-Watson envelope constants

def test_gw_envelope_deterministic_offspring():
    fam = GaltonWatsonFamily(((1.0, Dist.constant(1.0), Dist.constant(0.0)),))
    rep = gw_envelope_constant(fam, 0.8, 200, 20, seed=10)
    assert np.all(rep.b_values == 0.0)
    fam2 = GaltonWatsonFamily(((1.0, Dist.constant(2.0), Dist.constant(0.0)),))
    rep2 = gw_envelope_constant(fam2, 0.8, 200, 20, seed=11)
    assert np.all(rep2.b_values == 0.0)


def test_gw_envelope_stability_under_doubling():
    fam = GaltonWatsonFamily(
        ((1.0, Dist.two_point(0.0, 0.5, 2.0), Dist.constant(1.0)),))
    r1 = gw_envelope_constant(fam, 0.8, 2000, 60, seed=12)
    r2 = gw_envelope_constant(fam, 0.8, 4000, 60, seed=12)
    assert math.isfinite(r1.p99) and r1.p99 > 0
    assert 0.7 <= r2.p99 / r1.p99 <= 1.4


def test_gw_envelope_alpha_range():
    fam = GaltonWatsonFamily(((1.0, Dist.constant(1.0), Dist.constant(0.0)),))
    with pytest.raises(ValueError):
        gw_envelope_constant(fam, 0.5, 100, 5, seed=0)


# ---------------------------------------------------------------------------
# config round trips and criticality audit

@pytest.mark.parametrize("fam", ALL_FAMILIES + [
    GaltonWatsonFamily(((1.0, Dist.poisson(1.0), Dist.constant(1.0)),))],
    ids=lambda f: f.name)
def test_family_config_roundtrip(fam):
    rebuilt = family_from_config(fam.as_config())
    assert rebuilt.as_config() == fam.as_config()


@pytest.mark.parametrize("fam", ALL_FAMILIES, ids=lambda f: f.name)
def test_criticality_audit(fam):
    analytic = fam.log_a_mean()
    assert analytic == pytest.approx(0.0, abs=1e-12)
    mean, se = fam.estimate_log_a_mean(seed=13, n=50_000)
    assert abs(mean) <= 4 * se


def test_truncnormal_bound_respected():
    d = Dist.truncnormal(0.0, 0.25, 1.0)
    vals = d.sample(rng_for(14), 100_000)
    assert np.abs(vals).max() <= 1.0
    assert abs(vals.mean()) < 0.01


def test_interval_mix_needs_margin():
    with pytest.raises(ValueError):
        IntervalMixFamily(ell=Dist.truncnormal(0.0, 0.5, 3.0), t=0.25)
