import math

import numpy as np
import pytest

from critsds import conjugate, maps, measure
from critsds.conjugate import (EnvelopeError, beta_constants,
                               end_derivative_audit, exp_conjugate,
                               exp_conjugator, interval_conjugate,
                               interval_conjugator, power_conjugate,
                               power_conjugator)
from critsds.maps import Dist, MapSample


def affine_sample(a, b, alpha=0.0, domain=maps.HALF_LINE):
    return MapSample("affine", lambda x: a * np.asarray(x, float) + b,
                     A=a, B=max(abs(b), 1e-9), alpha=alpha, domain=domain)


# ---------------------------------------------------------------------------
# conjugator plumbing

@pytest.mark.parametrize("conj,grid", [
    (power_conjugator(0.5), np.linspace(-50, 50, 301)),
    (interval_conjugator(), np.linspace(-100, 100, 301)),
    (exp_conjugator(), np.linspace(-30, 30, 301)),
])
def test_roundtrip(conj, grid):
    assert conj.roundtrip_error(grid) < 1e-10


def test_forward_strictly_increasing():
    grid = np.linspace(-40, 40, 4001)
    for conj in (power_conjugator(0.3), exp_conjugator()):
        vals = conj.forward(grid)
        assert (np.diff(vals) > 0).all()
    u = np.linspace(1e-4, 1 - 1e-4, 2001)
    vals = interval_conjugator().forward(u)
    assert (np.diff(vals) > 0).all()


# ---------------------------------------------------------------------------
# power conjugation

def test_power_alpha_zero_is_identity():
    m = affine_sample(2.0, 3.0)
    res = power_conjugate(m)
    assert res.map is m


def test_power_slope_formula():
    # A = 4, alpha = 1/2: conjugate slope is 4^(1/2) = 2
    m = affine_sample(4.0, 1e-6, alpha=0.5)
    res = power_conjugate(m)
    assert res.map.A == pytest.approx(2.0, abs=0)
    assert res.map.alpha == 0.0


def test_power_sqrt_perturbation_bounded():
    # psi(x) = x + sqrt(x) on [1, inf) satisfies (AL^1/2) with A = 1
    def ev(x):
        x = np.asarray(x, float)
        return x + np.sqrt(np.abs(x))

    m = MapSample("sqrt_drift", ev, A=1.0, B=1.0, alpha=0.5,
                  domain=maps.HALF_LINE)
    grid = np.concatenate([[0.0], np.logspace(-2, 8, 200)])
    res = power_conjugate(m, grid)
    # direct numeric sup of |r(psi(r^-1(x))) - x| as the oracle
    r = power_conjugator(0.5)
    err = np.abs(r.forward(ev(r.inverse(grid))) - grid)
    assert float(err.max()) <= res.b0
    assert maps.envelope_check(res.map, grid).holds


def test_power_conjugate_rejects_broken_envelope():
    lying = MapSample("liar", lambda x: np.asarray(x, float) ** 1.5 + 1,
                      A=1.0, B=1.0, alpha=0.5, domain=maps.HALF_LINE)
    with pytest.raises(EnvelopeError):
        power_conjugate(lying)


def test_double_power_conjugation_roundtrip():
    m = affine_sample(3.0, 2.0, alpha=0.4)
    res = power_conjugate(m)
    xs = np.logspace(0, 6, 50)
    # conjugating back reproduces the original dynamics pointwise
    r = power_conjugator(0.4)
    back = r.inverse(res.map.evaluate(r.forward(xs)))
    direct = m.evaluate(xs)
    assert np.allclose(back, direct, rtol=1e-8)


# ---------------------------------------------------------------------------
# interval conjugation

def test_interval_identity_map():
    m = interval_conjugate(lambda u: np.asarray(u, float), a_phi=1.0)
    assert m.A == 1.0
    xs = np.linspace(-50, 50, 101)
    assert np.allclose(m.evaluate(xs), xs, atol=1e-9)


def test_interval_beta_constants_identity():
    b = beta_constants(lambda u: np.asarray(u, float), 1.0)
    assert b.b0_1 == pytest.approx(0.5, abs=1e-6)
    assert b.b0_2 == pytest.approx(1.0, abs=1e-12)
    assert b.b0_3 == pytest.approx(0.0, abs=1e-12)
    assert b.ok


def test_interval_degenerate_phi_rejected():
    # phi attaining 1 inside [0, 1/2] drives inf (1 - phi) to zero
    def phi(u):
        return np.minimum(3.0 * np.asarray(u, float), 1.0)

    b = beta_constants(phi, 3.0)
    assert b.b0_1 == 0.0 and not b.ok
    with pytest.raises(ValueError):
        interval_conjugate(phi, a_phi=3.0, strict=False)


def test_interval_end_derivative_audit_rejects_square():
    d0, d1, agree = end_derivative_audit(lambda u: np.asarray(u, float) ** 2)
    assert d0 == pytest.approx(0.0, abs=1e-5)
    assert d1 == pytest.approx(2.0, abs=1e-5)
    assert not agree
    with pytest.raises(ValueError):
        interval_conjugate(lambda u: np.asarray(u, float) ** 2, a_phi=1.0)


def test_interval_mobius_measured_envelope():
    # Mobius map with unequal end derivatives: conjugation is only
    # asserted (strict=False); the endpoint-constant B stays finite and
    # dominates the measured envelope error on the bounded grid
    c = 1.2

    def phi(u):
        u = np.asarray(u, float)
        return u / (u + (1.0 - u) / c)

    m = interval_conjugate(phi, a_phi=c, strict=False)
    assert m.A == pytest.approx(1 / c)
    grid = conjugate.default_log_grid(hi=1e6)
    err = np.abs(np.asarray(m.evaluate(grid)) - m.A * grid)
    assert float(err.max()) <= m.B  # the numeric sup is the oracle


def test_interval_conjugate_exact_family():
    # phi built by conjugating an affine map back to the interval has
    # exactly matching end derivatives and an exactly affine conjugate
    a = 1.7
    r = interval_conjugator()

    def phi(u):
        return r.inverse(a * r.forward(np.asarray(u, float)))

    m = interval_conjugate(phi, a_phi=1.0 / a)
    xs = np.linspace(-100, 100, 201)
    assert np.allclose(m.evaluate(xs), a * xs, rtol=1e-9, atol=1e-9)
    assert m.A == pytest.approx(a)


# ---------------------------------------------------------------------------
# exponential conjugation

def test_exp_identity_translation():
    m = exp_conjugate(lambda x: np.asarray(x, float), u=0.0, v=1e-9)
    xs = np.logspace(-2, 6, 50)
    assert m.A == 1.0
    assert np.allclose(m.evaluate(xs), xs, rtol=1e-9)


def test_exp_shift_slope():
    # phi(x) = x - 1 for large x gives slope e^-1
    def phi(x):
        x = np.asarray(x, float)
        return np.maximum(x - 1.0, 0.0)

    m = exp_conjugate(phi, u=1.0, v=math.e * 2, domain=maps.HALF_LINE)
    assert m.A == pytest.approx(math.exp(-1.0))


def test_exp_reflected_step_translation_envelope():
    # |x - u| = x - u exactly beyond u, so the translation error vanishes
    # there and the e^u u margin covers the rest
    u = 3.0

    def phi(x):
        return np.abs(np.asarray(x, float) - u)

    big = np.linspace(u, 40, 500)
    assert np.allclose(phi(big), big - u)
    m = exp_conjugate(phi, u=u, v=2.0 * u * math.exp(u), domain=maps.HALF_LINE)
    assert m.A == pytest.approx(math.exp(-u))


def test_exp_conjugate_audits_translation_claim():
    with pytest.raises(EnvelopeError):
        exp_conjugate(lambda x: 0.5 * np.asarray(x, float), u=0.0, v=1.0,
                      domain=maps.HALF_LINE)


# ---------------------------------------------------------------------------
# conjugation preserves dynamics and invariance

@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.8])
def test_conjugation_preserves_dynamics(alpha):
    m = affine_sample(2.0, 1.5, alpha=alpha)
    res = power_conjugate(m)
    conj = power_conjugator(alpha)
    xs = np.logspace(-1, 6, 80)
    lhs = conj.inverse(res.map.evaluate(conj.forward(xs)))
    rhs = m.evaluate(xs)
    assert np.allclose(lhs, rhs, rtol=1e-8)


def test_tail_transport_rescales_by_one_minus_alpha():
    """Pushing a dx/x sample through the power stretch keeps homogeneity
    and rescales the constant by 1 - alpha."""
    alpha = 0.5
    lay = measure.BinLayout()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(21)))
    x = np.exp(np.log(1e-2) + rng.random(2_000_000) * (np.log(1e7) - np.log(1e-2)))
    m_orig = measure.accumulate(x, lay)
    m_push = measure.accumulate(np.sign(x) * np.abs(x) ** (1 - alpha), lay)
    h_orig = measure.tail_homogeneity_report(m_orig, [10.0, 100.0, 1000.0])
    h_push = measure.tail_homogeneity_report(m_push, [10.0, 100.0, 1000.0])
    assert h_orig.passes(1.1) and h_push.passes(1.1)
    # in raw counts (no reference normalization) the pushed-law constant
    # is rescaled by 1/(1 - alpha)
    ratio = h_push.raw_counts.mean() / h_orig.raw_counts.mean()
    assert ratio == pytest.approx(1.0 / (1 - alpha), rel=0.05)


def test_invariance_preserved_under_conjugation():
    """An occupation measure of the latent reflected walk, pushed through
    the exponential scale, is invariant for the conjugated family."""
    from critsds import engine
    from critsds.transforms import exp_scale

    fam_lat = maps.ReflectedStepFamily(Dist.normal(0.0, 1.0))
    fam_conj = maps.ExpConjReflectedFamily(Dist.normal(0.0, 1.0))
    cfg = engine.TrajectoryConfig(seed=31, steps=300_000, n_chains=4, initial=1.0)
    lay = measure.BinLayout(x_core=1.0, n_core=64, bins_per_decade=16, decades=40)
    m_conj, = measure.simulate_occupation(fam_lat, cfg, [(lay, exp_scale)])
    rep = measure.invariance_residual(m_conj, fam_conj, 100_000, seed=32)
    assert rep.tv_distance < 0.05, rep
