import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from critsds import affine
from critsds.affine import (GroupElement, IDENTITY, act, compose,
                            estimate_hitting_probability, invert,
                            scaled_window_region, walk_prefixes, wilson_interval)

elements = st.builds(
    GroupElement,
    b=st.floats(-1e6, 1e6, allow_nan=False),
    a=st.floats(1e-6, 1e6, allow_nan=False, exclude_min=True),
)


def test_identity_and_product_formula():
    assert compose(IDENTITY, GroupElement(3, 4)) == GroupElement(3, 4)
    assert compose(GroupElement(1, 2), GroupElement(3, 4)) == GroupElement(7, 8)


def test_inverse_formula():
    assert invert(IDENTITY) == IDENTITY
    g = invert(GroupElement(7, 8))
    assert g.b == -7 / 8 and g.a == 1 / 8
    h = GroupElement(2.5, 0.3)
    assert compose(h, invert(h)).approx_equal(IDENTITY)
    assert compose(invert(h), h).approx_equal(IDENTITY)


def test_positive_dilation_enforced():
    with pytest.raises(ValueError):
        GroupElement(0.0, 0.0)
    with pytest.raises(ValueError):
        GroupElement(1.0, -2.0)


def test_action_formula():
    assert act(IDENTITY, 5.0) == 5.0
    assert act(GroupElement(1, 2), 3.0) == 7.0


@settings(max_examples=300)
@given(elements, elements, elements)
def test_associativity(g, h, k):
    lhs = compose(compose(g, h), k)
    rhs = compose(g, compose(h, k))
    assert abs(lhs.a - rhs.a) / max(lhs.a, rhs.a) < 1e-12
    assert abs(lhs.b - rhs.b) <= 1e-12 * (abs(lhs.b) + abs(rhs.b) + 1)


@settings(max_examples=300)
@given(elements)
def test_inverse_involution(g):
    gg = invert(invert(g))
    assert gg.approx_equal(g, tol=1e-9)


@settings(max_examples=300)
@given(elements, elements)
def test_inversion_antihomomorphism(g, h):
    lhs = invert(compose(g, h))
    rhs = compose(invert(h), invert(g))
    assert lhs.approx_equal(rhs, tol=1e-9)


@settings(max_examples=200)
@given(elements, elements, st.floats(-100, 100, allow_nan=False))
def test_action_axiom(g, h, x):
    v1 = act(compose(g, h), x)
    v2 = act(g, act(h, x))
    assert abs(v1 - v2) <= 1e-9 * (abs(v1) + abs(v2) + 1)


def test_walk_prefixes_empty():
    assert walk_prefixes([], "right") == [IDENTITY]
    assert walk_prefixes([], "left") == [IDENTITY]


def test_walk_prefixes_right_order():
    steps = [GroupElement(1, 2), GroupElement(3, 4)]
    assert walk_prefixes(steps, "right") == [IDENTITY, GroupElement(1, 2),
                                             GroupElement(7, 8)]


def test_walk_prefixes_left_vs_bruteforce():
    rng = np.random.default_rng(3)
    steps = [GroupElement(float(rng.normal()), float(np.exp(rng.normal())))
             for _ in range(10)]
    lefts = walk_prefixes(steps, "left")
    for n in range(len(steps) + 1):
        # brute-force fold of the reversed prefix
        acc = IDENTITY
        for g in reversed(steps[:n]):
            acc = compose(acc, g)
        assert lefts[n].approx_equal(acc, tol=1e-12)


def test_dilation_parts_agree():
    rng = np.random.default_rng(4)
    steps = [GroupElement(float(rng.normal()), float(np.exp(rng.normal())))
             for _ in range(12)]
    w = affine.GroupWalk(steps)
    la = np.array([g.a for g in w.left])
    ra = np.array([g.a for g in w.right])
    s_n = -np.concatenate([[0.0], np.cumsum([np.log(g.a) for g in steps])])
    assert np.allclose(la, ra, rtol=1e-12)
    assert np.allclose(np.log(ra), -s_n, atol=1e-9)


def test_walk_prefixes_bad_order():
    with pytest.raises(ValueError):
        walk_prefixes([], "up")


def _unit_step(rng):
    return GroupElement(1.0, 0.5)


def test_hitting_probability_trivial_regions():
    everything = lambda g: True
    nothing = lambda g: False
    est = estimate_hitting_probability(_unit_step, everything, 10, 50, seed=0)
    assert est.probability == 1.0
    est = estimate_hitting_probability(_unit_step, nothing, 10, 50, seed=0)
    assert est.probability == 0.0


def test_hitting_probability_deterministic_contraction():
    # (B, A) = (1, 1/2): a(R_n) = 2^-n falls below 1/4 deterministically
    region = lambda g: g.a < 0.25
    est = estimate_hitting_probability(_unit_step, region, 5, 20, seed=0)
    assert est.probability == 1.0


def test_hitting_probability_rejects_bad_sampler():
    bad = lambda rng: GroupElement.__new__(GroupElement)
    def bad_sampler(rng):
        g = GroupElement(0.0, 1.0)
        object.__setattr__(g, "a", -1.0)
        return g
    with pytest.raises(ValueError):
        estimate_hitting_probability(bad_sampler, lambda g: False, 5, 5, seed=0)


def test_wilson_interval_brackets():
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi > 0.0


def test_grown_window_hitting_stays_positive():
    """Dilated windows (0, z) V0 keep a uniformly positive hitting
    probability as z grows (statistical, pinned seed)."""
    rng_master = np.random.default_rng(11)

    def sampler(rng):
        return GroupElement(float(max(np.exp(rng.normal(0, 0.5)), 1.0)),
                            float(np.exp(rng.normal(0, 0.5))))

    probs = []
    for z in (1.0, 4.0, 16.0):
        region = scaled_window_region(b0=20.0, a0=8.0, z=z, side="left")
        est = estimate_hitting_probability(sampler, region, horizon=800,
                                           chains=400, seed=12)
        probs.append(est.probability)
    assert min(probs) > 0.05, probs
