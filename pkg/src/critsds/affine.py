"""The affine group of the real line and random walks on it.

Elements are pairs (b, a) with a > 0, acting as x -> a*x + b.  Products
compose left-to-right as maps: (b,a)*(b',a') = (b + a*b', a*a').  The
left walk L_n = g_n...g_1 drives forward orbits, the right walk
R_n = g_1...g_n drives backward compositions; both share the dilation
part a(L_n) = a(R_n) = a_1...a_n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .rng import chain_rng

__all__ = [
    "GroupElement",
    "GroupWalk",
    "IDENTITY",
    "compose",
    "invert",
    "act",
    "walk_prefixes",
    "HitEstimate",
    "estimate_hitting_probability",
    "window_region",
    "scaled_window_region",
]


@dataclass(frozen=True)
class GroupElement:
    """Affine map x -> a*x + b with positive dilation a."""

    b: float
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"dilation part must be positive, got a={self.a}")

    def __call__(self, x: float) -> float:
        return self.a * x + self.b

    def approx_equal(self, other: "GroupElement", tol: float = 1e-12) -> bool:
        """Tolerance equality: relative in a, absolute in b scaled by |b|+1."""
        da = abs(self.a - other.a) / max(self.a, other.a)
        db = abs(self.b - other.b) / (abs(self.b) + abs(other.b) + 1.0)
        return da <= tol and db <= tol


IDENTITY = GroupElement(0.0, 1.0)


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    return GroupElement(g.b + g.a * h.b, g.a * h.a)


def invert(g: GroupElement) -> GroupElement:
    return GroupElement(-g.b / g.a, 1.0 / g.a)


def act(g: GroupElement, x: float) -> float:
    return g.a * x + g.b


def walk_prefixes(steps: Sequence[GroupElement], order: str) -> list[GroupElement]:
    """Prefix products of a step sequence.

    order="right": prefixes of R_n = g_1 * ... * g_n (new steps multiply
    on the right); order="left": prefixes of L_n = g_n * ... * g_1.
    Prefix 0 is the identity.
    """
    if order not in ("left", "right"):
        raise ValueError("order must be 'left' or 'right'")
    out = [IDENTITY]
    acc = IDENTITY
    for g in steps:
        acc = compose(acc, g) if order == "right" else compose(g, acc)
        out.append(acc)
    return out


class GroupWalk:
    """A realized walk: steps plus both families of prefix products."""

    def __init__(self, steps: Sequence[GroupElement]):
        self.steps = list(steps)
        self.left = walk_prefixes(self.steps, "left")
        self.right = walk_prefixes(self.steps, "right")

    def dilations(self) -> np.ndarray:
        """a(L_n) = a(R_n) for every prefix n."""
        return np.array([g.a for g in self.right])


@dataclass(frozen=True)
class HitEstimate:
    """Finite-horizon hitting probability with a Wilson 95% CI.

    The estimate is a lower bound in spirit: P(T <= horizon) <= P(T < inf),
    so the horizon is always carried with the number.
    """

    probability: float
    ci_low: float
    ci_high: float
    hits: int
    chains: int
    horizon: int

    def as_dict(self) -> dict:
        return {
            "probability": self.probability,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "hits": self.hits,
            "chains": self.chains,
            "horizon": self.horizon,
        }


def wilson_interval(hits: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n <= 0:
        raise ValueError("need at least one trial")
    p = hits / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * np.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if hits == 0 else max(0.0, center - half)
    hi = 1.0 if hits == n else min(1.0, center + half)
    return lo, hi


def estimate_hitting_probability(
    step_sampler: Callable[[np.random.Generator], GroupElement],
    region: Callable[[GroupElement], bool],
    horizon: int,
    chains: int,
    seed: int,
) -> HitEstimate:
    """Fraction of right walks entering `region` by `horizon`.

    The walk starts at the identity (n = 0 counts: a region containing
    the identity is hit immediately).  Chains use independent derived
    streams and merge by count addition.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if chains < 1:
        raise ValueError("chains must be >= 1")
    hits = 0
    for c in range(chains):
        rng = chain_rng(seed, c)
        g = IDENTITY
        if region(g):
            hits += 1
            continue
        for _ in range(horizon):
            step = step_sampler(rng)
            if not step.a > 0:
                raise ValueError("step sampler produced a <= 0")
            g = compose(g, step)
            if region(g):
                hits += 1
                break
    lo, hi = wilson_interval(hits, chains)
    return HitEstimate(hits / chains, lo, hi, hits, chains, horizon)


def window_region(b0: float, a0: float) -> Callable[[GroupElement], bool]:
    """Compact window {(b,a): |b| < b0, 1/a0 < a < a0}."""
    if not (b0 > 0 and a0 > 1):
        raise ValueError("need b0 > 0 and a0 > 1")
    return lambda g: abs(g.b) < b0 and 1.0 / a0 < g.a < a0

def scaled_window_region(b0: float, a0: float, z: float, side: str) -> Callable[[GroupElement], bool]:
    """The window translated by the dilation (0, z).

    side="left": (0,z)*V0 = {|b| < z*b0, z/a0 < a < z*a0}   (grows with z)
    side="right": V0*(0,1/z) = {|b| < b0, 1/(z*a0) < a < a0/z}  (shrinks)
    """
    if side == "left":
        return lambda g: abs(g.b) < z * b0 and z / a0 < g.a < z * a0
    if side == "right":
        return lambda g: abs(g.b) < b0 and 1.0 / (z * a0) < g.a < a0 / z
    raise ValueError("side must be 'left' or 'right'")
