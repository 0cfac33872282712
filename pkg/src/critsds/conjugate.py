"""Conjugations that bring map families to the normal form alpha = 0.

Three changes of variable: the power stretch sign(x)|x|^(1-alpha) (kills
a sublinear envelope exponent), the interval chart -1/u + 1/(1-u)
(turns automorphisms of [0,1] into asymptotically linear maps of R), and
the exponential scale (turns asymptotic translations into asymptotically
linear maps).  Each propagates (A, B) and verifies the resulting
envelope on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import transforms
from .maps import HALF_LINE, NATURALS, REALS, MapSample

__all__ = [
    "EnvelopeError",
    "Conjugator",
    "power_conjugator",
    "interval_conjugator",
    "exp_conjugator",
    "PowerConjugation",
    "power_conjugate",
    "BetaConstants",
    "beta_constants",
    "end_derivative_audit",
    "interval_conjugate",
    "exp_conjugate",
    "default_log_grid",
]


class EnvelopeError(RuntimeError):
    """An asserted envelope failed numerically."""


@dataclass(frozen=True)
class Conjugator:
    """A monotone bijection with its inverse."""

    forward: Callable
    inverse: Callable
    tag: str

    def roundtrip_error(self, grid: np.ndarray) -> float:
        grid = np.asarray(grid, dtype=float)
        back = self.inverse(self.forward(grid))
        scale = np.abs(grid) + 1.0
        return float(np.max(np.abs(back - grid) / scale))


def power_conjugator(alpha: float) -> Conjugator:
    if not (0 <= alpha < 1):
        raise ValueError("alpha must lie in [0, 1)")
    return Conjugator(lambda x: transforms.power_stretch(x, alpha),
                      lambda y: transforms.power_stretch_inv(y, alpha),
                      f"power({alpha})")


def interval_conjugator() -> Conjugator:
    return Conjugator(transforms.interval_to_line, transforms.line_to_interval,
                      "interval")


def exp_conjugator() -> Conjugator:
    return Conjugator(transforms.exp_scale, transforms.exp_scale_inv, "exponential")


def default_log_grid(hi: float = 1e8, n: int = 120, two_sided: bool = True) -> np.ndarray:
    g = np.logspace(-2, math.log10(hi), n)
    if two_sided:
        return np.concatenate([-g[::-1], [0.0], g])
    return np.concatenate([[0.0], g])


def _measured_b(evaluate, a, grid, safety=1.25) -> float:
    vals = np.asarray(evaluate(grid), dtype=float)
    err = np.abs(vals - a * grid)
    return max(float(err.max()) * safety, 1.0)


@dataclass(frozen=True)
class PowerConjugation:
    """Result of removing the envelope exponent by the power stretch."""

    map: MapSample
    b0: float
    c_alpha_empirical: float  # smallest C with log+ B0 <= C (|log A|+log+ B + 1)


def power_conjugate(m: MapSample, grid: np.ndarray | None = None) -> PowerConjugation:
    """Conjugate an (AL^alpha) map to (AL^0) form.

    The new slope is A^(1-alpha) exactly; the new B is the measured grid
    sup with a safety factor.  Raises EnvelopeError if the input map
    violates its own declared envelope on the pulled-back grid.
    """
    alpha = m.alpha
    if grid is None:
        grid = default_log_grid(two_sided=(m.domain == REALS))
    grid = np.asarray(grid, dtype=float)
    if alpha == 0.0:
        return PowerConjugation(m, m.B, _c_alpha(m.B, m))
    conj = power_conjugator(alpha)
    pulled = conj.inverse(grid)
    err_in = np.abs(np.asarray(m.evaluate(pulled), float) - m.A * pulled)
    if (err_in > m.B * (1.0 + np.abs(pulled) ** alpha) * (1 + 1e-9)).any():
        raise EnvelopeError("input map violates its declared (AL^alpha) envelope")
    a0 = m.A ** (1.0 - alpha)

    def ev(x, f=m.evaluate, c=conj):
        return c.forward(np.asarray(f(c.inverse(np.asarray(x, float))), float))

    dom = HALF_LINE if m.domain in (HALF_LINE, NATURALS) else REALS
    b0 = _measured_b(ev, a0, grid)
    out = MapSample(f"power_conj[{m.family}]", ev, A=a0, B=b0, alpha=0.0,
                    domain=dom, params=m.params)
    return PowerConjugation(out, b0, _c_alpha(b0, m))


def _c_alpha(b0: float, m: MapSample) -> float:
    denom = abs(math.log(m.A)) + math.log(max(m.B, 1.0)) + 1.0
    return math.log(max(b0, 1.0)) / denom


@dataclass(frozen=True)
class BetaConstants:
    """Grid inf/sup constants controlling an interval automorphism near its
    endpoints; all six must be positive/finite for the conjugation bound."""

    b0_1: float  # inf (1 - phi) on [0, 1/2]
    b0_2: float  # inf phi(u)/u on (0, 1/2]
    b0_3: float  # sup |phi(u) - a u| / u^2 on (0, 1/2]
    b1_1: float  # inf phi on [1/2, 1]
    b1_2: float  # inf (1 - phi(u))/(1 - u) on [1/2, 1)
    b1_3: float  # sup |phi(u) - 1 - a(u-1)| / (u-1)^2 on [1/2, 1)

    @property
    def ok(self) -> bool:
        pos = min(self.b0_1, self.b0_2, self.b1_1, self.b1_2) > 0
        fin = math.isfinite(self.b0_3) and math.isfinite(self.b1_3)
        return pos and fin


def _cheby_grid(lo: float, hi: float, n: int) -> np.ndarray:
    # endpoint-clustered nodes, exact endpoints excluded
    k = np.arange(1, n + 1)
    x = np.cos((2 * k - 1) * np.pi / (2 * n))
    return lo + (hi - lo) * (1 + x[::-1]) / 2


def beta_constants(phi: Callable, a_phi: float, n_grid: int = 10_000) -> BetaConstants:
    """Estimate the six endpoint constants on Chebyshev grids.

    The grids exclude the exact endpoints 0 and 1 where the ratio
    quantities are limits.
    """
    lo = _cheby_grid(0.0, 0.5, n_grid)
    hi = _cheby_grid(0.5, 1.0, n_grid)
    plo = np.asarray(phi(lo), dtype=float)
    phi_hi = np.asarray(phi(hi), dtype=float)
    return BetaConstants(
        b0_1=float((1.0 - plo).min()),
        b0_2=float((plo / lo).min()),
        b0_3=float((np.abs(plo - a_phi * lo) / lo**2).max()),
        b1_1=float(phi_hi.min()),
        b1_2=float(((1.0 - phi_hi) / (1.0 - hi)).min()),
        b1_3=float((np.abs(phi_hi - 1.0 - a_phi * (hi - 1.0)) / (hi - 1.0) ** 2).max()),
    )


def end_derivative_audit(phi: Callable, h: float = 1e-6) -> tuple[float, float, bool]:
    """One-sided derivative estimates at 0 and 1 and whether they agree."""
    d0 = (float(phi(h)) - float(phi(0.0))) / h
    d1 = (float(phi(1.0)) - float(phi(1.0 - h))) / h
    agree = abs(d0 - d1) <= 0.02 * max(abs(d0), abs(d1), 1e-12)
    return d0, d1, agree


# Constant in the conjugation bound for the chart -1/u + 1/(1-u); depends
# only on the chart.  32 dominates the measured sup for every audited
# family with comfortable slack.
INTERVAL_C_R = 32.0


def interval_conjugate(
    phi: Callable,
    a_phi: float,
    n_grid: int = 10_000,
    verify_grid: np.ndarray | None = None,
    strict: bool = True,
) -> MapSample:
    """Conjugate an automorphism of [0,1] to an asymptotically linear map.

    Requires phi(0) = 0, phi(1) = 1 and (asserted by the caller, audited
    when strict) equal end derivatives a_phi.  The slope of the conjugate
    is 1/a_phi; B comes from the endpoint-constant bound and is then
    verified against the measured envelope on the grid.
    """
    if not a_phi > 0:
        raise ValueError("a_phi must be positive")
    if abs(float(phi(0.0))) > 1e-12 or abs(float(phi(1.0)) - 1.0) > 1e-12:
        raise ValueError("phi must fix 0 and 1")
    if strict:
        d0, d1, agree = end_derivative_audit(phi)
        if not agree:
            raise ValueError(
                f"end derivatives differ: phi'(0)={d0:.6g}, phi'(1)={d1:.6g} "
                "(a_phi undefined; pass strict=False to assert it anyway)")
    betas = beta_constants(phi, a_phi, n_grid)
    if min(betas.b0_1, betas.b0_2, betas.b1_1, betas.b1_2) <= 0:
        raise ValueError(f"degenerate phi: nonpositive endpoint constant {betas}")
    a = 1.0 / a_phi
    b = INTERVAL_C_R * (
        (1.0 + a_phi + betas.b0_3) / (a_phi * betas.b0_2)
        + 1.0 / betas.b0_1
        + (1.0 + a_phi + betas.b1_3) / (a_phi * betas.b1_2)
        + 1.0 / betas.b1_1
    )
    conj = interval_conjugator()

    def ev(x, f=phi, c=conj):
        return c.forward(np.asarray(f(c.inverse(np.asarray(x, float))), float))

    if verify_grid is None:
        verify_grid = default_log_grid(hi=1e6)
    measured = np.abs(np.asarray(ev(verify_grid), float) - a * verify_grid).max()
    if measured > b:
        raise EnvelopeError(
            f"endpoint-constant bound B={b:.4g} exceeded on grid (sup {measured:.4g})")
    return MapSample("interval_conj", ev, A=a, B=float(b), alpha=0.0,
                     domain=REALS, params=(a_phi,))


def exp_conjugate(
    phi: Callable,
    u: float,
    v: float,
    domain: str = HALF_LINE,
    audit_grid: np.ndarray | None = None,
    verify_grid: np.ndarray | None = None,
) -> MapSample:
    """Conjugate an asymptotic translation by the exponential scale.

    phi must satisfy |phi(x) - x + sign(x) u| <= v e^(-|x|) (audited on
    audit_grid); the conjugate s . phi . s^-1 has slope e^(-u), with B
    measured on verify_grid.
    """
    if audit_grid is None:
        audit_grid = (np.linspace(0, 40, 2001) if domain == HALF_LINE
                      else np.linspace(-40, 40, 4001))
    audit_grid = np.asarray(audit_grid, dtype=float)
    vals = np.asarray(phi(audit_grid), dtype=float)
    err = np.abs(vals - audit_grid + np.sign(audit_grid) * u)
    bound = v * np.exp(-np.abs(audit_grid))
    if (err > bound + 1e-12).any():
        i = int(np.argmax(err - bound))
        raise EnvelopeError(
            f"translation envelope fails at x={audit_grid[i]:.6g}: "
            f"err={err[i]:.4g} > {bound[i]:.4g}")
    conj = exp_conjugator()

    def ev(x, f=phi, c=conj):
        return c.forward(np.asarray(f(c.inverse(np.asarray(x, float))), float))

    a = math.exp(-u)
    if verify_grid is None:
        verify_grid = default_log_grid(hi=1e8, two_sided=(domain == REALS))
    b = _measured_b(ev, a, verify_grid)
    return MapSample("exp_conj", ev, A=a, B=b, alpha=0.0, domain=domain,
                     params=(u, v))
