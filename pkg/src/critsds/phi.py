"""Named compactly supported test functions.

Diagnostics take their phi from this small library (an indicator or a C1
piecewise-cubic bump) so scenario configs stay declarative and runs stay
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["PhiFunction", "indicator", "bump", "phi_from_config"]


@dataclass(frozen=True)
class PhiFunction:
    name: str
    fn: Callable
    support: tuple[float, float]

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))

    def integral(self, weight: str = "du", n: int = 200_001) -> float:
        """Numeric integral of phi (weight "du") or phi(u)/u ("du_over_u")."""
        a, b = self.support
        xs = np.linspace(a, b, n)
        vals = self(xs)
        if weight == "du_over_u":
            if a <= 0:
                raise ValueError("du/u weight needs support in (0, inf)")
            vals = vals / xs
        return float(np.trapezoid(vals, xs))

    def as_config(self) -> dict:
        return {"name": self.name}


def indicator(a: float, b: float) -> PhiFunction:
    if not b > a:
        raise ValueError("need b > a")
    return PhiFunction(f"indicator[{a},{b}]",
                       lambda x: ((x >= a) & (x < b)).astype(float), (a, b))


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def bump(a: float, b: float) -> PhiFunction:
    """C1 plateau bump: cubic ramps over the outer quarters of [a, b]."""
    if not b > a:
        raise ValueError("need b > a")
    w = (b - a) / 4.0

    def fn(x):
        up = _smoothstep((x - a) / w)
        down = _smoothstep((b - x) / w)
        return np.minimum(up, down) * ((x >= a) & (x <= b))

    return PhiFunction(f"bump[{a},{b}]", fn, (a, b))


def phi_from_config(obj: dict | str) -> PhiFunction:
    """Parse "indicator[a,b]" / "bump[a,b]" (or {"name": ...})."""
    name = obj["name"] if isinstance(obj, dict) else obj
    kind, _, rest = name.partition("[")
    if not rest.endswith("]"):
        raise ValueError(f"malformed phi name {name!r}")
    a, b = (float(v) for v in rest[:-1].split(","))
    if kind == "indicator":
        return indicator(a, b)
    if kind == "bump":
        return bump(a, b)
    raise ValueError(f"unknown phi kind {kind!r}")
